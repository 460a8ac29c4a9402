//! Time integration of the master equation.
//!
//! The state is never renormalized; trace drift and loss of positivity are
//! monitored and reported instead.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opalg::{Matrix, Vector, C64, ZERO};

use super::observables::{hermiticity_error, min_eigenvalue, trace_error};
use super::{LindbladModel, Liouvillian, HERMITIAN_TOL};

/// `dt · (‖H‖ + Σ‖L†L‖)` must stay below this for the fixed-step method.
pub const STABILITY_LIMIT: f64 = 0.1;
/// Largest tolerated `|tr ρ − 1|` at any accepted step.
pub const TRACE_TOL: f64 = 1e-8;
/// Samples with a smaller eigenvalue are flagged as positivity violations.
pub const POSITIVITY_TOL: f64 = -1e-7;

pub const DEFAULT_RTOL: f64 = 1e-9;
pub const DEFAULT_ATOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Method {
    /// Classical fourth-order Runge–Kutta with a fixed step.
    Rk4 { dt: f64 },
    /// Dormand–Prince 5(4) with error-controlled step size.
    DormandPrince { rtol: f64, atol: f64 },
}

impl Default for Method {
    fn default() -> Self {
        Method::DormandPrince {
            rtol: DEFAULT_RTOL,
            atol: DEFAULT_ATOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhsForm {
    #[default]
    Superoperator,
    Commutator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub method: Method,
    pub t_max: f64,
    /// Time between samples. The final sample is always at `t_max`.
    pub sample_interval: f64,
    #[serde(default)]
    pub rhs: RhsForm,
    pub max_steps: usize,
    /// Smallest adaptive step, relative to `max(1, t)`.
    pub h_min: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            method: Method::default(),
            t_max: 20.0,
            sample_interval: 0.1,
            rhs: RhsForm::Superoperator,
            max_steps: 50_000_000,
            h_min: 1e-13,
        }
    }
}

impl IntegratorOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        match self.method {
            Method::Rk4 { dt } if !(dt > 0.0 && dt.is_finite()) => return bad("dt must be positive"),
            Method::DormandPrince { rtol, atol } if !(rtol > 0.0 && atol > 0.0) => {
                return bad("tolerances must be positive")
            }
            _ => {}
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return bad("t_max must be finite and non-negative");
        }
        if !(self.sample_interval > 0.0 && self.sample_interval.is_finite()) {
            return bad("sample interval must be positive");
        }
        Ok(())
    }

    /// Sample instants `0, Δ, 2Δ, …` strictly below `t_max`, then `t_max`.
    pub fn sample_times(&self) -> Vec<f64> {
        let mut times = vec![0.0];
        let mut k = 1u64;
        loop {
            let t = k as f64 * self.sample_interval;
            if t >= self.t_max * (1.0 - 1e-12) {
                break;
            }
            times.push(t);
            k += 1;
        }
        if self.t_max > 0.0 {
            times.push(self.t_max);
        }
        times
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub fidelity: f64,
    pub trace_error: f64,
    pub min_eig: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FidelityTrace {
    pub samples: Vec<Sample>,
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
    pub positivity_violated: bool,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl FidelityTrace {
    pub fn fidelities(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.fidelity).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }
}

/// Result of a run that may have stopped early. `trace` holds every sample
/// taken before the failure.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trace: FidelityTrace,
    pub final_state: Matrix,
    pub failure: Option<Error>,
}

enum Rhs<'a> {
    Sparse(Liouvillian),
    Reference(&'a LindbladModel),
}

impl Rhs<'_> {
    fn eval(&self, n: usize, x: &[C64], out: &mut [C64]) {
        match self {
            Rhs::Sparse(l) => l.apply(x, out),
            Rhs::Reference(model) => {
                let rho = Matrix::from_column_slice(n, n, x);
                let d = model.rhs(&rho).expect("shape fixed by the model");
                out.copy_from_slice(d.as_slice());
            }
        }
    }
}

fn check_initial(model: &LindbladModel, rho0: &Matrix, psi0: &Vector) -> Result<()> {
    let n = model.dim();
    if rho0.nrows() != n || rho0.ncols() != n {
        return Err(Error::MatrixShape {
            rows: rho0.nrows(),
            cols: rho0.ncols(),
            dim: n,
        });
    }
    if psi0.len() != n {
        return Err(Error::InvalidState(format!(
            "reference state has dimension {}, expected {n}",
            psi0.len()
        )));
    }
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState("reference state is not normalized".into()));
    }
    if hermiticity_error(rho0) > HERMITIAN_TOL {
        return Err(Error::InvalidState("initial state is not Hermitian".into()));
    }
    if trace_error(rho0) > 1e-10 {
        return Err(Error::InvalidState("initial state does not have unit trace".into()));
    }
    if min_eigenvalue(rho0) < POSITIVITY_TOL {
        return Err(Error::InvalidState("initial state is not positive".into()));
    }
    Ok(())
}

fn trace_of(x: &[C64], n: usize) -> C64 {
    (0..n).map(|i| x[i * (n + 1)]).sum()
}

struct Monitor<'a> {
    psi0: &'a Vector,
    n: usize,
    trace: FidelityTrace,
}

impl Monitor<'_> {
    fn sample(&mut self, t: f64, x: &[C64]) {
        let rho = Matrix::from_column_slice(self.n, self.n, x);
        let fidelity = (self.psi0.adjoint() * &rho * self.psi0)[(0, 0)].re;
        let te = trace_error(&rho);
        let me = min_eigenvalue(&rho);
        let he = hermiticity_error(&rho);
        let tr = &mut self.trace;
        tr.max_trace_error = tr.max_trace_error.max(te);
        tr.max_hermiticity_error = tr.max_hermiticity_error.max(he);
        tr.min_eigenvalue = tr.min_eigenvalue.min(me);
        if me < POSITIVITY_TOL && !tr.positivity_violated {
            log::warn!("positivity violated at t = {t}: min eigenvalue {me:.3e}");
            tr.positivity_violated = true;
        }
        tr.samples.push(Sample {
            t,
            fidelity,
            trace_error: te,
            min_eig: me,
        });
    }
}

/// Integrate and return the sampled fidelity trace; any failure is an error.
pub fn integrate(
    model: &LindbladModel,
    rho0: &Matrix,
    opts: &IntegratorOptions,
    psi0: &Vector,
) -> Result<FidelityTrace> {
    let out = run(model, rho0, opts, psi0)?;
    match out.failure {
        Some(e) => Err(e),
        None => Ok(out.trace),
    }
}

/// Integrate, keeping partial results on failure. Returns `Err` only for
/// invalid inputs.
pub fn run(
    model: &LindbladModel,
    rho0: &Matrix,
    opts: &IntegratorOptions,
    psi0: &Vector,
) -> Result<RunOutcome> {
    opts.validate()?;
    check_initial(model, rho0, psi0)?;
    let n = model.dim();
    let rhs = match opts.rhs {
        RhsForm::Superoperator => Rhs::Sparse(Liouvillian::from_model(model)),
        RhsForm::Commutator => Rhs::Reference(model),
    };
    let mut monitor = Monitor {
        psi0,
        n,
        trace: FidelityTrace {
            min_eigenvalue: f64::INFINITY,
            ..Default::default()
        },
    };
    let mut y: Vec<C64> = rho0.as_slice().to_vec();
    let times = opts.sample_times();
    monitor.sample(0.0, &y);
    let failure = match opts.method {
        Method::Rk4 { dt } => {
            let guard = dt * model.generator_norm();
            if guard >= STABILITY_LIMIT {
                Some(Error::StabilityGuard(guard))
            } else {
                rk4(&rhs, n, &mut y, &times, dt, opts, &mut monitor).err()
            }
        }
        Method::DormandPrince { rtol, atol } => dopri(
            &rhs,
            n,
            &mut y,
            &times,
            (rtol, atol),
            model.generator_norm(),
            opts,
            &mut monitor,
        )
        .err(),
    };
    if let Some(e) = &failure {
        log::warn!("integration stopped: {e}");
    }
    Ok(RunOutcome {
        trace: monitor.trace,
        final_state: Matrix::from_column_slice(n, n, &y),
        failure,
    })
}

fn check_trace(t: f64, x: &[C64], n: usize) -> Result<()> {
    let drift = (trace_of(x, n) - crate::opalg::ONE).norm();
    if drift > TRACE_TOL || !drift.is_finite() {
        return Err(Error::TraceDrift { t, drift });
    }
    Ok(())
}

fn rk4(
    rhs: &Rhs,
    n: usize,
    y: &mut [C64],
    times: &[f64],
    dt: f64,
    opts: &IntegratorOptions,
    monitor: &mut Monitor,
) -> Result<()> {
    let len = y.len();
    let mut k = [vec![ZERO; len], vec![ZERO; len], vec![ZERO; len], vec![ZERO; len]];
    let mut tmp = vec![ZERO; len];
    let mut t = 0.0;
    let mut steps = 0usize;
    for &target in &times[1..] {
        while t < target {
            let remaining = target - t;
            // Finish exactly on the sample when within a hair of it.
            let (h, lands) = if remaining <= dt * (1.0 + 1e-9) {
                (remaining, true)
            } else {
                (dt, false)
            };
            rhs.eval(n, y, &mut k[0]);
            for i in 0..len {
                tmp[i] = y[i] + k[0][i] * (0.5 * h);
            }
            rhs.eval(n, &tmp, &mut k[1]);
            for i in 0..len {
                tmp[i] = y[i] + k[1][i] * (0.5 * h);
            }
            rhs.eval(n, &tmp, &mut k[2]);
            for i in 0..len {
                tmp[i] = y[i] + k[2][i] * h;
            }
            rhs.eval(n, &tmp, &mut k[3]);
            for i in 0..len {
                y[i] += (k[0][i] + (k[1][i] + k[2][i]) * 2.0 + k[3][i]) * (h / 6.0);
            }
            t = if lands { target } else { t + h };
            steps += 1;
            monitor.trace.accepted_steps = steps;
            check_trace(t, y, n)?;
            if steps > opts.max_steps {
                return Err(Error::StepLimit { t, steps });
            }
        }
        monitor.sample(target, y);
    }
    Ok(())
}

// Dormand–Prince 5(4) tableau; the generator is autonomous so the nodes
// are not needed.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[allow(clippy::too_many_arguments)]
fn dopri(
    rhs: &Rhs,
    n: usize,
    y: &mut Vec<C64>,
    times: &[f64],
    (rtol, atol): (f64, f64),
    generator_norm: f64,
    opts: &IntegratorOptions,
    monitor: &mut Monitor,
) -> Result<()> {
    let len = y.len();
    let mut k1 = vec![ZERO; len];
    let mut k2 = vec![ZERO; len];
    let mut k3 = vec![ZERO; len];
    let mut k4 = vec![ZERO; len];
    let mut k5 = vec![ZERO; len];
    let mut k6 = vec![ZERO; len];
    let mut k7 = vec![ZERO; len];
    let mut tmp = vec![ZERO; len];
    let mut y_new = vec![ZERO; len];

    let mut t = 0.0;
    let mut h = 0.01 / generator_norm.max(1e-3);
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut last_rejected = false;
    rhs.eval(n, y, &mut k1);

    for &target in &times[1..] {
        while t < target {
            let remaining = target - t;
            let lands = h >= remaining * (1.0 - 1e-12);
            let step = if lands { remaining } else { h };
            if step < opts.h_min * t.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { t, h: step });
            }

            for i in 0..len {
                tmp[i] = y[i] + k1[i] * (step * A21);
            }
            rhs.eval(n, &tmp, &mut k2);
            for i in 0..len {
                tmp[i] = y[i] + (k1[i] * A31 + k2[i] * A32) * step;
            }
            rhs.eval(n, &tmp, &mut k3);
            for i in 0..len {
                tmp[i] = y[i] + (k1[i] * A41 + k2[i] * A42 + k3[i] * A43) * step;
            }
            rhs.eval(n, &tmp, &mut k4);
            for i in 0..len {
                tmp[i] = y[i] + (k1[i] * A51 + k2[i] * A52 + k3[i] * A53 + k4[i] * A54) * step;
            }
            rhs.eval(n, &tmp, &mut k5);
            for i in 0..len {
                tmp[i] = y[i]
                    + (k1[i] * A61 + k2[i] * A62 + k3[i] * A63 + k4[i] * A64 + k5[i] * A65)
                        * step;
            }
            rhs.eval(n, &tmp, &mut k6);
            for i in 0..len {
                y_new[i] = y[i]
                    + (k1[i] * B1 + k3[i] * B3 + k4[i] * B4 + k5[i] * B5 + k6[i] * B6) * step;
            }
            rhs.eval(n, &y_new, &mut k7);

            let mut acc = 0.0;
            for i in 0..len {
                let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6
                    + k7[i] * E7)
                    * step;
                let scale = atol + rtol * y[i].norm().max(y_new[i].norm());
                acc += (e.norm() / scale).powi(2);
            }
            let err = (acc / len as f64).sqrt();

            if err <= 1.0 {
                t = if lands { target } else { t + step };
                std::mem::swap(y, &mut y_new);
                std::mem::swap(&mut k1, &mut k7);
                accepted += 1;
                check_trace(t, y, n)?;
                let grow = if last_rejected { 1.0 } else { 5.0 };
                let factor = if err == 0.0 {
                    grow
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, grow)
                };
                // A step clamped onto a sample says nothing about the natural size.
                h = if lands { h.max(step * factor) } else { step * factor };
                last_rejected = false;
            } else {
                rejected += 1;
                h = step * (0.9 * err.powf(-0.2)).max(0.2);
                last_rejected = true;
            }
            monitor.trace.accepted_steps = accepted;
            monitor.trace.rejected_steps = rejected;
            if accepted + rejected > opts.max_steps {
                return Err(Error::StepLimit {
                    t,
                    steps: accepted + rejected,
                });
            }
        }
        monitor.sample(target, y);
    }
    Ok(())
}
