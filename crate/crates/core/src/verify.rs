//! Self-check suite: algebraic identities, closed-form comparisons and
//! short dynamical checks, each reported as pass/fail with its measured
//! deviation.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::components::{
    beamsplitter, probe_reflection, raman_response, relay_routing, relay_set, ProbeAtom,
    ProbePhysicalParams, RamanPhysicalParams, Variant,
};
use crate::error::Result;
use crate::lindblad::{integrate, IntegratorOptions, Liouvillian};
use crate::network::{
    assemble_memory, build_feedback_subnet_prelimit, build_probe_subnet, codeword_state,
    feedback_extraction, prelimit_space, printed, hadamard_conjugate, stark_shift_table,
    MemoryParams, Side,
};
use crate::opalg::{c, max_abs_diff, CompositeSpace, Operator, QubitOps, C64, EXACT_TOL};
use crate::slh::{
    coherent_drive, extract_displacements, random_triple, series, Displacement, SlhTriple,
    Validation,
};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status}  {:<28} {}", self.name, self.detail)
    }
}

/// Deliberate corruptions used to show that checks can fail.
#[derive(Debug, Clone, Copy, Default)]
pub struct Hooks {
    /// Build the R1 routing relay with `S₁₁ = (I + Z)/2` instead of
    /// `(I - Z)/2`.
    pub corrupt_relay_sign: bool,
}

const SEED: u64 = 0x5eed_c0de;
const RANDOM_TRIPLES: usize = 20;

fn check(name: &'static str, outcome: Result<(bool, String)>) -> Check {
    match outcome {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn bounded(name: &'static str, err: Result<f64>, tol: f64) -> Check {
    check(name, err.map(|e| (e < tol, format!("max deviation {e:.2e} (tol {tol:.0e})"))))
}

pub fn run_suite(hooks: &Hooks) -> Vec<Check> {
    vec![
        bounded("component-unitarity", component_unitarity(hooks), EXACT_TOL),
        bounded("slh-decomposition", decomposition_identities(), EXACT_TOL),
        bounded("slh-associativity", associativity(), EXACT_TOL),
        bounded("displacement-extraction", extraction_round_trip(), EXACT_TOL),
        bounded("probe-subnet-closed-form", probe_closed_form(), EXACT_TOL),
        bounded("feedback-subnet-closed-form", feedback_closed_form(), EXACT_TOL),
        check("stark-row-sums", stark_sums()),
        check("stark-table-printed", stark_printed()),
        bounded("codeword-stationarity", stationarity(), 1e-8),
        check("probe-convergence", probe_convergence()),
        check("raman-convergence", raman_convergence()),
        bounded("phase-flip-equivalence", phase_flip_equivalence(), EXACT_TOL),
    ]
}

fn corrupted_routing(space: &Arc<CompositeSpace>, label: &str) -> Result<SlhTriple> {
    let q = QubitOps::new(space, label)?;
    let id = Operator::identity(space);
    let s11 = (&id + &q.z).scale(c(0.5));
    let s = vec![vec![s11, -&q.pi_h], vec![-&q.pi_h, q.pi_g.clone()]];
    let zeros = vec![Operator::zero(space), Operator::zero(space)];
    SlhTriple::with_validation(s, zeros, Operator::zero(space), Validation::Skip)
}

fn component_unitarity(hooks: &Hooks) -> Result<f64> {
    let sp = CompositeSpace::memory_cell();
    let r1_routing = if hooks.corrupt_relay_sign {
        corrupted_routing(&sp, "R1")?
    } else {
        relay_routing(&sp, "R1")?
    };
    let parts = [
        r1_routing,
        relay_routing(&sp, "R2")?,
        relay_set(&sp, "R1")?,
        relay_set(&sp, "R2")?,
        beamsplitter(&sp),
    ];
    Ok(parts.iter().map(SlhTriple::unitarity_error).fold(0.0, f64::max))
}

fn random_raw(rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..211).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn small_space() -> Arc<CompositeSpace> {
    CompositeSpace::new([("A", 2), ("B", 2)]).expect("fixed labels")
}

/// `G = (I, L, H) ◁ (S, 0, 0)` and `G = (S, 0, 0) ◁ (I, S†L, H)`.
fn decomposition_identities() -> Result<f64> {
    let sp = small_space();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for i in 0..RANDOM_TRIPLES {
        let n = 1 + i % 3;
        let g = random_triple(&sp, n, &random_raw(&mut rng));
        let s_only = g.scattering_only();
        let id = SlhTriple::trivial(&sp, n);
        let couplings = SlhTriple::new(
            (0..n).map(|r| (0..n).map(|c| id.s(r, c).clone()).collect()).collect(),
            g.couplings().to_vec(),
            g.h().clone(),
        )?;
        worst = worst.max(series(&couplings, &s_only)?.max_abs_diff(&g)?);
        let inner = extract_displacements(&g, &Displacement::zeros(n))?.inner;
        worst = worst.max(series(&s_only, &inner)?.max_abs_diff(&g)?);
    }
    Ok(worst)
}

fn associativity() -> Result<f64> {
    let sp = small_space();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut worst: f64 = 0.0;
    for i in 0..RANDOM_TRIPLES {
        let n = 1 + i % 2;
        let a = random_triple(&sp, n, &random_raw(&mut rng));
        let b = random_triple(&sp, n, &random_raw(&mut rng));
        let g = random_triple(&sp, n, &random_raw(&mut rng));
        let left = series(&series(&a, &b)?, &g)?;
        let right = series(&a, &series(&b, &g)?)?;
        worst = worst.max(left.max_abs_diff(&right)?);
    }
    Ok(worst)
}

fn random_drive(rng: &mut ChaCha8Rng, n: usize) -> Displacement {
    Displacement(
        (0..n)
            .map(|_| C64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
            .collect(),
    )
}

/// `(S,0,0) ◁ W_d ◁ G̃ == coherent_drive(G⁰, d)`, on random triples and on
/// the feedback subnet, plus `G̃_f` against its printed form.
fn extraction_round_trip() -> Result<f64> {
    let sp = small_space();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let mut worst: f64 = 0.0;
    for i in 0..RANDOM_TRIPLES {
        let n = 1 + i % 3;
        let g = random_triple(&sp, n, &random_raw(&mut rng));
        let d = random_drive(&mut rng, n);
        let x = extract_displacements(&g, &d)?;
        worst = worst.max(x.recompose()?.max_abs_diff(&coherent_drive(&g, &d)?)?);
    }
    let sp = prelimit_space();
    let beta = C64::new(1.1, -0.3);
    for side in [Side::Left, Side::Right] {
        let x = feedback_extraction(&sp, side, beta, 0.8, 4.0, 2.0, Variant::BitFlip)?;
        let driven = build_feedback_subnet_prelimit(&sp, side, beta, 0.8, 4.0, 2.0, Variant::BitFlip)?;
        worst = worst.max(x.recompose()?.max_abs_diff(&driven)?);
        let inner = printed::feedback_inner(&sp, side, beta, 0.8, 4.0, 2.0)?;
        worst = worst.max(x.inner.max_abs_diff(&inner)?);
    }
    Ok(worst)
}

fn probe_closed_form() -> Result<f64> {
    let sp = CompositeSpace::memory_cell();
    let mut worst: f64 = 0.0;
    for variant in [Variant::BitFlip, Variant::PhaseFlip] {
        for side in [Side::Left, Side::Right] {
            let g = build_probe_subnet(&sp, side, 1.3, variant)?;
            let ls = printed::probe_couplings(&sp, side, 1.3, variant)?;
            let s = printed::probe_scattering(&sp, side, variant)?;
            for i in 0..2 {
                worst = worst.max(g.l(i).max_abs_diff(&ls[i])?);
                for j in 0..2 {
                    worst = worst.max(g.s(i, j).max_abs_diff(&s[i][j])?);
                }
            }
            worst = worst.max(g.h().max_abs());
        }
    }
    Ok(worst)
}

fn feedback_closed_form() -> Result<f64> {
    let sp = prelimit_space();
    let beta = C64::new(0.9, 0.4);
    let mut worst: f64 = 0.0;
    for side in [Side::Left, Side::Right] {
        for k in [1.0, 2.0] {
            let g = build_feedback_subnet_prelimit(&sp, side, beta, 0.6, 3.0, k, Variant::BitFlip)?;
            let p = printed::feedback_subnet(&sp, side, beta, 0.6, 3.0, k)?;
            worst = worst.max(g.max_abs_diff(&p)?);
        }
    }
    Ok(worst)
}

fn stark_sums() -> Result<(bool, String)> {
    let rows = stark_shift_table();
    let bad: Vec<String> = rows
        .iter()
        .filter(|r| r.total() != -2.0)
        .map(|r| r.qubits.iter().collect())
        .collect();
    Ok((bad.is_empty(), format!("{} of 8 rows sum to -2Ω", 8 - bad.len())))
}

/// Compares the table computed from the feedback Hamiltonian with the
/// printed table, row by row.
fn stark_printed() -> Result<(bool, String)> {
    let rows = stark_shift_table();
    let mismatched: Vec<String> = rows
        .iter()
        .zip(printed::STARK_TABLE.iter())
        .filter(|(r, (q, rel, shifts))| {
            r.qubits.iter().collect::<String>() != *q
                || r.relays.iter().collect::<String>() != *rel
                || r.shifts != *shifts
        })
        .map(|(r, _)| r.qubits.iter().collect())
        .collect();
    let detail = if mismatched.is_empty() {
        "all 8 rows match".to_string()
    } else {
        format!("rows differing per qubit: {}", mismatched.join(" "))
    };
    Ok((mismatched.is_empty(), detail))
}

/// Worst `|1 - F(t)|` for the error-free codeword up to `t = 10/Ω`.
fn stationarity() -> Result<f64> {
    let omega = 90.0;
    let params = MemoryParams {
        gamma_flip: 0.0,
        ..MemoryParams::standard(omega)
    };
    let model = assemble_memory(&params)?;
    let psi = codeword_state(Variant::BitFlip);
    let rho0 = &psi * psi.adjoint();
    let opts = IntegratorOptions {
        t_max: 10.0 / omega,
        sample_interval: 1.0 / omega,
        ..Default::default()
    };
    let trace = integrate(&model, &rho0, &opts, &psi)?;
    Ok(trace
        .samples
        .iter()
        .map(|s| (1.0 - s.fidelity).abs())
        .fold(0.0, f64::max))
}

pub const CONVERGENCE_K: [f64; 4] = [1.0, 2.0, 4.0, 8.0];

fn probe_convergence() -> Result<(bool, String)> {
    let mut coupled = Vec::new();
    let mut uncoupled = Vec::new();
    for k in CONVERGENCE_K {
        let p = ProbePhysicalParams { k, ..Default::default() };
        coupled.push(probe_reflection(&p, ProbeAtom::Coupled)?);
        uncoupled.push(probe_reflection(&p, ProbeAtom::Uncoupled)?);
    }
    let dist: Vec<f64> = coupled.iter().map(|r| r.limit_error(ProbeAtom::Coupled)).collect();
    let last = coupled.last().expect("non-empty").phase_error(ProbeAtom::Coupled);
    let last_u = uncoupled.last().expect("non-empty").phase_error(ProbeAtom::Uncoupled);
    let monotone = dist.windows(2).all(|w| w[1] < w[0]);
    let passed = monotone && last < 0.05 && last_u < 0.05;
    Ok((
        passed,
        format!(
            "|r - r_lim| = {}; phase error at k=8: {last:.1e} / {last_u:.1e} rad",
            dist.iter().map(|d| format!("{d:.3}")).collect::<Vec<_>>().join(", ")
        ),
    ))
}

fn raman_convergence() -> Result<(bool, String)> {
    let mut rel = Vec::new();
    let mut leak = Vec::new();
    let limit = RamanPhysicalParams::default().rabi_frequency();
    for k in CONVERGENCE_K {
        let r = raman_response(&RamanPhysicalParams { k, ..Default::default() })?;
        rel.push((r.rabi - limit).abs() / limit);
        leak.push(r.leakage);
    }
    let ratio = leak[2] / leak[3];
    let passed = rel[3] < 0.05 && (ratio - 4.0).abs() < 0.2;
    Ok((
        passed,
        format!("Rabi error at k=8 {:.2e}; leakage ratio k=4/k=8 {ratio:.3}", rel[3]),
    ))
}

fn phase_flip_equivalence() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for stark_compensated in [false, true] {
        for omega in [30.0, 210.0] {
            let bit = MemoryParams {
                stark_compensated,
                ..MemoryParams::standard(omega)
            };
            let phase = MemoryParams {
                variant: Variant::PhaseFlip,
                ..bit.clone()
            };
            let rotated = hadamard_conjugate(&assemble_memory(&bit)?)?;
            worst = worst.max(max_abs_diff(
                &Liouvillian::from_model(&rotated).to_dense(),
                &Liouvillian::from_model(&assemble_memory(&phase)?).to_dense(),
            ));
        }
    }
    Ok(worst)
}
