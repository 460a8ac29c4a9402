//! Component catalog: small-volume limit triples used in the memory
//! network, and the physical (pre-limit) cavity and Raman models they
//! approximate.
//!
//! Qubit levels are `g = 0`, `h = 1`; the physical models add an excited
//! level at index 2 (`e` for the probe cavity, `r` for the Raman system).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::{steady_state, LindbladModel, SteadyState};
use crate::opalg::{
    c, embed, ket_bra, level, local_annihilation, local_unit, projector, CompositeSpace,
    Matrix, Operator, QubitOps, C64, ONE, ZERO,
};
use crate::slh::{coherent_drive, Displacement, SlhTriple};

/// Which error the network corrects. Selects Z- or X-type probes and the
/// Raman coupling operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    #[serde(alias = "bit-flip", alias = "bit_flip")]
    BitFlip,
    #[serde(alias = "phase-flip", alias = "phase_flip")]
    PhaseFlip,
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "bitflip" => Ok(Variant::BitFlip),
            "phaseflip" => Ok(Variant::PhaseFlip),
            _ => Err(Error::InvalidParameter(format!("unknown variant `{s}`"))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::BitFlip => "bitflip",
            Variant::PhaseFlip => "phaseflip",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Z,
}

fn pauli_on(space: &Arc<CompositeSpace>, label: &str, p: Pauli) -> Result<Operator> {
    let q = QubitOps::new(space, label)?;
    Ok(match p {
        Pauli::X => q.x,
        Pauli::Z => q.z,
    })
}

fn probe_pauli(variant: Variant) -> Pauli {
    match variant {
        Variant::BitFlip => Pauli::Z,
        Variant::PhaseFlip => Pauli::X,
    }
}

/// Single-channel probe scatterer `(P, 0, 0)` with `P = Z` (bit-flip) or
/// `X` (phase-flip) on a qubit.
pub fn probe_scatterer(
    space: &Arc<CompositeSpace>,
    label: &str,
    variant: Variant,
) -> Result<SlhTriple> {
    let p = pauli_on(space, label, probe_pauli(variant))?;
    SlhTriple::new(vec![vec![p]], vec![Operator::zero(space)], Operator::zero(space))
}

/// Limit model of the probed cavity: `(diag(P, I), 0, 0)`, the second
/// channel being the atom's free-space mode.
pub fn probe_limit(space: &Arc<CompositeSpace>, label: &str, variant: Variant) -> Result<SlhTriple> {
    let p = probe_scatterer(space, label, variant)?;
    crate::slh::concatenate(&p, &SlhTriple::trivial(space, 1))
}

/// `R_k1`: the relay state routes its two inputs,
/// `S = [[Π_g, -Π_h], [-Π_h, Π_g]]`.
pub fn relay_routing(space: &Arc<CompositeSpace>, label: &str) -> Result<SlhTriple> {
    let q = QubitOps::new(space, label)?;
    let s = vec![
        vec![q.pi_g.clone(), -&q.pi_h],
        vec![-&q.pi_h, q.pi_g.clone()],
    ];
    SlhTriple::new(s, zeros(space, 2), Operator::zero(space))
}

/// `R_k2`: SET/RESET inputs that drive the relay state,
/// `S = [[Π_g, -σ_hg], [-σ_gh, Π_h]]`.
pub fn relay_set(space: &Arc<CompositeSpace>, label: &str) -> Result<SlhTriple> {
    let q = QubitOps::new(space, label)?;
    let s = vec![
        vec![q.pi_g.clone(), -&q.sigma_hg],
        vec![-&q.sigma_gh, q.pi_h.clone()],
    ];
    SlhTriple::new(s, zeros(space, 2), Operator::zero(space))
}

/// 50/50 beamsplitter `(1/√2)[[1, 1], [-1, 1]]`.
pub fn beamsplitter(space: &Arc<CompositeSpace>) -> SlhTriple {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    SlhTriple::static_scattering(space, &[vec![c(s), c(s)], vec![c(-s), c(s)]])
        .expect("orthogonal matrix")
}

/// Single-qubit error process `(I, √Γ P, 0)`.
pub fn error_channel(
    space: &Arc<CompositeSpace>,
    label: &str,
    kind: Pauli,
    gamma_flip: f64,
) -> Result<SlhTriple> {
    if !(gamma_flip >= 0.0) {
        return Err(Error::InvalidParameter("flip rate must be non-negative".into()));
    }
    let p = pauli_on(space, label, kind)?;
    SlhTriple::new(
        vec![vec![Operator::identity(space)]],
        vec![p.scale(c(gamma_flip.sqrt()))],
        Operator::zero(space),
    )
}

fn zeros(space: &Arc<CompositeSpace>, n: usize) -> Vec<Operator> {
    (0..n).map(|_| Operator::zero(space)).collect()
}

/// Ground-to-excited transition addressed by a Raman channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition {
    /// `σ_gr = |g><r|`
    Gr,
    /// `σ_hr = |h><r|`
    Hr,
}

/// Local 3x3 lowering operator of a Raman channel. The phase-flip variant
/// couples `r` to `(h ± g)/√2` instead of `h`, `g`.
pub fn raman_lowering(transition: Transition, variant: Variant) -> Matrix {
    let gr = local_unit(3, level::G, level::R);
    let hr = local_unit(3, level::H, level::R);
    match (variant, transition) {
        (Variant::BitFlip, Transition::Gr) => gr,
        (Variant::BitFlip, Transition::Hr) => hr,
        (Variant::PhaseFlip, Transition::Hr) => (hr + gr) * c(std::f64::consts::FRAC_1_SQRT_2),
        (Variant::PhaseFlip, Transition::Gr) => (hr - gr) * c(std::f64::consts::FRAC_1_SQRT_2),
    }
}

/// One Raman channel of a qubit, `(1, √γ σ, ½ΔΠ_r)`. Each qubit carries
/// two of these, so the Hamiltonians add up to `ΔΠ_r`.
pub fn raman_subsystem(
    space: &Arc<CompositeSpace>,
    qubit: &str,
    transition: Transition,
    variant: Variant,
    gamma: f64,
    delta: f64,
) -> Result<SlhTriple> {
    require_dim(space, qubit, 3)?;
    let l = embed(&raman_lowering(transition, variant), qubit, space)?.scale(c(gamma.sqrt()));
    let h = projector(space, qubit, level::R)?.scale(c(0.5 * delta));
    SlhTriple::new(vec![vec![Operator::identity(space)]], vec![l], h)
}

fn require_dim(space: &Arc<CompositeSpace>, label: &str, expected: usize) -> Result<()> {
    let dim = space.local_dim(label)?;
    if dim != expected {
        return Err(Error::WrongSubsystemDim {
            label: label.to_string(),
            dim,
            expected,
        });
    }
    Ok(())
}

/// Physical cavity-QED probe: a three-level atom in a single-sided cavity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbePhysicalParams {
    /// Vacuum Rabi coupling.
    pub g_c: f64,
    /// Cavity field decay rate.
    pub kappa: f64,
    /// Atomic dipole decay rate.
    pub gamma_perp: f64,
    /// Scaling parameter; `g_c`, `κ` grow as `k²` and the cavity coupling
    /// as `k`.
    pub k: f64,
    pub n_fock: usize,
    /// Probe amplitude, in √(photons/time).
    pub alpha: f64,
    pub variant: Variant,
}

impl Default for ProbePhysicalParams {
    fn default() -> Self {
        Self {
            g_c: 10.0,
            kappa: 10.0,
            gamma_perp: 1.0,
            k: 1.0,
            n_fock: 12,
            alpha: 1.0,
            variant: Variant::BitFlip,
        }
    }
}

impl ProbePhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.g_c, self.kappa, self.gamma_perp];
        if positive.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter("probe rates must be positive".into()));
        }
        if !(self.k >= 1.0) {
            return Err(Error::InvalidParameter("scaling parameter k must be >= 1".into()));
        }
        if self.n_fock < 3 {
            return Err(Error::InvalidParameter("need at least 3 Fock states".into()));
        }
        if !self.alpha.is_finite() {
            return Err(Error::InvalidParameter("probe amplitude must be finite".into()));
        }
        let photons = self.empty_cavity_photons();
        let needed = photons + 6.0 * photons.sqrt() + 4.0;
        if (self.n_fock as f64) < needed {
            return Err(Error::TruncationTooSmall {
                n_fock: self.n_fock,
                photons,
            });
        }
        Ok(())
    }

    /// Mean intracavity photon number of the resonantly driven empty
    /// cavity, `2|α|² / (k² κ)`; the largest over the atomic states.
    pub fn empty_cavity_photons(&self) -> f64 {
        2.0 * self.alpha * self.alpha / (self.k * self.k * self.kappa)
    }

    pub fn space(&self) -> Arc<CompositeSpace> {
        CompositeSpace::new([("atom", 3), ("cavity", self.n_fock)]).expect("fixed labels")
    }
}

/// Atomic lowering operator coupled to the cavity.
fn probe_sigma(variant: Variant) -> Matrix {
    match variant {
        Variant::BitFlip => local_unit(3, level::G, level::E),
        Variant::PhaseFlip => {
            (local_unit(3, level::G, level::E) + local_unit(3, level::H, level::E))
                * c(std::f64::consts::FRAC_1_SQRT_2)
        }
    }
}

/// Driven physical probe as a triple:
/// `(I, [k√(2κ)a, √(2γ⊥)σ], k² i g_c(σ†a - σa†)) ◁ (I, [α, 0], 0)`.
pub fn probe_physical_triple(params: &ProbePhysicalParams) -> Result<SlhTriple> {
    params.validate()?;
    let space = params.space();
    let a = embed(&local_annihilation(params.n_fock), "cavity", &space)?;
    let sigma = embed(&probe_sigma(params.variant), "atom", &space)?;
    let k = params.k;
    let l1 = a.scale(c(k * (2.0 * params.kappa).sqrt()));
    let l2 = sigma.scale(c((2.0 * params.gamma_perp).sqrt()));
    let h = (sigma.adjoint() * &a - &sigma * a.adjoint()).scale(C64::new(0.0, k * k * params.g_c));
    let id = Operator::identity(&space);
    let zero = Operator::zero(&space);
    let vacuum = SlhTriple::new(
        vec![vec![id.clone(), zero.clone()], vec![zero, id]],
        vec![l1, l2],
        h,
    )?;
    coherent_drive(&vacuum, &Displacement::real(&[params.alpha, 0.0]))
}

pub fn probe_physical(params: &ProbePhysicalParams) -> Result<LindbladModel> {
    Ok(crate::slh::to_lindblad(&probe_physical_triple(params)?))
}

/// Atomic state of the probed qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeAtom {
    /// `|g>` for the Z probe, `(|g>+|h>)/√2` for the X probe.
    Coupled,
    /// `|h>` for the Z probe, `(|g>-|h>)/√2` for the X probe.
    Uncoupled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reflection {
    /// Steady-state output field `⟨L_1⟩`.
    pub output: C64,
    /// Output relative to bare-cavity reflection, `⟨L_1⟩ / (-α)`: `1` when
    /// the atom is uncoupled, `-1` in the coupled small-volume limit.
    pub relative: C64,
    /// `arg(relative)` in `[0, 2π)`.
    pub phase: f64,
    pub photons: f64,
    /// Population of the highest retained Fock state.
    pub edge_population: f64,
}

impl Reflection {
    /// Distance of the relative reflection coefficient from its limit value.
    pub fn limit_error(&self, atom: ProbeAtom) -> f64 {
        let target = match atom {
            ProbeAtom::Coupled => c(-1.0),
            ProbeAtom::Uncoupled => ONE,
        };
        (self.relative - target).norm()
    }

    /// Phase distance from the limit (`π` coupled, `0` uncoupled).
    pub fn phase_error(&self, atom: ProbeAtom) -> f64 {
        let target = match atom {
            ProbeAtom::Coupled => std::f64::consts::PI,
            ProbeAtom::Uncoupled => 0.0,
        };
        let d = (self.phase - target).rem_euclid(std::f64::consts::TAU);
        d.min(std::f64::consts::TAU - d)
    }
}

/// Steady-state reflection of the driven probe with the atom held in the
/// given ground state.
///
/// Each atomic ground state spans a dynamically invariant sector, so the
/// stationary state is found on that sector alone.
pub fn probe_reflection(params: &ProbePhysicalParams, atom: ProbeAtom) -> Result<Reflection> {
    if params.alpha == 0.0 {
        return Err(Error::InvalidParameter("reflection needs a nonzero probe".into()));
    }
    let triple = probe_physical_triple(params)?;
    let space = triple.space().clone();
    let mut model = crate::slh::to_lindblad(&triple);
    let mut out_op = triple.l(0).clone();
    if params.variant == Variant::PhaseFlip {
        // rotate (g ± h)/√2 onto g, h so the sectors are coordinate spans
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut u = Matrix::identity(3, 3);
        u[(0, 0)] = c(s);
        u[(0, 1)] = c(s);
        u[(1, 0)] = c(s);
        u[(1, 1)] = c(-s);
        let u = embed(&u, "atom", &space)?;
        model = model.conjugate_by(&u)?;
        out_op = out_op.conjugate_by(&u)?;
    }
    let atom_levels: &[usize] = match atom {
        ProbeAtom::Coupled => &[level::G, level::E],
        ProbeAtom::Uncoupled => &[level::H],
    };
    let mut basis = Vec::new();
    for &lv in atom_levels {
        for n in 0..params.n_fock {
            basis.push(space.basis_index(&[lv, n])?);
        }
    }
    basis.sort_unstable();
    let sector = model.restrict_to(&basis, "sector")?;
    let rho = match steady_state(&sector)? {
        SteadyState::Unique(r) => r,
        SteadyState::Degenerate(b) => {
            return Err(Error::InvalidState(format!(
                "probe sector has {} stationary states",
                b.len()
            )))
        }
    };
    let pick = |op: &Operator| -> Matrix {
        Matrix::from_fn(basis.len(), basis.len(), |i, j| op.matrix()[(basis[i], basis[j])])
    };
    let output = (pick(&out_op) * &rho).trace();
    let number = embed(
        &Matrix::from_fn(params.n_fock, params.n_fock, |i, j| {
            if i == j { c(i as f64) } else { ZERO }
        }),
        "cavity",
        &space,
    )?;
    let photons = (pick(&number) * &rho).trace().re;
    let edge = embed(&local_unit(params.n_fock, params.n_fock - 1, params.n_fock - 1), "cavity", &space)?;
    let edge_population = (pick(&edge) * &rho).trace().re;
    if edge_population > 1e-8 {
        return Err(Error::TruncationTooSmall {
            n_fock: params.n_fock,
            photons,
        });
    }
    let relative = output / c(-params.alpha);
    Ok(Reflection {
        output,
        relative,
        phase: relative.arg().rem_euclid(std::f64::consts::TAU),
        photons,
        edge_population,
    })
}

/// Physical three-level Raman system driven on both Raman modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamanPhysicalParams {
    /// Raman-mode coupling rate.
    pub gamma: f64,
    /// Aggregate spontaneous-emission rate of `r`.
    pub gamma_par: f64,
    /// Detuning of `r`; scaled as `k²Δ`.
    pub delta: f64,
    pub k: f64,
    /// Drive amplitudes of the two Raman modes; scaled as `kβ`.
    pub beta1: C64,
    pub beta2: C64,
    /// Cancel the ground-state Stark shifts.
    pub compensated: bool,
    pub variant: Variant,
}

impl Default for RamanPhysicalParams {
    fn default() -> Self {
        let b = 50f64.sqrt();
        Self {
            gamma: 1.0,
            gamma_par: 10.0,
            delta: 50.0,
            k: 1.0,
            beta1: c(b),
            beta2: c(b),
            compensated: false,
            variant: Variant::BitFlip,
        }
    }
}

impl RamanPhysicalParams {
    pub fn validate(&self) -> Result<()> {
        if [self.gamma, self.gamma_par, self.delta]
            .iter()
            .any(|&v| !(v > 0.0 && v.is_finite()))
        {
            return Err(Error::InvalidParameter("Raman rates must be positive".into()));
        }
        if !(self.k >= 1.0) {
            return Err(Error::InvalidParameter("scaling parameter k must be >= 1".into()));
        }
        Ok(())
    }

    /// Limiting Raman (two-photon) Rabi angular frequency `2γ|β₁β₂|/Δ`.
    pub fn rabi_frequency(&self) -> f64 {
        2.0 * self.gamma * (self.beta1 * self.beta2).norm() / self.delta
    }

    pub fn space(&self) -> Arc<CompositeSpace> {
        CompositeSpace::new([("atom", 3)]).expect("fixed label")
    }

    /// Effective ground-state Hamiltonian of the limit,
    /// `-(γ/Δ)(|β₁|²Π₁ + |β₂|²Π₂ + β₁β₂*σ₁₂ + h.c.)` where `Π_j`, `σ` refer to
    /// the ground states addressed by each mode; the Stark part is absent
    /// when compensated.
    pub fn limit_hamiltonian(&self) -> Result<Operator> {
        let space = self.space();
        let s1 = embed(&raman_lowering(Transition::Hr, self.variant), "atom", &space)?;
        let s2 = embed(&raman_lowering(Transition::Gr, self.variant), "atom", &space)?;
        // |φ_i><φ_j| = σ_i σ_j†
        let p = |a: &Operator, b: &Operator| a * b.adjoint();
        let g = self.gamma / self.delta;
        let b1 = self.beta1;
        let b2 = self.beta2;
        let mut h = (p(&s2, &s1).scale(b1 * b2.conj()) + p(&s1, &s2).scale(b1.conj() * b2))
            .scale(c(-g));
        if !self.compensated {
            h = h - (p(&s1, &s1).scale(c(b1.norm_sqr())) + p(&s2, &s2).scale(c(b2.norm_sqr())))
                .scale(c(g));
        }
        Ok(h)
    }
}

/// `(I, [√γσ₁, √γσ₂, √γ∥σ_hr, √γ∥σ_gr], k²ΔΠ_r) ◁ (I, [kβ₁, kβ₂, 0, 0], 0)`,
/// with `σ₁ = σ_hr`, `σ₂ = σ_gr` (or their phase-flip combinations).
///
/// With `compensated` the drive-induced Stark shifts
/// `-(γ/Δ)(|β₁|²σ₁σ₁† + |β₂|²σ₂σ₂†)` are cancelled by an explicit
/// counter-term instead of additional atomic levels.
pub fn raman_physical_triple(params: &RamanPhysicalParams) -> Result<SlhTriple> {
    params.validate()?;
    let space = params.space();
    let k = params.k;
    let s1 = embed(&raman_lowering(Transition::Hr, params.variant), "atom", &space)?;
    let s2 = embed(&raman_lowering(Transition::Gr, params.variant), "atom", &space)?;
    let hr = ket_bra(&space, "atom", level::H, level::R)?;
    let gr = ket_bra(&space, "atom", level::G, level::R)?;
    let sg = c(params.gamma.sqrt());
    let sp = c(params.gamma_par.sqrt());
    let l = vec![s1.scale(sg), s2.scale(sg), hr.scale(sp), gr.scale(sp)];
    let h = projector(&space, "atom", level::R)?.scale(c(k * k * params.delta));
    let mut s = Vec::new();
    for i in 0..4 {
        s.push(
            (0..4)
                .map(|j| if i == j { Operator::identity(&space) } else { Operator::zero(&space) })
                .collect(),
        );
    }
    let vacuum = SlhTriple::new(s, l, h)?;
    let d = Displacement(vec![params.beta1 * k, params.beta2 * k, ZERO, ZERO]);
    let driven = coherent_drive(&vacuum, &d)?;
    if !params.compensated {
        return Ok(driven);
    }
    let g = params.gamma / params.delta;
    let counter = (&s1 * s1.adjoint()).scale(c(g * params.beta1.norm_sqr()))
        + (&s2 * s2.adjoint()).scale(c(g * params.beta2.norm_sqr()));
    let h = driven.h() + &counter;
    driven.with_hamiltonian(h)
}

pub fn raman_physical(params: &RamanPhysicalParams) -> Result<LindbladModel> {
    Ok(crate::slh::to_lindblad(&raman_physical_triple(params)?))
}

/// Measured ground-manifold response of the physical Raman system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RamanResponse {
    /// Angular frequency of the slowest oscillating mode of the generator.
    pub rabi: f64,
    /// Population of `r` in the dressed bright ground state.
    pub leakage: f64,
}

/// Read the Raman Rabi frequency off the generator spectrum, and the
/// `r`-level admixture off the Hamiltonian eigenvectors.
///
/// The stationary state is the Raman dark state, which carries no `r`
/// population, so leakage is taken from the bright state instead.
pub fn raman_response(params: &RamanPhysicalParams) -> Result<RamanResponse> {
    let model = raman_physical(params)?;
    let dense = crate::lindblad::Liouvillian::from_model(&model).to_dense();
    let cutoff = 0.5 * params.k * params.k * params.delta;
    let rabi = dense
        .eigenvalues()
        .ok_or_else(|| Error::InvalidState("generator spectrum did not converge".into()))?
        .iter()
        .map(|z| z.im)
        .filter(|&w| w > 1e-9 && w < cutoff)
        .fold(f64::INFINITY, f64::min);
    if !rabi.is_finite() {
        return Err(Error::InvalidState("no oscillating ground-manifold mode".into()));
    }
    let eig = model.hamiltonian().matrix().clone().symmetric_eigen();
    let mut weights: Vec<f64> = eig
        .eigenvectors
        .column_iter()
        .map(|v| v[level::R].norm_sqr())
        .collect();
    weights.sort_by(|a, b| b.total_cmp(a));
    Ok(RamanResponse {
        rabi,
        leakage: weights[1],
    })
}
