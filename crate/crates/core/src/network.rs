//! The three-qubit coherent-feedback memory: probe and feedback subnets
//! composed from the component catalog, the limit feedback Hamiltonian,
//! and the assembled master equation on Q1 Q2 Q3 R1 R2.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::components::{
    beamsplitter, error_channel, probe_scatterer, raman_subsystem, relay_routing, relay_set,
    Pauli, Transition, Variant,
};
use crate::error::{Error, Result};
use crate::lindblad::LindbladModel;
use crate::opalg::{
    c, embed, level, local, CompositeSpace, Operator, QubitOps, Vector, C64, ZERO,
};
use crate::slh::{
    coherent_drive, concatenate, concatenate_all, extract_displacements, pad, series,
    series_chain, Displacement, Extracted, SlhTriple,
};

pub const QUBITS: [&str; 3] = ["Q1", "Q2", "Q3"];
pub const RELAYS: [&str; 2] = ["R1", "R2"];

/// Which half of the mirror-symmetric network: left is `(Q1, Q2, R1)`,
/// right is `(Q3, Q2, R2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn relay(self) -> &'static str {
        match self {
            Side::Left => "R1",
            Side::Right => "R2",
        }
    }

    /// The outer qubit whose parity with Q2 this side reads.
    pub fn outer_qubit(self) -> &'static str {
        match self {
            Side::Left => "Q1",
            Side::Right => "Q3",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryParams {
    /// Feedback strength `Ω = γ|β|²/2Δ`.
    pub omega: f64,
    /// Probe amplitude.
    pub alpha: f64,
    /// Single-qubit flip rate `Γ`.
    pub gamma_flip: f64,
    #[serde(default)]
    pub variant: Variant,
    /// Drop the four Stark-shift terms of the feedback Hamiltonian.
    #[serde(default)]
    pub stark_compensated: bool,
    /// When set, keep the relay-dephasing couplings of the feedback
    /// subnet with this drive amplitude `kβ`.
    #[serde(default)]
    pub relay_dephasing: Option<f64>,
}

impl MemoryParams {
    /// `α = Ω/8`, `Γ = 0.1`, bit-flip, uncompensated.
    pub fn standard(omega: f64) -> Self {
        Self {
            omega,
            alpha: omega / 8.0,
            gamma_flip: 0.1,
            variant: Variant::BitFlip,
            stark_compensated: false,
            relay_dephasing: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega", self.omega),
            ("alpha", self.alpha),
            ("gamma_flip", self.gamma_flip),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        if let Some(b) = self.relay_dephasing {
            if !b.is_finite() {
                return Err(Error::InvalidParameter("relay dephasing amplitude must be finite".into()));
            }
        }
        Ok(())
    }
}

/// Two-qubit parity combinations `E = PP + 1`, `O = PP - 1` with `P = Z`
/// (bit-flip) or `X` (phase-flip).
#[derive(Debug, Clone)]
pub struct ParityOperators {
    pub e12: Operator,
    pub o12: Operator,
    pub e32: Operator,
    pub o32: Operator,
}

impl ParityOperators {
    pub fn new(space: &Arc<CompositeSpace>, variant: Variant) -> Result<Self> {
        let p = |label: &str| -> Result<Operator> {
            let q = QubitOps::new(space, label)?;
            Ok(match variant {
                Variant::BitFlip => q.z,
                Variant::PhaseFlip => q.x,
            })
        };
        let (p1, p2, p3) = (p("Q1")?, p("Q2")?, p("Q3")?);
        let id = Operator::identity(space);
        let pp12 = &p1 * &p2;
        let pp32 = &p3 * &p2;
        Ok(Self {
            e12: &pp12 + &id,
            o12: &pp12 - &id,
            e32: &pp32 + &id,
            o32: &pp32 - &id,
        })
    }

    pub fn side(&self, side: Side) -> (&Operator, &Operator) {
        match side {
            Side::Left => (&self.e12, &self.o12),
            Side::Right => (&self.e32, &self.o32),
        }
    }
}

/// Probe subnet computed by composition:
/// `G_p = R_k2 ◁ B ◁ ((Q_a ◁ Q_b) ⊞ (I,0,0)) ◁ B ◁ (W_{√2α} ⊞ (I,0,0))`,
/// with `Q_a` probing the outer qubit and `Q_b` probing Q2.
pub fn build_probe_subnet(
    space: &Arc<CompositeSpace>,
    side: Side,
    alpha: f64,
    variant: Variant,
) -> Result<SlhTriple> {
    let relay = relay_set(space, side.relay())?;
    let b = beamsplitter(space);
    let outer = probe_scatterer(space, side.outer_qubit(), variant)?;
    let middle = probe_scatterer(space, "Q2", variant)?;
    let pass = SlhTriple::trivial(space, 1);
    let probes = concatenate(&series(&outer, &middle)?, &pass)?;
    let w = concatenate(
        &SlhTriple::displacement(space, &Displacement::real(&[2f64.sqrt() * alpha])),
        &pass,
    )?;
    series_chain(&[&relay, &b, &probes, &b, &w])
}

/// Feedback subnet before adiabatic elimination, on a space whose qubits
/// keep their `r` level:
/// `G_f = (Q11 ⊞ Q31 ⊞ Q22) ◁ (B ⊞₂ (I,0,0)) ◁ (R11 ⊞ (I,0,0)) ◁ (W_{kβ} ⊞ (I₂,0,0))`
/// and its mirror image, with `Δ → k²Δ`.
pub fn build_feedback_subnet_prelimit(
    space: &Arc<CompositeSpace>,
    side: Side,
    beta: C64,
    gamma: f64,
    delta: f64,
    k: f64,
    variant: Variant,
) -> Result<SlhTriple> {
    let vacuum = feedback_subnet_vacuum(space, side, gamma, delta * k * k, variant)?;
    let w = concatenate(
        &SlhTriple::displacement(space, &Displacement(vec![beta * k])),
        &SlhTriple::trivial(space, 2),
    )?;
    series(&vacuum, &w)
}

/// The undriven feedback subnet `(S⁰, L⁰, H⁰)`.
pub fn feedback_subnet_vacuum(
    space: &Arc<CompositeSpace>,
    side: Side,
    gamma: f64,
    delta: f64,
    variant: Variant,
) -> Result<SlhTriple> {
    use Transition::{Gr, Hr};
    let raman = |q: &str, t: Transition| raman_subsystem(space, q, t, variant, gamma, delta);
    let qubits = match side {
        Side::Left => [raman("Q1", Gr)?, raman("Q3", Gr)?, raman("Q2", Hr)?],
        Side::Right => [raman("Q2", Gr)?, raman("Q1", Hr)?, raman("Q3", Hr)?],
    };
    let qubits = concatenate_all(&[&qubits[0], &qubits[1], &qubits[2]])?;
    let split = pad(&beamsplitter(space), 2, 1)?;
    let routing = concatenate(&relay_routing(space, side.relay())?, &SlhTriple::trivial(space, 1))?;
    series_chain(&[&qubits, &split, &routing])
}

/// Split the driven feedback subnet into `(S,0,0) ◁ W_{kβ} ◁ G̃_f`.
pub fn feedback_extraction(
    space: &Arc<CompositeSpace>,
    side: Side,
    beta: C64,
    gamma: f64,
    delta: f64,
    k: f64,
    variant: Variant,
) -> Result<Extracted> {
    let vacuum = feedback_subnet_vacuum(space, side, gamma, delta * k * k, variant)?;
    extract_displacements(&vacuum, &Displacement(vec![beta * k, ZERO, ZERO]))
}

/// Space used by the pre-limit feedback subnets: three-level qubits
/// (`g`, `h`, `r`) and two-level relays.
pub fn prelimit_space() -> Arc<CompositeSpace> {
    CompositeSpace::new([("Q1", 3), ("Q2", 3), ("Q3", 3), ("R1", 2), ("R2", 2)])
        .expect("fixed labels")
}

/// Qubit projectors written in the variant's code basis: `Π_g`, `Π_h` for
/// bit-flip, `(I - X)/2`, `(I + X)/2` for phase-flip.
fn code_projectors(space: &Arc<CompositeSpace>, label: &str, variant: Variant) -> Result<(Operator, Operator)> {
    let q = QubitOps::new(space, label)?;
    Ok(match variant {
        Variant::BitFlip => (q.pi_g, q.pi_h),
        Variant::PhaseFlip => {
            let id = Operator::identity(space);
            ((&id - &q.x).scale(c(0.5)), (&id + &q.x).scale(c(0.5)))
        }
    })
}

/// Qubit-flip operator that the feedback applies: `X` for bit-flip, `Z`
/// for phase-flip.
fn flip_operator(space: &Arc<CompositeSpace>, label: &str, variant: Variant) -> Result<Operator> {
    let q = QubitOps::new(space, label)?;
    Ok(match variant {
        Variant::BitFlip => q.x,
        Variant::PhaseFlip => q.z,
    })
}

/// The three conditional flip terms of the limit feedback Hamiltonian, in
/// units of `Ω`.
pub fn flip_terms(space: &Arc<CompositeSpace>, variant: Variant) -> Result<Operator> {
    let r1 = QubitOps::new(space, "R1")?;
    let r2 = QubitOps::new(space, "R2")?;
    let s2 = c(2f64.sqrt());
    let x1 = flip_operator(space, "Q1", variant)?;
    let x2 = flip_operator(space, "Q2", variant)?;
    let x3 = flip_operator(space, "Q3", variant)?;
    Ok((x1 * &r1.pi_g * &r2.pi_h).scale(s2) + x2 * &r1.pi_g * &r2.pi_g
        - (x3 * &r1.pi_h * &r2.pi_g).scale(s2))
}

/// Stark-shift terms of the limit feedback Hamiltonian, grouped by the
/// qubit whose projector they contain, in units of `Ω`.
pub fn stark_terms(space: &Arc<CompositeSpace>, variant: Variant) -> Result<[Operator; 3]> {
    let r1 = QubitOps::new(space, "R1")?;
    let r2 = QubitOps::new(space, "R2")?;
    let (g1, h1) = code_projectors(space, "Q1", variant)?;
    let (g2, h2) = code_projectors(space, "Q2", variant)?;
    let (g3, h3) = code_projectors(space, "Q3", variant)?;
    // -Π_g^R1(Π_g^Q1 + Π_h^Q2) - 2Π_h^R1 Π_g^Q3 - Π_g^R2(Π_g^Q2 + Π_h^Q3) - 2Π_h^R2 Π_h^Q1
    let q1 = -(&r1.pi_g * &g1) - (&r2.pi_h * &h1).scale(c(2.0));
    let q2 = -(&r1.pi_g * &h2) - (&r2.pi_g * &g2);
    let q3 = -(&r1.pi_h * &g3).scale(c(2.0)) - (&r2.pi_g * &h3);
    Ok([q1, q2, q3])
}

/// Hamiltonian of the adiabatically eliminated feedback network on the
/// 32-dimensional memory cell.
pub fn feedback_limit_hamiltonian(space: &Arc<CompositeSpace>, params: &MemoryParams) -> Result<Operator> {
    let mut h = flip_terms(space, params.variant)?;
    if !params.stark_compensated {
        for term in stark_terms(space, params.variant)? {
            h = h + term;
        }
    }
    Ok(h.scale(c(params.omega)))
}

/// Relay-dephasing couplings of the limit feedback subnet, amplitude `kβ`.
pub fn relay_dephasing_ops(space: &Arc<CompositeSpace>, amplitude: f64) -> Result<Vec<Operator>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(6);
    for r in RELAYS {
        let q = QubitOps::new(space, r)?;
        out.push(q.pi_g.scale(c(amplitude * s)));
        out.push(q.pi_h.scale(c(-amplitude)));
        out.push(q.pi_g.scale(c(-amplitude * s)));
    }
    Ok(out)
}

/// Full master equation of the memory: the feedback Hamiltonian, four
/// probe couplings from the composed probe subnets, and three error
/// channels (plus six relay-dephasing couplings when requested).
pub fn assemble_memory(params: &MemoryParams) -> Result<LindbladModel> {
    params.validate()?;
    let space = CompositeSpace::memory_cell();
    let left = build_probe_subnet(&space, Side::Left, params.alpha, params.variant)?;
    let right = build_probe_subnet(&space, Side::Right, params.alpha, params.variant)?;
    let kind = match params.variant {
        Variant::BitFlip => Pauli::X,
        Variant::PhaseFlip => Pauli::Z,
    };
    let errors = QUBITS
        .iter()
        .map(|q| error_channel(&space, q, kind, params.gamma_flip))
        .collect::<Result<Vec<_>>>()?;
    let h = feedback_limit_hamiltonian(&space, params)?;
    let mut ops: Vec<Operator> = left
        .couplings()
        .iter()
        .chain(right.couplings())
        .chain(errors.iter().flat_map(|e| e.couplings()))
        .cloned()
        .collect();
    if let Some(amp) = params.relay_dephasing {
        ops.extend(relay_dephasing_ops(&space, amp)?);
    }
    let h = &h + left.h() + right.h();
    LindbladModel::new(space, h, ops)
}

/// `|Ψ0⟩ ⊗ |h h⟩` with `|Ψ0⟩ = (|ggg⟩ - i|hhh⟩)/√2`, Hadamard-rotated on
/// the qubits for the phase-flip variant.
pub fn codeword_state(variant: Variant) -> Vector {
    let space = CompositeSpace::memory_cell();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let ggg = space
        .basis_state(&[level::G, level::G, level::G, level::H, level::H])
        .expect("valid levels");
    let hhh = space
        .basis_state(&[level::H, level::H, level::H, level::H, level::H])
        .expect("valid levels");
    let psi = ggg * c(s) + hhh * C64::new(0.0, -s);
    match variant {
        Variant::BitFlip => psi,
        Variant::PhaseFlip => qubit_hadamard(&space).matrix() * psi,
    }
}

/// The codeword with one error (`X` for bit-flip, `Z` for phase-flip)
/// applied to `qubit`; relays stay in `|h h⟩`.
pub fn codeword_with_error(variant: Variant, qubit: &str) -> Result<Vector> {
    let space = CompositeSpace::memory_cell();
    let flip = flip_operator(&space, qubit, variant)?;
    Ok(flip.matrix() * codeword_state(variant))
}

/// Three-qubit register part of the codeword, `(|ggg⟩ - i|hhh⟩)/√2`.
pub fn register_codeword() -> Vector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = Vector::zeros(8);
    v[0] = c(s);
    v[7] = C64::new(0.0, -s);
    v
}

/// `H ⊗ H ⊗ H` on the qubits, identity on the relays.
pub fn qubit_hadamard(space: &Arc<CompositeSpace>) -> Operator {
    QUBITS
        .iter()
        .map(|q| embed(&local::hadamard(), q, space).expect("qubit labels present"))
        .reduce(|a, b| a * b)
        .expect("three qubits")
}

/// `U G U†` for `U = qubit_hadamard`, evaluated as `M G M† / 8` with the
/// integer matrix `M = ∏(X + Z)`; only the model's own entries are rounded,
/// which keeps large-`Ω` generators equal to the phase-flip ones to a few
/// ulps.
pub fn hadamard_conjugate(model: &LindbladModel) -> Result<LindbladModel> {
    let space = model.space();
    let mut m = Operator::identity(space);
    for q in QUBITS {
        let ops = QubitOps::new(space, q)?;
        m = m * (&ops.x + &ops.z);
    }
    let md = m.adjoint();
    let conj = |a: &Operator| (&m * a * &md).scale(c(0.125));
    LindbladModel::new(
        space.clone(),
        conj(model.hamiltonian()),
        model.collapse_ops().iter().map(conj).collect(),
    )
}

/// One row of the Stark-shift table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StarkRow {
    /// Qubit levels `(Q1, Q2, Q3)`, `'g'` or `'h'`.
    pub qubits: [char; 3],
    /// Relay levels `(R1, R2)` matching the qubit parities.
    pub relays: [char; 2],
    /// Stark shift on each qubit, in units of `Ω`.
    pub shifts: [f64; 3],
}

impl StarkRow {
    pub fn total(&self) -> f64 {
        self.shifts.iter().sum()
    }
}

fn level_char(l: usize) -> char {
    if l == level::G { 'g' } else { 'h' }
}

/// Relay level reflecting a two-qubit parity: `h` when even, `g` when odd.
fn parity_relay(a: usize, b: usize) -> usize {
    if a == b { level::H } else { level::G }
}

/// Per-qubit Stark shifts of each three-qubit basis state with relays in
/// their matching parity states, read off the diagonal of the
/// uncompensated bit-flip Hamiltonian. Rows follow the syndrome order:
/// no error, then Q1, Q2, Q3 flipped.
pub fn stark_shift_table() -> Vec<StarkRow> {
    let space = CompositeSpace::memory_cell();
    let terms = stark_terms(&space, Variant::BitFlip).expect("memory cell labels");
    let (g, h) = (level::G, level::H);
    let states = [
        [h, h, h],
        [g, g, g],
        [h, g, g],
        [g, h, h],
        [h, g, h],
        [g, h, g],
        [h, h, g],
        [g, g, h],
    ];
    states
        .iter()
        .map(|q| {
            let relays = [parity_relay(q[0], q[1]), parity_relay(q[2], q[1])];
            let ket = space
                .basis_state(&[q[0], q[1], q[2], relays[0], relays[1]])
                .expect("valid levels");
            let shifts = [0, 1, 2].map(|i| terms[i].matrix_element(&ket, &ket).re);
            StarkRow {
                qubits: q.map(level_char),
                relays: relays.map(level_char),
                shifts,
            }
        })
        .collect()
}

/// Closed forms as printed, used as oracles for the composed network.
pub mod printed {
    use super::*;

    /// Probe couplings `L_1, L_2` (left) or `L_3, L_4` (right):
    /// `(α/√2){σ_hg(1 + PP) - Π_g(1 - PP)}`,
    /// `(α/√2){σ_gh(1 - PP) - Π_h(1 + PP)}`.
    pub fn probe_couplings(
        space: &Arc<CompositeSpace>,
        side: Side,
        alpha: f64,
        variant: Variant,
    ) -> Result<[Operator; 2]> {
        let r = QubitOps::new(space, side.relay())?;
        let p = |label: &str| -> Result<Operator> {
            let q = QubitOps::new(space, label)?;
            Ok(match variant {
                Variant::BitFlip => q.z,
                Variant::PhaseFlip => q.x,
            })
        };
        let pp = p(side.outer_qubit())? * p("Q2")?;
        let id = Operator::identity(space);
        let plus = &id + &pp;
        let minus = &id - &pp;
        let a = c(alpha / 2f64.sqrt());
        let l1 = (&r.sigma_hg * &plus - &r.pi_g * &minus).scale(a);
        let l2 = (&r.sigma_gh * &minus - &r.pi_h * &plus).scale(a);
        Ok([l1, l2])
    }

    /// Probe subnet scattering matrix
    /// `½[[OΠ_g + Eσ_hg, EΠ_g + Oσ_hg], [-EΠ_h - Oσ_gh, -OΠ_h - Eσ_gh]]`.
    pub fn probe_scattering(
        space: &Arc<CompositeSpace>,
        side: Side,
        variant: Variant,
    ) -> Result<[[Operator; 2]; 2]> {
        let r = QubitOps::new(space, side.relay())?;
        let par = ParityOperators::new(space, variant)?;
        let (e, o) = par.side(side);
        let half = c(0.5);
        Ok([
            [
                (o * &r.pi_g + e * &r.sigma_hg).scale(half),
                (e * &r.pi_g + o * &r.sigma_hg).scale(half),
            ],
            [
                -(e * &r.pi_h + o * &r.sigma_gh).scale(half),
                -(o * &r.pi_h + e * &r.sigma_gh).scale(half),
            ],
        ])
    }

    struct FeedbackOps {
        id: Operator,
        pg: Operator,
        ph: Operator,
        /// Raman lowering operators in subnet channel order.
        a: Operator,
        b: Operator,
        d: Operator,
        pr_sum: Operator,
    }

    fn feedback_ops(space: &Arc<CompositeSpace>, side: Side) -> Result<FeedbackOps> {
        let r = QubitOps::new(space, side.relay())?;
        let kb = |q: &str, j: usize| crate::opalg::ket_bra(space, q, j, level::R);
        let (a, b, d) = match side {
            Side::Left => (kb("Q1", level::G)?, kb("Q3", level::G)?, kb("Q2", level::H)?),
            Side::Right => (kb("Q2", level::G)?, kb("Q1", level::H)?, kb("Q3", level::H)?),
        };
        let mut pr_sum = Operator::zero(space);
        for q in QUBITS {
            pr_sum = pr_sum + crate::opalg::projector(space, q, level::R)?;
        }
        Ok(FeedbackOps {
            id: Operator::identity(space),
            pg: r.pi_g,
            ph: r.pi_h,
            a,
            b,
            d,
            pr_sum,
        })
    }

    /// The printed bit-flip `G_f` (left) / `G_f′` (right) with `β → kβ`,
    /// `Δ → k²Δ`. Channel operators `(a, b, d)` are `(σ_gr^Q1, σ_gr^Q3,
    /// σ_hr^Q2)` on the left and `(σ_gr^Q2, σ_hr^Q1, σ_hr^Q3)` on the right.
    pub fn feedback_subnet(
        space: &Arc<CompositeSpace>,
        side: Side,
        beta: C64,
        gamma: f64,
        delta: f64,
        k: f64,
    ) -> Result<SlhTriple> {
        let o = feedback_ops(space, side)?;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let r2 = 2f64.sqrt();
        let zero = Operator::zero(space);
        let beta = beta * k;
        let sg = c(gamma.sqrt());
        let smat = vec![
            vec![o.pg.scale(c(s)), o.ph.scale(c(-s)), o.id.scale(c(s))],
            vec![o.ph.scale(c(-1.0)), o.pg.clone(), zero.clone()],
            vec![o.pg.scale(c(-s)), o.ph.scale(c(s)), o.id.scale(c(s))],
        ];
        let l = vec![
            o.a.scale(sg) + o.pg.scale(beta * s),
            o.b.scale(sg) - o.ph.scale(beta),
            o.d.scale(sg) - o.pg.scale(beta * s),
        ];
        let inner = (o.a.adjoint() * &o.pg - o.d.adjoint() * &o.pg - (o.b.adjoint() * &o.ph).scale(c(r2)))
            .scale(beta * (gamma / 2.0).sqrt());
        let h = o.pr_sum.scale(c(0.5 * delta * k * k)) + inner.im_part();
        SlhTriple::new(smat, l, h)
    }

    /// The printed `G̃_f^(k)`: identity scattering, drive-free couplings and
    /// `k²(Δ/2)ΣΠ_r + 2 Im{…}`.
    pub fn feedback_inner(
        space: &Arc<CompositeSpace>,
        side: Side,
        beta: C64,
        gamma: f64,
        delta: f64,
        k: f64,
    ) -> Result<SlhTriple> {
        let o = feedback_ops(space, side)?;
        let r2 = c(2f64.sqrt());
        let beta = beta * k;
        let sg = c((gamma / 2.0).sqrt());
        let l = vec![
            (&o.a * &o.pg - (&o.b * &o.ph).scale(r2) - &o.d * &o.pg).scale(sg),
            (-(&o.a * &o.ph) + (&o.b * &o.pg).scale(r2) + &o.d * &o.ph).scale(sg),
            (&o.a + &o.d).scale(sg),
        ];
        let inner = (o.a.adjoint() * &o.pg - o.d.adjoint() * &o.pg - (o.b.adjoint() * &o.ph).scale(r2))
            .scale(beta * sg);
        let h = o.pr_sum.scale(c(0.5 * delta * k * k)) + inner.im_part().scale(c(2.0));
        let mut s = Vec::new();
        for i in 0..3 {
            s.push((0..3).map(|j| if i == j { o.id.clone() } else { Operator::zero(space) }).collect());
        }
        SlhTriple::new(s, l, h)
    }

    /// Reference Stark-shift table: `(Q1Q2Q3, R1R2, SS1 SS2 SS3)` in units of `Ω`.
    pub const STARK_TABLE: [(&str, &str, [f64; 3]); 8] = [
        ("hhh", "hh", [0.0, 0.0, -2.0]),
        ("ggg", "hh", [-2.0, 0.0, 0.0]),
        ("hgg", "gh", [-2.0, 0.0, 0.0]),
        ("ghh", "gh", [-1.0, -1.0, 0.0]),
        ("hgh", "gg", [-1.0, -1.0, 0.0]),
        ("ghg", "gg", [0.0, -1.0, -1.0]),
        ("hhg", "hg", [0.0, -1.0, -1.0]),
        ("ggh", "hg", [0.0, 0.0, -2.0]),
    ];
}

/// Drive amplitude to feed the driven pre-limit subnet through
/// `coherent_drive` rather than an explicit Weyl series factor.
pub fn feedback_drive(beta: C64, k: f64) -> Displacement {
    Displacement(vec![beta * k, ZERO, ZERO])
}

/// `coherent_drive(G⁰, d)`; equal to `build_feedback_subnet_prelimit`.
pub fn feedback_subnet_driven(
    space: &Arc<CompositeSpace>,
    side: Side,
    beta: C64,
    gamma: f64,
    delta: f64,
    k: f64,
    variant: Variant,
) -> Result<SlhTriple> {
    let vacuum = feedback_subnet_vacuum(space, side, gamma, delta * k * k, variant)?;
    coherent_drive(&vacuum, &feedback_drive(beta, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::EXACT_TOL;

    fn cell() -> Arc<CompositeSpace> {
        CompositeSpace::memory_cell()
    }

    #[test]
    fn probe_subnet_matches_printed_form() {
        let sp = cell();
        for variant in [Variant::BitFlip, Variant::PhaseFlip] {
            for side in [Side::Left, Side::Right] {
                let g = build_probe_subnet(&sp, side, 1.7, variant).unwrap();
                let [l1, l2] = printed::probe_couplings(&sp, side, 1.7, variant).unwrap();
                assert!(g.l(0).approx_eq(&l1, EXACT_TOL));
                assert!(g.l(1).approx_eq(&l2, EXACT_TOL));
                let s = printed::probe_scattering(&sp, side, variant).unwrap();
                for i in 0..2 {
                    for j in 0..2 {
                        assert!(g.s(i, j).approx_eq(&s[i][j], EXACT_TOL), "S{i}{j}");
                    }
                }
                assert!(g.h().is_zero(EXACT_TOL));
            }
        }
    }

    #[test]
    fn probe_coupling_on_even_parity_state() {
        let sp = cell();
        let alpha = 0.9;
        let g = build_probe_subnet(&sp, Side::Left, alpha, Variant::BitFlip).unwrap();
        let ket = sp.basis_state(&[0, 0, 0, level::G, 0]).unwrap();
        let out = g.l(0).matrix() * &ket;
        let expect = sp.basis_state(&[0, 0, 0, level::H, 0]).unwrap() * c(2f64.sqrt() * alpha);
        assert!((out - expect).norm() < EXACT_TOL);
        let zero = build_probe_subnet(&sp, Side::Left, 0.0, Variant::BitFlip).unwrap();
        assert!(zero.couplings().iter().all(|l| l.is_zero(0.0)));
    }

    #[test]
    fn parity_algebra() {
        let sp = cell();
        let p = ParityOperators::new(&sp, Variant::BitFlip).unwrap();
        let id = Operator::identity(&sp);
        assert!((&p.e12 - &p.o12).approx_eq(&id.scale(c(2.0)), EXACT_TOL));
        assert!((&p.e12 * &p.o12).is_zero(EXACT_TOL));
        assert!((&p.e12 * &p.e12).approx_eq(&p.e12.scale(c(2.0)), EXACT_TOL));
    }

    #[test]
    fn feedback_subnet_matches_printed_form() {
        let sp = prelimit_space();
        let beta = C64::new(1.3, 0.4);
        for side in [Side::Left, Side::Right] {
            for k in [1.0, 3.0] {
                let g = build_feedback_subnet_prelimit(&sp, side, beta, 0.7, 5.0, k, Variant::BitFlip).unwrap();
                let p = printed::feedback_subnet(&sp, side, beta, 0.7, 5.0, k).unwrap();
                assert!(g.approx_eq(&p, EXACT_TOL), "{side:?} k={k}");
                let d = feedback_subnet_driven(&sp, side, beta, 0.7, 5.0, k, Variant::BitFlip).unwrap();
                assert!(d.approx_eq(&g, EXACT_TOL));
                let x = feedback_extraction(&sp, side, beta, 0.7, 5.0, k, Variant::BitFlip).unwrap();
                let inner = printed::feedback_inner(&sp, side, beta, 0.7, 5.0, k).unwrap();
                assert!(x.inner.approx_eq(&inner, EXACT_TOL));
                assert!(x.recompose().unwrap().approx_eq(&g, EXACT_TOL));
            }
        }
    }

    #[test]
    fn feedback_without_drive_is_detuning_only() {
        let sp = prelimit_space();
        let g = build_feedback_subnet_prelimit(&sp, Side::Left, ZERO, 0.7, 5.0, 1.0, Variant::BitFlip).unwrap();
        let mut pr = Operator::zero(&sp);
        for q in QUBITS {
            pr = pr + crate::opalg::projector(&sp, q, level::R).unwrap();
        }
        assert!(g.h().approx_eq(&pr.scale(c(2.5)), EXACT_TOL));
    }

    #[test]
    fn limit_hamiltonian_structure() {
        let sp = cell();
        let p = MemoryParams::standard(3.0);
        let h = feedback_limit_hamiltonian(&sp, &p).unwrap();
        assert!(h.is_hermitian(EXACT_TOL));
        let h2 = feedback_limit_hamiltonian(&sp, &MemoryParams::standard(6.0)).unwrap();
        assert!(h2.approx_eq(&h.scale(c(2.0)), EXACT_TOL));
        let hc = feedback_limit_hamiltonian(&sp, &MemoryParams { stark_compensated: true, ..p.clone() }).unwrap();
        let mut stark = Operator::zero(&sp);
        for t in stark_terms(&sp, Variant::BitFlip).unwrap() {
            stark = stark + t;
        }
        assert!((&h - &hc).approx_eq(&stark.scale(c(3.0)), EXACT_TOL));
        // Q1 flip term active when relays read (g, h)
        let a = sp.basis_state(&[0, 0, 0, level::G, level::H]).unwrap();
        let b = sp.basis_state(&[1, 0, 0, level::G, level::H]).unwrap();
        assert!((hc.matrix_element(&b, &a) - c(2f64.sqrt() * 3.0)).norm() < EXACT_TOL);
    }

    #[test]
    fn memory_model_shape() {
        let m = assemble_memory(&MemoryParams::standard(30.0)).unwrap();
        assert_eq!(m.collapse_ops().len(), 7);
        assert_eq!(m.dim(), 32);
        let zero = assemble_memory(&MemoryParams { gamma_flip: 0.0, ..MemoryParams::standard(0.0) }).unwrap();
        assert!(zero.hamiltonian().is_zero(0.0));
        assert!(zero.collapse_ops().iter().all(|l| l.is_zero(0.0)));
        let with = assemble_memory(&MemoryParams { relay_dephasing: Some(2.0), ..MemoryParams::standard(30.0) }).unwrap();
        assert_eq!(with.collapse_ops().len(), 13);
    }

    #[test]
    fn codeword_is_stationary_without_errors() {
        for variant in [Variant::BitFlip, Variant::PhaseFlip] {
            let p = MemoryParams { gamma_flip: 0.0, variant, ..MemoryParams::standard(90.0) };
            let m = assemble_memory(&p).unwrap();
            let psi = codeword_state(variant);
            let rho = &psi * psi.adjoint();
            let d = m.rhs(&rho).unwrap();
            assert!(d.iter().all(|z| z.norm() < 1e-10), "{variant}");
        }
    }

    #[test]
    fn stark_rows_sum_to_minus_two() {
        for row in stark_shift_table() {
            assert_eq!(row.total(), -2.0, "{row:?}");
        }
    }

    #[test]
    fn hadamard_exchanges_code_operators() {
        let sp = cell();
        let u = qubit_hadamard(&sp);
        for q in QUBITS {
            let ops = QubitOps::new(&sp, q).unwrap();
            assert!(ops.x.conjugate_by(&u).unwrap().approx_eq(&ops.z, EXACT_TOL));
            assert!(ops.z.conjugate_by(&u).unwrap().approx_eq(&ops.x, EXACT_TOL));
            let (g, h) = code_projectors(&sp, q, Variant::PhaseFlip).unwrap();
            assert!(ops.pi_g.conjugate_by(&u).unwrap().approx_eq(&g, EXACT_TOL));
            assert!(ops.pi_h.conjugate_by(&u).unwrap().approx_eq(&h, EXACT_TOL));
        }
    }

    #[test]
    fn integer_hadamard_conjugation_matches_unitary() {
        let model = assemble_memory(&MemoryParams::standard(30.0)).unwrap();
        let exact = hadamard_conjugate(&model).unwrap();
        let plain = model.conjugate_by(&qubit_hadamard(model.space())).unwrap();
        assert!(exact.hamiltonian().approx_eq(plain.hamiltonian(), 1e-11));
        for (a, b) in exact.collapse_ops().iter().zip(plain.collapse_ops()) {
            assert!(a.approx_eq(b, 1e-12));
        }
    }
}
