//! Lindblad master equation: model, right-hand side, integrators and
//! stationary states.
//!
//! `dρ/dt = -i[H, ρ] + Σ_j (L_j ρ L_j† - ½{L_j† L_j, ρ})`

mod integrate;
mod observables;
mod steady;
mod superop;

use std::sync::Arc;

pub use integrate::{
    integrate, run, FidelityTrace, IntegratorOptions, Method, RhsForm, RunOutcome, Sample,
    DEFAULT_ATOL, DEFAULT_RTOL, POSITIVITY_TOL, STABILITY_LIMIT, TRACE_TOL,
};
pub use observables::{
    baseline_single_qubit, baseline_three_qubit, density_from_pure, hermiticity_error,
    min_eigenvalue, trace_error,
};
pub use steady::{stationary_projection, steady_state, SteadyState};
pub use superop::Liouvillian;

use crate::error::{Error, Result};
use crate::opalg::{gemm_acc, matmul, same_space, CompositeSpace, Matrix, Operator, C64, ONE};

/// Hermiticity tolerance for model Hamiltonians.
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct LindbladModel {
    space: Arc<CompositeSpace>,
    hamiltonian: Operator,
    collapse_ops: Vec<Operator>,
}

impl LindbladModel {
    pub fn new(
        space: Arc<CompositeSpace>,
        hamiltonian: Operator,
        collapse_ops: Vec<Operator>,
    ) -> Result<Self> {
        if !same_space(hamiltonian.space(), &space)
            || collapse_ops.iter().any(|l| !same_space(l.space(), &space))
        {
            return Err(Error::SpaceMismatch);
        }
        let herm = hamiltonian.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::NonHermitian(herm));
        }
        Ok(Self::new_unchecked(space, hamiltonian, collapse_ops))
    }

    pub(crate) fn new_unchecked(
        space: Arc<CompositeSpace>,
        hamiltonian: Operator,
        collapse_ops: Vec<Operator>,
    ) -> Self {
        Self {
            space,
            hamiltonian,
            collapse_ops,
        }
    }

    /// The generator that is identically zero.
    pub fn zero(space: &Arc<CompositeSpace>) -> Self {
        Self::new_unchecked(space.clone(), Operator::zero(space), Vec::new())
    }

    pub fn space(&self) -> &Arc<CompositeSpace> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn collapse_ops(&self) -> &[Operator] {
        &self.collapse_ops
    }

    /// Append further channels, e.g. error processes concatenated after the
    /// fact.
    pub fn with_collapse_ops(mut self, extra: impl IntoIterator<Item = Operator>) -> Result<Self> {
        for l in extra {
            if !same_space(l.space(), &self.space) {
                return Err(Error::SpaceMismatch);
            }
            self.collapse_ops.push(l);
        }
        Ok(self)
    }

    pub fn with_hamiltonian(mut self, h: Operator) -> Result<Self> {
        if !same_space(h.space(), &self.space) {
            return Err(Error::SpaceMismatch);
        }
        self.hamiltonian = h;
        Ok(self)
    }

    /// `‖H‖ + Σ‖L†L‖` in spectral norm; bounds the generator's stiffness.
    pub fn generator_norm(&self) -> f64 {
        self.hamiltonian.hermitian_norm()
            + self
                .collapse_ops
                .iter()
                .map(|l| (l.adjoint() * l).hermitian_norm())
                .sum::<f64>()
    }

    /// `K = -iH - ½ Σ L†L`, so that `dρ/dt = Kρ + ρK† + Σ LρL†`.
    pub fn effective_generator(&self) -> Matrix {
        let mut k = self.hamiltonian.matrix() * C64::new(0.0, -1.0);
        for l in &self.collapse_ops {
            gemm_acc(&mut k, C64::new(-0.5, 0.0), &l.matrix().adjoint(), l.matrix());
        }
        k
    }

    /// Reference right-hand side in commutator form.
    pub fn rhs(&self, rho: &Matrix) -> Result<Matrix> {
        let n = self.dim();
        if rho.nrows() != n || rho.ncols() != n {
            return Err(Error::MatrixShape {
                rows: rho.nrows(),
                cols: rho.ncols(),
                dim: n,
            });
        }
        let h = self.hamiltonian.matrix();
        let mut out = Matrix::zeros(n, n);
        gemm_acc(&mut out, C64::new(0.0, -1.0), h, rho);
        gemm_acc(&mut out, C64::new(0.0, 1.0), rho, h);
        let half = C64::new(-0.5, 0.0);
        for l in &self.collapse_ops {
            let lm = l.matrix();
            let ld = lm.adjoint();
            let ldl = matmul(&ld, lm);
            gemm_acc(&mut out, ONE, &matmul(lm, rho), &ld);
            gemm_acc(&mut out, half, &ldl, rho);
            gemm_acc(&mut out, half, rho, &ldl);
        }
        Ok(out)
    }

    /// Restrict to the span of the given global basis states. Fails unless
    /// that span is invariant under `H` and every `L`, which makes the
    /// restricted generator exact on states supported there.
    pub fn restrict_to(&self, basis: &[usize], label: &str) -> Result<Self> {
        let n = self.dim();
        if basis.is_empty() || basis.iter().any(|&b| b >= n) {
            return Err(Error::InvalidParameter("bad restriction basis".into()));
        }
        let inside: Vec<bool> = (0..n).map(|i| basis.contains(&i)).collect();
        let leaks = |m: &Matrix| -> bool {
            (0..n).any(|i| {
                !inside[i] && basis.iter().any(|&j| m[(i, j)].norm() > 1e-14)
            })
        };
        let ops = std::iter::once(&self.hamiltonian).chain(&self.collapse_ops);
        for op in ops {
            if leaks(op.matrix()) {
                return Err(Error::InvalidParameter(
                    "restriction subspace is not invariant".into(),
                ));
            }
        }
        let space = CompositeSpace::new([(label, basis.len())])?;
        let pick = |op: &Operator| -> Operator {
            let m = Matrix::from_fn(basis.len(), basis.len(), |i, j| {
                op.matrix()[(basis[i], basis[j])]
            });
            Operator::from_matrix(&space, m).expect("square restriction")
        };
        Ok(Self::new_unchecked(
            space.clone(),
            pick(&self.hamiltonian),
            self.collapse_ops.iter().map(pick).collect(),
        ))
    }

    /// Model conjugated by a unitary on the same space.
    pub fn conjugate_by(&self, u: &Operator) -> Result<Self> {
        Ok(Self::new_unchecked(
            self.space.clone(),
            self.hamiltonian.conjugate_by(u)?,
            self.collapse_ops
                .iter()
                .map(|l| l.conjugate_by(u))
                .collect::<Result<_>>()?,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::{c, embed, local, EXACT_TOL};

    fn qubit() -> Arc<CompositeSpace> {
        CompositeSpace::new([("Q", 2)]).unwrap()
    }

    fn random_density(dim: usize, seed: u64) -> Matrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut next = || rng.random_range(-0.5..0.5);
        let a = Matrix::from_fn(dim, dim, |_, _| C64::new(next(), next()));
        let rho = &a * a.adjoint();
        let tr = rho.trace();
        rho / tr
    }

    #[test]
    fn zero_generator_gives_zero() {
        let sp = qubit();
        let m = LindbladModel::zero(&sp);
        let rho = random_density(2, 3);
        assert!(m.rhs(&rho).unwrap().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn x_channel_rhs() {
        let sp = qubit();
        let gamma: f64 = 0.37;
        let x = embed(&local::x(), "Q", &sp).unwrap();
        let m = LindbladModel::new(sp.clone(), Operator::zero(&sp), vec![x.scale(c(gamma.sqrt()))]).unwrap();
        let rho = random_density(2, 11);
        let expected = (x.matrix() * &rho * x.matrix() - &rho) * c(gamma);
        let got = m.rhs(&rho).unwrap();
        assert!(crate::opalg::max_abs_diff(&got, &expected) < EXACT_TOL);
    }

    #[test]
    fn hamiltonian_only_is_von_neumann() {
        let sp = CompositeSpace::new([("A", 2), ("B", 2)]).unwrap();
        let h = embed(&local::x(), "A", &sp).unwrap() + embed(&local::z(), "B", &sp).unwrap().scale(c(0.3));
        let m = LindbladModel::new(sp.clone(), h.clone(), vec![]).unwrap();
        let rho = random_density(4, 5);
        let expected = (h.matrix() * &rho - &rho * h.matrix()) * C64::new(0.0, -1.0);
        assert!(crate::opalg::max_abs_diff(&m.rhs(&rho).unwrap(), &expected) < EXACT_TOL);
    }

    #[test]
    fn rhs_is_traceless_and_hermitian() {
        let sp = CompositeSpace::new([("A", 2), ("B", 3)]).unwrap();
        let h = embed(&Matrix::from_fn(3, 3, |i, j| c((i + j) as f64)), "B", &sp).unwrap();
        let l1 = embed(&crate::opalg::local_unit(3, 0, 2), "B", &sp).unwrap().scale(c(1.3));
        let l2 = embed(&local::x(), "A", &sp).unwrap() * embed(&crate::opalg::local_unit(3, 1, 1), "B", &sp).unwrap();
        let m = LindbladModel::new(sp.clone(), h, vec![l1, l2]).unwrap();
        for seed in 0..10 {
            let rho = random_density(6, seed);
            let d = m.rhs(&rho).unwrap();
            assert!(d.trace().norm() < EXACT_TOL);
            assert!(crate::opalg::max_abs_diff(&d, &d.adjoint()) < EXACT_TOL);
        }
    }

    #[test]
    fn non_hermitian_hamiltonian_rejected() {
        let sp = qubit();
        let h = embed(&crate::opalg::local_unit(2, 0, 1), "Q", &sp).unwrap();
        assert!(matches!(
            LindbladModel::new(sp, h, vec![]),
            Err(Error::NonHermitian(_))
        ));
    }

    #[test]
    fn rhs_shape_checked() {
        let m = LindbladModel::zero(&qubit());
        assert!(matches!(
            m.rhs(&Matrix::zeros(3, 3)),
            Err(Error::MatrixShape { .. })
        ));
    }

    #[test]
    fn restriction_requires_invariance() {
        let sp = CompositeSpace::new([("A", 3)]).unwrap();
        let l = embed(&crate::opalg::local_unit(3, 0, 1), "A", &sp).unwrap();
        let m = LindbladModel::new(sp.clone(), Operator::zero(&sp), vec![l]).unwrap();
        assert!(m.restrict_to(&[0, 1], "sub").is_ok());
        assert!(m.restrict_to(&[0, 2], "sub").is_ok());
        assert!(m.restrict_to(&[1, 2], "sub").is_err());
    }
}
