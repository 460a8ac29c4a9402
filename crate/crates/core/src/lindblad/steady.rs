//! Stationary states from the null space of the vectorized generator.

use nalgebra::ColPivQR;

use crate::error::{Error, Result};
use crate::opalg::{Matrix, C64};

use super::{LindbladModel, Liouvillian};

/// Residual bound `‖rhs(ρ_ss)‖_max` for an accepted stationary state.
pub const STEADY_RESIDUAL_TOL: f64 = 1e-9;

/// Relative threshold on the pivoted `R` diagonal used to decide rank.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub enum SteadyState {
    Unique(Matrix),
    /// A basis of the stationary operators; not necessarily states.
    Degenerate(Vec<Matrix>),
}

impl SteadyState {
    pub fn multiplicity(&self) -> usize {
        match self {
            Self::Unique(_) => 1,
            Self::Degenerate(b) => b.len(),
        }
    }

    pub fn unique(self) -> Option<Matrix> {
        match self {
            Self::Unique(m) => Some(m),
            Self::Degenerate(_) => None,
        }
    }
}

/// Null space of `a` from a column-pivoted QR. Columns of the result span
/// `ker a`; they are not orthonormal.
pub(crate) fn null_space(a: Matrix) -> Matrix {
    let ncols = a.ncols();
    let qr = ColPivQR::new(a);
    let r = qr.r();
    let diag_max = (0..r.nrows()).map(|i| r[(i, i)].norm()).fold(0.0, f64::max);
    let rank = if diag_max == 0.0 {
        0
    } else {
        (0..r.nrows())
            .position(|i| r[(i, i)].norm() <= RANK_TOL * diag_max)
            .unwrap_or(r.nrows())
    };
    let nullity = ncols - rank;
    let mut basis = Matrix::zeros(ncols, nullity);
    let r11 = r.view((0, 0), (rank, rank)).into_owned();
    for (col, j) in (rank..ncols).enumerate() {
        let rhs = -r.view((0, j), (rank, 1)).into_owned();
        let z1 = r11
            .solve_upper_triangular(&rhs)
            .expect("pivots above the rank threshold are nonzero");
        let mut z = Matrix::zeros(ncols, 1);
        z.view_mut((0, 0), (rank, 1)).copy_from(&z1);
        z[(j, 0)] = crate::opalg::ONE;
        qr.p().inv_permute_rows(&mut z);
        let norm = z.norm();
        basis.set_column(col, &(z / C64::new(norm, 0.0)).column(0));
    }
    basis
}

fn reshape(v: &[C64], n: usize) -> Matrix {
    Matrix::from_column_slice(n, n, v)
}

fn residual(model: &LindbladModel, rho: &Matrix) -> Result<f64> {
    Ok(model.rhs(rho)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Stationary state of the generator. Reports every basis operator when
/// the stationary space is not one-dimensional.
pub fn steady_state(model: &LindbladModel) -> Result<SteadyState> {
    let n = model.dim();
    let dense = Liouvillian::from_model(model).to_dense();
    let kernel = null_space(dense);
    if kernel.ncols() != 1 {
        let basis = (0..kernel.ncols())
            .map(|j| reshape(kernel.column(j).as_slice(), n))
            .collect();
        return Ok(SteadyState::Degenerate(basis));
    }
    let x = reshape(kernel.column(0).as_slice(), n);
    let tr = x.trace();
    if tr.norm() < 1e-12 {
        return Err(Error::InvalidState(
            "stationary operator is traceless".into(),
        ));
    }
    let rho = x / tr;
    let rho = (&rho + rho.adjoint()).scale(0.5);
    let res = residual(model, &rho)?;
    if res > STEADY_RESIDUAL_TOL {
        return Err(Error::InvalidState(format!(
            "stationary residual {res:.3e} exceeds {STEADY_RESIDUAL_TOL:e}"
        )));
    }
    Ok(SteadyState::Unique(rho))
}

/// Long-time limit of `rho0`: the spectral projection onto the generator's
/// kernel, `R (Lᴴ R)⁻¹ Lᴴ vec(ρ0)` with `R`, `L` spanning the right and left
/// null spaces.
///
/// This is the actual limit when every other eigenvalue has negative real
/// part, and the time average otherwise.
pub fn stationary_projection(model: &LindbladModel, rho0: &Matrix) -> Result<Matrix> {
    let n = model.dim();
    if rho0.nrows() != n || rho0.ncols() != n {
        return Err(Error::MatrixShape {
            rows: rho0.nrows(),
            cols: rho0.ncols(),
            dim: n,
        });
    }
    let dense = Liouvillian::from_model(model).to_dense();
    let right = null_space(dense.clone());
    let left = null_space(dense.adjoint());
    if right.ncols() != left.ncols() || right.ncols() == 0 {
        return Err(Error::InvalidState(format!(
            "kernel dimensions disagree ({} right, {} left)",
            right.ncols(),
            left.ncols()
        )));
    }
    let gram = left.adjoint() * &right;
    let v0 = Matrix::from_column_slice(n * n, 1, rho0.as_slice());
    let coeffs = gram
        .lu()
        .solve(&(left.adjoint() * v0))
        .ok_or_else(|| Error::InvalidState("zero eigenvalue is not semisimple".into()))?;
    let v = right * coeffs;
    let rho = reshape(v.as_slice(), n);
    let rho = (&rho + rho.adjoint()).scale(0.5);
    let res = residual(model, &rho)?;
    if res > STEADY_RESIDUAL_TOL {
        return Err(Error::InvalidState(format!(
            "projected state residual {res:.3e} exceeds {STEADY_RESIDUAL_TOL:e}"
        )));
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::{c, embed, local, local_unit, CompositeSpace, Operator};

    #[test]
    fn null_space_of_known_matrix() {
        // third row is the sum of the first two
        let a = Matrix::from_row_slice(
            3,
            4,
            &[
                c(1.0), c(1.0), c(0.0), c(0.0),
                c(0.0), c(2.0), c(5.0), c(2.0),
                c(1.0), c(3.0), c(5.0), c(2.0),
            ],
        );
        let k = null_space(a.clone());
        assert_eq!(k.ncols(), 2);
        assert!((&a * &k).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn zero_generator_is_degenerate() {
        let sp = CompositeSpace::new([("Q", 2)]).unwrap();
        let s = steady_state(&LindbladModel::zero(&sp)).unwrap();
        assert_eq!(s.multiplicity(), 4);
    }

    #[test]
    fn x_channel_conserves_x() {
        let sp = CompositeSpace::new([("Q", 2)]).unwrap();
        let x = embed(&local::x(), "Q", &sp).unwrap();
        let m = LindbladModel::new(sp.clone(), Operator::zero(&sp), vec![x.scale(c(0.5))]).unwrap();
        // stationary operators: span{I, X}
        let s = steady_state(&m).unwrap();
        assert_eq!(s.multiplicity(), 2);
    }

    #[test]
    fn decay_has_unique_ground_state() {
        let sp = CompositeSpace::new([("A", 3)]).unwrap();
        let l1 = embed(&local_unit(3, 0, 1), "A", &sp).unwrap();
        let l2 = embed(&local_unit(3, 1, 2), "A", &sp).unwrap().scale(c(2.0));
        let h = embed(&Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.0), c(1.0), c(3.0)])), "A", &sp).unwrap();
        let m = LindbladModel::new(sp, h, vec![l1, l2]).unwrap();
        let rho = steady_state(&m).unwrap().unique().unwrap();
        assert!((rho[(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projection_of_dephasing_keeps_populations() {
        let sp = CompositeSpace::new([("Q", 2)]).unwrap();
        let z = embed(&local::z(), "Q", &sp).unwrap();
        let m = LindbladModel::new(sp, Operator::zero(&z.space().clone()), vec![z]).unwrap();
        let rho0 = Matrix::from_row_slice(2, 2, &[c(0.3), c(0.2), c(0.2), c(0.7)]);
        let p = stationary_projection(&m, &rho0).unwrap();
        let expected = Matrix::from_row_slice(2, 2, &[c(0.3), c(0.0), c(0.0), c(0.7)]);
        assert!(crate::opalg::max_abs_diff(&p, &expected) < 1e-12);
    }
}
