use crate::error::{Error, Result};
use crate::opalg::{Matrix, Vector};

/// `⟨ψ|ψ⟩`-normalized projector `|ψ⟩⟨ψ|`.
pub fn density_from_pure(psi: &Vector) -> Result<Matrix> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!("state vector has norm {norm}")));
    }
    Ok(psi * psi.adjoint())
}

pub fn trace_error(rho: &Matrix) -> f64 {
    (rho.trace() - crate::opalg::ONE).norm()
}

pub fn hermiticity_error(rho: &Matrix) -> f64 {
    crate::opalg::max_abs_diff(rho, &rho.adjoint())
}

/// Smallest eigenvalue of the Hermitian part of `rho`.
pub fn min_eigenvalue(rho: &Matrix) -> f64 {
    let herm = (rho + rho.adjoint()).scale(0.5);
    herm.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Fidelity of `(|g⟩ - i|h⟩)/√2` under `L = √Γ X` after time `t`.
pub fn baseline_single_qubit(gamma_flip: f64, t: f64) -> f64 {
    0.5 * (1.0 + (-2.0 * gamma_flip * t).exp())
}

/// Fidelity of a three-qubit pure state under three independent
/// `√Γ X` channels, one per qubit.
///
/// Each channel flips its qubit with probability `p = (1 - e^{-2Γt})/2`, so
/// `F = Σ_S p^|S| (1-p)^{3-|S|} |⟨ψ|X_S|ψ⟩|²` over subsets `S`.
pub fn baseline_three_qubit(gamma_flip: f64, psi0: &Vector, t: f64) -> Result<f64> {
    if psi0.len() != 8 {
        return Err(Error::InvalidState(format!(
            "expected an 8-dimensional register state, got {}",
            psi0.len()
        )));
    }
    let p = 0.5 * (1.0 - (-2.0 * gamma_flip * t).exp());
    let mut f = 0.0;
    for mask in 0..8usize {
        let flips = mask.count_ones() as i32;
        let weight = p.powi(flips) * (1.0 - p).powi(3 - flips);
        let overlap: num_complex::Complex64 =
            (0..8).map(|i| psi0[i].conj() * psi0[i ^ mask]).sum();
        f += weight * overlap.norm_sqr();
    }
    Ok(f)
}
