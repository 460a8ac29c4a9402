//! Vectorized generator in compressed sparse row form.
//!
//! States are flattened column-major (nalgebra's native layout), so
//! `vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)`.

use crate::opalg::{Matrix, C64, ZERO};

use super::LindbladModel;

#[derive(Debug, Clone)]
pub struct Liouvillian {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

fn nonzeros(m: &Matrix) -> Vec<(usize, usize, C64)> {
    let mut out = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v != ZERO {
                out.push((i, j, v));
            }
        }
    }
    out
}

impl Liouvillian {
    pub fn from_model(model: &LindbladModel) -> Self {
        let n = model.dim();
        let big = n * n;
        let k = model.effective_generator();
        let mut triplets: Vec<(usize, usize, C64)> = Vec::new();
        // K ρ: (I ⊗ K)
        for &(i, kk, v) in &nonzeros(&k) {
            for j in 0..n {
                triplets.push((i + j * n, kk + j * n, v));
            }
        }
        // ρ K†: (K̄ ⊗ I), entry (i + j n, i + l n) = conj(K[j, l])
        for &(j, l, v) in &nonzeros(&k) {
            for i in 0..n {
                triplets.push((i + j * n, i + l * n, v.conj()));
            }
        }
        // L ρ L†: (L̄ ⊗ L), entry (i + j n, kk + l n) = L[i,kk] conj(L[j,l])
        for op in model.collapse_ops() {
            let nz = nonzeros(op.matrix());
            for &(i, kk, a) in &nz {
                for &(j, l, b) in &nz {
                    triplets.push((i + j * n, kk + l * n, a * b.conj()));
                }
            }
        }
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; big + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().expect("merged entry exists") += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..big {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            dim: n,
            row_ptr,
            cols,
            vals,
        }
    }

    /// Hilbert-space dimension `n`; the superoperator acts on `n²` entries.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `out = L x`.
    pub fn apply(&self, x: &[C64], out: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim * self.dim);
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[p] * x[self.cols[p]];
            }
            *o = acc;
        }
    }

    pub fn apply_matrix(&self, rho: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.dim, self.dim);
        self.apply(rho.as_slice(), out.as_mut_slice());
        out
    }

    pub fn to_dense(&self) -> Matrix {
        let big = self.dim * self.dim;
        let mut m = Matrix::zeros(big, big);
        for r in 0..big {
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[p])] = self.vals[p];
            }
        }
        m
    }
}
