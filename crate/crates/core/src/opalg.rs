//! Dense complex operators on labeled tensor-product spaces.
//!
//! A [`CompositeSpace`] is an ordered list of named subsystems. The global
//! basis is the lexicographic tensor order of that list, so the first
//! subsystem is the most significant digit. Single-subsystem operators are
//! lifted into the global space with [`embed`].
//!
//! Two-level subsystems use the basis order `(g, h)`: index 0 is `|g>` and
//! index 1 is `|h>`, which makes `Z = Π_h - Π_g`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;
pub type Vector = DVector<C64>;

/// Entrywise tolerance used by the algebraic identity checks.
pub const EXACT_TOL: f64 = 1e-12;

/// Local level indices. `E` and `R` share index 2: the probe atom uses
/// `(g, h, e)` and the Raman atom uses `(g, h, r)`, never both at once.
pub mod level {
    pub const G: usize = 0;
    pub const H: usize = 1;
    pub const E: usize = 2;
    pub const R: usize = 2;
}

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subsystem {
    pub name: String,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositeSpace {
    subsystems: Vec<Subsystem>,
    total_dim: usize,
}

impl CompositeSpace {
    pub fn new<'a>(parts: impl IntoIterator<Item = (&'a str, usize)>) -> Result<Arc<Self>> {
        let mut subsystems: Vec<Subsystem> = Vec::new();
        for (name, dim) in parts {
            if subsystems.iter().any(|s| s.name == name) {
                return Err(Error::DuplicateLabel(name.to_string()));
            }
            if dim == 0 {
                return Err(Error::InvalidParameter(format!(
                    "subsystem `{name}` has dimension 0"
                )));
            }
            subsystems.push(Subsystem {
                name: name.to_string(),
                dim,
            });
        }
        if subsystems.is_empty() {
            return Err(Error::InvalidParameter("empty composite space".into()));
        }
        let total_dim = subsystems.iter().map(|s| s.dim).product();
        Ok(Arc::new(Self {
            subsystems,
            total_dim,
        }))
    }

    /// The 32-dimensional register + relay space `Q1 Q2 Q3 R1 R2`.
    pub fn memory_cell() -> Arc<Self> {
        Self::new([("Q1", 2), ("Q2", 2), ("Q3", 2), ("R1", 2), ("R2", 2)])
            .expect("static space is well formed")
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn dim(&self) -> usize {
        self.total_dim
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.subsystems
            .iter()
            .position(|s| s.name == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn local_dim(&self, label: &str) -> Result<usize> {
        Ok(self.subsystems[self.position(label)?].dim)
    }

    /// Number of global basis states spanned by one step of `label`'s digit.
    fn stride(&self, pos: usize) -> usize {
        self.subsystems[pos + 1..].iter().map(|s| s.dim).product()
    }

    /// Global index of a product basis state given one level per subsystem.
    pub fn basis_index(&self, levels: &[usize]) -> Result<usize> {
        if levels.len() != self.subsystems.len() {
            return Err(Error::LengthMismatch {
                expected: self.subsystems.len(),
                got: levels.len(),
            });
        }
        let mut idx = 0;
        for (s, &l) in self.subsystems.iter().zip(levels) {
            if l >= s.dim {
                return Err(Error::InvalidParameter(format!(
                    "level {l} out of range for `{}` (dim {})",
                    s.name, s.dim
                )));
            }
            idx = idx * s.dim + l;
        }
        Ok(idx)
    }

    /// Inverse of [`basis_index`](Self::basis_index).
    pub fn levels_of(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.subsystems.len()];
        for (slot, s) in out.iter_mut().zip(&self.subsystems).rev() {
            *slot = index % s.dim;
            index /= s.dim;
        }
        out
    }

    pub fn basis_state(&self, levels: &[usize]) -> Result<Vector> {
        let mut v = Vector::zeros(self.total_dim);
        v[self.basis_index(levels)?] = ONE;
        Ok(v)
    }
}

impl fmt::Display for CompositeSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .subsystems
            .iter()
            .map(|s| format!("{}[{}]", s.name, s.dim))
            .collect();
        write!(f, "{}", parts.join(" ⊗ "))
    }
}

pub fn same_space(a: &Arc<CompositeSpace>, b: &Arc<CompositeSpace>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// A dense operator on a [`CompositeSpace`].
#[derive(Debug, Clone)]
pub struct Operator {
    space: Arc<CompositeSpace>,
    matrix: Matrix,
}

impl Operator {
    pub fn from_matrix(space: &Arc<CompositeSpace>, matrix: Matrix) -> Result<Self> {
        let dim = space.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::MatrixShape {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                dim,
            });
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite operator entry".into()));
        }
        Ok(Self {
            space: space.clone(),
            matrix,
        })
    }

    pub fn zero(space: &Arc<CompositeSpace>) -> Self {
        Self {
            space: space.clone(),
            matrix: Matrix::zeros(space.dim(), space.dim()),
        }
    }

    pub fn identity(space: &Arc<CompositeSpace>) -> Self {
        Self::scalar(space, ONE)
    }

    pub fn scalar(space: &Arc<CompositeSpace>, value: C64) -> Self {
        Self {
            space: space.clone(),
            matrix: Matrix::from_diagonal_element(space.dim(), space.dim(), value),
        }
    }

    /// `|ket><bra|` for two global vectors.
    pub fn outer(space: &Arc<CompositeSpace>, ket: &Vector, bra: &Vector) -> Result<Self> {
        Self::from_matrix(space, ket * bra.adjoint())
    }

    pub fn space(&self) -> &Arc<CompositeSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            space: self.space.clone(),
            matrix: &self.matrix * factor,
        }
    }

    fn check_space(&self, other: &Self) -> Result<()> {
        if same_space(&self.space, &other.space) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix - &other.matrix,
        })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: matmul(&self.matrix, &other.matrix),
        })
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: matmul(&self.matrix, &other.matrix) - matmul(&other.matrix, &self.matrix),
        })
    }

    /// `Im{M} = (M - M†) / 2i`; Hermitian for any `M`.
    pub fn im_part(&self) -> Self {
        let m = (&self.matrix - self.matrix.adjoint()) * C64::new(0.0, -0.5);
        Self {
            space: self.space.clone(),
            matrix: m,
        }
    }

    /// `Re{M} = (M + M†) / 2`.
    pub fn re_part(&self) -> Self {
        let m = (&self.matrix + self.matrix.adjoint()) * c(0.5);
        Self {
            space: self.space.clone(),
            matrix: m,
        }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_space(other)?;
        Ok(max_abs_diff(&self.matrix, &other.matrix))
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other).is_ok_and(|d| d <= tol)
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.max_abs() <= tol
    }

    pub fn hermiticity_error(&self) -> f64 {
        max_abs_diff(&self.matrix, &self.matrix.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    pub fn unitarity_error(&self) -> f64 {
        let id = Matrix::identity(self.dim(), self.dim());
        let a = max_abs_diff(&(self.matrix.adjoint() * &self.matrix), &id);
        let b = max_abs_diff(&(&self.matrix * self.matrix.adjoint()), &id);
        a.max(b)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() <= tol
    }

    /// `U A U†`.
    pub fn conjugate_by(&self, unitary: &Self) -> Result<Self> {
        self.check_space(unitary)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: &unitary.matrix * &self.matrix * unitary.matrix.adjoint(),
        })
    }

    /// `<bra| A |ket>`.
    pub fn matrix_element(&self, bra: &Vector, ket: &Vector) -> C64 {
        bra.dotc(&(&self.matrix * ket))
    }

    /// Spectral norm of a Hermitian operator (largest |eigenvalue|).
    pub fn hermitian_norm(&self) -> f64 {
        let herm = (&self.matrix + self.matrix.adjoint()) * c(0.5);
        herm.symmetric_eigenvalues()
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

pub(crate) fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `acc ← alpha a b + acc` through the blocked complex kernel; nalgebra's
/// generic complex product is several times slower at the sizes used here.
pub(crate) fn gemm_acc(acc: &mut Matrix, alpha: C64, a: &Matrix, b: &Matrix) {
    let (m, k) = a.shape();
    let (k2, n) = b.shape();
    assert!(k == k2 && acc.shape() == (m, n), "gemm shape mismatch");
    if m == 0 || n == 0 || k == 0 {
        return;
    }
    // SAFETY: Complex<f64> is repr(C) {re, im}, identical to [f64; 2]; the
    // three buffers are column-major with the strides given, and `acc` is
    // uniquely borrowed so it cannot alias `a` or `b`.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [alpha.re, alpha.im],
            a.as_ptr().cast(),
            1,
            m as isize,
            b.as_ptr().cast(),
            1,
            k as isize,
            [1.0, 0.0],
            acc.as_mut_ptr().cast(),
            1,
            m as isize,
        );
    }
}

pub(crate) fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(a.nrows(), b.ncols());
    gemm_acc(&mut out, C64::new(1.0, 0.0), a, b);
    out
}

macro_rules! binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&Operator> for &Operator {
            type Output = Operator;
            /// Panics if the operands live on different spaces; use the
            /// `checked_*` form to get an error instead.
            fn $method(self, rhs: &Operator) -> Operator {
                self.$checked(rhs).expect("operator space mismatch")
            }
        }
        impl $trait<Operator> for Operator {
            type Output = Operator;
            fn $method(self, rhs: Operator) -> Operator {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Operator> for Operator {
            type Output = Operator;
            fn $method(self, rhs: &Operator) -> Operator {
                (&self).$method(rhs)
            }
        }
        impl $trait<Operator> for &Operator {
            type Output = Operator;
            fn $method(self, rhs: Operator) -> Operator {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        self.scale(rhs)
    }
}

impl Mul<C64> for Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        self.scale(rhs)
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scale(c(rhs))
    }
}

impl Mul<f64> for Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scale(c(rhs))
    }
}

impl Mul<&Operator> for f64 {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        rhs.scale(c(self))
    }
}

impl Mul<Operator> for f64 {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        rhs.scale(c(self))
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(c(-1.0))
    }
}

impl Neg for Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(c(-1.0))
    }
}

/// Lift a local operator on `label` to `I ⊗ … ⊗ local ⊗ … ⊗ I`.
pub fn embed(local: &Matrix, label: &str, space: &Arc<CompositeSpace>) -> Result<Operator> {
    let pos = space.position(label)?;
    let d = space.subsystems()[pos].dim;
    if local.nrows() != d || local.ncols() != d {
        return Err(Error::DimensionMismatch {
            label: label.to_string(),
            expected: d,
            rows: local.nrows(),
            cols: local.ncols(),
        });
    }
    let n = space.dim();
    let stride = space.stride(pos);
    let block = stride * d;
    let mut m = Matrix::zeros(n, n);
    for outer in (0..n).step_by(block) {
        for inner in 0..stride {
            let base = outer + inner;
            for a in 0..d {
                for b in 0..d {
                    let v = local[(a, b)];
                    if v != ZERO {
                        m[(base + a * stride, base + b * stride)] = v;
                    }
                }
            }
        }
    }
    Ok(Operator {
        space: space.clone(),
        matrix: m,
    })
}

/// Local matrix unit `|j><k|` of size `dim`.
pub fn local_unit(dim: usize, j: usize, k: usize) -> Matrix {
    let mut m = Matrix::zeros(dim, dim);
    m[(j, k)] = ONE;
    m
}

/// Embedded `|j><k|` on `label`.
pub fn ket_bra(space: &Arc<CompositeSpace>, label: &str, j: usize, k: usize) -> Result<Operator> {
    let d = space.local_dim(label)?;
    if j >= d || k >= d {
        return Err(Error::InvalidParameter(format!(
            "level out of range for `{label}` (dim {d})"
        )));
    }
    embed(&local_unit(d, j, k), label, space)
}

pub fn projector(space: &Arc<CompositeSpace>, label: &str, j: usize) -> Result<Operator> {
    ket_bra(space, label, j, j)
}

/// Truncated bosonic annihilation operator on a `dim`-level mode.
pub fn local_annihilation(dim: usize) -> Matrix {
    let mut m = Matrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = c((n as f64).sqrt());
    }
    m
}

pub mod local {
    //! 2x2 matrices in the `(g, h)` basis.
    use super::{c, Matrix, ONE, ZERO};

    pub fn x() -> Matrix {
        Matrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }

    pub fn z() -> Matrix {
        Matrix::from_row_slice(2, 2, &[c(-1.0), ZERO, ZERO, ONE])
    }

    /// `(X + Z)/√2`, which exchanges `X` and `Z` under the `Z = Π_h - Π_g`
    /// convention. In `(g, h)` order this is `[[-1, 1], [1, 1]]/√2`, not the
    /// textbook matrix (which would map `X` to `-Z` here).
    pub fn hadamard() -> Matrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Matrix::from_row_slice(2, 2, &[c(-s), c(s), c(s), c(s)])
    }
}

/// Embedded single-qubit generators for one two-level subsystem.
#[derive(Debug, Clone)]
pub struct QubitOps {
    pub x: Operator,
    pub z: Operator,
    pub pi_g: Operator,
    pub pi_h: Operator,
    /// `|g><h|`
    pub sigma_gh: Operator,
    /// `|h><g|`
    pub sigma_hg: Operator,
}

impl QubitOps {
    pub fn new(space: &Arc<CompositeSpace>, label: &str) -> Result<Self> {
        let dim = space.local_dim(label)?;
        if dim != 2 {
            return Err(Error::WrongSubsystemDim {
                label: label.to_string(),
                dim,
                expected: 2,
            });
        }
        let pi_g = projector(space, label, level::G)?;
        let pi_h = projector(space, label, level::H)?;
        let sigma_gh = ket_bra(space, label, level::G, level::H)?;
        let sigma_hg = ket_bra(space, label, level::H, level::G)?;
        let x = &sigma_gh + &sigma_hg;
        let z = &pi_h - &pi_g;
        Ok(Self {
            x,
            z,
            pi_g,
            pi_h,
            sigma_gh,
            sigma_hg,
        })
    }
}

/// Qubit generators for every requested label.
pub fn pauli_library(
    space: &Arc<CompositeSpace>,
    labels: &[&str],
) -> Result<BTreeMap<String, QubitOps>> {
    labels
        .iter()
        .map(|&l| Ok((l.to_string(), QubitOps::new(space, l)?)))
        .collect()
}
