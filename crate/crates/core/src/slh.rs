//! SLH triples and their composition algebra.
//!
//! A triple `(S, L, H)` describes an open Markov component with `n` field
//! channels: an `n x n` operator-valued scattering matrix, an `n`-vector of
//! coupling operators and a Hamiltonian. Components are wired together with
//! the concatenation product (side by side) and the series product (output
//! of one feeding the input of the next).

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lindblad::LindbladModel;
use crate::opalg::{c, gemm_acc, same_space, CompositeSpace, Matrix, Operator, C64, ONE, ZERO};

/// Tolerance for the unitarity / Hermiticity checks run at construction.
pub const VALIDATION_TOL: f64 = 1e-10;

/// What to do when a triple fails its unitarity or Hermiticity check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Validation {
    #[default]
    Strict,
    /// Log a warning and keep going. Fock-truncated cavity models break
    /// unitarity at the truncation edge.
    Warn,
    Skip,
}

/// Per-channel coherent input amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct Displacement(pub Vec<C64>);

impl Displacement {
    pub fn zeros(n: usize) -> Self {
        Self(vec![ZERO; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn real(values: &[f64]) -> Self {
        Self(values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }
}

impl From<Vec<C64>> for Displacement {
    fn from(v: Vec<C64>) -> Self {
        Self(v)
    }
}

#[derive(Debug, Clone)]
pub struct SlhTriple {
    space: Arc<CompositeSpace>,
    n: usize,
    /// Row-major `n x n`.
    s: Vec<Operator>,
    l: Vec<Operator>,
    h: Operator,
}

impl SlhTriple {
    /// Build and validate strictly.
    pub fn new(s: Vec<Vec<Operator>>, l: Vec<Operator>, h: Operator) -> Result<Self> {
        Self::with_validation(s, l, h, Validation::Strict)
    }

    pub fn with_validation(
        s: Vec<Vec<Operator>>,
        l: Vec<Operator>,
        h: Operator,
        validation: Validation,
    ) -> Result<Self> {
        let n = l.len();
        if n == 0 {
            return Err(Error::InvalidParameter("a triple needs at least one channel".into()));
        }
        if s.len() != n {
            return Err(Error::ChannelMismatch {
                left: s.len(),
                right: n,
            });
        }
        let space = h.space().clone();
        let mut flat = Vec::with_capacity(n * n);
        for row in s {
            if row.len() != n {
                return Err(Error::ChannelMismatch {
                    left: row.len(),
                    right: n,
                });
            }
            flat.extend(row);
        }
        if flat.iter().chain(&l).any(|op| !same_space(op.space(), &space)) {
            return Err(Error::SpaceMismatch);
        }
        let triple = Self {
            space,
            n,
            s: flat,
            l,
            h,
        };
        triple.apply_validation(validation)?;
        Ok(triple)
    }

    fn from_parts(
        space: Arc<CompositeSpace>,
        n: usize,
        s: Vec<Operator>,
        l: Vec<Operator>,
        h: Operator,
    ) -> Self {
        debug_assert_eq!(s.len(), n * n);
        debug_assert_eq!(l.len(), n);
        Self { space, n, s, l, h }
    }

    fn apply_validation(&self, validation: Validation) -> Result<()> {
        if validation == Validation::Skip {
            return Ok(());
        }
        match (self.validate(VALIDATION_TOL), validation) {
            (Ok(()), _) => Ok(()),
            (Err(e), Validation::Warn) => {
                log::warn!("accepting invalid SLH triple: {e}");
                Ok(())
            }
            (Err(e), _) => Err(e),
        }
    }

    /// `(I_n, 0, 0)`.
    pub fn trivial(space: &Arc<CompositeSpace>, n: usize) -> Self {
        let mut s = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                s.push(if i == j {
                    Operator::identity(space)
                } else {
                    Operator::zero(space)
                });
            }
        }
        let l = (0..n).map(|_| Operator::zero(space)).collect();
        Self::from_parts(space.clone(), n, s, l, Operator::zero(space))
    }

    /// A passive component whose scattering matrix has scalar entries.
    pub fn static_scattering(space: &Arc<CompositeSpace>, s: &[Vec<C64>]) -> Result<Self> {
        let rows = s
            .iter()
            .map(|row| row.iter().map(|&v| Operator::scalar(space, v)).collect())
            .collect();
        let n = s.len();
        let l = (0..n).map(|_| Operator::zero(space)).collect();
        Self::new(rows, l, Operator::zero(space))
    }

    /// The Weyl displacement `W_d = (I, d, 0)`.
    pub fn displacement(space: &Arc<CompositeSpace>, d: &Displacement) -> Self {
        let mut w = Self::trivial(space, d.len());
        w.l = d.0.iter().map(|&a| Operator::scalar(space, a)).collect();
        w
    }

    /// `(S, 0, 0)` with the scattering matrix of `self`.
    pub fn scattering_only(&self) -> Self {
        Self::from_parts(
            self.space.clone(),
            self.n,
            self.s.clone(),
            (0..self.n).map(|_| Operator::zero(&self.space)).collect(),
            Operator::zero(&self.space),
        )
    }

    pub fn space(&self) -> &Arc<CompositeSpace> {
        &self.space
    }

    pub fn n_channels(&self) -> usize {
        self.n
    }

    /// Scattering entry, zero-based.
    pub fn s(&self, row: usize, col: usize) -> &Operator {
        &self.s[row * self.n + col]
    }

    pub fn l(&self, i: usize) -> &Operator {
        &self.l[i]
    }

    pub fn couplings(&self) -> &[Operator] {
        &self.l
    }

    pub fn h(&self) -> &Operator {
        &self.h
    }

    pub fn with_hamiltonian(mut self, h: Operator) -> Result<Self> {
        if !same_space(h.space(), &self.space) {
            return Err(Error::SpaceMismatch);
        }
        self.h = h;
        Ok(self)
    }

    /// `S†` as a row-major operator matrix.
    fn s_dagger(&self) -> Vec<Operator> {
        let n = self.n;
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.s(j, i).adjoint());
            }
        }
        out
    }

    /// Max entrywise deviation of `S†S` and `SS†` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let sd = self.s_dagger();
        let id = Operator::identity(&self.space);
        let zero = Operator::zero(&self.space);
        let a = mat_mul(self.n, &sd, &self.s, &self.space);
        let b = mat_mul(self.n, &self.s, &sd, &self.space);
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let target = if i == j { &id } else { &zero };
                let k = i * self.n + j;
                worst = worst
                    .max(a[k].max_abs_diff(target).unwrap_or(f64::INFINITY))
                    .max(b[k].max_abs_diff(target).unwrap_or(f64::INFINITY));
            }
        }
        worst
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let u = self.unitarity_error();
        if u > tol {
            return Err(Error::NonUnitary(u));
        }
        let h = self.h.hermiticity_error();
        if h > tol {
            return Err(Error::NonHermitian(h));
        }
        Ok(())
    }

    /// Largest entrywise difference across S, L and H.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::ChannelMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let mut worst = self.h.max_abs_diff(&other.h)?;
        for (a, b) in self.s.iter().zip(&other.s).chain(self.l.iter().zip(&other.l)) {
            worst = worst.max(a.max_abs_diff(b)?);
        }
        Ok(worst)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other).is_ok_and(|d| d <= tol)
    }

    /// Drop `count` channels starting at one-based position `at`.
    pub fn remove_channels(&self, at: usize, count: usize) -> Result<Self> {
        if at == 0 || at + count > self.n + 1 || count >= self.n {
            return Err(Error::ChannelIndex { at, max: self.n });
        }
        let keep: Vec<usize> = (0..self.n)
            .filter(|&i| i + 1 < at || i + 1 >= at + count)
            .collect();
        let m = keep.len();
        let mut s = Vec::with_capacity(m * m);
        for &i in &keep {
            for &j in &keep {
                s.push(self.s(i, j).clone());
            }
        }
        let l = keep.iter().map(|&i| self.l[i].clone()).collect();
        Ok(Self::from_parts(self.space.clone(), m, s, l, self.h.clone()))
    }
}

fn check_same(a: &SlhTriple, b: &SlhTriple) -> Result<()> {
    if same_space(&a.space, &b.space) {
        Ok(())
    } else {
        Err(Error::SpaceMismatch)
    }
}

/// Product of two row-major operator matrices.
/// `acc += a b`, skipping exactly-zero factors (common in padded S).
fn add_product(acc: &mut Matrix, a: &Operator, b: &Operator) {
    if a.is_zero(0.0) || b.is_zero(0.0) {
        return;
    }
    gemm_acc(acc, C64::new(1.0, 0.0), a.matrix(), b.matrix());
}

fn mat_mul(
    n: usize,
    a: &[Operator],
    b: &[Operator],
    space: &Arc<CompositeSpace>,
) -> Vec<Operator> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = Operator::zero(space).into_matrix();
            for k in 0..n {
                add_product(&mut acc, &a[i * n + k], &b[k * n + j]);
            }
            out.push(Operator::from_matrix(space, acc).expect("shape preserved"));
        }
    }
    out
}

fn mat_vec(n: usize, a: &[Operator], v: &[Operator], space: &Arc<CompositeSpace>) -> Vec<Operator> {
    (0..n)
        .map(|i| {
            let mut acc = Operator::zero(space).into_matrix();
            for k in 0..n {
                add_product(&mut acc, &a[i * n + k], &v[k]);
            }
            Operator::from_matrix(space, acc).expect("shape preserved")
        })
        .collect()
}

/// `G1 ⊞ G2 = (diag(S1, S2), [L1; L2], H1 + H2)`.
pub fn concatenate(g1: &SlhTriple, g2: &SlhTriple) -> Result<SlhTriple> {
    check_same(g1, g2)?;
    let n = g1.n + g2.n;
    let space = &g1.space;
    let mut s = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let entry = match (i < g1.n, j < g1.n) {
                (true, true) => g1.s(i, j).clone(),
                (false, false) => g2.s(i - g1.n, j - g1.n).clone(),
                _ => Operator::zero(space),
            };
            s.push(entry);
        }
    }
    let l = g1.l.iter().chain(&g2.l).cloned().collect();
    let h = &g1.h + &g2.h;
    Ok(SlhTriple::from_parts(space.clone(), n, s, l, h))
}

/// Concatenate a whole list left to right.
pub fn concatenate_all(parts: &[&SlhTriple]) -> Result<SlhTriple> {
    let (first, rest) = parts
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("nothing to concatenate".into()))?;
    rest.iter()
        .try_fold((*first).clone(), |acc, g| concatenate(&acc, g))
}

/// `G2 ◁ G1 = (S2 S1, S2 L1 + L2, H1 + H2 + Im{L2† S2 L1})`: the output of
/// `g1` feeds the input of `g2`.
pub fn series(g2: &SlhTriple, g1: &SlhTriple) -> Result<SlhTriple> {
    check_same(g1, g2)?;
    if g1.n != g2.n {
        return Err(Error::ChannelMismatch {
            left: g2.n,
            right: g1.n,
        });
    }
    let n = g1.n;
    let space = &g1.space;
    let s = mat_mul(n, &g2.s, &g1.s, space);
    let s2_l1 = mat_vec(n, &g2.s, &g1.l, space);
    let mut cross = Operator::zero(space).into_matrix();
    for (l2, sl1) in g2.l.iter().zip(&s2_l1) {
        gemm_acc(&mut cross, ONE, &l2.matrix().adjoint(), sl1.matrix());
    }
    let cross = Operator::from_matrix(space, cross)?;
    let l = s2_l1.iter().zip(&g2.l).map(|(a, b)| a + b).collect();
    let h = &(&g1.h + &g2.h) + &cross.im_part();
    Ok(SlhTriple::from_parts(space.clone(), n, s, l, h))
}

/// Series product of a chain written left to right, i.e.
/// `chain(&[a, b, c]) = a ◁ b ◁ c` with `c` nearest the input.
pub fn series_chain(parts: &[&SlhTriple]) -> Result<SlhTriple> {
    let (last, rest) = parts
        .split_last()
        .ok_or_else(|| Error::InvalidParameter("empty series chain".into()))?;
    rest.iter()
        .rev()
        .try_fold((*last).clone(), |acc, g| series(g, &acc))
}

/// Drive every input channel with a coherent amplitude:
/// `G ◁ (I, d, 0) = (S, L + S d, H + Im{L† S d})`.
pub fn coherent_drive(g: &SlhTriple, d: &Displacement) -> Result<SlhTriple> {
    if d.len() != g.n {
        return Err(Error::LengthMismatch {
            expected: g.n,
            got: d.len(),
        });
    }
    let space = &g.space;
    let n = g.n;
    let sd: Vec<Operator> = (0..n)
        .map(|i| {
            let mut acc = Operator::zero(space).into_matrix();
            for (k, &dk) in d.0.iter().enumerate() {
                if dk != ZERO {
                    acc += g.s(i, k).matrix() * dk;
                }
            }
            Operator::from_matrix(space, acc).expect("shape preserved")
        })
        .collect();
    let mut cross = Operator::zero(space).into_matrix();
    for (li, sdi) in g.l.iter().zip(&sd) {
        gemm_acc(&mut cross, ONE, &li.matrix().adjoint(), sdi.matrix());
    }
    let cross = Operator::from_matrix(space, cross)?;
    let l = g.l.iter().zip(&sd).map(|(a, b)| a + b).collect();
    let h = &g.h + &cross.im_part();
    Ok(SlhTriple::from_parts(space.clone(), n, g.s.clone(), l, h))
}

/// Insert `count` pass-through channels so they occupy one-based positions
/// `at ..= at + count - 1` of the result.
pub fn pad(g: &SlhTriple, at: usize, count: usize) -> Result<SlhTriple> {
    if at == 0 || at > g.n + 1 {
        return Err(Error::ChannelIndex { at, max: g.n + 1 });
    }
    let n = g.n + count;
    let space = &g.space;
    let first = at - 1;
    // old channel index for each new one, None for inserted channels
    let map: Vec<Option<usize>> = (0..n)
        .map(|i| {
            if i < first {
                Some(i)
            } else if i < first + count {
                None
            } else {
                Some(i - count)
            }
        })
        .collect();
    let mut s = Vec::with_capacity(n * n);
    for (i, mi) in map.iter().enumerate() {
        for (j, mj) in map.iter().enumerate() {
            s.push(match (mi, mj) {
                (Some(a), Some(b)) => g.s(*a, *b).clone(),
                (None, None) if i == j => Operator::identity(space),
                _ => Operator::zero(space),
            });
        }
    }
    let l = map
        .iter()
        .map(|m| match m {
            Some(a) => g.l[*a].clone(),
            None => Operator::zero(space),
        })
        .collect();
    Ok(SlhTriple::from_parts(space.clone(), n, s, l, g.h.clone()))
}

/// Scalar permutation component routing input `i` to output `perm[i]`.
pub fn permutation(space: &Arc<CompositeSpace>, perm: &[usize]) -> Result<SlhTriple> {
    let n = perm.len();
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::BadPermutation);
        }
        seen[p] = true;
    }
    let mut s = vec![vec![ZERO; n]; n];
    for (i, &p) in perm.iter().enumerate() {
        s[p][i] = ONE;
    }
    SlhTriple::static_scattering(space, &s)
}

/// Relabel channels: old channel `i` becomes channel `perm[i]` on both the
/// input and the output side. Computed as `P ◁ G ◁ P†`.
pub fn reorder_channels(g: &SlhTriple, perm: &[usize]) -> Result<SlhTriple> {
    if perm.len() != g.n {
        return Err(Error::LengthMismatch {
            expected: g.n,
            got: perm.len(),
        });
    }
    let p = permutation(&g.space, perm)?;
    let mut inverse = vec![0; perm.len()];
    for (i, &q) in perm.iter().enumerate() {
        inverse[q] = i;
    }
    let p_inv = permutation(&g.space, &inverse)?;
    series(&p, &series(g, &p_inv)?)
}

/// Factorization of a driven network into `(S,0,0) ◁ (I,d,0) ◁ G̃`.
#[derive(Debug, Clone)]
pub struct Extracted {
    pub static_part: SlhTriple,
    pub drive: Displacement,
    pub inner: SlhTriple,
}

impl Extracted {
    /// `static ◁ W_d ◁ inner`.
    pub fn recompose(&self) -> Result<SlhTriple> {
        let w = SlhTriple::displacement(&self.inner.space, &self.drive);
        series_chain(&[&self.static_part, &w, &self.inner])
    }
}

/// Move the displacement of a vacuum-input network `g0` behind its
/// scattering so that all drive-dependent terms sit in the Hamiltonian of
/// an identity-scattering subcomponent:
/// `G̃ = (I, S†L⁰, H - Im{d† S† L⁰})` where `(S, L, H) = coherent_drive(g0, d)`.
pub fn extract_displacements(g0: &SlhTriple, d: &Displacement) -> Result<Extracted> {
    let driven = coherent_drive(g0, d)?;
    let space = &g0.space;
    let n = g0.n;
    let sd = g0.s_dagger();
    let inner_l = mat_vec(n, &sd, &g0.l, space);
    // d† S† L⁰ = Σ_i conj(d_i) (S†L⁰)_i
    let mut m = Operator::zero(space).into_matrix();
    for (di, li) in d.0.iter().zip(&inner_l) {
        if *di != ZERO {
            m += li.matrix() * di.conj();
        }
    }
    let m = Operator::from_matrix(space, m)?;
    let inner_h = driven.h() - &m.im_part();
    let mut inner = SlhTriple::trivial(space, n);
    inner.l = inner_l;
    inner.h = inner_h;
    Ok(Extracted {
        static_part: g0.scattering_only(),
        drive: d.clone(),
        inner,
    })
}

/// Internal-state master equation of a triple; `S` only shapes the output
/// fields and is dropped.
pub fn to_lindblad(g: &SlhTriple) -> LindbladModel {
    LindbladModel::new_unchecked(g.space.clone(), g.h.clone(), g.l.clone())
}

fn unit_complex(values: &mut impl Iterator<Item = f64>) -> C64 {
    C64::new(values.next().unwrap(), values.next().unwrap())
}

/// Triple filled from a flat list of numbers (recycled as needed), for
/// property checks: `S` is cut from the unitary QR factor of a matrix on
/// `C^n ⊗ C^dim`, `L` is arbitrary and `H` Hermitian. Panics on an empty
/// list.
pub fn random_triple(space: &Arc<CompositeSpace>, n: usize, raw: &[f64]) -> SlhTriple {
    let dim = space.dim();
    let big = n * dim;
    let mut it = raw.iter().copied().cycle();
    let m = Matrix::from_fn(big, big, |_, _| unit_complex(&mut it));
    let q = m.qr().q();
    let mut rows = Vec::new();
    for i in 0..n {
        let mut row = Vec::new();
        for j in 0..n {
            let block = q.view((i * dim, j * dim), (dim, dim)).into_owned();
            row.push(Operator::from_matrix(space, block).unwrap());
        }
        rows.push(row);
    }
    let l = (0..n)
        .map(|_| {
            Operator::from_matrix(space, Matrix::from_fn(dim, dim, |_, _| unit_complex(&mut it)))
                .unwrap()
        })
        .collect();
    let a = Matrix::from_fn(dim, dim, |_, _| unit_complex(&mut it));
    let h = Operator::from_matrix(space, (&a + a.adjoint()) * c(0.5)).unwrap();
    SlhTriple::new(rows, l, h).unwrap()
}
