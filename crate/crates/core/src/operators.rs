//! Hermitian operator algebra on a single `N`-level constituent.
//!
//! Operators are dense complex matrices. The ψ-dependent operator bases are
//! built from the Schmidt vectors of a maximally entangled state, so that an
//! observable is identified with a real coefficient vector of length `N²`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::states::SchmidtBasis;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Hermiticity tolerance applied when wrapping caller-supplied matrices.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Eigenvalues closer than this are treated as one degenerate eigenvalue.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Projected residuals below this are dropped when building degenerate eigenbases.
pub const RESIDUAL_DROP_TOL: f64 = 1e-8;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Which constituent an operator or coefficient vector belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Alice,
    Bob,
}

/// Largest entry of `|M_ij - conj(M_ji)|`.
pub fn max_asymmetry(m: &CMatrix) -> f64 {
    let n = m.nrows().min(m.ncols());
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

/// Max-norm of `X^† X - I` for the columns of `x`.
pub(crate) fn orthonormality_deviation(x: &CMatrix) -> f64 {
    let gram = x.adjoint() * x;
    let id = CMatrix::identity(gram.nrows(), gram.ncols());
    max_abs(&(gram - id))
}

/// A dense `N×N` Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    entries: CMatrix,
}

impl HermitianOperator {
    /// Wraps `entries`, rejecting matrices that are not Hermitian within
    /// [`HERMITICITY_TOL`] (scaled by the largest entry when it exceeds one).
    pub fn new(entries: CMatrix) -> Result<Self> {
        Self::check_shape(&entries)?;
        let asym = max_asymmetry(&entries);
        if asym > HERMITICITY_TOL * max_abs(&entries).max(1.0) {
            return Err(Error::NotHermitian { max_asymmetry: asym });
        }
        Ok(Self { entries })
    }

    /// Opt-in repair: wraps `(M + M^†)/2`.
    pub fn symmetrized(entries: CMatrix) -> Result<Self> {
        Self::check_shape(&entries)?;
        Ok(Self::from_raw(entries))
    }

    fn check_shape(entries: &CMatrix) -> Result<()> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::NotSquare {
                rows: entries.nrows(),
                cols: entries.ncols(),
            });
        }
        if entries.nrows() < 2 {
            return Err(Error::DimensionTooSmall(entries.nrows()));
        }
        Ok(())
    }

    /// Internal constructor for matrices that are Hermitian up to rounding.
    pub(crate) fn from_raw(entries: CMatrix) -> Self {
        let sym = (&entries + entries.adjoint()) * C64::new(0.5, 0.0);
        Self { entries: sym }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: CMatrix::identity(dim, dim),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            entries: CMatrix::zeros(dim, dim),
        }
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let d = CVector::from_iterator(values.len(), values.iter().map(|&x| C64::new(x, 0.0)));
        Self::new(CMatrix::from_diagonal(&d))
    }

    /// `|v⟩⟨v|` for a (not necessarily normalized) vector.
    pub fn projector(v: &CVector) -> Self {
        Self::from_raw(v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|z| z.re).sum()
    }

    /// `U A U^†`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Self {
        Self::from_raw(u * &self.entries * u.adjoint())
    }

    /// Max-norm of the commutator `[A, B]`.
    pub fn commutator_norm(&self, other: &Self) -> f64 {
        let ab = &self.entries * &other.entries;
        let ba = &other.entries * &self.entries;
        max_abs(&(ab - ba))
    }

    /// Max-norm of `A - B`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs(&(&self.entries - &other.entries))
    }

    /// `⟨x|A|x⟩`, real for Hermitian `A`.
    pub fn expectation(&self, x: &CVector) -> f64 {
        x.dotc(&(&self.entries * x)).re
    }
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: Self) -> HermitianOperator {
        HermitianOperator {
            entries: &self.entries + &rhs.entries,
        }
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;
    fn sub(self, rhs: Self) -> HermitianOperator {
        HermitianOperator {
            entries: &self.entries - &rhs.entries,
        }
    }
}

impl Neg for &HermitianOperator {
    type Output = HermitianOperator;
    fn neg(self) -> HermitianOperator {
        HermitianOperator {
            entries: -&self.entries,
        }
    }
}

impl Mul<f64> for &HermitianOperator {
    type Output = HermitianOperator;
    fn mul(self, rhs: f64) -> HermitianOperator {
        HermitianOperator {
            entries: &self.entries * C64::new(rhs, 0.0),
        }
    }
}

/// Hilbert–Schmidt inner product `Tr(x y)`.
pub fn hs_inner(x: &HermitianOperator, y: &HermitianOperator) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    let n = x.dim();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += x.entries[(i, j)] * y.entries[(j, i)];
        }
    }
    Ok(acc.re)
}

/// Real coordinates of an observable in an [`OperatorBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    side: Side,
    dim: usize,
    components: Vec<f64>,
}

impl CoefficientVector {
    pub fn new(side: Side, dim: usize, components: Vec<f64>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        if components.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: components.len(),
            });
        }
        Ok(Self {
            side,
            dim,
            components,
        })
    }

    pub fn zeros(side: Side, dim: usize) -> Self {
        Self {
            side,
            dim,
            components: vec![0.0; dim * dim],
        }
    }

    /// Coefficients of the identity: ones on the diagonal slots.
    pub fn identity(side: Side, dim: usize) -> Self {
        let mut v = Self::zeros(side, dim);
        v.components[..dim].fill(1.0);
        v
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    /// Same components, relabelled to `side`.
    pub fn on_side(&self, side: Side) -> Self {
        Self {
            side,
            ..self.clone()
        }
    }

    pub fn dot(&self, other: &Self) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(self
            .components
            .iter()
            .zip(&other.components)
            .map(|(x, y)| x * y)
            .sum())
    }

    pub fn norm_sq(&self) -> f64 {
        self.components.iter().map(|x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Trace of the represented operator: the sum of the diagonal-projector slots.
    pub fn trace(&self) -> f64 {
        self.components[..self.dim].iter().sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            components: self.components.iter().map(|x| x * factor).collect(),
            ..self.clone()
        }
    }

    pub fn negated(&self) -> Self {
        self.scaled(-1.0)
    }

    /// `self + factor * other`; sides and dims must agree.
    pub fn add_scaled(&self, factor: f64, other: &Self) -> Result<Self> {
        if self.side != other.side {
            return Err(Error::SideMismatch {
                expected: self.side,
                found: other.side,
            });
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(Self {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(x, y)| x + factor * y)
                .collect(),
            ..self.clone()
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
    }
}

/// Label of a basis element, with 0-based indices `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisLabel {
    Diagonal(usize),
    Symmetric(usize, usize),
    Antisymmetric(usize, usize),
}

/// Canonical element order: all diagonal projectors, then the symmetric
/// off-diagonal elements for `i < j` in lexicographic order, then the
/// antisymmetric ones in the same order.
pub fn basis_labels(dim: usize) -> Vec<BasisLabel> {
    let pairs: Vec<(usize, usize)> = (0..dim)
        .flat_map(|i| ((i + 1)..dim).map(move |j| (i, j)))
        .collect();
    (0..dim)
        .map(BasisLabel::Diagonal)
        .chain(pairs.iter().map(|&(i, j)| BasisLabel::Symmetric(i, j)))
        .chain(pairs.iter().map(|&(i, j)| BasisLabel::Antisymmetric(i, j)))
        .collect()
}

/// The `N²` Hilbert–Schmidt orthonormal Hermitian operators tied to a
/// Schmidt basis. Bob's elements are the transpose partners of Alice's.
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    side: Side,
    dim: usize,
    elements: Vec<HermitianOperator>,
}

impl OperatorBasis {
    pub fn side(&self) -> Side {
        self.side
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

fn outer(x: &CVector, y: &CVector) -> CMatrix {
    x * y.adjoint()
}

pub fn build_basis(schmidt: &SchmidtBasis, side: Side) -> Result<OperatorBasis> {
    schmidt.validate()?;
    let n = schmidt.dim();
    let v = schmidt.alice();
    let col = |k: usize| -> CVector { v.column(k).into_owned() };
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    let is = C64::new(0.0, FRAC_1_SQRT_2);
    let mut alice = Vec::with_capacity(n * n);
    for label in basis_labels(n) {
        let m = match label {
            BasisLabel::Diagonal(i) => outer(&col(i), &col(i)),
            BasisLabel::Symmetric(i, j) => {
                (outer(&col(i), &col(j)) + outer(&col(j), &col(i))) * s
            }
            BasisLabel::Antisymmetric(i, j) => {
                (outer(&col(i), &col(j)) - outer(&col(j), &col(i))) * is
            }
        };
        alice.push(HermitianOperator::from_raw(m));
    }
    let elements = match side {
        Side::Alice => alice,
        Side::Bob => alice
            .iter()
            .map(|f| transpose_partner(f, schmidt))
            .collect::<Result<_>>()?,
    };
    Ok(OperatorBasis {
        side,
        dim: n,
        elements,
    })
}

/// Component `k` is `Tr(basis[k] · op)`.
pub fn vectorize(op: &HermitianOperator, basis: &OperatorBasis) -> Result<CoefficientVector> {
    if op.dim() != basis.dim {
        return Err(Error::DimensionMismatch {
            expected: basis.dim,
            found: op.dim(),
        });
    }
    let components = basis
        .elements
        .iter()
        .map(|f| hs_inner(f, op))
        .collect::<Result<Vec<_>>>()?;
    CoefficientVector::new(basis.side, basis.dim, components)
}

/// `Σ_k a_k basis[k]`.
pub fn devectorize(a: &CoefficientVector, basis: &OperatorBasis) -> Result<HermitianOperator> {
    if a.side != basis.side {
        return Err(Error::SideMismatch {
            expected: basis.side,
            found: a.side,
        });
    }
    if a.components.len() != basis.elements.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.elements.len(),
            found: a.components.len(),
        });
    }
    let n = basis.dim;
    let mut acc = CMatrix::zeros(n, n);
    for (x, f) in a.components.iter().zip(&basis.elements) {
        if *x != 0.0 {
            acc += f.entries() * C64::new(*x, 0.0);
        }
    }
    Ok(HermitianOperator::from_raw(acc))
}

/// Maps `Ô = Σ o_ij |v_i⟩⟨v_j|` on Alice's side to `Σ o_ji |w_i⟩⟨w_j|` on Bob's.
pub fn transpose_partner(op: &HermitianOperator, schmidt: &SchmidtBasis) -> Result<HermitianOperator> {
    partner_between(op, schmidt.alice(), schmidt.bob())
}

/// Inverse direction of [`transpose_partner`]: Bob's side back to Alice's.
pub fn transpose_partner_to_alice(
    op: &HermitianOperator,
    schmidt: &SchmidtBasis,
) -> Result<HermitianOperator> {
    partner_between(op, schmidt.bob(), schmidt.alice())
}

fn partner_between(op: &HermitianOperator, from: &CMatrix, to: &CMatrix) -> Result<HermitianOperator> {
    if op.dim() != from.nrows() {
        return Err(Error::DimensionMismatch {
            expected: from.nrows(),
            found: op.dim(),
        });
    }
    let elements = from.adjoint() * op.entries() * from;
    Ok(HermitianOperator::from_raw(to * elements.transpose() * to.adjoint()))
}

/// Eigenvalues in descending order with matching orthonormal eigenvectors
/// stored as matrix columns.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, k: usize) -> CVector {
        self.eigenvectors.column(k).into_owned()
    }

    /// `Σ λ_i |e_i⟩⟨e_i|`.
    pub fn reconstruct(&self) -> HermitianOperator {
        let d = CVector::from_iterator(
            self.dim(),
            self.eigenvalues.iter().map(|&x| C64::new(x, 0.0)),
        );
        let u = &self.eigenvectors;
        HermitianOperator::from_raw(u * CMatrix::from_diagonal(&d) * u.adjoint())
    }

    /// Index ranges of eigenvalues equal within [`DEGENERACY_TOL`].
    pub fn degenerate_groups(&self) -> Vec<std::ops::Range<usize>> {
        group_sorted(&self.eigenvalues)
    }
}

fn group_sorted(values: &[f64]) -> Vec<std::ops::Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || (values[k - 1] - values[k]).abs() > DEGENERACY_TOL {
            groups.push(start..k);
            start = k;
        }
    }
    groups
}

/// Fixes the phase so that the largest-magnitude component is real and
/// positive; ties go to the lowest index.
pub(crate) fn fix_phase(v: &mut CVector) {
    let max = v.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-9))
        .expect("nonzero vector has a pivot");
    let phase = v[pivot] / v[pivot].norm();
    *v /= phase;
    v[pivot] = C64::new(v[pivot].re, 0.0);
}

/// Deterministic orthonormal basis of the column span of `span` (orthonormal
/// columns): standard basis vectors are projected in index order and
/// orthonormalized, discarding residuals below [`RESIDUAL_DROP_TOL`].
pub(crate) fn canonical_span_basis(span: &CMatrix) -> CMatrix {
    let (n, m) = span.shape();
    let mut coeffs: Vec<CVector> = Vec::with_capacity(m);
    for k in 0..n {
        if coeffs.len() == m {
            break;
        }
        // E^† e_k in coordinates of the span
        let mut c = CVector::from_iterator(m, (0..m).map(|r| span[(k, r)].conj()));
        if c.norm() < RESIDUAL_DROP_TOL {
            continue;
        }
        for _ in 0..2 {
            for q in &coeffs {
                let proj = q.dotc(&c);
                c -= q * proj;
            }
        }
        let norm = c.norm();
        if norm < RESIDUAL_DROP_TOL {
            continue;
        }
        coeffs.push(c / C64::new(norm, 0.0));
    }
    debug_assert_eq!(coeffs.len(), m, "span basis must be complete");
    let mut out = CMatrix::zeros(n, m);
    for (r, c) in coeffs.iter().enumerate() {
        out.set_column(r, &(span * c));
    }
    out
}

pub fn eigensystem(op: &HermitianOperator) -> EigenSystem {
    let n = op.dim();
    let eig = SymmetricEigen::new(op.entries().clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let sorted_values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();

    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = CMatrix::zeros(n, n);
    for group in group_sorted(&sorted_values) {
        if group.len() == 1 {
            let mut v = eig.eigenvectors.column(order[group.start]).into_owned();
            fix_phase(&mut v);
            eigenvalues.push(sorted_values[group.start]);
            eigenvectors.set_column(group.start, &v);
            continue;
        }
        let mut span = CMatrix::zeros(n, group.len());
        for (c, k) in group.clone().enumerate() {
            span.set_column(c, &eig.eigenvectors.column(order[k]));
        }
        let basis = canonical_span_basis(&span);
        let mut block: Vec<(f64, CVector)> = (0..group.len())
            .map(|c| {
                let v = basis.column(c).into_owned();
                (op.expectation(&v), v)
            })
            .collect();
        block.sort_by(|x, y| y.0.total_cmp(&x.0));
        for (offset, (value, v)) in block.into_iter().enumerate() {
            eigenvalues.push(value);
            eigenvectors.set_column(group.start + offset, &v);
        }
    }
    EigenSystem {
        eigenvalues,
        eigenvectors,
    }
}
