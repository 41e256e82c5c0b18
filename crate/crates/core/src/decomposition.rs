//! Decomposition of a Hermitian observable into `α₀ I + Σ_j α_j C_j`, where the
//! `C_j` commute and each has spectrum Ω_N (`{-1, 0, +1}` with a single `±1`,
//! or `{-1, +1}` when `N = 2`).
//!
//! Values of observables are only meaningful relative to a context, a complete
//! orthonormal eigenbasis. The components are differences of adjacent rank-one
//! projectors of that eigenbasis, `C_j = P_j - P_{j+1}`.

use crate::error::{Error, Result};
use crate::operators::{
    eigensystem, max_abs, orthonormality_deviation, CMatrix, CVector, HermitianOperator,
    DEGENERACY_TOL,
};

/// Eigenvalue tolerance for spectrum classification.
pub const SPECTRUM_TOL: f64 = 1e-8;
/// Allowed off-diagonal residual when a context is checked against an operator.
pub const CONTEXT_TOL: f64 = 1e-8;
/// Commutator norm below which components are considered commuting.
pub const COMMUTE_TOL: f64 = 1e-10;
/// Context orthonormality tolerance.
pub const CONTEXT_ORTHONORMAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumClass {
    /// `{+1, 0, -1}` with multiplicities `(1, N-2, 1)`, `N > 2`.
    OmegaN,
    /// `{+1, -1}` without degeneracy, `N = 2`.
    TwoLevel,
}

impl SpectrumClass {
    pub fn for_dim(dim: usize) -> Self {
        if dim == 2 {
            SpectrumClass::TwoLevel
        } else {
            SpectrumClass::OmegaN
        }
    }

    /// Expected eigenvalues in descending order.
    pub fn eigenvalues(dim: usize) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        v[0] = 1.0;
        v[dim - 1] = -1.0;
        v
    }
}

/// Largest deviation of the sorted spectrum of `op` from the Ω_N pattern.
pub fn omega_deviation(op: &HermitianOperator) -> f64 {
    eigensystem(op)
        .eigenvalues
        .iter()
        .zip(SpectrumClass::eigenvalues(op.dim()))
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
}

/// Classifies `op`, failing with [`Error::WrongSpectrum`] unless its spectrum
/// is Ω_N within [`SPECTRUM_TOL`].
pub fn check_omega(op: &HermitianOperator) -> Result<SpectrumClass> {
    let deviation = omega_deviation(op);
    if deviation > SPECTRUM_TOL {
        return Err(Error::WrongSpectrum(format!(
            "max eigenvalue deviation {deviation:e} from {:?}",
            SpectrumClass::eigenvalues(op.dim())
        )));
    }
    Ok(SpectrumClass::for_dim(op.dim()))
}

/// An ordered orthonormal eigenbasis fixing the measurement context.
#[derive(Debug, Clone, PartialEq)]
pub struct Context {
    eigenbasis: CMatrix,
}

impl Context {
    pub fn new(eigenbasis: CMatrix) -> Result<Self> {
        if eigenbasis.nrows() != eigenbasis.ncols() {
            return Err(Error::NotSquare {
                rows: eigenbasis.nrows(),
                cols: eigenbasis.ncols(),
            });
        }
        if eigenbasis.nrows() < 2 {
            return Err(Error::DimensionTooSmall(eigenbasis.nrows()));
        }
        let deviation = orthonormality_deviation(&eigenbasis);
        if deviation > CONTEXT_ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal {
                what: "context",
                deviation,
            });
        }
        Ok(Self { eigenbasis })
    }

    /// The deterministic eigenbasis of `op`.
    pub fn of(op: &HermitianOperator) -> Self {
        Self {
            eigenbasis: eigensystem(op).eigenvectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenbasis.nrows()
    }

    pub fn eigenbasis(&self) -> &CMatrix {
        &self.eigenbasis
    }

    pub fn vector(&self, k: usize) -> CVector {
        self.eigenbasis.column(k).into_owned()
    }

    pub fn projector(&self, k: usize) -> HermitianOperator {
        HermitianOperator::projector(&self.vector(k))
    }

    /// `U^† A U` for the context unitary `U`.
    fn rotated(&self, op: &HermitianOperator) -> CMatrix {
        self.eigenbasis.adjoint() * op.entries() * &self.eigenbasis
    }

    /// Largest off-diagonal entry of `op` in this basis.
    pub fn diagonalization_residual(&self, op: &HermitianOperator) -> f64 {
        let m = self.rotated(op);
        let n = m.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    worst = worst.max(m[(i, j)].norm());
                }
            }
        }
        worst
    }

    /// Checks that this context diagonalizes `op` and returns the diagonal
    /// values in context order.
    pub fn eigenvalues_of(&self, op: &HermitianOperator) -> Result<Vec<f64>> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: op.dim(),
            });
        }
        let residual = self.diagonalization_residual(op);
        if residual > CONTEXT_TOL * max_abs(op.entries()).max(1.0) {
            return Err(Error::ContextMismatch { residual });
        }
        let m = self.rotated(op);
        Ok((0..self.dim()).map(|k| m[(k, k)].re).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CartanTerm {
    pub alpha: f64,
    pub component: HermitianOperator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CartanDecomposition {
    pub alpha0: f64,
    pub terms: Vec<CartanTerm>,
    pub context: Context,
    pub class: SpectrumClass,
}

impl CartanDecomposition {
    pub fn dim(&self) -> usize {
        self.context.dim()
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.alpha).collect()
    }

    /// `α₀ I + Σ α_j C_j`.
    pub fn reconstruct(&self) -> HermitianOperator {
        self.terms.iter().fold(
            &HermitianOperator::identity(self.dim()) * self.alpha0,
            |acc, t| &acc + &(&t.component * t.alpha),
        )
    }
}

pub fn cartan_decompose(
    op: &HermitianOperator,
    context: Option<&Context>,
) -> Result<CartanDecomposition> {
    let n = op.dim();
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    let context = match context {
        Some(c) => c.clone(),
        None => Context::of(op),
    };
    let values = context.eigenvalues_of(op)?;
    let alpha0 = op.trace() / n as f64;
    let projectors: Vec<HermitianOperator> = (0..n).map(|k| context.projector(k)).collect();
    let mut partial = 0.0;
    let terms = (0..n - 1)
        .map(|j| {
            partial += values[j] - alpha0;
            CartanTerm {
                alpha: partial,
                component: &projectors[j] - &projectors[j + 1],
            }
        })
        .collect();
    Ok(CartanDecomposition {
        alpha0,
        terms,
        context,
        class: SpectrumClass::for_dim(n),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub commute_ok: bool,
    pub spectrum_ok: bool,
    pub reconstruct_residual: f64,
    pub max_commutator: f64,
    pub max_spectrum_deviation: f64,
    pub max_component_trace: f64,
}

impl DecompositionReport {
    pub fn passes(&self, reconstruct_tol: f64) -> bool {
        self.commute_ok && self.spectrum_ok && self.reconstruct_residual < reconstruct_tol
    }
}

pub fn verify_decomposition(
    dec: &CartanDecomposition,
    source: &HermitianOperator,
) -> Result<DecompositionReport> {
    if dec.dim() != source.dim() {
        return Err(Error::DimensionMismatch {
            expected: source.dim(),
            found: dec.dim(),
        });
    }
    let mut max_commutator = 0.0f64;
    for (j, x) in dec.terms.iter().enumerate() {
        for y in &dec.terms[j + 1..] {
            max_commutator = max_commutator.max(x.component.commutator_norm(&y.component));
        }
    }
    let max_spectrum_deviation = dec
        .terms
        .iter()
        .map(|t| omega_deviation(&t.component))
        .fold(0.0f64, f64::max);
    let max_component_trace = dec
        .terms
        .iter()
        .map(|t| t.component.trace().abs())
        .fold(0.0f64, f64::max);
    Ok(DecompositionReport {
        commute_ok: max_commutator < COMMUTE_TOL,
        spectrum_ok: max_spectrum_deviation < SPECTRUM_TOL,
        reconstruct_residual: dec.reconstruct().max_abs_diff(source),
        max_commutator,
        max_spectrum_deviation,
        max_component_trace,
    })
}

/// Largest commutator norm between components of two decompositions.
pub fn cross_commutator(x: &CartanDecomposition, y: &CartanDecomposition) -> f64 {
    x.terms
        .iter()
        .flat_map(|s| y.terms.iter().map(move |t| s.component.commutator_norm(&t.component)))
        .fold(0.0f64, f64::max)
}

/// For an operator with a degenerate eigenvalue, two valid contexts whose
/// decompositions contain non-commuting components: the deterministic
/// eigenbasis, and the same basis with the first two vectors of a degenerate
/// eigenspace replaced by their Hadamard combinations. `None` when the
/// spectrum is non-degenerate.
pub fn decomposition_ambiguity_witness(op: &HermitianOperator) -> Option<(Context, Context)> {
    let eig = eigensystem(op);
    let group = eig.degenerate_groups().into_iter().find(|g| g.len() > 1)?;
    debug_assert!(
        eig.eigenvalues[group.start] - eig.eigenvalues[group.end - 1] <= DEGENERACY_TOL * group.len() as f64
    );
    let first = Context {
        eigenbasis: eig.eigenvectors.clone(),
    };
    let (p, q) = (group.start, group.start + 1);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let e = eig.vector(p);
    let f = eig.vector(q);
    let mut rotated = eig.eigenvectors;
    rotated.set_column(p, &((&e + &f) * crate::operators::C64::new(s, 0.0)));
    rotated.set_column(q, &((&e - &f) * crate::operators::C64::new(s, 0.0)));
    let second = Context { eigenbasis: rotated };

    let x = cartan_decompose(op, Some(&first)).ok()?;
    let y = cartan_decompose(op, Some(&second)).ok()?;
    (cross_commutator(&x, &y) > 1e-6).then_some((first, second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::C64;
    use crate::random::{haar_unitary, random_hermitian, random_omega, seeded_rng};

    #[test]
    fn identity_has_zero_alphas() {
        for n in 2..=5 {
            let dec = cartan_decompose(&HermitianOperator::identity(n), None).unwrap();
            assert!((dec.alpha0 - 1.0).abs() < 1e-15);
            assert_eq!(dec.terms.len(), n - 1);
            assert!(dec.alphas().iter().all(|a| a.abs() < 1e-15));
        }
    }

    #[test]
    fn diagonal_three_level_example() {
        let op = HermitianOperator::diagonal(&[3.0, 1.0, -1.0]).unwrap();
        let ctx = Context::new(CMatrix::identity(3, 3)).unwrap();
        let dec = cartan_decompose(&op, Some(&ctx)).unwrap();
        assert!((dec.alpha0 - 1.0).abs() < 1e-15);
        assert_eq!(dec.alphas(), vec![2.0, 2.0]);
        let c1 = HermitianOperator::diagonal(&[1.0, -1.0, 0.0]).unwrap();
        let c2 = HermitianOperator::diagonal(&[0.0, 1.0, -1.0]).unwrap();
        assert_eq!(dec.terms[0].component, c1);
        assert_eq!(dec.terms[1].component, c2);
        assert!(dec.reconstruct().max_abs_diff(&op) < 1e-14);
    }

    #[test]
    fn omega_operator_telescopes() {
        let mut rng = seeded_rng(31);
        let op = random_omega(4, &mut rng);
        let dec = cartan_decompose(&op, None).unwrap();
        assert!(dec.alpha0.abs() < 1e-14);
        for a in dec.alphas() {
            assert!((a - 1.0).abs() < 1e-12);
        }
        assert!(dec.reconstruct().max_abs_diff(&op) < 1e-10);
    }

    #[test]
    fn qubit_components_are_two_level() {
        let mut rng = seeded_rng(2);
        let dec = cartan_decompose(&random_hermitian(2, &mut rng), None).unwrap();
        assert_eq!(dec.class, SpectrumClass::TwoLevel);
        assert_eq!(check_omega(&dec.terms[0].component).unwrap(), SpectrumClass::TwoLevel);
    }

    #[test]
    fn rejects_foreign_context() {
        let op = HermitianOperator::diagonal(&[3.0, 1.0, -1.0]).unwrap();
        let mut rng = seeded_rng(4);
        let ctx = Context::new(haar_unitary(3, &mut rng)).unwrap();
        assert!(matches!(
            cartan_decompose(&op, Some(&ctx)),
            Err(Error::ContextMismatch { .. })
        ));
    }

    #[test]
    fn verify_random_five_level() {
        let mut rng = seeded_rng(17);
        let op = random_hermitian(5, &mut rng);
        let dec = cartan_decompose(&op, None).unwrap();
        let report = verify_decomposition(&dec, &op).unwrap();
        assert!(report.commute_ok && report.spectrum_ok);
        assert!(report.reconstruct_residual < 1e-10);
        assert!(report.max_component_trace < 1e-12);
    }

    #[test]
    fn verify_detects_tampering() {
        let op = HermitianOperator::diagonal(&[3.0, 1.0, -1.0]).unwrap();
        let mut dec = cartan_decompose(&op, Some(&Context::new(CMatrix::identity(3, 3)).unwrap())).unwrap();
        dec.terms[0].alpha += 0.1;
        let report = verify_decomposition(&dec, &op).unwrap();
        assert!((report.reconstruct_residual - 0.1).abs() < 1e-12);

        let mut dec = cartan_decompose(&op, None).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let x = CMatrix::from_row_slice(
            3,
            3,
            &[
                C64::new(0.0, 0.0), C64::new(s, 0.0), C64::new(0.0, 0.0),
                C64::new(s, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0),
                C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0),
            ],
        );
        dec.terms[1].component = HermitianOperator::new(x * C64::new(2f64.sqrt(), 0.0)).unwrap();
        let report = verify_decomposition(&dec, &op).unwrap();
        assert!(!report.commute_ok);
    }

    #[test]
    fn ambiguity_witness_cases() {
        assert!(decomposition_ambiguity_witness(&HermitianOperator::diagonal(&[3.0, 1.0, -1.0]).unwrap()).is_none());

        for op in [
            HermitianOperator::diagonal(&[1.0, 1.0, -2.0]).unwrap(),
            HermitianOperator::identity(2),
        ] {
            let (c1, c2) = decomposition_ambiguity_witness(&op).expect("degenerate");
            let x = cartan_decompose(&op, Some(&c1)).unwrap();
            let y = cartan_decompose(&op, Some(&c2)).unwrap();
            assert!(cross_commutator(&x, &y) > 1e-6);
            assert!(verify_decomposition(&y, &op).unwrap().passes(1e-10));
        }
    }

    #[test]
    fn nondegenerate_contexts_agree_up_to_phase() {
        let mut rng = seeded_rng(40);
        let op = random_hermitian(4, &mut rng);
        let eig = eigensystem(&op);
        // rephase every eigenvector: still a valid context for op
        let mut rephased = eig.eigenvectors.clone();
        for k in 0..4 {
            let phase = C64::from_polar(1.0, 0.7 * k as f64 + 0.3);
            let mut col = rephased.column_mut(k);
            col *= phase;
        }
        let x = cartan_decompose(&op, None).unwrap();
        let y = cartan_decompose(&op, Some(&Context::new(rephased).unwrap())).unwrap();
        assert!(cross_commutator(&x, &y) < 1e-8);
    }
}
