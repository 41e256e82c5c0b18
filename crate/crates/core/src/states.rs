//! Maximally entangled bipartite states and their closed-form averages.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::operators::{
    build_basis, orthonormality_deviation, CMatrix, CVector, CoefficientVector,
    HermitianOperator, OperatorBasis, Side, C64,
};
use crate::random::haar_unitary;

/// Orthonormality tolerance for Schmidt vectors.
pub const SCHMIDT_TOL: f64 = 1e-12;
/// Cutoff for the "vanishing local average" precondition.
pub const ZERO_AVERAGE_TOL: f64 = 1e-10;

/// Schmidt vectors `{v_j}` (Alice) and `{w_j}` (Bob), stored as matrix columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtBasis {
    alice: CMatrix,
    bob: CMatrix,
}

impl SchmidtBasis {
    pub fn new(alice: CMatrix, bob: CMatrix) -> Result<Self> {
        let basis = Self { alice, bob };
        basis.validate()?;
        Ok(basis)
    }

    pub fn standard(dim: usize) -> Self {
        Self {
            alice: CMatrix::identity(dim, dim),
            bob: CMatrix::identity(dim, dim),
        }
    }

    /// Independent Haar-random bases on both sides.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let alice = haar_unitary(dim, rng);
        let bob = haar_unitary(dim, rng);
        Self { alice, bob }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.alice.nrows();
        if n < 2 {
            return Err(Error::DimensionTooSmall(n));
        }
        for (what, m) in [("Alice Schmidt", &self.alice), ("Bob Schmidt", &self.bob)] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: m.ncols().max(m.nrows()),
                });
            }
            let deviation = orthonormality_deviation(m);
            if deviation > SCHMIDT_TOL {
                return Err(Error::NotOrthonormal { what, deviation });
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.alice.nrows()
    }

    pub fn alice(&self) -> &CMatrix {
        &self.alice
    }

    pub fn bob(&self) -> &CMatrix {
        &self.bob
    }
}

/// `|ψ⟩ = N^{-1/2} Σ_j |v_j⟩ ⊗ |w_j⟩`, stored as an explicit `N²` vector with
/// Alice's index major (`k·N + l`).
#[derive(Debug, Clone)]
pub struct MaxEntangledState {
    schmidt: SchmidtBasis,
    vector: CVector,
    alice_basis: OperatorBasis,
    bob_basis: OperatorBasis,
}

pub fn make_state(schmidt: SchmidtBasis) -> Result<MaxEntangledState> {
    schmidt.validate()?;
    let n = schmidt.dim();
    let amp = C64::new(1.0 / (n as f64).sqrt(), 0.0);
    let mut vector = CVector::zeros(n * n);
    for j in 0..n {
        for k in 0..n {
            for l in 0..n {
                vector[k * n + l] += amp * schmidt.alice[(k, j)] * schmidt.bob[(l, j)];
            }
        }
    }
    let alice_basis = build_basis(&schmidt, Side::Alice)?;
    let bob_basis = build_basis(&schmidt, Side::Bob)?;
    Ok(MaxEntangledState {
        schmidt,
        vector,
        alice_basis,
        bob_basis,
    })
}

impl MaxEntangledState {
    pub fn dim(&self) -> usize {
        self.schmidt.dim()
    }

    pub fn schmidt(&self) -> &SchmidtBasis {
        &self.schmidt
    }

    pub fn vector(&self) -> &CVector {
        &self.vector
    }

    pub fn basis(&self, side: Side) -> &OperatorBasis {
        match side {
            Side::Alice => &self.alice_basis,
            Side::Bob => &self.bob_basis,
        }
    }

    /// The state as an `N×N` amplitude matrix `Ψ_{kl}` (Alice index `k`).
    pub fn amplitude_matrix(&self) -> CMatrix {
        let n = self.dim();
        DMatrix::from_fn(n, n, |k, l| self.vector[k * n + l])
    }

    fn flatten(&self, m: &CMatrix) -> CVector {
        let n = self.dim();
        CVector::from_fn(n * n, |idx, _| m[(idx / n, idx % n)])
    }

    /// `(X ⊗ I)|ψ⟩` or `(I ⊗ X)|ψ⟩`.
    pub fn apply_local(&self, op: &HermitianOperator, side: Side) -> Result<CVector> {
        self.check_dim(op.dim())?;
        let psi = self.amplitude_matrix();
        let out = match side {
            Side::Alice => op.entries() * psi,
            Side::Bob => psi * op.entries().transpose(),
        };
        Ok(self.flatten(&out))
    }

    /// Dense `⟨ψ|X ⊗ Y|ψ⟩`.
    pub fn expectation(&self, alice: &HermitianOperator, bob: &HermitianOperator) -> Result<f64> {
        self.check_dim(alice.dim())?;
        self.check_dim(bob.dim())?;
        let psi = self.amplitude_matrix();
        let transformed = alice.entries() * &psi * bob.entries().transpose();
        Ok(psi.dotc(&transformed).re)
    }

    /// Reduced density matrix of one side, by explicit partial trace.
    pub fn reduced_density(&self, side: Side) -> CMatrix {
        let n = self.dim();
        let mut rho = CMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..n {
                    acc += match side {
                        Side::Alice => self.vector[r * n + k] * self.vector[c * n + k].conj(),
                        Side::Bob => self.vector[k * n + r] * self.vector[k * n + c].conj(),
                    };
                }
                rho[(r, c)] = acc;
            }
        }
        rho
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found,
            });
        }
        Ok(())
    }

    fn check_coefficients(&self, v: &CoefficientVector, side: Side) -> Result<()> {
        if v.side() != side {
            return Err(Error::SideMismatch {
                expected: side,
                found: v.side(),
            });
        }
        self.check_dim(v.dim())
    }
}

/// `⟨A(a) B(b)⟩_ψ = a·b / N`.
pub fn joint_average(
    state: &MaxEntangledState,
    a: &CoefficientVector,
    b: &CoefficientVector,
) -> Result<f64> {
    state.check_coefficients(a, Side::Alice)?;
    state.check_coefficients(b, Side::Bob)?;
    Ok(a.dot(b)? / state.dim() as f64)
}

/// `⟨A(a)²⟩_ψ = ‖a‖² / N`, either side.
pub fn square_average(state: &MaxEntangledState, a: &CoefficientVector) -> Result<f64> {
    state.check_dim(a.dim())?;
    Ok(a.norm_sq() / state.dim() as f64)
}

/// `⟨A⟩_ψ = Tr(A) / N`.
pub fn local_average(state: &MaxEntangledState, op: &HermitianOperator) -> Result<f64> {
    state.check_dim(op.dim())?;
    Ok(op.trace() / state.dim() as f64)
}

/// Pearson correlation of two observables with vanishing local averages:
/// the cosine of the angle between `a` and `b`.
pub fn pearson(
    state: &MaxEntangledState,
    a: &CoefficientVector,
    b: &CoefficientVector,
) -> Result<f64> {
    state.check_coefficients(a, Side::Alice)?;
    state.check_coefficients(b, Side::Bob)?;
    let n = state.dim() as f64;
    for (label, v) in [("A", a), ("B", b)] {
        let avg = v.trace() / n;
        if avg.abs() > ZERO_AVERAGE_TOL {
            return Err(Error::Precondition(format!(
                "local average of {label} is {avg:e}, expected 0"
            )));
        }
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Precondition("zero-norm coefficient vector".into()));
    }
    Ok(a.dot(b)? / (na * nb))
}
