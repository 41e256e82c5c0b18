//! Bounds on the intermediate averages of crypto-nonlocal models, and their
//! Monte Carlo verification.
//!
//! Along a partition `a_0 = a, …, a_n = -a` of the curve with adjacent
//! spacing `‖a‖² cos(π/n)`, every model consistent with the quantum
//! statistics of a maximally entangled state satisfies
//!
//! ```text
//! E_τ |f(a_j, τ) - g(a_{j+1}, τ)| ≤ (4‖a‖²/N) sin²(π/2n)        (per step)
//! E_τ |f(a, τ) - f(-a, τ)|        ≤ (4n‖a‖²/N) sin²(π/2n)       (chained)
//! E_τ |f(a, τ)|                   ≤ (2n‖a‖²/N) sin²(π/2n)       (final)
//! ```
//!
//! and the final bound vanishes as `n → ∞`.

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::curve::{partition, CurveSpec};
use crate::decomposition::{cartan_decompose, check_omega, Context};
use crate::error::{Error, Result};
use crate::hvmodels::{CryptoNonlocalModel, MeasurementSetting};
use crate::operators::{devectorize, vectorize, CoefficientVector, OperatorBasis, Side};
use crate::random::derive_seed;
use crate::sampling::{estimate, map_indexed, EstimateResult, Execution, Moments};
use crate::states::{MaxEntangledState, ZERO_AVERAGE_TOL};

/// Number of standard errors used by every statistical decision.
pub const SIGMA_RULE: f64 = 3.0;
/// Absolute slack for "within k standard errors of zero" when the estimate is
/// exact up to rounding.
pub const NUMERIC_FLOOR: f64 = 1e-12;

fn check_bound_args(n: usize, norm_a_sq: f64, dim: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if dim < 2 {
        return Err(Error::DimensionTooSmall(dim));
    }
    if !(norm_a_sq > 0.0 && norm_a_sq.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "squared norm must be positive, got {norm_a_sq}"
        )));
    }
    Ok(())
}

fn sin_sq_half_step(n: usize) -> f64 {
    let s = (PI / (2.0 * n as f64)).sin();
    s * s
}

/// `(4‖a‖²/N) sin²(π/2n)`.
pub fn per_step_bound(n: usize, norm_a_sq: f64, dim: usize) -> Result<f64> {
    check_bound_args(n, norm_a_sq, dim)?;
    Ok(4.0 * norm_a_sq / dim as f64 * sin_sq_half_step(n))
}

/// `n` times the per-step bound.
pub fn chain_bound(n: usize, norm_a_sq: f64, dim: usize) -> Result<f64> {
    Ok(n as f64 * per_step_bound(n, norm_a_sq, dim)?)
}

/// `(2n‖a‖²/N) sin²(π/2n)`, half the chained bound.
pub fn final_bound(n: usize, norm_a_sq: f64, dim: usize) -> Result<f64> {
    Ok(0.5 * chain_bound(n, norm_a_sq, dim)?)
}

/// Three-way outcome of comparing an estimate against an upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// `mean + 3σ ≤ bound`.
    Holds,
    /// `mean - 3σ > bound`.
    Violated,
    Inconclusive,
}

impl Verdict {
    pub fn classify(estimate: &EstimateResult, bound: f64) -> Self {
        let margin = SIGMA_RULE * estimate.stderr;
        if estimate.mean - margin > bound {
            Verdict::Violated
        } else if estimate.mean + margin <= bound {
            Verdict::Holds
        } else {
            Verdict::Inconclusive
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntermediateMode {
    /// Use closed-form `f`, `g` whenever the model provides them.
    PreferAnalytic,
    /// Always estimate `f`, `g` by nested sampling over `μ`.
    MonteCarlo,
}

/// Sample sizes and execution layout for the verifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub n_tau: u64,
    pub n_mu: u64,
    pub exec: Execution,
    pub mode: IntermediateMode,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            n_tau: 10_000,
            n_mu: 1_000,
            exec: Execution::default(),
            mode: IntermediateMode::PreferAnalytic,
        }
    }
}

impl Budget {
    pub fn new(n_tau: u64, n_mu: u64, exec: Execution) -> Self {
        Self {
            n_tau,
            n_mu,
            exec,
            mode: IntermediateMode::PreferAnalytic,
        }
    }

    pub fn with_mode(self, mode: IntermediateMode) -> Self {
        Self { mode, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Alice,
    Bob,
}

/// One signed term `coef · f(a, τ)` (Alice slot) or `coef · g(b, τ)` (Bob slot)
/// inside an absolute value.
struct Term<'a, M: CryptoNonlocalModel> {
    coef: f64,
    slot: Slot,
    a: &'a MeasurementSetting,
    b: &'a MeasurementSetting,
    prepared: M::Prepared,
}

impl<'a, M: CryptoNonlocalModel> Term<'a, M> {
    fn new(model: &M, coef: f64, slot: Slot, a: &'a MeasurementSetting, b: &'a MeasurementSetting) -> Result<Self> {
        Ok(Self {
            coef,
            slot,
            a,
            b,
            prepared: model.prepare(a, b)?,
        })
    }
}

fn analytic_sum<M: CryptoNonlocalModel>(model: &M, terms: &[Term<'_, M>], tau: &M::Tau) -> Result<Option<f64>> {
    let mut acc = 0.0;
    for t in terms {
        let value = match t.slot {
            Slot::Alice => model.intermediate_f(t.a, tau)?,
            Slot::Bob => model.intermediate_g(t.b, tau)?,
        };
        match value {
            Some(v) => acc += t.coef * v,
            None => return Ok(None),
        }
    }
    Ok(Some(acc))
}

/// Estimates `E_τ |Σ_k coef_k · h_k(τ)|`. With nested sampling the inner
/// estimate's variance is carried into the reported standard error.
fn estimate_abs_combination<M: CryptoNonlocalModel>(
    model: &M,
    terms: &[Term<'_, M>],
    budget: &Budget,
    seed: u64,
) -> Result<EstimateResult> {
    if budget.mode == IntermediateMode::MonteCarlo && budget.n_mu < 2 {
        return Err(Error::InvalidArgument("n_mu must be at least 2".into()));
    }
    estimate(budget.n_tau, seed, budget.exec, |rng| {
        let tau = model.sample_tau(rng);
        if budget.mode == IntermediateMode::PreferAnalytic {
            if let Some(v) = analytic_sum(model, terms, &tau)? {
                return Ok((v.abs(), 0.0));
            }
        }
        if budget.n_mu < 2 {
            return Err(Error::InvalidArgument("n_mu must be at least 2".into()));
        }
        let mut inner = Moments::default();
        for _ in 0..budget.n_mu {
            let mu = model.sample_mu(&tau, rng);
            let x: f64 = terms
                .iter()
                .map(|t| {
                    let (va, vb) = model.assign(&t.prepared, &mu, &tau);
                    t.coef * if t.slot == Slot::Alice { va } else { vb }
                })
                .sum();
            inner.push(x);
        }
        Ok((inner.mean().abs(), inner.variance() / budget.n_mu as f64))
    })
}

fn omega_setting(a: &CoefficientVector, basis: &OperatorBasis) -> Result<MeasurementSetting> {
    check_omega(&devectorize(a, basis)?)?;
    MeasurementSetting::new(a, basis)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepReport {
    pub j: usize,
    pub theta: f64,
    /// Estimate of `E_τ |f(a_j, τ) - g(a_{j+1}, τ)|`.
    pub lhs: EstimateResult,
    pub rhs: f64,
    /// Not refuted: `lhs.mean - 3σ ≤ rhs`.
    pub pass: bool,
    pub verdict: Verdict,
}

/// Checks one link of the chain: Alice measures `a_j`, Bob measures `a_{j+1}`.
#[allow(clippy::too_many_arguments)]
pub fn verify_step<M: CryptoNonlocalModel>(
    model: &M,
    state: &MaxEntangledState,
    a_j: &CoefficientVector,
    a_j1: &CoefficientVector,
    n: usize,
    j: usize,
    theta: f64,
    budget: &Budget,
    seed: u64,
) -> Result<StepReport> {
    let alice = omega_setting(&a_j.on_side(Side::Alice), state.basis(Side::Alice))?;
    let bob = omega_setting(&a_j1.on_side(Side::Bob), state.basis(Side::Bob))?;
    let terms = [
        Term::new(model, 1.0, Slot::Alice, &alice, &bob)?,
        Term::new(model, -1.0, Slot::Bob, &alice, &bob)?,
    ];
    let lhs = estimate_abs_combination(model, &terms, budget, seed)?;
    let rhs = per_step_bound(n, a_j.norm_sq(), state.dim())?;
    Ok(StepReport {
        j,
        theta,
        lhs,
        rhs,
        pass: lhs.mean - SIGMA_RULE * lhs.stderr <= rhs,
        verdict: Verdict::classify(&lhs, rhs),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub model: String,
    pub dim: usize,
    pub n: usize,
    pub norm_a_sq: f64,
    pub total_angle: f64,
    pub steps: Vec<StepReport>,
    /// Estimate of `E_τ |f(a, τ)|`.
    pub final_lhs: EstimateResult,
    pub final_rhs: f64,
    /// `final_lhs.mean - 3σ > final_rhs`.
    pub violated: bool,
    pub verdict: Verdict,
}

impl TheoremReport {
    pub fn all_steps_pass(&self) -> bool {
        self.steps.iter().all(|s| s.pass)
    }
}

/// Runs the full chain for the Ω_N observable `a` (Alice side) and compares
/// `E_τ |f(a, τ)|` against the final bound.
pub fn verify_theorem<M: CryptoNonlocalModel>(
    model: &M,
    state: &MaxEntangledState,
    a: &CoefficientVector,
    n: usize,
    budget: &Budget,
    seed: u64,
) -> Result<TheoremReport> {
    let alice_basis = state.basis(Side::Alice);
    let a = a.on_side(Side::Alice);
    let source = omega_setting(&a, alice_basis)?;
    let spec = CurveSpec::new(&a, alice_basis)?;
    let angles = spec.angles(n)?;
    let points = partition(&spec, alice_basis, n)?;

    let steps = map_indexed(budget.exec.threading, n, |j| {
        verify_step(
            model,
            state,
            &points[j],
            &points[j + 1],
            n,
            j,
            angles[j],
            budget,
            derive_seed(seed, j as u64),
        )
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    // f(a, τ) does not depend on Bob's setting; pair it with the partner of a.
    let partner = MeasurementSetting::new(&a.on_side(Side::Bob), state.basis(Side::Bob))?;
    let terms = [Term::new(model, 1.0, Slot::Alice, &source, &partner)?];
    let final_lhs = estimate_abs_combination(model, &terms, budget, derive_seed(seed, n as u64))?;
    let norm_a_sq = a.norm_sq();
    let final_rhs = final_bound(n, norm_a_sq, state.dim())?;
    Ok(TheoremReport {
        model: model.name().to_string(),
        dim: state.dim(),
        n,
        norm_a_sq,
        total_angle: spec.total_angle,
        steps,
        final_lhs,
        final_rhs,
        violated: final_lhs.mean - SIGMA_RULE * final_lhs.stderr > final_rhs,
        verdict: Verdict::classify(&final_lhs, final_rhs),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkewReport {
    /// `E_τ |f(a, τ) - g(a, τ)|`.
    pub residual_fg: EstimateResult,
    /// `E_τ |f(-a, τ) + f(a, τ)|`.
    pub residual_antisym: EstimateResult,
    pub pass: bool,
}

/// Estimates the two identities behind skew symmetry: `f(a) = g(a)` from
/// perfect correlation and `f(a) = -g(-a)` from perfect anticorrelation.
pub fn skew_symmetry_check<M: CryptoNonlocalModel>(
    model: &M,
    state: &MaxEntangledState,
    a: &CoefficientVector,
    budget: &Budget,
    seed: u64,
) -> Result<SkewReport> {
    let avg = a.trace() / state.dim() as f64;
    if avg.abs() > ZERO_AVERAGE_TOL {
        return Err(Error::Precondition(format!(
            "local average is {avg:e}, expected 0"
        )));
    }
    let alice = MeasurementSetting::new(&a.on_side(Side::Alice), state.basis(Side::Alice))?;
    let bob = MeasurementSetting::new(&a.on_side(Side::Bob), state.basis(Side::Bob))?;
    let neg_alice = MeasurementSetting::new(&a.negated().on_side(Side::Alice), state.basis(Side::Alice))?;

    let fg = [
        Term::new(model, 1.0, Slot::Alice, &alice, &bob)?,
        Term::new(model, -1.0, Slot::Bob, &alice, &bob)?,
    ];
    let residual_fg = estimate_abs_combination(model, &fg, budget, derive_seed(seed, 0))?;
    let anti = [
        Term::new(model, 1.0, Slot::Alice, &neg_alice, &bob)?,
        Term::new(model, 1.0, Slot::Alice, &alice, &bob)?,
    ];
    let residual_antisym = estimate_abs_combination(model, &anti, budget, derive_seed(seed, 1))?;
    let pass = residual_fg.within(0.0, SIGMA_RULE, NUMERIC_FLOOR)
        && residual_antisym.within(0.0, SIGMA_RULE, NUMERIC_FLOOR);
    Ok(SkewReport {
        residual_fg,
        residual_antisym,
        pass,
    })
}

/// `a = α₀·(identity coefficients) + Σ_j α_j a_j` with each `a_j` an Ω_N observable.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaReduction {
    pub alpha0: f64,
    pub terms: Vec<(f64, CoefficientVector)>,
}

impl OmegaReduction {
    pub fn reconstruct(&self, side: Side, dim: usize) -> Result<CoefficientVector> {
        let mut acc = CoefficientVector::identity(side, dim).scaled(self.alpha0);
        for (alpha, v) in &self.terms {
            acc = acc.add_scaled(*alpha, v)?;
        }
        Ok(acc)
    }
}

/// Coefficient-space form of the decomposition, so that
/// `f(a, τ) = ⟨A(a)⟩ + Σ_j α_j f(a_j, τ)` can be assembled term by term.
pub fn reduce_to_omega(
    a: &CoefficientVector,
    basis: &OperatorBasis,
    context: Option<&Context>,
) -> Result<OmegaReduction> {
    let op = devectorize(a, basis)?;
    let dec = cartan_decompose(&op, context)?;
    let terms = dec
        .terms
        .iter()
        .map(|t| Ok((t.alpha, vectorize(&t.component, basis)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(OmegaReduction {
        alpha0: dec.alpha0,
        terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hvmodels::{LeggettModel, QmFaithful};
    use crate::random::{random_hermitian, random_omega, seeded_rng};
    use crate::states::{make_state, SchmidtBasis};

    fn budget(n_tau: u64) -> Budget {
        Budget::new(n_tau, 200, Execution::new(2))
    }

    #[test]
    fn bound_examples() {
        assert_eq!(per_step_bound(1, 2.0, 2).unwrap(), 4.0);
        assert!((per_step_bound(2, 2.0, 2).unwrap() - 2.0).abs() < 1e-15);
        let s = (PI / 64.0).sin();
        assert!((per_step_bound(32, 2.0, 2).unwrap() - 4.0 * s * s).abs() < 1e-15);
        assert!((per_step_bound(32, 2.0, 2).unwrap() - 9.631e-3).abs() < 1e-6);
        assert_eq!(chain_bound(1, 2.0, 2).unwrap(), per_step_bound(1, 2.0, 2).unwrap());
        assert!((chain_bound(16, 2.0, 2).unwrap() - 0.61487).abs() < 1e-5);
        assert_eq!(final_bound(1, 2.0, 2).unwrap(), 2.0);
        assert!((final_bound(32, 2.0, 2).unwrap() - 0.15409).abs() < 1e-5);
        let asym = PI * PI / 2048.0;
        assert!((final_bound(1024, 2.0, 2).unwrap() - asym).abs() / asym < 1e-3);
    }

    #[test]
    fn bound_arguments_validated() {
        assert!(per_step_bound(0, 2.0, 2).is_err());
        assert!(per_step_bound(1, 0.0, 2).is_err());
        assert!(final_bound(1, 2.0, 1).is_err());
    }

    #[test]
    fn verdict_classification() {
        let e = |mean, stderr| EstimateResult { mean, stderr, n_samples: 10, seed: 0 };
        assert_eq!(Verdict::classify(&e(0.1, 0.01), 0.5), Verdict::Holds);
        assert_eq!(Verdict::classify(&e(0.9, 0.01), 0.5), Verdict::Violated);
        assert_eq!(Verdict::classify(&e(0.49, 0.01), 0.5), Verdict::Inconclusive);
    }

    #[test]
    fn leggett_step_exceeds_bound() {
        let mut rng = seeded_rng(3);
        let state = make_state(SchmidtBasis::standard(2)).unwrap();
        let a = vectorize(&random_omega(2, &mut rng), state.basis(Side::Alice)).unwrap();
        let spec = CurveSpec::new(&a, state.basis(Side::Alice)).unwrap();
        let points = partition(&spec, state.basis(Side::Alice), 4).unwrap();
        let report = verify_step(&LeggettModel, &state, &points[0], &points[1], 4, 0, 0.0, &budget(20_000), 5).unwrap();
        let expect = (PI / 8.0).cos();
        assert!(report.lhs.within(expect, 3.0, 0.0), "{report:?}");
        assert!((report.rhs - 4.0 * (PI / 8.0).sin().powi(2)).abs() < 1e-12);
        assert!(!report.pass);
        assert_eq!(report.verdict, Verdict::Violated);
    }

    #[test]
    fn qm_step_with_equal_points() {
        let mut rng = seeded_rng(4);
        let state = make_state(SchmidtBasis::random(3, &mut rng)).unwrap();
        let a = vectorize(&random_omega(3, &mut rng), state.basis(Side::Alice)).unwrap();
        let model = QmFaithful::new(state.clone());
        let report = verify_step(&model, &state, &a, &a, 8, 0, 0.0, &budget(100), 1).unwrap();
        assert!(report.lhs.within(0.0, 3.0, NUMERIC_FLOOR));
        assert!(report.rhs > 0.0 && report.pass);

        let mc = budget(50).with_mode(IntermediateMode::MonteCarlo);
        let report = verify_step(&model, &state, &a, &a, 8, 0, 0.0, &mc, 1).unwrap();
        // perfectly correlated outcomes: every inner sample has A - B = 0
        assert_eq!(report.lhs.mean, 0.0);
    }

    #[test]
    fn step_rejects_non_omega() {
        let mut rng = seeded_rng(5);
        let state = make_state(SchmidtBasis::random(3, &mut rng)).unwrap();
        let a = vectorize(&random_hermitian(3, &mut rng), state.basis(Side::Alice)).unwrap();
        let model = QmFaithful::new(state.clone());
        assert!(matches!(
            verify_step(&model, &state, &a, &a, 4, 0, 0.0, &budget(10), 1),
            Err(Error::WrongSpectrum(_))
        ));
    }

    #[test]
    fn qm_theorem_small() {
        let mut rng = seeded_rng(6);
        let state = make_state(SchmidtBasis::random(3, &mut rng)).unwrap();
        let a = vectorize(&random_omega(3, &mut rng), state.basis(Side::Alice)).unwrap();
        let model = QmFaithful::new(state.clone());
        let report = verify_theorem(&model, &state, &a, 8, &budget(200), 9).unwrap();
        assert_eq!(report.steps.len(), 8);
        assert!(report.all_steps_pass());
        assert!(!report.violated);
        assert!(report.final_lhs.within(0.0, 3.0, NUMERIC_FLOOR));
    }

    #[test]
    fn qm_theorem_nested_sampling() {
        let mut rng = seeded_rng(7);
        let state = make_state(SchmidtBasis::random(2, &mut rng)).unwrap();
        let a = vectorize(&random_omega(2, &mut rng), state.basis(Side::Alice)).unwrap();
        let model = QmFaithful::new(state.clone());
        let b = Budget::new(40, 400, Execution::new(2)).with_mode(IntermediateMode::MonteCarlo);
        let report = verify_theorem(&model, &state, &a, 4, &b, 9).unwrap();
        assert!(report.all_steps_pass());
        assert!(!report.violated);
        assert!(report.final_lhs.within(0.0, 3.0, 0.0), "{:?}", report.final_lhs);
    }

    #[test]
    fn leggett_theorem_thresholds() {
        let mut rng = seeded_rng(8);
        let state = make_state(SchmidtBasis::standard(2)).unwrap();
        let a = vectorize(&random_omega(2, &mut rng), state.basis(Side::Alice)).unwrap();
        let r8 = verify_theorem(&LeggettModel, &state, &a, 8, &budget(10_000), 1).unwrap();
        assert!(!r8.violated);
        assert!((r8.final_rhs - 0.60897).abs() < 1e-5);
        let r16 = verify_theorem(&LeggettModel, &state, &a, 16, &budget(10_000), 1).unwrap();
        assert!(r16.violated);
        assert!((r16.final_rhs - 0.30744).abs() < 1e-5);
        assert!(r16.final_lhs.within(0.5, 3.0, 0.0));
    }

    #[test]
    fn skew_checks() {
        let mut rng = seeded_rng(9);
        let state = make_state(SchmidtBasis::standard(2)).unwrap();
        let a = vectorize(&random_omega(2, &mut rng), state.basis(Side::Alice)).unwrap();
        let qm = skew_symmetry_check(&QmFaithful::new(state.clone()), &state, &a, &budget(100), 1).unwrap();
        assert!(qm.pass);
        let lg = skew_symmetry_check(&LeggettModel, &state, &a, &budget(10_000), 1).unwrap();
        assert!(lg.residual_fg.within(1.0, 3.0, 0.0), "{lg:?}");
        assert!(!lg.pass);

        let zero = CoefficientVector::zeros(Side::Alice, 2);
        let z = skew_symmetry_check(&QmFaithful::new(state.clone()), &state, &zero, &budget(10), 1).unwrap();
        assert_eq!((z.residual_fg.mean, z.residual_antisym.mean), (0.0, 0.0));

        let id = CoefficientVector::identity(Side::Alice, 2);
        assert!(matches!(
            skew_symmetry_check(&LeggettModel, &state, &id, &budget(10), 1),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn reduction_examples() {
        let mut rng = seeded_rng(10);
        let state = make_state(SchmidtBasis::random(4, &mut rng)).unwrap();
        let basis = state.basis(Side::Alice);

        let id = CoefficientVector::identity(Side::Alice, 4);
        let r = reduce_to_omega(&id, basis, None).unwrap();
        assert!((r.alpha0 - 1.0).abs() < 1e-12);
        assert!(r.terms.iter().all(|(alpha, _)| alpha.abs() < 1e-12));

        let omega = vectorize(&random_omega(4, &mut rng), basis).unwrap();
        let r = reduce_to_omega(&omega, basis, None).unwrap();
        assert!(r.alpha0.abs() < 1e-12);
        assert!(r.reconstruct(Side::Alice, 4).unwrap().max_abs_diff(&omega) < 1e-10);

        let generic = vectorize(&random_hermitian(4, &mut rng), basis).unwrap();
        let r = reduce_to_omega(&generic, basis, None).unwrap();
        assert!(r.reconstruct(Side::Alice, 4).unwrap().max_abs_diff(&generic) < 1e-10);
        for (_, v) in &r.terms {
            assert!((v.norm_sq() - 2.0).abs() < 1e-10);
        }
    }
}
