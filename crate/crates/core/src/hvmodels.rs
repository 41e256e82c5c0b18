//! Hidden-variable models and Monte Carlo estimators of their averages.
//!
//! A model assigns definite values to a pair of local measurements given a
//! hidden variable `λ`. In a crypto-nonlocal model `λ = (μ, τ)` and averaging
//! over `μ` alone yields intermediate averages `f(a, τ)`, `g(b, τ)` that
//! depend on the local setting only.
//!
//! Two models ship with the crate:
//! - [`QmFaithful`]: samples the quantum joint outcome distribution by
//!   inverse CDF (`μ = u ∈ [0, 1)`, `τ` a single point). It reproduces all
//!   quantum averages and serves as the positive control.
//! - [`LeggettModel`]: qubits only, `τ = (u, -u)` a pair of antiparallel unit
//!   vectors with `f = u·â` and `g = -u·b̂`. Its local parts do not vanish and
//!   it serves as the negative control.

use std::str::FromStr;

use rand::Rng;

use crate::decomposition::Context;
use crate::error::{Error, Result};
use crate::operators::{
    devectorize, CMatrix, CoefficientVector, HermitianOperator, OperatorBasis, Side,
};
use crate::random::{unit_vector3, SimRng};
use crate::sampling::{estimate, estimate_many, EstimateResult, Execution};
use crate::states::MaxEntangledState;

/// Joint probabilities below this are treated as zero.
pub const PROBABILITY_FLOOR: f64 = 1e-12;
/// Eigenvalues within this distance of an integer are snapped to it.
pub const VALUE_SNAP_TOL: f64 = 1e-8;
/// Allowed deviation of the joint distribution's total mass from one.
pub const NORMALIZATION_TOL: f64 = 1e-10;

fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= VALUE_SNAP_TOL {
        r + 0.0
    } else {
        x
    }
}

/// A local measurement: an observable together with the context fixing its
/// value assignment.
#[derive(Debug, Clone)]
pub struct MeasurementSetting {
    coefficients: CoefficientVector,
    operator: HermitianOperator,
    context: Context,
    values: Vec<f64>,
}

impl MeasurementSetting {
    /// Setting with the operator's deterministic eigenbasis as context.
    pub fn new(coefficients: &CoefficientVector, basis: &OperatorBasis) -> Result<Self> {
        let operator = devectorize(coefficients, basis)?;
        let context = Context::of(&operator);
        Self::assemble(coefficients.clone(), operator, context)
    }

    pub fn with_context(
        coefficients: &CoefficientVector,
        basis: &OperatorBasis,
        context: Context,
    ) -> Result<Self> {
        let operator = devectorize(coefficients, basis)?;
        Self::assemble(coefficients.clone(), operator, context)
    }

    fn assemble(coefficients: CoefficientVector, operator: HermitianOperator, context: Context) -> Result<Self> {
        let raw = context.eigenvalues_of(&operator)?;
        // degenerate eigenvalues share one representative
        let mut order: Vec<usize> = (0..raw.len()).collect();
        order.sort_by(|&i, &j| raw[j].total_cmp(&raw[i]));
        let mut values = raw.clone();
        let mut rep = snap(raw[order[0]]);
        let mut prev = raw[order[0]];
        for &k in &order {
            if (prev - raw[k]).abs() > crate::operators::DEGENERACY_TOL {
                rep = snap(raw[k]);
            }
            prev = raw[k];
            values[k] = rep;
        }
        Ok(Self {
            coefficients,
            operator,
            context,
            values,
        })
    }

    pub fn side(&self) -> Side {
        self.coefficients.side()
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    pub fn coefficients(&self) -> &CoefficientVector {
        &self.coefficients
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.operator
    }

    pub fn context(&self) -> &Context {
        &self.context
    }

    /// Assigned value of each context vector, in context order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Distinct values, descending.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(|x, y| y.total_cmp(x));
        v.dedup();
        v
    }

    /// Context indices ordered by descending value (stable).
    fn descending_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.values.len()).collect();
        order.sort_by(|&i, &j| self.values[j].total_cmp(&self.values[i]));
        order
    }
}

/// A crypto-nonlocal hidden-variable model with `λ = (μ, τ)`.
///
/// `assign` must be deterministic and return values from the spectra of the
/// two settings.
pub trait CryptoNonlocalModel: Sync {
    type Tau: Send + Sync;
    type Mu: Send;
    /// Per-setting-pair data computed once before sampling.
    type Prepared: Send + Sync;

    fn name(&self) -> &'static str;

    fn prepare(&self, a: &MeasurementSetting, b: &MeasurementSetting) -> Result<Self::Prepared>;

    fn sample_tau(&self, rng: &mut SimRng) -> Self::Tau;

    fn sample_mu(&self, tau: &Self::Tau, rng: &mut SimRng) -> Self::Mu;

    fn assign(&self, prepared: &Self::Prepared, mu: &Self::Mu, tau: &Self::Tau) -> (f64, f64);

    /// `f(a, τ)` in closed form, when the model provides one.
    fn intermediate_f(&self, _a: &MeasurementSetting, _tau: &Self::Tau) -> Result<Option<f64>> {
        Ok(None)
    }

    /// `g(b, τ)` in closed form, when the model provides one.
    fn intermediate_g(&self, _b: &MeasurementSetting, _tau: &Self::Tau) -> Result<Option<f64>> {
        Ok(None)
    }
}

/// The plain value-assignment contract: `λ ~ ρ(λ)`, `(A, B) = assign(a, b, λ)`.
pub trait HiddenVariableModel: Sync {
    type Lambda: Send;
    type Prepared: Send + Sync;

    fn prepare(&self, a: &MeasurementSetting, b: &MeasurementSetting) -> Result<Self::Prepared>;
    fn sample_lambda(&self, rng: &mut SimRng) -> Self::Lambda;
    fn assign(&self, prepared: &Self::Prepared, lambda: &Self::Lambda) -> (f64, f64);
}

impl<M: CryptoNonlocalModel> HiddenVariableModel for M {
    type Lambda = (M::Mu, M::Tau);
    type Prepared = M::Prepared;

    fn prepare(&self, a: &MeasurementSetting, b: &MeasurementSetting) -> Result<Self::Prepared> {
        CryptoNonlocalModel::prepare(self, a, b)
    }

    fn sample_lambda(&self, rng: &mut SimRng) -> Self::Lambda {
        let tau = self.sample_tau(rng);
        let mu = self.sample_mu(&tau, rng);
        (mu, tau)
    }

    fn assign(&self, prepared: &Self::Prepared, lambda: &Self::Lambda) -> (f64, f64) {
        CryptoNonlocalModel::assign(self, prepared, &lambda.0, &lambda.1)
    }
}

fn check_pair(a: &MeasurementSetting, b: &MeasurementSetting) -> Result<()> {
    if a.side() != Side::Alice {
        return Err(Error::SideMismatch {
            expected: Side::Alice,
            found: a.side(),
        });
    }
    if b.side() != Side::Bob {
        return Err(Error::SideMismatch {
            expected: Side::Bob,
            found: b.side(),
        });
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// Inverse-CDF table over joint outcomes with nonzero probability.
#[derive(Debug, Clone)]
pub struct JointTable {
    outcomes: Vec<(f64, f64)>,
    cdf: Vec<f64>,
}

impl JointTable {
    pub fn outcomes(&self) -> &[(f64, f64)] {
        &self.outcomes
    }

    /// Probability of each retained outcome, in table order.
    pub fn probabilities(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.cdf
            .iter()
            .map(|&c| {
                let p = c - prev;
                prev = c;
                p
            })
            .collect()
    }

    pub fn sample(&self, u: f64) -> (f64, f64) {
        let k = self.cdf.partition_point(|&c| c <= u);
        self.outcomes[k.min(self.outcomes.len() - 1)]
    }
}

/// Deterministic nonlocal model reproducing the quantum joint statistics.
#[derive(Debug, Clone)]
pub struct QmFaithful {
    state: MaxEntangledState,
    psi: CMatrix,
}

impl QmFaithful {
    pub fn new(state: MaxEntangledState) -> Self {
        let psi = state.amplitude_matrix();
        Self { state, psi }
    }

    pub fn state(&self) -> &MaxEntangledState {
        &self.state
    }

    /// `M_ij = ⟨e_i ⊗ q_j|ψ⟩` for the two contexts.
    fn amplitudes(&self, a: &MeasurementSetting, b: &MeasurementSetting) -> CMatrix {
        let psi = &self.psi;
        a.context().eigenbasis().adjoint() * psi * b.context().eigenbasis().map(|z| z.conj())
    }

    pub fn joint_table(&self, a: &MeasurementSetting, b: &MeasurementSetting) -> Result<JointTable> {
        check_pair(a, b)?;
        if a.dim() != self.state.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.state.dim(),
                found: a.dim(),
            });
        }
        let m = self.amplitudes(a, b);
        let mut outcomes = Vec::new();
        let mut cdf = Vec::new();
        let mut total = 0.0;
        for &i in &a.descending_order() {
            for &j in &b.descending_order() {
                let p = m[(i, j)].norm_sqr();
                total += p;
                if p >= PROBABILITY_FLOOR {
                    outcomes.push((a.values()[i], b.values()[j]));
                    cdf.push(total);
                }
            }
        }
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Consistency(format!(
                "joint probabilities sum to {total}"
            )));
        }
        Ok(JointTable { outcomes, cdf })
    }

    fn marginal(&self, setting: &MeasurementSetting) -> Result<f64> {
        if setting.dim() != self.state.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.state.dim(),
                found: setting.dim(),
            });
        }
        let psi = &self.psi;
        let u = setting.context().eigenbasis();
        // ‖(P_i ⊗ I)ψ‖² = ‖e_i^† Ψ‖², ‖(I ⊗ Q_j)ψ‖² = ‖Ψ conj(q_j)‖²
        let rows = match setting.side() {
            Side::Alice => u.adjoint() * psi,
            Side::Bob => u.adjoint() * psi.transpose(),
        };
        Ok(setting
            .values()
            .iter()
            .enumerate()
            .map(|(k, v)| v * rows.row(k).norm_squared())
            .sum())
    }
}

/// One value assignment of the quantum-faithful model for `u ∈ [0, 1)`.
pub fn qm_faithful_assign(
    state: &MaxEntangledState,
    a: &MeasurementSetting,
    b: &MeasurementSetting,
    u: f64,
) -> Result<(f64, f64)> {
    let table = QmFaithful::new(state.clone()).joint_table(a, b)?;
    Ok(table.sample(u))
}

/// The quantum-faithful model viewed through the trivial split: `τ` is a
/// single point and `μ = u`.
pub fn qm_faithful_crypto_split(state: &MaxEntangledState) -> QmFaithful {
    QmFaithful::new(state.clone())
}

impl CryptoNonlocalModel for QmFaithful {
    type Tau = ();
    type Mu = f64;
    type Prepared = JointTable;

    fn name(&self) -> &'static str {
        "qm-faithful"
    }

    fn prepare(&self, a: &MeasurementSetting, b: &MeasurementSetting) -> Result<JointTable> {
        self.joint_table(a, b)
    }

    fn sample_tau(&self, _rng: &mut SimRng) {}

    fn sample_mu(&self, _tau: &(), rng: &mut SimRng) -> f64 {
        rng.random::<f64>()
    }

    fn assign(&self, prepared: &JointTable, mu: &f64, _tau: &()) -> (f64, f64) {
        prepared.sample(*mu)
    }

    fn intermediate_f(&self, a: &MeasurementSetting, _tau: &()) -> Result<Option<f64>> {
        self.marginal(a).map(Some)
    }

    fn intermediate_g(&self, b: &MeasurementSetting, _tau: &()) -> Result<Option<f64>> {
        self.marginal(b).map(Some)
    }
}

/// Hidden polarization pair: `v = -u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeggettTau {
    pub u: [f64; 3],
    pub v: [f64; 3],
}

impl LeggettTau {
    pub fn new(u: [f64; 3]) -> Self {
        Self {
            u,
            v: [-u[0], -u[1], -u[2]],
        }
    }
}

fn dot3(x: &[f64; 3], y: &[f64; 3]) -> f64 {
    x[0] * y[0] + x[1] * y[1] + x[2] * y[2]
}

fn check_unit(x: &[f64; 3], what: &str) -> Result<()> {
    let norm = dot3(x, x).sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument(format!("{what} has norm {norm}, expected 1")));
    }
    Ok(())
}

/// `f(a, τ) = u·â`.
pub fn leggett_f(a_bloch: &[f64; 3], tau: &LeggettTau) -> Result<f64> {
    check_unit(a_bloch, "Bloch vector")?;
    check_unit(&tau.u, "hidden polarization")?;
    Ok(dot3(&tau.u, a_bloch))
}

/// `g(b, τ) = v·b̂ = -u·b̂`.
pub fn leggett_g(b_bloch: &[f64; 3], tau: &LeggettTau) -> Result<f64> {
    check_unit(b_bloch, "Bloch vector")?;
    check_unit(&tau.v, "hidden polarization")?;
    Ok(dot3(&tau.v, b_bloch))
}

/// Bloch vector of a traceless qubit observable from its coefficients in the
/// canonical basis order `(F_11, F_22, F⁺_12, F⁻_12)`.
pub fn bloch_vector(a: &CoefficientVector) -> Result<[f64; 3]> {
    if a.dim() != 2 {
        return Err(Error::InvalidArgument(format!(
            "Bloch vectors need N = 2, got N = {}",
            a.dim()
        )));
    }
    let c = a.components();
    if (c[0] + c[1]).abs() > 1e-8 {
        return Err(Error::Precondition("observable is not traceless".into()));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Ok([c[2] * s, -c[3] * s, 0.5 * (c[0] - c[1])])
}

/// Leggett-style qubit model. The `μ` level (`μ ~ U[0,1)`, value `+1` iff
/// `μ < (1 + u·â)/2`) exists so the Monte Carlo estimators can run on it; the
/// intermediates are available in closed form.
#[derive(Debug, Clone, Copy, Default)]
pub struct LeggettModel;

impl LeggettModel {
    /// `E_τ |f(a, τ)|` for `u` uniform on the sphere.
    pub const EXPECTED_ABS_F: f64 = 0.5;
}

impl CryptoNonlocalModel for LeggettModel {
    type Tau = LeggettTau;
    type Mu = f64;
    type Prepared = ([f64; 3], [f64; 3]);

    fn name(&self) -> &'static str {
        "leggett"
    }

    fn prepare(&self, a: &MeasurementSetting, b: &MeasurementSetting) -> Result<Self::Prepared> {
        check_pair(a, b)?;
        let (x, y) = (bloch_vector(a.coefficients())?, bloch_vector(b.coefficients())?);
        check_unit(&x, "Bloch vector")?;
        check_unit(&y, "Bloch vector")?;
        Ok((x, y))
    }

    fn sample_tau(&self, rng: &mut SimRng) -> LeggettTau {
        LeggettTau::new(unit_vector3(rng))
    }

    fn sample_mu(&self, _tau: &LeggettTau, rng: &mut SimRng) -> f64 {
        rng.random::<f64>()
    }

    fn assign(&self, prepared: &Self::Prepared, mu: &f64, tau: &LeggettTau) -> (f64, f64) {
        let pa = 0.5 * (1.0 + dot3(&tau.u, &prepared.0));
        let pb = 0.5 * (1.0 + dot3(&tau.v, &prepared.1));
        let value = |p: f64| if *mu < p { 1.0 } else { -1.0 };
        (value(pa), value(pb))
    }

    fn intermediate_f(&self, a: &MeasurementSetting, tau: &LeggettTau) -> Result<Option<f64>> {
        leggett_f(&bloch_vector(a.coefficients())?, tau).map(Some)
    }

    fn intermediate_g(&self, b: &MeasurementSetting, tau: &LeggettTau) -> Result<Option<f64>> {
        leggett_g(&bloch_vector(b.coefficients())?, tau).map(Some)
    }
}

/// Assigns the same value on both sides for every `λ`.
#[derive(Debug, Clone, Copy)]
pub struct ConstantModel {
    pub value: f64,
}

impl CryptoNonlocalModel for ConstantModel {
    type Tau = ();
    type Mu = ();
    type Prepared = ();

    fn name(&self) -> &'static str {
        "constant"
    }

    fn prepare(&self, _a: &MeasurementSetting, _b: &MeasurementSetting) -> Result<()> {
        Ok(())
    }

    fn sample_tau(&self, _rng: &mut SimRng) {}

    fn sample_mu(&self, _tau: &(), _rng: &mut SimRng) {}

    fn assign(&self, _prepared: &(), _mu: &(), _tau: &()) -> (f64, f64) {
        (self.value, self.value)
    }

    fn intermediate_f(&self, _a: &MeasurementSetting, _tau: &()) -> Result<Option<f64>> {
        Ok(Some(self.value))
    }

    fn intermediate_g(&self, _b: &MeasurementSetting, _tau: &()) -> Result<Option<f64>> {
        Ok(Some(self.value))
    }
}

/// Models selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    QmFaithful,
    Leggett,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::QmFaithful => "qm-faithful",
            ModelKind::Leggett => "leggett",
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qm-faithful" => Ok(ModelKind::QmFaithful),
            "leggett" => Ok(ModelKind::Leggett),
            other => Err(Error::InvalidArgument(format!("unknown model `{other}`"))),
        }
    }
}

/// `E_μ[A(a, b, μ, τ)]` at fixed `τ`, by sampling `μ ~ ρ(μ|τ)`.
pub fn estimate_intermediate<M: CryptoNonlocalModel>(
    model: &M,
    a: &MeasurementSetting,
    b: &MeasurementSetting,
    tau: &M::Tau,
    n_samples: u64,
    seed: u64,
    exec: Execution,
) -> Result<EstimateResult> {
    let prepared = CryptoNonlocalModel::prepare(model, a, b)?;
    estimate(n_samples, seed, exec, |rng| {
        let mu = model.sample_mu(tau, rng);
        Ok((CryptoNonlocalModel::assign(model, &prepared, &mu, tau).0, 0.0))
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullAverages {
    pub a: EstimateResult,
    pub b: EstimateResult,
    pub ab: EstimateResult,
}

/// `E_λ[A]`, `E_λ[B]` and `E_λ[AB]` over `λ ~ ρ(λ)`.
pub fn estimate_full_average<M: HiddenVariableModel>(
    model: &M,
    a: &MeasurementSetting,
    b: &MeasurementSetting,
    n_samples: u64,
    seed: u64,
    exec: Execution,
) -> Result<FullAverages> {
    let prepared = model.prepare(a, b)?;
    let [ea, eb, eab] = estimate_many::<3, _>(n_samples, seed, exec, |rng| {
        let lambda = model.sample_lambda(rng);
        let (x, y) = model.assign(&prepared, &lambda);
        Ok([(x, 0.0), (y, 0.0), (x * y, 0.0)])
    })?;
    Ok(FullAverages { a: ea, b: eb, ab: eab })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{transpose_partner, vectorize};
    use crate::random::{random_hermitian, random_omega, seeded_rng};
    use crate::states::{joint_average, make_state, SchmidtBasis};

    fn setup(n: usize, seed: u64) -> (MaxEntangledState, SimRng) {
        let mut rng = seeded_rng(seed);
        let state = make_state(SchmidtBasis::random(n, &mut rng)).unwrap();
        (state, rng)
    }

    fn omega_pair(state: &MaxEntangledState, rng: &mut SimRng) -> (MeasurementSetting, MeasurementSetting) {
        let n = state.dim();
        let a = vectorize(&random_omega(n, rng), state.basis(Side::Alice)).unwrap();
        let b = vectorize(&random_omega(n, rng), state.basis(Side::Bob)).unwrap();
        (
            MeasurementSetting::new(&a, state.basis(Side::Alice)).unwrap(),
            MeasurementSetting::new(&b, state.basis(Side::Bob)).unwrap(),
        )
    }

    #[test]
    fn u_zero_picks_first_positive_outcome() {
        let state = make_state(SchmidtBasis::standard(2)).unwrap();
        let z = vectorize(&HermitianOperator::diagonal(&[1.0, -1.0]).unwrap(), state.basis(Side::Alice)).unwrap();
        let a = MeasurementSetting::new(&z, state.basis(Side::Alice)).unwrap();
        let b = MeasurementSetting::new(&z.on_side(Side::Bob), state.basis(Side::Bob)).unwrap();
        // p(+,+) = p(-,-) = 1/2, mixed outcomes have zero probability
        assert_eq!(qm_faithful_assign(&state, &a, &b, 0.0).unwrap(), (1.0, 1.0));
        assert_eq!(qm_faithful_assign(&state, &a, &b, 0.49).unwrap(), (1.0, 1.0));
        assert_eq!(qm_faithful_assign(&state, &a, &b, 0.51).unwrap(), (-1.0, -1.0));
        let table = QmFaithful::new(state).joint_table(&a, &b).unwrap();
        assert_eq!(table.outcomes(), &[(1.0, 1.0), (-1.0, -1.0)]);
    }

    #[test]
    fn partner_setting_is_perfectly_correlated() {
        let (state, mut rng) = setup(3, 5);
        let op = random_omega(3, &mut rng);
        let a = vectorize(&op, state.basis(Side::Alice)).unwrap();
        let partner = transpose_partner(&op, state.schmidt()).unwrap();
        let b = vectorize(&partner, state.basis(Side::Bob)).unwrap();
        assert!(b.max_abs_diff(&a) < 1e-12);
        let sa = MeasurementSetting::new(&a, state.basis(Side::Alice)).unwrap();
        let sb = MeasurementSetting::new(&b, state.basis(Side::Bob)).unwrap();
        let table = QmFaithful::new(state.clone()).joint_table(&sa, &sb).unwrap();
        assert!(table.outcomes().iter().all(|(x, y)| x == y));
        for k in 0..200 {
            let (x, y) = qm_faithful_assign(&state, &sa, &sb, k as f64 / 200.0).unwrap();
            assert_eq!(x, y);
        }
    }

    #[test]
    fn assigned_values_belong_to_spectra() {
        let (state, mut rng) = setup(4, 8);
        let model = QmFaithful::new(state.clone());
        let (a, b) = omega_pair(&state, &mut rng);
        let table = model.joint_table(&a, &b).unwrap();
        let (sa, sb) = (a.spectrum(), b.spectrum());
        assert_eq!(sa, vec![1.0, 0.0, -1.0]);
        for _ in 0..10_000 {
            let (x, y) = table.sample(rng.random());
            assert!(sa.contains(&x) && sb.contains(&y));
        }
    }

    #[test]
    fn qubit_averages_match_closed_form() {
        let (state, mut rng) = setup(2, 21);
        let model = QmFaithful::new(state.clone());
        let (a, b) = omega_pair(&state, &mut rng);
        let r = estimate_full_average(&model, &a, &b, 100_000, 3, Execution::new(4)).unwrap();
        let expect = joint_average(&state, a.coefficients(), b.coefficients()).unwrap();
        assert!(r.ab.within(expect, 3.0, 0.0), "{r:?} vs {expect}");
        assert!(r.a.within(0.0, 3.0, 0.0));
        assert!(r.b.within(0.0, 3.0, 0.0));
    }

    #[test]
    fn qm_intermediates() {
        let (state, mut rng) = setup(3, 2);
        let model = qm_faithful_crypto_split(&state);
        let (a, _) = omega_pair(&state, &mut rng);
        assert!(model.intermediate_f(&a, &()).unwrap().unwrap().abs() < 1e-12);

        let id = MeasurementSetting::new(
            &CoefficientVector::identity(Side::Alice, 3),
            state.basis(Side::Alice),
        )
        .unwrap();
        assert!((model.intermediate_f(&id, &()).unwrap().unwrap() - 1.0).abs() < 1e-12);

        let op = random_hermitian(3, &mut rng);
        let g = MeasurementSetting::new(&vectorize(&op, state.basis(Side::Alice)).unwrap(), state.basis(Side::Alice)).unwrap();
        let dec = crate::decomposition::cartan_decompose(&op, None).unwrap();
        assert!((model.intermediate_f(&g, &()).unwrap().unwrap() - dec.alpha0).abs() < 1e-12);
    }

    #[test]
    fn leggett_f_examples() {
        let x = [1.0, 0.0, 0.0];
        assert_eq!(leggett_f(&x, &LeggettTau::new(x)).unwrap(), 1.0);
        assert_eq!(leggett_f(&x, &LeggettTau::new([0.0, 1.0, 0.0])).unwrap(), 0.0);
        assert_eq!(leggett_g(&x, &LeggettTau::new(x)).unwrap(), -1.0);
        assert!(leggett_f(&[2.0, 0.0, 0.0], &LeggettTau::new(x)).is_err());

        // E_τ|u·x| = ∫_0^π |cos θ| sin θ dθ / 2 = 1/2
        let r = estimate(40_000, 1, Execution::new(2), |rng| {
            Ok((leggett_f(&x, &LeggettTau::new(unit_vector3(rng)))?.abs(), 0.0))
        })
        .unwrap();
        assert!(r.within(LeggettModel::EXPECTED_ABS_F, 3.0, 0.0), "{r:?}");
    }

    #[test]
    fn intermediate_estimates() {
        let (state, mut rng) = setup(3, 13);
        let model = QmFaithful::new(state.clone());
        let (a, b) = omega_pair(&state, &mut rng);
        let r = estimate_intermediate(&model, &a, &b, &(), 20_000, 4, Execution::new(2)).unwrap();
        assert!(r.within(0.0, 3.0, 0.0), "{r:?}");

        let c = estimate_intermediate(&ConstantModel { value: 1.0 }, &a, &b, &(), 100, 4, Execution::new(2)).unwrap();
        assert_eq!((c.mean, c.stderr), (1.0, 0.0));
        assert!(estimate_intermediate(&model, &a, &b, &(), 1, 4, Execution::new(1)).is_err());

        let qubit = make_state(SchmidtBasis::standard(2)).unwrap();
        let (la, lb) = omega_pair(&qubit, &mut rng);
        let tau = LeggettTau::new(unit_vector3(&mut rng));
        let analytic = LeggettModel.intermediate_f(&la, &tau).unwrap().unwrap();
        let est = estimate_intermediate(&LeggettModel, &la, &lb, &tau, 20_000, 9, Execution::new(3)).unwrap();
        assert!(est.within(analytic, 3.0, 0.0), "{est:?} vs {analytic}");
    }

    #[test]
    fn constant_model_full_average_is_exact() {
        let (state, mut rng) = setup(2, 3);
        let (a, b) = omega_pair(&state, &mut rng);
        let r = estimate_full_average(&ConstantModel { value: 1.0 }, &a, &b, 50, 1, Execution::new(3)).unwrap();
        for e in [r.a, r.b, r.ab] {
            assert_eq!((e.mean, e.stderr), (1.0, 0.0));
        }
    }

    #[test]
    fn model_registry() {
        assert_eq!("qm-faithful".parse::<ModelKind>().unwrap(), ModelKind::QmFaithful);
        assert_eq!("leggett".parse::<ModelKind>().unwrap().name(), "leggett");
        assert!("bohm".parse::<ModelKind>().is_err());
    }

    #[test]
    fn leggett_rejects_qutrits() {
        let (state, mut rng) = setup(3, 1);
        let (a, b) = omega_pair(&state, &mut rng);
        assert!(CryptoNonlocalModel::prepare(&LeggettModel, &a, &b).is_err());
    }
}
