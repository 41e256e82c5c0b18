//! The curve `a(θ)` from `a` to `-a` generated by rotating an Ω_N observable
//! inside the two-dimensional support of its `±1` eigenvectors.
//!
//! For an Ω_N operator the state space splits as `K ⊕ L`, with `K` the kernel
//! and `L` spanned by the `±1` eigenvectors. On `L` the operator is `σ_z` of an
//! embedded Pauli frame; `V_θ = exp(i θ/2 c·σ)` on `L` (identity on `K`) with
//! `c ⊥ ẑ` rotates it to `cos θ σ_z + sin θ (ĉ × ẑ)·σ`.

use std::f64::consts::PI;

use crate::decomposition::check_omega;
use crate::error::{Error, Result};
use crate::operators::{
    devectorize, eigensystem, fix_phase, vectorize, CMatrix, CVector, CoefficientVector,
    HermitianOperator, OperatorBasis, C64,
};

/// Tolerance on `‖c‖ = 1` and `c·ã = 0`.
pub const AXIS_TOL: f64 = 1e-12;
/// Tolerance on adjacent partition spacing.
pub const SPACING_TOL: f64 = 1e-10;

fn outer(x: &CVector, y: &CVector) -> CMatrix {
    x * y.adjoint()
}

#[derive(Debug, Clone)]
pub struct PauliFrame {
    pub e_plus: CVector,
    pub e_minus: CVector,
    /// Orthonormal columns spanning the kernel `K` (`N - 2` of them).
    pub kernel_basis: CMatrix,
    /// `σ_x, σ_y, σ_z` acting on `L`, zero on `K`.
    pub sigma: [HermitianOperator; 3],
    pub a_tilde: [f64; 3],
}

impl PauliFrame {
    pub fn dim(&self) -> usize {
        self.e_plus.len()
    }

    /// Projector onto `L`.
    pub fn projector_l(&self) -> CMatrix {
        outer(&self.e_plus, &self.e_plus) + outer(&self.e_minus, &self.e_minus)
    }
}

pub fn pauli_frame(op: &HermitianOperator) -> Result<PauliFrame> {
    check_omega(op)?;
    let n = op.dim();
    let eig = eigensystem(op);
    let mut e_plus = eig.vector(0);
    let mut e_minus = eig.vector(n - 1);
    fix_phase(&mut e_plus);
    fix_phase(&mut e_minus);
    let kernel_basis = eig.eigenvectors.columns(1, n - 2).into_owned();

    let i = C64::new(0.0, 1.0);
    let pm = outer(&e_plus, &e_minus);
    let mp = outer(&e_minus, &e_plus);
    let sx = &pm + &mp;
    let sy = &pm * (-i) + &mp * i;
    let sz = outer(&e_plus, &e_plus) - outer(&e_minus, &e_minus);
    Ok(PauliFrame {
        e_plus,
        e_minus,
        kernel_basis,
        sigma: [
            HermitianOperator::from_raw(sx),
            HermitianOperator::from_raw(sy),
            HermitianOperator::from_raw(sz),
        ],
        a_tilde: [0.0, 0.0, 1.0],
    })
}

fn dot3(x: &[f64; 3], y: &[f64; 3]) -> f64 {
    x[0] * y[0] + x[1] * y[1] + x[2] * y[2]
}

fn check_axis(frame: &PauliFrame, axis: &[f64; 3]) -> Result<()> {
    let norm = dot3(axis, axis).sqrt();
    if (norm - 1.0).abs() > AXIS_TOL {
        return Err(Error::InvalidArgument(format!("axis norm {norm} is not 1")));
    }
    let overlap = dot3(axis, &frame.a_tilde);
    if overlap.abs() > AXIS_TOL {
        return Err(Error::InvalidArgument(format!(
            "axis is not orthogonal to the operator direction (overlap {overlap:e})"
        )));
    }
    Ok(())
}

/// `V_θ`: `cos(θ/2) I_L + i sin(θ/2) c·σ` on `L`, identity on `K`.
pub fn rotation_unitary(frame: &PauliFrame, axis: [f64; 3], theta: f64) -> Result<CMatrix> {
    check_axis(frame, &axis)?;
    let n = frame.dim();
    let p_l = frame.projector_l();
    let mut c_sigma = CMatrix::zeros(n, n);
    for (c, s) in axis.iter().zip(&frame.sigma) {
        c_sigma += s.entries() * C64::new(*c, 0.0);
    }
    let half = 0.5 * theta;
    let id = CMatrix::identity(n, n);
    Ok(&id - &p_l + p_l * C64::new(half.cos(), 0.0) + c_sigma * C64::new(0.0, half.sin()))
}

/// Parameters of the curve through a given Ω_N observable.
#[derive(Debug, Clone)]
pub struct CurveSpec {
    pub source: CoefficientVector,
    pub frame: PauliFrame,
    pub axis: [f64; 3],
    pub total_angle: f64,
}

impl CurveSpec {
    /// Default curve: axis `x̂` of the frame, total angle `π`.
    pub fn new(source: &CoefficientVector, basis: &OperatorBasis) -> Result<Self> {
        let op = devectorize(source, basis)?;
        Ok(Self {
            source: source.clone(),
            frame: pauli_frame(&op)?,
            axis: [1.0, 0.0, 0.0],
            total_angle: PI,
        })
    }

    pub fn with_axis(mut self, axis: [f64; 3]) -> Result<Self> {
        check_axis(&self.frame, &axis)?;
        self.axis = axis;
        Ok(self)
    }

    pub fn with_total_angle(mut self, total_angle: f64) -> Result<Self> {
        if !(total_angle > 0.0 && total_angle.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "total angle must be positive, got {total_angle}"
            )));
        }
        self.total_angle = total_angle;
        Ok(self)
    }

    /// `θ_j = j Θ / n` for `j = 0..=n`.
    pub fn angles(&self, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::InvalidArgument("partition count must be at least 1".into()));
        }
        Ok((0..=n)
            .map(|j| self.total_angle * j as f64 / n as f64)
            .collect())
    }
}

/// `a(θ)` with `Â(a(θ)) = V_θ Â(a) V_θ^†`.
pub fn curve_point(spec: &CurveSpec, basis: &OperatorBasis, theta: f64) -> Result<CoefficientVector> {
    if !(-1e-12..=spec.total_angle * (1.0 + 1e-12)).contains(&theta) {
        return Err(Error::InvalidArgument(format!(
            "theta {theta} outside [0, {}]",
            spec.total_angle
        )));
    }
    let op = devectorize(&spec.source, basis)?;
    let v = rotation_unitary(&spec.frame, spec.axis, theta)?;
    vectorize(&op.conjugate_by(&v), basis)
}

/// The `n + 1` points `a(θ_j)`.
pub fn partition(spec: &CurveSpec, basis: &OperatorBasis, n: usize) -> Result<Vec<CoefficientVector>> {
    spec.angles(n)?
        .into_iter()
        .map(|theta| curve_point(spec, basis, theta))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpacingReport {
    pub uniform_ok: bool,
    pub max_deviation: f64,
}

/// Checks `a_{j+1}·a_j = ‖a_0‖² cos(Θ/n)` for all adjacent points.
pub fn verify_partition_spacing(points: &[CoefficientVector], total_angle: f64) -> Result<SpacingReport> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument("at least two points are required".into()));
    }
    let n = points.len() - 1;
    let norm_sq = points[0].norm_sq();
    let target = norm_sq * (total_angle / n as f64).cos();
    let mut max_deviation = 0.0f64;
    for pair in points.windows(2) {
        max_deviation = max_deviation.max((pair[1].dot(&pair[0])? - target).abs());
    }
    Ok(SpacingReport {
        uniform_ok: max_deviation <= SPACING_TOL * norm_sq.max(1.0),
        max_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::omega_deviation;
    use crate::operators::{build_basis, max_abs, Side};
    use crate::random::{random_omega, seeded_rng};
    use crate::states::SchmidtBasis;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn qubit_frame_is_standard() {
        let frame = pauli_frame(&HermitianOperator::diagonal(&[1.0, -1.0]).unwrap()).unwrap();
        assert!((&frame.e_plus - CVector::from_vec(vec![c(1.0), c(0.0)])).norm() < 1e-15);
        assert!((&frame.e_minus - CVector::from_vec(vec![c(0.0), c(1.0)])).norm() < 1e-15);
        assert_eq!(frame.kernel_basis.ncols(), 0);
    }

    #[test]
    fn four_level_kernel_is_middle() {
        let frame = pauli_frame(&HermitianOperator::diagonal(&[1.0, 0.0, 0.0, -1.0]).unwrap()).unwrap();
        let k = &frame.kernel_basis;
        assert_eq!(k.ncols(), 2);
        let proj = k * k.adjoint();
        let expect = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.0), c(1.0), c(1.0), c(0.0)]));
        assert!(max_abs(&(proj - expect)) < 1e-14);
    }

    #[test]
    fn frame_reproduces_operator_and_pauli_algebra() {
        let mut rng = seeded_rng(5);
        let op = random_omega(3, &mut rng);
        let frame = pauli_frame(&op).unwrap();
        assert!(frame.sigma[2].max_abs_diff(&op) < 1e-10);
        let [sx, sy, sz] = &frame.sigma;
        let p_l = frame.projector_l();
        let i = C64::new(0.0, 1.0);
        // σ_x σ_y = i σ_z on L, σ_k² = P_L
        assert!(max_abs(&(sx.entries() * sy.entries() - sz.entries() * i)) < 1e-12);
        for s in &frame.sigma {
            assert!(max_abs(&(s.entries() * s.entries() - &p_l)) < 1e-12);
        }
        let overlap = frame.kernel_basis.adjoint() * &p_l;
        assert!(max_abs(&overlap) < 1e-12);
    }

    #[test]
    fn frame_rejects_wrong_spectrum() {
        let op = HermitianOperator::diagonal(&[2.0, 0.0, -1.0]).unwrap();
        assert!(matches!(pauli_frame(&op), Err(Error::WrongSpectrum(_))));
    }

    #[test]
    fn rotation_unitary_special_angles() {
        let mut rng = seeded_rng(9);
        let op = random_omega(4, &mut rng);
        let frame = pauli_frame(&op).unwrap();
        let v0 = rotation_unitary(&frame, [1.0, 0.0, 0.0], 0.0).unwrap();
        assert!(max_abs(&(v0 - CMatrix::identity(4, 4))) < 1e-15);

        let vpi = rotation_unitary(&frame, [0.0, 1.0, 0.0], PI).unwrap();
        assert!(op.conjugate_by(&vpi).max_abs_diff(&(-&op)) < 1e-12);
        let k = &frame.kernel_basis;
        assert!(max_abs(&(&vpi * k - k)) < 1e-12);

        assert!(rotation_unitary(&frame, [0.0, 0.0, 1.0], 1.0).is_err());
        assert!(rotation_unitary(&frame, [2.0, 0.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn full_turn_is_minus_identity_on_l() {
        let frame = pauli_frame(&HermitianOperator::diagonal(&[1.0, -1.0]).unwrap()).unwrap();
        let v = rotation_unitary(&frame, [1.0, 0.0, 0.0], 2.0 * PI).unwrap();
        assert!(max_abs(&(&v + CMatrix::identity(2, 2))) < 1e-15);
        let z = HermitianOperator::diagonal(&[1.0, -1.0]).unwrap();
        assert!(z.conjugate_by(&v).max_abs_diff(&z) < 1e-15);
    }

    #[test]
    fn quarter_turn_about_x_gives_sigma_y() {
        let schmidt = SchmidtBasis::standard(2);
        let basis = build_basis(&schmidt, Side::Alice).unwrap();
        let z = HermitianOperator::diagonal(&[1.0, -1.0]).unwrap();
        let a = vectorize(&z, &basis).unwrap();
        let spec = CurveSpec::new(&a, &basis).unwrap();
        let point = curve_point(&spec, &basis, PI / 2.0).unwrap();
        // σ_y = -√2 F⁻_12 in the canonical basis
        let expect = [0.0, 0.0, 0.0, -2f64.sqrt()];
        for (x, y) in point.components().iter().zip(expect) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(curve_point(&spec, &basis, 4.0).is_err());
        assert!(curve_point(&spec, &basis, -0.1).is_err());
    }

    #[test]
    fn partition_small_cases() {
        let mut rng = seeded_rng(10);
        let schmidt = SchmidtBasis::random(3, &mut rng);
        let basis = build_basis(&schmidt, Side::Alice).unwrap();
        let a = vectorize(&random_omega(3, &mut rng), &basis).unwrap();
        let spec = CurveSpec::new(&a, &basis).unwrap();

        let one = partition(&spec, &basis, 1).unwrap();
        assert_eq!(one.len(), 2);
        assert!(one[1].max_abs_diff(&a.negated()) < 1e-12);
        assert!((one[0].dot(&one[1]).unwrap() + a.norm_sq()).abs() < 1e-10);

        let two = partition(&spec, &basis, 2).unwrap();
        assert!(two[1].dot(&two[0]).unwrap().abs() < 1e-10);

        let eight = partition(&spec, &basis, 8).unwrap();
        let target = a.norm_sq() * (PI / 8.0).cos();
        for w in eight.windows(2) {
            assert!((w[1].dot(&w[0]).unwrap() - target).abs() < 1e-10);
        }
        for p in &eight {
            assert!(omega_deviation(&devectorize(p, &basis).unwrap()) < 1e-8);
        }
        assert!(partition(&spec, &basis, 0).is_err());
    }

    #[test]
    fn spacing_report() {
        let mut rng = seeded_rng(14);
        let basis = build_basis(&SchmidtBasis::random(2, &mut rng), Side::Alice).unwrap();
        let a = vectorize(&random_omega(2, &mut rng), &basis).unwrap();
        let spec = CurveSpec::new(&a, &basis).unwrap();
        let mut points = partition(&spec, &basis, 6).unwrap();
        let report = verify_partition_spacing(&points, PI).unwrap();
        assert!(report.uniform_ok && report.max_deviation < 1e-10);

        let mut comps = points[3].components().to_vec();
        comps[0] += 0.05;
        points[3] = CoefficientVector::new(Side::Alice, 2, comps).unwrap();
        let report = verify_partition_spacing(&points, PI).unwrap();
        assert!(!report.uniform_ok);
        assert!(report.max_deviation > 0.01);
        assert!(verify_partition_spacing(&points[..1], PI).is_err());
    }

    #[test]
    fn non_planar_three_quarter_path() {
        // σ_z → σ_x → σ_y → -σ_z: three right-angle steps, Θ = 3π/2
        let r2 = 2f64.sqrt();
        let mk = |v: [f64; 4]| CoefficientVector::new(Side::Alice, 2, v.to_vec()).unwrap();
        let points = [
            mk([1.0, -1.0, 0.0, 0.0]),
            mk([0.0, 0.0, r2, 0.0]),
            mk([0.0, 0.0, 0.0, -r2]),
            mk([-1.0, 1.0, 0.0, 0.0]),
        ];
        let report = verify_partition_spacing(&points, 1.5 * PI).unwrap();
        assert!(report.uniform_ok, "{report:?}");
        assert!(!verify_partition_spacing(&points, PI).unwrap().uniform_ok);
    }
}
