//! Four-degree-of-freedom rigid rotor on two journal bearings.
//!
//! Generalised coordinates are `q = (x, y, θx, θy)` of the centre of gravity,
//! spin is about `+z`. A bearing at axial offset `z` from the CG sees the
//! lateral displacement `u = (x + z θy, y − z θx)` and pushes back with
//! `F = −(K u + C u̇)`. The equations of motion are
//! `M q̈ + (C_b + G) q̇ + K_b q = 0`.

mod intersection;

use nalgebra::{Matrix4, SMatrix, SVector, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bearing::{BearingError, DimensionalCoefficients};
use crate::rotor::MassProperties;

pub use intersection::{
    intersection_sweep, nu_grid, whirl_modes, ModeId, ModeStabilityResult, NuGrid, WhirlMode, LOG_DEC_RESOLUTION,
    MAX_BISECTIONS, ROOT_TOLERANCE,
};

type Matrix8 = SMatrix<f64, 8, 8>;
type CMatrix8 = SMatrix<Complex64, 8, 8>;
type CVector8 = SVector<Complex64, 8>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid rotor model: {0}")]
    InvalidModel(String),
    #[error("journal bearings coincide (z1 = z2 = {0} m)")]
    CoincidentBearings(f64),
    #[error("journal bearings are not assigned")]
    JournalsUnassigned,
    #[error("spin speed is zero; the whirl-ratio sweep is undefined")]
    ZeroSpeed,
    #[error("eigenvalue solver failed: {0}")]
    EigenFailure(String),
    #[error("forward and backward whirl modes cannot be told apart")]
    AmbiguousModes,
    #[error("mode tracking is ambiguous for nu in [{nu_low}, {nu_high}]")]
    TrackingAmbiguity { nu_low: f64, nu_high: f64 },
    #[error("invalid whirl-ratio grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Bearing(#[from] BearingError),
}

/// Rigid rotor reduced to its inertia, bearing positions and spin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidRotorModel {
    /// kg.
    pub mass: f64,
    /// kg·m², about the CG.
    pub i_transverse: f64,
    /// kg·m².
    pub i_polar: f64,
    /// Bearing offsets from the CG, m.
    pub z1: f64,
    pub z2: f64,
    /// Spin speed, rad/s.
    pub omega: f64,
}

/// Build the rigid model from rotor mass properties at spin speed `omega`.
pub fn assemble(mp: &MassProperties, omega: f64) -> Result<RigidRotorModel, DynamicsError> {
    let offsets = mp.bearing_offsets.ok_or(DynamicsError::JournalsUnassigned)?;
    RigidRotorModel::new(mp.mass, mp.i_transverse, mp.i_polar, offsets.z1, offsets.z2, omega)
}

impl RigidRotorModel {
    pub fn new(mass: f64, i_transverse: f64, i_polar: f64, z1: f64, z2: f64, omega: f64) -> Result<Self, DynamicsError> {
        for (name, v) in [("mass", mass), ("I_transverse", i_transverse), ("I_polar", i_polar)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(DynamicsError::InvalidModel(format!("{name} must be positive, got {v}")));
            }
        }
        if !(z1.is_finite() && z2.is_finite() && omega.is_finite()) {
            return Err(DynamicsError::InvalidModel("bearing offsets and speed must be finite".into()));
        }
        if z1 == z2 {
            return Err(DynamicsError::CoincidentBearings(z1));
        }
        if z1 > z2 {
            return Err(DynamicsError::InvalidModel(format!("z1 = {z1} must lie left of z2 = {z2}")));
        }
        Ok(Self { mass, i_transverse, i_polar, z1, z2, omega })
    }

    pub fn with_speed(&self, omega: f64) -> Self {
        Self { omega, ..*self }
    }

    pub fn mass_matrix(&self) -> Matrix4<f64> {
        Matrix4::from_diagonal(&nalgebra::Vector4::new(self.mass, self.mass, self.i_transverse, self.i_transverse))
    }

    /// Skew gyroscopic matrix coupling the two tilts, proportional to `I_p Ω`.
    pub fn gyroscopic_matrix(&self) -> Matrix4<f64> {
        let g = self.i_polar * self.omega;
        let mut m = Matrix4::zeros();
        m[(2, 3)] = g;
        m[(3, 2)] = -g;
        m
    }

    /// Bearing stiffness and damping mapped to generalised coordinates.
    pub fn bearing_matrices(&self, a: &DimensionalCoefficients, b: &DimensionalCoefficients) -> (Matrix4<f64>, Matrix4<f64>) {
        let mut k = Matrix4::zeros();
        let mut c = Matrix4::zeros();
        for (z, coeffs) in [(self.z1, a), (self.z2, b)] {
            let t = lever(z);
            let kb = nalgebra::Matrix2::new(coeffs.k[0][0], coeffs.k[0][1], coeffs.k[1][0], coeffs.k[1][1]);
            let cb = nalgebra::Matrix2::new(coeffs.c[0][0], coeffs.c[0][1], coeffs.c[1][0], coeffs.c[1][1]);
            k += t.transpose() * kb * t;
            c += t.transpose() * cb * t;
        }
        (k, c)
    }

    /// First-order state matrix of `(q, q̇)`, with time scaled by `scale` (rad/s).
    fn state_matrix(&self, a: &DimensionalCoefficients, b: &DimensionalCoefficients) -> (Matrix8, f64) {
        let (k, c) = self.bearing_matrices(a, b);
        let m_inv = Matrix4::from_diagonal(&nalgebra::Vector4::new(
            1.0 / self.mass,
            1.0 / self.mass,
            1.0 / self.i_transverse,
            1.0 / self.i_transverse,
        ));
        let stiff = m_inv * k;
        let damp = m_inv * (c + self.gyroscopic_matrix());
        let scale = [stiff.amax().sqrt(), damp.amax(), self.omega.abs()]
            .into_iter()
            .fold(0.0, f64::max);
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let mut s = Matrix8::zeros();
        s.fixed_view_mut::<4, 4>(0, 4).fill_with_identity();
        s.fixed_view_mut::<4, 4>(4, 0).copy_from(&(-stiff / (scale * scale)));
        s.fixed_view_mut::<4, 4>(4, 4).copy_from(&(-damp / scale));
        (s, scale)
    }

    /// Lateral displacement of both bearings for generalised amplitudes `q`:
    /// `(u_ax, u_ay, u_bx, u_by)`.
    pub fn bearing_displacements(&self, q: &[Complex64; 4]) -> [Complex64; 4] {
        let at = |z: f64| [q[0] + q[3] * z, q[1] - q[2] * z];
        let [ax, ay] = at(self.z1);
        let [bx, by] = at(self.z2);
        [ax, ay, bx, by]
    }
}

fn lever(z: f64) -> SMatrix<f64, 2, 4> {
    SMatrix::<f64, 2, 4>::new(1.0, 0.0, 0.0, z, 0.0, 1.0, -z, 0.0)
}

/// One eigenvalue (rad/s) and its eigenvector in generalised coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    pub value: Complex64,
    pub vector: [Complex64; 4],
}

/// All eight eigenpairs of the first-order system for the given bearing
/// coefficients, in ascending order of imaginary part.
pub fn eigen_at(
    model: &RigidRotorModel,
    a: &DimensionalCoefficients,
    b: &DimensionalCoefficients,
) -> Result<Vec<EigenPair>, DynamicsError> {
    let (s, scale) = checked_state_matrix(model, a, b)?;
    let mut values = eigenvalues(&s)?;
    values.sort_by(|x, y| x.im.total_cmp(&y.im).then(x.re.total_cmp(&y.re)));
    values
        .into_iter()
        .map(|v| Ok(EigenPair { value: v * scale, vector: eigenvector(&s, v)? }))
        .collect()
}

fn checked_state_matrix(
    model: &RigidRotorModel,
    a: &DimensionalCoefficients,
    b: &DimensionalCoefficients,
) -> Result<(Matrix8, f64), DynamicsError> {
    let finite = |c: &DimensionalCoefficients| c.k.iter().chain(c.c.iter()).flatten().all(|v| v.is_finite());
    if !(finite(a) && finite(b)) {
        return Err(DynamicsError::EigenFailure("bearing coefficients are not finite".into()));
    }
    Ok(model.state_matrix(a, b))
}

fn eigenvalues(s: &Matrix8) -> Result<Vec<Complex64>, DynamicsError> {
    let schur = Schur::try_new(*s, f64::EPSILON, 10_000)
        .ok_or_else(|| DynamicsError::EigenFailure("Schur iteration did not converge".into()))?;
    let values: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(DynamicsError::EigenFailure("non-finite eigenvalue".into()));
    }
    Ok(values)
}

/// Inverse iteration on the complexified state matrix; returns the
/// displacement part of the eigenvector.
fn eigenvector(s: &Matrix8, value: Complex64) -> Result<[Complex64; 4], DynamicsError> {
    let a: CMatrix8 = s.map(|v| Complex64::new(v, 0.0));
    let mut shift = 1e-10 * value.norm().max(1.0);
    for _ in 0..6 {
        let lu = (a - CMatrix8::identity() * (value + Complex64::new(shift, shift))).lu();
        let mut x = CVector8::from_fn(|i, _| Complex64::new(1.0, 0.1 * i as f64));
        let mut ok = true;
        for _ in 0..3 {
            match lu.solve(&x) {
                Some(y) if y.iter().all(|v| v.re.is_finite() && v.im.is_finite()) && y.norm() > 0.0 => {
                    x = y.unscale(y.norm());
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            let q = [x[0], x[1], x[2], x[3]];
            // Rigid free-body modes with zero frequency have no displacement
            // part distinct from velocity; fall back to the velocity half.
            if q.iter().map(|v| v.norm_sqr()).sum::<f64>() > 1e-24 {
                return Ok(q);
            }
            return Ok([x[4], x[5], x[6], x[7]]);
        }
        shift *= 100.0;
    }
    Err(DynamicsError::EigenFailure(format!("inverse iteration failed at eigenvalue {value}")))
}

/// Logarithmic decrement `δ = −2π Re λ / |Im λ|`; `None` for a
/// non-oscillatory eigenvalue.
pub fn log_decrement(lambda: Complex64) -> Option<f64> {
    (lambda.im != 0.0).then(|| -2.0 * std::f64::consts::PI * lambda.re / lambda.im.abs())
}

/// Modal assurance criterion of two complex vectors, in [0, 1].
pub fn mac(a: &[Complex64], b: &[Complex64]) -> f64 {
    let dot: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let na: f64 = a.iter().map(|v| v.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|v| v.norm_sqr()).sum();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot.norm_sqr() / (na * nb)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_decrement_reference() {
        assert!((log_decrement(Complex64::new(-1.0, 10.0)).unwrap() - 0.628_318_530_717_958_6).abs() < 1e-12);
        assert!((log_decrement(Complex64::new(1.0, 10.0)).unwrap() + 0.628_318_530_717_958_6).abs() < 1e-12);
        assert_eq!(log_decrement(Complex64::new(0.0, 3.0)), Some(0.0));
        assert_eq!(log_decrement(Complex64::new(-2.0, 0.0)), None);
    }

    #[test]
    fn coincident_bearings_rejected() {
        assert_eq!(RigidRotorModel::new(1.0, 1.0, 1.0, 0.1, 0.1, 1.0), Err(DynamicsError::CoincidentBearings(0.1)));
        assert!(RigidRotorModel::new(1.0, 1.0, 1.0, 0.1, -0.1, 1.0).is_err());
        assert!(RigidRotorModel::new(0.0, 1.0, 1.0, -0.1, 0.1, 1.0).is_err());
    }

    #[test]
    fn symmetric_rotor_decouples() {
        let model = RigidRotorModel::new(0.3, 2e-4, 1e-5, -0.04, 0.04, 1000.0).unwrap();
        let c = DimensionalCoefficients { k: [[1e5, 3e4], [-3e4, 1e5]], c: [[20.0, 5.0], [-5.0, 20.0]] };
        let (k, d) = model.bearing_matrices(&c, &c);
        for i in 0..2 {
            for j in 2..4 {
                assert_eq!(k[(i, j)], 0.0);
                assert_eq!(k[(j, i)], 0.0);
                assert_eq!(d[(i, j)], 0.0);
                assert_eq!(d[(j, i)], 0.0);
            }
        }
        assert_eq!(model.with_speed(0.0).gyroscopic_matrix(), Matrix4::zeros());
        let g = model.gyroscopic_matrix();
        assert_eq!(g[(2, 3)], 1e-2);
        assert_eq!(g[(3, 2)], -1e-2);
    }

    #[test]
    fn free_body_has_zero_eigenvalues() {
        let model = RigidRotorModel::new(0.3, 2e-4, 1e-5, -0.04, 0.05, 0.0).unwrap();
        let pairs = eigen_at(&model, &DimensionalCoefficients::ZERO, &DimensionalCoefficients::ZERO).unwrap();
        assert_eq!(pairs.len(), 8);
        assert!(pairs.iter().all(|p| p.value.norm() == 0.0));
    }

    #[test]
    fn mac_bounds() {
        let a = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)];
        let b = [Complex64::new(0.0, 2.0), Complex64::new(-2.0, 0.0)];
        assert!((mac(&a, &b) - 1.0).abs() < 1e-15);
        let c = [Complex64::new(0.0, 1.0), Complex64::new(1.0, 0.0)];
        assert!(mac(&a, &c) < 1e-15);
    }
}
