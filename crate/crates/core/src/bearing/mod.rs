//! Herringbone-grooved journal bearing (HGJB) model.
//!
//! The film is described by the groove-averaged ("narrow groove") compressible
//! Reynolds equation for an isothermal ideal gas. For a concentric journal the
//! problem is axisymmetric, so the steady pressure reduces to a two-point
//! boundary-value problem along the axis, and a small whirl of the journal
//! reduces to a pair of coupled first-harmonic fields in the circumferential
//! direction. Both are discretised with second-order finite differences.
//!
//! Dimensionless conventions used throughout:
//!
//! * pressure `P = p / p_a`, film `H = h / h_r`, axial coordinate `Z = z / R`
//! * compressibility number `Λ = 6 μ Ω (R / h_r)² / p_a`
//! * stiffness `K_dim = K · p_a R L / h_r`, damping `C_dim = C · p_a R L / (h_r Ω)`

mod film;
mod perturbation;
mod performance;
mod steady;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use perturbation::{dynamic_coefficients, DynamicSolver, DEFAULT_PERTURBATION};
pub use performance::{load_capacity_proxy, power_loss, ALLOWABLE_ECCENTRICITY};
pub use steady::{solve_zeroth_order, PressureProfile, NEWTON_MAX_ITERATIONS, NEWTON_TOLERANCE};

/// Default number of axial grid nodes.
pub const DEFAULT_GRID_N: usize = 101;

/// Grid sizes selectable from the "computation accuracy" control, coarse to fine.
pub const ACCURACY_LEVELS: [usize; 4] = [51, 101, 201, 401];

/// Width of the smooth groove-to-land transition as a fraction of the bearing length.
///
/// Groove ends are blended with a `tanh` profile instead of a step so that the
/// axial coefficient fields are smooth and the difference scheme keeps its
/// second-order accuracy independently of where the land edge falls on the grid.
pub const GROOVE_EDGE_WIDTH: f64 = 0.04;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BearingError {
    #[error("invalid bearing parameter {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("steady pressure solve did not converge after {iterations} iterations (residual {residual:.3e})")]
    Nonconvergence { iterations: usize, residual: f64 },
    #[error("perturbation system is singular at node {node} (pivot ratio {pivot_ratio:.3e})")]
    Singular { node: usize, pivot_ratio: f64 },
}

pub(crate) fn check_positive(field: &'static str, value: f64) -> Result<(), BearingError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(BearingError::InvalidParameter { field, reason: format!("must be positive and finite, got {value}") })
    }
}

/// Dimensional HGJB geometry. Both journals of a rotor share the groove pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HgjbGeometry {
    /// Groove width over groove-plus-ridge width.
    pub alpha: f64,
    /// Groove angle measured from the direction of surface motion, rad.
    /// Angles in (π/2, π) pump gas toward mid-span.
    pub beta: f64,
    /// Grooved length over bearing length.
    pub gamma: f64,
    /// Groove depth, m.
    pub h_g: f64,
    /// Ridge (local) clearance, m.
    pub h_r: f64,
    /// Bearing length, m.
    #[serde(rename = "L")]
    pub length: f64,
    /// Bearing diameter, m.
    #[serde(rename = "D")]
    pub diameter: f64,
}

impl HgjbGeometry {
    pub fn radius(&self) -> f64 {
        0.5 * self.diameter
    }

    pub fn validate(&self) -> Result<(), BearingError> {
        check_positive("h_r", self.h_r)?;
        check_positive("L", self.length)?;
        check_positive("D", self.diameter)?;
        if !(self.h_g.is_finite() && self.h_g >= 0.0) {
            return Err(BearingError::InvalidParameter { field: "h_g", reason: format!("must be >= 0, got {}", self.h_g) });
        }
        self.shape().validate()
    }

    /// The dimensionless description the film solvers work on.
    pub fn shape(&self) -> BearingShape {
        BearingShape {
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            depth_ratio: self.h_g / self.h_r,
            length_ratio: self.length / self.diameter,
        }
    }

    /// Same bearing with clearance and groove depth shifted by manufacturing deviations.
    pub fn with_deviation(&self, delta_h_r: f64, delta_h_g: f64) -> Self {
        Self { h_r: self.h_r + delta_h_r, h_g: self.h_g + delta_h_g, ..*self }
    }
}

/// Dimensionless bearing: groove pattern plus `h_g/h_r` and `L/D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BearingShape {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// `h_g / h_r`.
    pub depth_ratio: f64,
    /// `L / D`.
    pub length_ratio: f64,
}

impl BearingShape {
    pub fn validate(&self) -> Result<(), BearingError> {
        let open_unit = |field, v: f64, hi: f64| {
            if v > 0.0 && v < hi {
                Ok(())
            } else {
                Err(BearingError::InvalidParameter { field, reason: format!("must lie in (0, {hi}), got {v}") })
            }
        };
        open_unit("alpha", self.alpha, 1.0)?;
        open_unit("beta", self.beta, PI)?;
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(BearingError::InvalidParameter {
                field: "gamma",
                reason: format!("must lie in (0, 1], got {}", self.gamma),
            });
        }
        if !(self.depth_ratio.is_finite() && self.depth_ratio >= 0.0) {
            return Err(BearingError::InvalidParameter {
                field: "h_g",
                reason: format!("groove depth ratio must be >= 0, got {}", self.depth_ratio),
            });
        }
        check_positive("L/D", self.length_ratio)
    }

    /// Half length in units of the radius, `L / (2R) = L / D`.
    pub fn half_length(&self) -> f64 {
        self.length_ratio
    }
}

/// Ambient state and speed at the bearings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub fluid: String,
    /// Ambient pressure, Pa.
    pub p_a: f64,
    /// Ambient temperature, K.
    #[serde(rename = "T")]
    pub temperature: f64,
    /// Rotational speed, rpm.
    #[serde(rename = "N")]
    pub speed_rpm: f64,
}

impl OperatingPoint {
    /// Spin speed in rad/s.
    pub fn omega(&self) -> f64 {
        rpm_to_rad_s(self.speed_rpm)
    }

    pub fn with_speed(&self, speed_rpm: f64) -> Self {
        Self { speed_rpm, ..self.clone() }
    }

    pub fn validate(&self) -> Result<(), BearingError> {
        check_positive("p_a", self.p_a)?;
        check_positive("T", self.temperature)?;
        if !(self.speed_rpm.is_finite() && self.speed_rpm >= 0.0) {
            return Err(BearingError::InvalidParameter { field: "N", reason: format!("must be >= 0, got {}", self.speed_rpm) });
        }
        Ok(())
    }
}

pub fn rpm_to_rad_s(rpm: f64) -> f64 {
    2.0 * PI * rpm / 60.0
}

/// `Λ = 6 μ Ω (R / h_r)² / p_a`.
pub fn compressibility_number(mu: f64, omega: f64, radius: f64, p_a: f64, h_r: f64) -> f64 {
    let ratio = radius / h_r;
    6.0 * mu * omega * ratio * ratio / p_a
}

/// Dimensionless 2×2 stiffness and damping of one bearing at `(Λ, ν)`.
///
/// Index 0 is the x direction, 1 the y direction; `k[i][j]` is the force in
/// direction `i` per unit displacement in direction `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BearingCoefficients {
    pub k: [[f64; 2]; 2],
    pub c: [[f64; 2]; 2],
    pub lambda: f64,
    pub nu: f64,
}

/// Coefficients in SI units: N/m and N·s/m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionalCoefficients {
    pub k: [[f64; 2]; 2],
    pub c: [[f64; 2]; 2],
}

impl DimensionalCoefficients {
    pub const ZERO: Self = Self { k: [[0.0; 2]; 2], c: [[0.0; 2]; 2] };

    pub fn isotropic(k: f64, c: f64) -> Self {
        Self { k: [[k, 0.0], [0.0, k]], c: [[c, 0.0], [0.0, c]] }
    }
}

impl BearingCoefficients {
    /// Re-dimensionalise for a bearing of radius `r`, length `l` and clearance `h_r`
    /// spinning at `omega`.
    pub fn to_dimensional(&self, p_a: f64, r: f64, l: f64, h_r: f64, omega: f64) -> DimensionalCoefficients {
        let k_scale = p_a * r * l / h_r;
        let c_scale = k_scale / omega;
        let scale = |m: &[[f64; 2]; 2], s: f64| [[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]];
        DimensionalCoefficients { k: scale(&self.k, k_scale), c: scale(&self.c, c_scale) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compressibility_number_reference() {
        let lambda = compressibility_number(1.8e-5, 20944.0, 5e-3, 1e5, 1e-5);
        // 6 * 1.8e-5 * 20944 * 500^2 / 1e5
        assert!((lambda - 5.654_88).abs() < 1e-9, "{lambda}");
        assert_eq!(compressibility_number(1.8e-5, 0.0, 5e-3, 1e5, 1e-5), 0.0);
        let doubled = compressibility_number(1.8e-5, 20944.0, 5e-3, 1e5, 2e-5);
        assert!((doubled * 4.0 - lambda).abs() < 1e-12);
    }

    #[test]
    fn geometry_validation() {
        let good = HgjbGeometry { alpha: 0.5, beta: 2.44, gamma: 0.8, h_g: 2e-5, h_r: 1e-5, length: 0.01, diameter: 0.01 };
        assert!(good.validate().is_ok());
        assert!(HgjbGeometry { alpha: 1.0, ..good }.validate().is_err());
        assert!(HgjbGeometry { beta: PI, ..good }.validate().is_err());
        assert!(HgjbGeometry { gamma: 0.0, ..good }.validate().is_err());
        assert!(HgjbGeometry { gamma: 1.0, ..good }.validate().is_ok());
        assert!(HgjbGeometry { h_g: -1e-6, ..good }.validate().is_err());
        assert!(HgjbGeometry { h_g: 0.0, ..good }.validate().is_ok());
        assert!(HgjbGeometry { h_r: 0.0, ..good }.validate().is_err());
    }

    #[test]
    fn operating_point_speed() {
        let op = OperatingPoint { fluid: "air".into(), p_a: 1e5, temperature: 293.15, speed_rpm: 60.0 };
        assert!((op.omega() - 2.0 * PI).abs() < 1e-15);
        assert!(op.validate().is_ok());
        assert!(OperatingPoint { speed_rpm: -1.0, ..op.clone() }.validate().is_err());
        assert!(OperatingPoint { p_a: 0.0, ..op }.validate().is_err());
    }
}
