//! Dimensionless inputs shared by the oracle and the surrogate.
//!
//! With time scaled by `Ω`, forces by `p_a R L / h_r` and tilts by the bearing
//! span `ℓ = z2 − z1`, the rigid-rotor stability problem depends only on these
//! eleven groups. Any dimensional design with the same groups has the same
//! whirl ratios and log decrements.

use serde::{Deserialize, Serialize};

use crate::bearing::{compressibility_number, HgjbGeometry};
use crate::design::{oracle_modes, Design, DesignError, OracleSettings};
use crate::dynamics::{assemble, DynamicsError, ModeStabilityResult, RigidRotorModel};
use crate::fluid::FluidRegistry;
use crate::rotor::mass_properties;

pub const FEATURE_COUNT: usize = 11;

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "alpha",
    "beta_over_pi",
    "gamma",
    "depth_ratio",
    "length_ratio",
    "lambda",
    "mass_ratio",
    "inertia_ratio",
    "polar_ratio",
    "z1_bar",
    "z2_bar",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub alpha: f64,
    /// `β / π`.
    pub beta_over_pi: f64,
    pub gamma: f64,
    /// `h_g / h_r`.
    pub depth_ratio: f64,
    /// `L / D`.
    pub length_ratio: f64,
    /// Compressibility number.
    pub lambda: f64,
    /// `m Ω² h_r / (p_a D L)`.
    pub mass_ratio: f64,
    /// `I_t Ω² h_r / (p_a D L ℓ²)`.
    pub inertia_ratio: f64,
    /// `I_p / I_t`.
    pub polar_ratio: f64,
    /// `z1 / ℓ`.
    pub z1_bar: f64,
    /// `z2 / ℓ`.
    pub z2_bar: f64,
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; FEATURE_COUNT] {
        [
            self.alpha,
            self.beta_over_pi,
            self.gamma,
            self.depth_ratio,
            self.length_ratio,
            self.lambda,
            self.mass_ratio,
            self.inertia_ratio,
            self.polar_ratio,
            self.z1_bar,
            self.z2_bar,
        ]
    }

    pub fn from_array(v: [f64; FEATURE_COUNT]) -> Self {
        let [alpha, beta_over_pi, gamma, depth_ratio, length_ratio, lambda, mass_ratio, inertia_ratio, polar_ratio, z1_bar, z2_bar] =
            v;
        Self {
            alpha,
            beta_over_pi,
            gamma,
            depth_ratio,
            length_ratio,
            lambda,
            mass_ratio,
            inertia_ratio,
            polar_ratio,
            z1_bar,
            z2_bar,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// A dimensional stand-in with exactly these groups: 10 mm bearing
    /// diameter, 10 µm clearance, 1 bar, μ = 1.8e-5 Pa·s, 50 mm span.
    pub fn canonical(&self) -> Result<CanonicalDesign, DynamicsError> {
        const P_A: f64 = 1e5;
        const DIAMETER: f64 = 0.01;
        const H_R: f64 = 1e-5;
        const MU: f64 = 1.8e-5;
        const SPAN: f64 = 0.05;
        let radius = 0.5 * DIAMETER;
        let length = self.length_ratio * DIAMETER;
        let omega = self.lambda * P_A * (H_R / radius).powi(2) / (6.0 * MU);
        if !(omega > 0.0) {
            return Err(DynamicsError::ZeroSpeed);
        }
        let force_per_accel = P_A * DIAMETER * length / (omega * omega * H_R);
        let i_transverse = self.inertia_ratio * force_per_accel * SPAN * SPAN;
        let model = RigidRotorModel::new(
            self.mass_ratio * force_per_accel,
            i_transverse,
            self.polar_ratio * i_transverse,
            self.z1_bar * SPAN,
            self.z2_bar * SPAN,
            omega,
        )?;
        let bearing = HgjbGeometry {
            alpha: self.alpha,
            beta: self.beta_over_pi * std::f64::consts::PI,
            gamma: self.gamma,
            h_g: self.depth_ratio * H_R,
            h_r: H_R,
            length,
            diameter: DIAMETER,
        };
        Ok(CanonicalDesign { model, bearing, p_a: P_A, mu: MU })
    }

    /// Oracle labels for this feature vector.
    pub fn oracle_modes(&self, settings: &OracleSettings) -> Result<[ModeStabilityResult; 4], DesignError> {
        let c = self.canonical()?;
        oracle_modes(&c.model, &c.bearing, c.p_a, c.mu, settings)
    }
}

/// Dimensional realisation of a feature vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalDesign {
    pub model: RigidRotorModel,
    pub bearing: HgjbGeometry,
    pub p_a: f64,
    pub mu: f64,
}

/// Feature vector of a design with viscosity `mu`.
pub fn featureize_with(design: &Design, mu: f64) -> Result<FeatureVector, DesignError> {
    design.validate()?;
    let (b, op) = (&design.bearing, &design.operating);
    let omega = op.omega();
    if omega == 0.0 {
        return Err(DynamicsError::ZeroSpeed.into());
    }
    let mp = mass_properties(&design.rotor);
    let model = assemble(&mp, omega)?;
    let span = model.z2 - model.z1;
    let accel_scale = omega * omega * b.h_r / (op.p_a * b.diameter * b.length);
    Ok(FeatureVector {
        alpha: b.alpha,
        beta_over_pi: b.beta / std::f64::consts::PI,
        gamma: b.gamma,
        depth_ratio: b.h_g / b.h_r,
        length_ratio: b.length / b.diameter,
        lambda: compressibility_number(mu, omega, b.radius(), op.p_a, b.h_r),
        mass_ratio: mp.mass * accel_scale,
        inertia_ratio: mp.i_transverse * accel_scale / (span * span),
        polar_ratio: mp.i_polar / mp.i_transverse,
        z1_bar: model.z1 / span,
        z2_bar: model.z2 / span,
    })
}

/// Feature vector of a design, with the viscosity from `fluids`.
pub fn featureize(design: &Design, fluids: &FluidRegistry) -> Result<FeatureVector, DesignError> {
    let op = &design.operating;
    let mu = fluids.properties(&op.fluid, op.temperature, op.p_a)?.mu;
    featureize_with(design, mu)
}

/// How a feature is spread over its range when sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRange {
    pub min: f64,
    pub max: f64,
    pub scale: Scale,
}

impl FeatureRange {
    pub const fn linear(min: f64, max: f64) -> Self {
        Self { min, max, scale: Scale::Linear }
    }

    pub const fn log(min: f64, max: f64) -> Self {
        Self { min, max, scale: Scale::Log }
    }

    /// Map a unit coordinate onto the range.
    pub fn at(&self, u: f64) -> f64 {
        match self.scale {
            Scale::Linear => self.min + u * (self.max - self.min),
            Scale::Log => (self.min.ln() + u * (self.max / self.min).ln()).exp(),
        }
    }

    /// Inverse of [`FeatureRange::at`].
    pub fn unit(&self, v: f64) -> f64 {
        match self.scale {
            Scale::Linear => (v - self.min) / (self.max - self.min),
            Scale::Log => (v / self.min).ln() / (self.max / self.min).ln(),
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }
}

/// Sampling ranges of the independent features; `z2_bar = z1_bar + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanges {
    pub alpha: FeatureRange,
    pub beta_over_pi: FeatureRange,
    pub gamma: FeatureRange,
    pub depth_ratio: FeatureRange,
    pub length_ratio: FeatureRange,
    pub lambda: FeatureRange,
    pub mass_ratio: FeatureRange,
    pub inertia_ratio: FeatureRange,
    pub polar_ratio: FeatureRange,
    pub z1_bar: FeatureRange,
}

impl Default for FeatureRanges {
    fn default() -> Self {
        Self {
            alpha: FeatureRange::linear(0.1, 0.9),
            beta_over_pi: FeatureRange::linear(110.0 / 180.0, 170.0 / 180.0),
            gamma: FeatureRange::linear(0.3, 0.9),
            depth_ratio: FeatureRange::linear(1.0, 4.0),
            length_ratio: FeatureRange::linear(0.5, 2.0),
            lambda: FeatureRange::linear(0.5, 40.0),
            mass_ratio: FeatureRange::linear(1e-3, 1.0),
            inertia_ratio: FeatureRange::linear(1e-3, 1.0),
            polar_ratio: FeatureRange::linear(0.02, 1.5),
            z1_bar: FeatureRange::linear(-0.9, -0.1),
        }
    }
}

/// Number of independently sampled features.
pub const SAMPLED_COUNT: usize = 10;

impl FeatureRanges {
    pub fn ranges(&self) -> [FeatureRange; SAMPLED_COUNT] {
        [
            self.alpha,
            self.beta_over_pi,
            self.gamma,
            self.depth_ratio,
            self.length_ratio,
            self.lambda,
            self.mass_ratio,
            self.inertia_ratio,
            self.polar_ratio,
            self.z1_bar,
        ]
    }

    pub fn validate(&self) -> Result<(), String> {
        for (range, name) in self.ranges().iter().zip(FEATURE_NAMES) {
            if !(range.min.is_finite() && range.max.is_finite() && range.min < range.max) {
                return Err(format!("{name}: need min < max, got [{}, {}]", range.min, range.max));
            }
            if range.scale == Scale::Log && range.min <= 0.0 {
                return Err(format!("{name}: log-scaled range must be positive"));
            }
        }
        Ok(())
    }

    /// Feature vector at unit coordinates `u`.
    pub fn at(&self, u: &[f64; SAMPLED_COUNT]) -> FeatureVector {
        let r = self.ranges();
        let v: [f64; SAMPLED_COUNT] = std::array::from_fn(|i| r[i].at(u[i]));
        let mut full = [0.0; FEATURE_COUNT];
        full[..SAMPLED_COUNT].copy_from_slice(&v);
        full[10] = v[9] + 1.0;
        FeatureVector::from_array(full)
    }

    /// Names of the features of `x` lying outside these ranges.
    pub fn out_of_range(&self, x: &FeatureVector) -> Vec<&'static str> {
        let v = x.to_array();
        let mut names: Vec<&'static str> = self
            .ranges()
            .iter()
            .zip(v)
            .zip(FEATURE_NAMES)
            .filter(|((r, v), _)| !r.contains(*v))
            .map(|(_, n)| n)
            .collect();
        let z2 = FeatureRange::linear(self.z1_bar.min + 1.0, self.z1_bar.max + 1.0);
        if !z2.contains(v[10]) {
            names.push(FEATURE_NAMES[10]);
        }
        names
    }
}

/// Features entering the networks as logarithms: Λ, m̄, Ī_t and Ī_p/Ī_t.
pub const LOG_ENCODED: [usize; 4] = [5, 6, 7, 8];

/// Network input encoding of a feature vector.
pub fn encode(x: &FeatureVector) -> [f64; FEATURE_COUNT] {
    let mut v = x.to_array();
    for i in LOG_ENCODED {
        v[i] = v[i].max(f64::MIN_POSITIVE).ln();
    }
    v
}
