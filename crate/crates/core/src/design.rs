//! A complete rotor-bearing design and its direct (oracle) evaluation.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bearing::{
    compressibility_number, load_capacity_proxy, power_loss, BearingError, DynamicSolver, HgjbGeometry, OperatingPoint,
    DEFAULT_GRID_N, DEFAULT_PERTURBATION,
};
use crate::dynamics::{assemble, intersection_sweep, DynamicsError, ModeStabilityResult, NuGrid, RigidRotorModel};
use crate::fluid::{FluidError, FluidRegistry};
use crate::rotor::{mass_properties, parse_rotor, serialize_rotor, MassProperties, Rotor, RotorError};

/// Rotor document of the bundled reference design.
pub const REFERENCE_ROTOR: &str = include_str!("../../../data/reference_rotor.json");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DesignError {
    #[error(transparent)]
    Rotor(#[from] RotorError),
    #[error(transparent)]
    Bearing(#[from] BearingError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Fluid(#[from] FluidError),
}

impl DesignError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::Rotor(e) => e.code(),
            Self::Bearing(BearingError::InvalidParameter { .. } | BearingError::InvalidGrid(_)) => "bearing.invalid",
            Self::Bearing(_) => "bearing.solver",
            Self::Dynamics(DynamicsError::ZeroSpeed) => "dynamics.zero_speed",
            Self::Dynamics(DynamicsError::JournalsUnassigned) => "rotor.journals_unassigned",
            Self::Dynamics(DynamicsError::InvalidModel(_) | DynamicsError::CoincidentBearings(_)) => "dynamics.invalid_model",
            Self::Dynamics(DynamicsError::InvalidGrid(_)) => "dynamics.invalid_grid",
            Self::Dynamics(DynamicsError::Bearing(_)) => "bearing.solver",
            Self::Dynamics(_) => "dynamics.solver",
            Self::Fluid(FluidError::UnknownFluid(_)) => "fluid.unknown",
            Self::Fluid(FluidError::TemperatureOutOfRange { .. }) => "fluid.temperature_out_of_range",
            Self::Fluid(_) => "fluid.invalid",
        }
    }
}

/// Rotor, journal-bearing geometry (shared by both journals) and operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub rotor: Rotor,
    pub bearing: HgjbGeometry,
    pub operating: OperatingPoint,
}

impl Design {
    pub fn validate(&self) -> Result<(), DesignError> {
        self.rotor.journals()?;
        self.bearing.validate()?;
        self.operating.validate()?;
        Ok(())
    }

    pub fn with_speed(&self, speed_rpm: f64) -> Self {
        Self { operating: self.operating.with_speed(speed_rpm), ..self.clone() }
    }

    pub fn with_deviation(&self, delta_h_r: f64, delta_h_g: f64) -> Self {
        Self { bearing: self.bearing.with_deviation(delta_h_r, delta_h_g), ..self.clone() }
    }

    /// SHA-256 (hex) of the rotor document, bearing geometry and operating point.
    pub fn digest(&self) -> String {
        let doc = serde_json::json!({
            "rotor": serialize_rotor(&self.rotor),
            "bearing": self.bearing,
            "operating": self.operating,
        });
        hex::encode(Sha256::digest(doc.to_string()))
    }
}

/// Reference design: the bundled hollow rotor on 10 mm × 10 mm journals at 50 krpm in air.
pub fn reference_design() -> Design {
    Design {
        rotor: parse_rotor(REFERENCE_ROTOR).expect("bundled reference rotor is valid"),
        bearing: HgjbGeometry { alpha: 0.5, beta: 2.44, gamma: 0.8, h_g: 2e-5, h_r: 1e-5, length: 0.01, diameter: 0.01 },
        operating: OperatingPoint { fluid: "air".into(), p_a: 1e5, temperature: 293.15, speed_rpm: 50_000.0 },
    }
}

/// Numerical settings of the direct evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSettings {
    pub grid_n: usize,
    pub eps: f64,
    pub nu: NuGrid,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self { grid_n: DEFAULT_GRID_N, eps: DEFAULT_PERTURBATION, nu: NuGrid::default() }
    }
}

/// Direct evaluation of the four whirl modes of `model` on two identical bearings.
pub fn oracle_modes(
    model: &RigidRotorModel,
    bearing: &HgjbGeometry,
    p_a: f64,
    mu: f64,
    settings: &OracleSettings,
) -> Result<[ModeStabilityResult; 4], DesignError> {
    let omega = model.omega;
    if omega == 0.0 {
        return Err(DynamicsError::ZeroSpeed.into());
    }
    let (r, l, h_r) = (bearing.radius(), bearing.length, bearing.h_r);
    let lambda = compressibility_number(mu, omega, r, p_a, h_r);
    let solver = DynamicSolver::new(&bearing.shape(), lambda, settings.eps, settings.grid_n)?;
    let grid = settings.nu.points()?;
    let modes = intersection_sweep(
        model,
        |nu| {
            let c = solver.coefficients(nu)?.to_dimensional(p_a, r, l, h_r, omega);
            Ok([c, c])
        },
        &grid,
    )?;
    Ok(modes)
}

/// Per-journal performance at the nominal speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Performance {
    /// Compressibility number.
    pub lambda: f64,
    /// Viscous loss of both journals, W.
    pub power_loss_w: f64,
    /// Load-capacity proxy of one journal, N.
    pub load_capacity_n: f64,
}

/// Power loss and load capacity of a design; the latter always comes from the
/// bearing solver at synchronous excitation.
pub fn performance(design: &Design, mu: f64, settings: &OracleSettings) -> Result<Performance, DesignError> {
    let (b, op) = (&design.bearing, &design.operating);
    let omega = op.omega();
    let lambda = compressibility_number(mu, omega, b.radius(), op.p_a, b.h_r);
    let coeffs = DynamicSolver::new(&b.shape(), lambda, settings.eps, settings.grid_n)?.coefficients(1.0)?;
    Ok(Performance {
        lambda,
        power_loss_w: 2.0 * power_loss(b, mu, omega),
        load_capacity_n: load_capacity_proxy(&coeffs, b, op.p_a),
    })
}

/// Everything the direct path computes for one design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignEvaluation {
    pub mass: MassProperties,
    pub modes: [ModeStabilityResult; 4],
    pub performance: Performance,
}

pub fn evaluate_oracle(
    design: &Design,
    fluids: &FluidRegistry,
    settings: &OracleSettings,
) -> Result<DesignEvaluation, DesignError> {
    design.validate()?;
    let op = &design.operating;
    let mu = fluids.properties(&op.fluid, op.temperature, op.p_a)?.mu;
    let mass = mass_properties(&design.rotor);
    let model = assemble(&mass, op.omega())?;
    let modes = oracle_modes(&model, &design.bearing, op.p_a, mu, settings)?;
    let performance = performance(design, mu, settings)?;
    Ok(DesignEvaluation { mass, modes, performance })
}
