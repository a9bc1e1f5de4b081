//! Feasibility of a design over manufacturing deviations of clearance and
//! groove depth, swept across speeds.

mod contours;

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::design::{evaluate_oracle, performance, Design, DesignError, OracleSettings};
use crate::dynamics::ModeStabilityResult;
use crate::fluid::FluidRegistry;
use crate::surrogate::{featureize_with, SurrogateModel};

pub use contours::{export_contours, ContourDocument, ContourMetadata, CellFailure, CONTOUR_FORMAT_VERSION};

pub const DEFAULT_GRID_N: usize = 21;
pub const DEFAULT_SPEED_COUNT: usize = 11;
/// Speed sweep span as fractions of the nominal speed.
pub const DEFAULT_SPEED_SPAN: (f64, f64) = (0.5, 1.2);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error("every cell of the map is invalid")]
    AllCellsInvalid,
}

/// Symmetric deviation grids `[−Δ, +Δ]` with `grid_n` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSpec {
    /// Largest clearance deviation, m.
    pub delta_h_r: f64,
    /// Largest groove-depth deviation, m.
    pub delta_h_g: f64,
    /// Points per axis; odd so that zero is a grid point.
    pub grid_n: usize,
}

impl ToleranceSpec {
    pub fn new(delta_h_r: f64, delta_h_g: f64) -> Self {
        Self { delta_h_r, delta_h_g, grid_n: DEFAULT_GRID_N }
    }

    pub fn validate(&self, h_r: f64, h_g: f64) -> Result<(), SweepError> {
        let bad = |m: String| Err(SweepError::InvalidSpec(m));
        for (name, v) in [("delta_h_r", self.delta_h_r), ("delta_h_g", self.delta_h_g)] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if self.grid_n == 0 || self.grid_n.is_multiple_of(2) {
            return bad(format!("grid_n must be odd, got {}", self.grid_n));
        }
        if h_r - self.delta_h_r <= 0.0 {
            return bad(format!("clearance {h_r} m minus deviation {} m is not positive", self.delta_h_r));
        }
        if h_g - self.delta_h_g < 0.0 {
            return bad(format!("groove depth {h_g} m minus deviation {} m is negative", self.delta_h_g));
        }
        Ok(())
    }

    fn axis(delta: f64, n: usize) -> Vec<f64> {
        let c = (n / 2) as f64;
        (0..n).map(|i| if n == 1 { 0.0 } else { delta * ((i as f64 - c) / c) }).collect()
    }

    /// Clearance deviations, m, ascending with an exact zero in the middle.
    pub fn h_r_axis(&self) -> Vec<f64> {
        Self::axis(self.delta_h_r, self.grid_n)
    }

    /// Groove-depth deviations, m.
    pub fn h_g_axis(&self) -> Vec<f64> {
        Self::axis(self.delta_h_g, self.grid_n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvaluatorKind {
    Oracle,
    Surrogate,
}

impl EvaluatorKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Oracle => "oracle",
            Self::Surrogate => "surrogate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Speeds, rpm, strictly increasing.
    pub speeds: Vec<f64>,
    pub tolerance: ToleranceSpec,
    pub evaluator: EvaluatorKind,
}

/// `count` speeds evenly spread over `DEFAULT_SPEED_SPAN` of `nominal_rpm`.
pub fn default_speeds(nominal_rpm: f64, count: usize) -> Vec<f64> {
    let (lo, hi) = DEFAULT_SPEED_SPAN;
    match count {
        1 => vec![nominal_rpm],
        _ => (0..count).map(|i| nominal_rpm * (lo + (hi - lo) * i as f64 / (count - 1) as f64)).collect(),
    }
}

impl SweepSpec {
    pub fn new(nominal_rpm: f64, tolerance: ToleranceSpec, evaluator: EvaluatorKind) -> Self {
        Self { speeds: default_speeds(nominal_rpm, DEFAULT_SPEED_COUNT), tolerance, evaluator }
    }

    pub fn validate(&self, design: &Design) -> Result<(), SweepError> {
        if self.speeds.is_empty() {
            return Err(SweepError::InvalidSpec("at least one speed is required".into()));
        }
        if let Some(s) = self.speeds.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(SweepError::InvalidSpec(format!("speeds must be positive, got {s}")));
        }
        if self.speeds.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SweepError::InvalidSpec("speeds must be strictly increasing".into()));
        }
        self.tolerance.validate(design.bearing.h_r, design.bearing.h_g)
    }
}

/// Stability and bearing performance of one design at one speed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub modes: [ModeStabilityResult; 4],
    /// Load-capacity proxy of one journal, N.
    pub load_capacity_n: f64,
    /// Viscous loss of both journals, W.
    pub power_loss_w: f64,
}

pub trait Evaluator: Sync {
    fn evaluate(&self, design: &Design) -> Result<PointResult, String>;
}

impl<F> Evaluator for F
where
    F: Fn(&Design) -> Result<PointResult, String> + Sync,
{
    fn evaluate(&self, design: &Design) -> Result<PointResult, String> {
        self(design)
    }
}

pub struct OracleEvaluator<'a> {
    pub fluids: &'a FluidRegistry,
    pub settings: OracleSettings,
}

impl Evaluator for OracleEvaluator<'_> {
    fn evaluate(&self, design: &Design) -> Result<PointResult, String> {
        let e = evaluate_oracle(design, self.fluids, &self.settings).map_err(|e| e.to_string())?;
        Ok(PointResult {
            modes: e.modes,
            load_capacity_n: e.performance.load_capacity_n,
            power_loss_w: e.performance.power_loss_w,
        })
    }
}

/// Stability from the surrogate; load capacity and power loss from the
/// bearing model, which is cheap next to the stability sweep.
pub struct SurrogateEvaluator<'a> {
    pub model: &'a SurrogateModel,
    pub fluids: &'a FluidRegistry,
    pub settings: OracleSettings,
}

impl Evaluator for SurrogateEvaluator<'_> {
    fn evaluate(&self, design: &Design) -> Result<PointResult, String> {
        let op = &design.operating;
        let mu = self.fluids.properties(&op.fluid, op.temperature, op.p_a).map_err(|e| e.to_string())?.mu;
        let x = featureize_with(design, mu).map_err(|e| e.to_string())?;
        let modes = self.model.predict(&x).map_err(|e| e.to_string())?.results();
        let perf = performance(design, mu, &self.settings).map_err(|e| e.to_string())?;
        Ok(PointResult { modes, load_capacity_n: perf.load_capacity_n, power_loss_w: perf.power_loss_w })
    }
}

/// Aggregates of one deviation cell over all speeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    /// Smallest decrement over speeds and excited modes; `None` if no mode is excited.
    pub worst_log_dec: Option<f64>,
    pub min_load_capacity_n: f64,
    pub max_power_loss_w: f64,
    /// Every excited mode at every speed has a positive decrement.
    pub feasible: bool,
    /// One entry per sweep speed.
    pub points: Vec<PointResult>,
}

impl CellSummary {
    pub fn from_points(points: Vec<PointResult>) -> Self {
        let worst_log_dec = points.iter().flat_map(|p| p.modes.iter().filter_map(|m| m.log_dec)).reduce(f64::min);
        let min_load_capacity_n = points.iter().map(|p| p.load_capacity_n).fold(f64::INFINITY, f64::min);
        let max_power_loss_w = points.iter().map(|p| p.power_loss_w).fold(f64::NEG_INFINITY, f64::max);
        Self { feasible: worst_log_dec.is_none_or(|d| d > 0.0), worst_log_dec, min_load_capacity_n, max_power_loss_w, points }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Cell {
    Valid(CellSummary),
    Invalid { speed_rpm: f64, error: String },
}

impl Cell {
    pub fn summary(&self) -> Option<&CellSummary> {
        match self {
            Self::Valid(s) => Some(s),
            Self::Invalid { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityMap {
    /// Clearance deviations, m.
    pub delta_h_r: Vec<f64>,
    /// Groove-depth deviations, m.
    pub delta_h_g: Vec<f64>,
    pub speeds: Vec<f64>,
    pub evaluator: EvaluatorKind,
    pub design_digest: String,
    /// Row-major: `cells[i * n + j]` is clearance deviation `i`, groove-depth deviation `j`.
    pub cells: Vec<Cell>,
}

impl FeasibilityMap {
    pub fn grid_n(&self) -> usize {
        self.delta_h_r.len()
    }

    pub fn cell(&self, i: usize, j: usize) -> &Cell {
        &self.cells[i * self.grid_n() + j]
    }

    /// The cell at zero deviation.
    pub fn nominal(&self) -> &Cell {
        let c = self.grid_n() / 2;
        self.cell(c, c)
    }

    pub fn failures(&self) -> impl Iterator<Item = (usize, usize, &str)> {
        let n = self.grid_n();
        self.cells.iter().enumerate().filter_map(move |(k, c)| match c {
            Cell::Invalid { error, .. } => Some((k / n, k % n, error.as_str())),
            Cell::Valid(_) => None,
        })
    }
}

/// Evaluate every deviation cell at every speed. Cells run in parallel and
/// are placed by index, so the map does not depend on evaluation order.
/// `progress(done, total)` is called once per finished cell.
pub fn run_sweep<E, P>(design: &Design, spec: &SweepSpec, evaluator: &E, progress: P) -> Result<FeasibilityMap, SweepError>
where
    E: Evaluator + ?Sized,
    P: Fn(usize, usize) + Sync,
{
    design.validate()?;
    spec.validate(design)?;
    let (axis_r, axis_g) = (spec.tolerance.h_r_axis(), spec.tolerance.h_g_axis());
    let n = axis_r.len();
    let total = n * n;
    let done = AtomicUsize::new(0);
    let cells = (0..total)
        .into_par_iter()
        .map(|k| {
            let deviated = design.with_deviation(axis_r[k / n], axis_g[k % n]);
            let cell = evaluate_cell(&deviated, &spec.speeds, evaluator);
            progress(done.fetch_add(1, Ordering::Relaxed) + 1, total);
            cell
        })
        .collect();
    Ok(FeasibilityMap {
        delta_h_r: axis_r,
        delta_h_g: axis_g,
        speeds: spec.speeds.clone(),
        evaluator: spec.evaluator,
        design_digest: design.digest(),
        cells,
    })
}

fn evaluate_cell<E: Evaluator + ?Sized>(design: &Design, speeds: &[f64], evaluator: &E) -> Cell {
    let mut points = Vec::with_capacity(speeds.len());
    for &speed in speeds {
        match evaluator.evaluate(&design.with_speed(speed)) {
            Ok(p) => points.push(p),
            Err(error) => return Cell::Invalid { speed_rpm: speed, error },
        }
    }
    Cell::Valid(CellSummary::from_points(points))
}

/// Feasible cells over valid cells.
pub fn feasible_fraction(map: &FeasibilityMap) -> Result<f64, SweepError> {
    let valid: Vec<&CellSummary> = map.cells.iter().filter_map(Cell::summary).collect();
    if valid.is_empty() {
        return Err(SweepError::AllCellsInvalid);
    }
    Ok(valid.iter().filter(|c| c.feasible).count() as f64 / valid.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axes_are_symmetric_with_exact_zero() {
        let t = ToleranceSpec::new(2e-6, 5e-6);
        let a = t.h_r_axis();
        assert_eq!(a.len(), 21);
        assert_eq!(a[10], 0.0);
        assert_eq!((a[0], a[20]), (-2e-6, 2e-6));
        assert!(a.iter().zip(a.iter().rev()).all(|(x, y)| *x == -*y));
        assert_eq!(ToleranceSpec { grid_n: 1, ..t }.h_g_axis(), vec![0.0]);
    }

    #[test]
    fn default_speeds_span() {
        let s = default_speeds(1000.0, 11);
        assert_eq!(s.len(), 11);
        assert_eq!((s[0], s[10]), (500.0, 1200.0));
    }
}
