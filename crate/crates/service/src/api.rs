//! Request and response types and the engine calls behind them. The CLI and
//! the HTTP service share everything here, including validation.

use std::time::Instant;

use gasrotor_core::bearing::{BearingError, HgjbGeometry, OperatingPoint};
use gasrotor_core::design::{evaluate_oracle, performance, Design, DesignError, OracleSettings};
use gasrotor_core::dynamics::{DynamicsError, ModeStabilityResult};
use gasrotor_core::fluid::{FluidError, FluidRegistry};
use gasrotor_core::robustness::{
    default_speeds, export_contours, feasible_fraction, run_sweep, ContourDocument, Evaluator, EvaluatorKind,
    OracleEvaluator, PointResult, SurrogateEvaluator, SweepError, SweepSpec, ToleranceSpec,
};
use gasrotor_core::rotor::{mass_properties, parse_rotor, MassProperties, Rotor, RotorError};
use gasrotor_core::surrogate::{featureize_with, ModePrediction, SurrogateModel};
use serde::{Deserialize, Serialize};

use crate::config::Config;

/// Error body of every failed request and CLI command.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Malformed,
    Validation,
    NotFound,
    Timeout,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub kind: ErrorKind,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(kind: ErrorKind, code: &str, message: impl Into<String>, path: Option<String>) -> Self {
        Self { kind, body: ErrorBody { code: code.into(), message: message.into(), path } }
    }

    pub fn malformed(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Malformed, "request.malformed", message, None)
    }

    pub fn no_model() -> Self {
        Self::new(ErrorKind::NotFound, "model.not_loaded", "no surrogate model is loaded", None)
    }

    pub fn http_status(&self) -> u16 {
        match self.kind {
            ErrorKind::Malformed => 400,
            ErrorKind::Validation => 422,
            ErrorKind::NotFound => 404,
            ErrorKind::Timeout => 504,
            ErrorKind::Internal => 500,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind {
            ErrorKind::Internal => 1,
            ErrorKind::Malformed => 2,
            ErrorKind::Validation => 3,
            ErrorKind::NotFound => 4,
            ErrorKind::Timeout => 5,
        }
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.body.code, self.body.message)
    }
}

impl std::error::Error for ApiError {}

fn rotor_error(e: &RotorError, prefix: &str) -> ApiError {
    let path = match e {
        RotorError::JournalsUnassigned => Some("journal_a".to_string()),
        _ => e.path().map(str::to_string),
    };
    ApiError::new(ErrorKind::Validation, e.code(), e.to_string(), path.map(|p| format!("{prefix}{p}")))
}

fn design_error(e: &DesignError) -> ApiError {
    let path = match e {
        DesignError::Rotor(r) => return rotor_error(r, "rotor."),
        DesignError::Dynamics(DynamicsError::JournalsUnassigned) => Some("rotor.journal_a".to_string()),
        DesignError::Dynamics(DynamicsError::ZeroSpeed) => Some("operating.N".to_string()),
        DesignError::Bearing(BearingError::InvalidParameter { field, .. }) => Some(match *field {
            "p_a" | "T" | "N" => format!("operating.{field}"),
            f => format!("bearing.{f}"),
        }),
        DesignError::Fluid(FluidError::TemperatureOutOfRange { .. }) => Some("operating.T".to_string()),
        DesignError::Fluid(_) => Some("operating.fluid".to_string()),
        _ => None,
    };
    let kind = match e.code() {
        "bearing.solver" | "dynamics.solver" => ErrorKind::Internal,
        _ => ErrorKind::Validation,
    };
    ApiError::new(kind, e.code(), e.to_string(), path)
}

impl From<DesignError> for ApiError {
    fn from(e: DesignError) -> Self {
        design_error(&e)
    }
}

/// Parse a JSON body, reporting an empty or unparsable body as malformed.
pub fn parse_body<T: serde::de::DeserializeOwned>(bytes: &[u8]) -> Result<T, ApiError> {
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Err(ApiError::new(ErrorKind::Malformed, "request.empty", "request body is empty", None));
    }
    serde_json::from_slice(bytes).map_err(|e| ApiError::malformed(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateResponse {
    pub mass: MassProperties,
    pub diagnostics: Vec<Diagnostic>,
}

/// Validate a rotor document given as JSON.
pub fn validate_rotor(doc: &serde_json::Value) -> Result<(Rotor, ValidateResponse), ApiError> {
    let rotor = parse_rotor(&doc.to_string()).map_err(|e| rotor_error(&e, ""))?;
    let mut diagnostics = Vec::new();
    if rotor.journals().is_err() {
        diagnostics.push(Diagnostic {
            code: "rotor.journals_unassigned".into(),
            message: "journal bearings are not assigned; stability cannot be computed".into(),
        });
    }
    if rotor.thrust().is_none() {
        diagnostics.push(Diagnostic { code: "rotor.thrust_unassigned".into(), message: "no thrust bearing element".into() });
    }
    let mass = mass_properties(&rotor);
    Ok((rotor, ValidateResponse { mass, diagnostics }))
}

fn default_evaluator() -> EvaluatorKind {
    EvaluatorKind::Oracle
}

/// Deviation grid and speeds of a sweep; unset fields take configured defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRequest {
    /// Largest clearance deviation, m.
    pub delta_h_r: f64,
    /// Largest groove-depth deviation, m.
    pub delta_h_g: f64,
    #[serde(default)]
    pub grid_n: Option<usize>,
    /// Speeds, rpm.
    #[serde(default)]
    pub speeds: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComputeRequest {
    /// Rotor document.
    pub rotor: serde_json::Value,
    pub bearing: HgjbGeometry,
    pub operating: OperatingPoint,
    #[serde(default = "default_evaluator")]
    pub evaluator: EvaluatorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepRequest>,
}

/// Everything upstream modules check, plus a non-zero speed and a known fluid.
pub fn validate_request(req: &ComputeRequest, fluids: &FluidRegistry) -> Result<Design, ApiError> {
    let (rotor, _) = validate_rotor(&req.rotor).map_err(|mut e| {
        e.body.path = Some(e.body.path.map_or("rotor".into(), |p| format!("rotor.{p}")));
        e
    })?;
    let design = Design { rotor, bearing: req.bearing, operating: req.operating.clone() };
    design.validate()?;
    let op = &design.operating;
    fluids.properties(&op.fluid, op.temperature, op.p_a).map_err(|e| design_error(&e.into()))?;
    if op.speed_rpm == 0.0 {
        return Err(design_error(&DesignError::Dynamics(DynamicsError::ZeroSpeed)));
    }
    Ok(design)
}

/// Wall-clock time per stage, ms.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub stability_ms: f64,
    pub performance_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputeResponse {
    pub evaluator: EvaluatorKind,
    pub mass: MassProperties,
    pub modes: [ModeStabilityResult; 4],
    /// Viscous loss of both journals, W.
    pub power_loss_w: f64,
    /// Load-capacity proxy of one journal, N.
    pub load_capacity_n: f64,
    pub lambda: f64,
    /// Surrogate probabilities and ensemble spreads.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surrogate: Option<[ModePrediction; 4]>,
    pub warnings: Vec<String>,
    pub timing_ms: Timing,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// Engine inputs that do not change between requests.
pub struct Engine {
    pub config: Config,
    pub fluids: FluidRegistry,
    pub model: Option<std::sync::Arc<SurrogateModel>>,
}

impl Engine {
    pub fn oracle_settings(&self) -> OracleSettings {
        self.config.oracle_settings()
    }

    fn surrogate(&self) -> Result<&SurrogateModel, ApiError> {
        self.model.as_deref().ok_or_else(ApiError::no_model)
    }

    /// Fail early when the chosen evaluator cannot run.
    pub fn check_evaluator(&self, evaluator: EvaluatorKind) -> Result<(), ApiError> {
        match evaluator {
            EvaluatorKind::Oracle => Ok(()),
            EvaluatorKind::Surrogate => self.surrogate().map(|_| ()),
        }
    }

    pub fn compute(&self, design: &Design, evaluator: EvaluatorKind) -> Result<ComputeResponse, ApiError> {
        let start = Instant::now();
        let settings = self.oracle_settings();
        let op = &design.operating;
        let mu = self.fluids.properties(&op.fluid, op.temperature, op.p_a).map_err(|e| design_error(&e.into()))?.mu;
        let mass = mass_properties(&design.rotor);
        let mut warnings = Vec::new();
        let (modes, surrogate, perf, stability_ms, performance_ms) = match evaluator {
            EvaluatorKind::Oracle => {
                let e = evaluate_oracle(design, &self.fluids, &settings)?;
                let t = ms(start);
                let perf_start = Instant::now();
                let perf = performance(design, mu, &settings)?;
                (e.modes, None, perf, t, ms(perf_start))
            }
            EvaluatorKind::Surrogate => {
                let model = self.surrogate()?;
                let x = featureize_with(design, mu)?;
                let prediction = model.predict(&x).map_err(|e| ApiError::new(ErrorKind::Internal, "model.predict", e.to_string(), None))?;
                warnings.extend(prediction.out_of_range.iter().map(|f| format!("feature {f} is outside the training range")));
                let t = ms(start);
                let perf_start = Instant::now();
                let perf = performance(design, mu, &settings)?;
                (prediction.results(), Some(prediction.modes), perf, t, ms(perf_start))
            }
        };
        Ok(ComputeResponse {
            evaluator,
            mass,
            modes,
            power_loss_w: perf.power_loss_w,
            load_capacity_n: perf.load_capacity_n,
            lambda: perf.lambda,
            surrogate,
            warnings,
            timing_ms: Timing { stability_ms, performance_ms, total_ms: ms(start) },
        })
    }

    pub fn sweep_spec(&self, design: &Design, evaluator: EvaluatorKind, req: &SweepRequest) -> Result<SweepSpec, ApiError> {
        let tolerance =
            ToleranceSpec { delta_h_r: req.delta_h_r, delta_h_g: req.delta_h_g, grid_n: req.grid_n.unwrap_or(self.config.sweep.grid_n) };
        let speeds =
            req.speeds.clone().unwrap_or_else(|| default_speeds(design.operating.speed_rpm, self.config.sweep.speed_count));
        let spec = SweepSpec { speeds, tolerance, evaluator };
        spec.validate(design).map_err(|e| match e {
            SweepError::Design(d) => design_error(&d),
            other => ApiError::new(ErrorKind::Validation, "sweep.invalid", other.to_string(), Some("sweep".into())),
        })?;
        Ok(spec)
    }

    /// Run a validated sweep; cells still pending at `deadline` are marked invalid.
    pub fn sweep<P>(&self, design: &Design, spec: &SweepSpec, deadline: Instant, progress: P) -> Result<SweepOutcome, ApiError>
    where
        P: Fn(usize, usize) + Sync,
    {
        let start = Instant::now();
        let settings = self.oracle_settings();
        let map = match spec.evaluator {
            EvaluatorKind::Oracle => {
                let inner = OracleEvaluator { fluids: &self.fluids, settings };
                run_sweep(design, spec, &Deadline { inner, deadline }, progress)
            }
            EvaluatorKind::Surrogate => {
                let inner = SurrogateEvaluator { model: self.surrogate()?, fluids: &self.fluids, settings };
                run_sweep(design, spec, &Deadline { inner, deadline }, progress)
            }
        }
        .map_err(|e| ApiError::new(ErrorKind::Validation, "sweep.invalid", e.to_string(), Some("sweep".into())))?;
        let invalid_cells = map.failures().count();
        let summary = SweepSummary {
            cells: map.cells.len(),
            invalid_cells,
            feasible_fraction: feasible_fraction(&map).ok(),
            timed_out: Instant::now() >= deadline && invalid_cells > 0,
            elapsed_ms: ms(start),
        };
        Ok(SweepOutcome { contours: export_contours(&map, unix_now()), summary })
    }
}

struct Deadline<E> {
    inner: E,
    deadline: Instant,
}

impl<E: Evaluator> Evaluator for Deadline<E> {
    fn evaluate(&self, design: &Design) -> Result<PointResult, String> {
        if Instant::now() >= self.deadline {
            return Err("timeout: sweep deadline passed before this cell ran".into());
        }
        self.inner.evaluate(design)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub cells: usize,
    pub invalid_cells: usize,
    /// Feasible over valid cells; absent when every cell failed.
    pub feasible_fraction: Option<f64>,
    pub timed_out: bool,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub contours: ContourDocument,
    pub summary: SweepSummary,
}

/// One line of the sweep stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SweepEvent {
    Progress { done: usize, total: usize },
    Result(Box<SweepOutcome>),
    Error(ErrorBody),
}

pub fn unix_now() -> u64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs())
}
