//! `gasrotor` command line. Failures print an error body as JSON on stderr
//! and exit with 1 (internal), 2 (malformed input), 3 (invalid design),
//! 4 (missing model or file) or 5 (timeout).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gasrotor_core::bearing::{HgjbGeometry, OperatingPoint};
use gasrotor_core::design::{reference_design, REFERENCE_ROTOR};
use gasrotor_core::dynamics::ModeId;
use gasrotor_core::robustness::EvaluatorKind;
use gasrotor_core::surrogate::{
    evaluate, ga_search, generate_dataset, load_model, save_model, surrogate_fitness, Activation, GaSettings,
    SearchSpace, Split, SurrogateModel, Task, TrainingDataset,
};
use serde_json::json;

use crate::api::{parse_body, unix_now, validate_request, ApiError, ComputeRequest, ComputeResponse, Engine, ErrorKind, SweepRequest};
use crate::config::Config;
use crate::manifest::RunManifest;
use crate::registry::ModelRegistry;
use crate::server::{serve, AppState};

#[derive(Debug, Parser)]
#[command(name = "gasrotor", version, about = "Gas-bearing rotor stability tools")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the feature space and label it with the direct evaluator (CSV).
    GenData {
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the sixteen ensemble blocks on a dataset.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Genetic search over network hyperparameters for one block.
    GaSearch {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::CylindricalForward)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = TaskArg::ExcitedClf)]
        task: TaskArg,
        #[arg(long, default_value_t = 40)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Epochs per candidate.
        #[arg(long, default_value_t = 50)]
        epochs: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a model on the validation and test splits of a dataset.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stability and performance of one design.
    Compute {
        #[command(flatten)]
        design: DesignArgs,
        /// Print a table instead of JSON.
        #[arg(long)]
        table: bool,
    },
    /// Feasibility map over clearance and groove-depth deviations.
    Sweep {
        #[command(flatten)]
        design: DesignArgs,
        /// Largest clearance deviation, µm.
        #[arg(long)]
        delta_h_r_um: Option<f64>,
        /// Largest groove-depth deviation, µm.
        #[arg(long)]
        delta_h_g_um: Option<f64>,
        /// Points per axis (odd).
        #[arg(long)]
        grid_n: Option<usize>,
        /// Comma-separated speeds, rpm.
        #[arg(long, value_delimiter = ',')]
        speeds: Option<Vec<f64>>,
        /// Contour JSON output; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    CylindricalForward,
    CylindricalBackward,
    ConicalForward,
    ConicalBackward,
}

impl From<ModeArg> for ModeId {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::CylindricalForward => ModeId::CylindricalForward,
            ModeArg::CylindricalBackward => ModeId::CylindricalBackward,
            ModeArg::ConicalForward => ModeId::ConicalForward,
            ModeArg::ConicalBackward => ModeId::ConicalBackward,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TaskArg {
    ExcitedClf,
    StableClf,
    WsrReg,
    LogdecReg,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::ExcitedClf => Task::ExcitedClf,
            TaskArg::StableClf => Task::StableClf,
            TaskArg::WsrReg => Task::WsrReg,
            TaskArg::LogdecReg => Task::LogdecReg,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EvaluatorArg {
    Oracle,
    Surrogate,
}

/// A full request file, or a rotor file with bearing and operating flags.
/// Unset flags take the reference design's values.
#[derive(Debug, Args)]
pub struct DesignArgs {
    /// Request JSON, as sent to the service.
    #[arg(long, conflicts_with = "rotor")]
    pub request: Option<PathBuf>,
    /// Rotor document; the bundled reference rotor when absent.
    #[arg(long)]
    pub rotor: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Groove depth, µm.
    #[arg(long)]
    pub h_g_um: Option<f64>,
    /// Radial clearance, µm.
    #[arg(long)]
    pub h_r_um: Option<f64>,
    /// Bearing length, mm.
    #[arg(long)]
    pub length_mm: Option<f64>,
    /// Bearing diameter, mm.
    #[arg(long)]
    pub diameter_mm: Option<f64>,
    #[arg(long)]
    pub fluid: Option<String>,
    /// Ambient pressure, Pa.
    #[arg(long)]
    pub p_a: Option<f64>,
    /// Ambient temperature, K.
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Speed, rpm.
    #[arg(long)]
    pub speed: Option<f64>,
    #[arg(long, value_enum)]
    pub evaluator: Option<EvaluatorArg>,
    /// Model file; overrides the configured one.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

fn io_error(path: &Path, e: std::io::Error) -> ApiError {
    let kind = if e.kind() == std::io::ErrorKind::NotFound { ErrorKind::NotFound } else { ErrorKind::Internal };
    let code = if kind == ErrorKind::NotFound { "file.not_found" } else { "file.io" };
    ApiError::new(kind, code, format!("{}: {e}", path.display()), None)
}

fn internal(code: &str, e: impl std::fmt::Display) -> ApiError {
    ApiError::new(ErrorKind::Internal, code, e.to_string(), None)
}

fn read(path: &Path) -> Result<Vec<u8>, ApiError> {
    std::fs::read(path).map_err(|e| io_error(path, e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), ApiError> {
    std::fs::write(path, bytes).map_err(|e| io_error(path, e))
}

fn write_manifest(command: &str, seed: Option<u64>, inputs: serde_json::Value, outputs: &[&Path]) -> Result<(), ApiError> {
    let manifest = RunManifest::new(command, seed, inputs, outputs).map_err(|e| internal("file.io", e))?;
    manifest.write().map_err(|e| internal("file.io", e))?;
    Ok(())
}

fn read_dataset(path: &Path) -> Result<TrainingDataset, ApiError> {
    let file = std::fs::File::open(path).map_err(|e| io_error(path, e))?;
    TrainingDataset::read_csv(file).map_err(|e| ApiError::new(ErrorKind::Malformed, "dataset.invalid", e.to_string(), None))
}

fn read_model(path: &Path) -> Result<SurrogateModel, ApiError> {
    if !path.exists() {
        return Err(ApiError::new(ErrorKind::NotFound, "model.not_found", format!("{}: no such file", path.display()), None));
    }
    load_model(path).map_err(|e| ApiError::new(ErrorKind::Malformed, "model.invalid", e.to_string(), None))
}

impl DesignArgs {
    fn request(&self) -> Result<ComputeRequest, ApiError> {
        if let Some(p) = &self.request {
            let mut req: ComputeRequest = parse_body(&read(p)?)?;
            if let Some(e) = self.evaluator {
                req.evaluator = evaluator_kind(e);
            }
            return Ok(req);
        }
        let rotor_text = match &self.rotor {
            Some(p) => read(p)?,
            None => REFERENCE_ROTOR.as_bytes().to_vec(),
        };
        let rotor: serde_json::Value = parse_body(&rotor_text)?;
        let reference = reference_design();
        let b = reference.bearing;
        let op = reference.operating;
        Ok(ComputeRequest {
            rotor,
            bearing: HgjbGeometry {
                alpha: self.alpha.unwrap_or(b.alpha),
                beta: self.beta.unwrap_or(b.beta),
                gamma: self.gamma.unwrap_or(b.gamma),
                h_g: self.h_g_um.map_or(b.h_g, |v| v * 1e-6),
                h_r: self.h_r_um.map_or(b.h_r, |v| v * 1e-6),
                length: self.length_mm.map_or(b.length, |v| v * 1e-3),
                diameter: self.diameter_mm.map_or(b.diameter, |v| v * 1e-3),
            },
            operating: OperatingPoint {
                fluid: self.fluid.clone().unwrap_or(op.fluid),
                p_a: self.p_a.unwrap_or(op.p_a),
                temperature: self.temperature.unwrap_or(op.temperature),
                speed_rpm: self.speed.unwrap_or(op.speed_rpm),
            },
            evaluator: self.evaluator.map_or(EvaluatorKind::Oracle, evaluator_kind),
            sweep: None,
        })
    }
}

fn evaluator_kind(e: EvaluatorArg) -> EvaluatorKind {
    match e {
        EvaluatorArg::Oracle => EvaluatorKind::Oracle,
        EvaluatorArg::Surrogate => EvaluatorKind::Surrogate,
    }
}

fn engine(config: Config, model: Option<&Path>, evaluator: EvaluatorKind) -> Result<Engine, ApiError> {
    let fluids = config.fluid_registry().map_err(|e| internal("config.invalid", e))?;
    let model = match (evaluator, model) {
        (EvaluatorKind::Oracle, _) => None,
        (EvaluatorKind::Surrogate, Some(p)) => Some(Arc::new(read_model(p)?)),
        (EvaluatorKind::Surrogate, None) => ModelRegistry::scan(config.model_dir.as_deref(), config.model.as_deref())
            .map_err(|e| internal("model.scan", e))?
            .loaded,
    };
    Ok(Engine { config, fluids, model })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.4}"))
}

fn fmt_flag(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "yes",
        Some(false) => "no",
        None => "-",
    }
}

/// Plain-text rendering of a compute response.
pub fn render_table(resp: &ComputeResponse) -> String {
    let mut s = format!("{:<22} {:>8} {:>7} {:>10} {:>10}\n", "mode", "excited", "stable", "wsr", "log_dec");
    for m in &resp.modes {
        s += &format!(
            "{:<22} {:>8} {:>7} {:>10} {:>10}\n",
            m.mode.name(),
            fmt_flag(Some(m.excited)),
            fmt_flag(m.stable),
            fmt_opt(m.whirl_speed_ratio),
            fmt_opt(m.log_dec)
        );
    }
    s += &format!("mass {:.6} kg\n", resp.mass.mass);
    s += &format!("load capacity {:.4} N\n", resp.load_capacity_n);
    s += &format!("power loss {:.4} W\n", resp.power_loss_w);
    s += &format!("lambda {:.4}\n", resp.lambda);
    for w in &resp.warnings {
        s += &format!("warning: {w}\n");
    }
    s
}

fn json_line<T: serde::Serialize>(value: &T) -> Result<(), ApiError> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| internal("output", e))?;
    writeln!(out).map_err(|e| internal("output", e))
}

fn run(cli: Cli) -> Result<(), ApiError> {
    let config = Config::load(cli.config.as_deref()).map_err(|e| ApiError::new(ErrorKind::Malformed, "config.invalid", e.to_string(), None))?;
    match cli.command {
        Command::GenData { n, seed, out } => {
            let settings = config.oracle_settings();
            let data = generate_dataset(&config.ranges, n, seed, &settings)
                .map_err(|e| ApiError::new(ErrorKind::Validation, "dataset.invalid", e.to_string(), None))?;
            write(&out, &data.to_csv_bytes())?;
            let inputs = json!({"n": n, "ranges": config.ranges, "oracle": settings});
            write_manifest("gen-data", Some(seed), inputs, &[&out])?;
            eprintln!("{} samples, {} excluded", data.samples.len(), data.excluded.len());
        }
        Command::Train { dataset, out, seed } => {
            let data = read_dataset(&dataset)?;
            let start = Instant::now();
            let (mut model, reports) = gasrotor_core::surrogate::train_surrogate(&data, &config.training, &config.ranges, seed)
                .map_err(|e| internal("train.failed", e))?;
            model.metadata.created_unix = unix_now();
            save_model(&model, &out).map_err(|e| internal("model.write", e))?;
            let metrics = evaluate(&model, &data, Split::Test).map_err(|e| internal("model.predict", e))?;
            let inputs = json!({"dataset": dataset, "dataset_digest": data.digest(), "training": config.training});
            write_manifest("train", Some(seed), inputs, &[&out])?;
            let epochs: Vec<usize> = reports.iter().flat_map(|r| r.members.iter().map(|m| m.epochs_run)).collect();
            json_line(&json!({"model": out, "train_s": start.elapsed().as_secs_f64(), "member_epochs": epochs, "test": metrics}))?;
        }
        Command::GaSearch { dataset, mode, task, budget, seed, epochs, out } => {
            let data = read_dataset(&dataset)?;
            let fitness = surrogate_fitness(&data, mode.into(), task.into(), Activation::Tanh, epochs);
            let space = SearchSpace::default();
            let settings = GaSettings::default();
            let result = ga_search(&space, &settings, budget, seed, fitness)
                .map_err(|e| ApiError::new(ErrorKind::Validation, "ga.invalid", e.to_string(), None))?;
            write(&out, &serde_json::to_vec_pretty(&result).map_err(|e| internal("output", e))?)?;
            let inputs = json!({
                "dataset_digest": data.digest(), "mode": ModeId::from(mode), "task": Task::from(task),
                "budget": budget, "epochs": epochs, "space": space, "settings": settings,
            });
            write_manifest("ga-search", Some(seed), inputs, &[&out])?;
            json_line(&json!({"best": result.best, "best_fitness": result.best_fitness, "evaluations": result.history.len()}))?;
        }
        Command::Eval { model, dataset, out } => {
            let m = read_model(&model)?;
            let data = read_dataset(&dataset)?;
            let metrics: Vec<_> = [Split::Val, Split::Test]
                .into_iter()
                .map(|s| evaluate(&m, &data, s))
                .collect::<Result<_, _>>()
                .map_err(|e| internal("model.predict", e))?;
            let doc = json!({"model": model, "dataset_digest": data.digest(), "metrics": metrics});
            match out {
                Some(p) => {
                    write(&p, &serde_json::to_vec_pretty(&doc).map_err(|e| internal("output", e))?)?;
                    write_manifest("eval", None, json!({"model": model, "dataset": dataset}), &[&p])?;
                }
                None => json_line(&doc)?,
            }
        }
        Command::Compute { design, table } => {
            let req = design.request()?;
            let engine = engine(config, design.model.as_deref(), req.evaluator)?;
            let d = validate_request(&req, &engine.fluids)?;
            engine.check_evaluator(req.evaluator)?;
            let resp = engine.compute(&d, req.evaluator)?;
            if table {
                print!("{}", render_table(&resp));
            } else {
                json_line(&resp)?;
            }
        }
        Command::Sweep { design, delta_h_r_um, delta_h_g_um, grid_n, speeds, out } => {
            let mut req = design.request()?;
            let from_file = req.sweep.take();
            let sweep = match (delta_h_r_um, delta_h_g_um, from_file) {
                (Some(r), Some(g), _) => SweepRequest { delta_h_r: r * 1e-6, delta_h_g: g * 1e-6, grid_n, speeds },
                (None, None, Some(mut s)) => {
                    s.grid_n = grid_n.or(s.grid_n);
                    s.speeds = speeds.or(s.speeds);
                    s
                }
                _ => {
                    return Err(ApiError::new(
                        ErrorKind::Malformed,
                        "sweep.missing",
                        "give both --delta-h-r-um and --delta-h-g-um, or a request with a sweep section",
                        None,
                    ))
                }
            };
            let engine = engine(config, design.model.as_deref(), req.evaluator)?;
            let d = validate_request(&req, &engine.fluids)?;
            engine.check_evaluator(req.evaluator)?;
            let spec = engine.sweep_spec(&d, req.evaluator, &sweep)?;
            let deadline = Instant::now() + engine.config.timeout();
            let outcome = engine.sweep(&d, &spec, deadline, |done, total| {
                if done == total || done % 50 == 0 {
                    eprintln!("{done}/{total} cells");
                }
            })?;
            match out {
                Some(p) => {
                    write(&p, &serde_json::to_vec_pretty(&outcome.contours).map_err(|e| internal("output", e))?)?;
                    req.sweep = Some(sweep);
                    write_manifest("sweep", None, serde_json::to_value(&req).map_err(|e| internal("output", e))?, &[&p])?;
                    json_line(&outcome.summary)?;
                }
                None => json_line(&outcome)?,
            }
            if outcome.summary.timed_out {
                return Err(ApiError::new(ErrorKind::Timeout, "timeout", "sweep deadline passed; map is partial", None));
            }
        }
        Command::Serve => {
            let state = AppState::new(config).map_err(|e| internal("startup", e))?;
            let rt = tokio::runtime::Runtime::new().map_err(|e| internal("startup", e))?;
            rt.block_on(serve(Arc::new(state))).map_err(|e| internal("serve", e))?;
        }
    }
    Ok(())
}

/// Parse arguments, run, and map failures to exit codes.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = ApiError::new(ErrorKind::Malformed, "cli.usage", e.to_string(), None);
            eprintln!("{}", serde_json::to_string(&err.body).expect("error body serialises"));
            return ExitCode::from(err.exit_code());
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e.body).expect("error body serialises"));
            ExitCode::from(e.exit_code())
        }
    }
}
