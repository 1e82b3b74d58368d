//! Graph DSL, run configuration and report generation for `ribbonpc`.

pub mod config;
pub mod corpus;
pub mod dsl;
pub mod selftest;

use std::path::Path;
use std::time::Instant;

use num_rational::BigRational;
use ribbon_core::amplitude::{evaluate, AmplitudeError, AmplitudeRequest, Summation};
use ribbon_core::divdiff::{DivDiffEngine, DivDiffError};
use ribbon_core::powercount::{classify_maximal, omega, omega_tilde, PowerCountError};
use ribbon_core::ribbon::{analyze, FaceKind, GraphError, RibbonGraph};
use ribbon_core::scaling::{fit_slope, sweep, verify, ScalingError, SweepSeries};
use ribbon_core::{Backend, Dd, Real};
use serde_json::{json, Value};
use thiserror::Error;

pub use config::{Command, FamilyKind, RunConfig};
pub use dsl::{parse_graph_dsl, serialize_graph, DslError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Math(String),
    #[error("{0}")]
    Budget(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Math(_) => 3,
            CliError::Budget(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<DslError> for CliError {
    fn from(e: DslError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::Math(e.to_string())
    }
}

impl From<DivDiffError> for CliError {
    fn from(e: DivDiffError) -> Self {
        match e {
            DivDiffError::DerivativeBudgetExceeded { .. } | DivDiffError::QuadratureBudgetExceeded(_) => {
                CliError::Budget(e.to_string())
            }
            _ => CliError::Math(e.to_string()),
        }
    }
}

impl From<AmplitudeError> for CliError {
    fn from(e: AmplitudeError) -> Self {
        match e {
            AmplitudeError::DivDiff(d) => d.into(),
            AmplitudeError::CombinatorialBudgetExceeded { .. } => CliError::Budget(e.to_string()),
            AmplitudeError::ExternalCountMismatch { .. } | AmplitudeError::BadRange { .. } => {
                CliError::Parse(e.to_string())
            }
            _ => CliError::Math(e.to_string()),
        }
    }
}

impl From<PowerCountError> for CliError {
    fn from(e: PowerCountError) -> Self {
        match e {
            PowerCountError::SubsetBudgetExceeded(_) => CliError::Budget(e.to_string()),
            PowerCountError::BadSingularPosition(_) | PowerCountError::InvalidOrder => {
                CliError::Parse(e.to_string())
            }
            _ => CliError::Math(e.to_string()),
        }
    }
}

impl From<ScalingError> for CliError {
    fn from(e: ScalingError) -> Self {
        match e {
            ScalingError::Amplitude(a) => a.into(),
            ScalingError::PowerCount(p) => p.into(),
            ScalingError::Graph(g) => g.into(),
            ScalingError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            ScalingError::NotIncreasing | ScalingError::TooFewPoints(_) => {
                CliError::Parse(e.to_string())
            }
            _ => CliError::Math(e.to_string()),
        }
    }
}

/// What a command produced. `exit_code` is 0 on success and 1 when a verdict
/// or self-test fails.
#[derive(Clone, Debug)]
pub struct Report {
    pub exit_code: i32,
    pub json: Value,
    pub csv: Option<String>,
}

pub fn load_graph(path: &Path) -> Result<RibbonGraph, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    parse_graph_dsl(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

/// Validate the configuration, run the command and write outputs under
/// `config.out` when set.
pub fn run(config: &RunConfig) -> Result<Report, CliError> {
    config.validate()?;
    let report = match config.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Io(e.to_string()))?;
            pool.install(|| dispatch(config))?
        }
        None => dispatch(config)?,
    };
    if let Some(dir) = &config.out {
        write_outputs(dir, &report)?;
    }
    Ok(report)
}

fn write_outputs(dir: &Path, report: &Report) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let text = serde_json::to_string_pretty(&report.json).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(dir.join("report.json"), text + "\n").map_err(io)?;
    if let Some(csv) = &report.csv {
        std::fs::write(dir.join("series.csv"), csv).map_err(io)?;
    }
    Ok(())
}

fn dispatch(config: &RunConfig) -> Result<Report, CliError> {
    if config.command == Command::Selftest {
        return Ok(selftest::run_selftest());
    }
    let path = config.graph.as_deref().expect("validated");
    let graph = load_graph(path)?;
    match config.backend {
        Backend::Float64 => run_typed::<f64>(config, &graph),
        Backend::DoubleDouble => run_typed::<Dd>(config, &graph),
        Backend::ExactRational => run_typed::<BigRational>(config, &graph),
    }
}

fn header(config: &RunConfig, graph: &RibbonGraph) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("schema".into(), json!(SCHEMA_VERSION));
    m.insert("command".into(), json!(config.command.name()));
    m.insert("graph".into(), json!(graph.name));
    m
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn run_typed<R: Real>(config: &RunConfig, graph: &RibbonGraph) -> Result<Report, CliError> {
    let (faces, ia, prof) = analyze(graph)?;
    let p = config.p;
    let d = config.d;
    let mut out = header(config, graph);

    if config.command == Command::Analyze {
        let om = omega(&prof, p, d);
        out.insert("omega".into(), json!(om.omega));
        out.insert("profile".into(), to_json(&prof));
        out.insert("power_count".into(), to_json(&om));
        out.insert("maximal".into(), to_json(&classify_maximal(&prof, p, d)));
        let face_rows: Vec<Value> = faces
            .faces
            .iter()
            .map(|f| {
                let darts: Vec<&str> = f.darts.iter().map(|&h| graph.dart_labels[h].as_str()).collect();
                let index = match f.kind {
                    FaceKind::Unbroken { index } | FaceKind::ArtificiallyBroken { index, .. } => {
                        Some(index)
                    }
                    FaceKind::Broken => None,
                };
                json!({ "kind": to_json(&f.kind), "index": index, "legs": f.legs, "darts": darts })
            })
            .collect();
        out.insert("faces".into(), Value::Array(face_rows));
        out.insert("alpha".into(), to_json(&ia.alpha));
        out.insert("beta".into(), to_json(&ia.beta));
        if !config.singular.is_empty() {
            let ot = omega_tilde(graph, &faces, p, d, &config.singular)?;
            out.insert("omega_tilde".into(), to_json(&ot));
        }
        return Ok(Report {
            exit_code: 0,
            json: Value::Object(out),
            csv: None,
        });
    }

    let ext = config.external_indices(graph.num_legs())?;
    let engine = DivDiffEngine::<R>::new(config.smooth_family(), config.spectrum_model());
    let summation = if config.threads.is_some_and(|t| t > 1) {
        Summation::Parallel
    } else {
        Summation::Sequential
    };
    let template = AmplitudeRequest::new(graph, &faces, &ia, ext.clone(), 1)
        .restricted(config.i_r)
        .with_summation(summation);
    out.insert("backend".into(), json!(config.backend.name()));
    out.insert("external".into(), json!(ext));
    out.insert("U".into(), json!(prof.u));

    match config.command {
        Command::Eval => {
            let n = config.n.expect("validated");
            check_budget(&template, n, config.budget)?;
            let mut req = template.clone();
            req.cutoff = n;
            let start = Instant::now();
            let r = evaluate(&engine, &req)?;
            out.insert("N".into(), json!(n));
            out.insert("iR".into(), json!(config.i_r));
            out.insert("value".into(), json!(r.value.to_f64()));
            out.insert("term_count".into(), json!(r.term_count));
            out.insert("memo_hits".into(), json!(r.memo_hits));
            out.insert("memo_misses".into(), json!(r.memo_misses));
            out.insert("wall_time_s".into(), json!(start.elapsed().as_secs_f64()));
            Ok(Report {
                exit_code: 0,
                json: Value::Object(out),
                csv: None,
            })
        }
        Command::Sweep => {
            let series = sweep(&engine, &template, &config.cutoffs(), config.budget)?;
            let fit = fit_slope(&series.pairs(), None).ok();
            out.insert("series".into(), to_json(&series));
            out.insert("fit".into(), to_json(&fit));
            let csv = series_csv(&series)?;
            Ok(Report {
                exit_code: 0,
                json: Value::Object(out),
                csv: Some(csv),
            })
        }
        Command::Verify => {
            let tol = config
                .tol
                .unwrap_or(if prof.u <= 1 { 0.15 } else { 0.25 });
            let v = verify(&engine, &template, &config.cutoffs(), tol, &config.singular)?;
            let csv = series_csv(&v.series)?;
            out.insert("verdict".into(), json!(if v.pass { "PASS" } else { "FAIL" }));
            out.insert("report".into(), to_json(&v));
            Ok(Report {
                exit_code: if v.pass { 0 } else { 1 },
                json: Value::Object(out),
                csv: Some(csv),
            })
        }
        Command::Analyze | Command::Selftest => unreachable!(),
    }
}

fn check_budget(req: &AmplitudeRequest<'_>, n: u32, budget: u64) -> Result<(), CliError> {
    let u = req.faces.running_indices().len() as u32;
    let width = (n as u128 + 1).saturating_sub(req.range_start as u128);
    let terms = width.pow(u);
    if terms > budget as u128 {
        return Err(ScalingError::BudgetExceeded { n, terms }.into());
    }
    Ok(())
}

/// `N,abs_amplitude,local_slope`; the first row has no local slope.
pub fn series_csv(series: &SweepSeries) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(["N", "abs_amplitude", "local_slope"]).map_err(io)?;
    let mut prev: Option<(f64, f64)> = None;
    for pt in &series.points {
        let slope = match prev {
            Some((n0, a0)) if pt.error.is_none() && a0 > 0.0 && pt.abs_amplitude > 0.0 => {
                format!("{}", (pt.abs_amplitude / a0).ln() / (pt.n as f64 / n0).ln())
            }
            _ => String::new(),
        };
        w.write_record([pt.n.to_string(), format!("{}", pt.abs_amplitude), slope])
            .map_err(io)?;
        prev = pt.error.is_none().then_some((pt.n as f64, pt.abs_amplitude));
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}
