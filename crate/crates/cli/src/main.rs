use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use ribbon_cli::{run, CliError, Command, FamilyKind, RunConfig};
use ribbon_core::spectra::SpectrumModel;
use ribbon_core::Backend;

#[derive(Parser)]
#[command(name = "ribbonpc", version, about = "Power counting for ribbon-graph amplitudes")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Faces, index numbers, profile and predicted orders.
    Analyze(Opts),
    /// Amplitude at one cutoff.
    Eval(Opts),
    /// Amplitudes over a list of cutoffs, with a slope fit.
    Sweep(Opts),
    /// Sweep, fit and compare the slope with the predicted order.
    Verify(Opts),
    /// Identity and oracle checks on the built-in corpus.
    Selftest(Opts),
}

#[derive(Args, Default)]
struct Opts {
    /// TOML file with run settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    graph: Option<PathBuf>,
    /// inverse_power, regularized_power or polynomial.
    #[arg(long)]
    family: Option<FamilyKind>,
    #[arg(long)]
    p: Option<f64>,
    /// Polynomial coefficients, lowest degree first.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    coeffs: Option<Vec<f64>>,
    /// Use the alternating-sign spectrum.
    #[arg(long)]
    signed: bool,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    epsilon: Option<f64>,
    /// Spectrum index per leg, e.g. 2,2.
    #[arg(long, value_delimiter = ',')]
    ext: Option<Vec<u32>>,
    /// Legs carrying the zero mode, e.g. 2.
    #[arg(long, value_delimiter = ',')]
    singular: Option<Vec<usize>>,
    #[arg(long = "N")]
    n: Option<u32>,
    #[arg(long = "N-list", value_delimiter = ',')]
    n_list: Option<Vec<u32>>,
    #[arg(long = "iR")]
    i_r: Option<u32>,
    /// float64, double-double or exact-rational.
    #[arg(long)]
    backend: Option<Backend>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Directory for report.json and series.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn build_config(command: Command, o: Opts) -> Result<RunConfig, CliError> {
    let mut c = match &o.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
            RunConfig::from_toml(&text)?
        }
        None => RunConfig::default(),
    };
    c.command = command;
    macro_rules! set {
        ($field:ident, $value:expr) => {
            if let Some(v) = $value {
                c.$field = v;
            }
        };
    }
    set!(family, o.family);
    set!(p, o.p);
    set!(coeffs, o.coeffs);
    set!(d, o.d);
    set!(c, o.c);
    set!(epsilon, o.epsilon);
    set!(ext, o.ext);
    set!(singular, o.singular);
    set!(n_list, o.n_list);
    set!(i_r, o.i_r);
    set!(backend, o.backend);
    if o.graph.is_some() {
        c.graph = o.graph;
    }
    if o.n.is_some() {
        c.n = o.n;
    }
    if o.tol.is_some() {
        c.tol = o.tol;
    }
    if o.threads.is_some() {
        c.threads = o.threads;
    }
    if o.out.is_some() {
        c.out = o.out;
    }
    if o.signed {
        c.spectrum = SpectrumModel::SignedPower;
    }
    Ok(c)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, opts) = match cli.command {
        Sub::Analyze(o) => (Command::Analyze, o),
        Sub::Eval(o) => (Command::Eval, o),
        Sub::Sweep(o) => (Command::Sweep, o),
        Sub::Verify(o) => (Command::Verify, o),
        Sub::Selftest(o) => (Command::Selftest, o),
    };
    let result = build_config(command, opts).and_then(|c| run(&c));
    match result {
        Ok(report) => match print_report(&report.json) {
            Ok(()) => ExitCode::from(report.exit_code as u8),
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn print_report(v: &serde_json::Value) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(v).context("serializing report")?;
    println!("{text}");
    Ok(())
}
