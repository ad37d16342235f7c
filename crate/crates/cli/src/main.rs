//! `gtpb`: frequency spectra, complexity and generalization bounds for
//! data-encoding quantum models, driven by JSON configs.

mod commands;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use commands::{Output, Table};

#[derive(Debug)]
pub enum CliError {
    Core(gtpb_core::Error),
    Config(String),
    Io(String),
}

impl From<gtpb_core::Error> for CliError {
    fn from(e: gtpb_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Config(m) => write!(f, "invalid config: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use gtpb_core::Error::*;
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                Validation(_) | Capability(_) => 2,
                Resource(_) => 3,
                Numeric { .. } | Domain(_) => 4,
                Internal(_) => 5,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Frequency spectrum of an encoding strategy and its closed-form bounds.
    Omega,
    /// Generalization bounds and sample sizes for an encoding family.
    Bounds,
    /// Monte Carlo Rademacher complexity against its upper bounds.
    Rademacher,
    /// Build an ε-net and measure its covering radius.
    CoverCheck,
    /// Simulate a circuit and extract its Fourier coefficients.
    Simulate,
    /// Structural risk minimization over nested model classes.
    Srm,
    /// Log-log scaling of |Ω| for families of repeated encodings.
    Table1,
}

#[derive(Debug, Parser)]
#[command(name = "gtpb", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
}

fn command_name(c: Command) -> &'static str {
    match c {
        Command::Omega => "omega",
        Command::Bounds => "bounds",
        Command::Rademacher => "rademacher",
        Command::CoverCheck => "cover-check",
        Command::Simulate => "simulate",
        Command::Srm => "srm",
        Command::Table1 => "table1",
    }
}

fn run_command(cmd: Command, raw: Value, seed: Option<u64>) -> Result<Output, CliError> {
    match cmd {
        Command::Omega => commands::omega(raw),
        Command::Bounds => commands::bounds(raw),
        Command::Rademacher => commands::rademacher(raw, seed),
        Command::CoverCheck => commands::cover_check(raw, seed),
        Command::Simulate => commands::simulate(raw, seed),
        Command::Srm => commands::srm(raw, seed),
        Command::Table1 => commands::table1(raw),
    }
}

fn read_config(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
    if !v.is_object() {
        return Err(CliError::Config("config must be a JSON object".into()));
    }
    Ok(v)
}

fn render_csv(t: &Table) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(&t.headers).map_err(io)?;
    for r in &t.rows {
        w.write_record(r).map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let raw = read_config(path)?;
    let out = run_command(cli.command, raw, cli.seed)?;
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let report = json!({
        "command": command_name(cli.command),
        "timestamp": timestamp,
        "config": out.resolved,
        "result": out.result,
    });
    let json_bytes = {
        let mut s = serde_json::to_vec_pretty(&report).expect("reports serialize");
        s.push(b'\n');
        s
    };
    match cli.format {
        Format::Json => emit(cli.out.as_deref(), &json_bytes),
        Format::Csv => {
            emit(cli.out.as_deref(), &render_csv(&out.table)?)?;
            // The table alone carries no provenance; keep the full report next to it.
            if let Some(p) = &cli.out {
                let mut side = p.clone().into_os_string();
                side.push(".json");
                emit(Some(Path::new(&side)), &json_bytes)?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gtpb {}: {e}", command_name(cli.command));
            ExitCode::from(e.exit_code())
        }
    }
}
