mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num::BigRational;
use serde_json::json;

use ggk_core::markov::NormMethod;
use ggk_core::scalar::parse_rational;
use ggk_core::spectral::DEFAULT_NMAX;
use ggk_core::suite::DEFAULT_SEED;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] ggk_core::Error),
    #[error("{message}")]
    Invalid { message: String, violations: Vec<(String, String)> },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Invalid { .. } => "InvalidGroupoid",
            CliError::Io(_) => "Io",
            CliError::Json(_) | CliError::Csv(_) => "Output",
            CliError::Usage(_) => "Usage",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ggk", version, about = "Invariant Markov operators on finite p.m.p. groupoids")]
pub struct Cli {
    /// Worker threads; 0 picks the number of cores.
    #[arg(long, global = true, env = "GGK_THREADS", default_value_t = 0)]
    threads: usize,
    /// Add exact rational columns where the command supports them.
    #[arg(long, global = true)]
    exact: bool,
    /// Write the CSV here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

fn rational_arg(text: &str) -> Result<BigRational, String> {
    parse_rational(text).ok_or_else(|| format!("`{text}` is not a rational number"))
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the groupoid axioms and measure invariance.
    Validate { groupoid: PathBuf },
    /// l2 norm, operator norm and I-norm of a kernel.
    Norm {
        groupoid: PathBuf,
        kernel: PathBuf,
        #[arg(long, default_value = "exact")]
        method: NormMethod,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Return probabilities and the E-spectral radius.
    Radius {
        groupoid: PathBuf,
        kernel: PathBuf,
        /// Comma-separated unit ids; defaults to all units.
        #[arg(long)]
        set: Option<String>,
        #[arg(long, default_value_t = DEFAULT_NMAX)]
        nmax: usize,
    },
    /// Norm of the restricted operator on every invariant set.
    Kesten {
        groupoid: PathBuf,
        kernel: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Monte Carlo return probability against the exact value.
    Walk {
        groupoid: PathBuf,
        kernel: PathBuf,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        set: Option<String>,
    },
    /// The Markov operator in coordinate format.
    Coo { groupoid: PathBuf, kernel: PathBuf },
    /// Regenerate a construction table.
    Reproduce {
        #[command(subcommand)]
        target: Target,
    },
    /// Run the full invariant suite; exit 0 iff every check passes.
    Selftest {
        #[arg(long, default_value_t = 500)]
        instances: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum Target {
    /// Block norms of the unbounded union of A_delta fields.
    AppendixA {
        #[arg(long, default_value_t = 25)]
        nmax: usize,
        #[arg(long, default_value = "1/10", value_parser = rational_arg)]
        delta: BigRational,
    },
    /// The A_delta matrices on a grid of sizes and deltas.
    ADelta {
        #[arg(long, default_value_t = 50)]
        nmax: usize,
        #[arg(long, default_value = "2/5,1/10,1/100", value_delimiter = ',', value_parser = rational_arg)]
        delta: Vec<BigRational>,
    },
    /// Exact ratios of the interval example.
    AppendixB {
        #[arg(long, default_value_t = 40)]
        kmax: usize,
    },
    /// Norms of the simple random walk on free-group balls.
    FreeGroup {
        #[arg(long, default_value_t = 2)]
        gens: usize,
        #[arg(long, default_value_t = 12)]
        radius: usize,
    },
    /// Norms and radii of the preset finite groups.
    FiniteSuite,
}

fn report_error(e: &CliError) {
    let mut body = json!({"error": e.kind(), "message": e.to_string()});
    if let CliError::Invalid { violations, .. } = e {
        body["violations"] =
            violations.iter().map(|(kind, detail)| json!({"kind": kind, "detail": detail})).collect();
    }
    eprintln!("{body}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report_error(&CliError::Usage(e.to_string().trim_end().to_string()));
            return ExitCode::from(2);
        }
    };
    let threads = cli.threads;
    let result = ggk_core::walk::with_threads(threads, || commands::run(&cli))
        .map_err(CliError::from)
        .and_then(|r| r)
        .and_then(|report| {
            let bytes = report.render()?;
            match &cli.out {
                Some(path) => std::fs::write(path, bytes)?,
                None => {
                    use std::io::Write;
                    std::io::stdout().write_all(&bytes)?;
                }
            }
            Ok(report.exit_code)
        });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            report_error(&e);
            ExitCode::from(2)
        }
    }
}
