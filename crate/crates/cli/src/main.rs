//! `affsurf`: batch computations on affine surfaces and twisted local systems.

mod commands;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Debug, Parser)]
#[command(name = "affsurf", version, about = "Holonomy, residues and deformations of affine surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub run: RunConfig,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Absolute tolerance of the adaptive quadrature.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Worker threads for independent columns and sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct ComplexArgs {
    /// Triangulated surface JSON.
    #[arg(long, conflicts_with_all = ["genus", "n"])]
    pub complex: Option<PathBuf>,
    /// Genus of a built-in triangulation.
    #[arg(long, requires = "n")]
    pub genus: Option<usize>,
    /// Boundary count of a built-in triangulation.
    #[arg(long, requires = "genus")]
    pub n: Option<usize>,
    /// Character JSON with values on edges.
    #[arg(long, conflicts_with = "cycle_values")]
    pub character: Option<PathBuf>,
    /// JSON array of [re, im] values on the cycles of a built-in triangulation.
    #[arg(long)]
    pub cycle_values: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a surface spec.
    Validate {
        #[arg(long)]
        surface: PathBuf,
    },
    /// Holonomy and turning number of a loop, or the character on the standard loops.
    Holonomy {
        #[arg(long)]
        surface: PathBuf,
        #[arg(long)]
        r#loop: Option<PathBuf>,
    },
    /// Turning number of a loop.
    Turning {
        #[arg(long)]
        surface: PathBuf,
        #[arg(long)]
        r#loop: PathBuf,
    },
    /// Residues of the flat form at the integral poles.
    Residues {
        #[arg(long)]
        surface: PathBuf,
        /// Arc tree JSON; straight arcs from the first integral pole by default.
        #[arg(long)]
        tree: Option<PathBuf>,
    },
    /// Riemann–Roch dimensions for (g, n).
    Dims {
        #[arg(long)]
        genus: u32,
        #[arg(long)]
        n: u32,
    },
    /// Dimensions of the cohomology of the trans complex of a surface.
    TransDims {
        #[arg(long)]
        surface: PathBuf,
    },
    /// Twisted cohomology of a triangulated surface.
    Twisted {
        #[command(flatten)]
        input: ComplexArgs,
    },
    /// Hermitian cup-product pairing for a unitary character.
    Pairing {
        #[command(flatten)]
        input: ComplexArgs,
    },
    /// Jacobian rank of the holonomy (and residue) map over a family.
    Rank {
        #[arg(long)]
        family: PathBuf,
        /// Include residue rows for this arc tree.
        #[arg(long)]
        tree: Option<PathBuf>,
        /// Include residue rows with the straight arc tree.
        #[arg(long, conflicts_with = "tree")]
        residues: bool,
        /// Central-difference step.
        #[arg(long)]
        step: Option<f64>,
    },
    /// Walk along the isoresidual leaf.
    LeafWalk {
        #[arg(long)]
        surface: PathBuf,
        #[arg(long)]
        tree: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-2, allow_negative_numbers = true)]
        step: f64,
        #[arg(long, default_value_t = 1)]
        steps: usize,
    },
    /// Check that two branch orders glue at a node.
    NodeCheck {
        /// JSON array of two orders, each a number or [re, im].
        #[arg(long, allow_hyphen_values = true)]
        orders: String,
    },
}

/// Failure of a run, with its exit code.
#[derive(Debug)]
pub enum Failure {
    /// Malformed input or usage: exit 2.
    Usage(String),
    /// Domain error: exit 1.
    Domain { error: Value },
}

impl From<affsurf::Error> for Failure {
    fn from(e: affsurf::Error) -> Self {
        Failure::Domain {
            error: json!({"kind": e.kind(), "message": e.to_string()}),
        }
    }
}

fn render(report: &Value, format: Format) -> Result<String, Failure> {
    match format {
        Format::Json => Ok(output::to_json(report)),
        Format::Csv => output::to_csv(report).map_err(|e| Failure::Usage(e.to_string())),
    }
}

fn emit(run: &RunConfig, text: &str) -> Result<(), Failure> {
    match &run.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Usage(e.to_string()))
        }
    }
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    if cli.run.jobs == 0 {
        return Err(Failure::Usage("--jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.run.jobs)
        .build()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let (report, failure) = pool.install(|| commands::run(&cli.command, &cli.run))?;
    emit(&cli.run, &render(&report, cli.run.format)?)?;
    match failure {
        Some(f) => Err(f),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(message)) => {
            eprint!("{}", output::to_json(&json!({"kind": "Usage", "message": message})));
            ExitCode::from(2)
        }
        Err(Failure::Domain { error }) => {
            eprint!("{}", output::to_json(&error));
            ExitCode::from(1)
        }
    }
}
