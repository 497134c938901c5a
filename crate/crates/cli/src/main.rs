mod commands;
mod fuzz;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use abscompat::Tolerances;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::{code, CliResult, Failure};

#[derive(Parser)]
#[command(name = "abscompat", version, about = "Check, decompose and generate absolutely compatible pairs")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct GlobalOpts {
    /// Hermiticity tolerance [default: 1e-10].
    #[arg(long, global = true)]
    tol_herm: Option<f64>,
    /// Spectral tolerance for positivity and strictness [default: 1e-9].
    #[arg(long, global = true)]
    tol_spec: Option<f64>,
    /// Compatibility residual threshold [default: 1e-8].
    #[arg(long, global = true)]
    tol_compat: Option<f64>,
    /// Canonical reconstruction threshold [default: 1e-7].
    #[arg(long, global = true)]
    tol_canon: Option<f64>,
    /// Geometry residual threshold [default: 1e-9].
    #[arg(long, global = true)]
    tol_geo: Option<f64>,
    /// Base seed for generators and fuzz campaigns.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Trials per fuzz campaign.
    #[arg(long, global = true, default_value_t = 100)]
    pub trials: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file (or directory for `gen`); stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl GlobalOpts {
    pub fn tolerances(&self) -> CliResult<Tolerances> {
        let mut t = Tolerances::default();
        if let Some(v) = self.tol_herm {
            t.herm = v;
        }
        if let Some(v) = self.tol_spec {
            t.spec = v;
        }
        if let Some(v) = self.tol_compat {
            t.compat = v;
        }
        if let Some(v) = self.tol_canon {
            t.canon = v;
        }
        if let Some(v) = self.tol_geo {
            t.geo = v;
        }
        t.validate().map_err(Failure::params)?;
        Ok(t)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Test whether two effects are absolutely compatible.
    Check { a: PathBuf, b: PathBuf },
    /// Canonical form of a strict compatible pair.
    Decompose {
        a: PathBuf,
        b: PathBuf,
        /// Also write the five-block decomposition to this file.
        #[arg(long)]
        blocks: Option<PathBuf>,
    },
    /// Generate random instances.
    Gen(commands::GenArgs),
    /// Bloch-ball geometry of a 2×2 pair.
    Geometry(commands::GeometryArgs),
    /// Run a seeded property campaign: compat, canonical, m2, geometry or equivalences.
    Fuzz { suite: String },
}

fn run(cli: Cli) -> CliResult<u8> {
    let g = &cli.global;
    let tol = g.tolerances()?;
    match &cli.command {
        Command::Check { a, b } => commands::check(g, &tol, a, b),
        Command::Decompose { a, b, blocks } => commands::decompose(g, &tol, a, b, blocks.as_deref()),
        Command::Gen(args) => commands::gen(g, &tol, args),
        Command::Geometry(args) => commands::geometry(g, &tol, args),
        Command::Fuzz { suite } => fuzz::run(g, &tol, suite),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { code::USAGE } else { code::OK });
        }
    };
    match run(cli) {
        Ok(c) => ExitCode::from(c),
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
