use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ncpoly::Tolerance64;

mod commands;
mod demos;

/// Verify POVMs, dilations, kernel derivatives and quantum polymorphisms.
///
/// JSON reports go to stdout and a short summary to stderr. Exit status is 0
/// when every check passes, 1 on a violation and 2 on usage or parse errors.
#[derive(Debug, Parser)]
#[command(name = "ncpoly", version)]
struct Cli {
    /// Absolute and relative tolerance for every check.
    #[arg(long, global = true, env = "NCPOLY_TOL", value_parser = parse_tol)]
    tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the axioms of a POVM, PVM, kernel, density operator or measure file.
    Validate { path: PathBuf },
    /// Build a Naimark dilation of a POVM file.
    Dilate {
        path: PathBuf,
        /// Use rank-revealing blocks instead of full square roots.
        #[arg(long)]
        compress: bool,
        /// Write the dilation JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Disintegrate a POVM on a product space along one coordinate.
    Rn {
        path: PathBuf,
        /// Conditioning event as comma separated labels, `*` for the whole
        /// factor or `{}` for the empty event.
        #[arg(long = "B", alias = "b", allow_hyphen_values = true)]
        event: String,
        /// `right` conditions on an event of the second factor, `left` on the first.
        #[arg(long, value_enum, default_value_t = Side::Right)]
        side: Side,
    },
    /// Run the seeded property suite.
    Suite {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
        max_atoms: u64,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
        max_dim: u64,
        /// Only run properties whose name contains this text (repeatable).
        #[arg(long)]
        only: Vec<String>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a worked example end to end.
    Demo { name: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Side {
    Left,
    Right,
}

fn parse_tol(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err("tolerance must be a positive finite number".into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = match cli.tol {
        Some(v) => Tolerance64::uniform(v).expect("validated by the parser"),
        None => Tolerance64::default(),
    };
    let status = match cli.command {
        Command::Validate { path } => commands::validate(&path, &tol),
        Command::Dilate { path, compress, out } => commands::dilate(&path, compress, out.as_deref(), &tol),
        Command::Rn { path, event, side } => commands::rn(&path, &event, side, &tol),
        Command::Suite { seed, trials, max_atoms, max_dim, only, out } => {
            let cfg = ncpoly::suite::SuiteConfig {
                seed,
                trials: trials as usize,
                max_atoms: max_atoms as usize,
                max_dim: max_dim as usize,
                tol,
                only,
            };
            commands::suite(&cfg, out.as_deref())
        }
        Command::Demo { name } => demos::run(&name, &tol),
    };
    ExitCode::from(status.code())
}
