mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use oiso::{Mode, DEFAULT_TOL};

use report::Status;

#[derive(Debug, Parser)]
#[command(
    name = "oiso",
    version,
    about = "Certify and decompose order isomorphisms between finite function-space models"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Seed for every randomized screen and generator.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Random test functions per screen (command-specific default).
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Tolerance for sign, zero and residual tests in float mode.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Arithmetic: `float`, or `exact` rationals (float literals refused).
    #[arg(long, global = true, default_value = "float", value_parser = parse_mode)]
    pub mode: Mode,
    /// Also write the report to this file.
    #[arg(long, global = true, value_name = "PATH")]
    pub json_out: Option<PathBuf>,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse::<Mode>().map_err(|e| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify an operator and recover `Tf = T1 · f∘sigma`.
    Decompose { operator: PathBuf },
    /// Run the isometry, lattice and algebra screens.
    Classify { operator: PathBuf },
    /// Check the four adequacy conditions of a family.
    Adequacy { family: PathBuf },
    /// Embed a sampled space and discover its boundary points.
    Compactify {
        input: PathBuf,
        /// Operator on generator coefficients to decompose over the compactification.
        #[arg(long)]
        operator: Option<PathBuf>,
    },
    /// Computations in the clamp-expression example space.
    #[command(subcommand)]
    Example(ExampleCommand),
    /// Round-trip seeded random monomial operators.
    Fuzz {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Off-monomial noise magnitude, relative to the row weight.
        #[arg(long, default_value_t = 0.0)]
        perturbation: f64,
        /// Include every instance in the report.
        #[arg(long)]
        instances: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum ExampleCommand {
    /// Find a subinterval where an expression equals a lower-level one.
    #[command(name = "local-form", visible_alias = "lemma8")]
    LocalForm {
        #[arg(long)]
        expr: String,
        /// Interval as `a,b`.
        #[arg(long, allow_hyphen_values = true)]
        interval: String,
        #[arg(long, default_value_t = oiso::example_space::DEFAULT_DEPTH_CAP)]
        depth_cap: usize,
    },
    /// Check `|u(t)| / t² → 0` for a clamp-free expression.
    Decay {
        #[arg(long)]
        expr: String,
        #[arg(long, default_value_t = 1e6)]
        t_max: f64,
        #[arg(long, default_value_t = 601)]
        grid: usize,
    },
    /// Expression equal to 0 at `a` and 1 at `b`, with range in [0, 1].
    Witness {
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match commands::run(&cli, argv) {
        Ok((report, status)) => {
            let text = report::render(&report);
            if let Some(path) = &cli.global.json_out {
                if let Err(e) = std::fs::write(path, &text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            }
            // A closed pipe downstream is not an error of ours.
            let _ = writeln!(std::io::stdout(), "{text}");
            ExitCode::from(match status {
                Status::Accepted => 0,
                Status::Rejected => 2,
            })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
