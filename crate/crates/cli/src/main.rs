//! `hetmed` command-line front end.
//!
//! Exit codes: 0 success, 1 verification or coverage failure, 2 I/O error,
//! 3 invalid input, 4 missing required data.

mod bounds;
mod error;
mod estimate;
mod manifest;
mod simulate;
mod verify;

use clap::{Parser, Subcommand, ValueEnum};
use error::{CliError, CliResult};
use hetmed::verification::ProbabilityMode;
use hetmed::Family;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(
    name = "hetmed",
    version,
    about = "Median estimation for heteroscedastic data: estimates, bounds, verification and simulation"
)]
struct Cli {
    /// Worker threads for simulations (defaults to all cores)
    #[arg(long, global = true, env = "HETMED_THREADS")]
    threads: Option<usize>,

    /// Emit JSON instead of tables
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mean, median and (with a sigma column) oracle MLE of a CSV sample
    Estimate {
        /// CSV with header `value` or `value,sigma`
        input: PathBuf,
        /// Require the oracle MLE (needs a sigma column)
        #[arg(long)]
        mle: bool,
    },
    /// Deviation bounds for a variance profile
    Bounds {
        /// File with one sigma per line
        #[arg(long, conflicts_with = "profile", required_unless_present = "profile")]
        sigmas: Option<PathBuf>,
        /// Profile spec such as `constant:1,n=1000` or `geometric:1,1.2,n=500`
        #[arg(long)]
        profile: Option<String>,
        #[arg(long)]
        delta: f64,
        /// Tail parameter for the Devroye et al. bound; row is inapplicable without it
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value = "gaussian", value_parser = parse_family)]
        family: Family,
    },
    /// Monte Carlo coverage and estimator comparison from a JSON config
    Simulate {
        config: PathBuf,
        /// Directory for coverage.csv, quantiles.csv and manifest.json
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Exact and randomized verification suites
    Verify {
        #[command(subcommand)]
        suite: Suite,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PMode {
    Half,
    Random,
}

#[derive(Debug, Subcommand)]
enum Suite {
    /// Exact Poisson-binomial anticoncentration check
    Lemma1 {
        #[arg(long, value_delimiter = ',', default_value = "20,40,60,100,200")]
        n_list: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.25")]
        delta_list: Vec<f64>,
        #[arg(long, value_enum, default_value = "half")]
        p_mode: PMode,
        /// Random probability vectors per (n, delta) with --p-mode random
        #[arg(long, default_value_t = 50)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Median versus counting-statistic equivalence
    Lemma2 {
        #[arg(long, default_value_t = 100_000)]
        cases: usize,
        #[arg(long, default_value_t = 31)]
        max_n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Exceedance probabilities stay in [1/4, 3/4] below (sqrt(2 pi)/4) sigma_1
    Cor2 {
        #[arg(long, default_value_t = 1000)]
        grid: usize,
        /// Number of random profiles
        #[arg(long, default_value_t = 100)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Trimmed median bound shape versus the mean deviation scale
    Dominance {
        #[arg(long, default_value_t = 10_000)]
        cases: usize,
        #[arg(long, default_value_t = 2000)]
        max_n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: hetmed::Error| e.to_string())
}

/// Ok(true) when the command's checks passed.
fn dispatch(cli: &Cli) -> CliResult<bool> {
    let json = cli.json;
    match &cli.command {
        Command::Estimate { input, mle } => estimate::run(input, *mle, json).map(|()| true),
        Command::Bounds {
            sigmas,
            profile,
            delta,
            beta,
            family,
        } => {
            let args = bounds::BoundsArgs {
                sigmas: sigmas.as_deref(),
                profile: profile.as_deref(),
                delta: *delta,
                beta: *beta,
                family: *family,
            };
            bounds::run(&args, json).map(|()| true)
        }
        Command::Simulate { config, out } => {
            simulate::run(config, out, json).map(|violated| !violated)
        }
        Command::Verify { suite } => match suite {
            Suite::Lemma1 {
                n_list,
                delta_list,
                p_mode,
                cases,
                seed,
            } => {
                let mode = match p_mode {
                    PMode::Half => ProbabilityMode::Half,
                    PMode::Random => ProbabilityMode::Random { draws: *cases },
                };
                verify::lemma1(n_list, delta_list, mode, *seed, json)
            }
            Suite::Lemma2 { cases, max_n, seed } => verify::lemma2(*cases, *max_n, *seed, json),
            Suite::Cor2 { grid, cases, seed } => verify::corollary2(*cases, *grid, *seed, json),
            Suite::Dominance { cases, max_n, seed } => {
                verify::dominance(*cases, *max_n, *seed, json)
            }
        },
    }
}

fn run(cli: &Cli) -> CliResult<bool> {
    match cli.threads {
        None => dispatch(cli),
        Some(0) => Err(CliError::Input("--threads must be at least 1".into())),
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Input(format!("cannot start thread pool: {e}")))?
            .install(|| dispatch(cli)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
