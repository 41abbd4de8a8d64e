//! Experiment runner: argument parsing, config files, problem files and table output.

pub mod config;
pub mod output;
pub mod run;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{load_problem, ExperimentConfig, Format, GammaSpec, Mode, ProblemSource};
pub use run::{execute, run, RunOutcome, RunReport};

use crate::error::Result;

#[derive(Debug, Parser)]
#[command(
    name = "gibbs-info",
    version,
    about = "Exact information measures and generalization error of the Gibbs algorithm"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; companion tables are written next to it. Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SharedArgs {
    /// Inverse temperature(s), comma separated.
    #[arg(long, required = true, value_delimiter = ',')]
    pub gamma: Vec<f64>,
    /// Sample sizes, comma separated and strictly increasing.
    #[arg(long = "n", required = true, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Monte-Carlo dataset pairs (0 disables the estimator).
    #[arg(long, default_value_t = 0)]
    pub samples: usize,
    /// Exit with status 2 when a claim check fails.
    #[arg(long)]
    pub strict: bool,
    /// Relative tolerance of the claim checks.
    #[arg(long, default_value_t = crate::asymptotics::DEFAULT_CLAIM_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep the coin-toss problem and check the asymptotic claims.
    CoinToss {
        #[command(flatten)]
        shared: SharedArgs,
        /// Probability that a toss lands 1.
        #[arg(long, default_value_t = 0.5)]
        p: f64,
    },
    /// Closed forms (and optionally a Monte-Carlo estimate) for Gaussian mean estimation.
    Gaussian {
        #[command(flatten)]
        shared: SharedArgs,
        #[arg(long)]
        beta: f64,
        /// Quadrature nodes for the Monte-Carlo estimator.
        #[arg(long, default_value_t = 2048)]
        grid: usize,
    },
    /// Sweep a problem read from a file and check the asymptotic claims.
    Custom {
        #[command(flatten)]
        shared: SharedArgs,
        #[arg(long)]
        problem: PathBuf,
    },
    /// Compare the exact generalization error with the bounds.
    Bounds {
        #[command(flatten)]
        shared: SharedArgs,
        /// Problem file; the coin toss with bias `--p` when omitted.
        #[arg(long)]
        problem: Option<PathBuf>,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        /// Sub-Gaussian parameter; (b - a) / 2 when omitted.
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        ce: f64,
    },
    /// Extrapolate the limit of n^power * a_n from a CSV column.
    Fit {
        /// CSV with an `n` column.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "value")]
        column: String,
        #[arg(long, default_value_t = 1.0)]
        power: f64,
        #[arg(long, default_value_t = crate::asymptotics::DEFAULT_TAIL_WINDOW)]
        window: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run an experiment described by a TOML config file.
    Run { config: PathBuf },
}

fn apply_shared(cfg: &mut ExperimentConfig, shared: SharedArgs) {
    cfg.gamma = Some(GammaSpec::Many(shared.gamma));
    cfg.n_list = shared.n;
    cfg.mc.seed = shared.seed;
    cfg.mc.num_datasets = shared.samples;
    cfg.strict = shared.strict;
    cfg.tol = shared.tol;
    cfg.output.path = shared.output.out;
    cfg.output.format = shared.output.format;
}

impl Command {
    pub fn into_config(self) -> Result<ExperimentConfig> {
        let cfg = match self {
            Command::CoinToss { shared, p } => {
                let mut cfg = ExperimentConfig::new(Mode::CoinToss);
                apply_shared(&mut cfg, shared);
                cfg.p = Some(p);
                cfg
            }
            Command::Gaussian { shared, beta, grid } => {
                let mut cfg = ExperimentConfig::new(Mode::Gaussian);
                apply_shared(&mut cfg, shared);
                cfg.beta = Some(beta);
                cfg.mc.grid_points = grid;
                cfg
            }
            Command::Custom { shared, problem } => {
                let mut cfg = ExperimentConfig::new(Mode::Custom);
                apply_shared(&mut cfg, shared);
                cfg.problem = Some(ProblemSource::Path(problem));
                cfg
            }
            Command::Bounds {
                shared,
                problem,
                p,
                delta,
                sigma,
                ce,
            } => {
                let mut cfg = ExperimentConfig::new(Mode::Bounds);
                apply_shared(&mut cfg, shared);
                cfg.problem = problem.map(ProblemSource::Path);
                cfg.p = Some(p);
                cfg.delta = Some(delta);
                cfg.sigma = sigma;
                cfg.ce = Some(ce);
                cfg
            }
            Command::Fit {
                input,
                column,
                power,
                window,
                output,
            } => {
                let mut cfg = ExperimentConfig::new(Mode::Fit);
                cfg.input = Some(input);
                cfg.column = column;
                cfg.power = power;
                cfg.window = window;
                cfg.output.path = output.out;
                cfg.output.format = output.format;
                cfg
            }
            Command::Run { config } => ExperimentConfig::from_path(&config)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
