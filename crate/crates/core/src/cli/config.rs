use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{DiscreteProblem, ProblemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    CoinToss,
    Gaussian,
    Custom,
    Bounds,
    Fit,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::CoinToss => "coin-toss",
            Mode::Gaussian => "gaussian",
            Mode::Custom => "custom",
            Mode::Bounds => "bounds",
            Mode::Fit => "fit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// A single inverse temperature or a list of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaSpec {
    One(f64),
    Many(Vec<f64>),
}

impl GammaSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            GammaSpec::One(g) => vec![*g],
            GammaSpec::Many(gs) => gs.clone(),
        }
    }
}

/// Either a path to a problem file or the problem written inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemSource {
    Path(PathBuf),
    Inline(ProblemSpec),
}

impl ProblemSource {
    pub fn load(&self) -> Result<DiscreteProblem> {
        match self {
            ProblemSource::Path(p) => load_problem(p),
            ProblemSource::Inline(spec) => DiscreteProblem::new(spec.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSettings {
    #[serde(default)]
    pub num_datasets: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

fn default_grid_points() -> usize {
    2048
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            num_datasets: 0,
            seed: 0,
            grid_points: default_grid_points(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSettings {
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

fn default_tol() -> f64 {
    crate::asymptotics::DEFAULT_CLAIM_TOL
}

fn default_power() -> f64 {
    1.0
}

fn default_column() -> String {
    "value".into()
}

fn default_window() -> usize {
    crate::asymptotics::DEFAULT_TAIL_WINDOW
}

/// Everything one invocation needs. Flag-driven subcommands build this too.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub gamma: Option<GammaSpec>,
    #[serde(default, rename = "n")]
    pub n_list: Vec<usize>,
    /// Coin bias `P(z = 1)`.
    pub p: Option<f64>,
    pub beta: Option<f64>,
    pub delta: Option<f64>,
    pub sigma: Option<f64>,
    pub ce: Option<f64>,
    pub problem: Option<ProblemSource>,
    #[serde(default)]
    pub mc: McSettings,
    #[serde(default)]
    pub output: OutputSettings,
    #[serde(default)]
    pub strict: bool,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// `fit` mode: table holding `n` and the sequence column.
    pub input: Option<PathBuf>,
    #[serde(default = "default_column")]
    pub column: String,
    #[serde(default = "default_power")]
    pub power: f64,
    #[serde(default = "default_window")]
    pub window: usize,
}

impl ExperimentConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            gamma: None,
            n_list: Vec::new(),
            p: None,
            beta: None,
            delta: None,
            sigma: None,
            ce: None,
            problem: None,
            mc: McSettings::default(),
            output: OutputSettings::default(),
            strict: false,
            tol: default_tol(),
            input: None,
            column: default_column(),
            power: default_power(),
            window: default_window(),
        }
    }

    /// Parses a TOML experiment file; syntax errors carry line and column.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    fn missing(&self, field: &str) -> Error {
        Error::Parse(format!(
            "config field `{field}` is required for mode {}",
            self.mode.name()
        ))
    }

    pub fn validate(&self) -> Result<()> {
        let needs_gamma = self.mode != Mode::Fit;
        match &self.gamma {
            None if needs_gamma => return Err(self.missing("gamma")),
            Some(g) if g.values().is_empty() => {
                return Err(Error::Parse("config field `gamma` is an empty list".into()))
            }
            Some(g) if g.values().iter().any(|v| !(v.is_finite() && *v >= 0.0)) => {
                return Err(Error::Parse(
                    "config field `gamma` must be finite and nonnegative".into(),
                ))
            }
            _ => {}
        }
        if needs_gamma {
            if self.n_list.is_empty() {
                return Err(self.missing("n"));
            }
            if self.n_list[0] == 0 || self.n_list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Parse(format!(
                    "config field `n` must be positive and strictly increasing, got {:?}",
                    self.n_list
                )));
            }
        }
        match self.mode {
            Mode::Gaussian if self.beta.is_none() => return Err(self.missing("beta")),
            Mode::Custom if self.problem.is_none() => return Err(self.missing("problem")),
            Mode::Fit if self.input.is_none() => return Err(self.missing("input")),
            _ => {}
        }
        if !(self.tol > 0.0) {
            return Err(Error::Parse(format!("config field `tol` must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Reads a problem file: JSON when the extension is `.json`, TOML otherwise.
pub fn load_problem(path: &Path) -> Result<DiscreteProblem> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let spec: ProblemSpec = if is_json {
        serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
    } else {
        toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
    };
    DiscreteProblem::new(spec).map_err(|e| match e {
        Error::InvalidProblem(msg) => Error::InvalidProblem(format!("{}: {msg}", path.display())),
        other => other,
    })
}
