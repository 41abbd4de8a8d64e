//! Exact and Monte-Carlo information measures governing the generalization
//! error of the Gibbs algorithm.
//!
//! * [`engine`]: exact mutual, lautum, symmetrized-KL and chi-square
//!   information for finite problems, the Jensen-gap table and the identity
//!   linking individual-sample and joint measures.
//! * [`gaussian`]: closed forms for Gaussian mean estimation, with a
//!   covariance-trace oracle.
//! * [`mc`]: Monte-Carlo-over-datasets estimators for one-dimensional problems.
//! * [`asymptotics`] and [`bounds`]: sweeps over `n`, limit extrapolation,
//!   claim checks and generalization bounds.
//! * [`cli`]: the experiment runner behind the `gibbs-info` binary.

pub mod asymptotics;
pub mod bounds;
pub mod cli;
pub mod engine;
pub mod error;
pub mod gaussian;
pub mod mc;
pub mod prob;
pub mod problem;

pub use error::{Error, Result};
pub use prob::{kl_divergence, skl_divergence, ProbVector};
pub use problem::{
    empirical_risk, population_risk, DiscreteProblem, GibbsParams, InfoReport, ProblemSpec,
};
