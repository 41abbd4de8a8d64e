//! Exact information measures for finite problems by type-class enumeration.
//!
//! The free functions below use the default resource ceiling; build a
//! [`DiscreteEngine`] directly to change it.

mod jensen;
mod measures;
mod types;

pub use jensen::{JensenGapTable, Theorem1Check};
pub use measures::{DiscreteEngine, LimitingPosterior};
pub use types::{
    enumerate_types, enumerate_types_with_ceiling, num_types, TypeClass, TypeEnumerator,
    DEFAULT_TYPE_CEILING,
};

use crate::error::Result;
use crate::prob::ProbVector;
use crate::problem::{DiscreteProblem, GibbsParams, InfoReport};

pub fn gibbs_posterior(
    problem: &DiscreteProblem,
    params: GibbsParams,
    t: &TypeClass,
) -> Result<ProbVector> {
    DiscreteEngine::new(problem).gibbs_posterior(params, t)
}

pub fn limiting_posterior(problem: &DiscreteProblem, gamma: f64) -> Result<LimitingPosterior> {
    DiscreteEngine::new(problem).limiting_posterior(gamma)
}

pub fn joint_measures(problem: &DiscreteProblem, params: GibbsParams) -> Result<InfoReport> {
    DiscreteEngine::new(problem).joint_measures(params)
}

pub fn individual_measures(problem: &DiscreteProblem, params: GibbsParams) -> Result<InfoReport> {
    DiscreteEngine::new(problem).individual_measures(params)
}

pub fn jensen_gap_table(problem: &DiscreteProblem, params: GibbsParams) -> Result<JensenGapTable> {
    DiscreteEngine::new(problem).jensen_gap_table(params)
}

pub fn verify_theorem1(problem: &DiscreteProblem, params: GibbsParams) -> Result<f64> {
    DiscreteEngine::new(problem).verify_theorem1(params)
}

pub fn asymptotic_constant(problem: &DiscreteProblem, gamma: f64) -> Result<f64> {
    DiscreteEngine::new(problem).asymptotic_constant(gamma)
}
