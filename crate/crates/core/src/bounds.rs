//! Generalization-error bounds for the Gibbs algorithm and their comparison
//! with the exact engine.

use serde::Serialize;

use crate::engine::DiscreteEngine;
use crate::error::{Error, Result};
use crate::problem::{DiscreteProblem, GibbsParams};

/// Slack allowed when checking `0 <= gen <= gamma / (2n)` in floating point.
pub const BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundParams {
    pub loss_lower: f64,
    pub loss_upper: f64,
    /// Left-tail sub-Gaussian parameter of the loss.
    pub sigma: f64,
    /// Assumed lower bound on `L(W; S) / I(W; S)`.
    pub ce: f64,
    pub delta: f64,
    pub gamma: f64,
    pub n: usize,
}

impl BoundParams {
    pub fn new(
        loss_lower: f64,
        loss_upper: f64,
        sigma: f64,
        ce: f64,
        delta: f64,
        gamma: f64,
        n: usize,
    ) -> Result<Self> {
        if !(loss_upper >= loss_lower) {
            return Err(Error::Argument(format!(
                "loss range [{loss_lower}, {loss_upper}] is empty"
            )));
        }
        if !(delta > 0.0 && delta < 4.0) {
            return Err(Error::Argument(format!("delta = {delta} outside (0, 4)")));
        }
        if !(sigma >= 0.0) || !(ce >= 0.0) {
            return Err(Error::Argument(format!(
                "sigma and C_E must be nonnegative, got {sigma} and {ce}"
            )));
        }
        if !(gamma >= 0.0) || n == 0 {
            return Err(Error::Argument(format!("need gamma >= 0 and n >= 1, got {gamma}, {n}")));
        }
        Ok(Self {
            loss_lower,
            loss_upper,
            sigma,
            ce,
            delta,
            gamma,
            n,
        })
    }
}

/// `gamma / (2n)`, valid for losses in `[0, 1]`.
pub fn bound_gamma_over_2n(gamma: f64, n: usize) -> f64 {
    gamma / (2.0 * n as f64)
}

/// `(b - a)^2 gamma / ((4 - delta) n)`, which holds for all large enough `n`.
pub fn bound_theorem6(params: &BoundParams) -> Result<f64> {
    if !(params.delta > 0.0 && params.delta < 4.0) {
        return Err(Error::Argument(format!(
            "delta = {} outside (0, 4)",
            params.delta
        )));
    }
    let range = params.loss_upper - params.loss_lower;
    Ok(range * range * params.gamma / ((4.0 - params.delta) * params.n as f64))
}

/// `2 sigma^2 gamma / ((1 + C_E) n)` for a left-tail sub-Gaussian loss.
pub fn bound_subgaussian(params: &BoundParams) -> f64 {
    2.0 * params.sigma * params.sigma * params.gamma / ((1.0 + params.ce) * params.n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundSettings {
    pub delta: f64,
    /// Defaults to `(b - a) / 2`, the sub-Gaussian parameter of a bounded loss.
    pub sigma: Option<f64>,
    pub ce: f64,
}

impl Default for BoundSettings {
    fn default() -> Self {
        Self {
            delta: 0.5,
            sigma: None,
            ce: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundRow {
    pub n: usize,
    pub gen: f64,
    pub gamma_over_2n: f64,
    pub theorem6: f64,
    pub subgaussian: f64,
    /// bound / exact gen; `None` when gen is zero.
    pub ratio_gamma_over_2n: Option<f64>,
    pub ratio_theorem6: Option<f64>,
    pub ratio_subgaussian: Option<f64>,
    pub theorem6_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsComparison {
    pub gamma: f64,
    pub loss_lower: f64,
    pub loss_upper: f64,
    pub settings: BoundSettings,
    /// Whether the `gamma / (2n)` bound applies (all losses in `[0, 1]`).
    pub unit_interval_loss: bool,
    pub rows: Vec<BoundRow>,
    /// Smallest tested `n` from which the `(4 - delta)` bound holds at every larger tested `n`.
    pub theorem6_holds_from: Option<usize>,
}

fn ratio(bound: f64, gen: f64) -> Option<f64> {
    (gen > 0.0).then(|| bound / gen)
}

/// Exact gen against every bound at each `n`.
///
/// A negative gen, or a gen above `gamma / (2n)` for a `[0, 1]` loss, is a
/// hard failure naming the offending `n`.
pub fn compare_bounds(
    problem: &DiscreteProblem,
    gamma: f64,
    n_list: &[usize],
    settings: BoundSettings,
) -> Result<BoundsComparison> {
    crate::asymptotics::check_n_list(n_list)?;
    let engine = DiscreteEngine::new(problem);
    let (a, b) = (problem.loss_min(), problem.loss_max());
    let sigma = settings.sigma.unwrap_or(0.5 * (b - a));
    let unit = problem.has_unit_interval_loss();

    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let params = BoundParams::new(a, b, sigma, settings.ce, settings.delta, gamma, n)?;
        let gen = engine.joint_measures(GibbsParams::new(gamma, n)?)?.gen;
        let g2n = bound_gamma_over_2n(gamma, n);
        if gen < -BOUND_SLACK {
            return Err(Error::BoundViolation {
                n,
                reason: format!("negative generalization error {gen:e}"),
            });
        }
        if unit && gen > g2n + BOUND_SLACK {
            return Err(Error::BoundViolation {
                n,
                reason: format!("gen {gen:e} exceeds gamma/(2n) = {g2n:e}"),
            });
        }
        let t6 = bound_theorem6(&params)?;
        let sg = bound_subgaussian(&params);
        rows.push(BoundRow {
            n,
            gen,
            gamma_over_2n: g2n,
            theorem6: t6,
            subgaussian: sg,
            ratio_gamma_over_2n: ratio(g2n, gen),
            ratio_theorem6: ratio(t6, gen),
            ratio_subgaussian: ratio(sg, gen),
            theorem6_holds: gen <= t6 + BOUND_SLACK,
        });
    }
    let theorem6_holds_from = rows
        .iter()
        .rposition(|r| !r.theorem6_holds)
        .map_or(Some(0), |i| Some(i + 1))
        .and_then(|i| rows.get(i).map(|r| r.n));
    Ok(BoundsComparison {
        gamma,
        loss_lower: a,
        loss_upper: b,
        settings,
        unit_interval_loss: unit,
        rows,
        theorem6_holds_from,
    })
}
