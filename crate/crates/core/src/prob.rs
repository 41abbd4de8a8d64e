//! Probability vectors over labelled finite sets and the divergences between them.
//!
//! Values are carried in both linear and log form. Every constructor goes
//! through the log domain so that `exp(log_values) == values` holds to
//! rounding.

use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance on `sum(values) == 1` for caller-supplied distributions.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// `log(sum(exp(xs)))`, returning `-inf` for an empty slice or all `-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = xs.iter().map(|x| (x - max).exp()).sum();
    max + sum.ln()
}

/// Streaming log-sum-exp with a running maximum.
///
/// Pushing the same values in the same order always yields the same bits.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.scaled += (x - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub fn merge(&mut self, other: &LogSumExp) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if self.max == f64::NEG_INFINITY {
            *self = *other;
            return;
        }
        if other.max <= self.max {
            self.scaled += other.scaled * (other.max - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - other.max).exp() + other.scaled;
            self.max = other.max;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

/// Shift a vector of log-weights so that it log-sums to zero.
pub fn log_normalize(log_weights: &mut [f64]) {
    let lse = log_sum_exp(log_weights);
    for x in log_weights.iter_mut() {
        *x -= lse;
    }
}

/// A normalized probability vector over an ordered set of labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbVector {
    labels: Vec<String>,
    values: Vec<f64>,
    log_values: Vec<f64>,
}

impl ProbVector {
    /// Validates nonnegativity and normalization of caller-supplied probabilities.
    pub fn from_probs(labels: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if labels.len() != values.len() {
            return Err(Error::Argument(format!(
                "{} labels for {} probabilities",
                labels.len(),
                values.len()
            )));
        }
        if values.is_empty() {
            return Err(Error::Argument("empty probability vector".into()));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::Argument(format!(
                "probability for `{}` is {v}, expected a finite nonnegative number",
                labels[i]
            )));
        }
        let total: f64 = values.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Argument(format!(
                "non-normalized distribution: entries sum to {total}"
            )));
        }
        let log_values = values.iter().map(|v| v.ln()).collect();
        Ok(Self {
            labels,
            values,
            log_values,
        })
    }

    /// Builds a distribution from unnormalized log-weights.
    pub fn from_log_weights(labels: Vec<String>, mut log_weights: Vec<f64>) -> Result<Self> {
        if labels.len() != log_weights.len() {
            return Err(Error::Argument(format!(
                "{} labels for {} log-weights",
                labels.len(),
                log_weights.len()
            )));
        }
        if log_weights.iter().any(|x| x.is_nan() || *x == f64::INFINITY) {
            return Err(Error::Argument("log-weights contain NaN or +inf".into()));
        }
        if log_sum_exp(&log_weights) == f64::NEG_INFINITY {
            return Err(Error::Argument("all log-weights are -inf".into()));
        }
        log_normalize(&mut log_weights);
        let values = log_weights.iter().map(|x| x.exp()).collect();
        Ok(Self {
            labels,
            values,
            log_values: log_weights,
        })
    }

    pub fn uniform(labels: Vec<String>) -> Result<Self> {
        let k = labels.len();
        Self::from_log_weights(labels, vec![0.0; k])
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.values.iter().all(|v| *v > 0.0)
    }
}

fn check_same_labels(p: &ProbVector, q: &ProbVector) -> Result<()> {
    if p.labels != q.labels {
        return Err(Error::Argument(format!(
            "label sets differ: {:?} vs {:?}",
            p.labels, q.labels
        )));
    }
    Ok(())
}

/// `D(p || q)` in nats with `0 log 0 = 0`.
pub fn kl_divergence(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    check_same_labels(p, q)?;
    let mut total = 0.0;
    for i in 0..p.len() {
        if p.values[i] == 0.0 {
            continue;
        }
        if q.values[i] == 0.0 {
            return Err(Error::Support {
                label: p.labels[i].clone(),
                direction: "P->Q",
            });
        }
        total += p.values[i] * (p.log_values[i] - q.log_values[i]);
    }
    Ok(total)
}

/// Symmetrized KL divergence `D(p || q) + D(q || p)` in nats.
///
/// Evaluated as `sum (p - q)(log p - log q)`, each term of which is nonnegative.
pub fn skl_divergence(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    check_same_labels(p, q)?;
    let mut total = 0.0;
    for i in 0..p.len() {
        let (pv, qv) = (p.values[i], q.values[i]);
        match (pv > 0.0, qv > 0.0) {
            (false, false) => {}
            (true, false) => {
                return Err(Error::Support {
                    label: p.labels[i].clone(),
                    direction: "P->Q",
                })
            }
            (false, true) => {
                return Err(Error::Support {
                    label: p.labels[i].clone(),
                    direction: "Q->P",
                })
            }
            (true, true) => total += (pv - qv) * (p.log_values[i] - q.log_values[i]),
        }
    }
    Ok(total)
}
