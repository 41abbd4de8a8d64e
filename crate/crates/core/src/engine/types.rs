//! Multinomial type classes: datasets collapsed to their label counts.

use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};
use crate::prob::ProbVector;

/// Largest number of type classes the engine will enumerate by default.
pub const DEFAULT_TYPE_CEILING: u128 = 10_000_000;

/// Count vector over instance labels together with its log-probability under `mu^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeClass {
    counts: Vec<u32>,
    log_weight: f64,
}

impl TypeClass {
    /// A bare count vector with no associated weight (`log_weight = 0`).
    pub fn from_counts(counts: Vec<u32>) -> Self {
        Self {
            counts,
            log_weight: 0.0,
        }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn log_weight(&self) -> f64 {
        self.log_weight
    }

    pub fn n(&self) -> usize {
        self.counts.iter().map(|c| *c as usize).sum()
    }
}

/// Number of count vectors of total `n` over `k` labels, `C(n + k - 1, k - 1)`.
/// Saturates at `u128::MAX`.
pub fn num_types(n: usize, k: usize) -> u128 {
    if k == 0 {
        return 0;
    }
    let mut acc: u128 = 1;
    // C(n + r, r) built up as prod_{j=1..r} (n + j) / j, exact at every step
    for j in 1..k as u128 {
        acc = match acc.checked_mul(n as u128 + j) {
            Some(v) => v / j,
            None => return u128::MAX,
        };
    }
    acc
}

/// Iterator over every count vector of a fixed total, in reverse lexicographic order.
#[derive(Debug, Clone)]
pub struct TypeEnumerator {
    counts: Vec<u32>,
    ln_fact: Vec<f64>,
    ln_mu: Vec<f64>,
    done: bool,
}

impl TypeEnumerator {
    fn new(n: usize, mu: &ProbVector) -> Self {
        let k = mu.len();
        let mut counts = vec![0u32; k];
        counts[0] = n as u32;
        Self {
            counts,
            ln_fact: (0..=n as u64).map(ln_factorial).collect(),
            ln_mu: mu.log_values().to_vec(),
            done: false,
        }
    }

    fn log_weight(&self) -> f64 {
        let n: usize = self.counts.iter().map(|c| *c as usize).sum();
        let mut lw = self.ln_fact[n];
        for (c, lm) in self.counts.iter().zip(&self.ln_mu) {
            if *c > 0 {
                if *lm == f64::NEG_INFINITY {
                    return f64::NEG_INFINITY;
                }
                lw += *c as f64 * lm - self.ln_fact[*c as usize];
            }
        }
        lw
    }

    fn advance(&mut self) {
        let k = self.counts.len();
        match (0..k.saturating_sub(1)).rev().find(|&i| self.counts[i] > 0) {
            None => self.done = true,
            Some(i) => {
                let tail = self.counts[k - 1];
                self.counts[k - 1] = 0;
                self.counts[i] -= 1;
                self.counts[i + 1] = tail + 1;
            }
        }
    }
}

impl Iterator for TypeEnumerator {
    type Item = TypeClass;

    fn next(&mut self) -> Option<TypeClass> {
        if self.done {
            return None;
        }
        let item = TypeClass {
            counts: self.counts.clone(),
            log_weight: self.log_weight(),
        };
        self.advance();
        Some(item)
    }
}

/// Enumerates every type class of size `n >= 1` under `mu`, refusing when the
/// count exceeds `ceiling`.
pub fn enumerate_types_with_ceiling(
    n: usize,
    mu: &ProbVector,
    ceiling: u128,
) -> Result<TypeEnumerator> {
    if n == 0 {
        return Err(Error::Argument("type enumeration needs n >= 1".into()));
    }
    enumerate_types_unchecked(n, mu, ceiling)
}

/// Enumerates every type class of size `n >= 1` under the default ceiling.
pub fn enumerate_types(n: usize, mu: &ProbVector) -> Result<TypeEnumerator> {
    enumerate_types_with_ceiling(n, mu, DEFAULT_TYPE_CEILING)
}

/// Like [`enumerate_types_with_ceiling`] but admits `n = 0` (one empty type of weight 1).
pub(crate) fn enumerate_types_unchecked(
    n: usize,
    mu: &ProbVector,
    ceiling: u128,
) -> Result<TypeEnumerator> {
    if n > u32::MAX as usize {
        return Err(Error::Argument(format!("n = {n} is too large")));
    }
    let required = num_types(n, mu.len());
    if required > ceiling {
        return Err(Error::Resource {
            what: format!("type enumeration at n = {n} over {} labels", mu.len()),
            required,
            ceiling,
        });
    }
    Ok(TypeEnumerator::new(n, mu))
}
