use rayon::prelude::*;
use serde::Serialize;

use super::types::{enumerate_types_unchecked, TypeClass, DEFAULT_TYPE_CEILING};
use crate::error::{Error, Result};
use crate::prob::{log_normalize, LogSumExp, ProbVector};
use crate::problem::{population_risk, weighted_loss, DiscreteProblem, GibbsParams, InfoReport};

const CHUNK: usize = 2048;

/// Gibbs distribution built from the population risk, the `n -> inf` law of `W`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitingPosterior {
    pub dist: ProbVector,
}

/// Exact information-measure engine for a finite problem.
///
/// Datasets enter only through their type class, so all expectations over
/// `mu^n` are finite sums over count vectors.
#[derive(Debug, Clone, Copy)]
pub struct DiscreteEngine<'a> {
    problem: &'a DiscreteProblem,
    ceiling: u128,
}

/// Type table flattened for repeated passes: counts in row-major `[t][z]`.
pub(crate) struct TypeTable {
    pub counts: Vec<u32>,
    pub log_weights: Vec<f64>,
    pub k: usize,
}

impl TypeTable {
    pub fn len(&self) -> usize {
        self.log_weights.len()
    }

    pub fn counts(&self, t: usize) -> &[u32] {
        &self.counts[t * self.k..(t + 1) * self.k]
    }
}

/// Sums per-chunk partial results in chunk order, so the result does not
/// depend on how rayon schedules the chunks.
fn ordered_sum<const N: usize>(parts: Vec<[f64; N]>) -> [f64; N] {
    parts.into_iter().fold([0.0; N], |mut acc, p| {
        for (a, v) in acc.iter_mut().zip(p) {
            *a += v;
        }
        acc
    })
}

impl<'a> DiscreteEngine<'a> {
    pub fn new(problem: &'a DiscreteProblem) -> Self {
        Self {
            problem,
            ceiling: DEFAULT_TYPE_CEILING,
        }
    }

    pub fn with_ceiling(mut self, ceiling: u128) -> Self {
        self.ceiling = ceiling;
        self
    }

    pub fn problem(&self) -> &DiscreteProblem {
        self.problem
    }

    pub(crate) fn type_table(&self, n: usize) -> Result<TypeTable> {
        let k = self.problem.num_instances();
        let iter = enumerate_types_unchecked(n, self.problem.mu(), self.ceiling)?;
        let mut counts = Vec::new();
        let mut log_weights = Vec::new();
        for t in iter.filter(|t| t.log_weight() > f64::NEG_INFINITY) {
            counts.extend_from_slice(t.counts());
            log_weights.push(t.log_weight());
        }
        Ok(TypeTable {
            counts,
            log_weights,
            k,
        })
    }

    /// Normalized log-posterior for the dataset with the given counts plus an
    /// optional extra sample, written into `out`.
    pub(crate) fn log_posterior_into(
        &self,
        gamma: f64,
        n: usize,
        counts: &[u32],
        extra: Option<usize>,
        out: &mut [f64],
    ) {
        let prior = self.problem.prior().log_values();
        let inv_n = 1.0 / n as f64;
        for (w, slot) in out.iter_mut().enumerate() {
            let row = self.problem.loss_row(w);
            let mut total = weighted_loss(row, counts);
            if let Some(z) = extra {
                total += row[z];
            }
            *slot = prior[w] - gamma * total * inv_n;
        }
        log_normalize(out);
    }

    /// `P_{W|S}` for a dataset of type `t`.
    pub fn gibbs_posterior(&self, params: GibbsParams, t: &TypeClass) -> Result<ProbVector> {
        if t.counts().len() != self.problem.num_instances() {
            return Err(Error::Argument(format!(
                "type has {} labels, problem has {}",
                t.counts().len(),
                self.problem.num_instances()
            )));
        }
        if t.n() != params.n() {
            return Err(Error::Argument(format!(
                "type sums to {} but n = {}",
                t.n(),
                params.n()
            )));
        }
        let mut out = vec![0.0; self.problem.num_hypotheses()];
        self.log_posterior_into(params.gamma(), params.n(), t.counts(), None, &mut out);
        ProbVector::from_log_weights(self.problem.hypothesis_labels().to_vec(), out)
    }

    pub fn limiting_posterior(&self, gamma: f64) -> Result<LimitingPosterior> {
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::Argument(format!(
                "gamma must be finite and nonnegative, got {gamma}"
            )));
        }
        let prior = self.problem.prior().log_values();
        let logits = (0..self.problem.num_hypotheses())
            .map(|w| Ok(prior[w] - gamma * population_risk(self.problem, w)?))
            .collect::<Result<Vec<f64>>>()?;
        Ok(LimitingPosterior {
            dist: ProbVector::from_log_weights(self.problem.hypothesis_labels().to_vec(), logits)?,
        })
    }

    /// Log-posteriors for every type of size `n`, flattened `[t][w]`.
    fn all_log_posteriors(&self, gamma: f64, n: usize, table: &TypeTable) -> Vec<f64> {
        let nw = self.problem.num_hypotheses();
        let mut out = vec![0.0; table.len() * nw];
        out.par_chunks_mut(nw)
            .enumerate()
            .for_each(|(t, slot)| self.log_posterior_into(gamma, n, table.counts(t), None, slot));
        out
    }

    /// Log of the marginal `P_W` together with the per-type log-posteriors.
    fn joint_marginal(&self, gamma: f64, n: usize, table: &TypeTable) -> (Vec<f64>, Vec<f64>) {
        let nw = self.problem.num_hypotheses();
        let log_post = self.all_log_posteriors(gamma, n, table);
        let partials: Vec<Vec<LogSumExp>> = log_post
            .par_chunks(nw * CHUNK)
            .enumerate()
            .map(|(c, block)| {
                let mut acc = vec![LogSumExp::new(); nw];
                for (j, lp) in block.chunks(nw).enumerate() {
                    let lw = table.log_weights[c * CHUNK + j];
                    for w in 0..nw {
                        acc[w].push(lw + lp[w]);
                    }
                }
                acc
            })
            .collect();
        let mut total = vec![LogSumExp::new(); nw];
        for part in &partials {
            for (t, p) in total.iter_mut().zip(part) {
                t.merge(p);
            }
        }
        let mut log_marginal: Vec<f64> = total.iter().map(|a| a.value()).collect();
        // remove rounding drift so downstream divergences see a normalized P_W
        log_normalize(&mut log_marginal);
        (log_marginal, log_post)
    }

    /// Marginal law of the learned hypothesis, `P_W = E_S[P_{W|S}]`.
    pub fn marginal(&self, params: GibbsParams) -> Result<ProbVector> {
        let table = self.type_table(params.n())?;
        let (lm, _) = self.joint_marginal(params.gamma(), params.n(), &table);
        ProbVector::from_log_weights(self.problem.hypothesis_labels().to_vec(), lm)
    }

    /// Measures for the pair `(W; S)`.
    pub fn joint_measures(&self, params: GibbsParams) -> Result<InfoReport> {
        let (gamma, n) = (params.gamma(), params.n());
        let table = self.type_table(n)?;
        if gamma == 0.0 {
            return Ok(InfoReport::zero(n, gamma));
        }
        let nw = self.problem.num_hypotheses();
        let (lm, log_post) = self.joint_marginal(gamma, n, &table);
        let marginal: Vec<f64> = lm.iter().map(|x| x.exp()).collect();
        let inv_n = 1.0 / n as f64;

        // [mutual, lautum, skl, chi2, gen]
        let parts: Vec<[f64; 5]> = log_post
            .par_chunks(nw * CHUNK)
            .enumerate()
            .map(|(c, block)| {
                let mut acc = [0.0; 5];
                for (j, lp) in block.chunks(nw).enumerate() {
                    let t = c * CHUNK + j;
                    let weight = table.log_weights[t].exp();
                    let counts = table.counts(t);
                    let mut row = [0.0; 5];
                    for w in 0..nw {
                        let p = lp[w].exp();
                        let q = marginal[w];
                        let log_ratio = lp[w] - lm[w];
                        row[0] += p * log_ratio;
                        row[1] -= q * log_ratio;
                        row[2] += (p - q) * log_ratio;
                        row[3] += (p - q) * (p - q) / q;
                        let risk = weighted_loss(self.problem.loss_row(w), counts) * inv_n;
                        row[4] += (q - p) * risk;
                    }
                    for (a, r) in acc.iter_mut().zip(row) {
                        *a += weight * r;
                    }
                }
                acc
            })
            .collect();
        let [mutual, lautum, skl, chi2, gen] = ordered_sum(parts);
        Ok(InfoReport {
            n,
            gamma,
            mutual,
            lautum,
            skl,
            chi2,
            gen,
        })
    }

    /// `log P_{W|Z_i = z}(w)` as `[z][w]`: the posterior averaged over the
    /// remaining `n - 1` samples, from the size-`(n-1)` table shifted by one count.
    pub(crate) fn log_conditionals(
        &self,
        gamma: f64,
        n: usize,
        table: &TypeTable,
    ) -> Vec<Vec<f64>> {
        let nw = self.problem.num_hypotheses();
        (0..self.problem.num_instances())
            .map(|z| {
                let partials: Vec<Vec<LogSumExp>> = (0..table.len())
                    .into_par_iter()
                    .chunks(CHUNK)
                    .map(|ts| {
                        let mut acc = vec![LogSumExp::new(); nw];
                        let mut lp = vec![0.0; nw];
                        for t in ts {
                            self.log_posterior_into(gamma, n, table.counts(t), Some(z), &mut lp);
                            let lw = table.log_weights[t];
                            for w in 0..nw {
                                acc[w].push(lw + lp[w]);
                            }
                        }
                        acc
                    })
                    .collect();
                let mut total = vec![LogSumExp::new(); nw];
                for part in &partials {
                    for (t, p) in total.iter_mut().zip(part) {
                        t.merge(p);
                    }
                }
                let mut out: Vec<f64> = total.iter().map(|a| a.value()).collect();
                log_normalize(&mut out);
                out
            })
            .collect()
    }

    /// Measures for the pair `(W; Z_i)`, identical for every `i`.
    pub fn individual_measures(&self, params: GibbsParams) -> Result<InfoReport> {
        let (gamma, n) = (params.gamma(), params.n());
        let table = self.type_table(n - 1)?;
        if gamma == 0.0 {
            return Ok(InfoReport::zero(n, gamma));
        }
        if n == 1 {
            return self.joint_measures(params);
        }
        let cond = self.log_conditionals(gamma, n, &table);
        Ok(self.pair_report(n, gamma, &cond))
    }

    fn pair_report(&self, n: usize, gamma: f64, cond: &[Vec<f64>]) -> InfoReport {
        let nw = self.problem.num_hypotheses();
        let mu = self.problem.mu();
        let mut lm = vec![0.0; nw];
        for (w, slot) in lm.iter_mut().enumerate() {
            let mut acc = LogSumExp::new();
            for (z, lc) in cond.iter().enumerate() {
                acc.push(mu.log_values()[z] + lc[w]);
            }
            *slot = acc.value();
        }
        log_normalize(&mut lm);

        let mut r = InfoReport::zero(n, gamma);
        for (z, lc) in cond.iter().enumerate() {
            let m = mu.values()[z];
            if m == 0.0 {
                continue;
            }
            for w in 0..nw {
                let p = lc[w].exp();
                let q = lm[w].exp();
                let log_ratio = lc[w] - lm[w];
                r.mutual += m * p * log_ratio;
                r.lautum -= m * q * log_ratio;
                r.skl += m * (p - q) * log_ratio;
                r.chi2 += m * (p - q) * (p - q) / q;
                r.gen += m * (q - p) * self.problem.loss(w, z);
            }
        }
        r
    }
}
