use serde::Serialize;

use super::measures::DiscreteEngine;
use crate::error::Result;
use crate::problem::{population_risk, GibbsParams};

/// `J(w, z) = log E[P_{W|S}(w | z, Z^{-i})] - E[log P_{W|S}(w | z, Z^{-i})]`,
/// expectations over the other `n - 1` samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JensenGapTable {
    pub n: usize,
    /// `gap[w][z]`
    pub gap: Vec<Vec<f64>>,
    /// `log P_{W|Z_i}(w | z)` as `[z][w]`, the first term of the gap.
    pub log_conditional: Vec<Vec<f64>>,
}

impl JensenGapTable {
    pub fn min_entry(&self) -> f64 {
        self.gap
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// The pieces of the exact gap identity between summed individual-sample and
/// joint symmetrized KL information.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem1Check {
    /// `sum_i I_SKL(W; Z_i)`
    pub individual_sum: f64,
    /// `I_SKL(W; S)`
    pub joint: f64,
    /// `sum_i (E_{P_{W,Z_i}}[J] - E_{P_W x P_{Z_i}}[J])`
    pub gap_expectation: f64,
    pub residual: f64,
}

impl<'a> DiscreteEngine<'a> {
    pub fn jensen_gap_table(&self, params: GibbsParams) -> Result<JensenGapTable> {
        let (gamma, n) = (params.gamma(), params.n());
        let nw = self.problem().num_hypotheses();
        let nz = self.problem().num_instances();
        let table = self.type_table(n - 1)?;
        let mut gap = vec![vec![0.0; nz]; nw];
        let cond = self.log_conditionals(gamma, n, &table);
        if n == 1 || gamma == 0.0 {
            return Ok(JensenGapTable {
                n,
                gap,
                log_conditional: cond,
            });
        }
        let mut lp = vec![0.0; nw];
        for z in 0..nz {
            let mut mean_log = vec![0.0; nw];
            for t in 0..table.len() {
                self.log_posterior_into(gamma, n, table.counts(t), Some(z), &mut lp);
                let weight = table.log_weights[t].exp();
                for w in 0..nw {
                    mean_log[w] += weight * lp[w];
                }
            }
            for w in 0..nw {
                gap[w][z] = cond[z][w] - mean_log[w];
            }
        }
        Ok(JensenGapTable {
            n,
            gap,
            log_conditional: cond,
        })
    }

    /// Evaluates both sides of the gap identity from independently computed
    /// joint measures, individual measures and Jensen-gap table.
    pub fn theorem1_check(&self, params: GibbsParams) -> Result<Theorem1Check> {
        let n = params.n() as f64;
        let joint = self.joint_measures(params)?;
        let individual = self.individual_measures(params)?;
        let table = self.jensen_gap_table(params)?;
        let marginal = self.marginal(params)?;
        let mu = self.problem().mu().values();

        let mut coupled = 0.0;
        let mut decoupled = 0.0;
        for (z, lc) in table.log_conditional.iter().enumerate() {
            for (w, row) in table.gap.iter().enumerate() {
                coupled += mu[z] * lc[w].exp() * row[z];
                decoupled += mu[z] * marginal.values()[w] * row[z];
            }
        }
        let individual_sum = n * individual.skl;
        let gap_expectation = n * (coupled - decoupled);
        Ok(Theorem1Check {
            individual_sum,
            joint: joint.skl,
            gap_expectation,
            residual: (individual_sum - joint.skl - gap_expectation).abs(),
        })
    }

    pub fn verify_theorem1(&self, params: GibbsParams) -> Result<f64> {
        Ok(self.theorem1_check(params)?.residual)
    }

    /// `gamma^2 E_mu[ Var_{P_W^inf}(l(W, Z) - L_mu(W)) ]`, the limit of
    /// `n^2 I_SKL(W; Z_i)` for bounded losses.
    pub fn asymptotic_constant(&self, gamma: f64) -> Result<f64> {
        let limit = self.limiting_posterior(gamma)?;
        let p = limit.dist.values();
        let problem = self.problem();
        let risks = (0..problem.num_hypotheses())
            .map(|w| population_risk(problem, w))
            .collect::<Result<Vec<f64>>>()?;
        let mut total = 0.0;
        for (z, m) in problem.mu().values().iter().enumerate() {
            let (mut first, mut second) = (0.0, 0.0);
            for w in 0..problem.num_hypotheses() {
                let d = problem.loss(w, z) - risks[w];
                first += p[w] * d;
                second += p[w] * d * d;
            }
            total += m * (second - first * first);
        }
        Ok(gamma * gamma * total)
    }
}
