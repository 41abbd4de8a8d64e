//! The finite learning problem: hypotheses, instances, loss, prior and data law.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::engine::TypeClass;
use crate::error::{Error, Result};
use crate::prob::{ProbVector, NORMALIZATION_TOL};

/// Serialized form of a [`DiscreteProblem`]. Rows of `loss` are hypotheses.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub hypotheses: Vec<String>,
    pub instances: Vec<String>,
    pub loss: Vec<Vec<f64>>,
    pub prior: Vec<f64>,
    pub mu: Vec<f64>,
}

/// A validated finite problem `(prior, loss, mu)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteProblem {
    spec: ProblemSpec,
    prior: ProbVector,
    mu: ProbVector,
    loss_min: f64,
    loss_max: f64,
}

fn check_distribution(name: &str, labels: &[String], values: &[f64]) -> Result<ProbVector> {
    if values.len() != labels.len() {
        return Err(Error::InvalidProblem(format!(
            "`{name}` has {} entries but there are {} labels",
            values.len(),
            labels.len()
        )));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidProblem(format!(
            "`{name}` has a negative or non-finite entry {v}"
        )));
    }
    let total: f64 = values.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::InvalidProblem(format!(
            "non-normalized distribution: `{name}` sums to {total}"
        )));
    }
    ProbVector::from_probs(labels.to_vec(), values.to_vec())
        .map_err(|e| Error::InvalidProblem(format!("`{name}`: {e}")))
}

impl DiscreteProblem {
    pub fn new(spec: ProblemSpec) -> Result<Self> {
        let nw = spec.hypotheses.len();
        let nz = spec.instances.len();
        if nw == 0 || nz == 0 {
            return Err(Error::InvalidProblem(
                "hypothesis and instance sets must be nonempty".into(),
            ));
        }
        if spec.loss.len() != nw {
            return Err(Error::InvalidProblem(format!(
                "ragged loss matrix: {} rows for {nw} hypotheses",
                spec.loss.len()
            )));
        }
        if let Some((w, row)) = spec.loss.iter().enumerate().find(|(_, r)| r.len() != nz) {
            return Err(Error::InvalidProblem(format!(
                "ragged loss matrix: row {w} has {} entries for {nz} instances",
                row.len()
            )));
        }
        if spec.loss.iter().flatten().any(|l| !l.is_finite()) {
            return Err(Error::InvalidProblem("loss entries must be finite".into()));
        }
        if let Some(w) = spec.prior.iter().position(|p| *p == 0.0) {
            if w < nw {
                return Err(Error::InvalidProblem(format!(
                    "zero prior entry for hypothesis `{}`",
                    spec.hypotheses[w]
                )));
            }
        }
        let prior = check_distribution("prior", &spec.hypotheses, &spec.prior)?;
        let mu = check_distribution("mu", &spec.instances, &spec.mu)?;
        let loss_min = spec.loss.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        let loss_max = spec
            .loss
            .iter()
            .flatten()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            spec,
            prior,
            mu,
            loss_min,
            loss_max,
        })
    }

    /// The fair-or-biased coin toss: `w, z in {0, 1}`, loss `1{w = z}`,
    /// uniform prior, `P(z = 1) = p`.
    pub fn coin_toss(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Argument(format!("coin bias {p} outside [0, 1]")));
        }
        Self::new(ProblemSpec {
            hypotheses: vec!["0".into(), "1".into()],
            instances: vec!["0".into(), "1".into()],
            loss: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            prior: vec![0.5, 0.5],
            mu: vec![1.0 - p, p],
        })
    }

    /// Seeded random problem: losses i.i.d. uniform on `[0, 1)`, prior and
    /// `mu` drawn from the flat Dirichlet.
    pub fn random(seed: u64, num_hypotheses: usize, num_instances: usize) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let loss = (0..num_hypotheses)
            .map(|_| (0..num_instances).map(|_| rng.random::<f64>()).collect())
            .collect();
        let prior = flat_simplex(&mut rng, num_hypotheses);
        let mu = flat_simplex(&mut rng, num_instances);
        Self::new(ProblemSpec {
            hypotheses: (0..num_hypotheses).map(|i| format!("w{i}")).collect(),
            instances: (0..num_instances).map(|i| format!("z{i}")).collect(),
            loss,
            prior,
            mu,
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn num_hypotheses(&self) -> usize {
        self.spec.hypotheses.len()
    }

    pub fn num_instances(&self) -> usize {
        self.spec.instances.len()
    }

    pub fn hypothesis_labels(&self) -> &[String] {
        &self.spec.hypotheses
    }

    pub fn instance_labels(&self) -> &[String] {
        &self.spec.instances
    }

    #[inline]
    pub fn loss(&self, w: usize, z: usize) -> f64 {
        self.spec.loss[w][z]
    }

    pub fn loss_row(&self, w: usize) -> &[f64] {
        &self.spec.loss[w]
    }

    pub fn prior(&self) -> &ProbVector {
        &self.prior
    }

    pub fn mu(&self) -> &ProbVector {
        &self.mu
    }

    pub fn loss_min(&self) -> f64 {
        self.loss_min
    }

    pub fn loss_max(&self) -> f64 {
        self.loss_max
    }

    /// True when every loss lies in `[0, 1]`.
    pub fn has_unit_interval_loss(&self) -> bool {
        self.loss_min >= 0.0 && self.loss_max <= 1.0
    }

    /// True when every row of the loss matrix is constant in `z`.
    pub fn is_data_independent(&self) -> bool {
        self.spec
            .loss
            .iter()
            .all(|row| row.iter().all(|l| *l == row[0]))
    }

    pub(crate) fn check_hypothesis(&self, w: usize) -> Result<()> {
        if w >= self.num_hypotheses() {
            return Err(Error::Argument(format!(
                "hypothesis index {w} out of range (|W| = {})",
                self.num_hypotheses()
            )));
        }
        Ok(())
    }
}

fn flat_simplex(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..k)
        .map(|_| rng.sample::<f64, _>(Exp1).max(1e-12))
        .collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / total).collect()
}

/// Inverse temperature and sample size of a Gibbs run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GibbsParams {
    gamma: f64,
    n: usize,
}

impl GibbsParams {
    pub fn new(gamma: f64, n: usize) -> Result<Self> {
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::Argument(format!(
                "gamma must be finite and nonnegative, got {gamma}"
            )));
        }
        if n == 0 {
            return Err(Error::Argument("sample count n must be at least 1".into()));
        }
        Ok(Self { gamma, n })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Information measures (nats) and generalization error at one `(gamma, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoReport {
    pub n: usize,
    pub gamma: f64,
    pub mutual: f64,
    pub lautum: f64,
    pub skl: f64,
    pub chi2: f64,
    pub gen: f64,
}

impl InfoReport {
    pub fn zero(n: usize, gamma: f64) -> Self {
        Self {
            n,
            gamma,
            mutual: 0.0,
            lautum: 0.0,
            skl: 0.0,
            chi2: 0.0,
            gen: 0.0,
        }
    }

    /// Checks nonnegativity and `skl = mutual + lautum` at the given tolerance.
    pub fn check_invariants(&self, tol: f64) -> std::result::Result<(), String> {
        for (name, v) in [
            ("mutual", self.mutual),
            ("lautum", self.lautum),
            ("skl", self.skl),
            ("chi2", self.chi2),
        ] {
            if v < -tol {
                return Err(format!("{name} = {v} is negative"));
            }
        }
        if (self.skl - self.mutual - self.lautum).abs() > tol {
            return Err(format!(
                "skl = {} but mutual + lautum = {}",
                self.skl,
                self.mutual + self.lautum
            ));
        }
        if self.mutual > self.skl + tol {
            return Err(format!("mutual {} exceeds skl {}", self.mutual, self.skl));
        }
        Ok(())
    }
}

/// `L_e(w, s)`: average loss of hypothesis `w` over a dataset given by its type.
pub fn empirical_risk(problem: &DiscreteProblem, w: usize, counts: &TypeClass) -> Result<f64> {
    problem.check_hypothesis(w)?;
    let counts = counts.counts();
    if counts.len() != problem.num_instances() {
        return Err(Error::Argument(format!(
            "type has {} labels, problem has {}",
            counts.len(),
            problem.num_instances()
        )));
    }
    let n: u64 = counts.iter().map(|c| *c as u64).sum();
    if n == 0 {
        return Err(Error::Argument("empirical risk of an empty dataset".into()));
    }
    Ok(weighted_loss(problem.loss_row(w), counts) / n as f64)
}

#[inline]
pub(crate) fn weighted_loss(row: &[f64], counts: &[u32]) -> f64 {
    row.iter().zip(counts).map(|(l, c)| l * *c as f64).sum()
}

/// `L_mu(w)`: expected loss of hypothesis `w` under the data distribution.
pub fn population_risk(problem: &DiscreteProblem, w: usize) -> Result<f64> {
    problem.check_hypothesis(w)?;
    Ok(problem
        .loss_row(w)
        .iter()
        .zip(problem.mu().values())
        .map(|(l, m)| l * m)
        .sum())
}
