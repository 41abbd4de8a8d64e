//! Monte-Carlo-over-datasets estimates of the generalization error for
//! one-dimensional hypothesis spaces.
//!
//! Expectations over `W` are taken by quadrature on a fixed grid; only the
//! datasets are sampled. Each dataset pair `(S, S')` contributes
//! `E_{P_{W|S}}[L_e(W, S') - L_e(W, S)]`, whose mean is the generalization
//! error because `S'` is independent of `(W, S)`.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal as NormalCdf};

use crate::error::{Error, Result};
use crate::prob::LogSumExp;
use crate::problem::DiscreteProblem;

/// Quadrature nodes and (log) weights over the hypothesis line.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub nodes: Vec<f64>,
    pub log_weights: Vec<f64>,
    /// Whether the grid truncates the hypothesis space and boundary mass must be checked.
    pub truncated: bool,
}

impl Grid {
    /// Trapezoid rule with `points >= 2` nodes on `[lo, hi]`.
    pub fn trapezoid(lo: f64, hi: f64, points: usize) -> Self {
        let points = points.max(2);
        let h = (hi - lo) / (points - 1) as f64;
        let nodes = (0..points).map(|i| lo + h * i as f64).collect();
        let log_weights = (0..points)
            .map(|i| {
                if i == 0 || i == points - 1 {
                    (0.5 * h).ln()
                } else {
                    h.ln()
                }
            })
            .collect();
        Self {
            nodes,
            log_weights,
            truncated: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridConfig {
    pub points: usize,
    /// Prior mass the initial grid must cover.
    pub prior_mass: f64,
    pub boundary_tol: f64,
    /// How many times a grid may double (in width and node count) after a coverage failure.
    pub max_expansions: u32,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            points: 2048,
            prior_mass: 1.0 - 1e-10,
            boundary_tol: 1e-8,
            max_expansions: 3,
        }
    }
}

/// A learning problem with a one-dimensional hypothesis.
pub trait ContinuousProblem1D: Sync {
    fn loss(&self, w: f64, z: f64) -> f64;

    fn log_prior(&self, w: f64) -> f64;

    /// Draws one sample from the data distribution.
    fn sample(&self, rng: &mut dyn RngCore) -> f64;

    /// Analytic `L_mu(w)` when one is known.
    fn population_risk(&self, _w: f64) -> Option<f64> {
        None
    }

    /// Quadrature grid after `expansion` symmetric doublings.
    fn grid(&self, config: &GridConfig, expansion: u32) -> Grid;
}

/// Mean estimation: `Z ~ N(0, 1/(2 beta))`, prior `N(0, 1/2)`, loss `(w - z)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMeanProblem {
    beta: f64,
    data: Normal<f64>,
}

impl GaussianMeanProblem {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::Argument(format!("beta must be positive, got {beta}")));
        }
        let data = Normal::new(0.0, (0.5 / beta).sqrt())
            .map_err(|e| Error::Argument(e.to_string()))?;
        Ok(Self { beta, data })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

impl ContinuousProblem1D for GaussianMeanProblem {
    fn loss(&self, w: f64, z: f64) -> f64 {
        (w - z) * (w - z)
    }

    fn log_prior(&self, w: f64) -> f64 {
        -w * w - 0.5 * std::f64::consts::PI.ln()
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        self.data.sample(rng)
    }

    fn population_risk(&self, w: f64) -> Option<f64> {
        Some(w * w + 0.5 / self.beta)
    }

    fn grid(&self, config: &GridConfig, expansion: u32) -> Grid {
        let prior_sd = std::f64::consts::FRAC_1_SQRT_2;
        let standard = NormalCdf::standard();
        let half = prior_sd * standard.inverse_cdf(0.5 + 0.5 * config.prior_mass);
        let scale = (1u64 << expansion) as f64;
        Grid::trapezoid(-half * scale, half * scale, config.points << expansion)
    }
}

/// A finite problem viewed on the line: hypothesis `w` sits at the atom `w as f64`.
#[derive(Debug, Clone)]
pub struct AtomicProblem {
    problem: DiscreteProblem,
    sampler: WeightedIndex<f64>,
}

impl AtomicProblem {
    pub fn new(problem: DiscreteProblem) -> Result<Self> {
        let sampler = WeightedIndex::new(problem.mu().values())
            .map_err(|e| Error::Argument(e.to_string()))?;
        Ok(Self { problem, sampler })
    }

    pub fn problem(&self) -> &DiscreteProblem {
        &self.problem
    }
}

impl ContinuousProblem1D for AtomicProblem {
    fn loss(&self, w: f64, z: f64) -> f64 {
        self.problem.loss(w as usize, z as usize)
    }

    fn log_prior(&self, w: f64) -> f64 {
        self.problem.prior().log_values()[w as usize]
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        self.sampler.sample(rng) as f64
    }

    fn population_risk(&self, w: f64) -> Option<f64> {
        crate::problem::population_risk(&self.problem, w as usize).ok()
    }

    fn grid(&self, _config: &GridConfig, _expansion: u32) -> Grid {
        let k = self.problem.num_hypotheses();
        Grid {
            nodes: (0..k).map(|w| w as f64).collect(),
            log_weights: vec![0.0; k],
            truncated: false,
        }
    }
}

/// Normalized posterior masses on the quadrature nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorTable {
    pub nodes: Vec<f64>,
    pub mass: Vec<f64>,
}

impl PosteriorTable {
    pub fn mean(&self) -> f64 {
        self.nodes.iter().zip(&self.mass).map(|(w, m)| w * m).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.nodes
            .iter()
            .zip(&self.mass)
            .map(|(w, m)| m * (w - mean) * (w - mean))
            .sum()
    }

    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.mass).map(|(w, m)| m * f(*w)).sum()
    }
}

fn empirical_risk_1d<P: ContinuousProblem1D + ?Sized>(p: &P, w: f64, data: &[f64]) -> f64 {
    data.iter().map(|z| p.loss(w, *z)).sum::<f64>() / data.len() as f64
}

fn posterior_on_grid<P: ContinuousProblem1D + ?Sized>(
    p: &P,
    gamma: f64,
    dataset: &[f64],
    grid: &Grid,
    boundary_tol: f64,
) -> Result<PosteriorTable> {
    let logits: Vec<f64> = grid
        .nodes
        .iter()
        .zip(&grid.log_weights)
        .map(|(w, lw)| {
            let risk = if gamma == 0.0 {
                0.0
            } else {
                gamma * empirical_risk_1d(p, *w, dataset)
            };
            lw + p.log_prior(*w) - risk
        })
        .collect();
    let mut acc = LogSumExp::new();
    logits.iter().for_each(|x| acc.push(*x));
    let lse = acc.value();
    if !lse.is_finite() {
        return Err(Error::Argument(
            "posterior has no mass on the grid".into(),
        ));
    }
    let mass: Vec<f64> = logits.iter().map(|x| (x - lse).exp()).collect();
    if grid.truncated {
        let boundary_mass = mass[0] + mass[mass.len() - 1];
        if boundary_mass > boundary_tol {
            return Err(Error::Coverage {
                boundary_mass,
                tolerance: boundary_tol,
            });
        }
    }
    Ok(PosteriorTable {
        nodes: grid.nodes.clone(),
        mass,
    })
}

/// Gibbs posterior `prop. to pi(w) exp(-gamma L_e(w, dataset))` on the
/// problem's unexpanded grid.
pub fn quadrature_posterior<P: ContinuousProblem1D + ?Sized>(
    p: &P,
    gamma: f64,
    dataset: &[f64],
    config: &GridConfig,
) -> Result<PosteriorTable> {
    if dataset.is_empty() {
        return Err(Error::Argument("dataset must be nonempty".into()));
    }
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::Argument(format!("gamma must be nonnegative, got {gamma}")));
    }
    posterior_on_grid(p, gamma, dataset, &p.grid(config, 0), config.boundary_tol)
}

fn posterior_with_expansion<P: ContinuousProblem1D + ?Sized>(
    p: &P,
    gamma: f64,
    dataset: &[f64],
    config: &GridConfig,
    grids: &[Grid],
) -> Result<PosteriorTable> {
    let mut last = None;
    for grid in grids {
        match posterior_on_grid(p, gamma, dataset, grid, config.boundary_tol) {
            Err(e @ Error::Coverage { .. }) => last = Some(e),
            other => return other,
        }
    }
    Err(last.expect("at least one grid"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub num_datasets: usize,
    pub seed: u64,
}

impl McEstimate {
    /// `I_SKL(W; S) = gamma * gen` for the Gibbs algorithm.
    pub fn skl_estimate(&self, gamma: f64) -> f64 {
        gamma * self.value
    }
}

/// Per-pair contributions, in pair order. Pair `i` draws from stream `i` of
/// the master seed, so the output does not depend on the worker count.
pub fn gen_contributions<P: ContinuousProblem1D + ?Sized>(
    p: &P,
    gamma: f64,
    n: usize,
    num_datasets: usize,
    seed: u64,
    config: &GridConfig,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Argument("n must be at least 1".into()));
    }
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::Argument(format!("gamma must be nonnegative, got {gamma}")));
    }
    let grids: Vec<Grid> = (0..=config.max_expansions)
        .map(|e| p.grid(config, e))
        .collect();
    (0..num_datasets)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let train: Vec<f64> = (0..n).map(|_| p.sample(&mut rng)).collect();
            let fresh: Vec<f64> = (0..n).map(|_| p.sample(&mut rng)).collect();
            let post = posterior_with_expansion(p, gamma, &train, config, &grids)?;
            Ok(post.expect(|w| {
                empirical_risk_1d(p, w, &fresh) - empirical_risk_1d(p, w, &train)
            }))
        })
        .collect()
}

/// Estimates the generalization error from `num_datasets` independent dataset pairs.
pub fn estimate_gen_mc<P: ContinuousProblem1D + ?Sized>(
    p: &P,
    gamma: f64,
    n: usize,
    num_datasets: usize,
    seed: u64,
    config: &GridConfig,
) -> Result<McEstimate> {
    if num_datasets < 2 {
        return Err(Error::Argument(format!(
            "need at least 2 dataset pairs, got {num_datasets}"
        )));
    }
    let values = gen_contributions(p, gamma, n, num_datasets, seed, config)?;
    // Welford, sequential over pair order
    let (mut mean, mut m2) = (0.0, 0.0);
    for (k, v) in values.iter().enumerate() {
        let delta = v - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (v - mean);
    }
    let var = m2 / (num_datasets - 1) as f64;
    Ok(McEstimate {
        value: mean,
        std_error: (var.max(0.0) / num_datasets as f64).sqrt(),
        num_datasets,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ProblemSpec;
    use approx::assert_abs_diff_eq;

    struct ConstantLoss;

    impl ContinuousProblem1D for ConstantLoss {
        fn loss(&self, _w: f64, _z: f64) -> f64 {
            0.3
        }
        fn log_prior(&self, w: f64) -> f64 {
            -w * w - 0.5 * std::f64::consts::PI.ln()
        }
        fn sample(&self, rng: &mut dyn RngCore) -> f64 {
            (rng.next_u32() as f64) / u32::MAX as f64
        }
        fn grid(&self, config: &GridConfig, expansion: u32) -> Grid {
            GaussianMeanProblem::new(1.0).unwrap().grid(config, expansion)
        }
    }

    #[test]
    fn zero_gamma_gives_gridded_prior() {
        let p = GaussianMeanProblem::new(0.5).unwrap();
        let cfg = GridConfig::default();
        let post = quadrature_posterior(&p, 0.0, &[3.0, -1.0], &cfg).unwrap();
        let grid = p.grid(&cfg, 0);
        for ((w, lw), m) in grid.nodes.iter().zip(&grid.log_weights).zip(&post.mass) {
            assert_abs_diff_eq!(*m, (lw + p.log_prior(*w)).exp(), epsilon = 1e-12);
        }
    }

    #[test]
    fn prior_integrates_to_one_on_grid() {
        let p = GaussianMeanProblem::new(0.5).unwrap();
        let grid = p.grid(&GridConfig::default(), 0);
        let total: f64 = grid
            .nodes
            .iter()
            .zip(&grid.log_weights)
            .map(|(w, lw)| (lw + p.log_prior(*w)).exp())
            .sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn conjugate_posterior() {
        let p = GaussianMeanProblem::new(0.5).unwrap();
        let post = quadrature_posterior(&p, 1.0, &[0.0, 0.0], &GridConfig::default()).unwrap();
        assert_abs_diff_eq!(post.mean(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(post.variance(), 0.25, epsilon = 1e-4);
    }

    #[test]
    fn far_tail_point_escapes_grid() {
        let p = GaussianMeanProblem::new(0.5).unwrap();
        let err = quadrature_posterior(&p, 1.0, &[40.0], &GridConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Coverage { .. }), "{err}");
    }

    #[test]
    fn expansion_rescues_moderate_tail() {
        let p = GaussianMeanProblem::new(0.5).unwrap();
        let cfg = GridConfig::default();
        let data = [12.0];
        assert!(quadrature_posterior(&p, 1.0, &data, &cfg).is_err());
        let grids: Vec<Grid> = (0..=cfg.max_expansions).map(|e| p.grid(&cfg, e)).collect();
        let post = posterior_with_expansion(&p, 1.0, &data, &cfg, &grids).unwrap();
        assert_abs_diff_eq!(post.mean(), 6.0, epsilon = 1e-6);
    }

    #[test]
    fn constant_loss_is_exactly_zero() {
        let est = estimate_gen_mc(&ConstantLoss, 2.0, 5, 50, 9, &GridConfig::default()).unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn zero_gamma_is_indistinguishable_from_zero() {
        let p = GaussianMeanProblem::new(0.5).unwrap();
        let cfg = GridConfig {
            points: 256,
            ..GridConfig::default()
        };
        let est = estimate_gen_mc(&p, 0.0, 10, 2000, 4, &cfg).unwrap();
        assert!(est.value.abs() <= 3.0 * est.std_error, "{est:?}");
    }

    #[test]
    fn too_few_pairs_rejected() {
        let p = GaussianMeanProblem::new(0.5).unwrap();
        assert!(estimate_gen_mc(&p, 1.0, 10, 1, 0, &GridConfig::default()).is_err());
    }

    #[test]
    fn fresh_sample_matches_population_risk() {
        let p = GaussianMeanProblem::new(0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws: Vec<f64> = (0..200_000).map(|_| p.sample(&mut rng)).collect();
        let w = 0.4;
        assert_abs_diff_eq!(
            empirical_risk_1d(&p, w, &draws),
            p.population_risk(w).unwrap(),
            epsilon = 0.02
        );
    }

    #[test]
    fn atomic_posterior_matches_discrete_engine() {
        let problem = DiscreteProblem::new(ProblemSpec {
            hypotheses: vec!["a".into(), "b".into(), "c".into()],
            instances: vec!["x".into(), "y".into()],
            loss: vec![vec![0.1, 0.9], vec![0.5, 0.4], vec![1.0, 0.0]],
            prior: vec![0.2, 0.3, 0.5],
            mu: vec![0.6, 0.4],
        })
        .unwrap();
        let atomic = AtomicProblem::new(problem.clone()).unwrap();
        let post = quadrature_posterior(&atomic, 2.0, &[0.0, 1.0, 1.0], &GridConfig::default())
            .unwrap();
        let params = crate::GibbsParams::new(2.0, 3).unwrap();
        let t = crate::engine::TypeClass::from_counts(vec![1, 2]);
        let exact = crate::engine::gibbs_posterior(&problem, params, &t).unwrap();
        for (a, b) in post.mass.iter().zip(exact.values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }
}
