//! Gaussian mean estimation in one dimension: closed forms and a
//! covariance-trace oracle.
//!
//! Data `Z ~ N(0, 1/(2 beta))`, prior `pi(w) = exp(-w^2) / sqrt(pi)` and
//! squared-error loss `(w - z)^2`. The Gibbs posterior given `S` is
//! `N(gamma * mean(S) / (1 + gamma), 1 / (2 (1 + gamma)))`, so `(W, S)` is
//! jointly Gaussian with zero mean.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest `n` for which the dense `(n + 1) x (n + 1)` covariance is built.
pub const DEFAULT_DENSE_CEILING: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianProblem {
    beta: f64,
    gamma: f64,
    n: usize,
}

impl GaussianProblem {
    pub fn new(beta: f64, gamma: f64, n: usize) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::Argument(format!("beta must be positive, got {beta}")));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::Argument(format!("gamma must be positive, got {gamma}")));
        }
        if n == 0 {
            return Err(Error::Argument("n must be at least 1".into()));
        }
        Ok(Self { beta, gamma, n })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `Var(W)`
    pub fn w_variance(&self) -> f64 {
        let (b, g, n) = (self.beta, self.gamma, self.n as f64);
        (n * g * b + n * b + g * g) / (2.0 * n * (1.0 + g).powi(2) * b)
    }

    /// `Cov(W, Z_i)`
    pub fn wz_covariance(&self) -> f64 {
        let (b, g, n) = (self.beta, self.gamma, self.n as f64);
        g / (2.0 * n * b * (1.0 + g))
    }

    /// `Var(Z_i) = 1 / (2 beta)`
    pub fn z_variance(&self) -> f64 {
        1.0 / (2.0 * self.beta)
    }

    /// Variance of the posterior `P_{W|S}`, independent of the data.
    pub fn posterior_variance(&self) -> f64 {
        1.0 / (2.0 * (1.0 + self.gamma))
    }
}

/// Joint covariance of a Gaussian pair `(X, Y)` and its decoupled counterpart
/// with the cross blocks zeroed. `X` is the leading `split` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianCovariance {
    pub dim: usize,
    pub split: usize,
    pub sigma: DMatrix<f64>,
    pub sigma_indep: DMatrix<f64>,
}

impl GaussianCovariance {
    pub fn new(sigma: DMatrix<f64>, split: usize) -> Result<Self> {
        let dim = sigma.nrows();
        if sigma.ncols() != dim || split == 0 || split >= dim {
            return Err(Error::Argument(format!(
                "need a square matrix with 0 < split < dim, got {}x{} split {split}",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        let mut sigma_indep = sigma.clone();
        for i in 0..split {
            for j in split..dim {
                sigma_indep[(i, j)] = 0.0;
                sigma_indep[(j, i)] = 0.0;
            }
        }
        Ok(Self {
            dim,
            split,
            sigma,
            sigma_indep,
        })
    }

    /// Sub-covariance over the listed coordinates; the first `split` of them form `X`.
    pub fn marginal(&self, coords: &[usize], split: usize) -> Result<Self> {
        let k = coords.len();
        let sigma = DMatrix::from_fn(k, k, |i, j| self.sigma[(coords[i], coords[j])]);
        Self::new(sigma, split)
    }
}

/// Covariance of `(W, Z_1, ..., Z_n)`.
pub fn gaussian_joint_covariance(p: &GaussianProblem) -> Result<GaussianCovariance> {
    gaussian_joint_covariance_with_ceiling(p, DEFAULT_DENSE_CEILING)
}

pub fn gaussian_joint_covariance_with_ceiling(
    p: &GaussianProblem,
    ceiling: usize,
) -> Result<GaussianCovariance> {
    if p.n > ceiling {
        return Err(Error::Resource {
            what: format!("dense joint covariance at n = {}", p.n),
            required: p.n as u128,
            ceiling: ceiling as u128,
        });
    }
    let dim = p.n + 1;
    let (vw, c, vz) = (p.w_variance(), p.wz_covariance(), p.z_variance());
    let sigma = DMatrix::from_fn(dim, dim, |i, j| match (i, j) {
        (0, 0) => vw,
        (0, _) | (_, 0) => c,
        _ if i == j => vz,
        _ => 0.0,
    });
    GaussianCovariance::new(sigma, 1)
}

/// Lower Cholesky factor, or the 1-based index of the first leading minor
/// that is not positive.
fn cholesky(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { index: j + 1 });
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// `I_SKL(X; Y) = tr(Sigma^{-1} Sigma_indep - I) / 2` for a Gaussian pair.
///
/// With `Sigma = L L^T` and `Sigma_indep = M M^T` the trace is
/// `||L^{-1} M||_F^2`, one triangular solve and no explicit inverse.
pub fn gaussian_skl_trace(cov: &GaussianCovariance) -> Result<f64> {
    let l = cholesky(&cov.sigma)?;
    let m = cholesky(&cov.sigma_indep)?;
    let x = l
        .solve_lower_triangular(&m)
        .ok_or(Error::NotPositiveDefinite { index: 0 })?;
    Ok(0.5 * (x.norm_squared() - cov.dim as f64))
}

/// Every closed-form quantity of the example at one `(beta, gamma, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianReport {
    pub problem: GaussianProblem,
    pub skl_joint: f64,
    pub skl_individual: f64,
    pub mutual_joint: f64,
    pub mutual_individual: f64,
    /// `n * skl_individual - skl_joint`
    pub gap: f64,
    /// Expected generalization error, `2 Cov(W, Z_i)` for the squared loss.
    pub gen: f64,
}

impl GaussianReport {
    pub fn jensen_gap(&self, w: f64, z: f64) -> f64 {
        gaussian_jensen_gap(&self.problem, w, z)
    }
}

pub fn gaussian_closed_forms(p: &GaussianProblem) -> GaussianReport {
    let (b, g, n) = (p.beta, p.gamma, p.n as f64);
    let skl_joint = g * g / (n * b * (1.0 + g));
    let skl_individual = g * g / (n * n * b * (1.0 + g) + g * g * (n - 1.0));
    GaussianReport {
        problem: *p,
        skl_joint,
        skl_individual,
        mutual_joint: 0.5 * skl_joint.ln_1p(),
        mutual_individual: 0.5 * skl_individual.ln_1p(),
        gap: n * skl_individual - skl_joint,
        gen: 2.0 * p.wz_covariance(),
    }
}

/// `J(w, z) = constant + w2 * w^2 + wz * w z + z2 * z^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JensenGapCoefficients {
    pub constant: f64,
    pub w2: f64,
    pub wz: f64,
    pub z2: f64,
}

/// Coefficients of the Jensen gap.
///
/// Given `Z_i = z` the posterior mean over the other samples is
/// `N(a, s2)` with `a = gamma z / (n (1 + gamma))` and
/// `s2 = gamma^2 (n - 1) / (2 beta n^2 (1 + gamma)^2)`; with posterior
/// variance `v` the gap is `log(v / (v + s2)) / 2 + s2 / (2 v)
/// + (w - a)^2 (1 + gamma) (1 - v / (v + s2))`.
pub fn jensen_gap_coefficients(p: &GaussianProblem) -> JensenGapCoefficients {
    let (b, g, n) = (p.beta, p.gamma, p.n as f64);
    let denom = n * n * b * (1.0 + g) + (n - 1.0) * g * g;
    // v / (v + s2)
    let ratio = n * n * (1.0 + g) * b / denom;
    // 1 - v / (v + s2), formed without cancellation
    let shrink = (n - 1.0) * g * g / denom;
    let constant = 0.5 * ratio.ln() + (n - 1.0) / (n * n) * g * g / (1.0 + g) / (2.0 * b);
    JensenGapCoefficients {
        constant,
        w2: (1.0 + g) * shrink,
        wz: -2.0 * g / n * shrink,
        z2: g * g / (n * n * (1.0 + g)) * shrink,
    }
}

pub fn gaussian_jensen_gap(p: &GaussianProblem, w: f64, z: f64) -> f64 {
    let c = jensen_gap_coefficients(p);
    c.constant + c.w2 * w * w + c.wz * w * z + c.z2 * z * z
}
