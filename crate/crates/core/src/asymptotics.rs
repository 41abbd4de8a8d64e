//! Sweeps over `n`, limit extrapolation of scaled sequences, and checks of
//! the asymptotic claims against the variance constant.

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::engine::DiscreteEngine;
use crate::error::{Error, Result};
use crate::problem::{DiscreteProblem, GibbsParams, InfoReport};

/// Default number of largest-`n` points used by [`fit_limit`].
pub const DEFAULT_TAIL_WINDOW: usize = 4;

/// Values at or below this magnitude are treated as exact zeros when deciding
/// whether a sequence is degenerate.
pub const DEGENERATE_TOL: f64 = 1e-20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub joint: InfoReport,
    pub individual: InfoReport,
    /// `n * I_SKL(W; Z_i) - I_SKL(W; S)`
    pub gap: f64,
}

impl SweepRow {
    pub fn individual_sum(&self) -> f64 {
        self.n as f64 * self.individual.skl
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub gamma: f64,
    pub fingerprint: String,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn series(&self, f: impl Fn(&SweepRow) -> f64) -> Vec<(usize, f64)> {
        self.rows.iter().map(|r| (r.n, f(r))).collect()
    }
}

/// Short stable hash of the problem definition.
pub fn problem_fingerprint(problem: &DiscreteProblem) -> String {
    let canonical = serde_json::to_vec(problem.spec()).expect("problem spec serializes");
    let digest = Sha256::digest(&canonical);
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

pub(crate) fn check_n_list(n_list: &[usize]) -> Result<()> {
    if n_list.is_empty() {
        return Err(Error::Argument("n list is empty".into()));
    }
    if n_list[0] == 0 {
        return Err(Error::Argument("n values must be at least 1".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument(format!(
            "n list must be strictly increasing, got {n_list:?}"
        )));
    }
    Ok(())
}

fn tag_row_error(n: usize, e: Error) -> Error {
    match e {
        Error::Resource {
            what,
            required,
            ceiling,
        } => Error::Resource {
            what: format!("sweep row n = {n} ({what})"),
            required,
            ceiling,
        },
        other => other,
    }
}

/// Joint and individual measures at every `n` in `n_list`.
pub fn sweep(problem: &DiscreteProblem, gamma: f64, n_list: &[usize]) -> Result<SweepTable> {
    sweep_with(&DiscreteEngine::new(problem), gamma, n_list)
}

pub fn sweep_with(engine: &DiscreteEngine, gamma: f64, n_list: &[usize]) -> Result<SweepTable> {
    check_n_list(n_list)?;
    let rows = n_list
        .par_iter()
        .map(|&n| {
            let params = GibbsParams::new(gamma, n)?;
            let joint = engine.joint_measures(params).map_err(|e| tag_row_error(n, e))?;
            let individual = engine
                .individual_measures(params)
                .map_err(|e| tag_row_error(n, e))?;
            Ok(SweepRow {
                n,
                joint,
                individual,
                gap: n as f64 * individual.skl - joint.skl,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        gamma,
        fingerprint: problem_fingerprint(engine.problem()),
        rows,
    })
}

/// Extrapolated limit of `n^p a_n` with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub exponent: f64,
    /// Intercept of `n^p a_n ~ limit + correction / n`.
    pub limit_estimate: f64,
    pub correction: f64,
    /// Least-squares slope of `log |a_n|` against `log n`; NaN when fewer
    /// than two nonzero values remain.
    pub slope_estimate: f64,
    pub residual_rms: f64,
    pub tail_window: usize,
    /// Number of zero values dropped from the slope fit.
    pub zeros_excluded: usize,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

/// [`fit_limit_tail`] over the [`DEFAULT_TAIL_WINDOW`] largest `n`.
pub fn fit_limit(sequence: &[(usize, f64)], p: f64) -> Result<RateFit> {
    fit_limit_tail(sequence, p, DEFAULT_TAIL_WINDOW)
}

/// Regresses `n^p a_n` on `(1, 1/n)` over the last `window` points.
pub fn fit_limit_tail(sequence: &[(usize, f64)], p: f64, window: usize) -> Result<RateFit> {
    if sequence.len() < 4 {
        return Err(Error::Argument(format!(
            "limit fit needs at least 4 points, got {}",
            sequence.len()
        )));
    }
    if window < 3 {
        return Err(Error::Argument(format!("tail window {window} < 3")));
    }
    if sequence.windows(2).any(|w| w[0].0 >= w[1].0) || sequence[0].0 == 0 {
        return Err(Error::Argument("n must be positive and strictly increasing".into()));
    }
    let window = window.min(sequence.len());
    let tail = &sequence[sequence.len() - window..];

    let xs: Vec<f64> = tail.iter().map(|(n, _)| 1.0 / *n as f64).collect();
    let ys: Vec<f64> = tail.iter().map(|(n, a)| (*n as f64).powf(p) * a).collect();
    let (limit, correction) = least_squares(&xs, &ys);
    let residual_rms = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - limit - correction * x).powi(2))
        .sum::<f64>()
        / window as f64)
        .sqrt();

    let nonzero: Vec<(f64, f64)> = tail
        .iter()
        .filter(|(_, a)| *a != 0.0)
        .map(|(n, a)| ((*n as f64).ln(), a.abs().ln()))
        .collect();
    let slope_estimate = if nonzero.len() >= 2 {
        let (lx, ly): (Vec<f64>, Vec<f64>) = nonzero.iter().copied().unzip();
        least_squares(&lx, &ly).1
    } else {
        f64::NAN
    };
    Ok(RateFit {
        exponent: p,
        limit_estimate: limit,
        correction,
        slope_estimate,
        residual_rms,
        tail_window: window,
        zeros_excluded: window - nonzero.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClaimStatus {
    Pass,
    Fail,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Claim {
    pub name: &'static str,
    pub status: ClaimStatus,
    pub measured: f64,
    pub target: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimReport {
    pub gamma: f64,
    /// `gamma^2 E_mu[Var_{P_W^inf}(l(W, Z) - L_mu(W))]`
    pub constant: f64,
    pub joint_fit: RateFit,
    pub individual_fit: RateFit,
    pub gap_fit: RateFit,
    pub claims: Vec<Claim>,
}

impl ClaimReport {
    pub fn all_passed(&self) -> bool {
        self.claims.iter().all(|c| c.status != ClaimStatus::Fail)
    }

    pub fn first_failure(&self) -> Option<&Claim> {
        self.claims.iter().find(|c| c.status == ClaimStatus::Fail)
    }
}

/// Default relative tolerance for the limit and ratio claims.
pub const DEFAULT_CLAIM_TOL: f64 = 0.05;
/// `|gap|` must decay with log-log slope at or below this.
pub const GAP_SLOPE_THRESHOLD: f64 = -1.5;

fn relative_claim(name: &'static str, measured: f64, target: f64, tol: f64) -> Claim {
    if target.abs() <= DEGENERATE_TOL {
        let ok = measured.abs() <= 1e-12;
        return Claim {
            name,
            status: if ok { ClaimStatus::Pass } else { ClaimStatus::Fail },
            measured,
            target,
            detail: "degenerate: constant is zero".into(),
        };
    }
    let rel = (measured - target).abs() / target.abs();
    Claim {
        name,
        status: if rel <= tol {
            ClaimStatus::Pass
        } else {
            ClaimStatus::Fail
        },
        measured,
        target,
        detail: format!("relative error {rel:.3e} (tol {tol})"),
    }
}

fn ratio_claim(name: &'static str, num: f64, den: f64, tol: f64) -> Claim {
    if num.abs() <= DEGENERATE_TOL && den.abs() <= DEGENERATE_TOL {
        return Claim {
            name,
            status: ClaimStatus::Indeterminate,
            measured: f64::NAN,
            target: 1.0,
            detail: "indeterminate (0/0)".into(),
        };
    }
    let ratio = num / den;
    Claim {
        name,
        status: if (ratio - 1.0).abs() <= tol {
            ClaimStatus::Pass
        } else {
            ClaimStatus::Fail
        },
        measured: ratio,
        target: 1.0,
        detail: format!("ratio at largest n (tol {tol})"),
    }
}

/// Checks the five asymptotic claims on an existing sweep.
pub fn verify_claims_on(table: &SweepTable, constant: f64, tol: f64) -> Result<ClaimReport> {
    let rows = &table.rows;
    if rows.len() < 4 {
        return Err(Error::Argument(format!(
            "claim checks need at least 4 values of n, got {}",
            rows.len()
        )));
    }
    let last = rows[rows.len() - 1];
    if last.n < 256 {
        return Err(Error::Argument(format!(
            "claim checks need max n >= 256, got {}",
            last.n
        )));
    }
    let individual_fit = fit_limit(&table.series(|r| r.individual.skl), 2.0)?;
    let joint_fit = fit_limit(&table.series(|r| r.joint.skl), 1.0)?;
    let gap_fit = fit_limit(&table.series(|r| r.gap), 2.0)?;

    let gap_claim = {
        let tail = &rows[rows.len() - gap_fit.tail_window..];
        let degenerate = tail.iter().all(|r| r.gap.abs() <= DEGENERATE_TOL);
        let slope = gap_fit.slope_estimate;
        let (status, detail) = if degenerate {
            (ClaimStatus::Pass, "gap identically zero".to_string())
        } else if slope.is_nan() {
            (ClaimStatus::Indeterminate, "fewer than two nonzero gaps".to_string())
        } else if slope <= GAP_SLOPE_THRESHOLD {
            (ClaimStatus::Pass, format!("log-log slope {slope:.4}"))
        } else {
            (ClaimStatus::Fail, format!("log-log slope {slope:.4}"))
        };
        Claim {
            name: "gap_decay",
            status,
            measured: slope,
            target: GAP_SLOPE_THRESHOLD,
            detail,
        }
    };

    let claims = vec![
        relative_claim("individual_rate", individual_fit.limit_estimate, constant, tol),
        gap_claim,
        relative_claim("joint_rate", joint_fit.limit_estimate, constant, tol),
        ratio_claim("mutual_lautum_ratio", last.joint.mutual, last.joint.lautum, tol),
        ratio_claim("chi2_skl_ratio", last.individual.chi2, last.individual.skl, tol),
    ];
    Ok(ClaimReport {
        gamma: table.gamma,
        constant,
        joint_fit,
        individual_fit,
        gap_fit,
        claims,
    })
}

/// Sweeps `n_list` and checks every asymptotic claim against the variance constant.
pub fn verify_claims(
    problem: &DiscreteProblem,
    gamma: f64,
    n_list: &[usize],
    tol: f64,
) -> Result<ClaimReport> {
    let engine = DiscreteEngine::new(problem);
    let table = sweep_with(&engine, gamma, n_list)?;
    let constant = engine.asymptotic_constant(gamma)?;
    verify_claims_on(&table, constant, tol)
}
