//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails. Run with `cargo test --test acceptance`.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use gibbs_info::asymptotics::{fit_limit, fit_limit_tail, sweep};
use gibbs_info::bounds::{compare_bounds, BoundSettings};
use gibbs_info::engine::DiscreteEngine;
use gibbs_info::gaussian::{
    gaussian_closed_forms, gaussian_joint_covariance, gaussian_skl_trace, jensen_gap_coefficients,
    GaussianProblem,
};
use gibbs_info::mc::{estimate_gen_mc, GaussianMeanProblem, GridConfig};
use gibbs_info::{DiscreteProblem, GibbsParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const IDENTITY_RESIDUAL_TOL: f64 = 1e-9;
const IDENTITY_BUDGET: Duration = Duration::from_secs(30);
const GEN_SKL_TOL: f64 = 1e-10;
const ORACLE_TOL: f64 = 1e-10;
const JOINT_LIMIT_REL_TOL: f64 = 0.02;
const JOINT_LIMIT_BUDGET: Duration = Duration::from_secs(60);
const INDIVIDUAL_RATE_REL_TOL: f64 = 0.05;
const INDIVIDUAL_RATE_GAMMA: f64 = 2.0;
const DISCRETE_GAP_SLOPE_MAX: f64 = -1.5;
const GAUSSIAN_GAP_SLOPE: (f64, f64) = (-2.1, -1.9);
const MUTUAL_LAUTUM_TOL: f64 = 0.05;
const GAUSSIAN_HALF_TOL: f64 = 0.01;
const CHI2_TOL: f64 = 0.05;
const TRACE_TOL: f64 = 1e-9;
const FIXTURE_TOL: f64 = 1e-12;
const COEFF_SLOPE_TOL: f64 = 0.15;
const BOUND_SLACK: f64 = 1e-12;
const BOUND_DELTA: f64 = 0.5;
const BOUND_GAMMA: f64 = 1.0;
const TIGHTNESS_TOL: f64 = 0.01;
const MC_PAIRS: usize = 20_000;
const MC_SEED: u64 = 20_240_601;
const MC_SIGMAS: f64 = 3.0;
const MC_BUDGET: Duration = Duration::from_secs(120);

const TAIL: [usize; 4] = [64, 128, 256, 512];
const GAUSSIAN_NS: [usize; 4] = [10, 100, 1_000, 10_000];
const COEFF_NS: [usize; 5] = [16, 64, 256, 1_024, 4_096];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn params(gamma: f64, n: usize) -> GibbsParams {
    GibbsParams::new(gamma, n).unwrap()
}

/// `(problem, gamma, n)` cases: 100 seeded problems with up to 4 hypotheses
/// and 3 instances, every n up to 6, gamma in {0.5, 1, 4}.
fn identity_corpus() -> Vec<(DiscreteProblem, f64, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut cases = Vec::new();
    for seed in 0..100 {
        let nw = rng.random_range(1..=4);
        let nz = rng.random_range(1..=3);
        let problem = DiscreteProblem::random(seed, nw, nz).unwrap();
        for n in 1..=6 {
            for gamma in [0.5, 1.0, 4.0] {
                cases.push((problem.clone(), gamma, n));
            }
        }
    }
    cases
}

fn slope(seq: &[(usize, f64)]) -> f64 {
    fit_limit_tail(seq, 1.0, seq.len()).unwrap().slope_estimate
}

fn exact_identity() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let corpus = identity_corpus();
    for (problem, gamma, n) in &corpus {
        let engine = DiscreteEngine::new(problem);
        worst = worst.max(engine.verify_theorem1(params(*gamma, *n)).unwrap());
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= IDENTITY_RESIDUAL_TOL && elapsed <= IDENTITY_BUDGET,
        format!("{} cases, max residual {worst:.3e}, {elapsed:.2?}", corpus.len()),
    )
}

fn gen_equals_skl_over_gamma() -> Outcome {
    let mut worst: f64 = 0.0;
    for (problem, gamma, n) in identity_corpus() {
        let r = DiscreteEngine::new(&problem).joint_measures(params(gamma, n)).unwrap();
        worst = worst.max((r.gen - r.skl / gamma).abs());
    }
    outcome(worst <= GEN_SKL_TOL, format!("max |gen - I_SKL/gamma| {worst:.3e}"))
}

fn oracle_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for seed in 500..520 {
        let problem = DiscreteProblem::random(seed, rng.random_range(2..=4), rng.random_range(2..=3)).unwrap();
        let gamma = [0.5, 1.0, 4.0][rng.random_range(0..3)];
        for n in 1..=6 {
            let fast = DiscreteEngine::new(&problem).joint_measures(params(gamma, n)).unwrap();
            let slow = common::joint(&problem, gamma, n);
            for (a, b) in [
                (fast.mutual, slow.mutual),
                (fast.lautum, slow.lautum),
                (fast.skl, slow.skl()),
                (fast.chi2, slow.chi2),
                (fast.gen, slow.gen),
            ] {
                worst = worst.max((a - b).abs());
            }
        }
    }
    outcome(worst <= ORACLE_TOL, format!("20 problems, n <= 6, max deviation {worst:.3e}"))
}

fn coin_toss_joint_limit() -> Outcome {
    let start = Instant::now();
    let coin = DiscreteProblem::coin_toss(0.5).unwrap();
    let table = sweep(&coin, 1.0, &TAIL).unwrap();
    let fit = fit_limit(&table.series(|r| r.joint.skl), 1.0).unwrap();
    let rel = (fit.limit_estimate / 0.25 - 1.0).abs();
    let elapsed = start.elapsed();
    outcome(
        rel <= JOINT_LIMIT_REL_TOL && elapsed <= JOINT_LIMIT_BUDGET,
        format!("limit {:.6}, relative error {rel:.2e}, {elapsed:.2?}", fit.limit_estimate),
    )
}

fn individual_rate_constant() -> Outcome {
    let n = 512;
    let mut cases = vec![(DiscreteProblem::coin_toss(0.5).unwrap(), 1.0)];
    for seed in 0..10 {
        cases.push((DiscreteProblem::random(seed, 3, 3).unwrap(), INDIVIDUAL_RATE_GAMMA));
    }
    let mut worst: f64 = 0.0;
    for (problem, gamma) in &cases {
        let engine = DiscreteEngine::new(problem);
        let ind = engine.individual_measures(params(*gamma, n)).unwrap();
        let constant = engine.asymptotic_constant(*gamma).unwrap();
        worst = worst.max(((n * n) as f64 * ind.skl / constant - 1.0).abs());
    }
    outcome(
        worst <= INDIVIDUAL_RATE_REL_TOL,
        format!("coin toss + 10 random 3x3 at n = 512, max relative error {worst:.3e}"),
    )
}

fn gap_decay() -> Outcome {
    let coin = DiscreteProblem::coin_toss(0.5).unwrap();
    let table = sweep(&coin, 1.0, &TAIL).unwrap();
    let discrete = slope(&table.series(|r| r.gap));
    let seq: Vec<(usize, f64)> = GAUSSIAN_NS
        .iter()
        .map(|&n| (n, gaussian_closed_forms(&GaussianProblem::new(0.5, 1.0, n).unwrap()).gap))
        .collect();
    let gaussian = slope(&seq);
    outcome(
        discrete <= DISCRETE_GAP_SLOPE_MAX
            && (GAUSSIAN_GAP_SLOPE.0..=GAUSSIAN_GAP_SLOPE.1).contains(&gaussian),
        format!("coin toss slope {discrete:.4}, gaussian slope {gaussian:.4}"),
    )
}

fn mutual_lautum_balance() -> Outcome {
    let coin = DiscreteProblem::coin_toss(0.5).unwrap();
    let r = DiscreteEngine::new(&coin).joint_measures(params(1.0, 512)).unwrap();
    let discrete = (r.mutual / r.lautum - 1.0).abs();
    let g = gaussian_closed_forms(&GaussianProblem::new(0.5, 1.0, 10_000).unwrap());
    let gaussian = (g.mutual_joint / g.skl_joint - 0.5).abs();
    outcome(
        discrete <= MUTUAL_LAUTUM_TOL && gaussian <= GAUSSIAN_HALF_TOL,
        format!("|I/L - 1| = {discrete:.3e}, |I/I_SKL - 1/2| = {gaussian:.3e}"),
    )
}

fn chi2_matches_skl() -> Outcome {
    let coin = DiscreteProblem::coin_toss(0.5).unwrap();
    let r = DiscreteEngine::new(&coin).individual_measures(params(1.0, 512)).unwrap();
    let dev = (r.chi2 / r.skl - 1.0).abs();
    outcome(dev <= CHI2_TOL, format!("|chi2/I_SKL - 1| = {dev:.3e} at n = 512"))
}

fn gaussian_trace_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    for beta in [0.1, 0.5, 2.0, 7.5] {
        for gamma in [0.1, 0.5, 1.0, 4.0, 20.0] {
            for n in [1usize, 2, 3, 10, 64, 300] {
                let p = GaussianProblem::new(beta, gamma, n).unwrap();
                let r = gaussian_closed_forms(&p);
                let cov = gaussian_joint_covariance(&p).unwrap();
                let joint = gaussian_skl_trace(&cov).unwrap();
                let single = gaussian_skl_trace(&cov.marginal(&[0, 1], 1).unwrap()).unwrap();
                worst = worst.max((r.skl_joint - joint).abs()).max((r.skl_individual - single).abs());
            }
        }
    }
    let fx = gaussian_closed_forms(&GaussianProblem::new(0.5, 1.0, 10).unwrap());
    let fixture_dev = (fx.skl_joint - 0.1)
        .abs()
        .max((fx.skl_individual - 1.0 / 109.0).abs())
        .max((fx.mutual_joint - 0.5 * 1.1f64.ln()).abs());
    outcome(
        worst <= TRACE_TOL && fixture_dev <= FIXTURE_TOL,
        format!("120 grid points, max deviation {worst:.3e}; fixtures off by {fixture_dev:.1e}"),
    )
}

fn jensen_coefficient_rates() -> Outcome {
    let coeffs: Vec<_> = COEFF_NS
        .iter()
        .map(|&n| (n, jensen_gap_coefficients(&GaussianProblem::new(0.5, 1.0, n).unwrap())))
        .collect();
    let s = |f: fn(&gibbs_info::gaussian::JensenGapCoefficients) -> f64| {
        slope(&coeffs.iter().map(|(n, c)| (*n, f(c))).collect::<Vec<_>>())
    };
    let (w2, wz, z2) = (s(|c| c.w2), s(|c| c.wz), s(|c| c.z2));
    let pass = (w2 + 1.0).abs() <= COEFF_SLOPE_TOL
        && (wz + 2.0).abs() <= COEFF_SLOPE_TOL
        && (z2 + 3.0).abs() <= COEFF_SLOPE_TOL;
    outcome(pass, format!("slopes w^2 {w2:.4}, wz {wz:.4}, z^2 {z2:.4}"))
}

fn bounds() -> Outcome {
    let settings = BoundSettings {
        delta: BOUND_DELTA,
        ..BoundSettings::default()
    };
    let ns = [8usize, 64, 512];
    let mut violations = Vec::new();
    for seed in 900..920 {
        let problem = DiscreteProblem::random(seed, 3, 3).unwrap();
        let cmp = match compare_bounds(&problem, BOUND_GAMMA, &ns, settings) {
            Ok(c) => c,
            Err(e) => {
                violations.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        for row in &cmp.rows {
            let ok = row.gen >= -BOUND_SLACK
                && row.gen <= row.gamma_over_2n + BOUND_SLACK
                && (row.n < 64 || row.theorem6_holds);
            if !ok {
                violations.push(format!("seed {seed} n {}", row.n));
            }
        }
    }
    let coin = DiscreteProblem::coin_toss(0.5).unwrap();
    let cmp = compare_bounds(&coin, 1.0, &ns, settings).unwrap();
    let target = (4.0 - BOUND_DELTA) / 4.0;
    let ratios: Vec<f64> = cmp.rows.iter().map(|r| r.gen / r.theorem6).collect();
    let last = *ratios.last().unwrap();
    let trending = (last - target).abs() <= TIGHTNESS_TOL
        && ratios.windows(2).all(|w| (w[1] - target).abs() <= (w[0] - target).abs());
    outcome(
        violations.is_empty() && trending,
        format!(
            "{} violations over 20 problems; coin toss gen/bound {:.4} -> {:.4} (target {target})",
            violations.len(),
            ratios[0],
            last
        ),
    )
}

fn monte_carlo() -> Outcome {
    let problem = GaussianMeanProblem::new(0.5).unwrap();
    let gamma = 1.0;
    let config = GridConfig::default();
    let start = Instant::now();
    let a = estimate_gen_mc(&problem, gamma, 10, MC_PAIRS, MC_SEED, &config).unwrap();
    let elapsed = start.elapsed();
    let b = estimate_gen_mc(&problem, gamma, 10, MC_PAIRS, MC_SEED, &config).unwrap();
    let exact = 0.1 / gamma;
    let z = (a.value - exact) / a.std_error;
    let identical = a.value.to_bits() == b.value.to_bits() && a.std_error.to_bits() == b.std_error.to_bits();
    outcome(
        z.abs() <= MC_SIGMAS && identical && elapsed <= MC_BUDGET,
        format!(
            "estimate {:.6} +/- {:.6} ({z:+.2} s.e.), rerun identical: {identical}, {elapsed:.2?}",
            a.value, a.std_error
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("exact gap identity on random problems", exact_identity),
        ("gen equals I_SKL / gamma", gen_equals_skl_over_gamma),
        ("type classes match dataset enumeration", oracle_equivalence),
        ("coin-toss joint limit", coin_toss_joint_limit),
        ("individual-sample rate constant", individual_rate_constant),
        ("gap decay", gap_decay),
        ("mutual and lautum balance", mutual_lautum_balance),
        ("chi-squared matches I_SKL", chi2_matches_skl),
        ("gaussian closed forms vs trace oracle", gaussian_trace_oracle),
        ("gaussian jensen-gap coefficient rates", jensen_coefficient_rates),
        ("generalization bounds", bounds),
        ("monte-carlo validation", monte_carlo),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "criterion {:>2} {} {name}: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("acceptance: {} of {} passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
