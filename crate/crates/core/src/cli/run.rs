use std::path::{Path, PathBuf};

use crate::asymptotics::{fit_limit_tail, sweep_with, verify_claims_on};
use crate::bounds::{compare_bounds, BoundSettings};
use crate::engine::DiscreteEngine;
use crate::error::{Error, Result};
use crate::gaussian::{
    gaussian_closed_forms, gaussian_joint_covariance, gaussian_skl_trace, GaussianProblem,
};
use crate::mc::{estimate_gen_mc, GaussianMeanProblem, GridConfig};
use crate::problem::DiscreteProblem;

use super::config::{ExperimentConfig, Format, Mode};
use super::output::{
    bounds_table, claims_table, fits_table, fmt_f64, fmt_opt, single_fit_table, sweep_table,
    Table, GAUSSIAN_COLUMNS,
};

/// Largest `n` for which the gaussian mode evaluates the dense trace oracle.
pub const TRACE_MAX_N: usize = 1024;

/// Result of a run: emitted tables, human-readable notes, and the first
/// failing claim when any.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub tables: Vec<Table>,
    pub notes: Vec<String>,
    pub failed_claim: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub report: RunReport,
    pub written: Vec<PathBuf>,
    /// Main table rendered for stdout when no output path was given.
    pub stdout: Option<String>,
}

impl RunOutcome {
    /// Nonzero when `--strict` is set and a claim failed.
    pub fn exit_code(&self, strict: bool) -> i32 {
        if strict && self.report.failed_claim.is_some() {
            2
        } else {
            0
        }
    }
}

fn table_name(base: &str, gamma: f64, many: bool) -> String {
    if many {
        format!("{base}_gamma{gamma}")
    } else {
        base.to_string()
    }
}

fn discrete_problem(config: &ExperimentConfig) -> Result<DiscreteProblem> {
    match (&config.problem, config.mode) {
        (Some(src), _) => src.load(),
        (None, Mode::Custom) => Err(Error::Parse(
            "config field `problem` is required for mode custom".into(),
        )),
        (None, _) => DiscreteProblem::coin_toss(config.p.unwrap_or(0.5)),
    }
}

fn run_sweeps(config: &ExperimentConfig, report: &mut RunReport) -> Result<()> {
    let problem = discrete_problem(config)?;
    let engine = DiscreteEngine::new(&problem);
    let gammas = config.gamma.as_ref().map(|g| g.values()).unwrap_or_default();
    let many = gammas.len() > 1;
    let n_list = &config.n_list;
    let claims_apply = n_list.len() >= 4 && n_list.last().is_some_and(|n| *n >= 256);
    for gamma in gammas {
        let table = sweep_with(&engine, gamma, n_list)?;
        report
            .tables
            .push(sweep_table(&table_name("sweep", gamma, many), &table));
        if !claims_apply {
            report.notes.push(format!(
                "gamma {gamma}: claim checks skipped (need >= 4 values of n with max n >= 256)"
            ));
            continue;
        }
        let constant = engine.asymptotic_constant(gamma)?;
        let claims = verify_claims_on(&table, constant, config.tol)?;
        for c in &claims.claims {
            report.notes.push(format!(
                "gamma {gamma}: {:<20} {:?} measured {} ({})",
                c.name, c.status, fmt_f64(c.measured), c.detail
            ));
        }
        if report.failed_claim.is_none() {
            if let Some(c) = claims.first_failure() {
                report.failed_claim = Some(format!("{} (gamma {gamma})", c.name));
            }
        }
        report
            .tables
            .push(fits_table(&table_name("fits", gamma, many), &claims));
        report
            .tables
            .push(claims_table(&table_name("claims", gamma, many), &claims));
    }
    Ok(())
}

fn run_gaussian(config: &ExperimentConfig, report: &mut RunReport) -> Result<()> {
    let beta = config
        .beta
        .ok_or_else(|| Error::Parse("config field `beta` is required for mode gaussian".into()))?;
    let gammas = config.gamma.as_ref().map(|g| g.values()).unwrap_or_default();
    let mc_problem = GaussianMeanProblem::new(beta)?;
    let grid = GridConfig {
        points: config.mc.grid_points,
        ..GridConfig::default()
    };
    let mut table = Table::new("gaussian", &GAUSSIAN_COLUMNS);
    for gamma in gammas {
        for &n in &config.n_list {
            let p = GaussianProblem::new(beta, gamma, n)?;
            let r = gaussian_closed_forms(&p);
            let (trace_joint, trace_individual) = if n <= TRACE_MAX_N {
                let cov = gaussian_joint_covariance(&p)?;
                let pair = cov.marginal(&[0, 1], 1)?;
                (
                    Some(gaussian_skl_trace(&cov)?),
                    Some(gaussian_skl_trace(&pair)?),
                )
            } else {
                (None, None)
            };
            let mc = if config.mc.num_datasets > 0 {
                Some(estimate_gen_mc(
                    &mc_problem,
                    gamma,
                    n,
                    config.mc.num_datasets,
                    config.mc.seed,
                    &grid,
                )?)
            } else {
                None
            };
            if let Some(est) = &mc {
                let z = (est.value - r.gen) / est.std_error;
                report.notes.push(format!(
                    "gamma {gamma}, n {n}: MC gen {} +/- {} vs closed form {} ({z:+.2} s.e.)",
                    fmt_f64(est.value),
                    fmt_f64(est.std_error),
                    fmt_f64(r.gen)
                ));
            }
            table.push(vec![
                fmt_f64(beta),
                fmt_f64(gamma),
                n.to_string(),
                fmt_f64(r.skl_joint),
                fmt_f64(r.skl_individual),
                fmt_f64(r.mutual_joint),
                fmt_f64(r.mutual_individual),
                fmt_f64(r.gap),
                fmt_f64(r.gen),
                fmt_opt(trace_joint),
                fmt_opt(trace_individual),
                fmt_opt(mc.map(|e| e.value)),
                fmt_opt(mc.map(|e| e.std_error)),
            ]);
        }
    }
    if config.mc.num_datasets > 0 {
        table = table
            .with_meta("seed", config.mc.seed)
            .with_meta("num_datasets", config.mc.num_datasets as u64);
    }
    report.tables.push(table);
    Ok(())
}

fn run_bounds(config: &ExperimentConfig, report: &mut RunReport) -> Result<()> {
    let problem = discrete_problem(config)?;
    let gammas = config.gamma.as_ref().map(|g| g.values()).unwrap_or_default();
    let many = gammas.len() > 1;
    let settings = BoundSettings {
        delta: config.delta.unwrap_or(0.5),
        sigma: config.sigma,
        ce: config.ce.unwrap_or(0.0),
    };
    for gamma in gammas {
        let cmp = compare_bounds(&problem, gamma, &config.n_list, settings)?;
        let from = cmp
            .theorem6_holds_from
            .map_or("never within the tested range".to_string(), |n| format!("n >= {n}"));
        report.notes.push(format!(
            "gamma {gamma}: (4 - delta) bound with delta {} holds from {from}",
            settings.delta
        ));
        report
            .tables
            .push(bounds_table(&table_name("bounds", gamma, many), &cmp));
    }
    Ok(())
}

/// Reads `(n, value)` pairs from a CSV with an `n` column and the named value column.
pub fn read_sequence(path: &Path, column: &str) -> Result<Vec<(usize, f64)>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::Parse(format!("{}: no column `{name}`", path.display()))
        })
    };
    let (n_idx, v_idx) = (find("n")?, find(column)?);
    let mut seq = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let parse_err = |field: &str| {
            Error::Parse(format!(
                "{}: line {}: cannot parse `{field}`",
                path.display(),
                line + 2
            ))
        };
        let n = record[n_idx].parse::<usize>().map_err(|_| parse_err("n"))?;
        let v = record[v_idx].parse::<f64>().map_err(|_| parse_err(column))?;
        seq.push((n, v));
    }
    Ok(seq)
}

fn run_fit(config: &ExperimentConfig, report: &mut RunReport) -> Result<()> {
    let input = config
        .input
        .as_ref()
        .ok_or_else(|| Error::Parse("config field `input` is required for mode fit".into()))?;
    let seq = read_sequence(input, &config.column)?;
    let fit = fit_limit_tail(&seq, config.power, config.window)?;
    report.notes.push(format!(
        "limit of n^{} * {}: {} (log-log slope {})",
        config.power,
        config.column,
        fmt_f64(fit.limit_estimate),
        fmt_f64(fit.slope_estimate)
    ));
    report
        .tables
        .push(single_fit_table("fit", &config.column, &fit));
    Ok(())
}

/// Runs the selected pipeline without touching the filesystem for output.
pub fn execute(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let mut report = RunReport {
        tables: Vec::new(),
        notes: Vec::new(),
        failed_claim: None,
    };
    match config.mode {
        Mode::CoinToss | Mode::Custom => run_sweeps(config, &mut report)?,
        Mode::Gaussian => run_gaussian(config, &mut report)?,
        Mode::Bounds => run_bounds(config, &mut report)?,
        Mode::Fit => run_fit(config, &mut report)?,
    }
    Ok(report)
}

fn render(table: &Table, format: Format) -> Result<String> {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    }
}

/// Path of a companion table: `out.csv` + `claims` -> `out.claims.csv`.
pub fn companion_path(out: &Path, name: &str, format: Format) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    out.with_file_name(format!("{stem}.{name}.{}", format.extension()))
}

/// Computes everything, then writes the tables. The first table goes to the
/// output path (or stdout); the others go to companion files next to it.
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome> {
    let report = execute(config)?;
    let format = config.output.format;
    let mut written = Vec::new();
    let mut stdout = None;
    match &config.output.path {
        Some(out) => {
            for (i, table) in report.tables.iter().enumerate() {
                let path = if i == 0 {
                    out.clone()
                } else {
                    companion_path(out, &table.name, format)
                };
                std::fs::write(&path, render(table, format)?)?;
                written.push(path);
            }
        }
        None => {
            if let Some(first) = report.tables.first() {
                stdout = Some(render(first, format)?);
            }
        }
    }
    Ok(RunOutcome {
        report,
        written,
        stdout,
    })
}
