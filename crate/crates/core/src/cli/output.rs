//! Fixed-schema tables and their CSV / JSON emission.

use serde_json::{Map, Value};

use crate::asymptotics::{ClaimReport, ClaimStatus, RateFit, SweepTable};
use crate::bounds::BoundsComparison;
use crate::error::Result;

/// Column order of the sweep table.
pub const SWEEP_COLUMNS: [&str; 13] = [
    "n",
    "I_ws",
    "L_ws",
    "Iskl_ws",
    "chi2_ws",
    "gen",
    "I_wz",
    "L_wz",
    "Iskl_wz",
    "chi2_wz",
    "n_Iskl_wz_sum",
    "gap",
    "n_times_gap",
];

pub const FIT_COLUMNS: [&str; 9] = [
    "series",
    "exponent",
    "limit_estimate",
    "correction",
    "slope_estimate",
    "residual_rms",
    "tail_window",
    "zeros_excluded",
    "target",
];

pub const CLAIM_COLUMNS: [&str; 5] = ["claim", "status", "measured", "target", "detail"];

pub const GAUSSIAN_COLUMNS: [&str; 13] = [
    "beta",
    "gamma",
    "n",
    "skl_joint",
    "skl_individual",
    "mutual_joint",
    "mutual_individual",
    "gap",
    "gen",
    "skl_joint_trace",
    "skl_individual_trace",
    "mc_gen",
    "mc_std_error",
];

pub const BOUNDS_COLUMNS: [&str; 9] = [
    "n",
    "gen",
    "gamma_over_2n",
    "theorem6",
    "subgaussian",
    "ratio_gamma_over_2n",
    "ratio_theorem6",
    "ratio_subgaussian",
    "theorem6_holds",
];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Context carried into JSON output only.
    pub meta: Vec<(String, Value)>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            meta: Vec::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.meta.push((key.to_string(), value.into()));
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .header
                    .iter()
                    .zip(row)
                    .map(|(k, v)| (k.clone(), cell_value(v)))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("table".into(), Value::String(self.name.clone()));
        for (k, v) in &self.meta {
            doc.insert(k.clone(), v.clone());
        }
        doc.insert("rows".into(), Value::Array(rows));
        let mut s = serde_json::to_string_pretty(&Value::Object(doc))?;
        s.push('\n');
        Ok(s)
    }
}

fn cell_value(cell: &str) -> Value {
    if cell.is_empty() {
        return Value::Null;
    }
    match cell {
        "true" => return Value::Bool(true),
        "false" => return Value::Bool(false),
        _ => {}
    }
    if let Ok(i) = cell.parse::<i64>() {
        return Value::from(i);
    }
    match cell.parse::<f64>() {
        Ok(x) if x.is_finite() => Value::from(x),
        _ => Value::String(cell.to_string()),
    }
}

pub fn sweep_table(name: &str, t: &SweepTable) -> Table {
    let mut table = Table::new(name, &SWEEP_COLUMNS)
        .with_meta("gamma", t.gamma)
        .with_meta("fingerprint", t.fingerprint.clone());
    for r in &t.rows {
        let sum = r.individual_sum();
        table.push(vec![
            r.n.to_string(),
            fmt_f64(r.joint.mutual),
            fmt_f64(r.joint.lautum),
            fmt_f64(r.joint.skl),
            fmt_f64(r.joint.chi2),
            fmt_f64(r.joint.gen),
            fmt_f64(r.individual.mutual),
            fmt_f64(r.individual.lautum),
            fmt_f64(r.individual.skl),
            fmt_f64(r.individual.chi2),
            fmt_f64(sum),
            fmt_f64(r.gap),
            fmt_f64(r.n as f64 * r.gap),
        ]);
    }
    table
}

fn fit_row(series: &str, fit: &RateFit, target: Option<f64>) -> Vec<String> {
    vec![
        series.to_string(),
        fmt_f64(fit.exponent),
        fmt_f64(fit.limit_estimate),
        fmt_f64(fit.correction),
        fmt_f64(fit.slope_estimate),
        fmt_f64(fit.residual_rms),
        fit.tail_window.to_string(),
        fit.zeros_excluded.to_string(),
        fmt_opt(target),
    ]
}

pub fn fits_table(name: &str, report: &ClaimReport) -> Table {
    let mut table = Table::new(name, &FIT_COLUMNS).with_meta("gamma", report.gamma);
    table.push(fit_row("Iskl_ws", &report.joint_fit, Some(report.constant)));
    table.push(fit_row("Iskl_wz", &report.individual_fit, Some(report.constant)));
    table.push(fit_row("gap", &report.gap_fit, None));
    table
}

pub fn single_fit_table(name: &str, series: &str, fit: &RateFit) -> Table {
    let mut table = Table::new(name, &FIT_COLUMNS);
    table.push(fit_row(series, fit, None));
    table
}

pub fn claims_table(name: &str, report: &ClaimReport) -> Table {
    let mut table = Table::new(name, &CLAIM_COLUMNS)
        .with_meta("gamma", report.gamma)
        .with_meta("constant", report.constant);
    for c in &report.claims {
        let status = match c.status {
            ClaimStatus::Pass => "pass",
            ClaimStatus::Fail => "fail",
            ClaimStatus::Indeterminate => "indeterminate",
        };
        table.push(vec![
            c.name.to_string(),
            status.to_string(),
            fmt_f64(c.measured),
            fmt_f64(c.target),
            c.detail.clone(),
        ]);
    }
    table
}

pub fn bounds_table(name: &str, cmp: &BoundsComparison) -> Table {
    let mut table = Table::new(name, &BOUNDS_COLUMNS)
        .with_meta("gamma", cmp.gamma)
        .with_meta("loss_lower", cmp.loss_lower)
        .with_meta("loss_upper", cmp.loss_upper)
        .with_meta("delta", cmp.settings.delta)
        .with_meta(
            "theorem6_holds_from",
            cmp.theorem6_holds_from.map_or(Value::Null, Value::from),
        );
    for r in &cmp.rows {
        table.push(vec![
            r.n.to_string(),
            fmt_f64(r.gen),
            fmt_f64(r.gamma_over_2n),
            fmt_f64(r.theorem6),
            fmt_f64(r.subgaussian),
            fmt_opt(r.ratio_gamma_over_2n),
            fmt_opt(r.ratio_theorem6),
            fmt_opt(r.ratio_subgaussian),
            r.theorem6_holds.to_string(),
        ]);
    }
    table
}
