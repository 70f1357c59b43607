//! Per-sweep-point aggregation of experiment CSVs.

use std::collections::HashMap;
use std::io::Read;

use serde::Serialize;

use crate::runner::{CONVERGENCE_HEADER, NULLING_HEADER, POWERMIN_HEADER, SUMRATE_HEADER};
use crate::ExperimentError;

/// One `(sweep point, scheme)` cell. The `paired_*` columns compare the
/// scheme with the first scheme of the same point over shared trial indices
/// and are empty for that reference scheme itself.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub point: String,
    pub scheme: String,
    pub metric: String,
    pub n: usize,
    pub mean: f64,
    pub stderr: f64,
    pub success_prob: f64,
    pub rows: usize,
    pub paired_ref: Option<String>,
    pub paired_n: Option<usize>,
    pub paired_diff_mean: Option<f64>,
    pub paired_diff_stderr: Option<f64>,
}

struct Layout {
    keys: &'static [&'static str],
    scheme: Option<&'static str>,
    metric: &'static str,
    success: Success,
}

enum Success {
    Bool(&'static str),
    StatusOptimal,
}

fn layout(header: &[String]) -> Option<Layout> {
    let is = |h: &[&str]| header.iter().map(String::as_str).eq(h.iter().copied());
    if is(&NULLING_HEADER) {
        Some(Layout {
            keys: &["q", "alpha_max_sq_db"],
            scheme: None,
            metric: "residual_power",
            success: Success::Bool("success"),
        })
    } else if is(&CONVERGENCE_HEADER) {
        Some(Layout {
            keys: &["alpha_max_sq_db", "iteration"],
            scheme: Some("scheme"),
            metric: "sum_rate",
            success: Success::StatusOptimal,
        })
    } else if is(&SUMRATE_HEADER) {
        Some(Layout {
            keys: &["alpha_max_sq_db", "p_k_dbm", "p_ris_dbm"],
            scheme: Some("scheme"),
            metric: "sum_rate",
            success: Success::Bool("feasible"),
        })
    } else if is(&POWERMIN_HEADER) {
        Some(Layout {
            keys: &["alpha_max_sq_db", "rate_req_bps_hz"],
            scheme: Some("scheme"),
            metric: "power_w",
            success: Success::Bool("feasible"),
        })
    } else {
        None
    }
}

/// Sample mean and standard error (zero for a single sample).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[derive(Default)]
struct Cell {
    values: Vec<f64>,
    by_trial: HashMap<String, f64>,
    successes: usize,
    rows: usize,
}

/// Aggregates an experiment CSV. Means use the finite metric values only
/// (infeasible power-minimization rows carry NaN power).
pub fn summarize<R: Read>(input: R) -> Result<Vec<SummaryRow>, ExperimentError> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let lay = layout(&header).ok_or_else(|| ExperimentError::Schema(format!("unrecognized header: {}", header.join(","))))?;
    let col = |name: &str| header.iter().position(|h| h == name).expect("layout column");
    let key_cols: Vec<usize> = lay.keys.iter().map(|k| col(k)).collect();
    let scheme_col = lay.scheme.map(col);
    let metric_col = col(lay.metric);
    let trial_col = col("trial");
    let success_col = match lay.success {
        Success::Bool(c) => col(c),
        Success::StatusOptimal => col("status"),
    };

    let mut points: Vec<String> = Vec::new();
    let mut schemes: HashMap<String, Vec<String>> = HashMap::new();
    let mut cells: HashMap<(String, String), Cell> = HashMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |c: usize| rec.get(c).unwrap_or("");
        let point = lay
            .keys
            .iter()
            .zip(&key_cols)
            .map(|(k, &c)| format!("{k}={}", field(c)))
            .collect::<Vec<_>>()
            .join(";");
        let scheme = scheme_col.map_or_else(String::new, |c| field(c).to_string());
        let value: f64 = field(metric_col)
            .parse()
            .map_err(|_| ExperimentError::Schema(format!("row {}: {} is not a number", i + 2, lay.metric)))?;
        let success = match lay.success {
            Success::Bool(_) => match field(success_col) {
                "true" => true,
                "false" => false,
                other => return Err(ExperimentError::Schema(format!("row {}: bad boolean {other:?}", i + 2))),
            },
            Success::StatusOptimal => field(success_col) == "optimal",
        };
        if !points.contains(&point) {
            points.push(point.clone());
        }
        let list = schemes.entry(point.clone()).or_default();
        if !list.contains(&scheme) {
            list.push(scheme.clone());
        }
        let cell = cells.entry((point, scheme)).or_default();
        cell.rows += 1;
        cell.successes += usize::from(success);
        if value.is_finite() {
            cell.values.push(value);
            cell.by_trial.insert(field(trial_col).to_string(), value);
        }
    }

    let mut out = Vec::new();
    for point in &points {
        let list = &schemes[point];
        let reference = &list[0];
        for scheme in list {
            let cell = &cells[&(point.clone(), scheme.clone())];
            let (mean, stderr) = mean_stderr(&cell.values);
            let mut row = SummaryRow {
                point: point.clone(),
                scheme: scheme.clone(),
                metric: lay.metric.to_string(),
                n: cell.values.len(),
                mean,
                stderr,
                success_prob: cell.successes as f64 / cell.rows as f64,
                rows: cell.rows,
                paired_ref: None,
                paired_n: None,
                paired_diff_mean: None,
                paired_diff_stderr: None,
            };
            if scheme != reference {
                let base = &cells[&(point.clone(), reference.clone())];
                let mut trials: Vec<&String> = cell.by_trial.keys().filter(|t| base.by_trial.contains_key(*t)).collect();
                trials.sort_by_key(|t| t.parse::<u64>().unwrap_or(u64::MAX));
                let diffs: Vec<f64> = trials.iter().map(|t| cell.by_trial[*t] - base.by_trial[*t]).collect();
                let (dm, ds) = mean_stderr(&diffs);
                row.paired_ref = Some(reference.clone());
                row.paired_n = Some(diffs.len());
                row.paired_diff_mean = Some(dm);
                row.paired_diff_stderr = Some(ds);
            }
            out.push(row);
        }
    }
    Ok(out)
}

/// Writes summary rows as CSV.
pub fn write_summary<W: std::io::Write>(rows: &[SummaryRow], w: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(w);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
