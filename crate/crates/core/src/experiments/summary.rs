use std::collections::BTreeMap;

use serde::Serialize;

use super::config::Method;
use super::runner::ResultRow;
use crate::error::{domain, Result};

/// Mean and standard error of `subopt` for one `(method, K, n)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub method: Method,
    pub capacity: usize,
    pub n: usize,
    pub replications: usize,
    pub mean: f64,
    pub std_err: f64,
}

/// Groups rows by `(method, K, n)`; output is sorted by that key.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(Method, usize, usize), Vec<f64>> = BTreeMap::new();
    for row in rows {
        groups
            .entry((row.method, row.capacity, row.n))
            .or_default()
            .push(row.subopt);
    }
    groups
        .into_iter()
        .map(|((method, capacity, n), values)| {
            let m = values.len() as f64;
            let mean = values.iter().sum::<f64>() / m;
            let std_err = if values.len() < 2 {
                0.0
            } else {
                let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
                (var / m).sqrt()
            };
            SummaryRow {
                method,
                capacity,
                n,
                replications: values.len(),
                mean,
                std_err,
            }
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(domain(format!(
            "a log-log slope needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some((x, y)) = points.iter().find(|(x, y)| !(*x > 0.0) || !(*y > 0.0)) {
        return Err(domain(format!(
            "log-log fit needs positive coordinates, got ({x}, {y})"
        )));
    }
    let m = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(domain("log-log fit needs at least two distinct x values"));
    }
    Ok(sxy / sxx)
}

/// `(K, mean subopt)` points for one method at one `n`, ordered by `K`.
pub fn capacity_curve(summary: &[SummaryRow], method: Method, n: usize) -> Vec<(f64, f64)> {
    summary
        .iter()
        .filter(|s| s.method == method && s.n == n)
        .map(|s| (s.capacity as f64, s.mean))
        .collect()
}
