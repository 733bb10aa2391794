use serde::{Deserialize, Serialize};

use super::BenchRecord;
use crate::blocks::Method;
use crate::error::{Error, Result};

/// Least-squares fit of `log(median_ns)` against `log(N)` for one method at
/// one channel count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub method: Method,
    pub c: u64,
    pub exponent: f64,
    /// Intercept of the fitted line in natural-log space.
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

pub const MIN_FIT_POINTS: usize = 4;

fn select(records: &[BenchRecord], method: Method, c: u64) -> Vec<&BenchRecord> {
    let mut sel: Vec<&BenchRecord> = records
        .iter()
        .filter(|r| r.method == method && r.c == c)
        .collect();
    sel.sort_by_key(|r| r.n);
    sel
}

pub fn fit_slope(records: &[BenchRecord], method: Method, c: u64) -> Result<ScalingFit> {
    let sel = select(records, method, c);
    if sel.len() < MIN_FIT_POINTS {
        return Err(Error::Config(format!(
            "{method} at C={c}: {} points, a fit needs at least {MIN_FIT_POINTS}",
            sel.len()
        )));
    }
    if sel.iter().any(|r| r.median_ns == 0 || r.n == 0) {
        return Err(Error::numeric(
            "fit_slope",
            "zero time or size cannot be log-transformed",
        ));
    }
    let xs: Vec<f64> = sel.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = sel.iter().map(|r| (r.median_ns as f64).ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::numeric("fit_slope", "all points share one N"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let r2 = if ss_tot == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(ScalingFit {
        method,
        c,
        exponent: slope,
        intercept,
        r2,
        points: sel.len(),
    })
}

/// Number of adjacent pairs, ordered by N, where the larger N ran faster.
pub fn inversions(records: &[BenchRecord], method: Method, c: u64) -> usize {
    select(records, method, c)
        .windows(2)
        .filter(|w| w[1].median_ns < w[0].median_ns)
        .count()
}
