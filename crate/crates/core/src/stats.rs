//! Small order statistics used for Monte Carlo summaries.

use serde::{Deserialize, Serialize};

/// Linear-interpolation quantile of `values` at `q` in `[0, 1]`.
/// Returns NaN for an empty slice.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    v[lo] + (v[hi] - v[lo]) * frac
}

pub fn median(values: &[f64]) -> f64 {
    quantile(values, 0.5)
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub median: f64,
    pub mean: f64,
    pub q10: f64,
    pub q90: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        Summary {
            median: median(values),
            mean: mean(values),
            q10: quantile(values, 0.1),
            q90: quantile(values, 0.9),
        }
    }
}
