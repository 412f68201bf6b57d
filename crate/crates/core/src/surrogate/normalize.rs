//! Affine maps between raw values and the network's [-1, 1] scale.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Closed interval `[lo, hi]` with `lo < hi`, serialized as `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Range {
    lo: f64,
    hi: f64,
}

impl Range {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(param("range", format!("need finite lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Range { lo, hi })
    }

    /// Smallest range covering `values`. A constant column is widened by
    /// half a unit on either side (or by half its magnitude) so that it
    /// still normalizes to 0.
    pub fn covering(values: impl IntoIterator<Item = f64>) -> Result<Self> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(param("range", "no finite values"));
        }
        if lo == hi {
            let pad = if lo == 0.0 { 0.5 } else { 0.5 * lo.abs() };
            return Range::new(lo - pad, hi + pad);
        }
        Range::new(lo, hi)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }

    pub fn normalize(&self, v: f64) -> f64 {
        2.0 * (v - self.lo) / (self.hi - self.lo) - 1.0
    }

    pub fn denormalize(&self, z: f64) -> f64 {
        self.lo + 0.5 * (z + 1.0) * (self.hi - self.lo)
    }
}

impl TryFrom<[f64; 2]> for Range {
    type Error = crate::NavError;

    fn try_from(v: [f64; 2]) -> Result<Self> {
        Range::new(v[0], v[1])
    }
}

impl From<Range> for [f64; 2] {
    fn from(r: Range) -> Self {
        [r.lo, r.hi]
    }
}

pub fn normalize(value: f64, lo: f64, hi: f64) -> Result<f64> {
    Ok(Range::new(lo, hi)?.normalize(value))
}

pub fn denormalize(z: f64, lo: f64, hi: f64) -> Result<f64> {
    Ok(Range::new(lo, hi)?.denormalize(z))
}
