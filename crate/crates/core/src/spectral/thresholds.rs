use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PhysicalParams;

/// Thresholds `k·m₁ + l·m₄` (k, l ≥ 0) up to `e_max`, sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet {
    pub values: Vec<f64>,
    pub e_max: f64,
    pub m1: f64,
    pub m4: f64,
}

/// Values closer than this are merged.
const MERGE_TOL: f64 = 1e-12;

pub fn thresholds(params: &PhysicalParams, e_max: f64) -> Result<ThresholdSet> {
    if !(e_max >= 0.0) || !e_max.is_finite() {
        return Err(Error::Domain(format!("threshold range must be a finite nonnegative number, got {e_max}")));
    }
    let (m1, m4) = (params.m1, params.m4);
    let mut values = Vec::new();
    let kmax = (e_max / m1 + MERGE_TOL).floor() as u64;
    let lmax = (e_max / m4 + MERGE_TOL).floor() as u64;
    for l in 0..=lmax {
        for k in 0..=kmax {
            let s = k as f64 * m1 + l as f64 * m4;
            if s <= e_max + MERGE_TOL {
                values.push(s);
            }
        }
    }
    values.sort_by(f64::total_cmp);
    values.dedup_by(|a, b| (*a - *b).abs() <= MERGE_TOL * b.abs().max(1.0));
    Ok(ThresholdSet { values, e_max, m1, m4 })
}

impl ThresholdSet {
    /// A threshold inside `[a, b]`, if any.
    pub fn collision(&self, a: f64, b: f64) -> Option<f64> {
        self.values.iter().copied().find(|&s| s >= a && s <= b)
    }

    /// `dist([a, b], S)`. Requires `b + m₁ ≤ e_max`: thresholds are spaced at
    /// most `m₁` apart, so nothing beyond that range can be closer.
    pub fn distance(&self, a: f64, b: f64) -> Result<f64> {
        if !(a <= b) {
            return Err(Error::Domain(format!("interval needs a <= b, got [{a}, {b}]")));
        }
        if b + self.m1 > self.e_max + MERGE_TOL {
            return Err(Error::Domain(format!(
                "threshold set enumerated to {} is too short for the interval [{a}, {b}]; need at least {}",
                self.e_max,
                b + self.m1
            )));
        }
        Ok(self
            .values
            .iter()
            .map(|&s| if s < a { a - s } else if s > b { s - b } else { 0.0 })
            .fold(f64::INFINITY, f64::min))
    }
}
