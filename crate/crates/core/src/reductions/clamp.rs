use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use super::pairing::pair_nz;
use crate::error::{Error, Result};

/// The unit step of `z` at integer `k`: 0 below `k`, `z - k` on `[k, k+1)`,
/// 1 from `k + 1` on. Summing over `k` recovers `z` up to the window offset.
pub fn clamp_entry(z: f64, k: i64) -> f64 {
    let k = k as f64;
    if z < k {
        0.0
    } else if z < k + 1.0 {
        z - k
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClampTable {
    pub k_min: i64,
    pub k_max: i64,
    /// `rows[m][k - k_min]`.
    pub rows: Vec<Vec<f64>>,
}

impl ClampTable {
    pub fn get(&self, m: usize, k: i64) -> Option<f64> {
        if k < self.k_min || k > self.k_max {
            return None;
        }
        self.rows.get(m).map(|r| r[(k - self.k_min) as usize])
    }

    /// Entries keyed by their position `<m, k>'` in the product.
    pub fn placed(&self) -> Vec<(u64, f64)> {
        let mut out: Vec<(u64, f64)> = self
            .rows
            .iter()
            .enumerate()
            .flat_map(|(m, row)| {
                row.iter()
                    .enumerate()
                    .map(move |(i, &v)| (pair_nz(m as u64, self.k_min + i as i64), v))
            })
            .collect();
        out.sort_by_key(|&(p, _)| p);
        out
    }
}

pub fn clamp_reduce(z: &[f64], window: RangeInclusive<i64>) -> Result<ClampTable> {
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    if let Some(m) = z.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidCoordinate {
            index: m,
            reason: format!("{} is not finite", z[m]),
        });
    }
    let rows = z
        .iter()
        .map(|&v| window.clone().map(|k| clamp_entry(v, k)).collect())
        .collect();
    Ok(ClampTable {
        k_min: *window.start(),
        k_max: *window.end(),
        rows,
    })
}

/// `floor(min) - 1 ..= ceil(max) + 1`: every `k` outside gives equal entries.
pub fn covering_window(z: f64, w: f64) -> RangeInclusive<i64> {
    (z.min(w).floor() as i64 - 1)..=(z.max(w).ceil() as i64 + 1)
}

/// `sum_k |theta'(z)(k) - theta'(w)(k)|` over `window`.
pub fn row_difference(z: f64, w: f64, window: RangeInclusive<i64>) -> f64 {
    window.map(|k| (clamp_entry(z, k) - clamp_entry(w, k)).abs()).sum()
}
