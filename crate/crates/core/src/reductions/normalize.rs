use super::pairing::cantor_unpair;
use crate::error::{Error, Result};
use crate::model::ModulusSpec;

/// Lifts a pseudo-metric to a metric: distinct points closer than `2^-n`
/// are pushed out to exactly `2^-n`.
pub fn normalize_metric(d: &[Vec<f64>], n: u32) -> Result<Vec<Vec<f64>>> {
    let floor = 0.5f64.powi(n as i32);
    let size = d.len();
    d.iter()
        .enumerate()
        .map(|(i, row)| {
            if row.len() != size {
                return Err(Error::InvalidArgument(format!("row {i} has {} entries, expected {size}", row.len())));
            }
            row.iter()
                .enumerate()
                .map(|(j, &v)| {
                    if !(v >= 0.0) {
                        return Err(Error::NegativeValue { row: i, col: j, value: v });
                    }
                    Ok(if i == j {
                        0.0
                    } else if v <= floor {
                        floor
                    } else {
                        v
                    })
                })
                .collect()
        })
        .collect()
}

/// 0 inside a block, 1 across blocks.
pub fn indicator_modulus<S: Into<String>>(blocks: Vec<Vec<S>>) -> Result<ModulusSpec> {
    ModulusSpec::indicator(blocks)
}

/// Embeds a point `u` of factor `i` into the product: position `<k, j>`
/// holds `u` when `k = i` and the fixed point `filler[k]` of factor `k`
/// otherwise. The output has `len` positions.
pub fn placement<T: Clone>(i: u64, u: &T, filler: &[T], len: usize) -> Result<Vec<T>> {
    (0..len as u64)
        .map(|p| {
            let (k, _) = cantor_unpair(p);
            if k == i {
                Ok(u.clone())
            } else {
                filler.get(k as usize).cloned().ok_or(Error::IndexOutOfRange {
                    index: k as usize,
                    max: filler.len(),
                })
            }
        })
        .collect()
}
