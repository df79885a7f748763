use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FamilyDescription, FunctionSpec, ModulusSpec};

/// Gap samples tried for function moduli, on top of their breakpoints.
const F_GAP_SAMPLES: usize = 1025;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessTerm {
    pub coord: usize,
    pub u: String,
    pub v: String,
    pub value: f64,
}

/// Finite evidence for the small-terms/divergent-sum condition at one
/// threshold `c`: from coordinate `start` on, every term is below `c`, and the
/// terms add up to at least `target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1Witness {
    pub c: f64,
    pub target: f64,
    pub start: usize,
    pub terms: Vec<WitnessTerm>,
    pub sum: f64,
}

/// Outcome of one search: the witness if found, else the largest partial sum
/// the greedy run reached.
pub(crate) struct SearchOutcome {
    pub witness: Option<L1Witness>,
    pub best_sum: f64,
}

/// The pair of coordinate `index` maximizing `psi(u,v)` subject to
/// `psi(u,v) < c`. Exact for tables, indicators and power moduli; function
/// moduli are scanned on a gap grid plus their breakpoints.
pub(crate) fn max_below(spec: &ModulusSpec, index: usize, c: f64) -> Result<Option<(String, String, f64)>> {
    match spec {
        ModulusSpec::Table(_) | ModulusSpec::Indicator { .. } => {
            let s = spec.sample(index, None)?;
            let mut best: Option<(usize, usize, f64)> = None;
            for i in 0..s.len() {
                for j in 0..s.len() {
                    let v = s.get(i, j);
                    if v < c && best.map_or(true, |(_, _, b)| v > b) {
                        best = Some((i, j, v));
                    }
                }
            }
            Ok(best.map(|(i, j, v)| (s.points()[i].clone(), s.points()[j].clone(), v)))
        }
        ModulusSpec::Power { p, domain } => {
            let [lo, hi] = *domain;
            let width = hi - lo;
            let mut v = if width.powf(*p) < c { hi } else { (lo + c.powf(1.0 / p)).min(hi) };
            // Step down until the realized gap is strictly admissible.
            loop {
                let value = spec.gap_modulus(v - lo).expect("power");
                if value < c {
                    let (ul, vl) = (lo.to_string(), v.to_string());
                    let value = spec.psi(index, &ul, &vl)?;
                    if value < c {
                        return Ok(Some((ul, vl, value)));
                    }
                }
                if v <= lo {
                    // psi(lo, lo) = 0 < c always; unreachable for c > 0.
                    return Ok(None);
                }
                v = v.next_down();
            }
        }
        ModulusSpec::F { f, domain } => {
            let [lo, hi] = *domain;
            let width = hi - lo;
            let mut gaps: Vec<f64> = (0..F_GAP_SAMPLES)
                .map(|i| width * i as f64 / (F_GAP_SAMPLES - 1) as f64)
                .collect();
            if let FunctionSpec::Piecewise(pw) = f {
                gaps.extend(pw.breakpoints().iter().chain(pw.joins()).filter(|g| **g <= width));
            }
            let mut best: Option<(String, String, f64)> = None;
            for g in gaps {
                let (ul, vl) = (lo.to_string(), (lo + g).min(hi).to_string());
                let value = spec.psi(index, &ul, &vl)?;
                if value < c && best.as_ref().map_or(true, |b| value > b.2) {
                    best = Some((ul, vl, value));
                }
            }
            Ok(best)
        }
    }
}

pub(crate) fn search(fam: &FamilyDescription, c: f64, target: f64, budget: usize) -> Result<SearchOutcome> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!("threshold c must be positive, got {c}")));
    }
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::InvalidArgument(format!("target must be positive, got {target}")));
    }
    let mut start = 0;
    let mut terms = Vec::new();
    let mut sum = 0.0;
    let mut best_sum: f64 = 0.0;
    for (n, spec) in fam.coords.iter().enumerate().take(budget) {
        match max_below(spec, n, c)? {
            None => {
                // Every later term must stay below c, so restart after n.
                start = n + 1;
                terms.clear();
                sum = 0.0;
            }
            Some((u, v, value)) => {
                sum += value;
                terms.push(WitnessTerm { coord: n, u, v, value });
                best_sum = best_sum.max(sum);
                if sum >= target {
                    return Ok(SearchOutcome {
                        witness: Some(L1Witness {
                            c,
                            target,
                            start,
                            terms,
                            sum,
                        }),
                        best_sum,
                    });
                }
            }
        }
    }
    Ok(SearchOutcome {
        witness: None,
        best_sum,
    })
}

/// Greedy search: on each coordinate take the largest admissible term. Since
/// this is optimal coordinate by coordinate, a failed search means no pair of
/// vectors in this truncation reaches `target` with all terms below `c`.
pub fn search_l1_witness(
    fam: &FamilyDescription,
    c: f64,
    target: f64,
    budget: usize,
) -> Result<Option<L1Witness>> {
    Ok(search(fam, c, target, budget)?.witness)
}
