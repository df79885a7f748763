use serde::{Deserialize, Serialize};

use super::Constant;
use crate::error::{Error, Result};
use crate::model::ToleranceConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MazurOrliczParams {
    /// Scope of the doubling condition (a): `s, t < epsilon`.
    pub epsilon: f64,
    /// Scope of the domination condition (b): `t < delta`.
    pub delta: f64,
    /// Values of `rho` tried for (b): `s < rho t`.
    pub rho_list: Vec<f64>,
    /// Points `s` for the reduced doubling condition; the main grid when absent.
    #[serde(default)]
    pub doubling_grid: Option<Vec<f64>>,
    /// A constant is called unbounded when the witnesses at fine scales need
    /// more than `growth_factor` times the constant of the coarse scales.
    pub growth_factor: f64,
}

impl Default for MazurOrliczParams {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            delta: 1.0,
            rho_list: vec![2.0, 4.0, 16.0],
            doubling_grid: None,
            growth_factor: 2.0,
        }
    }
}

/// Minimal constant of one condition over the grid.
///
/// The grid is split at the geometric mean of its end points; `coarse` and
/// `fine` are the constants needed by witnesses whose smallest point lies above
/// and below the split. Growth from coarse to fine is the finite trace of a
/// constant that blows up at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionEstimate {
    /// `max(raw, 1)`.
    pub constant: Constant,
    pub raw: Option<Constant>,
    pub witness: Vec<f64>,
    pub coarse: Option<Constant>,
    pub fine: Option<Constant>,
    pub bounded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Linearity {
    LinearLikely,
    NotLinear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoEstimate {
    pub rho: f64,
    pub estimate: ConditionEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MazurOrliczReport {
    /// `f` exceeded 1 somewhere on the grid, so the reduced conditions used
    /// `min(f, 1)`.
    pub normalized: bool,
    pub scale_split: f64,
    /// `f(s+t) <= C (f(s) + f(t))` for `s, t < epsilon`.
    pub a: ConditionEstimate,
    /// `f(s) <= D f(t)` for `t < delta`, `s < rho t`.
    pub b: Vec<RhoEstimate>,
    /// `f(2s) <= C' f(s)`.
    pub a_prime: ConditionEstimate,
    /// `f(s) <= D' f(t)` for `s < t`.
    pub b_prime: ConditionEstimate,
    pub verdict: Linearity,
}

/// Grids here span many decades, so only an exact zero counts as a vanishing
/// denominator.
fn exact_ratio(num: f64, den: f64) -> Option<Constant> {
    if den == 0.0 {
        (num != 0.0).then_some(Constant::Infinite)
    } else {
        Some(Constant::Finite(num / den))
    }
}

struct Scan {
    split: f64,
    best: Option<(Constant, Vec<f64>)>,
    coarse: Option<Constant>,
    fine: Option<Constant>,
}

impl Scan {
    fn new(split: f64) -> Self {
        Self {
            split,
            best: None,
            coarse: None,
            fine: None,
        }
    }

    fn add(&mut self, num: f64, den: f64, points: &[f64]) {
        let Some(q) = exact_ratio(num, den) else {
            return;
        };
        if self.best.as_ref().map_or(true, |(b, _)| q > *b) {
            self.best = Some((q, points.to_vec()));
        }
        let scale = points.iter().copied().fold(f64::INFINITY, f64::min);
        let side = if scale < self.split { &mut self.fine } else { &mut self.coarse };
        *side = Some(side.map_or(q, |c| c.max(q)));
    }

    fn finish(self, growth_factor: f64, tol: &ToleranceConfig) -> ConditionEstimate {
        let raw = self.best.as_ref().map(|(q, _)| *q);
        let constant = raw.map_or(Constant::ONE, Constant::at_least_one);
        let base = self.coarse.map_or(1.0, |c| c.value().max(1.0));
        let bounded = constant.is_finite()
            && self.fine.map_or(true, |f| f.is_finite() && tol.le(f.value(), growth_factor * base));
        ConditionEstimate {
            constant,
            raw,
            witness: self.best.map(|(_, w)| w).unwrap_or_default(),
            coarse: self.coarse,
            fine: self.fine,
            bounded,
        }
    }
}

fn check_grid(grid: &[f64], what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument(format!("{what} is empty")));
    }
    if grid.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::InvalidArgument(format!("{what} must be strictly positive")));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!("{what} must be strictly increasing")));
    }
    Ok(())
}

/// Estimates the Mazur–Orlicz constants of `f` on `grid`.
///
/// Verdict is [`Linearity::LinearLikely`] iff the reduced doubling constant
/// `C'` and domination constant `D'` are both bounded (computed on `min(f,1)`).
pub fn mazur_orlicz_check(
    f: impl Fn(f64) -> f64,
    grid: &[f64],
    params: &MazurOrliczParams,
    tol: &ToleranceConfig,
) -> Result<MazurOrliczReport> {
    check_grid(grid, "grid")?;
    let doubling = params.doubling_grid.as_deref().unwrap_or(grid);
    check_grid(doubling, "doubling grid")?;

    let eval = |t: f64| -> Result<f64> {
        let v = f(t);
        if v.is_nan() || v < 0.0 {
            return Err(Error::NegativeModulus { t, value: v });
        }
        Ok(v)
    };
    let fv = grid.iter().map(|&t| eval(t)).collect::<Result<Vec<_>>>()?;
    let normalized = fv.iter().any(|&v| v > 1.0);
    let capped = |v: f64| v.min(1.0);
    let split = (grid[0] * grid[grid.len() - 1]).sqrt();

    let mut a = Scan::new(split);
    for i in 0..grid.len() {
        for j in i..grid.len() {
            let (s, t) = (grid[i], grid[j]);
            if s < params.epsilon && t < params.epsilon {
                a.add(eval(s + t)?, fv[i] + fv[j], &[s, t]);
            }
        }
    }

    let mut b = Vec::with_capacity(params.rho_list.len());
    for &rho in &params.rho_list {
        let mut scan = Scan::new(split);
        for (j, &t) in grid.iter().enumerate() {
            if t >= params.delta {
                continue;
            }
            for (i, &s) in grid.iter().enumerate() {
                if s < rho * t {
                    scan.add(fv[i], fv[j], &[s, t]);
                }
            }
        }
        b.push(RhoEstimate {
            rho,
            estimate: scan.finish(params.growth_factor, tol),
        });
    }

    let mut a_prime = Scan::new(split);
    for &s in doubling {
        a_prime.add(capped(eval(2.0 * s)?), capped(eval(s)?), &[s]);
    }

    let mut b_prime = Scan::new(split);
    for i in 0..grid.len() {
        for j in i + 1..grid.len() {
            b_prime.add(capped(fv[i]), capped(fv[j]), &[grid[i], grid[j]]);
        }
    }

    let a_prime = a_prime.finish(params.growth_factor, tol);
    let b_prime = b_prime.finish(params.growth_factor, tol);
    let verdict = if a_prime.bounded && b_prime.bounded {
        Linearity::LinearLikely
    } else {
        Linearity::NotLinear
    };
    Ok(MazurOrliczReport {
        normalized,
        scale_split: split,
        a: a.finish(params.growth_factor, tol),
        b,
        a_prime,
        b_prime,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::log_grid;

    fn check(f: impl Fn(f64) -> f64, grid: &[f64]) -> MazurOrliczReport {
        mazur_orlicz_check(f, grid, &MazurOrliczParams::default(), &ToleranceConfig::default()).unwrap()
    }

    #[test]
    fn identity_is_linear() {
        let r = check(|t| t, &log_grid(1e-6, 0.5, 60));
        assert_eq!(r.a_prime.constant, Constant::Finite(2.0));
        assert_eq!(r.b_prime.constant, Constant::ONE);
        assert_eq!(r.verdict, Linearity::LinearLikely);
        assert!(!r.normalized);
    }

    #[test]
    fn capped_identity_is_linear() {
        let r = check(|t: f64| t.min(1.0), &log_grid(1e-4, 8.0, 80));
        assert!(r.a_prime.constant.value() <= 2.0);
        assert_eq!(r.b_prime.constant, Constant::ONE);
        assert_eq!(r.verdict, Linearity::LinearLikely);
    }

    #[test]
    fn powers_double_by_two_to_the_p() {
        for p in [0.3, 1.0, 2.5] {
            let r = check(|t: f64| t.powf(p), &log_grid(1e-5, 0.4, 50));
            let c = r.a_prime.constant.value();
            assert!(c <= 2f64.powf(p) * (1.0 + 1e-12), "p={p}: {c}");
            assert_eq!(r.b_prime.constant, Constant::ONE);
        }
    }

    #[test]
    fn zero_function_away_from_origin_is_unbounded() {
        // f vanishes on (0, 1e-3): f(2s) > 0 = f(s) at the edge.
        let grid = log_grid(1e-4, 0.1, 40);
        let r = check(|t| if t < 1e-3 { 0.0 } else { t }, &grid);
        assert_eq!(r.a_prime.constant, Constant::Infinite);
        assert!(!r.a_prime.bounded);
        assert_eq!(r.verdict, Linearity::NotLinear);
    }

    #[test]
    fn oscillation_growing_toward_zero_is_unbounded() {
        // f(s)/f(t) for s<t blows up like 1/scale at fine scales.
        let f = |t: f64| {
            let k = (-t.log2()).floor();
            if (k as i64) % 2 == 0 {
                t
            } else {
                t * (1.0 / t).sqrt()
            }
        };
        let r = check(f, &log_grid(1e-12, 0.5, 200));
        assert!(!r.b_prime.bounded);
        assert_eq!(r.verdict, Linearity::NotLinear);
    }

    #[test]
    fn negative_values_rejected() {
        let e = mazur_orlicz_check(
            |t| t - 0.5,
            &[0.1, 1.0],
            &MazurOrliczParams::default(),
            &ToleranceConfig::default(),
        );
        assert!(matches!(e, Err(Error::NegativeModulus { .. })));
    }

    #[test]
    fn unsorted_grid_rejected() {
        let e = mazur_orlicz_check(
            |t| t,
            &[0.2, 0.1],
            &MazurOrliczParams::default(),
            &ToleranceConfig::default(),
        );
        assert!(e.is_err());
    }

    #[test]
    fn original_conditions_reported() {
        let r = check(|t| t, &log_grid(1e-3, 0.5, 30));
        // f(s+t) = f(s) + f(t) exactly for the identity
        assert!((r.a.constant.value() - 1.0).abs() < 1e-12);
        for e in &r.b {
            assert!(e.estimate.constant.value() <= e.rho * (1.0 + 1e-12));
        }
    }
}
