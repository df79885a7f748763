//! Koch-type curve `K: R -> R^2` with `|K(s) - K(t)| ~ |s - t|^rho`.
//!
//! On `[0, 1]` the curve is the attractor of four similitudes of ratio `r`
//! carrying `[0, 1]` onto the edges of the polygon
//! `(0,0), (r,0), (1/2,h), (1-r,0), (1,0)`; `r = 4^-rho` makes the exponent
//! exact at base-4 scales. On `[i, i+1]` it is translated by `interval_offset * i`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::sig17;
use crate::model::ToleranceConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KochParams {
    pub r: f64,
    pub rho: f64,
    pub depth: u32,
    #[serde(default = "default_offset")]
    pub interval_offset: f64,
}

fn default_offset() -> f64 {
    1.0
}

impl KochParams {
    pub fn from_rho(rho: f64, depth: u32) -> Result<Self> {
        let p = Self {
            r: 4f64.powf(-rho),
            rho,
            depth,
            interval_offset: default_offset(),
        };
        p.validate(&ToleranceConfig::default())?;
        Ok(p)
    }

    pub fn validate(&self, tol: &ToleranceConfig) -> Result<()> {
        if !(0.25..=0.5).contains(&self.r) {
            return Err(Error::RatioOutOfRange(self.r));
        }
        if !tol.approx_eq(self.r, 4f64.powf(-self.rho)) {
            return Err(Error::InvalidArgument(format!(
                "r = {} does not match 4^-rho = {}",
                self.r,
                4f64.powf(-self.rho)
            )));
        }
        if self.depth < 1 {
            return Err(Error::InvalidArgument("depth must be at least 1".into()));
        }
        if !(self.interval_offset.is_finite() && self.interval_offset >= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "interval_offset {} must be at least 1",
                self.interval_offset
            )));
        }
        Ok(())
    }

    pub fn height(&self) -> f64 {
        (self.r * self.r - (0.5 - self.r).powi(2)).max(0.0).sqrt()
    }

    fn vertices(&self) -> [(f64, f64); 5] {
        let r = self.r;
        [(0.0, 0.0), (r, 0.0), (0.5, self.height()), (1.0 - r, 0.0), (1.0, 0.0)]
    }
}

fn cmul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

/// Unit-interval curve: compose the similitudes picked by the first `depth`
/// base-4 digits, then interpolate linearly along the remaining edge.
fn unit_point(p: &KochParams, s: f64) -> (f64, f64) {
    let v = p.vertices();
    let mut origin = (0.0, 0.0);
    let mut q = (1.0, 0.0);
    let mut x = s.clamp(0.0, 1.0);
    for _ in 0..p.depth {
        x *= 4.0;
        let d = (x.floor() as usize).min(3);
        x -= d as f64;
        let step = cmul(q, v[d]);
        origin = (origin.0 + step.0, origin.1 + step.1);
        q = cmul(q, (v[d + 1].0 - v[d].0, v[d + 1].1 - v[d].1));
    }
    let tail = cmul(q, (x, 0.0));
    (origin.0 + tail.0, origin.1 + tail.1)
}

pub fn koch_point(p: &KochParams, s: f64) -> Result<(f64, f64)> {
    if !(0.25..=0.5).contains(&p.r) {
        return Err(Error::RatioOutOfRange(p.r));
    }
    if p.depth < 1 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    let i = s.floor();
    let (x, y) = unit_point(p, s - i);
    Ok((x + p.interval_offset * i, y))
}

/// `(K(x_0), K(x_1), ...)` flattened to `x`-`y` pairs.
pub fn koch_interleave(x: &[f64], p: &KochParams) -> Result<Vec<f64>> {
    let pts = x
        .par_iter()
        .map(|&s| koch_point(p, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(pts.into_iter().flat_map(|(a, b)| [a, b]).collect())
}

/// `s,x,y` rows at 17 significant digits.
pub fn curve_csv(p: &KochParams, ss: &[f64]) -> Result<String> {
    let mut out = String::from("s,x,y\n");
    for &s in ss {
        let (x, y) = koch_point(p, s)?;
        out.push_str(&format!("{},{},{}\n", sig17(s), sig17(x), sig17(y)));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderEstimate {
    pub rho: f64,
    pub depth: u32,
    pub pairs: usize,
    /// `min |K(s) - K(t)|_2 / |s - t|^rho`.
    pub m_lower: f64,
    pub m_lower_pair: (f64, f64),
    /// `max |K(s) - K(t)|_2 / |s - t|^rho`.
    pub m_upper: f64,
    pub m_upper_pair: (f64, f64),
    pub q: f64,
    /// Difference vectors breaking
    /// `2^-1/2 |w|_2 <= |w|_inf <= |w|_q <= 2^(1/q) |w|_inf <= 2^(1/q) |w|_2`.
    pub norm_chain_violations: usize,
}

fn norm_chain_holds(w: (f64, f64), q: f64, tol: &ToleranceConfig) -> bool {
    let (a, b) = (w.0.abs(), w.1.abs());
    let l2 = a.hypot(b);
    let linf = a.max(b);
    let lq = (a.powf(q) + b.powf(q)).powf(1.0 / q);
    let c = 2f64.powf(1.0 / q);
    let le = |x: f64, y: f64| x <= y * (1.0 + tol.eps_rel) + tol.eps_abs;
    le(l2 / 2f64.sqrt(), linf) && le(linf, lq) && le(lq, c * linf) && le(c * linf, c * l2)
}

/// Two-sided Hölder constants of the curve over `pairs`, each lying in one
/// window `[i-1, i+1]` and resolved by the evaluation depth.
pub fn estimate_holder(p: &KochParams, pairs: &[(f64, f64)], q: f64, tol: &ToleranceConfig) -> Result<HolderEstimate> {
    p.validate(tol)?;
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("no sample pairs".into()));
    }
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::InvalidArgument(format!("norm exponent q = {q} must be at least 1")));
    }
    let mut min_gap = f64::INFINITY;
    for &(s, t) in pairs {
        if !(s.is_finite() && t.is_finite()) || s == t {
            return Err(Error::InvalidArgument(format!("pair ({s}, {t}) is not two distinct reals")));
        }
        if s.min(t).floor() + 2.0 < s.max(t) {
            return Err(Error::PairOutsideWindow { s, t });
        }
        min_gap = min_gap.min((s - t).abs());
    }
    let resolution = 0.25f64.powi(p.depth as i32);
    if resolution >= min_gap {
        return Err(Error::ResolutionGuard { resolution, min_gap });
    }

    let measured = pairs
        .par_iter()
        .map(|&(s, t)| {
            let (a, b) = (koch_point(p, s)?, koch_point(p, t)?);
            let w = (a.0 - b.0, a.1 - b.1);
            let ratio = w.0.hypot(w.1) / (s - t).abs().powf(p.rho);
            Ok((ratio, norm_chain_holds(w, q, tol)))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut est = HolderEstimate {
        rho: p.rho,
        depth: p.depth,
        pairs: pairs.len(),
        m_lower: f64::INFINITY,
        m_lower_pair: pairs[0],
        m_upper: 0.0,
        m_upper_pair: pairs[0],
        q,
        norm_chain_violations: 0,
    };
    for (&pair, &(ratio, chain)) in pairs.iter().zip(&measured) {
        if ratio < est.m_lower {
            est.m_lower = ratio;
            est.m_lower_pair = pair;
        }
        if ratio > est.m_upper {
            est.m_upper = ratio;
            est.m_upper_pair = pair;
        }
        if !chain {
            est.norm_chain_violations += 1;
        }
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(rho: f64, depth: u32) -> KochParams {
        KochParams::from_rho(rho, depth).unwrap()
    }

    #[test]
    fn endpoints_are_fixed() {
        for depth in [1, 5, 12] {
            let p = params(0.75, depth);
            assert_eq!(koch_point(&p, 0.0).unwrap(), (0.0, 0.0));
            let (x, y) = koch_point(&p, 1.0).unwrap();
            assert!((x - 1.0).abs() < 1e-12 && y.abs() < 1e-12);
        }
    }

    #[test]
    fn quarter_ratio_is_a_segment() {
        let p = params(1.0, 8);
        assert_eq!(p.height(), 0.0);
        let (x, y) = koch_point(&p, 0.37).unwrap();
        assert!((x - 0.37).abs() < 1e-12 && y.abs() < 1e-12);
    }

    #[test]
    fn first_generator_vertex() {
        let p = params(0.75, 1);
        let (x, y) = koch_point(&p, 0.25).unwrap();
        assert!((x - 0.35355339059327373).abs() < 1e-15);
        assert_eq!(y, 0.0);
        assert_eq!(koch_interleave(&[0.25], &p).unwrap(), vec![x, y]);
        let (_, top) = koch_point(&p, 0.5).unwrap();
        assert!((top - p.height()).abs() < 1e-15);
    }

    #[test]
    fn interleave_endpoints() {
        let p = params(0.75, 6);
        assert_eq!(koch_interleave(&[0.0], &p).unwrap(), vec![0.0, 0.0]);
        let v = koch_interleave(&[1.0, 0.0], &p).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-12 && v[1..].iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn ratio_range_checked() {
        let p = KochParams {
            r: 0.6,
            rho: -(0.6f64.ln() / 4f64.ln()),
            depth: 3,
            interval_offset: 1.0,
        };
        assert!(matches!(koch_point(&p, 0.5), Err(Error::RatioOutOfRange(_))));
        assert!(KochParams::from_rho(0.3, 4).is_err());
    }

    #[test]
    fn dyadic_pairs_have_unit_ratio() {
        let p = params(0.6, 12);
        let pairs: Vec<(f64, f64)> = (0..=10).map(|k| (0.0, 0.25f64.powi(k))).collect();
        let h = estimate_holder(&p, &pairs, 2.0, &ToleranceConfig::default()).unwrap();
        assert!((h.m_lower - 1.0).abs() < 1e-9 && (h.m_upper - 1.0).abs() < 1e-9);
    }

    #[test]
    fn guard_and_window_errors() {
        let p = params(0.75, 4);
        let tol = ToleranceConfig::default();
        assert!(matches!(
            estimate_holder(&p, &[(0.0, 1e-4)], 2.0, &tol),
            Err(Error::ResolutionGuard { .. })
        ));
        assert!(matches!(
            estimate_holder(&p, &[(0.5, 2.5)], 2.0, &tol),
            Err(Error::PairOutsideWindow { .. })
        ));
        assert!(estimate_holder(&p, &[(0.5, 0.5)], 2.0, &tol).is_err());
    }

    #[test]
    fn translated_pieces_join_up() {
        let p = params(0.75, 10);
        let (a, b) = (koch_point(&p, 1.0).unwrap(), koch_point(&p, 1.0 - 1e-12).unwrap());
        assert!((a.0 - b.0).abs() < 1e-6 && (a.1 - b.1).abs() < 1e-6);
    }

    #[test]
    fn csv_rows() {
        let csv = curve_csv(&params(0.75, 3), &[0.0, 1.0]).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "s,x,y");
        assert_eq!(lines[1], "0,0,0");
        assert!(lines[2].starts_with("1.0000000000000000e0,"));
    }
}
