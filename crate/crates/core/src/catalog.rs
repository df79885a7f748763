//! The oscillating piecewise-linear modulus built from a concave `g` and a
//! sequence `a_0 > a_1 > ... > a_M`, plus named families used by the CLI and
//! the tests.
//!
//! With `k_n = g(a_n)/a_n` and `b_n = 2 k_{n+1} a_{n+1} / (k_n + k_{n+1})`,
//! `f` rises with slope `k_n` on `[b_n, a_n]` and falls with slope `-k_{n+1}`
//! on `[a_{n+1}, b_n]`, so `f(a_{n+1}) / f(b_n) = (1 + k_{n+1}/k_n) / 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{log_grid, FamilyDescription, ModulusSample, ModulusSpec, PiecewiseModulus, ToleranceConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum GFunction {
    Sqrt,
    /// `x^alpha`, `0 < alpha < 1`.
    Power { alpha: f64 },
}

impl GFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            GFunction::Sqrt => x.sqrt(),
            GFunction::Power { alpha } => x.powf(alpha),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            GFunction::Sqrt => Ok(()),
            GFunction::Power { alpha } if alpha > 0.0 && alpha < 1.0 => Ok(()),
            GFunction::Power { alpha } => Err(Error::InvalidExample(format!(
                "g(x) = x^{alpha} needs 0 < alpha < 1"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example4Spec {
    pub g: GFunction,
    pub a: Vec<f64>,
}

impl Example4Spec {
    /// `g = sqrt`, `a_n = 4^-(n+1)^2` for `n <= m`.
    pub fn sqrt_preset(m: usize) -> Self {
        Self {
            g: GFunction::Sqrt,
            a: (0..=m).map(|n| 0.25f64.powi(((n + 1) * (n + 1)) as i32)).collect(),
        }
    }

    /// `g = sqrt`, `a = (1/4, 1/64)`.
    pub fn two_term() -> Self {
        Self {
            g: GFunction::Sqrt,
            a: vec![0.25, 1.0 / 64.0],
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "sqrt" => Some(Self::sqrt_preset(8)),
            "two-term" => Some(Self::two_term()),
            _ => None,
        }
    }

    pub fn slopes(&self) -> Vec<f64> {
        self.a.iter().map(|&x| self.g.eval(x) / x).collect()
    }

    pub fn joins(&self) -> Vec<f64> {
        let k = self.slopes();
        (0..self.a.len().saturating_sub(1))
            .map(|n| 2.0 * k[n + 1] * self.a[n + 1] / (k[n] + k[n + 1]))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.g.validate()?;
        if self.a.is_empty() {
            return Err(Error::InvalidExample("sequence a is empty".into()));
        }
        if let Some(x) = self.a.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::InvalidExample(format!("a contains {x}, expected positive values")));
        }
        if let Some(n) = self.a.windows(2).position(|w| w[1] >= w[0]) {
            return Err(Error::InvalidExample(format!("a is not strictly decreasing at index {}", n + 1)));
        }
        let k = self.slopes();
        if let Some(n) = k.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidExample(format!("k_{} >= k_{}", n, n + 1)));
        }
        for (n, b) in self.joins().into_iter().enumerate() {
            if !(self.a[n + 1] < b && b < self.a[n]) {
                return Err(Error::InvalidExample(format!("b_{n} = {b} not inside (a_{}, a_{n})", n + 1)));
            }
        }
        Ok(())
    }
}

pub fn build_example4(spec: &Example4Spec, tol: &ToleranceConfig) -> Result<PiecewiseModulus> {
    spec.validate()?;
    PiecewiseModulus::new(spec.a.clone(), spec.slopes(), spec.joins(), spec.g.eval(spec.a[0]), tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioCheck {
    pub n: usize,
    /// `f(a_{n+1}) / f(b_n)`.
    pub direct: f64,
    /// `(1 + k_{n+1}/k_n) / 2`.
    pub closed_form: f64,
    pub agrees: bool,
}

/// Both sides of the ratio identity at `n < M`. Values at deep levels are far
/// below any absolute tolerance, so only an exactly vanishing `f(b_n)` is
/// rejected; agreement is relative.
pub fn example4_ratio(f: &PiecewiseModulus, n: usize, tol: &ToleranceConfig) -> Result<RatioCheck> {
    let last = f.last_index();
    if n >= last {
        return Err(Error::IndexOutOfRange { index: n, max: last });
    }
    let fb = f.eval(f.joins()[n]);
    if !(fb > 0.0) {
        return Err(Error::DegenerateRatio { n, value: fb });
    }
    let direct = f.eval(f.breakpoints()[n + 1]) / fb;
    let k = f.slopes();
    let closed_form = 0.5 * (1.0 + k[n + 1] / k[n]);
    Ok(RatioCheck {
        n,
        direct,
        closed_form,
        agrees: (direct - closed_form).abs() <= tol.eps_rel * closed_form,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityScan {
    pub pairs: usize,
    pub violations: usize,
    /// Largest `lhs/rhs - 1` over the scanned pairs (`<= 0` when none fail).
    pub max_relative_violation: f64,
    pub witness: Option<(f64, f64)>,
}

impl InequalityScan {
    fn new() -> Self {
        Self {
            pairs: 0,
            violations: 0,
            max_relative_violation: f64::NEG_INFINITY,
            witness: None,
        }
    }

    fn add(&mut self, lhs: f64, rhs: f64, s: f64, t: f64, tol: &ToleranceConfig) {
        self.pairs += 1;
        let rel = if rhs > 0.0 {
            lhs / rhs - 1.0
        } else if lhs > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        if rel > self.max_relative_violation {
            self.max_relative_violation = rel;
            self.witness = Some((s, t));
        }
        if rel > tol.eps_rel {
            self.violations += 1;
        }
    }

    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example4Inequalities {
    /// `f(s+t) <= f(s) + f(t)`.
    pub subadditive: InequalityScan,
    /// `f(s) <= f(s+t) + f(t)`.
    pub reverse: InequalityScan,
}

/// Exhaustive scan over ordered grid pairs. The comparison is relative, since
/// the values span dozens of decades.
pub fn verify_example4_inequalities(f: impl Fn(f64) -> f64, grid: &[f64], tol: &ToleranceConfig) -> Example4Inequalities {
    let mut sub = InequalityScan::new();
    let mut rev = InequalityScan::new();
    for &s in grid {
        let fs = f(s);
        for &t in grid {
            let (ft, fst) = (f(t), f(s + t));
            sub.add(fst, fs + ft, s, t, tol);
            rev.add(fs, fst + ft, s, t, tol);
        }
    }
    Example4Inequalities {
        subadditive: sub,
        reverse: rev,
    }
}

/// `n` log-spaced points on `[a_M, 2 a_0]` merged with every `a_n`, `b_n`.
pub fn example4_grid(f: &PiecewiseModulus, n: usize) -> Vec<f64> {
    let a = f.breakpoints();
    let mut g = log_grid(a[f.last_index()], 2.0 * a[0], n);
    g.extend_from_slice(a);
    g.extend_from_slice(f.joins());
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// Names accepted by [`standard_family`].
pub const FAMILY_NAMES: &[&str] = &[
    "power-p1",
    "power-p2",
    "indicator-one-block",
    "indicator-two-block",
    "indicator-growing",
];

/// Growth bound used by the classifier defaults; the growing family saturates
/// just above it.
const GROWING_CAP: usize = 17;

fn indicator_blocks(k: usize) -> Result<ModulusSpec> {
    ModulusSpec::indicator((0..k).map(|b| vec![format!("p{b}")]).collect())
}

pub fn standard_family(name: &str, n: usize) -> Result<FamilyDescription> {
    if n == 0 {
        return Err(Error::InvalidFamily("a family needs at least one coordinate".into()));
    }
    let coords = match name {
        "power-p1" => vec![ModulusSpec::power(1.0, [0.0, 1.0]); n],
        "power-p2" => vec![ModulusSpec::power(2.0, [0.0, 1.0]); n],
        "indicator-one-block" => vec![indicator_blocks(1)?; n],
        "indicator-two-block" => vec![indicator_blocks(2)?; n],
        "indicator-growing" => (0..n)
            .map(|i| indicator_blocks((i + 2).min(GROWING_CAP)))
            .collect::<Result<_>>()?,
        _ => {
            return Err(Error::InvalidFamily(format!(
                "unknown family `{name}`; expected one of {}",
                FAMILY_NAMES.join(", ")
            )))
        }
    };
    FamilyDescription::new(name, coords)
}

/// `|x_i - x_j|^p` with the points' decimal forms as labels.
pub fn power_sample(name: &str, xs: &[f64], p: f64) -> Result<ModulusSample> {
    let labels = xs.iter().map(|x| x.to_string()).collect();
    ModulusSample::from_fn(name, labels, |i, j| (xs[i] - xs[j]).abs().powf(p))
}

/// 0/1 table of a partition given as block sizes.
pub fn indicator_sample(name: &str, sizes: &[usize]) -> Result<ModulusSample> {
    let owner: Vec<usize> = sizes.iter().enumerate().flat_map(|(b, &s)| std::iter::repeat(b).take(s)).collect();
    let labels = (0..owner.len()).map(|i| format!("u{i}")).collect();
    ModulusSample::from_fn(name, labels, |i, j| if owner[i] == owner[j] { 0.0 } else { 1.0 })
}
