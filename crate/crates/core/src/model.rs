//! Finite descriptions of coordinate spaces and their moduli.
//!
//! A [`FamilyDescription`] is a finite truncation `(X_n, psi_n)_{n<N}` of a
//! product family. Each coordinate is a [`ModulusSpec`]: an explicit table, a
//! power modulus `|u-v|^p`, a function modulus `f(|u-v|)`, or an indicator of
//! a partition. All arithmetic is `f64`; every comparison that needs slack goes
//! through a [`ToleranceConfig`].

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points of continuous coordinates sampled when no grid is supplied.
pub const DEFAULT_GRID_POINTS: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    pub eps_abs: f64,
    pub eps_rel: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            eps_abs: 1e-12,
            eps_rel: 1e-9,
        }
    }
}

impl ToleranceConfig {
    pub fn new(eps_abs: f64, eps_rel: f64) -> Result<Self> {
        if !(eps_abs > 0.0 && eps_abs.is_finite() && eps_rel > 0.0 && eps_rel.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "tolerances must be positive and finite, got eps_abs={eps_abs}, eps_rel={eps_rel}"
            )));
        }
        Ok(Self { eps_abs, eps_rel })
    }

    pub fn is_zero(&self, x: f64) -> bool {
        x.abs() <= self.eps_abs
    }

    /// `a <= b` up to the combined absolute/relative slack.
    pub fn le(&self, a: f64, b: f64) -> bool {
        a <= b + self.eps_abs + self.eps_rel * a.abs().max(b.abs())
    }

    pub fn approx_eq(&self, a: f64, b: f64) -> bool {
        self.le(a, b) && self.le(b, a)
    }
}

/// One coordinate's worth of data: a finite point set with its psi-table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SampleRepr", into = "SampleRepr")]
pub struct ModulusSample {
    name: String,
    points: Vec<String>,
    psi: Vec<Vec<f64>>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleRepr {
    #[serde(default)]
    name: String,
    points: Vec<String>,
    psi: Vec<Vec<f64>>,
}

impl TryFrom<SampleRepr> for ModulusSample {
    type Error = Error;

    fn try_from(r: SampleRepr) -> Result<Self> {
        ModulusSample::new(r.name, r.points, r.psi)
    }
}

impl From<ModulusSample> for SampleRepr {
    fn from(s: ModulusSample) -> Self {
        SampleRepr {
            name: s.name,
            points: s.points,
            psi: s.psi,
        }
    }
}

impl ModulusSample {
    pub fn new(name: impl Into<String>, points: Vec<String>, psi: Vec<Vec<f64>>) -> Result<Self> {
        let name = name.into();
        let bad = |reason: String| Error::InvalidSample {
            name: name.clone(),
            reason,
        };
        if psi.len() != points.len() {
            return Err(bad(format!(
                "{} points but {} table rows",
                points.len(),
                psi.len()
            )));
        }
        for (i, row) in psi.iter().enumerate() {
            if row.len() != points.len() {
                return Err(bad(format!("row {i} has {} entries", row.len())));
            }
            for (j, &v) in row.iter().enumerate() {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(bad(format!("psi[{i}][{j}] = {v} is not a finite non-negative real")));
                }
            }
        }
        let mut index = HashMap::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if index.insert(p.clone(), i).is_some() {
                return Err(bad(format!("duplicate point label `{p}`")));
            }
        }
        Ok(Self {
            name,
            points,
            psi,
            index,
        })
    }

    /// Builds a sample by evaluating `psi` on every ordered pair of `points`.
    pub fn from_fn<F>(name: impl Into<String>, points: Vec<String>, mut psi: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> f64,
    {
        let n = points.len();
        let table = (0..n).map(|i| (0..n).map(|j| psi(i, j)).collect()).collect();
        Self::new(name, points, table)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.psi
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.psi[i][j]
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Same points, entries transformed by `op`.
    pub fn map_values(&self, name: impl Into<String>, op: impl Fn(f64) -> f64) -> Result<Self> {
        let psi = self
            .psi
            .iter()
            .map(|row| row.iter().map(|&v| op(v)).collect())
            .collect();
        Self::new(name, self.points.clone(), psi)
    }

    /// Reorders points (and the table) by `order`, a permutation of `0..len`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let points = order.iter().map(|&i| self.points[i].clone()).collect();
        let psi = order
            .iter()
            .map(|&i| order.iter().map(|&j| self.psi[i][j]).collect())
            .collect();
        Self::new(self.name.clone(), points, psi)
    }
}

/// Piecewise-linear modulus `f` assembled from breakpoints `a_0 > ... > a_M > 0`,
/// slopes `k_n` and joins `b_n`:
///
/// ```text
/// f(t) = 0                                   t = 0
///        k_M t                               0 < t < a_M
///        -k_{n+1} (t - a_{n+1}) + k_{n+1} a_{n+1}   a_{n+1} <= t < b_n
///        k_n t                               b_n <= t < a_n
///        cap                                 a_0 <= t
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PiecewiseRepr", into = "PiecewiseRepr")]
pub struct PiecewiseModulus {
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
    joins: Vec<f64>,
    cap: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PiecewiseRepr {
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
    joins: Vec<f64>,
    cap: f64,
}

impl TryFrom<PiecewiseRepr> for PiecewiseModulus {
    type Error = Error;

    fn try_from(r: PiecewiseRepr) -> Result<Self> {
        PiecewiseModulus::new(r.breakpoints, r.slopes, r.joins, r.cap, &ToleranceConfig::default())
    }
}

impl From<PiecewiseModulus> for PiecewiseRepr {
    fn from(p: PiecewiseModulus) -> Self {
        PiecewiseRepr {
            breakpoints: p.breakpoints,
            slopes: p.slopes,
            joins: p.joins,
            cap: p.cap,
        }
    }
}

/// Largest jump between the two one-sided pieces at a breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuityGap {
    pub at: f64,
    pub left: f64,
    pub right: f64,
}

impl PiecewiseModulus {
    pub fn new(
        breakpoints: Vec<f64>,
        slopes: Vec<f64>,
        joins: Vec<f64>,
        cap: f64,
        tol: &ToleranceConfig,
    ) -> Result<Self> {
        let bad = |s: String| Err(Error::InvalidPiecewise(s));
        let m = breakpoints.len();
        if m == 0 {
            return bad("no breakpoints".into());
        }
        if slopes.len() != m || joins.len() + 1 != m {
            return bad(format!(
                "{} breakpoints need {} slopes and {} joins, got {} and {}",
                m,
                m,
                m - 1,
                slopes.len(),
                joins.len()
            ));
        }
        if breakpoints.iter().chain(&slopes).chain(&joins).any(|v| !(v.is_finite() && *v > 0.0)) {
            return bad("breakpoints, slopes and joins must be finite and positive".into());
        }
        for n in 0..m - 1 {
            if breakpoints[n + 1] >= breakpoints[n] {
                return bad(format!("breakpoints not strictly decreasing at index {}", n + 1));
            }
            if slopes[n + 1] <= slopes[n] {
                return bad(format!("slopes not strictly increasing at index {}", n + 1));
            }
            if !(breakpoints[n + 1] < joins[n] && joins[n] < breakpoints[n]) {
                return bad(format!("join b_{n} = {} not inside (a_{}, a_{n})", joins[n], n + 1));
            }
        }
        let f = Self {
            breakpoints,
            slopes,
            joins,
            cap,
        };
        for gap in f.continuity_gaps() {
            if !tol.approx_eq(gap.left, gap.right) {
                return bad(format!(
                    "discontinuous at t = {}: {} vs {}",
                    gap.at, gap.left, gap.right
                ));
            }
        }
        Ok(f)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn joins(&self) -> &[f64] {
        &self.joins
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    /// Index `M` of the last breakpoint.
    pub fn last_index(&self) -> usize {
        self.breakpoints.len() - 1
    }

    fn peak(&self, n: usize) -> f64 {
        self.slopes[n] * self.breakpoints[n]
    }

    pub fn eval(&self, t: f64) -> f64 {
        let a = &self.breakpoints;
        if t <= 0.0 {
            return 0.0;
        }
        if t >= a[0] {
            return self.cap;
        }
        let last = self.last_index();
        if t < a[last] {
            return self.slopes[last] * t;
        }
        // a is descending: find n with a[n+1] <= t < a[n].
        let n = a.partition_point(|&x| x > t) - 1;
        if t >= self.joins[n] {
            self.slopes[n] * t
        } else {
            -self.slopes[n + 1] * (t - a[n + 1]) + self.peak(n + 1)
        }
    }

    /// Left and right limits at every `a_n` and `b_n`, each computed from the
    /// formula of the adjacent piece.
    pub fn continuity_gaps(&self) -> Vec<ContinuityGap> {
        let a = &self.breakpoints;
        let k = &self.slopes;
        let mut gaps = Vec::with_capacity(2 * a.len());
        gaps.push(ContinuityGap {
            at: a[0],
            left: k[0] * a[0],
            right: self.cap,
        });
        for n in 0..a.len() - 1 {
            let b = self.joins[n];
            gaps.push(ContinuityGap {
                at: b,
                left: -k[n + 1] * (b - a[n + 1]) + self.peak(n + 1),
                right: k[n] * b,
            });
            gaps.push(ContinuityGap {
                at: a[n + 1],
                left: k[n + 1] * a[n + 1],
                right: -k[n + 1] * (a[n + 1] - a[n + 1]) + self.peak(n + 1),
            });
        }
        gaps
    }
}

/// One-variable modulus `f`, used as `psi(u,v) = f(|u-v|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionRepr", into = "FunctionRepr")]
pub enum FunctionSpec {
    /// `min(t^p, cap)`; no cap when absent.
    Power { p: f64, cap: Option<f64> },
    Piecewise(PiecewiseModulus),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase", deny_unknown_fields)]
enum FunctionRepr {
    Power {
        p: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cap: Option<f64>,
    },
    Piecewise {
        breakpoints: Vec<f64>,
        slopes: Vec<f64>,
        joins: Vec<f64>,
        cap: f64,
    },
}

impl TryFrom<FunctionRepr> for FunctionSpec {
    type Error = Error;

    fn try_from(r: FunctionRepr) -> Result<Self> {
        Ok(match r {
            FunctionRepr::Power { p, cap } => FunctionSpec::Power { p, cap },
            FunctionRepr::Piecewise {
                breakpoints,
                slopes,
                joins,
                cap,
            } => FunctionSpec::Piecewise(PiecewiseModulus::new(
                breakpoints,
                slopes,
                joins,
                cap,
                &ToleranceConfig::default(),
            )?),
        })
    }
}

impl From<FunctionSpec> for FunctionRepr {
    fn from(f: FunctionSpec) -> Self {
        match f {
            FunctionSpec::Power { p, cap } => FunctionRepr::Power { p, cap },
            FunctionSpec::Piecewise(f) => FunctionRepr::Piecewise {
                breakpoints: f.breakpoints,
                slopes: f.slopes,
                joins: f.joins,
                cap: f.cap,
            },
        }
    }
}

impl FunctionSpec {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            FunctionSpec::Power { p, cap } => {
                let v = if t <= 0.0 { 0.0 } else { t.powf(*p) };
                cap.map_or(v, |c| v.min(c))
            }
            FunctionSpec::Piecewise(f) => f.eval(t),
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        match self {
            FunctionSpec::Power { p, cap } => {
                if !(p.is_finite() && *p > 0.0) {
                    return Err(format!("power exponent must be positive, got {p}"));
                }
                if let Some(c) = cap {
                    if !(c.is_finite() && *c > 0.0) {
                        return Err(format!("cap must be positive, got {c}"));
                    }
                }
                Ok(())
            }
            FunctionSpec::Piecewise(_) => Ok(()),
        }
    }
}

/// Modulus of one coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr", into = "SpecRepr")]
pub enum ModulusSpec {
    Table(ModulusSample),
    /// `|u-v|^p` for reals in `domain`.
    Power { p: f64, domain: [f64; 2] },
    /// `f(|u-v|)` for reals in `domain`.
    F { f: FunctionSpec, domain: [f64; 2] },
    /// 0 inside a block, 1 across blocks.
    Indicator { blocks: Vec<Vec<String>> },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum SpecRepr {
    Table {
        #[serde(default)]
        name: String,
        points: Vec<String>,
        psi: Vec<Vec<f64>>,
    },
    Power {
        p: f64,
        domain: [f64; 2],
    },
    F {
        f: FunctionSpec,
        #[serde(default = "unit_domain")]
        domain: [f64; 2],
    },
    Indicator {
        blocks: Vec<Vec<String>>,
    },
}

impl TryFrom<SpecRepr> for ModulusSpec {
    type Error = Error;

    fn try_from(r: SpecRepr) -> Result<Self> {
        Ok(match r {
            SpecRepr::Table { name, points, psi } => {
                ModulusSpec::Table(ModulusSample::new(name, points, psi)?)
            }
            SpecRepr::Power { p, domain } => ModulusSpec::Power { p, domain },
            SpecRepr::F { f, domain } => ModulusSpec::F { f, domain },
            SpecRepr::Indicator { blocks } => ModulusSpec::Indicator { blocks },
        })
    }
}

impl From<ModulusSpec> for SpecRepr {
    fn from(m: ModulusSpec) -> Self {
        match m {
            ModulusSpec::Table(s) => SpecRepr::Table {
                name: s.name,
                points: s.points,
                psi: s.psi,
            },
            ModulusSpec::Power { p, domain } => SpecRepr::Power { p, domain },
            ModulusSpec::F { f, domain } => SpecRepr::F { f, domain },
            ModulusSpec::Indicator { blocks } => SpecRepr::Indicator { blocks },
        }
    }
}

fn unit_domain() -> [f64; 2] {
    [0.0, 1.0]
}

/// How the truncated tail of a family is meant to continue. Reporting only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailAnnotation {
    Power,
    Constant,
}

impl ModulusSpec {
    pub fn table(sample: ModulusSample) -> Self {
        ModulusSpec::Table(sample)
    }

    pub fn power(p: f64, domain: [f64; 2]) -> Self {
        ModulusSpec::Power { p, domain }
    }

    pub fn indicator<S: Into<String>>(blocks: Vec<Vec<S>>) -> Result<Self> {
        let spec = ModulusSpec::Indicator {
            blocks: blocks
                .into_iter()
                .map(|b| b.into_iter().map(Into::into).collect())
                .collect(),
        };
        spec.validate(0)?;
        Ok(spec)
    }

    pub fn validate(&self, index: usize) -> Result<()> {
        let bad = |reason: String| Error::InvalidCoordinate { index, reason };
        match self {
            ModulusSpec::Table(sample) => {
                if sample.is_empty() {
                    return Err(bad("table has no points".into()));
                }
            }
            ModulusSpec::Power { p, domain } => {
                if !(p.is_finite() && *p > 0.0) {
                    return Err(bad(format!("power exponent must be positive, got {p}")));
                }
                check_domain(domain).map_err(bad)?;
            }
            ModulusSpec::F { f, domain } => {
                f.validate().map_err(bad)?;
                check_domain(domain).map_err(bad)?;
            }
            ModulusSpec::Indicator { blocks } => {
                if blocks.iter().all(Vec::is_empty) {
                    return Err(bad("indicator has no points".into()));
                }
                let mut seen = std::collections::HashSet::new();
                for label in blocks.iter().flatten() {
                    if !seen.insert(label.as_str()) {
                        return Err(Error::OverlappingBlocks(label.clone()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Real-valued coordinates (power and function moduli).
    pub fn domain(&self) -> Option<[f64; 2]> {
        match self {
            ModulusSpec::Power { domain, .. } | ModulusSpec::F { domain, .. } => Some(*domain),
            _ => None,
        }
    }

    /// `psi(|u-v|)` as a function of the gap, for real-valued coordinates.
    pub fn gap_modulus(&self, gap: f64) -> Option<f64> {
        match self {
            ModulusSpec::Power { p, .. } => Some(if gap <= 0.0 { 0.0 } else { gap.powf(*p) }),
            ModulusSpec::F { f, .. } => Some(f.eval(gap)),
            _ => None,
        }
    }

    fn real_point(&self, index: usize, label: &str) -> Result<f64> {
        let [lo, hi] = self.domain().expect("real-valued coordinate");
        let x: f64 = label.trim().parse().map_err(|_| Error::UnknownLabel {
            index,
            label: label.to_string(),
        })?;
        if !(x >= lo && x <= hi) {
            return Err(Error::UnknownLabel {
                index,
                label: label.to_string(),
            });
        }
        Ok(x)
    }

    fn block_of(blocks: &[Vec<String>], index: usize, label: &str) -> Result<usize> {
        blocks
            .iter()
            .position(|b| b.iter().any(|p| p == label))
            .ok_or_else(|| Error::UnknownLabel {
                index,
                label: label.to_string(),
            })
    }

    /// `psi(u, v)`; `index` is only used for error messages.
    pub fn psi(&self, index: usize, u: &str, v: &str) -> Result<f64> {
        match self {
            ModulusSpec::Table(sample) => {
                let lookup = |l: &str| {
                    sample.position(l).ok_or_else(|| Error::UnknownLabel {
                        index,
                        label: l.to_string(),
                    })
                };
                Ok(sample.get(lookup(u)?, lookup(v)?))
            }
            ModulusSpec::Power { .. } | ModulusSpec::F { .. } => {
                let gap = (self.real_point(index, u)? - self.real_point(index, v)?).abs();
                Ok(self.gap_modulus(gap).expect("real-valued coordinate"))
            }
            ModulusSpec::Indicator { blocks } => {
                let same = Self::block_of(blocks, index, u)? == Self::block_of(blocks, index, v)?;
                Ok(if same { 0.0 } else { 1.0 })
            }
        }
    }

    /// Whether `u` and `v` name the same point of this coordinate.
    pub fn same_point(&self, index: usize, u: &str, v: &str) -> Result<bool> {
        match self {
            ModulusSpec::Power { .. } | ModulusSpec::F { .. } => {
                Ok(self.real_point(index, u)? == self.real_point(index, v)?)
            }
            ModulusSpec::Table(sample) => {
                for l in [u, v] {
                    if sample.position(l).is_none() {
                        return Err(Error::UnknownLabel {
                            index,
                            label: l.to_string(),
                        });
                    }
                }
                Ok(u == v)
            }
            ModulusSpec::Indicator { blocks } => {
                Self::block_of(blocks, index, u)?;
                Self::block_of(blocks, index, v)?;
                Ok(u == v)
            }
        }
    }

    /// Materializes the coordinate as a finite sample. Real-valued coordinates
    /// are evaluated on `grid` (or a uniform grid over the domain).
    pub fn sample(&self, index: usize, grid: Option<&[f64]>) -> Result<ModulusSample> {
        let name = format!("coord-{index}");
        match self {
            ModulusSpec::Table(sample) => Ok(sample.clone()),
            ModulusSpec::Indicator { blocks } => {
                let mut points = Vec::new();
                let mut block_id = Vec::new();
                for (b, block) in blocks.iter().enumerate() {
                    for p in block {
                        points.push(p.clone());
                        block_id.push(b);
                    }
                }
                ModulusSample::from_fn(name, points, |i, j| {
                    if block_id[i] == block_id[j] {
                        0.0
                    } else {
                        1.0
                    }
                })
            }
            ModulusSpec::Power { .. } | ModulusSpec::F { .. } => {
                let [lo, hi] = self.domain().expect("real-valued coordinate");
                let values: Vec<f64> = match grid {
                    Some(g) => {
                        if let Some(x) = g.iter().find(|x| !(**x >= lo && **x <= hi)) {
                            return Err(Error::InvalidCoordinate {
                                index,
                                reason: format!("grid point {x} outside domain [{lo}, {hi}]"),
                            });
                        }
                        g.to_vec()
                    }
                    None => uniform_grid(lo, hi, DEFAULT_GRID_POINTS),
                };
                if values.is_empty() {
                    return Err(Error::EmptySample);
                }
                let points = values.iter().map(|x| x.to_string()).collect();
                ModulusSample::from_fn(name, points, |i, j| {
                    self.gap_modulus((values[i] - values[j]).abs())
                        .expect("real-valued coordinate")
                })
            }
        }
    }
}

fn check_domain(domain: &[f64; 2]) -> std::result::Result<(), String> {
    let [lo, hi] = *domain;
    if lo.is_finite() && hi.is_finite() && lo <= hi {
        Ok(())
    } else {
        Err(format!("invalid domain [{lo}, {hi}]"))
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * (i as f64) / ((n - 1) as f64)
                }
            })
            .collect(),
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive (`0 < lo <= hi`).
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    uniform_grid(a, b, n)
        .into_iter()
        .enumerate()
        .map(|(i, x)| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => x.exp(),
        })
        .collect()
}

/// Finite truncation `(X_n, psi_n)_{n<N}` of a product family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDescription {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailAnnotation>,
    pub coords: Vec<ModulusSpec>,
}

impl FamilyDescription {
    pub fn new(name: impl Into<String>, coords: Vec<ModulusSpec>) -> Result<Self> {
        let fam = Self {
            name: name.into(),
            notes: None,
            tail: None,
            coords,
        };
        fam.validate()?;
        Ok(fam)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let fam: Self = serde_json::from_str(text)?;
        fam.validate()?;
        Ok(fam)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.coords.is_empty() {
            return Err(Error::InvalidFamily("family has no coordinates".into()));
        }
        for (i, c) in self.coords.iter().enumerate() {
            c.validate(i)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

/// `sum_n psi_n(x(n), y(n))` split into the coordinates where `x(n) = y(n)`
/// and the rest. For a sum-like equivalence relation only the off-diagonal
/// part decides membership.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumBreakdown {
    pub total: f64,
    pub diagonal: f64,
    pub off_diagonal: f64,
}

pub fn finite_sum<S: AsRef<str>>(x: &[S], y: &[S], fam: &FamilyDescription) -> Result<SumBreakdown> {
    let n = fam.len();
    if x.len() != n || y.len() != n {
        return Err(Error::LengthMismatch {
            x: x.len(),
            y: y.len(),
            n,
        });
    }
    let mut diagonal = 0.0;
    let mut off_diagonal = 0.0;
    for (i, spec) in fam.coords.iter().enumerate() {
        let (u, v) = (x[i].as_ref(), y[i].as_ref());
        let value = spec.psi(i, u, v)?;
        if spec.same_point(i, u, v)? {
            diagonal += value;
        } else {
            off_diagonal += value;
        }
    }
    Ok(SumBreakdown {
        total: diagonal + off_diagonal,
        diagonal,
        off_diagonal,
    })
}
