//! Metrization of a quasi-metric modulus on a finite sample.
//!
//! Pipeline: cap `psi` at 1, measure the quasi-metric constant `C`, build the
//! level sets `U_n = {(u,v): psi(u,v) < B^-n, psi(v,u) < B^-n}` with
//! `B = 2C^2 + C`, take the chain pseudo-metric `d` of the gauge they define,
//! and certify
//!
//! ```text
//! U_n ⊆ {d < 2^-n} ⊆ U_{n-1}               1 <= n <= L
//! B^-2 d^p <= psi <= B^2 d^p,  p = log2 B   0 < psi < B^-2
//! d >= 2^-3                                 psi >= B^-2
//! ```
//!
//! so that `sum psi_n` and `sum d^p` converge together.

use serde::{Deserialize, Serialize};

use crate::conditions::{quasi_constants, Constant};
use crate::error::{Error, Result};
use crate::format::matrix_csv;
use crate::model::{ModulusSample, ToleranceConfig};

/// Nested symmetric relations `U_0 ⊇ U_1 ⊇ ... ⊇ U_L` on a sample, stored as
/// the deepest level of each pair. Pairs whose modulus vanishes both ways sit
/// at `L + 1`, inside every level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSets {
    pub c: f64,
    pub b: f64,
    pub max_level: usize,
    pub points: Vec<String>,
    pub level: Vec<Vec<usize>>,
    /// `composition_ok[n]`: `U_{n+1} ∘ U_{n+1} ∘ U_{n+1} ⊆ U_n`, for `0 <= n <= L`.
    pub composition_ok: Vec<bool>,
}

impl LevelSets {
    pub fn contains(&self, n: usize, i: usize, j: usize) -> bool {
        self.level[i][j] >= n
    }

    pub fn is_zero_pair(&self, i: usize, j: usize) -> bool {
        self.level[i][j] > self.max_level
    }

    pub fn composition_holds(&self) -> bool {
        self.composition_ok.iter().all(|&b| b)
    }

    fn validate(&self) -> Result<()> {
        let n = self.points.len();
        if self.level.len() != n || self.level.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("level matrix does not match the points".into()));
        }
        for i in 0..n {
            if self.level[i][i] != self.max_level + 1 {
                return Err(Error::NotNested(self.level[i][i]));
            }
            for j in 0..n {
                let l = self.level[i][j];
                if l > self.max_level + 1 || l != self.level[j][i] {
                    return Err(Error::NotNested(l));
                }
            }
        }
        Ok(())
    }
}

/// `min(psi, 1)`; the summability class is unchanged.
pub fn truncate_modulus(s: &ModulusSample) -> ModulusSample {
    s.map_values(s.name(), |v| v.min(1.0))
        .expect("capping keeps a valid table valid")
}

/// Smallest `m >= 0` with `B^-m <= x`.
fn levels_above(b: f64, x: f64) -> usize {
    let mut m = 0;
    while b.powi(-(m as i32)) > x {
        m += 1;
    }
    m
}

/// Max-min product: `out[u][r] = max_v min(a[u][v], b[v][r])`.
fn bottleneck(a: &[Vec<usize>], b: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = a.len();
    (0..n)
        .map(|u| {
            (0..n)
                .map(|r| (0..n).map(|v| a[u][v].min(b[v][r])).max().unwrap_or(0))
                .collect()
        })
        .collect()
}

pub fn build_level_sets(s: &ModulusSample, c: f64, tol: &ToleranceConfig) -> Result<LevelSets> {
    if !(c >= 1.0 && c.is_finite()) {
        return Err(Error::ConstantBelowOne(c));
    }
    let n = s.len();
    for i in 0..n {
        if !tol.is_zero(s.get(i, i)) {
            return Err(Error::DiagonalViolation {
                label: s.points()[i].clone(),
                value: s.get(i, i),
            });
        }
    }
    let b = 2.0 * c * c + c;
    let min_positive = s
        .table()
        .iter()
        .flatten()
        .copied()
        .filter(|&v| !tol.is_zero(v))
        .fold(f64::INFINITY, f64::min);
    let max_level = if min_positive.is_finite() {
        levels_above(b, min_positive) + 1
    } else {
        1
    };
    let thresholds: Vec<f64> = (0..=max_level).map(|k| b.powi(-(k as i32))).collect();

    let mut level = vec![vec![0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (s.get(i, j), s.get(j, i));
            level[i][j] = if tol.is_zero(x) && tol.is_zero(y) {
                max_level + 1
            } else {
                let mut k = 0;
                while k < max_level && x < thresholds[k + 1] && y < thresholds[k + 1] {
                    k += 1;
                }
                k
            };
        }
    }

    // A 3-chain through U_{k+1} from u to t exists iff lev3(u,t) >= k+1; the
    // inclusion then fails exactly when lev(u,t) < k.
    let lev3 = bottleneck(&bottleneck(&level, &level), &level);
    let mut composition_ok = vec![true; max_level + 1];
    for u in 0..n {
        for t in 0..n {
            let reach = lev3[u][t];
            for k in level[u][t] + 1..reach.min(max_level + 1) {
                composition_ok[k] = false;
            }
        }
    }

    Ok(LevelSets {
        c,
        b,
        max_level,
        points: s.points().to_vec(),
        level,
        composition_ok,
    })
}

/// One-step gauge: `2^-(n+1)` for a pair in `U_n \ U_{n+1}`, 0 for a pair in
/// every level.
pub fn gauge(levels: &LevelSets) -> Vec<Vec<f64>> {
    levels
        .level
        .iter()
        .map(|row| {
            row.iter()
                .map(|&l| {
                    if l > levels.max_level {
                        0.0
                    } else {
                        0.5f64.powi(l as i32 + 1)
                    }
                })
                .collect()
        })
        .collect()
}

/// Infimum over chains of summed edge weights: all-pairs shortest paths,
/// relaxed until no entry changes so the triangle inequality holds exactly in
/// floating point.
pub fn chain_closure(weights: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = weights.len();
    let mut d = weights.to_vec();
    for i in 0..n {
        d[i][i] = 0.0;
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i][k];
            for j in 0..n {
                let via = dik + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    loop {
        let mut changed = false;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = d[i][k] + d[k][j];
                    if via < d[i][j] {
                        d[i][j] = via;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    d
}

/// Chain pseudo-metric of the level sets.
pub fn frink_pseudometric(levels: &LevelSets) -> Result<Vec<Vec<f64>>> {
    levels.validate()?;
    Ok(chain_closure(&gauge(levels)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CertificateStatus {
    /// Every check passed on a sample satisfying the composition property.
    Certified,
    /// The composition property failed somewhere, so the containments carry
    /// no guarantee; the input is not a valid quasi-metric at this `C`.
    Advisory,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelContainment {
    pub level: usize,
    /// `U_n ⊆ {d < 2^-n}`.
    pub inner_ok: bool,
    /// `{d < 2^-n} ⊆ U_{n-1}`.
    pub outer_ok: bool,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichRecord {
    pub u: String,
    pub v: String,
    pub psi: f64,
    pub d: f64,
    pub lower: f64,
    pub upper: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetrizationCertificate {
    pub c: f64,
    pub b: f64,
    pub p: f64,
    pub max_level: usize,
    pub points: Vec<String>,
    pub d: Vec<Vec<f64>>,
    pub composition_ok: Vec<bool>,
    pub containment: Vec<LevelContainment>,
    /// `d <= eps_abs` iff `psi` vanishes in both directions.
    pub zero_equivalence_ok: bool,
    pub zero_violations: Vec<(String, String)>,
    pub sandwich: Vec<SandwichRecord>,
    pub sandwich_ok: bool,
    /// Pairs with `psi >= B^-2` have `d >= 2^-3`.
    pub threshold_ok: bool,
    pub threshold_violations: Vec<(String, String)>,
    pub status: CertificateStatus,
}

impl MetrizationCertificate {
    pub fn containment_ok(&self) -> bool {
        self.containment.iter().all(|c| c.inner_ok && c.outer_ok)
    }

    pub fn all_ok(&self) -> bool {
        self.containment_ok() && self.zero_equivalence_ok && self.sandwich_ok && self.threshold_ok
    }

    pub fn distance_csv(&self) -> String {
        matrix_csv(&self.points, &self.d)
    }
}

/// Checks every inequality of the metrization against the sample and records
/// the outcome; nothing here fails hard.
pub fn certify_sandwich(
    s: &ModulusSample,
    d: &[Vec<f64>],
    levels: &LevelSets,
    tol: &ToleranceConfig,
) -> MetrizationCertificate {
    let n = s.len();
    let labels = s.points();
    let b = levels.b;
    let p = b.log2();
    let l = levels.max_level;

    let mut containment = Vec::with_capacity(l);
    for k in 1..=l {
        let radius = 0.5f64.powi(k as i32);
        let mut entry = LevelContainment {
            level: k,
            inner_ok: true,
            outer_ok: true,
            violations: 0,
        };
        for i in 0..n {
            for j in 0..n {
                let close = d[i][j] < radius;
                if levels.contains(k, i, j) && !close {
                    entry.inner_ok = false;
                    entry.violations += 1;
                }
                if close && !levels.contains(k - 1, i, j) {
                    entry.outer_ok = false;
                    entry.violations += 1;
                }
            }
        }
        containment.push(entry);
    }

    let mut zero_violations = Vec::new();
    let mut threshold_violations = Vec::new();
    let mut sandwich = Vec::new();
    let cutoff = b.powi(-2);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (psi, dij) = (s.get(i, j), d[i][j]);
            let psi_zero = tol.is_zero(psi) && tol.is_zero(s.get(j, i));
            if psi_zero != tol.is_zero(dij) {
                zero_violations.push((labels[i].clone(), labels[j].clone()));
            }
            if psi >= cutoff {
                if dij < 0.125 {
                    threshold_violations.push((labels[i].clone(), labels[j].clone()));
                }
            } else if !tol.is_zero(psi) {
                let dp = dij.powf(p);
                let lower = dp / (b * b);
                let upper = dp * b * b;
                let ok = lower <= psi * (1.0 + tol.eps_rel) && psi <= upper * (1.0 + tol.eps_rel);
                sandwich.push(SandwichRecord {
                    u: labels[i].clone(),
                    v: labels[j].clone(),
                    psi,
                    d: dij,
                    lower,
                    upper,
                    ok,
                });
            }
        }
    }

    let sandwich_ok = sandwich.iter().all(|r| r.ok);
    let mut cert = MetrizationCertificate {
        c: levels.c,
        b,
        p,
        max_level: l,
        points: labels.to_vec(),
        d: d.to_vec(),
        composition_ok: levels.composition_ok.clone(),
        containment,
        zero_equivalence_ok: zero_violations.is_empty(),
        zero_violations,
        sandwich,
        sandwich_ok,
        threshold_ok: threshold_violations.is_empty(),
        threshold_violations,
        status: CertificateStatus::Failed,
    };
    cert.status = if !levels.composition_holds() {
        CertificateStatus::Advisory
    } else if cert.all_ok() {
        CertificateStatus::Certified
    } else {
        CertificateStatus::Failed
    };
    cert
}

/// Full pipeline. Fails when the sample cannot come from an equivalence-inducing
/// modulus: non-zero diagonal or an infinite quasi-metric constant.
pub fn metrize(s: &ModulusSample, tol: &ToleranceConfig) -> Result<MetrizationCertificate> {
    let capped = truncate_modulus(s);
    let q = quasi_constants(&capped, tol);
    if let Some(label) = q.diag_violations.first() {
        let i = capped.position(label).expect("label from sample");
        return Err(Error::DiagonalViolation {
            label: label.clone(),
            value: capped.get(i, i),
        });
    }
    if q.c_sym == Constant::Infinite {
        let w = q.sym_witness.expect("infinite constant has a witness");
        return Err(Error::InfiniteConstant {
            which: "symmetry",
            witness: format!("psi({},{}) = {}, psi({},{}) = {}", w.v, w.u, w.numerator, w.u, w.v, w.denominator),
        });
    }
    if q.c_tri == Constant::Infinite {
        let w = q.tri_witness.expect("infinite constant has a witness");
        return Err(Error::InfiniteConstant {
            which: "triangle",
            witness: format!("({}, {}, {})", w.u, w.v, w.r),
        });
    }
    let c = q.combined().value();
    let levels = build_level_sets(&capped, c, tol)?;
    let d = frink_pseudometric(&levels)?;
    Ok(certify_sandwich(&capped, &d, &levels, tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real_sample(xs: &[f64], psi: impl Fn(f64, f64) -> f64) -> ModulusSample {
        let labels = xs.iter().map(|x| x.to_string()).collect();
        ModulusSample::from_fn("s", labels, |i, j| psi(xs[i], xs[j])).unwrap()
    }

    fn table(rows: Vec<Vec<f64>>) -> ModulusSample {
        let labels = (0..rows.len()).map(|i| format!("p{i}")).collect();
        ModulusSample::new("t", labels, rows).unwrap()
    }

    /// Shortest chain by enumerating every simple path; independent of the
    /// relaxation order used by `chain_closure`.
    fn brute_chain(w: &[Vec<f64>], from: usize, to: usize) -> f64 {
        fn go(w: &[Vec<f64>], at: usize, to: usize, seen: &mut Vec<bool>, acc: f64, best: &mut f64) {
            if at == to {
                *best = best.min(acc);
                return;
            }
            for next in 0..w.len() {
                if !seen[next] {
                    seen[next] = true;
                    go(w, next, to, seen, acc + w[at][next], best);
                    seen[next] = false;
                }
            }
        }
        if from == to {
            return 0.0;
        }
        let mut seen = vec![false; w.len()];
        seen[from] = true;
        let mut best = f64::INFINITY;
        go(w, from, to, &mut seen, 0.0, &mut best);
        best
    }

    #[test]
    fn truncate_caps_and_is_idempotent() {
        let s = table(vec![vec![0.0, 3.7], vec![0.4, 0.0]]);
        let t = truncate_modulus(&s);
        assert_eq!(t.get(0, 1), 1.0);
        assert_eq!(t.get(1, 0), 0.4);
        assert_eq!(truncate_modulus(&t), t);
        let z = table(vec![vec![0.0; 2]; 2]);
        assert_eq!(truncate_modulus(&z), z);
    }

    #[test]
    fn unit_constant_gives_base_three() {
        let s = real_sample(&[0.0, 0.5], |a, b| (a - b).abs());
        let lv = build_level_sets(&s, 1.0, &ToleranceConfig::default()).unwrap();
        assert_eq!(lv.b, 3.0);
        assert!((lv.b.log2() - 1.584962500721156).abs() < 1e-12);
    }

    #[test]
    fn deepest_level_brackets_by_logarithm() {
        // 3^-2 = 0.111.. > 0.05 >= 3^-3
        let s = table(vec![vec![0.0, 0.05], vec![0.05, 0.0]]);
        let lv = build_level_sets(&s, 1.0, &ToleranceConfig::default()).unwrap();
        assert_eq!(lv.level[0][1], 2);
        assert!(lv.contains(2, 0, 1) && !lv.contains(3, 0, 1));
        // L = ceil(log_3(20)) + 1 = 4
        assert_eq!(lv.max_level, 4);
    }

    #[test]
    fn zero_pairs_are_in_every_level() {
        let s = table(vec![
            vec![0.0, 0.0, 0.5],
            vec![0.0, 0.0, 0.5],
            vec![0.5, 0.5, 0.0],
        ]);
        let lv = build_level_sets(&s, 1.0, &ToleranceConfig::default()).unwrap();
        assert!(lv.contains(lv.max_level, 0, 1));
        assert!(lv.is_zero_pair(0, 1));
        let d = frink_pseudometric(&lv).unwrap();
        assert_eq!(d[0][1], 0.0);
    }

    #[test]
    fn level_set_errors() {
        let tol = ToleranceConfig::default();
        let s = table(vec![vec![0.1, 0.5], vec![0.5, 0.0]]);
        assert!(matches!(build_level_sets(&s, 1.0, &tol), Err(Error::DiagonalViolation { .. })));
        let ok = table(vec![vec![0.0, 0.5], vec![0.5, 0.0]]);
        assert!(matches!(build_level_sets(&ok, 0.5, &tol), Err(Error::ConstantBelowOne(_))));
    }

    #[test]
    fn isolated_pair_distance_is_its_gauge() {
        // psi = 0.05 puts the pair in U_2 \ U_3
        let s = table(vec![vec![0.0, 0.05], vec![0.05, 0.0]]);
        let lv = build_level_sets(&s, 1.0, &ToleranceConfig::default()).unwrap();
        let d = frink_pseudometric(&lv).unwrap();
        assert_eq!(d[0][1], 0.125);
        assert!(d[0][1] < 0.25 && d[0][1] >= 0.125);
    }

    #[test]
    fn chain_through_middle_point() {
        let w = vec![
            vec![0.0, 0.0625, 0.5],
            vec![0.0625, 0.0, 0.0625],
            vec![0.5, 0.0625, 0.0],
        ];
        let d = chain_closure(&w);
        assert_eq!(brute_chain(&w, 0, 2), 0.125);
        assert_eq!(d[0][2], 0.125);
    }

    #[test]
    fn closure_matches_path_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let n = rng.gen_range(2..7);
            let mut w = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in i + 1..n {
                    let x = 0.5f64.powi(rng.gen_range(1..8));
                    w[i][j] = x;
                    w[j][i] = x;
                }
            }
            let d = chain_closure(&w);
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(d[i][j], brute_chain(&w, i, j));
                }
            }
        }
    }

    #[test]
    fn metric_grid_certifies() {
        let xs: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let cert = metrize(&real_sample(&xs, |a, b| (a - b).abs()), &ToleranceConfig::default()).unwrap();
        // decimal grid points make a few triangle ratios round just above 1
        assert!((cert.c - 1.0).abs() < 1e-12);
        assert!((cert.b - 3.0).abs() < 1e-11);
        assert_eq!(cert.p, cert.b.log2());
        assert!(cert.all_ok(), "{cert:?}");
        assert_eq!(cert.status, CertificateStatus::Certified);
        assert!(!cert.sandwich.is_empty());
    }

    #[test]
    fn single_point_is_vacuous() {
        let cert = metrize(&table(vec![vec![0.0]]), &ToleranceConfig::default()).unwrap();
        assert!(cert.all_ok());
        assert!(cert.sandwich.is_empty());
        assert_eq!(cert.d, vec![vec![0.0]]);
    }

    #[test]
    fn one_way_zero_is_rejected() {
        let s = table(vec![vec![0.0, 0.0], vec![1.0, 0.0]]);
        assert!(matches!(
            metrize(&s, &ToleranceConfig::default()),
            Err(Error::InfiniteConstant { which: "symmetry", .. })
        ));
    }

    #[test]
    fn indicator_sample_gives_scaled_discrete_metric() {
        let s = table(vec![
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ]);
        let cert = metrize(&s, &ToleranceConfig::default()).unwrap();
        assert_eq!(cert.c, 1.0);
        assert!(cert.all_ok());
        assert_eq!(cert.d[0][1], 0.0);
        for (i, j) in [(0, 2), (1, 2)] {
            assert!(cert.d[i][j] >= 0.125 && cert.d[i][j] <= 1.0);
        }
    }

    #[test]
    fn csv_export_has_headers() {
        let s = table(vec![vec![0.0, 0.5], vec![0.5, 0.0]]);
        let csv = metrize(&s, &ToleranceConfig::default()).unwrap().distance_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("label,p0,p1"));
        assert_eq!(lines.next(), Some("p0,0,5.0000000000000000e-1"));
    }

    #[test]
    fn malformed_levels_rejected() {
        let s = table(vec![vec![0.0, 0.5], vec![0.5, 0.0]]);
        let mut lv = build_level_sets(&s, 1.0, &ToleranceConfig::default()).unwrap();
        lv.level[0][1] = 0;
        lv.level[1][0] = 1;
        assert!(frink_pseudometric(&lv).is_err());
    }

    #[test]
    fn broken_composition_is_advisory() {
        // psi(0,2) far exceeds what C = 1 allows through the chain 0-1-2.
        let s = table(vec![
            vec![0.0, 0.01, 0.9],
            vec![0.01, 0.0, 0.01],
            vec![0.9, 0.01, 0.0],
        ]);
        let tol = ToleranceConfig::default();
        let lv = build_level_sets(&s, 1.0, &tol).unwrap();
        assert!(!lv.composition_holds());
        let d = frink_pseudometric(&lv).unwrap();
        let cert = certify_sandwich(&s, &d, &lv, &tol);
        assert_eq!(cert.status, CertificateStatus::Advisory);
    }
}
