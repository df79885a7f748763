use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Constant;
use crate::error::{Error, Result};
use crate::model::{ModulusSample, ToleranceConfig};

/// Extremal pair for the symmetry constant: `psi(v,u) / psi(u,v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairWitness {
    pub u: String,
    pub v: String,
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: Constant,
}

/// Extremal triple for the triangle constant: `psi(u,r) / (psi(u,v) + psi(v,r))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleWitness {
    pub u: String,
    pub v: String,
    pub r: String,
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiConstants {
    /// Largest `|psi(u,u)|`.
    pub c_diag_violation: f64,
    /// Labels with `psi(u,u) > eps_abs`.
    pub diag_violations: Vec<String>,
    pub c_sym: Constant,
    pub c_tri: Constant,
    pub sym_witness: Option<PairWitness>,
    pub tri_witness: Option<TripleWitness>,
}

impl QuasiConstants {
    /// Zero diagonal and both constants finite.
    pub fn is_quasi_metric(&self) -> bool {
        self.diag_violations.is_empty() && self.c_sym.is_finite() && self.c_tri.is_finite()
    }

    /// `max(c_sym, c_tri)`, the single constant of both inequalities.
    pub fn combined(&self) -> Constant {
        self.c_sym.max(self.c_tri)
    }
}

/// `num / den` under the zero-denominator convention: a vanishing denominator
/// makes the constraint vacuous if the numerator vanishes too, and the ratio
/// infinite otherwise.
pub(crate) fn ratio(num: f64, den: f64, tol: &ToleranceConfig) -> Option<Constant> {
    if tol.is_zero(den) {
        if tol.is_zero(num) {
            None
        } else {
            Some(Constant::Infinite)
        }
    } else {
        Some(Constant::Finite(num / den))
    }
}

/// Keeps the larger ratio; on ties the earlier (lexicographically smaller)
/// index tuple wins, so results do not depend on scan order.
fn better<K: Ord + Copy>(a: Option<(Constant, K)>, b: Option<(Constant, K)>) -> Option<(Constant, K)> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => match x.0.partial_cmp(&y.0) {
            Some(std::cmp::Ordering::Greater) => Some(x),
            Some(std::cmp::Ordering::Less) => Some(y),
            _ => Some(if x.1 <= y.1 { x } else { y }),
        },
    }
}

/// Exhaustive scan for the minimal constants of
/// `psi(v,u) <= C psi(u,v)` and `psi(u,r) <= C (psi(u,v) + psi(v,r))`.
pub fn quasi_constants(s: &ModulusSample, tol: &ToleranceConfig) -> QuasiConstants {
    let n = s.len();
    let labels = s.points();

    let mut c_diag_violation: f64 = 0.0;
    let mut diag_violations = Vec::new();
    for i in 0..n {
        let d = s.get(i, i).abs();
        c_diag_violation = c_diag_violation.max(d);
        if !tol.is_zero(d) {
            diag_violations.push(labels[i].clone());
        }
    }

    let mut sym: Option<(Constant, (usize, usize))> = None;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if let Some(r) = ratio(s.get(j, i), s.get(i, j), tol) {
                sym = better(sym, Some((r, (i, j))));
            }
        }
    }

    let tri = (0..n)
        .into_par_iter()
        .map(|u| {
            let mut best: Option<(Constant, (usize, usize, usize))> = None;
            for v in 0..n {
                for r in 0..n {
                    let num = s.get(u, r);
                    let den = s.get(u, v) + s.get(v, r);
                    if let Some(q) = ratio(num, den, tol) {
                        best = better(best, Some((q, (u, v, r))));
                    }
                }
            }
            best
        })
        .reduce(|| None, better);

    let sym_witness = sym.map(|(q, (i, j))| PairWitness {
        u: labels[i].clone(),
        v: labels[j].clone(),
        numerator: s.get(j, i),
        denominator: s.get(i, j),
        ratio: q,
    });
    let tri_witness = tri.map(|(q, (u, v, r))| TripleWitness {
        u: labels[u].clone(),
        v: labels[v].clone(),
        r: labels[r].clone(),
        numerator: s.get(u, r),
        denominator: s.get(u, v) + s.get(v, r),
        ratio: q,
    });

    QuasiConstants {
        c_diag_violation,
        diag_violations,
        c_sym: sym.map_or(Constant::ONE, |(q, _)| q.at_least_one()),
        c_tri: tri.map_or(Constant::ONE, |(q, _)| q.at_least_one()),
        sym_witness,
        tri_witness,
    }
}

/// Maps `phi`'s point order onto `psi`'s.
fn align(psi: &ModulusSample, phi: &ModulusSample) -> Result<Vec<usize>> {
    if psi.len() != phi.len() {
        return Err(Error::PointSetMismatch(format!(
            "{} points vs {} points",
            psi.len(),
            phi.len()
        )));
    }
    psi.points()
        .iter()
        .map(|l| {
            phi.position(l)
                .ok_or_else(|| Error::PointSetMismatch(format!("`{l}` missing from `{}`", phi.name())))
        })
        .collect()
}

/// Minimal `A >= 1` with `phi <= A psi` pointwise, or `None` when `phi` is
/// positive somewhere `psi` vanishes.
pub fn compare_moduli(
    psi: &ModulusSample,
    phi: &ModulusSample,
    tol: &ToleranceConfig,
) -> Result<Option<f64>> {
    let map = align(psi, phi)?;
    let mut a: f64 = 1.0;
    for i in 0..psi.len() {
        for j in 0..psi.len() {
            match ratio(phi.get(map[i], map[j]), psi.get(i, j), tol) {
                Some(Constant::Infinite) => return Ok(None),
                Some(Constant::Finite(q)) => a = a.max(q),
                None => {}
            }
        }
    }
    Ok(Some(a))
}

/// Minimal `A >= 1` with `A^-1 psi <= phi <= A psi`.
pub fn compare_moduli_two_sided(
    psi: &ModulusSample,
    phi: &ModulusSample,
    tol: &ToleranceConfig,
) -> Result<Option<f64>> {
    let up = compare_moduli(psi, phi, tol)?;
    let down = compare_moduli(phi, psi, tol)?;
    Ok(up.zip(down).map(|(a, b)| a.max(b)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real_sample(xs: &[f64], psi: impl Fn(f64, f64) -> f64) -> ModulusSample {
        let labels = xs.iter().map(|x| x.to_string()).collect();
        ModulusSample::from_fn("s", labels, |i, j| psi(xs[i], xs[j])).unwrap()
    }

    fn table(labels: &[&str], rows: Vec<Vec<f64>>) -> ModulusSample {
        ModulusSample::new("t", labels.iter().map(|s| s.to_string()).collect(), rows).unwrap()
    }

    /// Plain nested-loop maximum over all 27 triples, without any of the
    /// zero-denominator handling.
    fn brute_tri(xs: &[f64], psi: impl Fn(f64, f64) -> f64) -> f64 {
        let mut best: f64 = 1.0;
        for &u in xs {
            for &v in xs {
                for &r in xs {
                    let den = psi(u, v) + psi(v, r);
                    if den > 0.0 {
                        best = best.max(psi(u, r) / den);
                    }
                }
            }
        }
        best
    }

    #[test]
    fn metric_has_unit_constants() {
        let s = real_sample(&[0.0, 1.0, 2.0], |a, b| (a - b).abs());
        let q = quasi_constants(&s, &ToleranceConfig::default());
        assert_eq!(q.c_sym, Constant::Finite(1.0));
        assert_eq!(q.c_tri, Constant::Finite(1.0));
        assert!(q.is_quasi_metric());
    }

    #[test]
    fn squared_distance_triangle_constant_is_two() {
        let sq = |a: f64, b: f64| (a - b) * (a - b);
        let expected = brute_tri(&[0.0, 1.0, 2.0], sq);
        assert_eq!(expected, 2.0);
        let q = quasi_constants(&real_sample(&[0.0, 1.0, 2.0], sq), &ToleranceConfig::default());
        assert_eq!(q.c_tri, Constant::Finite(expected));
        let w = q.tri_witness.unwrap();
        assert_eq!((w.u.as_str(), w.v.as_str(), w.r.as_str()), ("0", "1", "2"));
        assert_eq!(w.numerator / w.denominator, 2.0);
    }

    #[test]
    fn asymmetric_table_symmetry_constant() {
        let s = table(&["a", "b"], vec![vec![0.0, 0.1], vec![0.3, 0.0]]);
        let q = quasi_constants(&s, &ToleranceConfig::default());
        // max(0.3/0.1, 0.1/0.3)
        let Constant::Finite(c) = q.c_sym else { panic!() };
        assert!((c - 3.0).abs() < 1e-12);
        let w = q.sym_witness.unwrap();
        assert_eq!((w.u.as_str(), w.v.as_str()), ("a", "b"));
    }

    #[test]
    fn zero_one_way_is_infinite() {
        let s = table(&["a", "b"], vec![vec![0.0, 0.0], vec![1.0, 0.0]]);
        let q = quasi_constants(&s, &ToleranceConfig::default());
        assert_eq!(q.c_sym, Constant::Infinite);
        assert!(!q.is_quasi_metric());
    }

    #[test]
    fn single_point_is_degenerate_but_valid() {
        let s = table(&["a"], vec![vec![0.0]]);
        let q = quasi_constants(&s, &ToleranceConfig::default());
        assert_eq!(q.c_sym, Constant::ONE);
        assert_eq!(q.c_tri, Constant::ONE);
        assert!(q.diag_violations.is_empty());
    }

    #[test]
    fn diagonal_violations_reported_separately() {
        let s = table(&["a", "b"], vec![vec![0.25, 1.0], vec![1.0, 0.0]]);
        let q = quasi_constants(&s, &ToleranceConfig::default());
        assert_eq!(q.c_diag_violation, 0.25);
        assert_eq!(q.diag_violations, vec!["a".to_string()]);
    }

    #[test]
    fn compare_examples() {
        let tol = ToleranceConfig::default();
        let psi = real_sample(&[0.0, 0.5, 2.0], |a, b| (a - b).abs());
        assert_eq!(compare_moduli(&psi, &psi, &tol).unwrap(), Some(1.0));
        let half = psi.map_values("half", |v| 0.5 * v).unwrap();
        assert_eq!(compare_moduli(&psi, &half, &tol).unwrap(), Some(1.0));
        assert_eq!(compare_moduli_two_sided(&psi, &half, &tol).unwrap(), Some(2.0));

        let zero = table(&["a", "b"], vec![vec![0.0, 0.0], vec![0.0, 0.0]]);
        let one = table(&["a", "b"], vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(compare_moduli(&zero, &one, &tol).unwrap(), None);
    }

    #[test]
    fn compare_aligns_labels_and_rejects_mismatch() {
        let tol = ToleranceConfig::default();
        let psi = table(&["a", "b"], vec![vec![0.0, 1.0], vec![2.0, 0.0]]);
        let phi = table(&["b", "a"], vec![vec![0.0, 4.0], vec![3.0, 0.0]]);
        // phi(a,b) = 3, phi(b,a) = 4
        assert_eq!(compare_moduli(&psi, &phi, &tol).unwrap(), Some(3.0));
        let other = table(&["a", "c"], vec![vec![0.0; 2]; 2]);
        assert!(compare_moduli(&psi, &other, &tol).is_err());
    }
}
