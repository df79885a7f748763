use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModulusSample, ModulusSpec};
use crate::union_find::UnionFind;

/// Violations kept per relation; the counts stay exact.
const MAX_VIOLATIONS: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NotReflexive { u: String },
    NotSymmetric { u: String, v: String },
    NotTransitive { u: String, v: String, r: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Validity {
    pub reflexive: bool,
    pub symmetric: bool,
    pub transitive: bool,
    pub violation_count: usize,
    pub violations: Vec<Violation>,
}

impl Validity {
    pub fn is_equivalence(&self) -> bool {
        self.reflexive && self.symmetric && self.transitive
    }
}

/// `F_n = {(u,v) : psi_n(u,v) < c}` on a finite sample of coordinate `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRelation {
    pub coord: usize,
    pub threshold: f64,
    pub points: Vec<String>,
    /// Index pairs into `points`, lexicographically sorted.
    pub pairs: Vec<(usize, usize)>,
    pub validity: Validity,
    /// Connected components of the pair graph; the equivalence classes when
    /// `validity` holds.
    pub class_count: usize,
    pub classes: Option<Vec<Vec<String>>>,
}

impl ThresholdRelation {
    pub fn is_equivalence(&self) -> bool {
        self.validity.is_equivalence()
    }
}

fn record(v: &mut Validity, violation: Violation) {
    v.violation_count += 1;
    if v.violations.len() < MAX_VIOLATIONS {
        v.violations.push(violation);
    }
}

pub fn threshold_relation_on_sample(s: &ModulusSample, coord: usize, c: f64) -> Result<ThresholdRelation> {
    let n = s.len();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let labels = s.points();
    let member: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| s.get(i, j) < c).collect())
        .collect();

    let mut validity = Validity {
        reflexive: true,
        symmetric: true,
        transitive: true,
        violation_count: 0,
        violations: Vec::new(),
    };
    for i in 0..n {
        if !member[i][i] {
            validity.reflexive = false;
            record(&mut validity, Violation::NotReflexive { u: labels[i].clone() });
        }
    }
    for i in 0..n {
        for j in 0..n {
            if member[i][j] && !member[j][i] {
                validity.symmetric = false;
                record(
                    &mut validity,
                    Violation::NotSymmetric {
                        u: labels[i].clone(),
                        v: labels[j].clone(),
                    },
                );
            }
        }
    }
    for u in 0..n {
        for v in 0..n {
            if !member[u][v] {
                continue;
            }
            for r in 0..n {
                if member[v][r] && !member[u][r] {
                    validity.transitive = false;
                    record(
                        &mut validity,
                        Violation::NotTransitive {
                            u: labels[u].clone(),
                            v: labels[v].clone(),
                            r: labels[r].clone(),
                        },
                    );
                }
            }
        }
    }

    let mut pairs = Vec::new();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in 0..n {
            if member[i][j] {
                pairs.push((i, j));
                uf.union(i, j);
            }
        }
    }
    let class_count = uf.count();
    let classes = validity.is_equivalence().then(|| {
        uf.classes()
            .into_iter()
            .map(|c| c.into_iter().map(|i| labels[i].clone()).collect())
            .collect()
    });

    Ok(ThresholdRelation {
        coord,
        threshold: c,
        points: labels.to_vec(),
        pairs,
        validity,
        class_count,
        classes,
    })
}

/// Builds `F_n` for one coordinate; real-valued coordinates are sampled on
/// `grid` (or the default uniform grid).
pub fn build_threshold_relation(
    spec: &ModulusSpec,
    coord: usize,
    grid: Option<&[f64]>,
    c: f64,
) -> Result<ThresholdRelation> {
    let sample = spec.sample(coord, grid)?;
    threshold_relation_on_sample(&sample, coord, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indicator_relation_is_its_partition() {
        let spec = ModulusSpec::indicator(vec![vec!["a", "b"], vec!["c"]]).unwrap();
        let f = build_threshold_relation(&spec, 0, None, 0.5).unwrap();
        assert!(f.is_equivalence());
        assert_eq!(f.class_count, 2);
        assert_eq!(
            f.classes.unwrap(),
            vec![vec!["a".to_string(), "b".to_string()], vec!["c".to_string()]]
        );
        assert_eq!(f.pairs, vec![(0, 0), (0, 1), (1, 0), (1, 1), (2, 2)]);
    }

    #[test]
    fn distance_threshold_fails_transitivity() {
        let spec = ModulusSpec::power(1.0, [0.0, 1.0]);
        let f = build_threshold_relation(&spec, 3, Some(&[0.0, 0.3, 0.6]), 0.5).unwrap();
        assert!(f.validity.reflexive && f.validity.symmetric);
        assert!(!f.validity.transitive);
        assert!(f.validity.violations.contains(&Violation::NotTransitive {
            u: "0".into(),
            v: "0.3".into(),
            r: "0.6".into()
        }));
        assert!(f.classes.is_none());
        assert_eq!(f.coord, 3);
    }

    #[test]
    fn threshold_above_everything_gives_one_class() {
        let spec = ModulusSpec::power(2.0, [0.0, 3.0]);
        let f = build_threshold_relation(&spec, 0, None, 10.0).unwrap();
        assert!(f.is_equivalence());
        assert_eq!(f.class_count, 1);
    }

    #[test]
    fn asymmetric_and_irreflexive_violations() {
        let s = ModulusSample::new(
            "t",
            vec!["a".into(), "b".into()],
            vec![vec![0.7, 0.1], vec![0.9, 0.0]],
        )
        .unwrap();
        let f = threshold_relation_on_sample(&s, 0, 0.5).unwrap();
        assert!(!f.validity.reflexive);
        assert!(!f.validity.symmetric);
        assert!(f.validity.violations.contains(&Violation::NotReflexive { u: "a".into() }));
        assert!(f.validity.violations.contains(&Violation::NotSymmetric {
            u: "a".into(),
            v: "b".into()
        }));
    }

    #[test]
    fn empty_grid_is_an_error() {
        let spec = ModulusSpec::power(1.0, [0.0, 1.0]);
        assert!(matches!(
            build_threshold_relation(&spec, 0, Some(&[]), 0.5),
            Err(Error::EmptySample)
        ));
    }
}
