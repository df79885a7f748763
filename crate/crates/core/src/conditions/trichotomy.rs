use serde::{Deserialize, Serialize};

use super::threshold::{build_threshold_relation, ThresholdRelation};
use super::witness::{search, L1Witness};
use crate::error::{Error, Result};
use crate::model::{FamilyDescription, TailAnnotation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Branch {
    /// The small-terms/divergent-sum witness exists at every tested `c`:
    /// `R^N/l_1` reduces to `E`.
    L1Like,
    /// Class counts of `F_n` exceed the growth bound on the tail: proxy for
    /// perfectly many classes, `E_1` reduces to `E`.
    E1Like,
    /// Class counts in `[2, bound]` on the tail: `E ~ E_0`.
    E0Like,
    /// One class on the tail: all points equivalent.
    Trivial,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyOptions {
    pub c_grid: Vec<f64>,
    pub target: f64,
    /// Coordinates scanned by the witness search; all of them when absent.
    #[serde(default)]
    pub budget: Option<usize>,
    pub class_growth_bound: usize,
    /// Coordinates ignored when judging `F_n`; `N/4` when absent.
    #[serde(default)]
    pub prefix: Option<usize>,
    /// Sample points for real-valued coordinates.
    #[serde(default)]
    pub grid: Option<Vec<f64>>,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            c_grid: (0..=10).map(|i| 0.5f64.powi(i)).collect(),
            target: 1.0,
            budget: None,
            class_growth_bound: 16,
            prefix: None,
            grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessAttempt {
    pub c: f64,
    pub found: bool,
    pub best_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrichotomyReport {
    pub branch: Branch,
    pub l1_witness: Option<L1Witness>,
    pub attempts: Vec<WitnessAttempt>,
    /// The `c` used to build the threshold relations.
    pub threshold: Option<f64>,
    pub prefix: usize,
    pub tail_start: usize,
    pub class_growth_bound: usize,
    pub class_counts: Vec<usize>,
    pub fn_reports: Vec<ThresholdRelation>,
    pub tail_annotation: Option<TailAnnotation>,
    pub narrative: Vec<String>,
}

/// Finite-scale proxy for the trichotomy: `R^N/l_1 <= E`, `E_1 <= E`, or
/// `E <= E_0`.
///
/// The witness search runs at every `c` in the grid. If it fails somewhere,
/// the threshold relations `F_n` are built at the smallest failing `c`. After
/// dropping `prefix` coordinates (the stand-in for the cofinite threshold
/// `N_0`, which no truncation can compute) every `F_n` must be an equivalence
/// relation; the class counts on the last half of what remains decide the
/// branch.
pub fn classify_trichotomy(fam: &FamilyDescription, opts: &ClassifyOptions) -> Result<TrichotomyReport> {
    if opts.c_grid.is_empty() {
        return Err(Error::InvalidArgument("c_grid is empty".into()));
    }
    if opts.class_growth_bound < 1 {
        return Err(Error::InvalidArgument("class_growth_bound must be at least 1".into()));
    }
    fam.validate()?;
    let n = fam.len();
    let budget = opts.budget.unwrap_or(n);
    let mut narrative = vec![format!(
        "finite truncation of {n} coordinates; perfectly-many-classes is proxied by class_count > {}",
        opts.class_growth_bound
    )];
    if let Some(tail) = fam.tail {
        narrative.push(format!("family declares a {tail:?} tail (not used numerically)"));
    }

    let mut attempts = Vec::with_capacity(opts.c_grid.len());
    let mut witnesses = Vec::new();
    for &c in &opts.c_grid {
        let out = search(fam, c, opts.target, budget)?;
        attempts.push(WitnessAttempt {
            c,
            found: out.witness.is_some(),
            best_sum: out.best_sum,
        });
        if let Some(w) = out.witness {
            witnesses.push(w);
        }
    }

    let failing = attempts
        .iter()
        .filter(|a| !a.found)
        .map(|a| a.c)
        .fold(None, |m: Option<f64>, c| Some(m.map_or(c, |m| m.min(c))));

    let mut report = TrichotomyReport {
        branch: Branch::Undecided,
        l1_witness: None,
        attempts,
        threshold: failing,
        prefix: 0,
        tail_start: 0,
        class_growth_bound: opts.class_growth_bound,
        class_counts: Vec::new(),
        fn_reports: Vec::new(),
        tail_annotation: fam.tail,
        narrative,
    };

    let Some(c) = failing else {
        let w = witnesses
            .into_iter()
            .min_by(|a, b| a.c.total_cmp(&b.c))
            .expect("non-empty grid");
        report.narrative.push(format!(
            "condition (l1) witnessed at every c in the grid; smallest c = {} reaches sum {} >= {} from coordinate {}",
            w.c, w.sum, w.target, w.start
        ));
        report.narrative.push("R^N/l_1 reduces to E via the block reduction".into());
        report.branch = Branch::L1Like;
        report.l1_witness = Some(w);
        return Ok(report);
    };
    report.narrative.push(format!(
        "condition (l1) fails at c = {c}: no admissible tail reaches {}",
        opts.target
    ));

    let grid = opts.grid.as_deref();
    let relations = fam
        .coords
        .iter()
        .enumerate()
        .map(|(i, spec)| build_threshold_relation(spec, i, grid, c))
        .collect::<Result<Vec<_>>>()?;
    let prefix = opts.prefix.unwrap_or(n / 4).min(n - 1);
    let tail_start = prefix + (n - prefix) / 2;
    report.prefix = prefix;
    report.tail_start = tail_start;
    report.class_counts = relations.iter().map(|r| r.class_count).collect();

    let early: Vec<usize> = relations[..prefix]
        .iter()
        .filter(|r| !r.is_equivalence())
        .map(|r| r.coord)
        .collect();
    if !early.is_empty() {
        report
            .narrative
            .push(format!("F_n fails to be an equivalence inside the prefix at {early:?} (allowed)"));
    }
    let invalid: Vec<usize> = relations[prefix..]
        .iter()
        .filter(|r| !r.is_equivalence())
        .map(|r| r.coord)
        .collect();

    let bound = opts.class_growth_bound;
    let tail = &report.class_counts[tail_start..];
    report.branch = if !invalid.is_empty() {
        report.narrative.push(format!(
            "F_n is not an equivalence relation beyond the prefix at coordinates {invalid:?}; cannot classify"
        ));
        Branch::Undecided
    } else if tail.iter().all(|&k| k == 1) {
        report
            .narrative
            .push(format!("F_n has a single class for every n >= {tail_start}; E is trivial"));
        Branch::Trivial
    } else if tail.iter().all(|&k| k > bound) {
        report.narrative.push(format!(
            "class counts exceed {bound} for every n >= {tail_start} (proxy for perfectly many classes); E_1 reduces to E"
        ));
        Branch::E1Like
    } else if tail.iter().all(|&k| k <= bound) {
        let hits = tail.iter().filter(|&&k| k >= 2).count();
        report.narrative.push(format!(
            "class counts stay within [1, {bound}] for n >= {tail_start} and reach 2 or more at {hits} of {} tail coordinates; E ~ E_0",
            tail.len()
        ));
        Branch::E0Like
    } else {
        report.narrative.push(format!(
            "class counts oscillate around the bound {bound} on the tail; evidence is mixed"
        ));
        Branch::Undecided
    };
    report.fn_reports = relations;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModulusSpec;

    fn indicator_family(blocks_at: impl Fn(usize) -> usize, n: usize) -> FamilyDescription {
        let coords = (0..n)
            .map(|i| {
                let k = blocks_at(i);
                ModulusSpec::indicator((0..k).map(|b| vec![format!("p{b}")]).collect()).unwrap()
            })
            .collect();
        FamilyDescription::new("ind", coords).unwrap()
    }

    #[test]
    fn power_family_is_l1_like() {
        let fam = FamilyDescription::new("p1", vec![ModulusSpec::power(1.0, [0.0, 1.0]); 1100]).unwrap();
        let r = classify_trichotomy(&fam, &ClassifyOptions::default()).unwrap();
        assert_eq!(r.branch, Branch::L1Like);
        let w = r.l1_witness.unwrap();
        assert_eq!(w.c, 0.5f64.powi(10));
        assert!(w.sum >= 1.0);
    }

    #[test]
    fn one_block_indicators_are_trivial() {
        let r = classify_trichotomy(&indicator_family(|_| 1, 16), &ClassifyOptions::default()).unwrap();
        assert_eq!(r.branch, Branch::Trivial);
        assert!(r.l1_witness.is_none());
    }

    #[test]
    fn two_block_indicators_are_e0_like() {
        let r = classify_trichotomy(&indicator_family(|_| 2, 16), &ClassifyOptions::default()).unwrap();
        assert_eq!(r.branch, Branch::E0Like);
        assert!(r.class_counts.iter().all(|&k| k == 2));
    }

    #[test]
    fn growing_indicators_are_e1_like() {
        let opts = ClassifyOptions::default();
        let bound = opts.class_growth_bound;
        let r = classify_trichotomy(&indicator_family(|i| (i + 2).min(bound + 1), 40), &opts).unwrap();
        assert_eq!(r.branch, Branch::E1Like);
    }

    #[test]
    fn oscillating_counts_are_undecided() {
        let r = classify_trichotomy(
            &indicator_family(|i| if i % 2 == 0 { 2 } else { 20 }, 16),
            &ClassifyOptions::default(),
        )
        .unwrap();
        assert_eq!(r.branch, Branch::Undecided);
    }

    #[test]
    fn invalid_threshold_relation_forces_undecided() {
        // A short power family: witness search fails at small c, and
        // {|u-v| < c} on a grid is not transitive.
        let fam = FamilyDescription::new("p1", vec![ModulusSpec::power(1.0, [0.0, 1.0]); 8]).unwrap();
        let opts = ClassifyOptions {
            grid: Some(vec![0.0, 0.0005, 0.001, 0.0015]),
            ..ClassifyOptions::default()
        };
        let r = classify_trichotomy(&fam, &opts).unwrap();
        assert_eq!(r.branch, Branch::Undecided);
        assert!(r.narrative.iter().any(|s| s.contains("not an equivalence")));
    }

    #[test]
    fn empty_grid_rejected() {
        let opts = ClassifyOptions {
            c_grid: vec![],
            ..ClassifyOptions::default()
        };
        assert!(classify_trichotomy(&indicator_family(|_| 1, 2), &opts).is_err());
    }
}
