//! Block selection and the interpolating map into the product.
//!
//! Level `l` owns a contiguous block `[start, end]` of coordinates with
//! per-coordinate weights `w_n = psi_n(x_l(n), y_l(n)) < 2^-l` summing to
//! `[1, 1 + 2^-l)`. A real `z(l)` in `[0, 1]` is encoded by walking the block:
//! `x_l` while the partial sum stays `<= z(l)`, then `y_l`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::FamilyDescription;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub level: u32,
    pub start: usize,
    /// Inclusive.
    pub end: usize,
    pub weights: Vec<f64>,
    pub sum: f64,
}

impl Block {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Partial sums `sum_{start <= m <= n} w_m`, left to right.
    pub fn partial_sums(&self) -> Vec<f64> {
        self.weights
            .iter()
            .scan(0.0, |acc, &w| {
                *acc += w;
                Some(*acc)
            })
            .collect()
    }

    /// Number of leading coordinates that carry `x_l` for parameter `z`.
    pub fn switch_index(&self, z: f64) -> usize {
        self.partial_sums().iter().take_while(|&&p| p <= z).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockPlan {
    pub start_level: u32,
    pub blocks: Vec<Block>,
}

fn scale(level: u32) -> f64 {
    0.5f64.powi(level as i32)
}

impl BlockPlan {
    /// Coordinates touched by the plan.
    pub fn span(&self) -> usize {
        self.blocks.last().map_or(0, |b| b.end + 1)
    }

    /// Re-checks the three block conditions from the stored weights.
    pub fn validate(&self) -> Result<()> {
        let mut prev_end: Option<usize> = None;
        for (i, b) in self.blocks.iter().enumerate() {
            let bad = |why: String| Err(Error::InvalidArgument(format!("block at level {}: {why}", b.level)));
            if b.level != self.start_level + i as u32 {
                return bad("levels are not consecutive".into());
            }
            if b.end < b.start || b.weights.len() != b.len() {
                return bad("bounds do not match the weights".into());
            }
            if prev_end.is_some_and(|e| b.start <= e) {
                return bad("overlaps the previous block".into());
            }
            let eps = scale(b.level);
            if let Some(w) = b.weights.iter().find(|&&w| !(w >= 0.0 && w < eps)) {
                return bad(format!("weight {w} is not in [0, {eps})"));
            }
            let sum = *b.partial_sums().last().expect("non-empty block");
            if sum != b.sum || !(sum >= 1.0 && sum < 1.0 + eps) {
                return bad(format!("sum {sum} is not in [1, {})", 1.0 + eps));
            }
            prev_end = Some(b.end);
        }
        Ok(())
    }
}

/// Greedy selection: level `start_level + i` reads `streams[i]`, indexed by
/// coordinate, starting right after the previous block. A weight `>= 2^-l`
/// cannot sit inside the block, so the block restarts after it. Since every
/// accepted weight is below `2^-l`, the first crossing of 1 lands below
/// `1 + 2^-l`.
pub fn select_blocks(streams: &[Vec<f64>], start_level: u32) -> Result<BlockPlan> {
    let mut blocks = Vec::with_capacity(streams.len());
    let mut cursor = 0;
    for (i, stream) in streams.iter().enumerate() {
        let level = start_level + i as u32;
        let eps = scale(level);
        let mut start = cursor;
        let mut sum = 0.0;
        let mut weights = Vec::new();
        let mut n = cursor;
        loop {
            let Some(&w) = stream.get(n) else {
                return Err(Error::StreamExhausted { level, consumed: n });
            };
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "weight {w} at coordinate {n} of level {level} is not a non-negative number"
                )));
            }
            if w >= eps {
                start = n + 1;
                sum = 0.0;
                weights.clear();
            } else {
                sum += w;
                weights.push(w);
                if sum >= 1.0 {
                    break;
                }
            }
            n += 1;
        }
        blocks.push(Block {
            level,
            start,
            end: n,
            weights,
            sum,
        });
        cursor = n + 1;
    }
    let plan = BlockPlan { start_level, blocks };
    plan.validate()?;
    Ok(plan)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "level", rename_all = "snake_case")]
pub enum Slot {
    X(u32),
    Y(u32),
    Filler,
}

fn check_params(z: &[f64], plan: &BlockPlan) -> Result<()> {
    if z.len() != plan.blocks.len() {
        return Err(Error::LengthMismatch {
            x: z.len(),
            y: z.len(),
            n: plan.blocks.len(),
        });
    }
    if let Some(i) = z.iter().position(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::InvalidArgument(format!("z[{i}] = {} is outside [0, 1]", z[i])));
    }
    Ok(())
}

/// Which stream each coordinate `0..plan.span()` reads from.
pub fn block_reduce(z: &[f64], plan: &BlockPlan) -> Result<Vec<Slot>> {
    check_params(z, plan)?;
    let mut out = vec![Slot::Filler; plan.span()];
    for (b, &zl) in plan.blocks.iter().zip(z) {
        let switch = b.switch_index(zl);
        for (off, slot) in out[b.start..=b.end].iter_mut().enumerate() {
            *slot = if off < switch { Slot::X(b.level) } else { Slot::Y(b.level) };
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelMargin {
    pub level: u32,
    pub diff: f64,
    pub disagreement: f64,
    /// `disagreement - (diff - 2^-l)`; positive when the lower bound holds.
    pub lower_margin: f64,
    /// `(diff + 2^-l) - disagreement`; positive when the upper bound holds.
    pub upper_margin: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockVerification {
    pub levels: Vec<LevelMargin>,
    pub all_ok: bool,
}

fn margins(z: &[f64], w: &[f64], plan: &BlockPlan, disagreement: impl Fn(usize, &Block) -> Result<f64>) -> Result<BlockVerification> {
    check_params(z, plan)?;
    check_params(w, plan)?;
    let mut levels = Vec::with_capacity(plan.blocks.len());
    for (i, b) in plan.blocks.iter().enumerate() {
        let diff = (z[i] - w[i]).abs();
        let eps = scale(b.level);
        let dis = disagreement(i, b)?;
        let lower_margin = dis - (diff - eps);
        let upper_margin = (diff + eps) - dis;
        levels.push(LevelMargin {
            level: b.level,
            diff,
            disagreement: dis,
            lower_margin,
            upper_margin,
            ok: lower_margin > 0.0 && upper_margin > 0.0,
        });
    }
    let all_ok = levels.iter().all(|l| l.ok);
    Ok(BlockVerification { levels, all_ok })
}

/// `|z(l) - w(l)| - 2^-l < sum of the weights where the two walks disagree
/// < |z(l) - w(l)| + 2^-l`, per level, with the designated pairs taken to be
/// symmetric.
pub fn verify_block_inequality(z: &[f64], w: &[f64], plan: &BlockPlan) -> Result<BlockVerification> {
    margins(z, w, plan, |i, b| {
        let (a, c) = (b.switch_index(z[i]), b.switch_index(w[i]));
        Ok(b.weights[a.min(c)..a.max(c)].iter().sum())
    })
}

/// Designated point streams of one level, indexed by coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelPairs {
    pub x: Vec<String>,
    pub y: Vec<String>,
}

/// `streams[l][n] = psi_n(x_l(n), y_l(n))` for every coordinate of `fam`.
pub fn weight_streams(fam: &FamilyDescription, pairs: &[LevelPairs]) -> Result<Vec<Vec<f64>>> {
    pairs
        .iter()
        .map(|p| {
            if p.x.len() != fam.len() || p.y.len() != fam.len() {
                return Err(Error::LengthMismatch {
                    x: p.x.len(),
                    y: p.y.len(),
                    n: fam.len(),
                });
            }
            fam.coords
                .iter()
                .enumerate()
                .map(|(n, spec)| spec.psi(n, &p.x[n], &p.y[n]))
                .collect()
        })
        .collect()
}

/// Turns slots into points: designated streams inside blocks, `filler`
/// (one point per coordinate) elsewhere.
pub fn realize(slots: &[Slot], plan: &BlockPlan, pairs: &[LevelPairs], filler: &[String]) -> Result<Vec<String>> {
    if filler.len() < slots.len() {
        return Err(Error::IndexOutOfRange {
            index: slots.len() - 1,
            max: filler.len(),
        });
    }
    let stream = |level: u32| -> Result<&LevelPairs> {
        pairs
            .get((level - plan.start_level) as usize)
            .ok_or(Error::IndexOutOfRange {
                index: (level - plan.start_level) as usize,
                max: pairs.len(),
            })
    };
    let mut out = filler.to_vec();
    for (n, slot) in slots.iter().enumerate() {
        out[n] = match *slot {
            Slot::X(l) => stream(l)?.x[n].clone(),
            Slot::Y(l) => stream(l)?.y[n].clone(),
            Slot::Filler => continue,
        };
    }
    Ok(out)
}

/// The same two-sided bound, with the disagreement measured by the family's
/// moduli on the realized points (`psi_n(theta(z)(n), theta(w)(n))`).
pub fn verify_block_inequality_family(
    z: &[f64],
    w: &[f64],
    plan: &BlockPlan,
    fam: &FamilyDescription,
    pairs: &[LevelPairs],
    filler: &[String],
) -> Result<BlockVerification> {
    let pz = realize(&block_reduce(z, plan)?, plan, pairs, filler)?;
    let pw = realize(&block_reduce(w, plan)?, plan, pairs, filler)?;
    if pz.len() > fam.len() {
        return Err(Error::LengthMismatch {
            x: pz.len(),
            y: pw.len(),
            n: fam.len(),
        });
    }
    margins(z, w, plan, |_, b| {
        (b.start..=b.end)
            .map(|n| fam.coords[n].psi(n, &pz[n], &pw[n]))
            .sum()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModulusSpec;

    fn plan_of(weight: f64, level: u32) -> BlockPlan {
        select_blocks(&[vec![weight; 100]], level).unwrap()
    }

    #[test]
    fn constant_point_three_gives_four() {
        let p = plan_of(0.3, 0);
        let b = &p.blocks[0];
        assert_eq!((b.start, b.end, b.len()), (0, 3, 4));
        assert!((b.sum - 1.2).abs() < 1e-15);
    }

    #[test]
    fn too_heavy_weights_exhaust_the_stream() {
        assert!(matches!(
            select_blocks(&[vec![0.6; 50]], 1),
            Err(Error::StreamExhausted { level: 1, .. })
        ));
    }

    #[test]
    fn sixteenths_sum_to_one_exactly() {
        let b = &plan_of(0.0625, 2).blocks[0];
        assert_eq!(b.len(), 16);
        assert_eq!(b.sum, 1.0);
    }

    #[test]
    fn heavy_weight_restarts_the_block() {
        let mut s = vec![0.3; 10];
        s[2] = 1.0;
        let p = select_blocks(&[s], 0).unwrap();
        assert_eq!((p.blocks[0].start, p.blocks[0].end), (3, 6));
    }

    #[test]
    fn levels_follow_each_other() {
        let p = select_blocks(&[vec![0.3; 40], vec![0.25; 40]], 0).unwrap();
        assert_eq!((p.blocks[1].start, p.blocks[1].end), (4, 7));
        assert_eq!(p.blocks[1].level, 1);
        assert_eq!(p.span(), 8);
    }

    #[test]
    fn walk_patterns() {
        let p = plan_of(0.3, 0);
        let xs = |z| block_reduce(&[z], &p).unwrap();
        assert_eq!(xs(1.0), vec![Slot::X(0), Slot::X(0), Slot::X(0), Slot::Y(0)]);
        assert_eq!(xs(0.0), vec![Slot::Y(0); 4]);
        assert!(block_reduce(&[0.5, 0.5], &p).is_err());
        assert!(block_reduce(&[1.5], &p).is_err());
    }

    #[test]
    fn identical_inputs_have_zero_disagreement() {
        let p = plan_of(0.3, 0);
        let v = verify_block_inequality(&[0.4], &[0.4], &p).unwrap();
        assert_eq!(v.levels[0].disagreement, 0.0);
        assert!(v.all_ok);
    }

    #[test]
    fn half_apart_on_the_point_three_plan() {
        let p = plan_of(0.3, 0);
        let v = verify_block_inequality(&[0.9], &[0.4], &p).unwrap();
        // walks switch after 3 and 1 coordinates
        assert!((v.levels[0].disagreement - 0.6).abs() < 1e-15);
        assert!(v.all_ok);
    }

    #[test]
    fn tampered_plan_fails_validation() {
        let mut p = plan_of(0.3, 0);
        p.blocks[0].weights[0] = 1.5;
        assert!(p.validate().is_err());
    }

    #[test]
    fn family_form_matches_weights() {
        // psi_n = |u - v| on [0,1]; x_0(n) = 0, y_0(n) = 0.3
        let fam = FamilyDescription::new("p1", vec![ModulusSpec::power(1.0, [0.0, 1.0]); 8]).unwrap();
        let pairs = vec![LevelPairs {
            x: vec!["0".into(); 8],
            y: vec!["0.3".into(); 8],
        }];
        let streams = weight_streams(&fam, &pairs).unwrap();
        let plan = select_blocks(&streams, 0).unwrap();
        let filler = vec!["0".to_string(); 8];
        let v = verify_block_inequality_family(&[0.9], &[0.2], &plan, &fam, &pairs, &filler).unwrap();
        let a = verify_block_inequality(&[0.9], &[0.2], &plan).unwrap();
        assert!((v.levels[0].disagreement - a.levels[0].disagreement).abs() < 1e-12);
        assert!(v.all_ok);
    }
}
