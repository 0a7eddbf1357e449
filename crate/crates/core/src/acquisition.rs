//! Min-max rescaled acquisition, augmented sample sets, baseline shapes and
//! the greedy δ-cycling rule.
//!
//! Points handled here live in unit-box coordinates of the problem's
//! [`ConstraintSet`]; feasibility is checked with
//! [`ConstraintSet::contains_unit`].

use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::ConstraintSet;
use crate::error::{invalid, GmrsError, Result};
use crate::explore::ExplorationFunction;
use crate::linalg::dist;
use crate::Surrogate;

/// Minimum, maximum and (substituted) range of a function over a point set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub delta: f64,
}

impl Range {
    /// `Δ = max − min`, replaced by `max` when the values are a nonzero
    /// constant and by `1` when they are all zero.
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let mut it = values.into_iter();
        let first = it.next()?;
        let (min, max) = it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v)));
        let delta = if min < max {
            max - min
        } else if max != 0.0 {
            max
        } else {
            1.0
        };
        Some(Self { min, max, delta })
    }
}

/// Rescaling statistics of the surrogate and exploration function over `X_aug`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaleStats {
    pub f: Range,
    pub z: Range,
}

/// Generic `(min, max, Δ)` of `h` over `points`.
pub fn rescale_stats(h: impl Fn(&[f64]) -> f64, points: &[Vec<f64>]) -> Result<Range> {
    Range::of(points.iter().map(|x| h(x))).ok_or_else(|| invalid("rescaling needs at least one point"))
}

impl RescaleStats {
    pub fn compute(surrogate: &dyn Surrogate, explore: &ExplorationFunction<'_>, x_aug: &[Vec<f64>]) -> Result<Self> {
        Ok(Self {
            f: rescale_stats(|x| surrogate.evaluate(x), x_aug)?,
            z: rescale_stats(|x| explore.evaluate(x), x_aug)?,
        })
    }
}

/// `δ·(f̂ − f_min)/Δf + (1 − δ)·(z − z_min)/Δz` from already evaluated terms.
pub fn acquisition_value(stats: &RescaleStats, delta: f64, fhat: f64, z: f64) -> f64 {
    delta * (fhat - stats.f.min) / stats.f.delta + (1.0 - delta) * (z - stats.z.min) / stats.z.delta
}

/// How the pair `(f̂, z)` is combined into the function the inner solver minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AcquisitionKind {
    /// Min-max rescaled convex combination weighted by the cycled δ.
    #[default]
    Rescaled,
    /// `f̂(x) + α·z(x)`
    FixedAlpha { alpha: f64 },
    /// `f̂(x)/ΔF̂(X) + α·z(x)`, with the surrogate range taken over the samples.
    GlispLike { alpha: f64 },
}

/// Evaluates one of the baseline shapes; `f_range_over_samples` is only used
/// by [`AcquisitionKind::GlispLike`].
pub fn baseline_acquisition(kind: AcquisitionKind, fhat: f64, z: f64, f_range_over_samples: f64) -> f64 {
    match kind {
        AcquisitionKind::FixedAlpha { alpha } => fhat + alpha * z,
        AcquisitionKind::GlispLike { alpha } => fhat / f_range_over_samples + alpha * z,
        AcquisitionKind::Rescaled => panic!("the rescaled acquisition is not a baseline shape"),
    }
}

/// A fully bound acquisition function.
pub struct Acquisition<'a> {
    pub surrogate: &'a dyn Surrogate,
    pub explore: &'a ExplorationFunction<'a>,
    pub kind: AcquisitionKind,
    pub stats: RescaleStats,
    /// `ΔF̂(X)`, surrogate range over the samples.
    pub sample_range: f64,
    pub delta: f64,
}

impl<'a> Acquisition<'a> {
    pub fn new(
        surrogate: &'a dyn Surrogate,
        explore: &'a ExplorationFunction<'a>,
        kind: AcquisitionKind,
        x_aug: &[Vec<f64>],
        samples: &[Vec<f64>],
        delta: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(invalid(format!("trade-off weight {delta} outside [0, 1]")));
        }
        let stats = RescaleStats::compute(surrogate, explore, x_aug)?;
        let sample_range = rescale_stats(|x| surrogate.evaluate(x), samples)?.delta;
        Ok(Self {
            surrogate,
            explore,
            kind,
            stats,
            sample_range,
            delta,
        })
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let fhat = self.surrogate.evaluate(x);
        let z = self.explore.evaluate(x);
        match self.kind {
            AcquisitionKind::Rescaled => acquisition_value(&self.stats, self.delta, fhat, z),
            kind => baseline_acquisition(kind, fhat, z, self.sample_range),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AugmentStrategy {
    /// Uniform random points plus midpoints between well spread samples.
    #[default]
    RandomUniform,
    /// The samples together with uniform random points.
    SamplesPlusRandom,
}

impl FromStr for AugmentStrategy {
    type Err = GmrsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random-uniform" => Ok(Self::RandomUniform),
            "samples-plus-random" => Ok(Self::SamplesPlusRandom),
            other => Err(invalid(format!("unknown augmentation strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSet {
    pub points: Vec<Vec<f64>>,
}

impl AugmentedSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Draws `count` feasible uniform points of the unit box, giving up after
/// `100·count` draws.
pub fn feasible_uniform<R: Rng + ?Sized>(omega: &ConstraintSet, count: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    let n = omega.dim();
    let mut out = Vec::with_capacity(count);
    let budget = 100 * count.max(1);
    for _ in 0..budget {
        if out.len() == count {
            break;
        }
        let u: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        if omega.contains_unit(&u) {
            out.push(u);
        }
    }
    if out.len() < count {
        return Err(GmrsError::FeasibilityExhausted(format!(
            "only {} of {count} feasible points in {budget} draws",
            out.len()
        )));
    }
    Ok(out)
}

/// Indices of up to `k` mutually distant points: start from the point
/// farthest from the centroid, then add farthest-from-chosen points.
fn spread_indices(points: &[Vec<f64>], k: usize) -> Vec<usize> {
    if points.is_empty() || k == 0 {
        return Vec::new();
    }
    let n = points[0].len();
    let centroid: Vec<f64> = (0..n)
        .map(|d| points.iter().map(|p| p[d]).sum::<f64>() / points.len() as f64)
        .collect();
    let argmax = |score: &dyn Fn(usize) -> f64, taken: &[usize]| {
        (0..points.len())
            .filter(|i| !taken.contains(i))
            .fold(None, |best: Option<(usize, f64)>, i| {
                let s = score(i);
                match best {
                    Some((_, b)) if b >= s => best,
                    _ => Some((i, s)),
                }
            })
            .map(|(i, _)| i)
    };
    let mut chosen = vec![argmax(&|i| dist(&points[i], &centroid), &[]).unwrap()];
    while chosen.len() < k.min(points.len()) {
        let next = argmax(
            &|i| {
                chosen
                    .iter()
                    .map(|&c| dist(&points[i], &points[c]))
                    .fold(f64::INFINITY, f64::min)
            },
            &chosen,
        )
        .unwrap();
        chosen.push(next);
    }
    chosen
}

/// Builds `X_aug` in unit-box coordinates from the samples `xs` (also in unit
/// coordinates).
pub fn build_augmented_set<R: Rng + ?Sized>(
    omega: &ConstraintSet,
    xs: &[Vec<f64>],
    n_aug: usize,
    strategy: AugmentStrategy,
    rng: &mut R,
) -> Result<AugmentedSet> {
    if xs.is_empty() {
        return Err(invalid("the augmented set needs at least one sample"));
    }
    if n_aug < 2 {
        return Err(invalid("the augmented set needs at least two random points"));
    }
    let random = feasible_uniform(omega, n_aug, rng)?;
    let points = match strategy {
        AugmentStrategy::RandomUniform => {
            let mut points = random;
            let spread = spread_indices(xs, 3);
            for (a, &i) in spread.iter().enumerate() {
                for &j in &spread[a + 1..] {
                    let mid: Vec<f64> = xs[i].iter().zip(&xs[j]).map(|(p, q)| 0.5 * (p + q)).collect();
                    if omega.contains_unit(&mid) {
                        points.push(mid);
                    }
                }
            }
            points
        }
        AugmentStrategy::SamplesPlusRandom => xs.iter().cloned().chain(random).collect(),
    };
    Ok(AugmentedSet { points })
}

/// Ordered trade-off weights cycled greedily: keep the current weight while
/// the incumbent improves, advance to the next one otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDeltaCycle")]
pub struct DeltaCycle {
    values: Vec<f64>,
    index: usize,
}

#[derive(Deserialize)]
struct RawDeltaCycle {
    values: Vec<f64>,
    index: usize,
}

impl TryFrom<RawDeltaCycle> for DeltaCycle {
    type Error = GmrsError;

    fn try_from(raw: RawDeltaCycle) -> Result<Self> {
        let cycle = Self::new(raw.values)?;
        if raw.index >= cycle.values.len() {
            return Err(invalid("cycle index out of range"));
        }
        Ok(Self {
            index: raw.index,
            ..cycle
        })
    }
}

impl DeltaCycle {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("the delta cycle needs at least one value"));
        }
        if let Some(bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(invalid(format!("delta {bad} outside [0, 1]")));
        }
        Ok(Self { values, index: 0 })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn delta(&self) -> f64 {
        self.values[self.index]
    }

    /// True when some weight is zero, i.e. pure exploration recurs.
    pub fn is_convergent(&self) -> bool {
        self.values.contains(&0.0)
    }

    #[must_use]
    pub fn step(&self, improved: bool) -> Self {
        cycle_step(self, improved)
    }
}

pub fn cycle_step(cycle: &DeltaCycle, improved: bool) -> DeltaCycle {
    let index = if improved {
        cycle.index
    } else {
        (cycle.index + 1) % cycle.values.len()
    };
    DeltaCycle {
        values: cycle.values.clone(),
        index,
    }
}

/// Parses a comma separated list such as `0.95,0.7,0.35,0`.
impl FromStr for DeltaCycle {
    type Err = GmrsError;

    fn from_str(s: &str) -> Result<Self> {
        let values = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| invalid(format!("bad delta value `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(values)
    }
}
