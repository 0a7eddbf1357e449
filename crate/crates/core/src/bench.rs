//! Monte Carlo benchmarking: repeated seeded runs per configuration arm,
//! best-so-far curves and their median/min/max envelopes.

use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{ConstraintSet, TestFunction};
use crate::error::{invalid, Result};
use crate::gmrs::{gmrs_run, Evaluator, GmrsConfig, Mode};

/// Grid search over the box followed by compass-search refinement of the
/// best grid point. Intended for `dim <= 3`.
pub fn brute_force_min(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    bounds: &ConstraintSet,
    grid_per_dim: usize,
) -> Result<(Vec<f64>, f64)> {
    let n = bounds.dim();
    if !(1..=3).contains(&n) {
        return Err(invalid("brute-force search supports 1 to 3 dimensions"));
    }
    if grid_per_dim < 101 {
        return Err(invalid("the grid needs at least 101 points per dimension"));
    }
    let total = grid_per_dim.pow(n as u32);
    let coord = |d: usize, i: usize| bounds.lower()[d] + bounds.width(d) * i as f64 / (grid_per_dim - 1) as f64;
    let point = |mut idx: usize| {
        (0..n)
            .map(|d| {
                let i = idx % grid_per_dim;
                idx /= grid_per_dim;
                coord(d, i)
            })
            .collect::<Vec<f64>>()
    };
    let (best_idx, _) = (0..total).into_par_iter().map(|i| (i, f(&point(i)))).reduce(
        || (usize::MAX, f64::INFINITY),
        |a, b| {
            if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) {
                b
            } else {
                a
            }
        },
    );
    if best_idx == usize::MAX {
        return Err(invalid("objective is not finite anywhere on the grid"));
    }

    // refine on the unit box, starting with one grid cell
    let mut u = bounds.to_unit(&point(best_idx));
    let eval = |u: &[f64]| f(&bounds.from_unit(u));
    let mut fu = eval(&u);
    let mut step = 1.0 / (grid_per_dim - 1) as f64;
    while step > 1e-13 {
        let mut moved = false;
        'poll: for d in 0..n {
            for sign in [1.0, -1.0] {
                let mut t = u.clone();
                t[d] = (t[d] + sign * step).clamp(0.0, 1.0);
                let ft = eval(&t);
                if ft < fu {
                    u = t;
                    fu = ft;
                    moved = true;
                    break 'poll;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    Ok((bounds.from_unit(&u), fu))
}

/// One configuration compared in a Monte Carlo study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arm {
    pub label: String,
    /// Mode, budget and seed are overridden by the study.
    #[serde(default)]
    pub config: GmrsConfig,
}

/// A Monte Carlo study; this is the `mc.json` document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub function: String,
    #[serde(default)]
    pub mode: Mode,
    pub arms: Vec<Arm>,
    pub n_runs: usize,
    #[serde(default)]
    pub seed_base: u64,
    #[serde(default = "default_n_init")]
    pub n_init: usize,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// Comparison noise of the synthetic oracle in preference mode.
    #[serde(default)]
    pub oracle_noise: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_n_init() -> usize {
    4
}

fn default_n_max() -> usize {
    70
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_runs == 0 {
            return Err(invalid("n_runs must be at least 1"));
        }
        if self.arms.is_empty() {
            return Err(invalid("at least one arm is required"));
        }
        if !(self.oracle_noise >= 0.0) {
            return Err(invalid("oracle_noise must be non-negative"));
        }
        TestFunction::by_name(&self.function)?;
        for arm in &self.arms {
            self.arm_config(arm, 0).validate()?;
        }
        Ok(())
    }

    /// The configuration of run `r` of `arm`.
    pub fn arm_config(&self, arm: &Arm, r: usize) -> GmrsConfig {
        GmrsConfig {
            mode: self.mode,
            n_init: self.n_init,
            n_max: self.n_max,
            seed: self.seed_base + r as u64,
            ..arm.config.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    pub label: String,
    /// Per sample index `1..=n_max`.
    pub median: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    /// Final best-so-far value of every successful run, by run index.
    pub finals: Vec<f64>,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub function: String,
    pub arms: Vec<ArmSummary>,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Runs every arm `n_runs` times with seeds `seed_base + r`. Runs execute in
/// parallel; results do not depend on scheduling. Failed runs are logged,
/// counted and left out of the envelopes.
pub fn run_monte_carlo(cfg: &McConfig) -> Result<McSummary> {
    cfg.validate()?;
    let func = TestFunction::by_name(&cfg.function)?;
    let bounds = func.bounds();
    let mut arms = Vec::with_capacity(cfg.arms.len());
    for arm in &cfg.arms {
        let runs: Vec<Result<Vec<f64>>> = (0..cfg.n_runs)
            .into_par_iter()
            .map(|r| {
                let run_cfg = cfg.arm_config(arm, r);
                let evaluator = match cfg.mode {
                    Mode::Blackbox => Evaluator::measure(func.func()),
                    Mode::Preference => Evaluator::compare(
                        crate::domain::PreferenceOracle::new(func.func()).with_noise(cfg.oracle_noise)?,
                        run_cfg.seed,
                    ),
                };
                gmrs_run(run_cfg, bounds.clone(), evaluator).map(|res| res.trajectory)
            })
            .collect();
        let mut curves = Vec::new();
        let mut failures = 0;
        for (r, run) in runs.into_iter().enumerate() {
            match run {
                Ok(c) => curves.push(c),
                Err(e) => {
                    log::warn!("arm `{}` run {r} failed: {e}", arm.label);
                    failures += 1;
                }
            }
        }
        let len = curves.iter().map(Vec::len).min().unwrap_or(0);
        let (mut med, mut lo, mut hi) = (
            Vec::with_capacity(len),
            Vec::with_capacity(len),
            Vec::with_capacity(len),
        );
        for i in 0..len {
            let mut col: Vec<f64> = curves.iter().map(|c| c[i]).collect();
            col.sort_by(f64::total_cmp);
            med.push(median(&col));
            lo.push(col[0]);
            hi.push(col[col.len() - 1]);
        }
        arms.push(ArmSummary {
            label: arm.label.clone(),
            median: med,
            min: lo,
            max: hi,
            finals: curves.iter().filter_map(|c| c.last().copied()).collect(),
            failures,
        });
    }
    Ok(McSummary {
        function: cfg.function.clone(),
        arms,
    })
}

/// Writes the envelopes as CSV with columns `arm, iter, median, min, max`,
/// grouped by arm in configuration order.
pub fn emit_curves<W: Write>(summary: &McSummary, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["arm", "iter", "median", "min", "max"])?;
    for arm in &summary.arms {
        for i in 0..arm.median.len() {
            w.write_record([
                arm.label.clone(),
                (i + 1).to_string(),
                arm.median[i].to_string(),
                arm.min[i].to_string(),
                arm.max[i].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brute_force_examples() {
        let bounds = ConstraintSet::new(vec![-1.0, -1.0], vec![2.0, 1.0]).unwrap();
        let quad = |x: &[f64]| (x[0] - 0.3).powi(2) + (x[1] + 0.2).powi(2);
        let (x, f) = brute_force_min(&quad, &bounds, 101).unwrap();
        assert!((x[0] - 0.3).abs() < 0.03 && (x[1] + 0.2).abs() < 0.02);
        assert!(f < 1e-12);
        let (_, f) = brute_force_min(&|_: &[f64]| 4.5, &bounds, 101).unwrap();
        assert_eq!(f, 4.5);
        let cube = ConstraintSet::unit(4).unwrap();
        assert!(brute_force_min(&|_: &[f64]| 0.0, &cube, 101).is_err());
        assert!(brute_force_min(&quad, &bounds, 100).is_err());
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&[1.0, 2.0, 10.0]), 2.0);
        assert_eq!(median(&[1.0, 2.0, 4.0, 10.0]), 3.0);
    }

    fn summary(rows: usize, arms: &[&str]) -> McSummary {
        McSummary {
            function: "f".into(),
            arms: arms
                .iter()
                .map(|l| ArmSummary {
                    label: l.to_string(),
                    median: vec![1.0; rows],
                    min: vec![0.5; rows],
                    max: vec![2.0; rows],
                    finals: vec![],
                    failures: 0,
                })
                .collect(),
        }
    }

    #[test]
    fn csv_row_counts() {
        let lines = |s: &McSummary| {
            let mut buf = Vec::new();
            emit_curves(s, &mut buf).unwrap();
            String::from_utf8(buf).unwrap().lines().count()
        };
        assert_eq!(lines(&summary(70, &["a"])), 71);
        assert_eq!(lines(&summary(70, &["a", "b"])), 141);
        assert_eq!(lines(&summary(0, &["a"])), 1);
    }

    #[test]
    fn config_validation() {
        let cfg: McConfig =
            serde_json::from_str(r#"{"function":"adjiman","arms":[{"label":"g"}],"n_runs":2}"#).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.arm_config(&cfg.arms[0], 1).seed, 1);
        let bad = McConfig {
            n_runs: 0,
            ..cfg.clone()
        };
        assert!(bad.validate().is_err());
        let bad = McConfig {
            arms: vec![],
            ..cfg.clone()
        };
        assert!(bad.validate().is_err());
        let bad = McConfig {
            function: "nope".into(),
            ..cfg
        };
        assert!(bad.validate().is_err());
    }
}
