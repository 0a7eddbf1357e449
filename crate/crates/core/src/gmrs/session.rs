use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{GmrsConfig, Mode, SurrogateKind};
use super::design::lhd_design;
use super::inner::{inner_minimize, spread_point};
use super::recalibrate::{recalibrate, Hyperparameters};
use crate::acquisition::{build_augmented_set, Acquisition, DeltaCycle};
use crate::domain::{ConstraintSet, Dataset, Preference, DUPLICATE_TOL};
use crate::error::{GmrsError, Result};
use crate::explore::{ExplorationFunction, ExploreVariant, Predictive};
use crate::gp::{gp_fit_blackbox, gp_fit_preference, GpBlackboxModel, GpPreferenceModel};
use crate::rbf::{fit_interpolant, fit_preference_rbf, RbfSurrogate};
use crate::Surrogate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    /// Evaluating the initial design.
    Initial,
    /// Acquisition-driven proposals.
    Loop,
}

/// A request for one evaluation: a measure of `candidate` in black-box mode,
/// or a comparison of `candidate` against `incumbent` in preference mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    /// Identifies this query; answers carrying another token are refused.
    pub token: String,
    pub phase: Phase,
    /// 1-based loop iteration, 0 during the initial design.
    pub iteration: usize,
    /// Trade-off weight used to propose the candidate.
    pub delta: Option<f64>,
    pub candidate: Vec<f64>,
    pub incumbent: Option<Vec<f64>>,
    /// Evaluations left in the budget, this one included.
    pub remaining: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observation {
    Measure(f64),
    /// Outcome of comparing the candidate (first) with the incumbent (second).
    Preference(Preference),
}

/// One answered query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub phase: Phase,
    pub iteration: usize,
    pub candidate: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub incumbent: Option<Vec<f64>>,
    pub observation: Observation,
    pub delta: Option<f64>,
    pub improved: bool,
    /// Index of the best sample after this answer.
    pub best: usize,
}

/// The complete optimizer state between two queries. Serializes to JSON and
/// back without loss (nonlinear constraints excepted, as they are closures).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionState {
    config: GmrsConfig,
    bounds: ConstraintSet,
    dataset: Dataset,
    best: Option<usize>,
    y_best: Option<f64>,
    cycle: DeltaCycle,
    last_improved: bool,
    iteration: usize,
    rng: ChaCha8Rng,
    hyper: Hyperparameters,
    design_queue: VecDeque<Vec<f64>>,
    pending: Option<Query>,
    queries_issued: u64,
    history: Vec<StepRecord>,
}

enum Fitted {
    Rbf(RbfSurrogate),
    GpBlackbox(GpBlackboxModel),
    GpPreference(GpPreferenceModel),
}

impl Fitted {
    fn surrogate(&self) -> &dyn Surrogate {
        match self {
            Fitted::Rbf(m) => m,
            Fitted::GpBlackbox(m) => m,
            Fitted::GpPreference(m) => m,
        }
    }

    fn predictive(&self) -> Option<&dyn Predictive> {
        match self {
            Fitted::Rbf(_) => None,
            Fitted::GpBlackbox(m) => Some(m),
            Fitted::GpPreference(m) => Some(m),
        }
    }
}

impl SessionState {
    /// Validates the configuration and draws the initial design. In
    /// preference mode the first design point becomes the initial incumbent
    /// without a query.
    pub fn new(config: GmrsConfig, bounds: ConstraintSet) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let design = lhd_design(&bounds, config.n_init, &mut rng)?;
        let mut design_queue: VecDeque<Vec<f64>> = design.into();
        let (dataset, best) = match config.mode {
            Mode::Blackbox => (Dataset::blackbox(), None),
            Mode::Preference => {
                let mut ds = Dataset::preference();
                let first = design_queue.pop_front().expect("design is non-empty");
                ds.push_sample(first, &bounds.duplicate_tolerance())?;
                (ds, Some(0))
            }
        };
        Ok(Self {
            cycle: DeltaCycle::new(config.acq.delta_cycle.clone())?,
            hyper: Hyperparameters::from_config(&config),
            config,
            bounds,
            dataset,
            best,
            y_best: None,
            last_improved: true,
            iteration: 0,
            rng,
            design_queue,
            pending: None,
            queries_issued: 0,
            history: Vec::new(),
        })
    }

    pub fn config(&self) -> &GmrsConfig {
        &self.config
    }

    pub fn bounds(&self) -> &ConstraintSet {
        &self.bounds
    }

    pub fn mode(&self) -> Mode {
        self.config.mode
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn best_index(&self) -> Option<usize> {
        self.best
    }

    pub fn best_sample(&self) -> Option<&[f64]> {
        self.best.map(|i| self.dataset.sample(i))
    }

    /// Smallest measure so far (black-box mode).
    pub fn y_best(&self) -> Option<f64> {
        self.y_best
    }

    pub fn cycle(&self) -> &DeltaCycle {
        &self.cycle
    }

    pub fn last_improved(&self) -> bool {
        self.last_improved
    }

    /// Completed loop iterations.
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn hyperparameters(&self) -> &Hyperparameters {
        &self.hyper
    }

    pub fn pending(&self) -> Option<&Query> {
        self.pending.as_ref()
    }

    pub fn history(&self) -> &[StepRecord] {
        &self.history
    }

    /// True once the evaluation budget is used up.
    pub fn is_finished(&self) -> bool {
        self.pending.is_none() && self.design_queue.is_empty() && self.dataset.len() >= self.config.n_max
    }

    /// Returns the pending query, proposing a new one if there is none.
    /// `None` means the budget is exhausted.
    pub fn next_query(&mut self) -> Result<Option<Query>> {
        if let Some(q) = &self.pending {
            return Ok(Some(q.clone()));
        }
        if self.is_finished() {
            return Ok(None);
        }
        let (phase, iteration, delta, candidate) = match self.design_queue.pop_front() {
            Some(x) => (Phase::Initial, 0, None, x),
            None => {
                let (x, delta) = self.propose()?;
                (Phase::Loop, self.iteration + 1, Some(delta), x)
            }
        };
        let query = Query {
            token: format!("q{}", self.queries_issued),
            phase,
            iteration,
            delta,
            candidate,
            incumbent: match self.config.mode {
                Mode::Blackbox => None,
                Mode::Preference => self.best_sample().map(<[f64]>::to_vec),
            },
            remaining: self.config.n_max - self.dataset.len(),
        };
        self.queries_issued += 1;
        self.pending = Some(query.clone());
        Ok(Some(query))
    }

    /// Records the answer to the pending query. With `token` set, the answer
    /// is refused unless it names the pending query.
    pub fn submit(&mut self, token: Option<&str>, observation: Observation) -> Result<StepRecord> {
        let query = self.pending.as_ref().ok_or(GmrsError::NoPendingQuery)?;
        if let Some(t) = token {
            if t != query.token {
                return Err(GmrsError::StaleQuery {
                    expected: query.token.clone(),
                    got: t.to_owned(),
                });
            }
        }
        let tol = self.bounds.duplicate_tolerance();
        let x = query.candidate.clone();
        let improved = match (self.config.mode, observation) {
            (Mode::Blackbox, Observation::Measure(y)) => {
                if !y.is_finite() {
                    return Err(GmrsError::WrongAnswerKind(format!("measure {y} is not finite")));
                }
                let i = self.dataset.push_measure(x, y, &tol)?;
                let improved = self.y_best.is_none_or(|b| y <= b);
                if improved {
                    self.best = Some(i);
                    self.y_best = Some(y);
                }
                improved
            }
            (Mode::Preference, Observation::Preference(b)) => {
                if !(-1..=1).contains(&b) {
                    return Err(GmrsError::WrongAnswerKind(format!("preference {b} is not -1, 0 or 1")));
                }
                if b == 0 && self.config.surrogate == SurrogateKind::Gp {
                    return Err(GmrsError::TieNotSupported);
                }
                let incumbent = self.best.expect("preference sessions always have an incumbent");
                let i = self.dataset.push_sample(x, &tol)?;
                self.dataset.push_preference(i, incumbent, b)?;
                if b == -1 {
                    self.best = Some(i);
                }
                b == -1
            }
            (Mode::Blackbox, _) => return Err(GmrsError::WrongAnswerKind("a measure is expected".into())),
            (Mode::Preference, _) => return Err(GmrsError::WrongAnswerKind("a preference is expected".into())),
        };
        let query = self.pending.take().expect("checked above");
        if query.phase == Phase::Loop {
            self.iteration += 1;
            self.last_improved = improved;
            self.cycle = self.cycle.step(improved);
        }
        let record = StepRecord {
            phase: query.phase,
            iteration: query.iteration,
            candidate: query.candidate,
            incumbent: query.incumbent,
            observation,
            delta: query.delta,
            improved,
            best: self.best.expect("set by the first answer"),
        };
        self.history.push(record.clone());
        Ok(record)
    }

    fn fit(&self, data: &Dataset, kind: SurrogateKind) -> Result<Fitted> {
        let cfg = &self.config;
        Ok(match (kind, cfg.mode) {
            (SurrogateKind::Rbf, Mode::Blackbox) => Fitted::Rbf(fit_interpolant(&self.hyper.rbf_kernel(cfg), data)?),
            (SurrogateKind::Rbf, Mode::Preference) => Fitted::Rbf(fit_preference_rbf(
                &self.hyper.rbf_kernel(cfg),
                data,
                &cfg.rbf.preference,
            )?),
            (SurrogateKind::Gp, Mode::Blackbox) => {
                Fitted::GpBlackbox(gp_fit_blackbox(&self.hyper.gp_kernel(cfg), data, cfg.gp.noise_var)?)
            }
            (SurrogateKind::Gp, Mode::Preference) => Fitted::GpPreference(gp_fit_preference(
                &self.hyper.gp_kernel(cfg),
                data,
                cfg.gp.preference_noise_std,
            )?),
        })
    }

    /// One acquisition-driven proposal, in original coordinates, together
    /// with the trade-off weight used.
    fn propose(&mut self) -> Result<(Vec<f64>, f64)> {
        let cfg = self.config.clone();
        if let Some(every) = cfg.recalibrate_every {
            if every > 0 && self.iteration % every == 0 {
                let unit = self.dataset.map_samples(|x| self.bounds.to_unit(x));
                self.hyper = recalibrate(&cfg, &unit, &self.hyper);
            }
        }
        let unit = self.dataset.map_samples(|x| self.bounds.to_unit(x));
        let model = self.fit(&unit, cfg.surrogate)?;

        let mut variant = cfg.explore.variant;
        let mut gp_owned = None;
        if variant == ExploreVariant::NegGpStd && model.predictive().is_none() {
            match self.fit(&unit, SurrogateKind::Gp) {
                Ok(m) => gp_owned = Some(m),
                Err(e) => {
                    log::debug!("no GP for the exploration term ({e}); using idw");
                    variant = ExploreVariant::Idw;
                }
            }
        }
        let gp: Option<&dyn Predictive> = gp_owned.as_ref().and_then(Fitted::predictive).or(model.predictive());

        let n = self.bounds.dim();
        let n_aug = cfg.acq.naug.unwrap_or(100 * n);
        let x_aug = build_augmented_set(
            &self.bounds,
            unit.samples(),
            n_aug,
            cfg.acq.xaug_strategy,
            &mut self.rng,
        )?;
        let delta = self.cycle.delta();
        let samples = unit.samples();
        let is_duplicate = |u: &[f64]| {
            samples
                .iter()
                .any(|x| x.iter().zip(u).all(|(a, b)| (a - b).abs() <= DUPLICATE_TOL))
        };

        let mut u = loop {
            let explore = match variant {
                ExploreVariant::Idw => ExplorationFunction::Idw {
                    samples,
                    tol: DUPLICATE_TOL,
                },
                ExploreVariant::MsrsMindist => ExplorationFunction::MsrsMindist { samples },
                ExploreVariant::NegGpStd => ExplorationFunction::NegGpStd {
                    model: gp.expect("GP available for this variant"),
                },
            };
            let acq = Acquisition::new(
                model.surrogate(),
                &explore,
                cfg.acq.shape,
                &x_aug.points,
                samples,
                delta,
            )?;
            let u = inner_minimize(
                &|x| acq.evaluate(x),
                &self.bounds,
                &x_aug.points,
                &cfg.inner,
                &mut self.rng,
            );
            if is_duplicate(&u) && variant == ExploreVariant::NegGpStd && delta == 0.0 {
                log::debug!("GP exploration proposed a sample again; retrying with idw");
                variant = ExploreVariant::Idw;
                continue;
            }
            break u;
        };
        if is_duplicate(&u) {
            log::debug!("proposal duplicates a sample (delta {delta}); replacing it");
            u = spread_point(&self.bounds, samples, cfg.inner.duplicate_draws, &mut self.rng)?;
        }
        let mut x = self.bounds.from_unit(&u);
        self.bounds.project(&mut x);
        Ok((x, delta))
    }
}
