use std::io::Write;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{GmrsConfig, Mode};
use super::session::{Observation, Phase, Query, SessionState, StepRecord};
use crate::domain::{ConstraintSet, PreferenceOracle, TestFunction};
use crate::error::Result;

/// Offset separating the oracle's noise stream from the optimizer's.
const ORACLE_STREAM: u64 = 0x6f72_6163_6c65;

/// Answers queries automatically.
pub enum Evaluator {
    /// Measures an objective.
    Measure(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
    /// Compares candidates through a synthetic preference oracle.
    Compare { oracle: PreferenceOracle, rng: ChaCha8Rng },
}

impl Evaluator {
    pub fn measure(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self::Measure(Arc::new(f))
    }

    pub fn compare(oracle: PreferenceOracle, seed: u64) -> Self {
        Self::Compare {
            oracle,
            rng: ChaCha8Rng::seed_from_u64(seed.wrapping_add(ORACLE_STREAM)),
        }
    }

    /// The evaluator matching `mode` for a test function, with a noiseless
    /// oracle in preference mode.
    pub fn for_function(mode: Mode, func: &TestFunction, seed: u64) -> Self {
        let f = func.func();
        match mode {
            Mode::Blackbox => Self::measure(f),
            Mode::Preference => Self::compare(PreferenceOracle::new(f), seed),
        }
    }

    /// The underlying objective or latent score.
    pub fn truth(&self, x: &[f64]) -> f64 {
        match self {
            Self::Measure(f) => f(x),
            Self::Compare { oracle, .. } => oracle.latent(x),
        }
    }

    pub fn answer(&mut self, query: &Query) -> Observation {
        match self {
            Self::Measure(f) => Observation::Measure(f(&query.candidate)),
            Self::Compare { oracle, rng } => {
                let incumbent = query.incumbent.as_ref().expect("comparison queries carry an incumbent");
                Observation::Preference(oracle.compare(&query.candidate, incumbent, rng))
            }
        }
    }
}

/// Answers the next query with `evaluator`. Returns `None` once the budget
/// is exhausted.
pub fn gmrs_step(state: &mut SessionState, evaluator: &mut Evaluator) -> Result<Option<StepRecord>> {
    let Some(query) = state.next_query()? else {
        return Ok(None);
    };
    let obs = evaluator.answer(&query);
    state.submit(Some(&query.token), obs).map(Some)
}

/// One loop iteration as reported in history files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub iter: usize,
    pub x: Vec<f64>,
    pub f_true: f64,
    pub best_f_true: f64,
    pub delta: f64,
    pub improved: bool,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub best_x: Vec<f64>,
    /// True objective at `best_x`.
    pub best_f_true: f64,
    /// Loop iterations only.
    pub history: Vec<HistoryRow>,
    /// Best-so-far true objective after each sample, `n_max` entries.
    pub trajectory: Vec<f64>,
    pub state: SessionState,
}

/// Runs the initial design and then the acquisition loop until the budget
/// `n_max` is spent.
pub fn gmrs_run(config: GmrsConfig, bounds: ConstraintSet, mut evaluator: Evaluator) -> Result<RunResult> {
    let mut state = SessionState::new(config, bounds)?;
    let mut trajectory = Vec::with_capacity(state.config().n_max);
    if let Some(x) = state.best_sample() {
        trajectory.push(evaluator.truth(x));
    }
    let mut history = Vec::new();
    while let Some(rec) = gmrs_step(&mut state, &mut evaluator)? {
        let f_true = evaluator.truth(&rec.candidate);
        let best_f_true = evaluator.truth(state.dataset().sample(rec.best));
        trajectory.push(best_f_true);
        if rec.phase == Phase::Loop {
            history.push(HistoryRow {
                iter: rec.iteration,
                x: rec.candidate,
                f_true,
                best_f_true,
                delta: rec.delta.expect("loop queries carry a delta"),
                improved: rec.improved,
            });
        }
    }
    let best_x = state.best_sample().expect("at least one sample").to_vec();
    Ok(RunResult {
        best_f_true: evaluator.truth(&best_x),
        best_x,
        history,
        trajectory,
        state,
    })
}

/// Convenience wrapper running on a named test function's box.
pub fn run_test_function(config: GmrsConfig, func: &TestFunction) -> Result<RunResult> {
    let evaluator = Evaluator::for_function(config.mode, func, config.seed);
    gmrs_run(config, func.bounds(), evaluator)
}

/// Writes history rows as CSV with columns
/// `iter, x1..xn, f_true, best_f_true, delta, improved`.
pub fn write_history_csv<W: Write>(rows: &[HistoryRow], dim: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["iter".to_owned()];
    header.extend((1..=dim).map(|d| format!("x{d}")));
    header.extend(["f_true", "best_f_true", "delta", "improved"].map(String::from));
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.iter.to_string()];
        rec.extend(r.x.iter().map(f64::to_string));
        rec.push(r.f_true.to_string());
        rec.push(r.best_f_true.to_string());
        rec.push(r.delta.to_string());
        rec.push(r.improved.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
