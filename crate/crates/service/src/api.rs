//! Request and response payloads.

use gmrs::domain::ConstraintSet;
use gmrs::gmrs::{Observation, Phase, Query, StepRecord};
use gmrs::SessionState;
use serde::{Deserialize, Serialize};

use crate::error::ApiError;

/// One decision variable as shown to the decision maker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coordinate {
    pub label: String,
    pub lower: f64,
    pub upper: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    /// Digits to show after the decimal point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decimals: Option<u32>,
}

/// What is being tuned: the box and how to present candidates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDescriptor {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub coordinates: Vec<Coordinate>,
    /// Free-form rendering hint for clients, e.g. `"Kp={Kp}, Ki={Ki}"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<String>,
}

impl ProblemDescriptor {
    pub fn bounds(&self) -> Result<ConstraintSet, ApiError> {
        if self.coordinates.is_empty() {
            return Err(ApiError::validation("the problem needs at least one coordinate"));
        }
        let lower = self.coordinates.iter().map(|c| c.lower).collect();
        let upper = self.coordinates.iter().map(|c| c.upper).collect();
        Ok(ConstraintSet::new(lower, upper)?)
    }

    pub fn point(&self, values: &[f64]) -> LabeledPoint {
        LabeledPoint {
            values: values.to_vec(),
            labeled: self
                .coordinates
                .iter()
                .zip(values)
                .map(|(c, v)| LabeledValue {
                    label: c.label.clone(),
                    value: *v,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledValue {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub values: Vec<f64>,
    pub labeled: Vec<LabeledValue>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub problem: ProblemDescriptor,
    /// Optimizer configuration; the mode is always preference.
    #[serde(default)]
    pub config: Option<serde_json::Value>,
}

/// The decision maker's answer to "left or right?".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    /// The left candidate (the new proposal) is preferred.
    Left,
    /// The right candidate (the current best) is preferred.
    Right,
    Tie,
}

impl Answer {
    /// Preference of left over right: `-1`, `1` or `0`.
    pub fn preference(self) -> i8 {
        match self {
            Answer::Left => -1,
            Answer::Right => 1,
            Answer::Tie => 0,
        }
    }

    pub fn from_preference(b: i8) -> Option<Self> {
        match b {
            -1 => Some(Answer::Left),
            1 => Some(Answer::Right),
            0 => Some(Answer::Tie),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmitPreference {
    pub answer: Answer,
    /// Token of the query being answered; recommended, so that answers to
    /// stale views are refused.
    #[serde(default)]
    pub token: Option<String>,
}

/// A pending pairwise query: left is the new candidate, right the current best.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryView {
    pub token: String,
    pub phase: Phase,
    /// 0 while the initial design is compared, then 1, 2, ...
    pub iteration: usize,
    /// Comparisons left, this one included.
    pub remaining: usize,
    pub answered: usize,
    pub left: LabeledPoint,
    pub right: LabeledPoint,
}

impl QueryView {
    pub fn new(problem: &ProblemDescriptor, query: &Query, answered: usize) -> Self {
        Self {
            token: query.token.clone(),
            phase: query.phase,
            iteration: query.iteration,
            remaining: query.remaining,
            answered,
            left: problem.point(&query.candidate),
            right: problem.point(query.incumbent.as_deref().unwrap_or_default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub token: String,
    pub phase: Phase,
    pub iteration: usize,
    pub left: LabeledPoint,
    pub right: LabeledPoint,
    pub answer: Answer,
    /// Trade-off weight used for the proposal; absent for design points.
    pub delta: Option<f64>,
    pub improved: bool,
}

impl HistoryEntry {
    /// Queries are answered in the order they were issued, so entry `i`
    /// answered token `q{i}`.
    pub fn new(problem: &ProblemDescriptor, i: usize, rec: &StepRecord) -> Self {
        let b = match rec.observation {
            Observation::Preference(b) => b,
            Observation::Measure(_) => unreachable!("service sessions are preference sessions"),
        };
        Self {
            token: format!("q{i}"),
            phase: rec.phase,
            iteration: rec.iteration,
            left: problem.point(&rec.candidate),
            right: problem.point(rec.incumbent.as_deref().unwrap_or_default()),
            answer: Answer::from_preference(b).expect("stored preferences are valid"),
            delta: rec.delta,
            improved: rec.improved,
        }
    }
}

pub fn history(problem: &ProblemDescriptor, state: &SessionState) -> Vec<HistoryEntry> {
    state
        .history()
        .iter()
        .enumerate()
        .map(|(i, r)| HistoryEntry::new(problem, i, r))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestView {
    pub x: LabeledPoint,
    pub answered: usize,
    pub finished: bool,
}

impl BestView {
    pub fn new(problem: &ProblemDescriptor, state: &SessionState) -> Self {
        Self {
            x: problem.point(state.best_sample().expect("sessions start with an incumbent")),
            answered: state.history().len(),
            finished: state.is_finished(),
        }
    }
}

/// Where a session stands after a request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Progress {
    Pending { query: QueryView },
    Finished { best: BestView, history: Vec<HistoryEntry> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionCreated {
    pub id: String,
    pub problem: ProblemDescriptor,
    #[serde(flatten)]
    pub progress: Progress,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryView {
    pub entries: Vec<HistoryEntry>,
}
