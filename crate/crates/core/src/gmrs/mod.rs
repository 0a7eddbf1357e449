//! The optimization driver: initial design, acquisition loop, incumbent
//! bookkeeping and hyperparameter recalibration.
//!
//! Internally every computation runs on unit-box coordinates; samples,
//! queries and histories are reported in the problem's own coordinates.

mod config;
mod design;
mod inner;
mod recalibrate;
mod run;
mod session;

pub use config::{
    AcqSettings, ExploreSettings, GmrsConfig, GpSettings, InnerSettings, Mode, RbfSettings, SurrogateKind,
};
pub use design::lhd_design;
pub use inner::{inner_minimize, spread_point};
pub use recalibrate::{rbf_loo_score, recalibrate, Hyperparameters};
pub use run::{gmrs_run, gmrs_step, run_test_function, write_history_csv, Evaluator, HistoryRow, RunResult};
pub use session::{Observation, Phase, Query, SessionState, StepRecord};
