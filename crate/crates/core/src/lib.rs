//! Surrogate-based global optimization for black-box measurements and
//! pairwise preferences.
//!
//! A run alternates between fitting a surrogate (RBF or Gaussian process) to
//! the data gathered so far and minimizing an acquisition that trades the
//! surrogate off against an exploration function. The trade-off weight is
//! cycled greedily: it is kept while the incumbent improves and advanced
//! otherwise.

pub mod acquisition;
pub mod bench;
pub mod domain;
pub mod error;
pub mod explore;
pub mod gmrs;
pub mod gp;
pub mod linalg;
pub mod rbf;

pub use error::{GmrsError, Result};
pub use gmrs::{gmrs_run, GmrsConfig, Mode, SessionState, SurrogateKind};

/// A fitted model that can be queried pointwise.
pub trait Surrogate: Send + Sync {
    fn evaluate(&self, x: &[f64]) -> f64;
}
