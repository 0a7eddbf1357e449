//! Problem definitions: the feasible region, datasets, the synthetic
//! preference oracle and benchmark functions.

mod constraints;
mod dataset;
pub mod functions;
mod oracle;

pub use constraints::{
    ConstraintSet, DupTolerance, LinearConstraints, NonlinearConstraint, DUPLICATE_TOL, FEASIBILITY_TOL,
};
pub use dataset::{Dataset, Preference};
pub use functions::{KnownMin, Provenance, TestFunction};
pub use oracle::{chain_initial_preferences, PreferenceOracle};
