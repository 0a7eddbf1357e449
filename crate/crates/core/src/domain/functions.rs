//! Benchmark cost functions, addressable by name.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::domain::ConstraintSet;
use crate::error::{GmrsError, Result};

/// Where a recorded optimum comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Computed by exhaustive grid search plus local refinement.
    BruteForce,
    /// Standard value from the benchmark literature.
    Literature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnownMin {
    pub x: Vec<f64>,
    pub f: f64,
    pub provenance: Provenance,
}

/// A named cost function on a box.
#[derive(Debug, Clone)]
pub struct TestFunction {
    pub name: &'static str,
    pub dim: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub known_min: Option<KnownMin>,
    eval: fn(&[f64]) -> f64,
}

impl TestFunction {
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    pub fn func(&self) -> fn(&[f64]) -> f64 {
        self.eval
    }

    pub fn bounds(&self) -> ConstraintSet {
        ConstraintSet::new(self.lower.clone(), self.upper.clone()).expect("test function boxes are well formed")
    }

    /// Looks a function up by its identifier.
    pub fn by_name(name: &str) -> Result<Self> {
        Self::all()
            .into_iter()
            .find(|f| f.name == name)
            .ok_or_else(|| GmrsError::UnknownFunction(name.to_owned()))
    }

    pub fn all() -> Vec<Self> {
        vec![
            TestFunction {
                name: "adjiman",
                dim: 2,
                lower: vec![-1.0, -1.0],
                upper: vec![2.0, 1.0],
                // computed by bench::brute_force_min when needed
                known_min: None,
                eval: adjiman,
            },
            TestFunction {
                name: "branin",
                dim: 2,
                lower: vec![-5.0, 0.0],
                upper: vec![10.0, 15.0],
                known_min: Some(KnownMin {
                    x: vec![PI, 2.275],
                    f: 5.0 / (4.0 * PI),
                    provenance: Provenance::Literature,
                }),
                eval: branin,
            },
            TestFunction {
                name: "camel-six-hump",
                dim: 2,
                lower: vec![-3.0, -2.0],
                upper: vec![3.0, 2.0],
                known_min: Some(KnownMin {
                    x: vec![0.0898, -0.7126],
                    f: -1.0316,
                    provenance: Provenance::Literature,
                }),
                eval: camel_six_hump,
            },
            TestFunction {
                name: "sphere",
                dim: 2,
                lower: vec![-1.0, -1.0],
                upper: vec![1.0, 1.0],
                known_min: Some(KnownMin {
                    x: vec![0.0, 0.0],
                    f: 0.0,
                    provenance: Provenance::Literature,
                }),
                eval: sphere,
            },
        ]
    }
}

/// `cos(x1)·sin(x2) − x1 / (x2² + 1)`
pub fn adjiman(x: &[f64]) -> f64 {
    x[0].cos() * x[1].sin() - x[0] / (x[1] * x[1] + 1.0)
}

pub fn branin(x: &[f64]) -> f64 {
    let (a, b, c) = (1.0, 5.1 / (4.0 * PI * PI), 5.0 / PI);
    let (r, s, t) = (6.0, 10.0, 1.0 / (8.0 * PI));
    a * (x[1] - b * x[0] * x[0] + c * x[0] - r).powi(2) + s * (1.0 - t) * x[0].cos() + s
}

pub fn camel_six_hump(x: &[f64]) -> f64 {
    let (a, b) = (x[0], x[1]);
    (4.0 - 2.1 * a * a + a.powi(4) / 3.0) * a * a + a * b + (-4.0 + 4.0 * b * b) * b * b
}

pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}
