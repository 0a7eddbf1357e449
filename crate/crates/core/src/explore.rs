//! Exploration functions. Each one is continuous and attains its largest
//! value (zero, for the distance-based ones) exactly at the samples, so its
//! minimizer over the domain is always an unsampled point.

use std::f64::consts::FRAC_2_PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, GmrsError};
use crate::gp::{GpBlackboxModel, GpPreferenceModel, PredictiveDistribution};
use crate::linalg::{dist, sq_dist};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExploreVariant {
    #[default]
    Idw,
    #[serde(alias = "msrs")]
    MsrsMindist,
    #[serde(alias = "gpstd")]
    NegGpStd,
}

impl FromStr for ExploreVariant {
    type Err = GmrsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "idw" => Ok(Self::Idw),
            "msrs" | "msrs-mindist" => Ok(Self::MsrsMindist),
            "gpstd" | "neg-gp-std" => Ok(Self::NegGpStd),
            other => Err(invalid(format!("unknown exploration variant `{other}`"))),
        }
    }
}

impl fmt::Display for ExploreVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Idw => "idw",
            Self::MsrsMindist => "msrs-mindist",
            Self::NegGpStd => "neg-gp-std",
        })
    }
}

/// `−(2/π)·atan(1 / Σ 1/‖x − xᵢ‖²)`, and `0` within `tol` (∞-norm) of a sample.
pub fn idw_distance(samples: &[Vec<f64>], x: &[f64], tol: f64) -> f64 {
    let mut w = 0.0;
    for xi in samples {
        let near = xi.iter().zip(x).all(|(a, b)| (a - b).abs() <= tol);
        if near {
            return 0.0;
        }
        w += 1.0 / sq_dist(xi, x);
    }
    -FRAC_2_PI * (1.0 / w).atan()
}

/// `−minᵢ ‖x − xᵢ‖`
pub fn msrs_mindist(samples: &[Vec<f64>], x: &[f64]) -> f64 {
    -samples.iter().map(|xi| dist(xi, x)).fold(f64::INFINITY, f64::min)
}

/// Anything with a Gaussian predictive distribution.
pub trait Predictive: Send + Sync {
    fn predict(&self, x: &[f64]) -> PredictiveDistribution;
}

impl Predictive for GpBlackboxModel {
    fn predict(&self, x: &[f64]) -> PredictiveDistribution {
        GpBlackboxModel::predict(self, x)
    }
}

impl Predictive for GpPreferenceModel {
    fn predict(&self, x: &[f64]) -> PredictiveDistribution {
        GpPreferenceModel::predict(self, x)
    }
}

/// `−sqrt(var(x))` from a fitted GP.
pub fn neg_gp_std(model: &dyn Predictive, x: &[f64]) -> f64 {
    -model.predict(x).std_dev()
}

/// An exploration function bound to its data.
pub enum ExplorationFunction<'a> {
    Idw { samples: &'a [Vec<f64>], tol: f64 },
    MsrsMindist { samples: &'a [Vec<f64>] },
    NegGpStd { model: &'a dyn Predictive },
}

impl ExplorationFunction<'_> {
    pub fn variant(&self) -> ExploreVariant {
        match self {
            Self::Idw { .. } => ExploreVariant::Idw,
            Self::MsrsMindist { .. } => ExploreVariant::MsrsMindist,
            Self::NegGpStd { .. } => ExploreVariant::NegGpStd,
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        match self {
            Self::Idw { samples, tol } => idw_distance(samples, x, *tol),
            Self::MsrsMindist { samples } => msrs_mindist(samples, x),
            Self::NegGpStd { model } => neg_gp_std(*model, x),
        }
    }
}

impl fmt::Debug for ExplorationFunction<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExplorationFunction({})", self.variant())
    }
}
