use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::acquisition::{AcquisitionKind, AugmentStrategy, DeltaCycle};
use crate::error::{invalid, GmrsError, Result};
use crate::explore::ExploreVariant;
use crate::gp::SeKernel;
use crate::rbf::{PreferenceFitConfig, RadialKernel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Blackbox,
    Preference,
}

impl FromStr for Mode {
    type Err = GmrsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "blackbox" | "black-box" => Ok(Self::Blackbox),
            "preference" => Ok(Self::Preference),
            other => Err(invalid(format!("unknown mode `{other}`"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Blackbox => "blackbox",
            Self::Preference => "preference",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurrogateKind {
    #[default]
    Rbf,
    Gp,
}

impl FromStr for SurrogateKind {
    type Err = GmrsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rbf" => Ok(Self::Rbf),
            "gp" => Ok(Self::Gp),
            other => Err(invalid(format!("unknown surrogate `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExploreSettings {
    pub variant: ExploreVariant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcqSettings {
    pub delta_cycle: Vec<f64>,
    /// Random points in `X_aug`; `100·n` when absent.
    pub naug: Option<usize>,
    pub xaug_strategy: AugmentStrategy,
    pub shape: AcquisitionKind,
}

impl Default for AcqSettings {
    fn default() -> Self {
        Self {
            delta_cycle: vec![0.95, 0.7, 0.35, 0.0],
            naug: None,
            xaug_strategy: AugmentStrategy::default(),
            shape: AcquisitionKind::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RbfSettings {
    pub kernel: RadialKernel,
    pub preference: PreferenceFitConfig,
    /// Shape parameters tried by recalibration.
    pub shape_grid: Vec<f64>,
}

impl Default for RbfSettings {
    fn default() -> Self {
        Self {
            kernel: RadialKernel::default(),
            preference: PreferenceFitConfig::default(),
            shape_grid: vec![0.1, 0.3, 1.0, 3.0, 10.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GpSettings {
    pub kernel: SeKernel,
    /// Measurement noise variance `σ_η²` in black-box mode.
    pub noise_var: f64,
    /// Comparison noise standard deviation `σ_η` in preference mode.
    pub preference_noise_std: f64,
    /// Lengthscales tried by recalibration.
    pub lengthscale_grid: Vec<f64>,
}

impl Default for GpSettings {
    fn default() -> Self {
        Self {
            kernel: SeKernel::default(),
            noise_var: 0.0,
            preference_noise_std: 0.1,
            lengthscale_grid: vec![0.1, 0.2, 0.5, 1.0],
        }
    }
}

/// Settings of the multi-start compass search that minimizes the acquisition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InnerSettings {
    /// Uniform candidates per dimension, on top of `X_aug`.
    pub random_per_dim: usize,
    pub starts: usize,
    /// Initial step, as a fraction of the box width.
    pub initial_step: f64,
    pub contraction: f64,
    pub min_step: f64,
    /// Random draws scanned when a proposal duplicates a sample.
    pub duplicate_draws: usize,
}

impl Default for InnerSettings {
    fn default() -> Self {
        Self {
            random_per_dim: 512,
            starts: 5,
            initial_step: 0.1,
            contraction: 0.5,
            min_step: 1e-6,
            duplicate_draws: 100,
        }
    }
}

/// Full configuration of an optimization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GmrsConfig {
    pub mode: Mode,
    pub surrogate: SurrogateKind,
    pub explore: ExploreSettings,
    pub acq: AcqSettings,
    pub rbf: RbfSettings,
    pub gp: GpSettings,
    pub inner: InnerSettings,
    pub n_init: usize,
    pub n_max: usize,
    pub seed: u64,
    /// Recalibrate hyperparameters every this many iterations; never when absent.
    pub recalibrate_every: Option<usize>,
}

impl Default for GmrsConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Blackbox,
            surrogate: SurrogateKind::Rbf,
            explore: ExploreSettings::default(),
            acq: AcqSettings::default(),
            rbf: RbfSettings::default(),
            gp: GpSettings::default(),
            inner: InnerSettings::default(),
            n_init: 4,
            n_max: 70,
            seed: 0,
            recalibrate_every: None,
        }
    }
}

impl GmrsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_init == 0 {
            return Err(invalid("n_init must be at least 1"));
        }
        if self.mode == Mode::Preference && self.n_init < 2 {
            return Err(invalid("preference mode needs n_init >= 2"));
        }
        if self.n_max < self.n_init {
            return Err(invalid("n_max must not be smaller than n_init"));
        }
        DeltaCycle::new(self.acq.delta_cycle.clone())?;
        if self.acq.naug.is_some_and(|n| n < 2) {
            return Err(invalid("acq.naug must be at least 2"));
        }
        RadialKernel::new(self.rbf.kernel.family, self.rbf.kernel.shape)?;
        SeKernel::new(self.gp.kernel.signal_var, self.gp.kernel.lengthscale)?;
        if !(self.gp.noise_var >= 0.0) {
            return Err(invalid("gp.noise_var must be non-negative"));
        }
        if self.mode == Mode::Preference && self.surrogate == SurrogateKind::Gp && !(self.gp.preference_noise_std > 0.0)
        {
            return Err(invalid("gp.preference_noise_std must be positive"));
        }
        if self.rbf.shape_grid.iter().any(|e| !(*e > 0.0)) || self.gp.lengthscale_grid.iter().any(|l| !(*l > 0.0)) {
            return Err(invalid("hyperparameter grids must hold positive values"));
        }
        let inner = &self.inner;
        if inner.starts == 0
            || !(inner.initial_step > 0.0)
            || !(inner.contraction > 0.0 && inner.contraction < 1.0)
            || !(inner.min_step > 0.0)
            || inner.duplicate_draws == 0
        {
            return Err(invalid("inner solver settings are out of range"));
        }
        if let AcquisitionKind::FixedAlpha { alpha } | AcquisitionKind::GlispLike { alpha } = self.acq.shape {
            if !alpha.is_finite() {
                return Err(invalid("baseline alpha must be finite"));
            }
        }
        Ok(())
    }
}
