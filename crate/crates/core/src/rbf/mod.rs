//! Radial basis function surrogates.
//!
//! Two fits share the same expansion `f̂(x) = Σᵢ βᵢ φ(ε‖x − xᵢ‖)`:
//! interpolation of measured values, and a slack-penalized QP that makes the
//! surrogate reproduce a set of pairwise preferences up to a tolerance `σ`.

pub mod qp;

use nalgebra::{DMatrix, DVector, LU};
use serde::{Deserialize, Serialize};

use crate::domain::{Dataset, Preference};
use crate::error::{invalid, GmrsError, Result};
use crate::linalg::{condition_estimate, dist};
use crate::Surrogate;

pub use qp::{solve_qp, KktResiduals, QpMethod, QpProblem, QpSettings, QpSolution, KKT_TOL};

/// Relative margin applied to `σ` inside the preference QP: strict
/// preferences are fitted against `σ(1 + m)` and indifferences against
/// `σ(1 − m)`, so that a zero-slack preference is still classified correctly
/// by [`surrogate_preference`] after floating-point re-evaluation.
pub const PREFERENCE_MARGIN: f64 = 1e-6;

/// Above this condition estimate the interpolation system is ridge-stabilized.
pub const CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadialFamily {
    Gaussian,
    InverseQuadratic,
    Multiquadric,
    Linear,
    ThinPlate,
}

impl RadialFamily {
    pub fn phi(self, r: f64) -> f64 {
        match self {
            RadialFamily::Gaussian => (-r * r).exp(),
            RadialFamily::InverseQuadratic => 1.0 / (1.0 + r * r),
            RadialFamily::Multiquadric => (1.0 + r * r).sqrt(),
            RadialFamily::Linear => r,
            RadialFamily::ThinPlate => {
                if r == 0.0 {
                    0.0
                } else {
                    r * r * r.ln()
                }
            }
        }
    }
}

impl std::str::FromStr for RadialFamily {
    type Err = GmrsError;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_owned()))
            .map_err(|_| invalid(format!("unknown radial family `{s}`")))
    }
}

/// A radial function together with its shape parameter `ε > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialKernel {
    pub family: RadialFamily,
    pub shape: f64,
}

impl Default for RadialKernel {
    fn default() -> Self {
        Self {
            family: RadialFamily::InverseQuadratic,
            shape: 1.0,
        }
    }
}

impl RadialKernel {
    pub fn new(family: RadialFamily, shape: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite()) {
            return Err(invalid(format!("shape parameter must be positive, got {shape}")));
        }
        Ok(Self { family, shape })
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        self.family.phi(self.shape * dist(a, b))
    }
}

/// `Φᵢⱼ = φ(ε‖xᵢ − xⱼ‖)`.
pub fn build_phi_matrix(kernel: &RadialKernel, centers: &[Vec<f64>]) -> DMatrix<f64> {
    let n = centers.len();
    let mut phi = DMatrix::zeros(n, n);
    let diag = kernel.family.phi(0.0);
    for i in 0..n {
        phi[(i, i)] = diag;
        for j in 0..i {
            let v = kernel.eval(&centers[i], &centers[j]);
            phi[(i, j)] = v;
            phi[(j, i)] = v;
        }
    }
    phi
}

/// Diagnostics attached to a fitted surrogate.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub condition_estimate: f64,
    /// Diagonal ridge added to `Φ`, if any.
    pub ridge: Option<f64>,
    /// Largest interpolation error at the centers (interpolants only).
    pub max_residual: Option<f64>,
    /// Slack values, one per preference (preference fits only).
    pub slacks: Option<Vec<f64>>,
    /// KKT residuals of the preference QP.
    pub kkt: Option<KktResiduals>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbfSurrogate {
    pub kernel: RadialKernel,
    pub centers: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub report: FitReport,
}

impl RbfSurrogate {
    /// Radial basis vector `φ(x)`.
    pub fn basis(&self, x: &[f64]) -> Vec<f64> {
        self.centers.iter().map(|c| self.kernel.eval(x, c)).collect()
    }
}

impl Surrogate for RbfSurrogate {
    fn evaluate(&self, x: &[f64]) -> f64 {
        self.centers
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| w * self.kernel.eval(x, c))
            .sum()
    }
}

/// Fits the interpolating expansion `Φβ = y` to a black-box dataset.
///
/// When `cond(Φ) >= 1e12` a ridge of `1e-8·trace(Φ)/N` is added to the
/// diagonal, and the report then carries the residual instead of the fit
/// being exact.
pub fn fit_interpolant(kernel: &RadialKernel, dataset: &Dataset) -> Result<RbfSurrogate> {
    let y = dataset
        .measures()
        .ok_or_else(|| invalid("interpolation needs a dataset with measures"))?;
    if dataset.is_empty() {
        return Err(invalid("interpolation needs at least one sample"));
    }
    let centers = dataset.samples().to_vec();
    let n = centers.len();
    let phi = build_phi_matrix(kernel, &centers);
    let condition = condition_estimate(&phi);
    let yv = DVector::from_column_slice(y);

    let mut system = phi.clone();
    let mut ridge = None;
    if condition >= CONDITION_LIMIT {
        let mut r = 1e-8 * phi.trace().abs() / n as f64;
        if r == 0.0 {
            r = 1e-8 * phi.amax();
        }
        if r > 0.0 {
            for i in 0..n {
                system[(i, i)] += r;
            }
            ridge = Some(r);
        }
    }
    let beta = LU::new(system)
        .solve(&yv)
        .filter(|b| b.iter().all(|v| v.is_finite()))
        .ok_or(GmrsError::SingularSystem { condition })?;
    let residual = (&phi * &beta - &yv).amax();
    if ridge.is_some() {
        log::debug!("interpolant ridge-stabilized (cond {condition:.2e}, residual {residual:.2e})");
    }
    Ok(RbfSurrogate {
        kernel: *kernel,
        centers,
        weights: beta.iter().copied().collect(),
        report: FitReport {
            condition_estimate: condition,
            ridge,
            max_residual: Some(residual),
            slacks: None,
            kkt: None,
        },
    })
}

/// Surrogate preference with tolerance `σ`. The cases are tested in the order
/// `Δ <= −σ → -1`, `|Δ| <= σ → 0`, `Δ >= σ → 1` with `Δ = f̂(xi) − f̂(xj)`.
pub fn surrogate_preference<S: Surrogate + ?Sized>(fhat: &S, xi: &[f64], xj: &[f64], sigma: f64) -> Preference {
    let delta = fhat.evaluate(xi) - fhat.evaluate(xj);
    if delta <= -sigma {
        -1
    } else if delta.abs() <= sigma {
        0
    } else {
        1
    }
}

/// Settings of the preference-fitting QP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceFitConfig {
    /// Comparison tolerance `σ > 0`.
    pub sigma: f64,
    /// Regularization `λ > 0`.
    pub lambda: f64,
    /// Slack weights; all ones when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_weights: Option<Vec<f64>>,
    #[serde(default)]
    pub qp: QpSettings,
}

impl Default for PreferenceFitConfig {
    fn default() -> Self {
        Self {
            sigma: 1e-2,
            lambda: 1e-6,
            g_weights: None,
            qp: QpSettings::default(),
        }
    }
}

/// Fits `β` so that the surrogate preference reproduces the recorded
/// preferences, trading violations (slacks `ε`) against `‖β‖²`:
///
/// ```text
/// min  λ/2 βᵀβ + gᵀε
/// s.t. f̂(x_ℓ) − f̂(x_κ) <= −σ + ε_h          (b_h = −1)
///      |f̂(x_ℓ) − f̂(x_κ)| <= σ + ε_h          (b_h =  0)
///      f̂(x_ℓ) − f̂(x_κ) >= σ − ε_h            (b_h =  1)
///      ε >= 0
/// ```
pub fn fit_preference_rbf(kernel: &RadialKernel, dataset: &Dataset, cfg: &PreferenceFitConfig) -> Result<RbfSurrogate> {
    let (Some(prefs), Some(mapping)) = (dataset.preferences(), dataset.mapping()) else {
        return Err(invalid("preference fitting needs a dataset with preferences"));
    };
    let m = prefs.len();
    if m == 0 {
        return Err(invalid("preference fitting needs at least one preference"));
    }
    if !(cfg.sigma > 0.0) {
        return Err(invalid("preference tolerance sigma must be positive"));
    }
    if !(cfg.lambda > 0.0) {
        return Err(invalid("regularization lambda must be positive"));
    }
    let g = match &cfg.g_weights {
        Some(g) if g.len() != m => {
            return Err(GmrsError::DimensionMismatch {
                expected: m,
                got: g.len(),
            })
        }
        Some(g) if g.iter().any(|v| !(*v > 0.0)) => return Err(invalid("slack weights must be strictly positive")),
        Some(g) => g.clone(),
        None => vec![1.0; m],
    };

    let centers = dataset.samples().to_vec();
    let n = centers.len();
    let phi = build_phi_matrix(kernel, &centers);
    let rows = m + prefs.iter().filter(|b| **b == 0).count() + m;
    let vars = n + m;

    let mut gm = DMatrix::zeros(rows, vars);
    let mut h = DVector::zeros(rows);
    let mut r = 0;
    for (k, (&b, &(l, c))) in prefs.iter().zip(mapping).enumerate() {
        let diff = phi.row(l) - phi.row(c);
        // Each preference contributes rows of the form s·dᵀβ − ε_h <= σ_term.
        let strict = cfg.sigma * (1.0 + PREFERENCE_MARGIN);
        let loose = cfg.sigma * (1.0 - PREFERENCE_MARGIN);
        let signs: &[(f64, f64)] = match b {
            -1 => &[(1.0, -strict)],
            1 => &[(-1.0, -strict)],
            _ => &[(1.0, loose), (-1.0, loose)],
        };
        for &(s, rhs) in signs {
            for j in 0..n {
                gm[(r, j)] = s * diff[j];
            }
            gm[(r, n + k)] = -1.0;
            h[r] = rhs;
            r += 1;
        }
    }
    for k in 0..m {
        gm[(r, n + k)] = -1.0;
        r += 1;
    }
    debug_assert_eq!(r, rows);

    let mut p = DMatrix::zeros(vars, vars);
    for i in 0..n {
        p[(i, i)] = cfg.lambda;
    }
    let mut q = DVector::zeros(vars);
    for k in 0..m {
        q[n + k] = g[k];
    }

    let problem = QpProblem::new(p, q, gm, h)?;
    let sol = solve_qp(&problem, &cfg.qp)?;
    let weights: Vec<f64> = sol.x.rows(0, n).iter().copied().collect();
    let slacks: Vec<f64> = sol.x.rows(n, m).iter().map(|v| v.max(0.0)).collect();
    Ok(RbfSurrogate {
        kernel: *kernel,
        centers,
        weights,
        report: FitReport {
            condition_estimate: condition_estimate(&phi),
            ridge: None,
            max_residual: None,
            slacks: Some(slacks),
            kkt: Some(sol.kkt),
        },
    })
}
