//! Gaussian-process surrogates.
//!
//! Black-box data uses the exact Gaussian predictive distribution. Preference
//! data uses a probit likelihood over pairwise comparisons and a Laplace
//! approximation of the posterior around the MAP latent vector.

use std::f64::consts::{PI, SQRT_2};
use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, LU};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::domain::Dataset;
use crate::error::{invalid, GmrsError, Result};
use crate::linalg::{chol_log_det, cholesky_with_jitter, inf_norm, sq_dist};
use crate::Surrogate;

/// Gradient tolerance for the MAP search.
pub const MAP_GRADIENT_TOL: f64 = 1e-6;
const MAX_NEWTON_ITERS: usize = 100;
const MAX_HALVINGS: usize = 30;

/// Squared-exponential kernel `s²·exp(−‖a − b‖² / (2ℓ²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeKernel {
    pub signal_var: f64,
    pub lengthscale: f64,
}

impl Default for SeKernel {
    fn default() -> Self {
        Self {
            signal_var: 1.0,
            lengthscale: 0.5,
        }
    }
}

impl SeKernel {
    pub fn new(signal_var: f64, lengthscale: f64) -> Result<Self> {
        if !(signal_var > 0.0 && lengthscale > 0.0) {
            return Err(invalid("kernel signal variance and lengthscale must be positive"));
        }
        Ok(Self {
            signal_var,
            lengthscale,
        })
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        self.signal_var * (-sq_dist(a, b) / (2.0 * self.lengthscale * self.lengthscale)).exp()
    }

    pub fn gram(&self, xs: &[Vec<f64>]) -> DMatrix<f64> {
        let n = xs.len();
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            k[(i, i)] = self.signal_var;
            for j in 0..i {
                let v = self.eval(&xs[i], &xs[j]);
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        k
    }

    /// Kernel vector `k(x) = [k(x₁, x), …, k(x_N, x)]`.
    pub fn vector(&self, xs: &[Vec<f64>], x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(xs.len(), xs.iter().map(|xi| self.eval(xi, x)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictiveDistribution {
    pub mean: f64,
    /// Variance after clamping at zero.
    pub variance: f64,
    /// Variance before clamping.
    pub raw_variance: f64,
}

impl PredictiveDistribution {
    fn new(mean: f64, raw_variance: f64, clamp_events: &AtomicUsize) -> Self {
        if raw_variance < 0.0 {
            clamp_events.fetch_add(1, Ordering::Relaxed);
        }
        Self {
            mean,
            variance: raw_variance.max(0.0),
            raw_variance,
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// GP conditioned on noisy measures.
#[derive(Debug)]
pub struct GpBlackboxModel {
    kernel: SeKernel,
    inputs: Vec<Vec<f64>>,
    targets: DVector<f64>,
    noise_var: f64,
    chol: Cholesky<f64, Dyn>,
    jitter: f64,
    /// `[K + σ²I]⁻¹ y`
    beta: DVector<f64>,
    clamp_events: AtomicUsize,
}

/// Conditions a zero-mean GP on the measures in `dataset`.
pub fn gp_fit_blackbox(kernel: &SeKernel, dataset: &Dataset, noise_var: f64) -> Result<GpBlackboxModel> {
    let y = dataset
        .measures()
        .ok_or_else(|| invalid("black-box GP needs a dataset with measures"))?;
    if dataset.is_empty() {
        return Err(invalid("black-box GP needs at least one sample"));
    }
    if !(noise_var >= 0.0) {
        return Err(invalid("noise variance must be non-negative"));
    }
    let inputs = dataset.samples().to_vec();
    let mut k = kernel.gram(&inputs);
    for i in 0..k.nrows() {
        k[(i, i)] += noise_var;
    }
    let (chol, jitter) = cholesky_with_jitter(&k)?;
    if jitter > 0.0 {
        log::warn!("black-box GP Gram matrix needed jitter {jitter:.0e}");
    }
    let targets = DVector::from_column_slice(y);
    let beta = chol.solve(&targets);
    Ok(GpBlackboxModel {
        kernel: *kernel,
        inputs,
        targets,
        noise_var,
        chol,
        jitter,
        beta,
        clamp_events: AtomicUsize::new(0),
    })
}

impl GpBlackboxModel {
    pub fn kernel(&self) -> &SeKernel {
        &self.kernel
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn clamp_events(&self) -> usize {
        self.clamp_events.load(Ordering::Relaxed)
    }

    /// Weights of the mean as an expansion in kernel vectors.
    pub fn weights(&self) -> &DVector<f64> {
        &self.beta
    }

    pub fn predict(&self, x: &[f64]) -> PredictiveDistribution {
        let kx = self.kernel.vector(&self.inputs, x);
        let mean = kx.dot(&self.beta);
        let v = self
            .chol
            .l_dirty()
            .solve_lower_triangular(&kx)
            .expect("cholesky factor is nonsingular");
        let var = self.kernel.signal_var - v.dot(&v);
        PredictiveDistribution::new(mean, var, &self.clamp_events)
    }

    /// Exact log evidence `log p(y | X)`.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.targets.len() as f64;
        -0.5 * self.targets.dot(&self.beta) - 0.5 * chol_log_det(&self.chol) - 0.5 * n * (2.0 * PI).ln()
    }
}

impl Surrogate for GpBlackboxModel {
    fn evaluate(&self, x: &[f64]) -> f64 {
        self.kernel.vector(&self.inputs, x).dot(&self.beta)
    }
}

/// `log Φ(z)` for the standard normal CDF, accurate in the far left tail.
pub fn log_normal_cdf(z: f64) -> f64 {
    if z > -5.0 {
        (0.5 * erfc(-z / SQRT_2)).ln()
    } else {
        -0.5 * z * z - 0.5 * (2.0 * PI).ln() + mills_ratio(-z).ln()
    }
}

/// `φ(z) / Φ(z)`.
pub fn inverse_mills(z: f64) -> f64 {
    if z > -5.0 {
        let pdf = (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
        pdf / (0.5 * erfc(-z / SQRT_2))
    } else {
        1.0 / mills_ratio(-z)
    }
}

/// `(1 − Φ(t)) / φ(t)` for `t >= 5` by its continued fraction.
fn mills_ratio(t: f64) -> f64 {
    let mut acc = t;
    for k in (1..=60).rev() {
        acc = t + k as f64 / acc;
    }
    1.0 / acc
}

/// Reorients preferences so that the first index of every pair is the
/// preferred sample. Indifferences are not representable in the probit model.
pub fn strict_pairs(dataset: &Dataset) -> Result<Vec<(usize, usize)>> {
    let (Some(prefs), Some(mapping)) = (dataset.preferences(), dataset.mapping()) else {
        return Err(invalid("preference GP needs a dataset with preferences"));
    };
    prefs
        .iter()
        .zip(mapping)
        .map(|(&b, &(l, k))| match b {
            -1 => Ok((l, k)),
            1 => Ok((k, l)),
            _ => Err(invalid("the preference GP only handles strict preferences (b = ±1)")),
        })
        .collect()
}

/// Negative log posterior of the latent values under the probit likelihood
/// and the GP prior, up to an additive constant.
#[derive(Debug, Clone)]
pub struct PreferencePosterior {
    k: DMatrix<f64>,
    /// `(preferred, other)` index pairs.
    pairs: Vec<(usize, usize)>,
    noise_std: f64,
}

impl PreferencePosterior {
    pub fn new(k: DMatrix<f64>, pairs: Vec<(usize, usize)>, noise_std: f64) -> Result<Self> {
        if !(noise_std > 0.0) {
            return Err(invalid("preference noise must be positive"));
        }
        if pairs.is_empty() {
            return Err(invalid("preference GP needs at least one preference"));
        }
        Ok(Self { k, pairs, noise_std })
    }

    fn scale(&self) -> f64 {
        SQRT_2 * self.noise_std
    }

    fn z(&self, f: &DVector<f64>, (win, lose): (usize, usize)) -> f64 {
        (f[lose] - f[win]) / self.scale()
    }

    /// `log p(D | f)`
    pub fn log_likelihood(&self, f: &DVector<f64>) -> f64 {
        self.pairs.iter().map(|&p| log_normal_cdf(self.z(f, p))).sum()
    }

    /// Gradient of `−log p(D | f)`.
    pub fn likelihood_gradient(&self, f: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(f.len());
        let s = self.scale();
        for &(win, lose) in &self.pairs {
            let r = inverse_mills(self.z(f, (win, lose)));
            g[lose] -= r / s;
            g[win] += r / s;
        }
        g
    }

    /// Hessian of `−log p(D | f)`; this is `Λ` at the MAP.
    pub fn likelihood_hessian(&self, f: &DVector<f64>) -> DMatrix<f64> {
        let n = f.len();
        let mut h = DMatrix::zeros(n, n);
        let s2 = self.scale() * self.scale();
        for &(win, lose) in &self.pairs {
            let z = self.z(f, (win, lose));
            let r = inverse_mills(z);
            let w = r * (z + r) / s2;
            h[(lose, lose)] += w;
            h[(win, win)] += w;
            h[(lose, win)] -= w;
            h[(win, lose)] -= w;
        }
        h
    }

    /// `−log p(D | f) + ½ fᵀK⁻¹f`, with `K⁻¹` applied through a Cholesky solve.
    pub fn value(&self, f: &DVector<f64>) -> Result<f64> {
        let (chol, _) = cholesky_with_jitter(&self.k)?;
        Ok(-self.log_likelihood(f) + 0.5 * f.dot(&chol.solve(f)))
    }

    /// `∇(−log p(D | f)) + K⁻¹f`.
    pub fn gradient(&self, f: &DVector<f64>) -> Result<DVector<f64>> {
        let (chol, _) = cholesky_with_jitter(&self.k)?;
        Ok(self.likelihood_gradient(f) + chol.solve(f))
    }

    /// The same objective with `f = K a`, which needs no inverse of `K`.
    fn value_in_weights(&self, a: &DVector<f64>) -> f64 {
        let f = &self.k * a;
        -self.log_likelihood(&f) + 0.5 * a.dot(&f)
    }
}

/// GP over latent scores fitted to strict pairwise preferences.
#[derive(Debug)]
pub struct GpPreferenceModel {
    kernel: SeKernel,
    inputs: Vec<Vec<f64>>,
    posterior: PreferencePosterior,
    f_map: DVector<f64>,
    /// `K⁻¹ f_MAP`, obtained without inverting `K`.
    weights: DVector<f64>,
    lambda_map: DMatrix<f64>,
    /// `[K + Λ⁻¹]⁻¹` computed as `[I + ΛK]⁻¹Λ`.
    variance_matrix: DMatrix<f64>,
    iterations: usize,
    gradient_norm: f64,
    clamp_events: AtomicUsize,
}

/// Finds the MAP latent vector by damped Newton iterations and builds the
/// Laplace approximation around it.
pub fn gp_fit_preference(kernel: &SeKernel, dataset: &Dataset, noise_std: f64) -> Result<GpPreferenceModel> {
    let pairs = strict_pairs(dataset)?;
    let inputs = dataset.samples().to_vec();
    let k = kernel.gram(&inputs);
    let n = inputs.len();
    let posterior = PreferencePosterior::new(k.clone(), pairs, noise_std)?;

    // Newton in f-space, carried in the weights a = K⁻¹f:
    //   (I + ΛK) a_new = Λf − ∇L(f)
    let mut a = DVector::zeros(n);
    let mut f = DVector::zeros(n);
    let mut value = posterior.value_in_weights(&a);
    let mut grad_norm = inf_norm(&(posterior.likelihood_gradient(&f) + &a));
    let mut iterations = 0;
    while grad_norm > MAP_GRADIENT_TOL {
        if iterations == MAX_NEWTON_ITERS {
            return Err(GmrsError::NewtonNotConverged {
                iterations,
                gradient_norm: grad_norm,
            });
        }
        iterations += 1;
        let lambda = posterior.likelihood_hessian(&f);
        let rhs = &lambda * &f - posterior.likelihood_gradient(&f);
        let system = DMatrix::identity(n, n) + &lambda * &k;
        let a_new = LU::new(system).solve(&rhs).ok_or(GmrsError::SingularSystem {
            condition: f64::INFINITY,
        })?;
        let step = a_new - &a;

        // Near the optimum the objective stops resolving differences, so a
        // step within rounding of the current value is taken when it
        // shrinks the gradient.
        let roundoff = 1e-12 * (1.0 + value.abs());
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial = &a + t * &step;
            let v = posterior.value_in_weights(&trial);
            let descent = v <= value
                || (v <= value + roundoff
                    && inf_norm(&(posterior.likelihood_gradient(&(&k * &trial)) + &trial)) < grad_norm);
            if descent {
                accepted = Some((trial, v.min(value)));
                break;
            }
            t *= 0.5;
        }
        let Some((trial, v)) = accepted else {
            // No descent along the Newton direction: the iterate is as good
            // as floating point allows.
            break;
        };
        a = trial;
        value = v;
        f = &k * &a;
        grad_norm = inf_norm(&(posterior.likelihood_gradient(&f) + &a));
    }
    if grad_norm > MAP_GRADIENT_TOL {
        return Err(GmrsError::NewtonNotConverged {
            iterations,
            gradient_norm: grad_norm,
        });
    }

    let lambda_map = posterior.likelihood_hessian(&f);
    let system = DMatrix::identity(n, n) + &lambda_map * &k;
    let variance_matrix = LU::new(system).solve(&lambda_map).ok_or(GmrsError::SingularSystem {
        condition: f64::INFINITY,
    })?;
    // symmetrize against rounding
    let variance_matrix = 0.5 * (&variance_matrix + variance_matrix.transpose());

    Ok(GpPreferenceModel {
        kernel: *kernel,
        inputs,
        posterior,
        f_map: f,
        weights: a,
        lambda_map,
        variance_matrix,
        iterations,
        gradient_norm: grad_norm,
        clamp_events: AtomicUsize::new(0),
    })
}

impl GpPreferenceModel {
    pub fn kernel(&self) -> &SeKernel {
        &self.kernel
    }

    pub fn f_map(&self) -> &DVector<f64> {
        &self.f_map
    }

    pub fn lambda_map(&self) -> &DMatrix<f64> {
        &self.lambda_map
    }

    pub fn posterior(&self) -> &PreferencePosterior {
        &self.posterior
    }

    pub fn newton_iterations(&self) -> usize {
        self.iterations
    }

    /// ∞-norm of the posterior gradient at the returned MAP estimate.
    pub fn gradient_norm(&self) -> f64 {
        self.gradient_norm
    }

    pub fn clamp_events(&self) -> usize {
        self.clamp_events.load(Ordering::Relaxed)
    }

    pub fn predict(&self, x: &[f64]) -> PredictiveDistribution {
        let kx = self.kernel.vector(&self.inputs, x);
        let mean = kx.dot(&self.weights);
        let var = self.kernel.signal_var - kx.dot(&(&self.variance_matrix * &kx));
        PredictiveDistribution::new(mean, var, &self.clamp_events)
    }

    /// Variance through the posterior covariance `[K⁻¹ + Λ]⁻¹`, i.e.
    /// `k** − k*ᵀK⁻¹k* + k*ᵀK⁻¹[K⁻¹ + Λ]⁻¹K⁻¹k*`. Needs `K` to be invertible;
    /// kept for cross-checking [`GpPreferenceModel::predict`].
    pub fn posterior_form_variance(&self, x: &[f64]) -> Result<f64> {
        let k = self.kernel.gram(&self.inputs);
        let kinv = k.clone().try_inverse().ok_or(GmrsError::SingularSystem {
            condition: f64::INFINITY,
        })?;
        let cov = (&kinv + &self.lambda_map)
            .try_inverse()
            .ok_or(GmrsError::SingularSystem {
                condition: f64::INFINITY,
            })?;
        let kx = self.kernel.vector(&self.inputs, x);
        let w = &kinv * &kx;
        Ok(self.kernel.signal_var - kx.dot(&w) + w.dot(&(&cov * &w)))
    }

    /// Laplace approximation of the log evidence:
    /// `log p(D | f_MAP) − ½ f_MAPᵀK⁻¹f_MAP − ½ log det(I + KΛ)`.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.f_map.len();
        let k = self.kernel.gram(&self.inputs);
        let det = (DMatrix::identity(n, n) + &k * &self.lambda_map).determinant();
        self.posterior.log_likelihood(&self.f_map) - 0.5 * self.f_map.dot(&self.weights) - 0.5 * det.ln()
    }
}

impl Surrogate for GpPreferenceModel {
    fn evaluate(&self, x: &[f64]) -> f64 {
        self.kernel.vector(&self.inputs, x).dot(&self.weights)
    }
}

/// Picks the lengthscale with the highest (approximate) log evidence.
/// Candidates whose fit fails are skipped; the first maximizer wins ties.
pub fn select_lengthscale(kernel: &SeKernel, dataset: &Dataset, noise: f64, grid: &[f64]) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for &ell in grid {
        let Ok(k) = SeKernel::new(kernel.signal_var, ell) else {
            continue;
        };
        let evidence = if dataset.is_preference() {
            gp_fit_preference(&k, dataset, noise).map(|m| m.log_marginal_likelihood())
        } else {
            gp_fit_blackbox(&k, dataset, noise).map(|m| m.log_marginal_likelihood())
        };
        if let Ok(e) = evidence {
            if e.is_finite() && best.is_none_or(|(_, b)| e > b) {
                best = Some((ell, e));
            }
        }
    }
    best.map(|(ell, _)| ell)
}
