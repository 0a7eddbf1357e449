use serde::{Deserialize, Serialize};

use super::config::{GmrsConfig, Mode, SurrogateKind};
use crate::domain::Dataset;
use crate::explore::ExploreVariant;
use crate::gp::{gp_fit_blackbox, gp_fit_preference, SeKernel};
use crate::rbf::{fit_interpolant, fit_preference_rbf, surrogate_preference, RadialKernel};
use crate::Surrogate;

/// Hyperparameters that recalibration may change during a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub rbf_shape: f64,
    pub gp_lengthscale: f64,
}

impl Hyperparameters {
    pub fn from_config(cfg: &GmrsConfig) -> Self {
        Self {
            rbf_shape: cfg.rbf.kernel.shape,
            gp_lengthscale: cfg.gp.kernel.lengthscale,
        }
    }

    pub fn rbf_kernel(&self, cfg: &GmrsConfig) -> RadialKernel {
        RadialKernel {
            family: cfg.rbf.kernel.family,
            shape: self.rbf_shape,
        }
    }

    pub fn gp_kernel(&self, cfg: &GmrsConfig) -> SeKernel {
        SeKernel {
            signal_var: cfg.gp.kernel.signal_var,
            lengthscale: self.gp_lengthscale,
        }
    }
}

/// Candidates with the current value first, so that ties keep it.
fn candidates(current: f64, grid: &[f64]) -> Vec<f64> {
    std::iter::once(current)
        .chain(grid.iter().copied().filter(|v| *v != current))
        .collect()
}

/// First minimizer of `score`; `None` when every score is non-finite.
fn pick(cands: &[f64], score: impl Fn(f64) -> f64) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for &c in cands {
        let s = score(c);
        if s.is_finite() && best.is_none_or(|(_, b)| s < b) {
            best = Some((c, s));
        }
    }
    best.map(|(c, _)| c)
}

/// Leave-one-out error of an RBF shape parameter: squared prediction error
/// on measures, or the number of misclassified preferences.
pub fn rbf_loo_score(cfg: &GmrsConfig, kernel: &RadialKernel, data: &Dataset) -> f64 {
    if data.is_preference() {
        let (prefs, map) = (data.preferences().unwrap(), data.mapping().unwrap());
        if prefs.len() < 2 {
            return f64::INFINITY;
        }
        let mut wrong = 0usize;
        for (h, (&b, &(l, k))) in prefs.iter().zip(map).enumerate() {
            match fit_preference_rbf(kernel, &data.without_preference(h), &cfg.rbf.preference) {
                Ok(s) => {
                    if surrogate_preference(&s, data.sample(l), data.sample(k), cfg.rbf.preference.sigma) != b {
                        wrong += 1;
                    }
                }
                Err(_) => return f64::INFINITY,
            }
        }
        wrong as f64
    } else {
        let n = data.len();
        if n < 2 {
            return f64::INFINITY;
        }
        let y = data.measures().unwrap();
        let mut err = 0.0;
        for i in 0..n {
            let keep: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            match fit_interpolant(kernel, &data.subset(&keep)) {
                Ok(s) => err += (s.evaluate(data.sample(i)) - y[i]).powi(2),
                Err(_) => return f64::INFINITY,
            }
        }
        err
    }
}

/// Grid search over the hyperparameters in use. GP lengthscales maximize the
/// (Laplace) evidence, RBF shapes minimize the leave-one-out score. The
/// current values are kept on ties and when every candidate fails.
pub fn recalibrate(cfg: &GmrsConfig, data: &Dataset, current: &Hyperparameters) -> Hyperparameters {
    let mut next = *current;
    let uses_gp = cfg.surrogate == SurrogateKind::Gp || cfg.explore.variant == ExploreVariant::NegGpStd;
    if uses_gp {
        let cands = candidates(current.gp_lengthscale, &cfg.gp.lengthscale_grid);
        let evidence = |ell: f64| {
            let k = SeKernel {
                signal_var: cfg.gp.kernel.signal_var,
                lengthscale: ell,
            };
            let e = match cfg.mode {
                Mode::Blackbox => gp_fit_blackbox(&k, data, cfg.gp.noise_var).map(|m| m.log_marginal_likelihood()),
                Mode::Preference => {
                    gp_fit_preference(&k, data, cfg.gp.preference_noise_std).map(|m| m.log_marginal_likelihood())
                }
            };
            e.map_or(f64::INFINITY, |e| -e)
        };
        if let Some(ell) = pick(&cands, evidence) {
            next.gp_lengthscale = ell;
        }
    }
    if cfg.surrogate == SurrogateKind::Rbf {
        let cands = candidates(current.rbf_shape, &cfg.rbf.shape_grid);
        let score = |eps: f64| {
            let k = RadialKernel {
                family: cfg.rbf.kernel.family,
                shape: eps,
            };
            rbf_loo_score(cfg, &k, data)
        };
        if let Some(eps) = pick(&cands, score) {
            next.rbf_shape = eps;
        }
    }
    if next != *current {
        log::debug!("recalibrated hyperparameters: {next:?}");
    }
    next
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_keep_the_current_value() {
        assert_eq!(pick(&candidates(0.5, &[0.1, 0.5, 1.0]), |_| 1.0), Some(0.5));
        assert_eq!(pick(&[0.1, 0.2], |v| if v == 0.2 { 0.0 } else { 1.0 }), Some(0.2));
        assert_eq!(pick(&[0.1], |_| f64::INFINITY), None);
    }

    #[test]
    fn single_candidate_grid() {
        let mut cfg = GmrsConfig::default();
        cfg.rbf.shape_grid = vec![3.0];
        let data = Dataset::from_measures(
            (0..6).map(|i| vec![i as f64 / 5.0, (i * i) as f64 / 25.0]).collect(),
            (0..6).map(|i| (i as f64).sin()).collect(),
        )
        .unwrap();
        let cur = Hyperparameters {
            rbf_shape: 3.0,
            gp_lengthscale: 0.5,
        };
        assert_eq!(recalibrate(&cfg, &data, &cur), cur);
    }

    #[test]
    fn loo_prefers_a_sensible_shape() {
        // Smooth data: a tiny shape makes the basis nearly flat and the fit
        // ill-conditioned, a huge one makes it spiky; both predict worse.
        let cfg = GmrsConfig::default();
        let xs: Vec<Vec<f64>> = (0..15).map(|i| vec![i as f64 / 14.0]).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (3.0 * x[0]).sin()).collect();
        let data = Dataset::from_measures(xs, ys).unwrap();
        let spiky = rbf_loo_score(
            &cfg,
            &RadialKernel {
                shape: 100.0,
                ..cfg.rbf.kernel
            },
            &data,
        );
        let fine = rbf_loo_score(
            &cfg,
            &RadialKernel {
                shape: 3.0,
                ..cfg.rbf.kernel
            },
            &data,
        );
        assert!(fine < spiky);
    }
}
