use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::domain::{Dataset, DupTolerance, Preference};
use crate::error::{invalid, Result};

/// Synthetic decision-maker: compares two samples through a hidden scoring
/// function, lower being better.
#[derive(Clone)]
pub struct PreferenceOracle {
    latent: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    noise_std: f64,
}

impl fmt::Debug for PreferenceOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PreferenceOracle")
            .field("noise_std", &self.noise_std)
            .finish_non_exhaustive()
    }
}

impl PreferenceOracle {
    pub fn new(latent: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            latent: Arc::new(latent),
            noise_std: 0.0,
        }
    }

    /// Adds Gaussian noise with standard deviation `noise_std` to each latent
    /// value before comparing.
    pub fn with_noise(mut self, noise_std: f64) -> Result<Self> {
        if !(noise_std >= 0.0 && noise_std.is_finite()) {
            return Err(invalid("oracle noise must be finite and non-negative"));
        }
        self.noise_std = noise_std;
        Ok(self)
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_std
    }

    /// The hidden scoring function, for reporting only.
    pub fn latent(&self, x: &[f64]) -> f64 {
        (self.latent)(x)
    }

    /// `-1` if `xi` is preferred (lower latent value), `1` if `xj` is, `0` on a
    /// tie. With noise the outcome is always strict.
    pub fn compare<R: Rng + ?Sized>(&self, xi: &[f64], xj: &[f64], rng: &mut R) -> Preference {
        let (fi, fj) = (self.latent(xi), self.latent(xj));
        if self.noise_std == 0.0 {
            return match fi.partial_cmp(&fj) {
                Some(std::cmp::Ordering::Less) => -1,
                Some(std::cmp::Ordering::Greater) => 1,
                _ => 0,
            };
        }
        let noise = Normal::new(0.0, self.noise_std).expect("validated noise level");
        loop {
            let yi = fi + noise.sample(rng);
            let yj = fj + noise.sample(rng);
            if yi < yj {
                return -1;
            }
            if yi > yj {
                return 1;
            }
        }
    }
}

/// Queries the oracle along a tournament chain: every new sample is compared
/// against the current best, so `N` samples cost exactly `N - 1` comparisons.
///
/// Returns the preference dataset and the index of the winning sample.
pub fn chain_initial_preferences<R: Rng + ?Sized>(
    oracle: &PreferenceOracle,
    samples: &[Vec<f64>],
    tol: &DupTolerance,
    rng: &mut R,
) -> Result<(Dataset, usize)> {
    if samples.len() < 2 {
        return Err(invalid("the initial comparison chain needs at least two samples"));
    }
    let mut ds = Dataset::preference();
    let mut best = ds.push_sample(samples[0].clone(), tol)?;
    for x in &samples[1..] {
        let i = ds.push_sample(x.clone(), tol)?;
        let b = oracle.compare(ds.sample(i), ds.sample(best), rng);
        ds.push_preference(i, best, b)?;
        if b == -1 {
            best = i;
        }
    }
    Ok((ds, best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::functions::adjiman;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn identity() -> PreferenceOracle {
        PreferenceOracle::new(|x| x[0])
    }

    #[test]
    fn noiseless_comparisons() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let o = identity();
        assert_eq!(o.compare(&[0.0], &[1.0], &mut rng), -1);
        assert_eq!(o.compare(&[1.0], &[0.0], &mut rng), 1);
        assert_eq!(o.compare(&[0.3], &[0.3], &mut rng), 0);
    }

    #[test]
    fn adjiman_comparison() {
        // f(2, 0.1) = cos2·sin0.1 − 2/1.01 ≈ −2.0218 < f(0, 0) = 0
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let o = PreferenceOracle::new(adjiman);
        assert!(adjiman(&[2.0, 0.1]) < -2.0);
        assert_eq!(o.compare(&[2.0, 0.1], &[0.0, 0.0], &mut rng), -1);
    }

    #[test]
    fn noisy_oracle_never_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let o = identity().with_noise(0.5).unwrap();
        for _ in 0..200 {
            assert_ne!(o.compare(&[0.2], &[0.2], &mut rng), 0);
        }
        assert!(identity().with_noise(-1.0).is_err());
    }

    #[test]
    fn chain_lengths() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tol = DupTolerance::uniform(1, 1e-9);
        let samples: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64 * 0.1]).collect();
        let (ds, _) = chain_initial_preferences(&identity(), &samples, &tol, &mut rng).unwrap();
        assert_eq!(ds.num_preferences(), 7);
        let (ds, _) = chain_initial_preferences(&identity(), &samples[..2], &tol, &mut rng).unwrap();
        assert_eq!(ds.num_preferences(), 1);
        assert!(chain_initial_preferences(&identity(), &samples[..1], &tol, &mut rng).is_err());
    }

    #[test]
    fn chain_winner_is_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tol = DupTolerance::uniform(1, 1e-9);
        let ascending: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64]).collect();
        let (_, best) = chain_initial_preferences(&identity(), &ascending, &tol, &mut rng).unwrap();
        assert_eq!(best, 0);
        let shuffled: Vec<Vec<f64>> = [3.0, 5.0, -2.0, 4.0, 0.0].iter().map(|v| vec![*v]).collect();
        let (_, best) = chain_initial_preferences(&identity(), &shuffled, &tol, &mut rng).unwrap();
        assert_eq!(best, 2);
    }
}
