use rand::Rng;

use super::config::InnerSettings;
use crate::acquisition::feasible_uniform;
use crate::domain::ConstraintSet;
use crate::linalg::dist;

/// Poll budget per compass search, a safeguard against pathological objectives.
const MAX_EVALS_PER_START: usize = 20_000;

/// Minimizes `acq` over the feasible part of the unit box.
///
/// The acquisition is evaluated on `x_aug` and on `random_per_dim·n` uniform
/// points; the best `starts` of those are refined by compass search with
/// projection onto the box. Infeasible points score `+∞`. The result is the
/// best point evaluated, so it is never worse than the best of `x_aug`.
pub fn inner_minimize<R: Rng + ?Sized>(
    acq: &dyn Fn(&[f64]) -> f64,
    omega: &ConstraintSet,
    x_aug: &[Vec<f64>],
    settings: &InnerSettings,
    rng: &mut R,
) -> Vec<f64> {
    let n = omega.dim();
    let score = |u: &[f64]| {
        if !omega.contains_unit(u) {
            return f64::INFINITY;
        }
        let v = acq(u);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut candidates: Vec<Vec<f64>> = x_aug.to_vec();
    candidates.extend((0..settings.random_per_dim * n).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()));
    let values: Vec<f64> = candidates.iter().map(|u| score(u)).collect();
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));

    let mut best = (candidates[order[0]].clone(), values[order[0]]);
    for &i in order.iter().take(settings.starts) {
        if values[i].is_infinite() {
            break;
        }
        let (x, f) = compass_search(&score, candidates[i].clone(), values[i], settings);
        if f < best.1 {
            best = (x, f);
        }
    }
    best.0
}

fn compass_search(
    score: &dyn Fn(&[f64]) -> f64,
    mut x: Vec<f64>,
    mut f: f64,
    settings: &InnerSettings,
) -> (Vec<f64>, f64) {
    let mut step = settings.initial_step;
    let mut evals = 0;
    while step >= settings.min_step && evals < MAX_EVALS_PER_START {
        let mut moved = false;
        'poll: for d in 0..x.len() {
            for sign in [1.0, -1.0] {
                let mut t = x.clone();
                t[d] = (t[d] + sign * step).clamp(0.0, 1.0);
                if t[d] == x[d] {
                    continue;
                }
                evals += 1;
                let v = score(&t);
                if v < f {
                    x = t;
                    f = v;
                    moved = true;
                    break 'poll;
                }
            }
        }
        if !moved {
            step *= settings.contraction;
        }
    }
    (x, f)
}

/// Replacement for a proposal that duplicates a sample: the feasible random
/// draw farthest from all samples.
pub fn spread_point<R: Rng + ?Sized>(
    omega: &ConstraintSet,
    samples: &[Vec<f64>],
    draws: usize,
    rng: &mut R,
) -> crate::Result<Vec<f64>> {
    let pool = feasible_uniform(omega, draws, rng)?;
    let gap = |u: &Vec<f64>| samples.iter().map(|x| dist(x, u)).fold(f64::INFINITY, f64::min);
    Ok(pool
        .into_iter()
        .map(|u| (gap(&u), u))
        .fold(None, |best: Option<(f64, Vec<f64>)>, (g, u)| match best {
            Some((bg, _)) if bg >= g => best,
            _ => Some((g, u)),
        })
        .expect("pool is non-empty")
        .1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn run(acq: &dyn Fn(&[f64]) -> f64, omega: &ConstraintSet) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let aug = feasible_uniform(omega, 200, &mut rng).unwrap();
        inner_minimize(acq, omega, &aug, &InnerSettings::default(), &mut rng)
    }

    #[test]
    fn interior_quadratic() {
        let omega = ConstraintSet::unit(2).unwrap();
        let c = [0.3141, 0.7182];
        let x = run(&|u| (u[0] - c[0]).powi(2) + (u[1] - c[1]).powi(2), &omega);
        assert!(dist(&x, &c) < 1e-3);
    }

    #[test]
    fn linear_objective_hits_the_bound() {
        let omega = ConstraintSet::unit(2).unwrap();
        let x = run(&|u| u[0], &omega);
        assert!(x[0] <= 1e-6);
    }

    #[test]
    fn constant_objective_returns_feasible_point() {
        let omega = ConstraintSet::unit(3).unwrap();
        let x = run(&|_| 1.0, &omega);
        assert!(omega.contains_unit(&x));
    }

    #[test]
    fn respects_extra_constraints() {
        let omega = ConstraintSet::unit(2)
            .unwrap()
            .with_linear_ineq(vec![vec![-1.0, 0.0]], vec![-0.5])
            .unwrap();
        let x = run(&|u| u[0], &omega);
        assert!(omega.contains_unit(&x));
        assert!((x[0] - 0.5).abs() < 1e-5);
    }

    #[test]
    fn spread_point_avoids_samples() {
        let omega = ConstraintSet::unit(2).unwrap();
        let xs = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]];
        let u = spread_point(&omega, &xs, 100, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(u[0] > 0.5 && u[1] > 0.5);
    }
}
