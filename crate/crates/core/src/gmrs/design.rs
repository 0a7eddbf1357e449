use rand::seq::SliceRandom;
use rand::Rng;

use crate::domain::ConstraintSet;
use crate::error::{invalid, GmrsError, Result};

const REDRAWS: usize = 100;
/// Redraws inside the original cell before strata are swapped.
const CELL_DRAWS: usize = 10;

/// Latin hypercube design of `n` points in the box of `omega`, returned in
/// original coordinates. Every coordinate places exactly one point in each
/// of `n` equal-width strata. Points violating the non-bound constraints are
/// redrawn, at most [`REDRAWS`] times each: first inside their cell, and
/// after a few misses with one coordinate's stratum swapped against a point
/// not placed yet, which keeps the design Latin.
pub fn lhd_design<R: Rng + ?Sized>(omega: &ConstraintSet, n: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(invalid("a design needs at least one point"));
    }
    let dim = omega.dim();
    let mut strata: Vec<Vec<usize>> = (0..dim)
        .map(|_| {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(rng);
            perm
        })
        .collect();
    let draw = |strata: &[Vec<usize>], i: usize, rng: &mut R| -> Vec<f64> {
        (0..dim)
            .map(|d| (strata[d][i] as f64 + rng.random::<f64>()) / n as f64)
            .collect()
    };
    let mut units: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut u = draw(&strata, i, rng);
        let mut attempts = 0;
        while !omega.contains_unit(&u) {
            attempts += 1;
            if attempts > REDRAWS {
                return Err(GmrsError::FeasibilityExhausted(format!(
                    "design point {i} still infeasible after {REDRAWS} redraws"
                )));
            }
            if attempts > CELL_DRAWS && n > 1 {
                let d = rng.random_range(0..dim);
                let mut j = rng.random_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                if j > i {
                    strata[d].swap(i, j);
                } else {
                    // a placed point takes over this stratum only if it stays feasible
                    let mut moved = units[j].clone();
                    moved[d] = (strata[d][i] as f64 + rng.random::<f64>()) / n as f64;
                    if omega.contains_unit(&moved) {
                        strata[d].swap(i, j);
                        units[j] = moved;
                    }
                }
            }
            u = draw(&strata, i, rng);
        }
        units.push(u);
    }
    Ok(units.iter().map(|u| omega.from_unit(u)).collect())
}
