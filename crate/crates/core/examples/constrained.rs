//! A measured objective on a box cut by a linear inequality. Every sample,
//! initial design included, satisfies the cut.
//!
//! cargo run --release --example constrained

use gmrs::domain::ConstraintSet;
use gmrs::gmrs::{gmrs_run, Evaluator};
use gmrs::GmrsConfig;

fn main() -> gmrs::Result<()> {
    // Unconstrained minimum at (0.6, 0.6); the cut x + y <= 0.5 moves it to
    // (0.25, 0.25).
    let objective = |x: &[f64]| (x[0] - 0.6).powi(2) + (x[1] - 0.6).powi(2);
    let omega =
        ConstraintSet::new(vec![-1.0, -1.0], vec![1.0, 1.0])?.with_linear_ineq(vec![vec![1.0, 1.0]], vec![0.5])?;
    let cfg = GmrsConfig {
        n_init: 6,
        n_max: 30,
        ..GmrsConfig::default()
    };
    let run = gmrs_run(cfg, omega, Evaluator::measure(objective))?;
    let worst = run
        .state
        .dataset()
        .samples()
        .iter()
        .map(|x| x[0] + x[1])
        .fold(f64::NEG_INFINITY, f64::max);
    println!("best x = {:?}, f = {:.5}", run.best_x, run.best_f_true);
    println!("largest x + y over all samples: {worst:.6}");
    Ok(())
}
