//! Black-box minimization of the adjiman function with an RBF surrogate and
//! IDW exploration.
//!
//! cargo run --release --example blackbox_adjiman -- [seed]

use gmrs::domain::TestFunction;
use gmrs::gmrs::run_test_function;
use gmrs::GmrsConfig;

fn main() -> gmrs::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let func = TestFunction::by_name("adjiman")?;
    let cfg = GmrsConfig {
        seed,
        ..GmrsConfig::default()
    };
    let run = run_test_function(cfg, &func)?;
    for row in &run.history {
        println!(
            "iter {:>2}  delta {:.2}  f {:>9.5}  best {:>9.5}{}",
            row.iter,
            row.delta,
            row.f_true,
            row.best_f_true,
            if row.improved { "  *" } else { "" }
        );
    }
    println!("best x = {:?}, f = {:.6}", run.best_x, run.best_f_true);
    Ok(())
}
