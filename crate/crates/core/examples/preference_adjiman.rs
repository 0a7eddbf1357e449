//! Preference-based minimization of the adjiman function: the optimizer only
//! learns which of two candidates a (synthetic, noiseless) decision maker
//! prefers.
//!
//! cargo run --release --example preference_adjiman -- [seed] [rbf|gp]

use gmrs::domain::TestFunction;
use gmrs::gmrs::{run_test_function, Mode, SurrogateKind};
use gmrs::GmrsConfig;

fn main() -> gmrs::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let surrogate: SurrogateKind = args.next().as_deref().unwrap_or("rbf").parse()?;
    let func = TestFunction::by_name("adjiman")?;
    let cfg = GmrsConfig {
        mode: Mode::Preference,
        surrogate,
        n_init: 8,
        n_max: 70,
        seed,
        ..GmrsConfig::default()
    };
    let run = run_test_function(cfg, &func)?;
    let initial = run.state.history().iter().filter(|r| r.iteration == 0).count();
    println!("{initial} initial comparisons, {} loop queries", run.history.len());
    for row in run.history.iter().filter(|r| r.improved) {
        println!(
            "iter {:>2}  delta {:.2}  new incumbent f = {:.5}",
            row.iter, row.delta, row.best_f_true
        );
    }
    println!("best x = {:?}, f = {:.6}", run.best_x, run.best_f_true);
    Ok(())
}
