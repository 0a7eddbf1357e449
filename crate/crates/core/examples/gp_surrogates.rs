//! Gaussian-process surrogates in both modes, exploring by posterior
//! standard deviation.
//!
//! cargo run --release --example gp_surrogates

use gmrs::domain::TestFunction;
use gmrs::explore::ExploreVariant;
use gmrs::gmrs::run_test_function;
use gmrs::{GmrsConfig, Mode, SurrogateKind};

fn main() -> gmrs::Result<()> {
    let func = TestFunction::by_name("adjiman")?;
    for mode in [Mode::Blackbox, Mode::Preference] {
        let mut cfg = GmrsConfig {
            mode,
            surrogate: SurrogateKind::Gp,
            n_init: 6,
            n_max: 40,
            ..GmrsConfig::default()
        };
        cfg.explore.variant = ExploreVariant::NegGpStd;
        cfg.recalibrate_every = Some(10);
        let run = run_test_function(cfg, &func)?;
        let hp = run.state.hyperparameters();
        println!(
            "{mode:>10}: best f = {:.5} at {:?}, lengthscale now {:.3}",
            run.best_f_true, run.best_x, hp.gp_lengthscale
        );
    }
    Ok(())
}
