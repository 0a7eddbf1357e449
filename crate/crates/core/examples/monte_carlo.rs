//! Compares acquisition shapes over repeated runs and prints the median
//! best-so-far curves as CSV.
//!
//! cargo run --release --example monte_carlo -- [runs]

use gmrs::acquisition::AcquisitionKind;
use gmrs::bench::{emit_curves, run_monte_carlo, Arm, McConfig};
use gmrs::GmrsConfig;

fn arm(label: &str, shape: AcquisitionKind) -> Arm {
    let mut config = GmrsConfig::default();
    config.acq.shape = shape;
    Arm {
        label: label.into(),
        config,
    }
}

fn main() -> gmrs::Result<()> {
    let n_runs = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let study = McConfig {
        function: "adjiman".into(),
        mode: Default::default(),
        arms: vec![
            arm("gmrs", AcquisitionKind::Rescaled),
            arm("fixed-alpha", AcquisitionKind::FixedAlpha { alpha: 1.0 }),
            arm("glisp-like", AcquisitionKind::GlispLike { alpha: 1.0 }),
        ],
        n_runs,
        seed_base: 0,
        n_init: 4,
        n_max: 30,
        oracle_noise: 0.0,
        output: None,
    };
    let summary = run_monte_carlo(&study)?;
    for a in &summary.arms {
        eprintln!(
            "{:>12}: final median {:.5}, {} failed runs",
            a.label,
            a.median.last().copied().unwrap_or(f64::NAN),
            a.failures
        );
    }
    emit_curves(&summary, std::io::stdout().lock())
}
