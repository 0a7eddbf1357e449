//! Fits an RBF surrogate to pairwise preferences alone and checks that it
//! ranks the samples consistently with the answers.
//!
//! cargo run --release --example preference_fit

use gmrs::domain::Dataset;
use gmrs::rbf::{fit_preference_rbf, PreferenceFitConfig, RadialFamily, RadialKernel};
use gmrs::Surrogate;

fn main() -> gmrs::Result<()> {
    let latent = |x: &[f64]| (x[0] - 0.35).powi(2);
    let samples: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64 / 5.0]).collect();
    // Compare neighbours; -1 means the first of the pair is preferred.
    let mapping: Vec<(usize, usize)> = (0..5).map(|i| (i, i + 1)).collect();
    let prefs = mapping
        .iter()
        .map(|&(i, j)| {
            if latent(&samples[i]) < latent(&samples[j]) {
                -1
            } else {
                1
            }
        })
        .collect();
    let ds = Dataset::from_preferences(samples.clone(), prefs, mapping)?;

    let kernel = RadialKernel::new(RadialFamily::InverseQuadratic, 1.0)?;
    let fit = fit_preference_rbf(&kernel, &ds, &PreferenceFitConfig::default())?;
    let report = &fit.report;
    let slack = report.slacks.iter().flatten().fold(0.0_f64, |a, &s| a.max(s));
    println!(
        "KKT residual {:.2e}, largest slack {slack:.1e}",
        report.kkt.as_ref().map_or(f64::NAN, |k| k.max())
    );
    for x in &samples {
        println!(
            "x = {:.1}  surrogate {:>8.4}  latent {:.3}",
            x[0],
            fit.evaluate(x),
            latent(x)
        );
    }
    Ok(())
}
