mod common;

use gmrs::acquisition::AcquisitionKind;
use gmrs::bench::{brute_force_min, emit_curves, run_monte_carlo, Arm, McConfig};
use gmrs::domain::{ConstraintSet, TestFunction};
use gmrs::{GmrsConfig, Mode};
use proptest::prelude::*;

#[test]
fn adjiman_reference_minimum() {
    let (x, f) = common::adjiman_reference();
    assert!((f + 2.0218).abs() < 1e-4, "{f}");
    assert!((x[0] - 2.0).abs() < 1e-9 && (x[1] - 0.1058).abs() < 1e-3, "{x:?}");
    // a finer grid refines to the same point
    let func = TestFunction::by_name("adjiman").unwrap();
    let (x2, f2) = brute_force_min(&func.func(), &func.bounds(), 4001).unwrap();
    assert!((f - f2).abs() < 1e-10);
    assert!((x[1] - x2[1]).abs() < 1e-5);
}

fn study(arms: Vec<Arm>, n_runs: usize) -> McConfig {
    McConfig {
        function: "adjiman".into(),
        mode: Mode::Blackbox,
        arms,
        n_runs,
        seed_base: 100,
        n_init: 4,
        n_max: 20,
        oracle_noise: 0.0,
        output: None,
    }
}

fn arm(label: &str, config: GmrsConfig) -> Arm {
    Arm {
        label: label.into(),
        config,
    }
}

#[test]
fn single_run_envelope_collapses() {
    let s = run_monte_carlo(&study(vec![arm("g", GmrsConfig::default())], 1)).unwrap();
    let a = &s.arms[0];
    assert_eq!(a.median.len(), 20);
    assert_eq!(a.median, a.min);
    assert_eq!(a.median, a.max);
}

#[test]
fn identical_arms_give_identical_summaries() {
    let s = run_monte_carlo(&study(
        vec![arm("a", GmrsConfig::default()), arm("b", GmrsConfig::default())],
        4,
    ))
    .unwrap();
    assert_eq!(s.arms[0].median, s.arms[1].median);
    assert_eq!(s.arms[0].finals, s.arms[1].finals);
}

#[test]
fn envelopes_are_ordered_and_medians_monotone() {
    let mut fixed = GmrsConfig::default();
    fixed.acq.shape = AcquisitionKind::FixedAlpha { alpha: 1.0 };
    let mut glisp = GmrsConfig::default();
    glisp.acq.shape = AcquisitionKind::GlispLike { alpha: 1.0 };
    let s = run_monte_carlo(&study(
        vec![
            arm("gmrs", GmrsConfig::default()),
            arm("fixed", fixed),
            arm("glisp", glisp),
        ],
        5,
    ))
    .unwrap();
    for a in &s.arms {
        assert_eq!(a.failures, 0);
        for i in 0..a.median.len() {
            assert!(a.min[i] <= a.median[i] && a.median[i] <= a.max[i]);
        }
        assert!(a.median.windows(2).all(|w| w[1] <= w[0]), "{}", a.label);
    }
    // paired design: every arm starts from the same initial samples
    for i in 0..4 {
        assert_eq!(s.arms[0].min[i], s.arms[1].min[i]);
        assert_eq!(s.arms[0].max[i], s.arms[2].max[i]);
    }
}

#[test]
fn curves_csv_is_reproducible() {
    let cfg = study(vec![arm("gmrs", GmrsConfig::default())], 3);
    let csv = |cfg: &McConfig| {
        let mut buf = Vec::new();
        emit_curves(&run_monte_carlo(cfg).unwrap(), &mut buf).unwrap();
        buf
    };
    let a = csv(&cfg);
    assert_eq!(a, csv(&cfg));
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("arm,iter,median,min,max\n"));
    assert_eq!(text.lines().count(), 21);
}

#[test]
fn failed_runs_are_counted() {
    // an RBF family with φ(0) = 0 cannot interpolate the first sample
    let mut bad = GmrsConfig::default();
    bad.rbf.kernel.family = gmrs::rbf::RadialFamily::Linear;
    let mut cfg = study(vec![arm("bad", bad)], 2);
    cfg.n_init = 1;
    let s = run_monte_carlo(&cfg).unwrap();
    assert_eq!(s.arms[0].failures, 2);
    assert!(s.arms[0].median.is_empty());
}

#[test]
fn preference_study_runs() {
    let mut cfg = study(vec![arm("gmrs", GmrsConfig::default())], 2);
    cfg.mode = Mode::Preference;
    cfg.n_init = 8;
    let s = run_monte_carlo(&cfg).unwrap();
    assert_eq!(s.arms[0].median.len(), 20);
}

#[test]
fn mc_json_document() {
    let text = r#"{
        "function": "adjiman",
        "mode": "preference",
        "arms": [
            {"label": "gmrs"},
            {"label": "glisp", "config": {"acq": {"shape": {"kind": "glisp-like", "alpha": 1.0}}}}
        ],
        "n_runs": 100,
        "seed_base": 7,
        "n_init": 8,
        "output": "curves.csv"
    }"#;
    let cfg: McConfig = serde_json::from_str(text).unwrap();
    cfg.validate().unwrap();
    assert_eq!(cfg.n_max, 70);
    assert_eq!(cfg.arm_config(&cfg.arms[1], 3).seed, 10);
    assert_eq!(cfg.arm_config(&cfg.arms[1], 3).mode, Mode::Preference);
    assert!(serde_json::from_str::<McConfig>(r#"{"function":"adjiman","arms":[],"n_runs":1,"extra":1}"#).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn brute_force_finds_interior_quadratic_minimum(cx in -0.9f64..1.9, cy in -0.9f64..0.9) {
        let bounds = ConstraintSet::new(vec![-1.0, -1.0], vec![2.0, 1.0]).unwrap();
        let f = move |x: &[f64]| (x[0] - cx).powi(2) + 3.0 * (x[1] - cy).powi(2);
        let (x, fx) = brute_force_min(&f, &bounds, 101).unwrap();
        prop_assert!((x[0] - cx).abs() <= 0.03 && (x[1] - cy).abs() <= 0.02);
        prop_assert!(fx <= 1e-12);
    }

    #[test]
    fn brute_force_of_constant(c in -10.0f64..10.0) {
        let bounds = ConstraintSet::unit(2).unwrap();
        let (_, f) = brute_force_min(&move |_: &[f64]| c, &bounds, 101).unwrap();
        prop_assert_eq!(f, c);
    }
}
