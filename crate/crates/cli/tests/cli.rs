use std::process::Command;

fn gmrs() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gmrs"))
}

#[test]
fn run_writes_history_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h.csv");
    let status = gmrs()
        .args([
            "run",
            "--n-init",
            "4",
            "--n-max",
            "10",
            "--seed",
            "1",
            "--explore",
            "msrs",
        ])
        .args(["--delta-cycle", "0.9,0", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "iter,x1,x2,f_true,best_f_true,delta,improved");
    assert_eq!(lines.len(), 1 + 6);
    assert!(lines[1].ends_with(",0.9,true") || lines[1].ends_with(",0.9,false"));
}

#[test]
fn run_flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"mode": "preference", "n_init": 3, "n_max": 30, "seed": 5}"#).unwrap();
    let output = gmrs()
        .args(["run", "--function", "sphere", "--n-max", "8", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    assert_eq!(String::from_utf8(output.stdout).unwrap().lines().count(), 1 + 5);
}

#[test]
fn run_rejects_bad_input() {
    for args in [
        &["run", "--function", "nope"][..],
        &["run", "--explore", "random"],
        &["run", "--n-init", "0"],
    ] {
        let output = gmrs().args(args).output().unwrap();
        assert!(!output.status.success(), "{args:?}");
    }
}

#[test]
fn bench_writes_curves_to_configured_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curves.csv");
    let study = serde_json::json!({
        "function": "sphere",
        "arms": [{"label": "gmrs"}, {"label": "fixed", "config": {"acq": {"shape": {"kind": "fixed-alpha", "alpha": 1.0}}}}],
        "n_runs": 2,
        "n_max": 8,
        "output": out,
    });
    let cfg = dir.path().join("mc.json");
    std::fs::write(&cfg, study.to_string()).unwrap();
    let status = gmrs().args(["bench", "--config"]).arg(&cfg).status().unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next(), Some("arm,iter,median,min,max"));
    assert_eq!(text.lines().count(), 1 + 2 * 8);
}
