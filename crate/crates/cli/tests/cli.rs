use std::process::{Command, Output};

fn stcs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stcs")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn probe_oracle_default_start() {
    let o = stcs(&["probe-oracle"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "29");
    let o = stcs(&["probe-oracle", "--step", "0.005"]);
    assert_eq!(stdout(&o).trim(), "281");
}

#[test]
fn bad_input_exits_with_config_code() {
    assert_eq!(stcs(&["probe-oracle", "--step", "-1"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(stcs(&["run", "--env", "pond", "--out-dir", out]).status.code(), Some(2));
    assert_eq!(stcs(&["run", "--env", "grid", "--out-dir", out, "--set", "trials=7"]).status.code(), Some(2));
    assert_eq!(stcs(&["run", "--env", "grid", "--out-dir", out, "--set", "nonsense"]).status.code(), Some(2));
    let missing = dir.path().join("missing.cfg");
    assert_eq!(stcs(&["run", "--config", missing.to_str().unwrap(), "--out-dir", out]).status.code(), Some(2));
}

#[test]
fn run_then_compare() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    std::fs::write(&cfg, "# small run\nenv = mountain-car\ntrials = 40\nN = 100\nrepeats = 2\n").unwrap();
    let a = dir.path().join("a");
    let o = stcs(&["run", "--config", cfg.to_str().unwrap(), "--out-dir", a.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("repeat 1 seed 1"));
    for f in ["config.txt", "aggregate.csv", "summary.csv", "repeat-00/metrics.csv", "repeat-01/metrics.csv"] {
        assert!(a.join(f).is_file(), "{f}");
    }
    let b = dir.path().join("b");
    let o = stcs(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--repr",
        "mlp",
        "--seed",
        "7",
        "--out-dir",
        b.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let o = stcs(&["compare", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("column macro_steps: mean_a="));
    let o = stcs(&["compare", a.to_str().unwrap(), dir.path().join("nowhere").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}
