use std::fs;
use std::process::Command;

fn trapflow() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_trapflow"));
    c.env_remove("TRAPFLOW_SEED");
    c
}

const CONFIG: &str = r#"
schema = 1
task = "simulate"
seed = 1
replicas = 5
horizon = 1.0
graph = { kind = "hypercube", n = 10 }
landscape = { kind = "rem", beta = 2.0 }
scales = { derive = "rem", alpha = 0.3 }
thresholds = { epsilon = 0.5, em = 4.0 }
"#;

#[test]
fn simulate_with_env_seed_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, CONFIG).unwrap();
    let out = dir.path().join("out");
    let status = trapflow()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .args(["--parallelism", "2", "--replicas", "3", "--grid", "0,0.5,1", "--mode", "quenched", "--out"])
        .arg(&out)
        .env("TRAPFLOW_SEED", "77")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 77);
    assert_eq!(m["seed_source"], "env");
    assert_eq!(m["replicas"], 3);
    let traces = fs::read_to_string(out.join("traces.csv")).unwrap();
    assert!(traces.starts_with(&format!("# config_hash={}\n", m["config_hash"].as_str().unwrap())));
    assert_eq!(traces.lines().count(), 2 + 3 * 3);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    let s = trapflow().args(["aging", "--config"]).arg(&missing).status().unwrap();
    assert_eq!(s.code(), Some(74));

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, CONFIG.replace("beta", "betta")).unwrap();
    let s = trapflow().args(["simulate", "--config"]).arg(&bad).arg("--out").arg(dir.path()).status().unwrap();
    assert_eq!(s.code(), Some(64));

    // The aging subcommand needs an [aging] block.
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, CONFIG).unwrap();
    let s = trapflow().args(["aging", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).status().unwrap();
    assert_eq!(s.code(), Some(64));
}

#[test]
fn report_prints_scales() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, CONFIG).unwrap();
    let out = trapflow().args(["report", "--config"]).arg(&cfg).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let log_g = v["scales"]["log_g_n"].as_f64().unwrap();
    assert!((log_g - 0.3 * 4.0 * 10.0).abs() < 1e-12);
    assert_eq!(v["admissibility"]["admissible"], true);
}
