use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn freedisk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freedisk")).args(args).output().expect("binary runs")
}

fn run_with(config: &serde_json::Value, cmd: &str, out: &Path) -> Output {
    let path = out.with_extension("json");
    std::fs::write(&path, serde_json::to_string(config).unwrap()).unwrap();
    freedisk(&[cmd, "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap(), "--quiet"])
}

fn flat() -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(scenarios().join("flat_torus.json")).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn malformed_configs_exit_2_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<(&str, Box<dyn Fn(&mut serde_json::Value)>)> = vec![
        ("epsilon9", Box::new(|c| c["thresholds"]["epsilon9"] = 1.0.into())),
        ("thresholds.epsilon3", Box::new(|c| c["thresholds"]["epsilon3"] = 0.2.into())),
        ("thresholds.epsilon1", Box::new(|c| c["thresholds"]["epsilon1"] = 0.2.into())),
        ("format", Box::new(|c| c["format"] = 2.into())),
        ("h", Box::new(|c| c["h"] = 0.9.into())),
        ("mode", Box::new(|c| c["mode"] = "fixed_boundary".into())),
        ("family", Box::new(|c| c["family"] = serde_json::json!({ "family": "sphere_fold" }))),
        ("solver.tol_grad", Box::new(|c| c["solver"] = serde_json::json!({ "tol_grad": -1.0 }))),
        ("constraint.k", Box::new(|c| c["constraint"]["k"] = 3.into())),
    ];
    for (k, (key, edit)) in cases.iter().enumerate() {
        let mut c = flat();
        edit(&mut c);
        let o = run_with(&c, "mesh", &dir.path().join(format!("bad{k}")));
        assert_eq!(o.status.code(), Some(2), "{key}: {}", stderr(&o));
        let err = stderr(&o);
        assert_eq!(err.trim().lines().count(), 1, "{err}");
        assert!(err.contains(key), "{key} not in {err}");
    }
    let o = freedisk(&["mesh", "--config", "/nonexistent.json"]);
    assert_eq!(o.status.code(), Some(2));
    let o = freedisk(&["mesh"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--config"));
}

#[test]
fn mesh_and_solve_write_versioned_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("solve");
    let o = run_with(&flat(), "solve", &out);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["solution.txt", "energy.csv", "telemetry.json", "scenario.json", "run.json"] {
        let text = std::fs::read_to_string(out.join(f)).unwrap();
        assert!(text.contains("format"), "{f}");
    }
    let run: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("run.json")).unwrap()).unwrap();
    assert_eq!(run["format"], 1);
    assert_eq!(run["command"], "solve");
    assert_eq!(run["config_sha256"].as_str().unwrap().len(), 64);
    assert!(run["artifacts"].as_array().unwrap().len() >= 4);

    let out = dir.path().join("mesh");
    let o = run_with(&flat(), "mesh", &out);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(out.join("mesh.txt")).unwrap().starts_with("mesh v="));
}

#[test]
fn solver_failure_exits_3_with_partial_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = flat();
    c["solver"] = serde_json::json!({ "max_iters": 2, "tol_grad": 1e-14 });
    let out = dir.path().join("fail");
    let o = run_with(&c, "solve", &out);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(out.join("solution.txt").exists());
    assert!(out.join("run.json").exists());
}

#[test]
fn verify_on_flat_torus_passes() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = flat();
    c["verify"]["cases"] = 6.into();
    let out = dir.path().join("verify");
    let o = run_with(&c, "verify", &out);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("verify.csv")).unwrap();
    assert!(csv.starts_with("# format: 1\ncheck,"));
    assert!(!csv.contains(",false,"));
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("verify.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], true);
}

#[test]
fn replace_and_tighten_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = flat();
    c["balls"] = serde_json::json!([
        { "kind": { "kind": "classical", "center": [0.0, 0.0], "radius": 0.4 }, "shrink": 1.0 },
        { "kind": { "kind": "boundary", "angle": 2.0, "radius": 0.3 }, "shrink": 1.0 }
    ]);
    let o = run_with(&c, "replace", &dir.path().join("replace"));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = run_with(&c, "tighten", &dir.path().join("tighten"));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("tighten/sweepout/manifest.json").exists());
}

#[test]
fn bubbles_needs_a_sequence() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(&flat(), "bubbles", &dir.path().join("b"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sequence"));
}

#[test]
fn tighten_archive_feeds_bubbles_and_reruns_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let hashes = |out: &Path| freedisk_cli::commands::artifact_hashes(out);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        assert_eq!(run_with(&flat(), "tighten", out).status.code(), Some(0));
        let archive = out.join("sweepout");
        let cfg = out.with_extension("json");
        let o = freedisk(&["bubbles", archive.to_str().unwrap(), "--config", cfg.to_str().unwrap(), "--out", out.join("tree").to_str().unwrap(), "--quiet"]);
        assert!(matches!(o.status.code(), Some(0) | Some(3)), "{}", stderr(&o));
        assert!(out.join("tree/bubbles.json").exists());
    }
    let (ha, hb) = (hashes(&a), hashes(&b));
    assert!(ha.len() > 5);
    let strip = |v: Vec<(String, String)>| v.into_iter().filter(|(f, _)| !f.ends_with("run.json")).collect::<Vec<_>>();
    assert_eq!(strip(ha), strip(hb));
}
