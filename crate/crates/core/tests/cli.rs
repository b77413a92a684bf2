use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use derlab::LinearMapOnAlgebra;
use tempfile::TempDir;

fn derlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_derlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn model(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn info_reports_dimensions() {
    let dir = TempDir::new().unwrap();
    let m = model(dir.path(), "m.json", r#"{"fibers": [2, 3]}"#);
    let out = derlab(&["info", "--model", m.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(
        text.contains("D = 13")
            && text.contains("k = 2")
            && text.contains("expected derivation dimension = 11"),
        "{text}"
    );

    let m = model(dir.path(), "one.json", r#"{"fibers": [1]}"#);
    let text = stdout(&derlab(&["info", "--model", m.to_str().unwrap()]));
    assert!(
        text.contains("D = 1") && text.contains("expected derivation dimension = 0"),
        "{text}"
    );

    let m = model(dir.path(), "empty.json", r#"{"fibers": []}"#);
    assert_eq!(
        derlab(&["info", "--model", m.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn verify_all_single_fiber() {
    let dir = TempDir::new().unwrap();
    let m = model(dir.path(), "m.json", r#"{"fibers": [2], "seed": 11}"#);
    let r1 = dir.path().join("r1.json");
    let r2 = dir.path().join("r2.json");
    let start = std::time::Instant::now();
    let out = derlab(&[
        "verify",
        "--model",
        m.to_str().unwrap(),
        "--json",
        r1.to_str().unwrap(),
    ]);
    assert!(start.elapsed().as_secs_f64() < 10.0);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    derlab(&[
        "verify",
        "--model",
        m.to_str().unwrap(),
        "--json",
        r2.to_str().unwrap(),
    ]);
    assert_eq!(std::fs::read(&r1).unwrap(), std::fs::read(&r2).unwrap());
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&r1).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
}

#[test]
fn verify_derivations_dimension_and_tolerance() {
    let dir = TempDir::new().unwrap();
    let m = model(dir.path(), "m.json", r#"{"fibers": [2, 3]}"#);
    let r = dir.path().join("r.json");
    let out = derlab(&[
        "verify",
        "--model",
        m.to_str().unwrap(),
        "--suite",
        "derivations",
        "--json",
        r.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&r).unwrap()).unwrap();
    assert_eq!(report["checks"][0]["dimension"], 11);

    let out = derlab(&[
        "verify",
        "--model",
        m.to_str().unwrap(),
        "--suite",
        "derivations",
        "--tol",
        "1e-15",
        "--json",
        r.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&r).unwrap()).unwrap();
    assert_eq!(report["checks"][0]["failure_kind"], "RankAmbiguous");

    let out = derlab(&["verify", "--model", m.to_str().unwrap(), "--suite", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_map_modes() {
    let dir = TempDir::new().unwrap();
    let m = model(dir.path(), "m.json", r#"{"fibers": [2, 1], "seed": 4}"#);
    let m = m.to_str().unwrap();
    let map = dir.path().join("inner.json");
    assert!(
        derlab(&["export-map", "--model", m, "--out", map.to_str().unwrap()])
            .status
            .success()
    );
    for mode in ["derivation", "local", "generalized", "twolocal"] {
        let out = derlab(&[
            "check-map",
            "--model",
            m,
            "--map",
            map.to_str().unwrap(),
            "--mode",
            mode,
        ]);
        assert_eq!(out.status.code(), Some(0), "{mode}: {}", stdout(&out));
    }

    let id = dir.path().join("id.json");
    std::fs::write(
        &id,
        serde_json::to_string(&LinearMapOnAlgebra::identity(5)).unwrap(),
    )
    .unwrap();
    let out = derlab(&[
        "check-map",
        "--model",
        m,
        "--map",
        id.to_str().unwrap(),
        "--mode",
        "derivation",
    ]);
    assert_eq!(out.status.code(), Some(1));

    let text = std::fs::read_to_string(&map).unwrap();
    let truncated = dir.path().join("truncated.json");
    std::fs::write(&truncated, &text[..text.len() / 2]).unwrap();
    let out = derlab(&[
        "check-map",
        "--model",
        m,
        "--map",
        truncated.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    let small = dir.path().join("small.json");
    std::fs::write(
        &small,
        serde_json::to_string(&LinearMapOnAlgebra::identity(4)).unwrap(),
    )
    .unwrap();
    let out = derlab(&["check-map", "--model", m, "--map", small.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("DimensionMismatch"));
}
