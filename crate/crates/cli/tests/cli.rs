use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn fraclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fraclab"))
        .args(args)
        .env_remove("FRACLAB_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Data rows of a TSV output.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| l.split('\t').map(String::from).collect())
        .collect()
}

#[test]
fn compare_reports_six_small_errors() {
    let ring = fixture("ring10.json");
    let f = fixture("rand_ring10.tsv");
    let o = fraclab(&[
        "frac",
        "compare",
        "--space",
        ring.to_str().unwrap(),
        "--s",
        "0.5",
        "--f",
        f.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = rows(&stdout(&o));
    assert_eq!(table.len(), 1);
    assert_eq!(table[0].len(), 7);
    for v in &table[0][1..] {
        assert!(v.parse::<f64>().unwrap() <= 1e-3);
    }
}

#[test]
fn missing_flag_is_a_usage_error() {
    let ring = fixture("ring10.json");
    let o = fraclab(&["frac", "compare", "--space", ring.to_str().unwrap(), "--f", "x.tsv"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("--s"), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
}

#[test]
fn constant_string_psi_at_one() {
    let o = fraclab(&["krein", "psi", "--string", "constant", "--lmin", "1", "--lmax", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let table = rows(&stdout(&o));
    assert_eq!(table.len(), 1);
    assert_eq!(table[0][0], "1");
    assert!((table[0][1].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn bad_inputs_exit_two_and_numeric_failures_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"vertices\": [{\"id\": \"a\"").unwrap();
    let o = fraclab(&["space", "--space", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = fraclab(&[
        "frac",
        "apply",
        "--space",
        "/no/such.json",
        "--s",
        "0.5",
        "--f",
        "/no/f.tsv",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = fraclab(&[
        "krein",
        "psi",
        "--string",
        r#"{"kind":"powerlaw","beta":60}"#,
        "--lmin",
        "0.01",
        "--lmax",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("RiccatiBlowup"));
    let o = fraclab(&["accept", "--fixtures", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("FixtureMissing"));
}

#[test]
fn outputs_are_deterministic_and_echo_config() {
    let ring = fixture("ring64.json");
    let args = [
        "harnack",
        "run",
        "--space",
        ring.to_str().unwrap(),
        "--s",
        "0.5",
        "--ball",
        "0:8",
        "--delta",
        "0.5",
        "--trials",
        "30",
        "--seed",
        "7",
    ];
    let a = fraclab(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_fraclab"))
        .args(args)
        .env("FRACLAB_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let doc: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["format_version"], 1);
    assert_eq!(doc["config"]["seed"], 7);
    assert!(doc["trial_table"].as_str().unwrap().contains("# label\tvalue"));
    assert!(doc["report"]["constant"].as_f64().unwrap() >= 1.0);

    let bad = Command::new(env!("CARGO_BIN_EXE_fraclab"))
        .args(args)
        .env("FRACLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn extension_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("field.tsv");
    let (ring, f) = (fixture("ring10.json"), fixture("rand_ring10.tsv"));
    let (ring, f) = (ring.to_str().unwrap(), f.to_str().unwrap());
    let o = fraclab(&[
        "extend",
        "solve",
        "--space",
        ring,
        "--f",
        f,
        "--s",
        "0.5",
        "--N",
        "256",
        "--Y",
        "auto",
        "--out",
        field.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&field).unwrap();
    assert!(text.starts_with("# fraclab format_version=1\n# config "));
    assert_eq!(rows(&text).len(), 10 * 257);
    let dtn = fraclab(&["extend", "dtn", "--field", field.to_str().unwrap(), "--space", ring]);
    let exact = fraclab(&["frac", "apply", "--space", ring, "--s", "0.5", "--f", f]);
    let (a, b) = (rows(&stdout(&dtn)), rows(&stdout(&exact)));
    let scale = b.iter().map(|r| r[1].parse::<f64>().unwrap().abs()).fold(0.0, f64::max);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x[0], y[0]);
        let (x, y): (f64, f64) = (x[1].parse().unwrap(), y[1].parse().unwrap());
        assert!((x - y).abs() <= 2e-3 * scale);
    }
}

#[test]
fn builtin_space_and_geometry() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("ring32.json");
    let o = fraclab(&["space", "--builtin", "ring32", "--out", g.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = fraclab(&[
        "geometry",
        "doubling",
        "--space",
        g.to_str().unwrap(),
        "--centers",
        "0,8",
        "--radii",
        "1,2,4",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    // Ring balls hold 2r + 1 vertices, so the worst ratio is (4r+1)/(2r+1) at r = 4.
    assert!((doc["report"]["constant"].as_f64().unwrap() - 17.0 / 9.0).abs() < 1e-12);
    let o = fraclab(&[
        "geometry",
        "poincare",
        "--space",
        g.to_str().unwrap(),
        "--centers",
        "0",
        "--radii",
        "2",
        "--a",
        "-0.5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn boundary_harnack_and_acceptance_subset() {
    let o = fraclab(&[
        "bharnack",
        "run",
        "--geometry",
        "grid24-l16",
        "--s",
        "0.5",
        "--xi",
        "reentrant",
        "--r",
        "2",
        "--trials",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(doc["report"]["constant"].as_f64().unwrap().is_finite());

    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("summary.json");
    let fixtures = fixture("");
    let o = fraclab(&[
        "accept",
        "--fixtures",
        fixtures.to_str().unwrap(),
        "--only",
        "3,4",
        "--out",
        json.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.contains(": PASS")).count(), 2);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(summary["passed"], true);
}
