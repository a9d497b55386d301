use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fermi_ot::lowdim::dim1_distance;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fermi-ot"));
    // keep the caller's environment from leaking into option resolution
    for (k, _) in std::env::vars() {
        if k.starts_with("FERMI_OT_") {
            c.env_remove(k);
        }
    }
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn one_mode(dir: &Path, name: &str, y: f64) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, format!(r#"{{"n": 1, "coeffs": [{{"mask": 0, "re": 1.0}}, {{"mask": 1, "re": {y}}}]}}"#))
        .unwrap();
    p
}

/// Header and numeric rows of a CSV file.
fn read_table(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|x| x.parse().unwrap_or(f64::NAN)).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn flow_of_identity_has_zero_entropy() {
    let dir = TempDir::new().unwrap();
    one_mode(dir.path(), "id.json", 0.0);
    let o = run(dir.path(), &["flow", "--input", "id.json", "--out", "f.csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_table(&dir.path().join("f.csv"));
    let s = column(&h, "entropy");
    assert_eq!(rows.len(), 21);
    assert!(rows.iter().all(|r| r[s].abs() < 1e-15));
}

#[test]
fn flow_entropy_respects_decay_bound() {
    let dir = TempDir::new().unwrap();
    one_mode(dir.path(), "a.json", -0.7);
    let o = run(dir.path(), &["flow", "--input", "a.json", "--out", "f.csv", "--t-max", "3", "--steps", "30"]);
    assert_eq!(code(&o), 0);
    let (h, rows) = read_table(&dir.path().join("f.csv"));
    let (t, s, b) = (column(&h, "t"), column(&h, "entropy"), column(&h, "entropy_decay_bound"));
    assert_eq!(rows[0][t], 0.0);
    // entropy of 1 + y Q1 with eigenvalues 1 +- y
    let y: f64 = 0.7;
    let s0 = 0.5 * ((1.0 + y) * (1.0 + y).ln() + (1.0 - y) * (1.0 - y).ln());
    assert!((rows[0][s] - s0).abs() < 1e-14);
    for r in &rows {
        assert!(r[s] <= r[b] + 1e-14, "t = {}", r[t]);
    }
    assert!((rows.last().unwrap()[t] - 3.0).abs() < 1e-15);
}

#[test]
fn distance_of_identical_inputs_is_zero() {
    let dir = TempDir::new().unwrap();
    one_mode(dir.path(), "a.json", 0.4);
    let o = run(dir.path(), &["distance", "--input", "a.json", "--input2", "a.json", "--out", "d.json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&dir.path().join("d.json"))["distance"], 0.0);
}

#[test]
fn one_mode_distance_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    one_mode(dir.path(), "a.json", 0.5);
    one_mode(dir.path(), "b.json", -0.3);
    let o = run(dir.path(), &["distance", "--input", "a.json", "--input2", "b.json", "--out", "d.json"]);
    assert_eq!(code(&o), 0);
    let v = json(&dir.path().join("d.json"));
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["is_upper_bound"], false);
    let d = v["distance"].as_f64().unwrap();
    assert!((d - dim1_distance(0.5, -0.3).unwrap().abs()).abs() < 1e-6, "{d}");
}

#[test]
fn boundary_distance_is_regularised() {
    let dir = TempDir::new().unwrap();
    one_mode(dir.path(), "a.json", 1.0);
    one_mode(dir.path(), "b.json", -0.5);
    let o = run(dir.path(), &["distance", "--input", "a.json", "--input2", "b.json", "--out", "d.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&dir.path().join("d.json"));
    assert_eq!(v["regularization_used"].as_array().unwrap().len(), 3);
    let d = v["distance"].as_f64().unwrap();
    let closed = dim1_distance(1.0, -0.5).unwrap().abs();
    assert!((d - closed).abs() < 1e-3, "{d} vs {closed}");
}

#[test]
fn geodesic_hits_both_endpoints() {
    let dir = TempDir::new().unwrap();
    one_mode(dir.path(), "a.json", 0.5);
    one_mode(dir.path(), "b.json", -0.3);
    let o = run(dir.path(), &["geodesic", "--input", "a.json", "--input2", "b.json", "--out", "g.csv", "--steps", "8"]);
    assert_eq!(code(&o), 0);
    let (h, rows) = read_table(&dir.path().join("g.csv"));
    let c = column(&h, "rho_1");
    assert!((rows[0][c] - 0.5).abs() < 1e-12);
    assert!((rows.last().unwrap()[c] + 0.3).abs() < 1e-8);
}

#[test]
fn geodesic_rejects_boundary_endpoint() {
    let dir = TempDir::new().unwrap();
    one_mode(dir.path(), "a.json", 1.0);
    one_mode(dir.path(), "b.json", 0.0);
    let o = run(dir.path(), &["geodesic", "--input", "a.json", "--input2", "b.json"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn malformed_and_invalid_inputs_exit_two() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{not json").unwrap();
    one_mode(dir.path(), "neg.json", 1.5);
    one_mode(dir.path(), "a.json", 0.1);
    for args in [
        &["distance", "--input", "bad.json", "--input2", "a.json"][..],
        &["distance", "--input", "neg.json", "--input2", "a.json"],
        &["distance", "--input", "missing.json", "--input2", "a.json"],
        &["distance", "--input", "a.json"],
        &["flow", "--input", "a.json", "--n", "2"],
        &["flow", "--input", "a.json", "--eps-list", "0.1,0.2"],
        &["flow", "--no-such-flag"],
    ] {
        let o = run(dir.path(), args);
        assert_eq!(code(&o), 2, "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn hessian_is_reproducible_and_convex() {
    let dir = TempDir::new().unwrap();
    for n in ["1", "2"] {
        let mut outputs = Vec::new();
        for sub in ["first", "second"] {
            let sub = dir.path().join(sub);
            std::fs::create_dir_all(&sub).unwrap();
            let o = run(&sub, &["hessian", "--n", n, "--samples", "40", "--seed", "11", "--out", "h.csv"]);
            assert_eq!(code(&o), 0);
            outputs.push(std::fs::read(sub.join("h.csv")).unwrap());
        }
        assert_eq!(outputs[0], outputs[1]);
        let (h, rows) = read_table(&dir.path().join("first/h.csv"));
        let m = column(&h, "min_rel_eig");
        assert_eq!(rows.len(), 40);
        assert!(rows.iter().all(|r| r[m] >= 1.0 - 1e-6), "n = {n}");
    }
    let witness = json(&dir.path().join("first/h.witness.json"));
    assert_eq!(witness["n"], 2);
}

#[test]
fn verify_passes_and_detects_injected_bug() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["verify", "--samples", "4", "--out", "v.csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("v.csv")).unwrap();
    assert!(!text.contains(",fail,"));

    let o = run(
        dir.path(),
        &["verify", "--samples", "2", "--n", "1", "--inject-bug", "negated-kernel", "--out", "w.csv"],
    );
    assert_eq!(code(&o), 1);
    let text = std::fs::read_to_string(dir.path().join("w.csv")).unwrap();
    let failing: Vec<_> = text.lines().filter(|l| l.contains(",fail,")).collect();
    assert_eq!(failing.len(), 2);
    assert!(failing.iter().all(|l| l.contains(",inversion,")));
    let w = json(&dir.path().join("verify-witness-inversion-n1-0.json"));
    assert_eq!(w["check"], "inversion");
    for name in ["a", "b", "c"] {
        assert_eq!(w["elements"][name]["n"], 1);
    }
}

#[test]
fn sweep_essential_margins_are_nonnegative() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["sweep-essential", "--samples", "201", "--out", "s.csv"]);
    assert_eq!(code(&o), 0);
    let (h, rows) = read_table(&dir.path().join("s.csv"));
    assert_eq!(rows.len(), 201);
    let first = column(&h, "gamma_nonneg");
    assert!(rows.iter().all(|r| r[first..].iter().all(|m| *m >= 0.0)));
}

#[test]
fn option_precedence_is_flag_env_file() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("c.toml"), "samples = 3\nn = 1\nseed = 5\n").unwrap();
    let rows = |o: &Output, out: &str| {
        assert_eq!(code(o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        read_table(&dir.path().join(out)).1
    };

    let o = run(dir.path(), &["hessian", "--config", "c.toml", "--out", "a.csv"]);
    let a = rows(&o, "a.csv");
    assert_eq!(a.len(), 3);
    assert!(a.iter().all(|r| r[2] == 5.0 && r[3] == 1.0));

    let o = bin()
        .current_dir(dir.path())
        .env("FERMI_OT_SAMPLES", "4")
        .args(["hessian", "--config", "c.toml", "--out", "b.csv"])
        .output()
        .unwrap();
    assert_eq!(rows(&o, "b.csv").len(), 4);

    let o = bin()
        .current_dir(dir.path())
        .env("FERMI_OT_SAMPLES", "4")
        .env("FERMI_OT_CONFIG", "c.toml")
        .args(["hessian", "--samples", "6", "--out", "c.csv"])
        .output()
        .unwrap();
    let c = rows(&o, "c.csv");
    assert_eq!(c.len(), 6);
    assert!(c.iter().all(|r| r[2] == 5.0));

    std::fs::write(dir.path().join("bad.toml"), "smaples = 3\n").unwrap();
    assert_eq!(code(&run(dir.path(), &["hessian", "--config", "bad.toml"])), 2);
}
