use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const N: usize = 1024;
const L: f64 = 2.0;

fn x(i: usize) -> f64 {
    -L + i as f64 * 2.0 * L / N as f64
}

fn indicator(height: f64) -> Vec<f64> {
    (0..N)
        .map(|i| if (0.0..1.0).contains(&x(i)) { height } else { 0.0 })
        .collect()
}

fn vexp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vexp"))
        .args(args)
        .output()
        .expect("spawn vexp")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    assert_eq!(code(o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("json report")
}

struct Work {
    dir: TempDir,
}

impl Work {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn file(&self, name: &str, text: &str) -> String {
        let p = self.path(name);
        fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    }

    fn config(&self, p: &str, q: &str) -> String {
        self.file(
            "c.json",
            &format!(r#"{{"exponents": {{"p": {{"kind": "constant", "value": {p}}}, "q": {{"kind": "constant", "value": {q}}}}}}}"#),
        )
    }

    fn function(&self, name: &str, v: &[f64]) -> String {
        self.file(name, &v.iter().map(|a| format!("{a}\n")).collect::<String>())
    }

    fn columns(&self, name: &str, cols: &[Vec<f64>]) -> String {
        let text: String = (0..N)
            .map(|i| cols.iter().map(|c| c[i].to_string()).collect::<Vec<_>>().join(",") + "\n")
            .collect();
        self.file(name, &text)
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1e-300)
}

#[test]
fn norm_lp_of_scaled_indicator() {
    let w = Work::new();
    let c = w.config("2", "2");
    let f = w.function("f.csv", &indicator(2.0));
    let r = json(&vexp(&["norm", "lp", "--config", &c, "--input", &f]));
    assert!(close(r["value"].as_f64().unwrap(), 2.0, 1e-8), "{r}");
    assert_eq!(r["space"], "lp");
    assert!(r["condition_tag"].is_null());
    assert!(r["iterations"].as_u64().unwrap() > 0);
}

#[test]
fn norm_mixed_of_two_indicators() {
    let w = Work::new();
    let c = w.config("2", "2");
    let f = w.columns("f.csv", &[indicator(1.0), indicator(1.0)]);
    let r = json(&vexp(&["norm", "mixed", "--config", &c, "--input", &f]));
    assert!(close(r["value"].as_f64().unwrap(), 2f64.sqrt(), 1e-8), "{r}");
    assert_eq!(r["condition_tag"], "COND1");
}

#[test]
fn norm_besov_plancherel() {
    let w = Work::new();
    let c = w.config("2", "2");
    // A few sub-Nyquist modes; with s = 0 and p = q = 2 the norm is the L2 norm.
    let v: Vec<f64> = (0..N)
        .map(|i| {
            let t = std::f64::consts::PI * x(i) / L;
            (3.0 * t).sin() + 0.5 * (40.0 * t).cos() + 0.1 * (200.0 * t).sin()
        })
        .collect();
    let l2 = (v.iter().map(|a| a * a).sum::<f64>() * 2.0 * L / N as f64).sqrt();
    let f = w.function("f.csv", &v);
    let r = json(&vexp(&["norm", "besov", "--config", &c, "--input", &f]));
    assert!(close(r["value"].as_f64().unwrap(), l2, 1e-8), "{r} vs {l2}");
}

#[test]
fn modular_forms_agree() {
    let w = Work::new();
    let c = w.config("2", "2");
    let f = w.columns("f.csv", &[indicator(2.0), indicator(1.0)]);
    let p1 = json(&vexp(&["modular", "p1", "--config", &c, "--input", &f]));
    let p1a = json(&vexp(&["modular", "p1a", "--config", &c, "--input", &f]));
    let per: Vec<f64> = p1["per_term"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!(close(per[0], 4.0, 1e-8) && close(per[1], 1.0, 1e-8), "{p1}");
    assert!(close(p1["value"].as_f64().unwrap(), 5.0, 1e-8));
    assert!(close(p1a["value"].as_f64().unwrap(), 5.0, 1e-8));
}

#[test]
fn dual_zero_and_hilbert() {
    let w = Work::new();
    let c = w.config("2", "2");
    let zero = w.columns("z.csv", &[vec![0.0; N]]);
    let r = json(&vexp(&["dual", "--config", &c, "--input", &zero]));
    assert_eq!(r["value"].as_f64().unwrap(), 0.0);

    let smooth: Vec<f64> = (0..N).map(|i| 0.5 * (x(i) * 2.0).cos()).collect();
    let g = w.columns("g.csv", &[indicator(1.5), smooth.clone()]);
    let want = (2.25 + smooth.iter().map(|a| a * a).sum::<f64>() * 2.0 * L / N as f64).sqrt();
    let r = json(&vexp(&["dual", "--config", &c, "--input", &g, "--method", "ascent"]));
    assert!(close(r["value"].as_f64().unwrap(), want, 1e-3), "{r} vs {want}");
    assert_eq!(r["method"], "ASCENT");
    assert!(r["starts"].as_u64().unwrap() >= 1);
    assert!(r.get("certificate_gap").is_some());
}

#[test]
fn dual_brute_refuses_large_instances() {
    let w = Work::new();
    let c = w.config("2", "2");
    let g = w.columns("g.csv", &[indicator(1.0)]);
    let o = vexp(&["dual", "--config", &c, "--input", &g, "--method", "brute"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn dual_brute_on_a_tiny_grid() {
    let w = Work::new();
    let c = w.file(
        "c.json",
        r#"{"grid": {"L": 1.0, "n_points": 8},
            "exponents": {"p": {"kind": "table", "values": [1.5, 2, 2.5, 3, 1.7, 2.2, 2.9, 1.4]},
                          "q": {"kind": "constant", "value": 1.8}}}"#,
    );
    let g = w.file("g.csv", "1\n0\n-0.5\n0\n0\n2\n0\n0\n");
    let b = json(&vexp(&["dual", "--config", &c, "--input", &g, "--method", "brute"]));
    let a = json(&vexp(&["dual", "--config", &c, "--input", &g, "--method", "ascent"]));
    assert_eq!(b["method"], "BRUTE");
    assert!(close(b["value"].as_f64().unwrap(), a["value"].as_f64().unwrap(), 0.02));
    assert!(b["certificate_gap"].as_f64().unwrap() < 0.02);
}

#[test]
fn io_and_config_errors_exit_2() {
    let w = Work::new();
    let c = w.config("2", "2");
    let missing = w.path("nope.csv");
    assert_eq!(
        code(&vexp(&[
            "norm",
            "lp",
            "--config",
            &c,
            "--input",
            missing.to_str().unwrap()
        ])),
        2
    );
    let bad = w.file("bad.json", r#"{"grid": {"L": 1, "n_points": 100}}"#);
    let f = w.function("f.csv", &indicator(1.0));
    assert_eq!(code(&vexp(&["norm", "lp", "--config", &bad, "--input", &f])), 2);
    let short = w.function("short.csv", &[1.0, 2.0]);
    assert_eq!(code(&vexp(&["norm", "lp", "--config", &c, "--input", &short])), 2);
    assert_eq!(code(&vexp(&["verify", "--samples", "0"])), 2);
    assert_eq!(code(&vexp(&["verify", "--suite", "bogus", "--samples", "1"])), 2);
}

#[test]
fn not_normable_is_numerical() {
    let w = Work::new();
    let c = w.file(
        "c.json",
        r#"{"exponents": {"p": {"kind": "constant", "value": 1.1},
                          "q": {"kind": "affine", "a": 1.5, "b": 0.2}}}"#,
    );
    let g = w.columns("g.csv", &[indicator(1.0)]);
    assert_eq!(code(&vexp(&["dual", "--config", &c, "--input", &g])), 3);
}

fn verify_csv(args: &[&str], out: &Path) -> (i32, String) {
    let mut all = vec!["verify", "--out", out.to_str().unwrap()];
    all.extend_from_slice(args);
    let o = vexp(&all);
    (code(&o), fs::read_to_string(out).unwrap_or_default())
}

#[test]
fn verify_report_is_deterministic() {
    let w = Work::new();
    let args = ["--suite", "exponents,lebesgue", "--seed", "7", "--samples", "5"];
    let (c1, a) = verify_csv(&args, &w.path("a.csv"));
    let (c2, b) = verify_csv(&args, &w.path("b.csv"));
    assert_eq!((c1, c2), (0, 0), "{a}");
    assert_eq!(a, b);
    assert!(a.starts_with("suite,property,samples,failures,worst_margin\n"));
    let (_, other) = verify_csv(
        &["--suite", "exponents,lebesgue", "--seed", "8", "--samples", "5"],
        &w.path("c.csv"),
    );
    assert_ne!(a, other);
}

#[test]
fn verify_catches_skipped_normalisation() {
    let w = Work::new();
    let (c, csv) = verify_csv(
        &[
            "--suite",
            "besov",
            "--samples",
            "2",
            "--inject",
            "skip-filter-normalization",
        ],
        &w.path("r.csv"),
    );
    assert_eq!(c, 1);
    let row = csv
        .lines()
        .find(|l| l.starts_with("besov,partition_of_unity,"))
        .unwrap();
    assert!(!row.contains(",2,0,"), "{row}");
}

#[test]
fn filters_export_has_one_row_per_bin() {
    let w = Work::new();
    let c = w.file("c.json", r#"{"grid": {"L": 2, "n_points": 64}}"#);
    let out = w.path("filters.csv");
    let o = vexp(&["filters", "export", "--config", &c, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("bin,frequency,Phi_hat"), "{header}");
    assert_eq!(lines.count(), 33);
}
