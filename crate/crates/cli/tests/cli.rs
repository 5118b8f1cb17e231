use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn vqe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vqe")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const TWO_QUBIT: &str = "# two-qubit test operator\n-0.4 II\n0.3 ZI\n-0.2 IZ\n0.5 XX\n0.1 YY\n";

#[test]
fn runs_are_byte_identical_for_a_seed() {
    let dir = TempDir::new().unwrap();
    let h = write(dir.path(), "h.txt", TWO_QUBIT);
    let run = |out: &str| {
        let o = vqe(&[
            "run", "--mode", "vqe", "--hamiltonian", &h, "--shots", "200", "--seed", "11", "--out", out,
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read(Path::new(out).join("trace.csv")).unwrap()
    };
    let a = run(dir.path().join("a").to_str().unwrap());
    let b = run(dir.path().join("b").to_str().unwrap());
    assert_eq!(a, b);
    let header = String::from_utf8(a).unwrap().lines().next().unwrap().to_string();
    assert!(header.starts_with("j,"), "{header}");
    assert!(dir.path().join("a/summary.json").exists());
    assert!(dir.path().join("a/config.json").exists());
}

/// `H(R) = E(R) II + a ZI + b XI` has ground energy `E(R) - sqrt(a^2 + b^2)`.
#[test]
fn scan_writes_curve_and_fit() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (0.3, 0.4);
    let energy = |r: f64| 0.5 * (r - 1.5) * (r - 1.5) - 1.0;
    let rs = [1.0, 1.25, 1.5, 1.75, 2.0];
    let entries: Vec<String> = rs
        .iter()
        .map(|&r| format!(r#"{{"R": {r}, "terms": [[{}, "II"], [{a}, "ZI"], [{b}, "XI"]]}}"#, energy(r)))
        .collect();
    let scan = write(dir.path(), "scan.json", &format!("[{}]", entries.join(",")));
    let out = dir.path().join("out");
    let o = vqe(&[
        "run", "--mode", "scan", "--scan", &scan, "--exact", "--seed", "3", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));

    let curve = fs::read_to_string(out.join("curve.csv")).unwrap();
    let mut lines = curve.lines();
    assert_eq!(lines.next().unwrap(), "R,E_est,E_exact,std_error");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 5);
    for (row, &r) in rows.iter().zip(&rs) {
        let oracle = energy(r) - f64::hypot(a, b);
        assert_eq!(row[0], r);
        assert!((row[2] - oracle).abs() < 1e-9, "{} vs {oracle}", row[2]);
        assert!((row[1] - oracle).abs() < 1e-6);
    }
    let fit: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("fit.json")).unwrap()).unwrap();
    let r_min = fit["r_min"].as_f64().unwrap();
    assert!((r_min - 1.5).abs() < 1e-3, "{r_min}");
    for i in 0..5 {
        assert!(out.join(format!("points/point_{i}/trace.csv")).exists());
    }
}

#[test]
fn inconsistent_labels_name_the_line() {
    let dir = TempDir::new().unwrap();
    let h = write(dir.path(), "bad.txt", "1.0 ZZ\n0.5 XYZ\n");
    let o = vqe(&["validate", "--mode", "vqe", "--hamiltonian", &h, "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("bad.txt:2:") && err.contains("XYZ"), "{err}");
}

#[test]
fn empty_hamiltonian_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let h = write(dir.path(), "empty.txt", "# nothing here\n\n");
    let o = vqe(&["validate", "--mode", "vqe", "--hamiltonian", &h, "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no terms"));
}

#[test]
fn validate_reports_the_precision_cost() {
    let dir = TempDir::new().unwrap();
    let h = write(dir.path(), "z.txt", "1.0 Z\n");
    let o = vqe(&["validate", "--mode", "vqe", "--hamiltonian", &h, "--precision", "0.01", "--seed", "1", "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["hamiltonians"][0]["shots_per_evaluation"], 10_000);
    let text = vqe(&["validate", "--mode", "vqe", "--hamiltonian", &h, "--precision", "0.01", "--seed", "1"]);
    assert!(String::from_utf8_lossy(&text.stdout).contains("10000"));
}

#[test]
fn flags_override_the_config_file() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "h.txt", TWO_QUBIT);
    let cfg = write(
        dir.path(),
        "run.json",
        r#"{"mode": "vqe", "hamiltonian": "h.txt", "policy": "shots:50", "seed": 1, "layers": 1}"#,
    );
    let out = dir.path().join("out");
    let o = vqe(&["run", "--config", &cfg, "--exact", "--layers", "2", "--seed", "9", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let written: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(written["policy"], "exact");
    assert_eq!(written["layers"], 2);
    assert_eq!(written["seed"], 9);
    // Relative input paths resolve against the config file's directory.
    let o = vqe(&["validate", "--config", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn missing_seed_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let h = write(dir.path(), "h.txt", TWO_QUBIT);
    let out = dir.path().join("out");
    let o = vqe(&["run", "--mode", "vqe", "--hamiltonian", &h, "--exact", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("seed"));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let h = write(dir.path(), "h.txt", TWO_QUBIT);
    let blocker = write(dir.path(), "blocker", "");
    let out = format!("{blocker}/out");
    let o = vqe(&["run", "--mode", "vqe", "--hamiltonian", &h, "--exact", "--seed", "1", "--out", &out]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn folded_run_writes_one_directory_per_shift() {
    let dir = TempDir::new().unwrap();
    let h = write(dir.path(), "diag.txt", "0.5 II\n-1.0 ZI\n-0.5 IZ\n");
    let out = dir.path().join("out");
    let o = vqe(&[
        "run", "--mode", "folded", "--hamiltonian", &h, "--exact", "--seed", "2", "--lambda", "-0.9,0.4",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let index: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    // Levels are -1, 0, 1, 2.
    for (i, target) in [(0, -1.0), (1, 0.0)] {
        let e = index[i]["recovered_eigenvalue"].as_f64().unwrap();
        assert!((e - target).abs() < 1e-4, "{e}");
        assert!(out.join(format!("folded_{i}/trace.csv")).exists());
    }
}

#[test]
fn ucc_run_from_integrals() {
    let dir = TempDir::new().unwrap();
    let ints = write(
        dir.path(),
        "ints.json",
        r#"{"n_modes": 4,
            "one_body": [[1, 1, -1.2], [2, 2, -1.1], [3, 3, -0.3], [4, 4, -0.2], [1, 3, 0.1], [3, 1, 0.1]],
            "two_body": [[1, 2, 2, 1, 0.4], [3, 4, 4, 3, 0.3], [1, 3, 3, 1, 0.2], [3, 1, 1, 3, 0.2]]}"#,
    );
    let out = dir.path().join("out");
    let o = vqe(&[
        "run", "--mode", "ucc", "--integrals", &ints, "--reference", "1100", "--exact", "--seed", "4", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["reference"], "1100");
    let reference = summary["reference_energy"].as_f64().unwrap();
    let best = summary["run"]["final_exact_energy"].as_f64().unwrap();
    assert!(best <= reference + 1e-12);
}
