use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn tcrystal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tcrystal"))
        .args(args)
        .output()
        .expect("binary runs")
}

/// Runs a command into a fresh directory and returns (tempdir, out path).
fn run_ok(sub: &str, args: &[&str]) -> (TempDir, PathBuf) {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let mut full = vec![sub, "--out", out.to_str().unwrap()];
    full.extend_from_slice(args);
    let res = tcrystal(&full);
    assert!(
        res.status.success(),
        "{sub} {args:?} failed: {}",
        String::from_utf8_lossy(&res.stderr)
    );
    (dir, out)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(path: &Path, idx: usize) -> Vec<f64> {
    csv_rows(path)
        .iter()
        .map(|r| r[idx].parse().unwrap())
        .collect()
}

fn num(v: &Value, key: &str) -> f64 {
    v[key]
        .as_f64()
        .unwrap_or_else(|| panic!("missing scalar {key}"))
}

#[test]
fn spectrum_xy_string() {
    let (_d, out) = run_ok("spectrum", &["--model", "xy-string", "--n", "6"]);
    let s = json(&out.join("scalars.json"));
    assert!((num(&s, "gs_energy") + 0.5).abs() < 1e-12);
    assert_eq!(s["nondegenerate"], Value::Bool(true));

    // recompute from the emitted eigenvalues
    let ev = column(&out.join("eigenvalues.csv"), 1);
    assert_eq!(ev.len(), 64);
    assert_eq!(num(&s, "gs_energy"), ev[0]);
    assert_eq!(num(&s, "gap"), ev[1] - ev[0]);
    // the string Hamiltonian only couples b with its complement, with element
    // J((n - 2k)^2 - n) / (2n(n - 1)) for popcount k
    let n = 6usize;
    let mut oracle: Vec<f64> = (0..1usize << (n - 1))
        .flat_map(|b| {
            let k = b.count_ones() as f64;
            let c = ((n as f64 - 2.0 * k).powi(2) - n as f64) / (2.0 * (n * (n - 1)) as f64);
            [c, -c]
        })
        .collect();
    oracle.sort_by(f64::total_cmp);
    for (a, b) in ev.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    let gs = fs::read_to_string(out.join("ground_state.csv")).unwrap();
    let state = tc_core::hilbert::StateVector::from_csv(6, &gs).unwrap();
    let o = tc_core::hilbert::order_parameter(&state);
    assert!((o - num(&s, "order_parameter")).abs() < 1e-12);
}

#[test]
fn spectrum_effective_drive_and_ising() {
    let (_d, out) = run_ok("spectrum", &["--model", "dtc-eff", "--n", "7"]);
    let s = json(&out.join("scalars.json"));
    assert!((num(&s, "ghz_splitting") - PI).abs() < 1e-9);

    let (_d, out) = run_ok("spectrum", &["--model", "ising", "--n", "5"]);
    let s = json(&out.join("scalars.json"));
    assert_eq!(s["gs_degeneracy"], 2);
    let ev = column(&out.join("eigenvalues.csv"), 1);
    assert_eq!(ev[0], ev[1]);
    assert!((num(&s, "gap") - (ev[2] - ev[0])).abs() == 0.0);
}

#[test]
fn corr_zero_temperature_tone() {
    let (_d, out) = run_ok("corr", &["--model", "xy-string", "--n", "8", "--j", "1"]);
    let s = json(&out.join("scalars.json"));
    let bin = num(&s, "frequency_resolution");
    assert!((num(&s, "dominant_frequency") - 1.0).abs() <= bin);
    assert_eq!(s["harmonic_count"], 1);

    let series = csv_rows(&out.join("series.csv"));
    assert_eq!(series.len(), 2048);
    let f0: f64 = series[0][1].parse().unwrap();
    assert_eq!(f0, num(&s, "f0_re"));

    let omegas = column(&out.join("spectrum.csv"), 0);
    let power = column(&out.join("spectrum.csv"), 1);
    let peak = (0..power.len())
        .max_by(|&a, &b| power[a].total_cmp(&power[b]))
        .unwrap();
    assert_eq!(-omegas[peak], num(&s, "dominant_frequency"));
    let lines = csv_rows(&out.join("harmonics.csv"));
    assert_eq!(lines.len(), 1);
}

#[test]
fn corr_thermal_has_extra_harmonics() {
    let (_d, out) = run_ok(
        "corr",
        &[
            "--model",
            "hj",
            "--n",
            "10",
            "--ensemble",
            "thermal",
            "--beta",
            "1",
        ],
    );
    let s = json(&out.join("scalars.json"));
    assert!(s["harmonic_count"].as_u64().unwrap() > 1);

    let weights = column(&out.join("harmonics.csv"), 1);
    let total: f64 = weights.iter().sum();
    let counted = weights.iter().filter(|w| **w > 1e-3 * total).count();
    assert_eq!(s["harmonic_count"], counted);

    let power = column(&out.join("spectrum.csv"), 1);
    let max = power.iter().copied().fold(0.0, f64::max);
    let len = power.len();
    let peaks = (0..len)
        .filter(|&i| {
            let p = power[i];
            p >= 0.01 * max && p > power[(i + len - 1) % len] && p >= power[(i + 1) % len]
        })
        .count();
    assert_eq!(s["spectral_peaks"], peaks);
}

#[test]
fn corr_minimal_grid() {
    let (_d, out) = run_ok(
        "corr",
        &["--model", "xy-string", "--n", "4", "--count", "2"],
    );
    let text = fs::read_to_string(out.join("series.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,re,im,abs");
    assert_eq!(lines.len(), 3);
    for l in &lines[1..] {
        assert_eq!(l.split(',').count(), 4);
    }
}

#[test]
fn corr_pure_rejects_degenerate_ground_state() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let res = tcrystal(&[
        "corr",
        "--model",
        "ising",
        "--n",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("gs_degeneracy"));
    assert!(!out.join("manifest.json").exists());

    let (_d, out) = run_ok(
        "corr",
        &["--model", "ising", "--n", "4", "--ensemble", "mixed"],
    );
    let s = json(&out.join("scalars.json"));
    assert!((num(&s, "f0_re") - 1.0).abs() < 1e-12);
}

#[test]
fn stability_sweep() {
    let (_d, out) = run_ok(
        "stability",
        &[
            "--model",
            "hj",
            "--n",
            "8",
            "--j",
            "1",
            "--samples",
            "100",
            "--seed",
            "42",
        ],
    );
    let s = json(&out.join("scalars.json"));
    assert!(num(&s, "max_gs_expectation") <= 1e-10);
    assert!(num(&s, "max_ghz_plus_expectation") <= 1e-10);
    assert_eq!(s["within_tolerance"], Value::Bool(true));

    let rows = csv_rows(&out.join("stability.csv"));
    assert_eq!(rows.len(), 102);
    assert!(rows.iter().any(|r| r[0] == "nn-x"));
    assert!(rows.iter().any(|r| r[0] == "nn-y"));
    let max = rows
        .iter()
        .map(|r| r[2].parse::<f64>().unwrap())
        .fold(0.0, f64::max);
    assert_eq!(max, num(&s, "max_gs_expectation"));
}

#[test]
fn stability_without_samples() {
    let (_d, out) = run_ok(
        "stability",
        &["--model", "hj", "--n", "6", "--samples", "0"],
    );
    let s = json(&out.join("scalars.json"));
    assert_eq!(s["perturbations"], 0);
    assert!(s["max_gs_expectation"].is_null());
    assert!(csv_rows(&out.join("stability.csv")).is_empty());
}

#[test]
fn dtc_run_and_comparison() {
    let (_d, out) = run_ok(
        "dtc",
        &[
            "--n", "7", "--phi", "auto", "--steps", "20", "--state", "all-up",
        ],
    );
    let mz = column(&out.join("magnetization.csv"), 1);
    assert_eq!(mz.len(), 21);
    assert!(mz.windows(2).all(|w| w[0] * w[1] < 0.0));
    let s = json(&out.join("scalars.json"));
    assert_eq!(num(&s, "final_mz"), mz[20]);
    let report = json(&out.join("compare.json"));
    assert!(num(&report, "max_deviation") <= 1e-9);
    assert_eq!(report["ground_state"], "G+");

    let (_d, out) = run_ok("dtc", &["--n", "6", "--phi", "-0.3", "--state", "ghz+"]);
    assert!(!out.join("compare.json").exists());
    for m in column(&out.join("magnetization.csv"), 1) {
        assert!(m.abs() < 1e-14);
    }
}

#[test]
fn dtc_even_comparison_is_an_error() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let res = tcrystal(&[
        "dtc",
        "--n",
        "6",
        "--compare",
        "true",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("odd n"));
    assert!(!out.join("manifest.json").exists());
}

#[test]
fn decompose_ghz_projector() {
    let (_d, out) = run_ok("decompose", &["--model", "ghz-proj", "--n", "3"]);
    let s = json(&out.join("scalars.json"));
    assert!(num(&s, "reconstruction_error") < 1e-12);
    let rows = csv_rows(&out.join("terms.csv"));
    assert_eq!(s["term_count"], rows.len());
    for r in &rows {
        let word = &r[2];
        let z_only = word.chars().all(|c| c == 'I' || c == 'Z');
        let xy_only = word.chars().all(|c| c == 'X' || c == 'Y');
        assert!(z_only || xy_only, "{word}");
    }
}

#[test]
fn config_file_defaults_and_precedence() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty.cfg");
    fs::write(&empty, "").unwrap();
    let out = dir.path().join("a");
    let res = tcrystal(&[
        "spectrum",
        "--config",
        empty.to_str().unwrap(),
        "--model",
        "xy-string",
        "--n",
        "6",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["config"]["dt"], "0.1");
    assert_eq!(m["config"]["count"], "2048");

    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# conflicting size\nmodel = xy-string\nn = 4\n").unwrap();
    let out = dir.path().join("b");
    let res = tcrystal(&[
        "spectrum",
        "--config",
        cfg.to_str().unwrap(),
        "--n",
        "6",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["config"]["n"], "6");
    assert_eq!(m["overrides"][0]["key"], "n");
    assert_eq!(m["overrides"][0]["file"], "4");
    assert_eq!(m["overrides"][0]["flag"], "6");
    assert_eq!(column(&out.join("eigenvalues.csv"), 1).len(), 64);
}

#[test]
fn config_errors_name_the_key() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let o = out.to_str().unwrap();

    let res = tcrystal(&["spectrum", "--model", "hj", "--n", "20", "--out", o]);
    assert!(!res.status.success());
    let msg = String::from_utf8_lossy(&res.stderr);
    assert!(msg.contains("`n`") && msg.contains("2^14"), "{msg}");

    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "model = hj\nn = 6\ntemperature = 3\n").unwrap();
    let res = tcrystal(&["spectrum", "--config", cfg.to_str().unwrap(), "--out", o]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("`temperature`"));

    fs::write(&cfg, "model = hj\nn = 6\nbeta = hot\n").unwrap();
    let res = tcrystal(&["corr", "--config", cfg.to_str().unwrap(), "--out", o]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("`beta`"));
    assert!(!out.join("manifest.json").exists());
}

fn strip_volatile(mut m: Value) -> Value {
    let obj = m.as_object_mut().unwrap();
    obj.remove("wall_time_s");
    obj.get_mut("config")
        .and_then(Value::as_object_mut)
        .unwrap()
        .remove("out");
    m
}

#[test]
fn identical_inputs_give_identical_outputs() {
    let runs: [(&str, &[&str]); 3] = [
        (
            "stability",
            &[
                "--model",
                "hj",
                "--n",
                "6",
                "--samples",
                "20",
                "--seed",
                "9",
            ],
        ),
        (
            "corr",
            &[
                "--model",
                "hj",
                "--n",
                "6",
                "--ensemble",
                "thermal",
                "--count",
                "256",
            ],
        ),
        ("dtc", &["--n", "5", "--steps", "12"]),
    ];
    for (sub, args) in runs {
        let (_a, first) = run_ok(sub, args);
        let (_b, second) = run_ok(sub, args);
        let m1 = json(&first.join("manifest.json"));
        let m2 = json(&second.join("manifest.json"));
        for file in m1["files"].as_array().unwrap() {
            let name = file.as_str().unwrap();
            let a = fs::read(first.join(name)).unwrap();
            let b = fs::read(second.join(name)).unwrap();
            assert!(!a.is_empty(), "{sub}: {name} is empty");
            assert_eq!(a, b, "{sub}: {name} differs");
        }
        assert_eq!(strip_volatile(m1), strip_volatile(m2));
    }
}

#[test]
fn seed_changes_the_sweep() {
    let (_a, first) = run_ok(
        "stability",
        &["--model", "hj", "--n", "6", "--samples", "5", "--seed", "1"],
    );
    let (_b, second) = run_ok(
        "stability",
        &["--model", "hj", "--n", "6", "--samples", "5", "--seed", "2"],
    );
    let a = fs::read(first.join("stability.csv")).unwrap();
    let b = fs::read(second.join("stability.csv")).unwrap();
    assert_ne!(a, b);
}
