// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cpfilter::filterfn::lowfreq_slope;
use cpfilter::pulses::SequenceId;
use cpfilter::{FilterFunctionCurve, Quadrature};

const BIN: &str = env!("CARGO_BIN_EXE_cpfilter");
const OMEGA: f64 = 1.5e6;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--out")
        .arg(dir)
        .env("RUST_LOG", "error")
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) {
    let out = run(dir, args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn write_config(dir: &Path, json: &str) -> String {
    let p = dir.join("config.json");
    fs::write(&p, json).unwrap();
    p.to_string_lossy().into_owned()
}

type Table = (Vec<String>, Vec<Vec<String>>);

fn read(path: &Path) -> Table {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|x| x.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn col(t: &Table, name: &str) -> Vec<String> {
    let i = t.0.iter().position(|h| h == name).unwrap();
    t.1.iter().map(|r| r[i].clone()).collect()
}

fn num(t: &Table, name: &str) -> Vec<f64> {
    col(t, name).iter().map(|s| s.parse().unwrap()).collect()
}

#[test]
fn ff_writes_one_file_per_sequence() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["ff"]);
    for id in SequenceId::ALL {
        let t = read(&dir.path().join(format!("ff_{id}.csv")));
        assert_eq!(t.0, ["omega_over_Omega", "F_a", "F_d"]);
        let x = num(&t, "omega_over_Omega");
        assert!(x.len() as f64 >= 200.0 * 3e4f64.log10());
        assert!((x[0] - 1e-4).abs() < 1e-18 && (x[x.len() - 1] - 3.0).abs() < 1e-12);
        assert!(x.windows(2).all(|w| w[1] > w[0]));
        for q in ["F_a", "F_d"] {
            assert!(num(&t, q).iter().all(|&f| f >= 0.0 && f.is_finite()));
        }
    }
}

#[test]
fn ff_slope_column_matches_library_fit() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["ff", "--seq", "SK1,CORPSE"]);
    let slopes = read(&dir.path().join("ff_slopes.csv"));
    assert_eq!(slopes.0, ["sequence", "slope_a", "slope_d"]);
    assert_eq!(col(&slopes, "sequence"), ["SK1", "CORPSE"]);
    for (k, name) in ["SK1", "CORPSE"].iter().enumerate() {
        // rebuild the curve from the emitted file and refit
        let t = read(&dir.path().join(format!("ff_{name}.csv")));
        let curve = FilterFunctionCurve {
            omegas: num(&t, "omega_over_Omega").iter().map(|x| x * OMEGA).collect(),
            f_a: num(&t, "F_a"),
            f_d: num(&t, "F_d"),
            sequence: name.parse().unwrap(),
        };
        let band = (1e-3 * OMEGA, 1e-2 * OMEGA);
        let a = lowfreq_slope(&curve, Quadrature::Amplitude, band).unwrap();
        let d = lowfreq_slope(&curve, Quadrature::Detuning, band).unwrap();
        assert!((a - num(&slopes, "slope_a")[k]).abs() < 1e-9);
        assert!((d - num(&slopes, "slope_d")[k]).abs() < 1e-9);
    }
    let a = num(&slopes, "slope_a");
    let d = num(&slopes, "slope_d");
    assert!((a[0] - 4.0).abs() < 0.1 && (d[0] - 2.0).abs() < 0.1);
    assert!((a[1] - 2.0).abs() < 0.1 && (d[1] - 4.0).abs() < 0.1);
}

#[test]
fn amplitude_sweep_orders_sequences() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"sequences": ["primitive", "SK1", "BB1", "CORPSE", "DCG"],
            "sweep": {"amplitude": {"lo": 1500, "hi": 150000, "per_decade": 2}, "detuning": null}}"#,
    );
    ok(dir.path(), &["sweep", "--config", &cfg]);
    let t = read(&dir.path().join("sweep.csv"));
    assert_eq!(
        t.0,
        [
            "sequence",
            "omega_b_a",
            "omega_b_d",
            "ff_loss",
            "dc_loss",
            "combined",
            "status"
        ]
    );
    assert_eq!(t.1.len(), 25);
    assert!(col(&t, "status").iter().all(|s| s == "ok"));
    assert!(col(&t, "omega_b_d").iter().all(String::is_empty));
    let (ff, dc, comb) = (num(&t, "ff_loss"), num(&t, "dc_loss"), num(&t, "combined"));
    for i in 0..25 {
        assert_eq!(comb[i], ff[i].max(dc[i]));
    }
    let seqs = col(&t, "sequence");
    let at = |s: &str, k: usize| comb[seqs.iter().position(|x| x == s).unwrap() + k];
    // slow amplitude noise: BB1 < SK1 < primitive; CORPSE and DCG are not
    // amplitude-corrected
    assert!(at("BB1", 0) < at("SK1", 0) && at("SK1", 0) < 0.05 * at("primitive", 0));
    assert!(at("CORPSE", 0) > 0.5 * at("primitive", 0));
    assert!(at("DCG", 0) > at("primitive", 0));
    // the gain of SK1 shrinks as the knee moves up
    assert!(at("SK1", 4) / at("primitive", 4) > at("SK1", 0) / at("primitive", 0));
}

#[test]
fn simultaneous_noise_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"sequences": ["CinBB", "primitive"],
            "sweep": {"amplitude": {"lo": 1500, "hi": 150000, "per_decade": 4.5},
                      "detuning": {"lo": 1500, "hi": 150000, "per_decade": 4.5},
                      "mode": "product"}}"#,
    );
    // fractional per_decade is a config error
    assert_eq!(run(dir.path(), &["sweep", "--config", &cfg]).status.code(), Some(1));
    let cfg = write_config(
        dir.path(),
        r#"{"sequences": ["CinBB", "primitive"],
            "sweep": {"amplitude": [1500, 2500, 4000, 7000, 12000, 20000, 35000, 55000, 90000, 150000],
                      "detuning": [1500, 2500, 4000, 7000, 12000, 20000, 35000, 55000, 90000, 150000],
                      "mode": "product"}}"#,
    );
    ok(dir.path(), &["sweep", "--config", &cfg]);
    let t = read(&dir.path().join("sweep.csv"));
    assert_eq!(t.1.len(), 200);
    let comb = num(&t, "combined");
    assert_eq!(col(&t, "sequence")[100], "primitive");
    assert!(comb[0] * 10.0 < comb[100]);
    let (a, d) = (col(&t, "omega_b_a"), col(&t, "omega_b_d"));
    assert_eq!((a[1].as_str(), d[1].as_str()), ("1500.0", "2500.0"));
}

#[test]
fn empty_grid_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"sweep": {"amplitude": [], "detuning": null}}"#);
    let out = run(dir.path(), &["sweep", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));
    assert!(!dir.path().join("sweep.csv").exists());
}

#[test]
fn bad_input_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["ff", "--seq", "XY9"]).status.code(), Some(1));
    assert_eq!(run(dir.path(), &["bogus"]).status.code(), Some(1));
    assert_eq!(run(dir.path(), &["mc", "--n", "1"]).status.code(), Some(1));
    let cfg = write_config(dir.path(), r#"{"ramp": 1.0}"#);
    assert_eq!(run(dir.path(), &["ff", "--config", &cfg]).status.code(), Some(1));
    let missing = dir.path().join("missing.json");
    assert_eq!(
        run(dir.path(), &["ff", "--config", missing.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn mc_rows_are_reproducible_and_join_the_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let grid = "1500,4743.416490252569,15000,47434.16490252569,150000";
    let cfg = write_config(dir.path(), r#"{"sweep": {"amplitude": [1], "detuning": null}}"#);
    let args = [
        "--config",
        &cfg,
        "--seq",
        "SK1",
        "--n",
        "2000",
        "--seed",
        "42",
        "--omega-b",
        grid,
    ];
    ok(dir.path(), &[&["mc"], &args[..]].concat());
    let first = fs::read(dir.path().join("mc.csv")).unwrap();
    let t = read(&dir.path().join("mc.csv"));
    assert_eq!(
        t.0[..7],
        [
            "sequence",
            "omega_b_a",
            "omega_b_d",
            "N",
            "mean_loss",
            "std_error",
            "seed"
        ]
    );
    assert_eq!(t.1.len(), 5);
    assert!(num(&t, "std_error").iter().all(|&s| s > 0.0));
    assert_eq!(num(&t, "seed"), [42.0, 43.0, 44.0, 45.0, 46.0]);
    assert!(num(&t, "N").iter().all(|&n| n == 2000.0));

    // byte-identical rerun, also with a different worker count
    let out = Command::new(BIN)
        .args([&["mc"], &args[..]].concat())
        .arg("--out")
        .arg(dir.path())
        .env("CPFILTER_THREADS", "1")
        .env("RUST_LOG", "error")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(fs::read(dir.path().join("mc.csv")).unwrap(), first);

    ok(dir.path(), &[&["sweep"], &args[..]].concat());
    let s = read(&dir.path().join("sweep.csv"));
    let key = |t: &Table| -> Vec<(String, String, String)> {
        col(t, "sequence")
            .into_iter()
            .zip(col(t, "omega_b_a"))
            .zip(col(t, "omega_b_d"))
            .map(|((a, b), c)| (a, b, c))
            .collect()
    };
    assert_eq!(key(&s), key(&t));
    let est: HashMap<_, _> = key(&s).into_iter().zip(num(&s, "combined")).collect();
    for (k, m) in key(&t).into_iter().zip(num(&t, "mean_loss")) {
        let e = est[&k];
        assert!((m / e).max(e / m) < 3.0, "{k:?}: MC {m} vs {e}");
    }
}

#[test]
fn sweep_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = Command::new(BIN)
            .args(["sweep", "--seq", "SK1,CORPSE,CinSK", "--out"])
            .arg(dir.path())
            .env("CPFILTER_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success());
        outputs.push(fs::read(dir.path().join("sweep.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn geometry_outputs() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["geometry", "--seq", "SK1,primitive"]);
    let chains = read(&dir.path().join("chains_SK1.csv"));
    assert_eq!(chains.0, ["index", "kind", "x", "y", "z"]);
    assert_eq!(
        col(&chains, "kind"),
        ["static", "static", "static", "A", "A", "A", "B", "B", "B"]
    );
    let (x, y) = (num(&chains, "x"), num(&chains, "y"));
    let (sx, sy): (f64, f64) = (x[..3].iter().sum(), y[..3].iter().sum());
    assert!(sx.hypot(sy) < 1e-12);
    let g = read(&dir.path().join("geometry.csv"));
    assert_eq!(col(&g, "sequence"), ["SK1", "primitive"]);
    let bound = col(&g, "bound_over_Omega");
    let b: f64 = bound[0].parse().unwrap();
    assert!((b - 2.0 / (25.0 * std::f64::consts::PI)).abs() < 1e-12);
    assert!(bound[1].is_empty());
    let c: f64 = col(&g, "crossover_over_Omega")[0].parse().unwrap();
    assert!(b < c);
}

#[test]
fn dc_fit_outputs() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["dc-fit", "--seq", "SK1,CinBB"]);
    let t = read(&dir.path().join("dc_fit.csv"));
    assert_eq!(t.0, ["sequence", "term", "order", "c", "c_physical", "residual"]);
    assert_eq!(col(&t, "term"), ["a", "d", "a", "d", "cross"]);
    assert_eq!(col(&t, "order"), ["1", "0", "2", "1", "1"]);
    let c = num(&t, "c")[0];
    let phi = (-0.25f64).acos();
    let want = (std::f64::consts::PI.powi(2) * (2.0 * phi).sin()).powi(2);
    assert!((c - want).abs() < 1e-3 * want);
}
