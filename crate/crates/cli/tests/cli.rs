use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn lmi() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_lmi"));
    c.env_remove("SIM_SEED");
    c
}

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn run(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    if !out.status.success() {
        eprintln!("stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    out
}

fn simulate(config: &Path, out: &Path) -> Output {
    run(lmi()
        .args(["simulate", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out))
}

fn columns(csv: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = csv.lines();
    let header = lines
        .next()
        .unwrap()
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let (h, rows) = columns(csv);
    let i = h
        .iter()
        .position(|c| c == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i]).collect()
}

fn manifest(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL_RWA: &str = "model = \"rwa\"\nlambda = 1.0\nhbar = 1.0\nstate2 = \"fock\"\ntmax = 1.5\nsteps = 6\ngrid_n = 16\nfock_nmax = 4\n";

#[test]
fn simulate_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.toml", SMALL_RWA);
    let out = dir.path().join("out");
    assert!(simulate(&cfg, &out).status.success());
    let csv = fs::read_to_string(out.join("small.csv")).unwrap();
    assert!(csv.starts_with(
        "t,S1_cl,S2_cl,I_cl,purity_check,mc_stderr,S1_q,S2_q,I_q,trunc_pop,I_ref,Icl_ref\n"
    ));
    assert_eq!(csv.lines().count(), 8);
    let m = manifest(&out.join("small.manifest.json"));
    assert_eq!(m["command"], "simulate");
    assert_eq!(m["seed_source"], "config");
    assert_eq!(m["outputs"][0]["file"], "small.csv");
    let digest = m["outputs"][0]["sha256"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
    assert_eq!(m["input_hash"].as_str().unwrap().len(), 64);
    // every tunable shows up with its resolved value
    let resolved = m["resolved_config"].as_object().unwrap();
    for key in [
        "grid_n",
        "grid_span_sigmas",
        "pilot_samples",
        "mc_samples",
        "mc_bins",
        "rk4_dt",
        "fock_nmax",
        "fock_pop_tol",
        "seed",
    ] {
        assert!(resolved.contains_key(key), "{key} missing");
    }
    assert_eq!(m["model"]["omega1"], 1.0);
    assert!(m["diagnostics"]["quantum"]["route"] == "fock");
}

#[test]
fn identical_config_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "nel.toml", "model = \"nelson\"\nhbar = 0.05\ncenter2_q = 0.1\ntmax = 0.5\nsteps = 5\ngrid_n = 12\nmc_samples = 2000\nrk4_dt = 0.01\nfock_nmax1 = 50\nfock_nmax2 = 20\n");
    for sub in ["a", "b"] {
        assert!(simulate(&cfg, &dir.path().join(sub)).status.success());
    }
    let a = fs::read(dir.path().join("a/nel.csv")).unwrap();
    let b = fs::read(dir.path().join("b/nel.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn seed_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "mc.toml", "model = \"rwa\"\nlambda = 1.0\nhbar = 1.0\nstate1 = \"fock\"\nstate2 = \"fock\"\ntmax = 0.5\nsteps = 2\ngrid_n = 0\nmc_samples = 5000\nquantum = \"none\"\n");
    let out = dir.path().join("o");
    assert!(run(lmi()
        .env("SIM_SEED", "77")
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out))
    .status
    .success());
    let m = manifest(&out.join("mc.manifest.json"));
    assert_eq!(m["seed"], 77);
    assert_eq!(m["seed_source"], "env:SIM_SEED");
    let first = fs::read(out.join("mc.csv")).unwrap();
    assert!(run(lmi()
        .env("SIM_SEED", "78")
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out))
    .status
    .success());
    assert_ne!(first, fs::read(out.join("mc.csv")).unwrap());

    let bad = run(lmi()
        .env("SIM_SEED", "seven")
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out));
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn config_errors_exit_two_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let cases = [
        (
            "unstable.toml",
            "model = \"bilinear\"\nlambda = 1.1\n",
            "lambda",
        ),
        ("hbar.toml", "model = \"bilinear\"\nhbar = -1.0\n", "hbar"),
        ("unknown.toml", "model = \"rwa\"\nlamda = 0.3\n", "lamda"),
        (
            "fock.toml",
            "model = \"rwa\"\nstate1 = \"fock\"\ncenter1_q = 0.5\n",
            "center1_q",
        ),
        (
            "trunc.toml",
            "model = \"nelson\"\ncenter2_q = 0.1\nfock_nmax = 5\ngrid_n = 0\n",
            "n_max",
        ),
    ];
    for (name, body, needle) in cases {
        let cfg = write_config(dir.path(), name, body);
        let o = simulate(&cfg, &out);
        assert_eq!(o.status.code(), Some(2), "{name}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(needle), "{name}: {err}");
    }
    let missing = simulate(&dir.path().join("absent.toml"), &out);
    assert_eq!(missing.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn truncation_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    // at hbar = 0.2 the packet keeps leaking into the top levels
    let cfg = write_config(
        dir.path(),
        "leak.toml",
        "model = \"nelson\"\nhbar = 0.2\ncenter1_p = 0.2345207879911715\ncenter2_q = 0.15\ntmax = 3.0\nsteps = 10\ngrid_n = 0\nfock_nmax1 = 40\nfock_nmax2 = 14\n",
    );
    let o = simulate(&cfg, &dir.path().join("o"));
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("top two levels"));
}

#[test]
fn zero_coupling_gives_zero_information() {
    let dir = tempfile::tempdir().unwrap();
    for (name, body) in [
        ("bil.toml", "model = \"bilinear\"\nlambda = 0.0\nhbar = 1.0\ncenter1_q = 0.3\ntmax = 4.0\nsteps = 8\ngrid_n = 16\n"),
        ("rwa.toml", "model = \"rwa\"\nlambda = 0.0\nhbar = 1.0\nstate1 = \"fock\"\nstate2 = \"fock\"\ntmax = 4.0\nsteps = 8\ngrid_n = 16\nfock_nmax = 4\n"),
    ] {
        let cfg = write_config(dir.path(), name, body);
        assert!(simulate(&cfg, dir.path()).status.success());
        let csv = fs::read_to_string(dir.path().join(name.replace(".toml", ".csv"))).unwrap();
        for col in ["S1_cl", "S2_cl", "I_cl", "S1_q", "S2_q", "I_q"] {
            for v in column(&csv, col) {
                assert!(v.abs() < 1e-9, "{name} {col} {v}");
            }
        }
    }
}

#[test]
fn fast_fig1_curves_coincide() {
    let dir = tempfile::tempdir().unwrap();
    assert!(simulate(&preset("fast_fig1.toml"), dir.path())
        .status
        .success());
    let csv = fs::read_to_string(dir.path().join("fast_fig1.csv")).unwrap();
    let (q, c) = (column(&csv, "I_q"), column(&csv, "I_cl"));
    let worst = q
        .iter()
        .zip(&c)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-4, "{worst}");
    assert!(q.iter().cloned().fold(0.0, f64::max) > 0.5);
}

#[test]
fn fast_fig4_matches_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    assert!(simulate(&preset("fast_fig4.toml"), dir.path())
        .status
        .success());
    let csv = fs::read_to_string(dir.path().join("fast_fig4.csv")).unwrap();
    for (got, want, tol) in [("I_q", "I_ref", 1e-8), ("I_cl", "Icl_ref", 2e-2)] {
        for (a, b) in column(&csv, got).iter().zip(column(&csv, want)) {
            assert!((a - b).abs() < tol, "{got} {a} vs {b}");
        }
    }
}

#[test]
fn poincare_records_seed_failures_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "sec.toml",
        "model = \"nelson\"\nenergy = 0.05\ncrossings = 40\nrk4_dt = 0.005\nsection_seed_points = [[0.0, 0.0], [1.0, 0.0], [0.15, 0.0]]\n",
    );
    let out = dir.path().join("o");
    assert!(run(lmi()
        .args(["poincare", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out))
    .status
    .success());
    let csv = fs::read_to_string(out.join("sec.csv")).unwrap();
    let (header, rows) = columns(&csv);
    assert_eq!(header, ["q2", "p2", "seed_index", "crossing_index"]);
    assert_eq!(rows.len(), 80);
    assert!(rows.iter().all(|r| r[2] != 1.0));
    let m = manifest(&out.join("sec.manifest.json"));
    let seeds = m["diagnostics"]["seeds"].as_array().unwrap();
    assert!(seeds[1]["error"].as_str().unwrap().contains("shell"));
    assert_eq!(seeds[0]["crossings"], 40);
    assert!(seeds[2]["dispersion_exponent"].is_number());
}

#[test]
fn poincare_near_zero_energy_stays_at_origin() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "low.toml",
        "model = \"nelson\"\nenergy = 1e-9\nsection_seeds = 4\ncrossings = 40\nrk4_dt = 0.01\n",
    );
    assert!(run(lmi()
        .args(["poincare", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path()))
    .status
    .success());
    let (_, rows) = columns(&fs::read_to_string(dir.path().join("low.csv")).unwrap());
    assert_eq!(rows.len(), 160);
    assert!(rows.iter().all(|r| r[0].hypot(r[1]) < 1e-4));
    let m = manifest(&dir.path().join("low.manifest.json"));
    for s in m["diagnostics"]["seeds"].as_array().unwrap() {
        assert_eq!(s["chaotic"], false, "{s}");
    }
}

#[test]
fn poincare_rejects_quadratic_models() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bil.toml",
        "model = \"bilinear\"\nlambda = 0.5\n",
    );
    let o = run(lmi()
        .args(["poincare", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path()));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn plot_series_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.toml", SMALL_RWA);
    assert!(simulate(&cfg, dir.path()).status.success());
    let svg = dir.path().join("small.svg");
    let plot = |input: &Path, out: &Path| {
        run(lmi()
            .args(["plot", "--in"])
            .arg(input)
            .arg("--out")
            .arg(out))
    };
    assert!(plot(&dir.path().join("small.csv"), &svg).status.success());
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg"));
    assert!(text.contains("small.csv"));
    assert!(text.contains("stroke-dasharray"));
    let again = dir.path().join("again.svg");
    assert!(plot(&dir.path().join("small.csv"), &again).status.success());
    assert_eq!(text, fs::read_to_string(&again).unwrap());

    let empty = write_config(
        dir.path(),
        "empty.csv",
        "t,S1_cl,S2_cl,I_cl,purity_check,mc_stderr\n",
    );
    let o = plot(&empty, &dir.path().join("e.svg"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no data rows"));
    let junk = write_config(dir.path(), "junk.csv", "t,I_cl\n0.0,abc\n");
    assert_eq!(
        plot(&junk, &dir.path().join("j.svg")).status.code(),
        Some(2)
    );
}
