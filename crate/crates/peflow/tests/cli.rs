use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn peflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_peflow")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

const FREE: &str = r#"{
  "rho0": {"kind": "atoms", "x": [0, 1], "m": [0.5, 0.5]},
  "v0": {"breakpoints": [0, 1], "values": [1, -1]},
  "horizon": 1
}"#;

const TRIPLE: &str = r#"{
  "rho0": {"kind": "atoms", "x": [0, 1, 3], "m": [0.3333333333333333, 0.3333333333333333, 0.3333333333333334]},
  "v0": {"breakpoints": [0, 1, 3], "values": [1, -1, 0]},
  "horizon": 1
}"#;

fn simulate(dir: &Path, cfg: &Path, out: &str) -> (PathBuf, Value) {
    let out_dir = dir.join(out);
    let res = peflow(&["simulate", "-c", cfg.to_str().unwrap(), "-o", out_dir.to_str().unwrap()]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let summary = json(&res);
    (out_dir, summary)
}

#[test]
fn free_streaming_simulation() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "free.json", FREE);
    let (out, summary) = simulate(tmp.path(), &cfg, "out");
    assert_eq!(summary["merge_count"], 1);
    let t = summary["event_times"][0].as_f64().unwrap();
    assert!((t - 0.5).abs() < 1e-8);
    assert!(summary["final_energy"]["total"].as_f64().unwrap().abs() < 1e-12);
    for f in ["config.json", "trajectory.csv", "events.csv", "summary.json"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let persisted: Value = serde_json::from_str(&fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(persisted["solver"]["gap_tol"], 1e-9);
    assert_eq!(persisted["potential"]["kind"], "zero");
    let events = fs::read_to_string(out.join("events.csv")).unwrap();
    assert_eq!(events.lines().filter(|l| !l.starts_with('#')).count(), 2);
}

#[test]
fn single_atom_has_no_events() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "one.json",
        r#"{"rho0": {"kind": "atoms", "x": [0.5], "m": [1]}, "v0": {"constant": 2}, "horizon": 3}"#,
    );
    let (_, summary) = simulate(tmp.path(), &cfg, "out");
    assert_eq!(summary["merge_count"], 0);
    assert_eq!(summary["final_energy"]["kinetic"], 2.0);
}

#[test]
fn invalid_configs_exit_2() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    for (name, text) in [
        ("mass.json", FREE.replace("[0.5, 0.5]", "[0.5, 0.6]")),
        ("unknown.json", FREE.replace("\"horizon\"", "\"extra\": 1, \"horizon\"")),
        ("horizon.json", FREE.replace("\"horizon\": 1", "\"horizon\": -1")),
        ("syntax.json", "{".to_string()),
    ] {
        let cfg = write_config(tmp.path(), name, &text);
        let res = peflow(&["simulate", "-c", cfg.to_str().unwrap(), "-o", out.to_str().unwrap()]);
        assert_eq!(code(&res), 2, "{name}");
        assert!(!res.stderr.is_empty());
    }
    let res = peflow(&["simulate", "-c", "/nonexistent/cfg.json", "-o", out.to_str().unwrap()]);
    assert_eq!(code(&res), 2);
}

#[test]
fn verify_free_streaming_passes() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "free.json", FREE);
    let (out, _) = simulate(tmp.path(), &cfg, "out");
    let cfg_out = out.join("config.json");
    let res = peflow(&["verify", "-c", cfg_out.to_str().unwrap(), "--trajectory", out.to_str().unwrap()]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stdout));
    let report = json(&res);
    assert_eq!(report["checks"].as_array().unwrap().len(), 7);
    assert_eq!(report["pass"], true);
    let fresh = peflow(&["verify", "-c", cfg.to_str().unwrap(), "--checks", "energy,qspp,stability,oleinik,flow,weak"]);
    assert_eq!(code(&fresh), 0);
    assert_eq!(json(&fresh)["checks"].as_array().unwrap().len(), 6);
}

#[test]
fn tampered_velocity_fails_oleinik() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "triple.json", TRIPLE);
    let (out, summary) = simulate(tmp.path(), &cfg, "out");
    assert_eq!(summary["merge_count"], 1);
    let path = out.join("trajectory.csv");
    let text = fs::read_to_string(&path).unwrap();
    let tampered: Vec<String> = text
        .lines()
        .map(|line| {
            let mut fields: Vec<&str> = line.split(',').collect();
            if !line.starts_with('#') && fields.len() == 7 && fields[1] == "3" {
                fields[4] = "-1.0e1";
            }
            fields.join(",")
        })
        .collect();
    fs::write(&path, tampered.join("\n") + "\n").unwrap();
    let res = peflow(&[
        "verify",
        "-c",
        out.join("config.json").to_str().unwrap(),
        "--trajectory",
        out.to_str().unwrap(),
        "--checks",
        "qspp,oleinik",
    ]);
    assert_eq!(code(&res), 1);
    let report = json(&res);
    let oleinik = report["checks"].as_array().unwrap().iter().find(|c| c["name"] == "oleinik").unwrap();
    assert_eq!(oleinik["pass"], false);
}

#[test]
fn empty_check_list_passes() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "free.json", FREE);
    let res = peflow(&["verify", "-c", cfg.to_str().unwrap(), "--checks", ""]);
    assert_eq!(code(&res), 0);
    let report = json(&res);
    assert_eq!(report["checks"].as_array().unwrap().len(), 0);
    let bad = peflow(&["verify", "-c", cfg.to_str().unwrap(), "--checks", "energy,bogus"]);
    assert_eq!(code(&bad), 2);
}

#[test]
fn outputs_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "smooth.json",
        r#"{
          "rho0": {"kind": "uniform", "a": 0, "b": 1, "n": 12},
          "v0": {"breakpoints": [0, 0.5, 1], "values": [1, -0.5, 0.3]},
          "potential": {"kind": "smooth_abs", "epsilon": 0.4},
          "horizon": 1.5
        }"#,
    );
    let (a, _) = simulate(tmp.path(), &cfg, "a");
    let (b, _) = simulate(tmp.path(), &cfg, "b");
    for f in ["config.json", "trajectory.csv", "events.csv", "summary.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    let ra = tmp.path().join("ra");
    let rb = tmp.path().join("rb");
    for r in [&ra, &rb] {
        let res = peflow(&["verify", "-c", cfg.to_str().unwrap(), "-o", r.to_str().unwrap(), "--jobs", "1"]);
        assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stdout));
    }
    assert_eq!(fs::read(ra.join("report.json")).unwrap(), fs::read(rb.join("report.json")).unwrap());
}

#[test]
fn hash_mismatch_is_refused() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "free.json", FREE);
    let (out, _) = simulate(tmp.path(), &cfg, "out");
    let other = write_config(tmp.path(), "other.json", &FREE.replace("\"horizon\": 1", "\"horizon\": 0.9"));
    let res = peflow(&["verify", "-c", other.to_str().unwrap(), "--trajectory", out.to_str().unwrap()]);
    assert_eq!(code(&res), 2);
    assert!(String::from_utf8_lossy(&res.stderr).contains("hash mismatch"));
}

#[test]
fn converge_n_is_monotone() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "uniform.json",
        r#"{
          "rho0": {"kind": "uniform", "a": 0, "b": 1, "n": 8},
          "v0": {"breakpoints": [0, 1], "values": [0, -1]},
          "horizon": 1,
          "solver": {"output_intervals": 4}
        }"#,
    );
    let out = tmp.path().join("conv");
    let res = peflow(&[
        "converge", "-c", cfg.to_str().unwrap(), "--mode", "n", "--schedule", "4,8,16,32", "-o", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stdout));
    let report = json(&res);
    assert_eq!(report["reference_n"], 256);
    let at_half: Vec<f64> =
        report["distances"].as_array().unwrap().iter().map(|row| row[2].as_f64().unwrap()).collect();
    assert!(at_half.windows(2).all(|w| w[1] < w[0]), "{at_half:?}");
    assert!(out.join("converge.json").exists());

    let atoms = write_config(tmp.path(), "atoms.json", FREE);
    let res = peflow(&["converge", "-c", atoms.to_str().unwrap(), "--mode", "n", "--schedule", "2,4"]);
    assert_eq!(code(&res), 0);
    for row in json(&res)["distances"].as_array().unwrap() {
        assert!(row.as_array().unwrap().iter().all(|d| d.as_f64().unwrap() == 0.0));
    }
}

#[test]
fn ep_and_eps_continuation_on_symmetric_pair() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "sym.json",
        r#"{
          "rho0": {"kind": "atoms", "x": [-1, 1], "m": [0.5, 0.5]},
          "v0": {"constant": 0},
          "horizon": 3,
          "solver": {"output_intervals": 6}
        }"#,
    );
    let out = tmp.path().join("ep");
    let res = peflow(&["ep", "-c", cfg.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(code(&res), 0);
    let summary = json(&res);
    assert_eq!(summary["model"], "euler_poisson");
    assert_eq!(summary["event_times"][0], 2.0);
    let res = peflow(&["verify", "-c", out.join("config.json").to_str().unwrap(), "--trajectory", out.to_str().unwrap()]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stdout));

    let res = Command::new(env!("CARGO_BIN_EXE_peflow"))
        .args(["converge", "-c", cfg.to_str().unwrap(), "--mode", "eps", "--schedule", "0,2,4,6,8,10"])
        .env("PEFLOW_JOBS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stdout));
    let report = json(&res);
    assert_eq!(report["pass"], true);
    assert!(report["final_distances"].as_array().unwrap().last().unwrap().as_f64().unwrap() <= 1e-3);
}
