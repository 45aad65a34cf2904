use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn maglattice(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maglattice"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("MAGLATTICE_CONFIG")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

const ONE_MICRON_10G: [&str; 4] = ["--set", "preset=lattice-1um", "--set", "bias_z_G=10"];

#[test]
fn keys_lists_every_setting() {
    let dir = tempfile::tempdir().unwrap();
    let out = maglattice(dir.path(), &["keys"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for key in [
        "hole_size_um",
        "bias_z_G",
        "frequency_mode",
        "tilt_hz_per_um",
    ] {
        assert!(text.contains(key), "{key}");
    }
}

#[test]
fn usage_and_config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&maglattice(
            dir.path(),
            &["field", "--plane", "xy", "--resolution", "0"]
        )),
        2
    );
    assert_eq!(
        code(&maglattice(
            dir.path(),
            &["--set", "no_such_key=1", "traps"]
        )),
        2
    );
    assert_eq!(
        code(&maglattice(
            dir.path(),
            &["--set", "separation_um=2", "traps"]
        )),
        2
    );
    assert_eq!(code(&maglattice(dir.path(), &["bjj", "--n0", "1.5"])), 2);
}

#[test]
fn numerical_failures_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = maglattice(dir.path(), &["traps"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));
    // the manifest stays behind marked as an unfinished run
    assert_eq!(manifest(dir.path())["status"], "running");

    let out = maglattice(
        dir.path(),
        &["bjj", "--n0", "0", "--theta0", "pi/2", "--t-end", "pi"],
    );
    assert_eq!(code(&out), 3);
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("last good state"),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn io_failures_exit_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.conf");
    let out = maglattice(
        dir.path(),
        &["--config", missing.to_str().unwrap(), "traps"],
    );
    assert_eq!(code(&out), 4);
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    assert_eq!(
        code(&maglattice(
            &blocker,
            &ONE_MICRON_10G
                .iter()
                .copied()
                .chain(["traps"])
                .collect::<Vec<_>>()
        )),
        4
    );
}

#[test]
fn config_file_and_overrides_combine() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("lattice.conf");
    fs::write(&conf, "preset = lattice-1um\nbias_z_G = 3\n").unwrap();
    let out = maglattice(
        dir.path(),
        &[
            "--config",
            conf.to_str().unwrap(),
            "--set",
            "bias_z_G=10",
            "traps",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(dir.path());
    let bz = m["config"]["lattice"]["bias"][2].as_f64().unwrap();
    assert!((bz - 1e-3).abs() < 1e-15);
}

#[test]
fn trap_table_and_manifest_hashes() {
    let dir = tempfile::tempdir().unwrap();
    let out = maglattice(dir.path(), &[&ONE_MICRON_10G[..], &["traps"]].concat());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(dir.path());
    assert_eq!(m["status"], "complete");
    assert_eq!(m["subcommand"], "traps");
    let outputs = m["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 2);
    for rec in outputs {
        let data = fs::read(dir.path().join(rec["path"].as_str().unwrap())).unwrap();
        assert_eq!(
            rec["sha256"].as_str().unwrap(),
            hex::encode(Sha256::digest(&data))
        );
        assert_eq!(rec["bytes"].as_u64().unwrap(), data.len() as u64);
    }
    let csv = fs::read_to_string(dir.path().join("traps.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let d_min: f64 = row[col("d_min_um")].parse().unwrap();
    assert!(d_min > 1.0 / (2.0 * std::f64::consts::PI));
    assert!(row[col("depth_uK")].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn json_only_and_csv_only_formats() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&maglattice(
            dir.path(),
            &["--format", "json", "bjj", "--t-end", "1"]
        )),
        0
    );
    assert!(dir.path().join("bjj.json").exists() && !dir.path().join("bjj.csv").exists());
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&maglattice(
            dir.path(),
            &["--format", "csv", "bjj", "--t-end", "1"]
        )),
        0
    );
    assert!(!dir.path().join("bjj.json").exists() && dir.path().join("bjj.csv").exists());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let runs: &[&[&str]] = &[
        &[
            "--set",
            "preset=lattice-1um",
            "field",
            "--plane",
            "zx",
            "--resolution",
            "31",
        ],
        &[
            "--set",
            "preset=lattice-1um",
            "--set",
            "bias_z_G=5",
            "traps",
            "--scan",
            "bz",
            "2:8:5",
        ],
        &["bjj", "--sweep-n0", "0.1,0.5", "--t-end", "2pi"],
        &["bjj", "--chain", "5", "--init", "site:1", "--t-end", "3"],
    ];
    for args in runs {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        assert_eq!(code(&maglattice(a.path(), args)), 0, "{args:?}");
        assert_eq!(code(&maglattice(b.path(), args)), 0, "{args:?}");
        for rec in manifest(a.path())["outputs"].as_array().unwrap() {
            let name = rec["path"].as_str().unwrap();
            assert_eq!(
                fs::read(a.path().join(name)).unwrap(),
                fs::read(b.path().join(name)).unwrap(),
                "{name}"
            );
        }
    }
}

#[test]
fn check_recomputes_and_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["bjj", "--oracle", "--t-end", "2pi"];
    assert_eq!(code(&maglattice(dir.path(), &args)), 0);
    let check: Vec<&str> = ["--check"].iter().copied().chain(args).collect();
    let out = maglattice(dir.path(), &check);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));

    // different flags recompute something else
    let out = maglattice(
        dir.path(),
        &["--check", "bjj", "--oracle", "--t-end", "3pi"],
    );
    assert_eq!(code(&out), 3);

    let csv = dir.path().join("bjj.csv");
    let text = fs::read_to_string(&csv)
        .unwrap()
        .replacen("9.90000000e-1", "9.80000000e-1", 1);
    fs::write(&csv, text).unwrap();
    let out = maglattice(dir.path(), &check);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stdout).contains("DIFFERS"));
}

#[test]
fn tilt_comparison_gives_two_distinct_couplings() {
    let dir = tempfile::tempdir().unwrap();
    let out = maglattice(dir.path(), &["coupling", "--tilt-compare"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("tilt_comparison.json")).unwrap())
            .unwrap();
    let cases = v["cases"].as_array().unwrap();
    let om: Vec<f64> = cases
        .iter()
        .map(|c| c["couplings"]["josephson"][0].as_f64().unwrap())
        .collect();
    assert!(om.iter().all(|o| o.is_finite() && *o != 0.0));
    assert!((om[0] - om[1]).abs() > 1e-3 * om[0].abs());
}

#[test]
fn couplings_file_feeds_the_dynamics() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&maglattice(
            dir.path(),
            &[&ONE_MICRON_10G[..], &["coupling", "--sites", "3"]].concat()
        )),
        0
    );
    let couplings = dir.path().join("couplings.json");
    let run = dir.path().join("run");
    let out = maglattice(
        &run,
        &[
            "bjj",
            "--couplings",
            couplings.to_str().unwrap(),
            "--chain",
            "3",
            "--t-end",
            "2",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(run.join("chain.csv")).unwrap();
    assert!(csv.starts_with("t,t_s,re_c0,re_c1,re_c2,"));
}
