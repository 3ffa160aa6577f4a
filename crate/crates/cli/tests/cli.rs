use std::path::Path;
use std::process::Command;

use ans_core::analyticity::fit_vertical_radius;
use ans_core::besov::{besov_norm_vector, BesovIndex};
use ans_core::io::{read_field, FieldData};

fn ans(dir: &Path, args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ans"))
        .args(args)
        .current_dir(dir)
        .env_remove("ANS_OUTPUT_DIR")
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn vector(path: &Path) -> ans_core::VectorField {
    match read_field(path).unwrap() {
        FieldData::Vector(u) => u,
        FieldData::Scalar(_) => panic!("scalar file"),
    }
}

#[test]
fn norms_prints_the_library_value() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (code, _, err) = ans(
        d,
        &["make-data", "--spec", "random-shell lo=1 hi=4 amp=0.3 seed=2", "--n", "16,16,16", "--out-dir", "."],
    );
    assert_eq!(code, 0, "{err}");
    let (code, stdout, err) = ans(
        d,
        &["norms", "--field", "data.ansf", "--s", "0", "--sigma", "0.5", "--p", "2", "--out-dir", "n"],
    );
    assert_eq!(code, 0, "{err}");
    let u = vector(&d.join("data.ansf"));
    let idx = BesovIndex::homogeneous(0.0, 0.5, 2.0).unwrap();
    let [a, b, c] = u.components();
    let expected = besov_norm_vector(&[a, b, c], &idx).unwrap();
    let printed: f64 = stdout.trim().parse().unwrap();
    assert_eq!(printed, expected);
    assert!(d.join("n/norms_blocks.csv").exists());
}

#[test]
fn analytic_vertical_data_has_the_requested_radius() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = ans(
        dir.path(),
        &["make-data", "--spec", "analytic-vertical rho=1 amp=1e-3 seed=3", "--out-dir", "."],
    );
    assert_eq!(code, 0, "{err}");
    let u = vector(&dir.path().join("data.ansf"));
    assert!(u.is_divergence_free(1e-12));
    let rho = fit_vertical_radius(&u).unwrap();
    assert!((rho - 1.0).abs() < 0.02, "{rho}");
}

#[test]
fn zero_spec_writes_zero_field() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = ans(dir.path(), &["make-data", "--spec", "zero", "--n", "8,8,8", "--out-dir", "."]);
    assert_eq!(code, 0);
    assert!(vector(&dir.path().join("data.ansf")).is_zero());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(ans(d, &["simulate", "--config", "missing.toml"]).0, 3);
    assert_eq!(ans(d, &["make-data", "--spec", "vortex-ring", "--out-dir", "."]).0, 1);
    assert_eq!(ans(d, &["frobnicate"]).0, 1);
    assert_eq!(ans(d, &["norms", "--field", "absent.ansf", "--out-dir", "."]).0, 3);
    std::fs::write(d.join("bad.toml"), "[solver]\nstepsize = 1\n").unwrap();
    let (code, _, err) = ans(d, &["simulate", "--config", "bad.toml"]);
    assert_eq!(code, 1);
    assert!(err.contains("solver.stepsize"), "{err}");
    std::fs::write(
        d.join("blow.toml"),
        "[grid]\nn = [16, 16, 16]\n[data]\nspec = \"random-shell lo=1 hi=4 amp=1e4 seed=1\"\n\
         [solver]\ndt = 0.5\nt_end = 50.0\nadaptive = false\n",
    )
    .unwrap();
    let (code, _, err) = ans(d, &["simulate", "--config", "blow.toml", "--out-dir", "blow"]);
    assert_eq!(code, 2, "{err}");
    assert!(d.join("blow/diagnostics.csv").exists());
}

#[test]
fn verify_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, err) = ans(
        dir.path(),
        &["verify", "--lemma", "interpolation", "--trials", "10", "--seed", "7", "--out-dir", "."],
    );
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("max_ratio"));
    assert!(dir.path().join("verify_interpolation.csv").exists());
    assert!(dir.path().join("verify_interpolation.txt").exists());
}

#[test]
fn config_echo_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("run.toml"),
        "[grid]\nn = [16, 16, 8]\n[data]\nspec = \"random-shell lo=1 hi=3 amp=0.5\"\nseed = 4\n\
         [solver]\nt_end = 0.3\nsample_interval = 0.1\n",
    )
    .unwrap();
    let (code, _, err) = ans(d, &["simulate", "--config", "run.toml", "--out-dir", "a"]);
    assert_eq!(code, 0, "{err}");
    let (code, _, err) = ans(
        d,
        &["simulate", "--config", "a/simulate_config.toml", "--out-dir", "b"],
    );
    assert_eq!(code, 0, "{err}");
    for f in ["diagnostics.csv", "final.ansf"] {
        assert_eq!(std::fs::read(d.join("a").join(f)).unwrap(), std::fs::read(d.join("b").join(f)).unwrap());
    }
    let manifest = std::fs::read_to_string(d.join("a/simulate_manifest.csv")).unwrap();
    assert!(manifest.starts_with("file,bytes\n") && manifest.contains("diagnostics.csv"));
}

#[test]
fn output_dir_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ans"))
        .args(["make-data", "--spec", "zero", "--n", "8,8,8"])
        .current_dir(dir.path())
        .env("ANS_OUTPUT_DIR", "envout")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("envout/data.ansf").exists());
}
