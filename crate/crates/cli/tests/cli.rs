//! End-to-end runs of the `iucorr` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn iucorr(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iucorr"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn iucorr")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

const SMALL_SWEEP: &str = r#"
kind = "alpha_sweep"
seed = 11
samples = 400

[array]
antennas = [16]

[channel]
keyholes = [1, 2]
alphas = [0.1, 0.5]
"#;

const SMALL_SYNTH: &str = r#"
output = "ds"

[dataset]
los_clusters = 1
nlos_clusters = 1
locations_per_cluster = 3
n_subcarriers = 8
"#;

#[test]
fn run_is_byte_identical_and_seed_sensitive() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    fs::write(d.join("s.toml"), SMALL_SWEEP).unwrap();
    for out in ["a.csv", "b.csv"] {
        let o = iucorr(&["run", "s.toml", "--output", out], d);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = fs::read(d.join("a.csv")).unwrap();
    assert_eq!(a, fs::read(d.join("b.csv")).unwrap());
    let text = String::from_utf8(a.clone()).unwrap();
    assert!(text.starts_with("# tool_version: "));
    assert!(text.contains("# seed: 11"));
    // 2 keyhole counts × 2 spreads
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 4);

    let stdout = iucorr(&["run", "s.toml", "--output", "-"], d);
    assert_eq!(stdout.stdout, a);
    let reseeded = iucorr(&["run", "s.toml", "--output", "-", "--seed", "12"], d);
    assert_eq!(code(&reseeded), 0);
    assert_ne!(reseeded.stdout, a);
}

#[test]
fn invalid_configs_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let cases = [
        ("unknown.toml", format!("{SMALL_SWEEP}\nbogus = 1\n")),
        ("alpha.toml", SMALL_SWEEP.replace("0.5]", "1.5]")),
        ("upa.toml", SMALL_SWEEP.replace("[16]", "[15]")),
        ("kind.toml", SMALL_SWEEP.replace("alpha_sweep", "nope")),
        ("syntax.toml", "kind = ".to_string()),
    ];
    for (name, body) in cases {
        fs::write(d.join(name), body).unwrap();
        let o = iucorr(&["run", name], d);
        assert_eq!(code(&o), 2, "{name}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty());
    }
    // clap usage errors share the invalid-input code
    assert_eq!(code(&iucorr(&["frobnicate"], d)), 2);
}

#[test]
fn missing_files_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    assert_eq!(code(&iucorr(&["run", "absent.toml"], d)), 3);
    assert_eq!(code(&iucorr(&["dataset-validate", "absent"], d)), 3);
    assert_eq!(code(&iucorr(&["music", "absent", "LOS1_01"], d)), 3);
    fs::write(
        d.join("c.toml"),
        "kind = \"cluster_stats\"\n[dataset]\npath = \"absent\"\n",
    )
    .unwrap();
    assert_eq!(code(&iucorr(&["run", "c.toml"], d)), 3);
}

#[test]
fn synthetic_dataset_flow() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    fs::write(d.join("g.toml"), SMALL_SYNTH).unwrap();
    let o = iucorr(&["gen-synthetic", "g.toml"], d);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let v = iucorr(&["dataset-validate", "ds"], d);
    assert_eq!(code(&v), 0);
    assert!(String::from_utf8_lossy(&v.stdout).starts_with("ok: 7 locations, 2 clusters"));

    let m = iucorr(
        &["music", "ds", "NLOS1_02", "--step-deg", "10", "--smoothing", "2,2"],
        d,
    );
    assert_eq!(code(&m), 0, "{}", String::from_utf8_lossy(&m.stderr));
    let rows = String::from_utf8(m.stdout).unwrap();
    // 19 × 19 grid at 10° steps plus the header row
    assert_eq!(rows.lines().filter(|l| !l.starts_with('#')).count(), 1 + 19 * 19);

    assert_eq!(code(&iucorr(&["music", "ds", "NOPE_01"], d)), 2);
    assert_eq!(code(&iucorr(&["music", "ds", "LOS1_01", "--smoothing", "1,1,1"], d)), 2);
    assert_eq!(code(&iucorr(&["music", "ds", "LOS1_01", "--step-deg", "0"], d)), 2);

    fs::write(d.join("c.toml"), "kind = \"cluster_stats\"\n[dataset]\npath = \"ds\"\n").unwrap();
    let c = iucorr(&["run", "c.toml"], d);
    assert_eq!(code(&c), 0, "{}", String::from_utf8_lossy(&c.stderr));
    let table = String::from_utf8(c.stdout).unwrap();
    assert_eq!(table.lines().filter(|l| !l.starts_with('#')).count(), 1 + 4);

    let blob = d.join("ds/LOS1_03.cplx");
    let mut bytes = fs::read(&blob).unwrap();
    bytes.truncate(bytes.len() - 8);
    fs::write(&blob, bytes).unwrap();
    let bad = iucorr(&["dataset-validate", "ds"], d);
    assert_eq!(code(&bad), 2);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("LOS1_03"));
}

#[test]
fn gen_synthetic_needs_an_output() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    fs::write(d.join("g.toml"), "[dataset]\nlos_clusters = 1\n").unwrap();
    assert_eq!(code(&iucorr(&["gen-synthetic", "g.toml"], d)), 2);
    fs::write(d.join("u.toml"), "output = \"x\"\n[dataset]\nclusters = 1\n").unwrap();
    assert_eq!(code(&iucorr(&["gen-synthetic", "u.toml"], d)), 2);
}
