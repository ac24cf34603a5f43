use std::path::Path;
use std::process::{Command, Output};

use rka_harness::table::{read_csv, Metadata};
use rka_harness::Schema;

const TINY: &str = r#"
[system]
m = 16
k = 2
[trials]
drops = 2
realizations = 6
[sweep]
t_grid = [0, 5, 20]
estimators = ["ls", "mmse"]
loadings = [0.125]
r = [0.0, 0.9]
sigma_db = [0.0]
alpha = [2.0, 4.0]
"#;

fn sim(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rka-sim"))
        .args(args)
        .current_dir(dir)
        .env_remove("RKA_SEED")
        .output()
        .unwrap()
}

fn setup(config: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("spec.toml"), config).unwrap();
    dir
}

#[test]
fn seed_is_mandatory() {
    let dir = setup(TINY);
    let out = sim(&["fig5", "--config", "spec.toml", "--out", "o"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed is required"));
}

#[test]
fn env_seed_is_accepted() {
    let dir = setup(TINY);
    let out = Command::new(env!("CARGO_BIN_EXE_rka-sim"))
        .args(["fig5", "--config", "spec.toml", "--out", "o"])
        .current_dir(dir.path())
        .env("RKA_SEED", "9")
        .output()
        .unwrap();
    assert!(out.status.success());
    let meta: Metadata = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("o/fig5.meta.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(meta.seed, 9);
}

#[test]
fn fig2_is_identical_across_thread_counts() {
    let dir = setup(TINY);
    for (threads, out) in [("1", "a"), ("3", "b")] {
        let o = sim(
            &[
                "fig2",
                "--config",
                "spec.toml",
                "--seed",
                "5",
                "--threads",
                threads,
                "--out",
                out,
            ],
            dir.path(),
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read(dir.path().join("a/fig2.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/fig2.csv")).unwrap();
    assert_eq!(a, b);
    let rows = read_csv(&dir.path().join("a/fig2.csv"), Schema::Fig2).unwrap();
    // 2 correlations x 2 estimators x 2 inits x 3 grid points
    assert_eq!(rows.len(), 24);
    for r in &rows {
        let se: f64 = r[4].parse().unwrap();
        let rzf: f64 = r[6].parse().unwrap();
        if &r[3] == "0" {
            assert_eq!(se, 0.0);
        }
        assert!(rzf > 0.0);
    }
    let meta_a: Metadata = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("a/fig2.meta.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(meta_a.rows, 24);
    assert_eq!(meta_a.spec_digest.len(), 64);
}

#[test]
fn rerun_from_recorded_spec_reproduces_table() {
    let dir = setup(TINY);
    assert!(sim(
        &[
            "table3",
            "--config",
            "spec.toml",
            "--seed",
            "4",
            "--out",
            "a"
        ],
        dir.path()
    )
    .status
    .success());
    let meta: Metadata = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("a/table3.meta.json")).unwrap(),
    )
    .unwrap();
    std::fs::write(dir.path().join("recorded.toml"), &meta.spec).unwrap();
    assert!(sim(
        &["table3", "--config", "recorded.toml", "--out", "b"],
        dir.path()
    )
    .status
    .success());
    for f in ["fig3.csv", "table3.csv"] {
        assert_eq!(
            std::fs::read(dir.path().join("a").join(f)).unwrap(),
            std::fs::read(dir.path().join("b").join(f)).unwrap()
        );
    }
    let meta_b: Metadata = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("b/table3.meta.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(meta.spec_digest, meta_b.spec_digest);
}

#[test]
fn fig5_thresholds_and_operating_point() {
    let dir = setup("");
    assert!(sim(&["fig5", "--seed", "1", "--out", "o"], dir.path())
        .status
        .success());
    let th = read_csv(
        &dir.path().join("o/fig5_thresholds.csv"),
        Schema::Fig5Thresholds,
    )
    .unwrap();
    let find = |t: &str| {
        th.iter()
            .find(|r| &r[0] == "0.1" && &r[3] == t)
            .map(|r| r[4].to_string())
    };
    assert_eq!(find("95").as_deref(), Some("139"));
    assert_eq!(find("333").as_deref(), Some("255"));
    let op = read_csv(
        &dir.path().join("o/fig5_operating.csv"),
        Schema::Fig5Operating,
    )
    .unwrap();
    let ratios: Vec<f64> = op
        .iter()
        .filter(|r| &r[2] == "moderate" && &r[3] == "10")
        .map(|r| r[6].parse().unwrap())
        .collect();
    assert_eq!(ratios.len(), 2);
    assert!(ratios.iter().any(|r| (r - 3.39).abs() <= 0.01));
    let curves = read_csv(&dir.path().join("o/fig5.csv"), Schema::Fig5).unwrap();
    let loadings: std::collections::BTreeSet<String> =
        curves.iter().map(|r| r[0].to_string()).collect();
    assert_eq!(loadings.len(), 3);
}

#[test]
fn degenerate_specs() {
    let single_ue = "[system]\nm = 8\nk = 1\n[trials]\ndrops = 3\nrealizations = 2\n[sweep]\nestimators = [\"ls\"]\n";
    let dir = setup(single_ue);
    assert!(sim(
        &["fig1", "--config", "spec.toml", "--seed", "1", "--out", "o"],
        dir.path()
    )
    .status
    .success());
    let rows = read_csv(&dir.path().join("o/fig1.csv"), Schema::Fig1).unwrap();
    assert!(rows.iter().all(|r| &r[3] == "1"));

    let dir = setup("[sweep]\nsigma_db = []\n");
    let out = sim(
        &["fig4", "--config", "spec.toml", "--seed", "1"],
        dir.path(),
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("sigma_db"));
}

#[test]
fn full_tolerance_hits_first_grid_point() {
    let config = format!("{TINY}tolerances = [100.0]\n");
    let dir = setup(&config);
    assert!(sim(
        &[
            "table3",
            "--config",
            "spec.toml",
            "--seed",
            "2",
            "--out",
            "o"
        ],
        dir.path()
    )
    .status
    .success());
    let rows = read_csv(&dir.path().join("o/table3.csv"), Schema::Table3).unwrap();
    assert!(rows.iter().all(|r| &r[4] == "0" && &r[5] == "true"));
}
