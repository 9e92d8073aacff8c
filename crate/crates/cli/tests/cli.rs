use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn phosphene(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phosphene"))
        .current_dir(dir)
        .env_remove("PHOSPHENE_THREADS")
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

const SMALL: &str = r#"{
    "dataset": {"kind": "synthetic", "n_per_class": 2},
    "trajectory": {"n_bundles": 60},
    "fixation_dims": [28, 28],
    "render_dims": [56, 56],
    "decay": "A",
    "cache_dir": "cache",
    "write_percepts": false
}"#;

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("small.json"), SMALL).unwrap();
    dir
}

#[test]
fn dataset_then_fixate_then_pipeline() {
    let dir = setup();
    let d = dir.path();
    let out = phosphene(
        d,
        &["dataset", "gen", "--n-per-class", "3", "--seed", "4", "--out", "data"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let labels = fs::read_to_string(d.join("data/labels.csv")).unwrap();
    assert_eq!(labels.lines().count(), 31);
    assert!(labels.starts_with("id,label\nimg_00000,0\n"));

    let out = phosphene(d, &["fixate", "--image", "data/img_00004.png", "--out", "fix"]);
    assert_eq!(code(&out), 0);
    let fix: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("fix/fixations.json")).unwrap()).unwrap();
    assert_eq!(fix["selected"].as_array().unwrap().len(), 25);
    assert!(d.join("fix/masked.png").exists());

    let out = phosphene(
        d,
        &[
            "--config",
            "small.json",
            "pipeline",
            "--image",
            "data/img_00004.png",
            "--ratio",
            "0.2",
            "--out",
            "pipe",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for f in [
        "fixation.png",
        "fixation.atnf",
        "downsampling.png",
        "downsampling.atnf",
        "fixations.json",
    ] {
        assert!(d.join("pipe").join(f).exists(), "{f}");
    }
}

#[test]
fn axonmap_build_then_hit() {
    let dir = setup();
    let first = phosphene(dir.path(), &["--config", "small.json", "axonmap", "build"]);
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    let text = String::from_utf8(first.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("built")).count(), 2);
    let second = phosphene(dir.path(), &["--config", "small.json", "axonmap", "build"]);
    let text = String::from_utf8(second.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("hit")).count(), 2);
    assert_eq!(fs::read_dir(dir.path().join("cache")).unwrap().count(), 2);
}

#[test]
fn simulate_stimulus_file() {
    let dir = setup();
    let amps: Vec<f64> = (0..196).map(|i| if i == 97 { 1.0 } else { 0.0 }).collect();
    fs::write(dir.path().join("stim.json"), serde_json::to_string(&amps).unwrap()).unwrap();
    let out = phosphene(
        dir.path(),
        &[
            "--config",
            "small.json",
            "simulate",
            "--stimulus",
            "stim.json",
            "--out",
            "sim",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("sim/percept.png").exists());
    assert_eq!(fs::read(dir.path().join("sim/percept.atnf")).unwrap()[..4], *b"ATNF");
}

#[test]
fn eval_is_repeatable_across_thread_counts() {
    let dir = setup();
    let d = dir.path();
    let a = phosphene(
        d,
        &[
            "--config",
            "small.json",
            "--threads",
            "1",
            "eval",
            "--out",
            "a",
            "--sweep",
            "0.05,1",
        ],
    );
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    let b = Command::new(env!("CARGO_BIN_EXE_phosphene"))
        .current_dir(d)
        .env("PHOSPHENE_THREADS", "4")
        .args(["--config", "small.json", "eval", "--out", "b", "--sweep", "0.05,1"])
        .output()
        .unwrap();
    assert_eq!(code(&b), 0);
    for f in ["rows.csv", "summary.json", "sweep.json"] {
        assert_eq!(
            fs::read(d.join("a").join(f)).unwrap(),
            fs::read(d.join("b").join(f)).unwrap(),
            "{f}"
        );
    }
    let rows = fs::read_to_string(d.join("a/rows.csv")).unwrap();
    // One validation image per class, two variants.
    assert_eq!(rows.lines().count(), 1 + 2 * 10);
}

#[test]
fn exit_codes() {
    let dir = setup();
    let d = dir.path();
    fs::write(d.join("bad.json"), r#"{"ratio": 2}"#).unwrap();
    assert_eq!(code(&phosphene(d, &["--config", "bad.json", "eval"])), 2);
    assert_eq!(code(&phosphene(d, &["--config", "missing.json", "eval"])), 3);
    assert_eq!(code(&phosphene(d, &["fixate", "--image", "nope.png"])), 3);
    assert_eq!(code(&phosphene(d, &["frobnicate"])), 2);

    assert_eq!(
        code(&phosphene(
            d,
            &["dataset", "gen", "--n-per-class", "1", "--out", "data"]
        )),
        0
    );
    fs::write(d.join("att.atnf"), b"ATNFgarbage").unwrap();
    let out = phosphene(
        d,
        &["fixate", "--image", "data/img_00000.png", "--attention", "att.atnf"],
    );
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("att.atnf"));

    fs::write(d.join("notpng.png"), b"plain text").unwrap();
    assert_eq!(code(&phosphene(d, &["fixate", "--image", "notpng.png"])), 4);

    fs::create_dir(d.join("cache")).unwrap();
    assert_eq!(code(&phosphene(d, &["--config", "small.json", "axonmap", "build"])), 0);
    for entry in fs::read_dir(d.join("cache")).unwrap() {
        fs::write(entry.unwrap().path(), b"AXMP\x01\x00\x00\x00short").unwrap();
    }
    assert_eq!(code(&phosphene(d, &["--config", "small.json", "axonmap", "build"])), 4);
}
