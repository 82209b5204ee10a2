//! End-to-end runs of the `dmk` binary on a small synthetic dataset.

use std::path::Path;
use std::process::{Command, Output};

fn dmk(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dmk")).current_dir(dir).args(args).env_remove("DMK_SEED").output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = dmk(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let none = dmk(dir.path(), &[]);
    assert_eq!(none.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&none.stderr).contains("Usage"));
    assert_eq!(dmk(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(dmk(dir.path(), &["split"]).status.code(), Some(2));
    assert_eq!(dmk(dir.path(), &["ssim", "a.png"]).status.code(), Some(2));
    assert_eq!(dmk(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn domain_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dmk(dir.path(), &["split", "--manifest", "missing.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    assert_eq!(dmk(dir.path(), &["synth", "--out", "d", "--side", "32"]).status.code(), Some(1));
}

#[test]
fn geometry_and_ssim_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--out", "data", "--scenes", "1"]);
    let label = std::fs::read_dir(d.join("data/labels")).unwrap().next().unwrap().unwrap().path();
    let label = label.to_str().unwrap();
    ok(d, &["rasterize", "--label", label, "--out", "out/mask.png"]);
    ok(d, &["polygonize", "--mask", "out/mask.png", "--out", "out/poly.json", "--min-area", "1"]);
    ok(d, &["rasterize", "--label", "out/poly.json", "--out", "out/again.png"]);
    assert_eq!(std::fs::read(d.join("out/mask.png")).unwrap(), std::fs::read(d.join("out/again.png")).unwrap());

    let images: Vec<_> = {
        let mut v: Vec<_> = std::fs::read_dir(d.join("data/images")).unwrap().map(|e| e.unwrap().path()).collect();
        v.sort();
        v
    };
    let a = images[0].to_str().unwrap();
    let same = ok(d, &["ssim", a, a]);
    assert_eq!(same.trim(), "1.000000");
    let other = ok(d, &["ssim", a, images[1].to_str().unwrap()]);
    assert_eq!(other.trim().split('.').nth(1).unwrap().len(), 6);
}

#[test]
fn split_is_seeded_and_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--out", "data", "--scenes", "5"]);
    assert_eq!(ok(d, &["split", "--manifest", "data/manifest.csv", "--seed", "7", "--val-frac", "0.2"]).trim(), "train 16 val 4");
    let first = std::fs::read_to_string(d.join("val.txt")).unwrap();
    ok(d, &["split", "--manifest", "data/manifest.csv", "--seed", "7", "--out", "again"]);
    assert_eq!(first, std::fs::read_to_string(d.join("again/val.txt")).unwrap());
    let mut sorted: Vec<&str> = first.lines().collect();
    sorted.sort();
    assert_eq!(sorted, first.lines().collect::<Vec<_>>());

    let env = Command::new(env!("CARGO_BIN_EXE_dmk"))
        .current_dir(d)
        .args(["split", "--manifest", "data/manifest.csv", "--out", "env"])
        .env("DMK_SEED", "7")
        .output()
        .unwrap();
    assert!(env.status.success());
    assert_eq!(first, std::fs::read_to_string(d.join("env/val.txt")).unwrap());
    let json = std::fs::read_to_string(d.join("split.json")).unwrap();
    assert!(json.contains("\"seed\": 7"), "{json}");
}

#[test]
fn train_infer_score_round() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--out", "data", "--scenes", "2", "--seed", "3"]);
    let m = "data/manifest.csv";
    ok(d, &["split", "--manifest", m, "--out", "split"]);
    ok(d, &["train-seg", "--manifest", m, "--out", "seg", "--epochs", "1"]);
    ok(d, &["train-seg", "--manifest", m, "--out", "e2e", "--epochs", "1", "--e2e"]);
    let cls = ["train-cls", "--manifest", m, "--val-ids", "split/val.txt", "--epochs", "1"];
    ok(d, &[&cls[..], &["--patch-side", "16", "--branch", "disaster", "--out", "cls"]].concat());
    ok(d, &["train-disaster", "--manifest", m, "--out", "dis", "--epochs", "1"]);
    for f in ["model.dmk", "config.toml", "history.csv"] {
        assert!(d.join("cls").join(f).is_file(), "{f}");
    }
    let history = std::fs::read_to_string(d.join("cls/history.csv")).unwrap();
    assert!(history.starts_with("epoch,train_loss,train_acc,val_acc\n1,"));

    let infer = ["infer", "--manifest", m, "--seg", "seg", "--cls", "cls"];
    assert_eq!(dmk(d, &[&infer[..], &["--out", "p"]].concat()).status.code(), Some(1));
    ok(d, &[&infer[..], &["--disaster-model", "dis", "--out", "p"]].concat());
    ok(d, &[&infer[..], &["--oracle-disaster", "--out", "q", "--jobs", "2"]].concat());
    ok(d, &["infer-e2e", "--manifest", m, "--model", "e2e", "--out", "e"]);
    assert_eq!(dmk(d, &["infer-e2e", "--manifest", m, "--model", "seg", "--out", "e"]).status.code(), Some(1));

    for pred in ["p", "q", "e"] {
        let report = format!("{pred}.json");
        ok(d, &["score", "--manifest", m, "--pred", pred, "--out", &report]);
        let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join(&report)).unwrap()).unwrap();
        for key in ["seg_f1", "cls_f1_weighted", "per_class_f1", "miou", "combined"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }

    // Same inputs and seed: byte-identical outputs.
    ok(d, &[&cls[..], &["--patch-side", "16", "--branch", "disaster", "--out", "cls2"]].concat());
    assert_eq!(std::fs::read(d.join("cls/model.dmk")).unwrap(), std::fs::read(d.join("cls2/model.dmk")).unwrap());
    ok(d, &[&infer[..], &["--oracle-disaster", "--out", "q2"]].concat());
    for e in std::fs::read_dir(d.join("q")).unwrap() {
        let name = e.unwrap().file_name();
        assert_eq!(std::fs::read(d.join("q").join(&name)).unwrap(), std::fs::read(d.join("q2").join(&name)).unwrap());
    }
}
