use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rootsep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rootsep")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn preset_toml(name: &str) -> String {
    let out = rootsep(&["presets", "--show", name]);
    assert!(out.status.success());
    String::from_utf8(out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn lists_six_presets() {
    let out = rootsep(&["presets"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
    for name in ["fig1-ctmc", "fig4-stable", "fig7-bm", "fig7-bm-tc", "fig8-stable-tc", "bm2d-demo"] {
        assert!(text.contains(name), "{name}");
    }
    assert!(!rootsep(&["presets", "--show", "nope"]).status.success());
}

#[test]
fn validates_presets_and_files() {
    assert!(rootsep(&["validate", "--preset", "fig4-stable"]).status.success());
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.toml", &preset_toml("fig1-ctmc"));
    assert!(rootsep(&["validate", "--config", &good]).status.success());

    let recurrent = preset_toml("fig1-ctmc").replace("p = 0.6666666666666666", "p = 0.4");
    assert!(recurrent.contains("p = 0.4"));
    let bad = write(dir.path(), "bad.toml", &recurrent);
    let out = rootsep(&["validate", "--config", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("p = 0.4"));

    let typo = write(dir.path(), "typo.toml", &preset_toml("fig7-bm").replace("t_max", "tmax"));
    assert_eq!(rootsep(&["validate", "--config", &typo]).status.code(), Some(1));
}

#[test]
fn needs_exactly_one_source() {
    assert!(!rootsep(&["run"]).status.success());
    assert!(!rootsep(&["run", "--preset", "fig7-bm", "--config", "x.toml"]).status.success());
}

#[test]
fn runs_a_small_config() {
    let dir = tempfile::tempdir().unwrap();
    let text = preset_toml("fig1-ctmc").replace("n_paths = 100000", "n_paths = 500");
    let cfg = write(dir.path(), "small.toml", &text);
    let out_dir = dir.path().join("out");
    let out = rootsep(&["run", "--config", &cfg, "--out-dir", out_dir.to_str().unwrap(), "--seed", "5", "--threads", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["simulation"]["n_paths"], 500);
    for f in ["stats.json", "barrier.csv", "barrier.json", "surface.csv", "samples.csv", "potentials.csv"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
}

#[test]
fn exit_codes_follow_the_failure_kind() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out_dir = out_dir.to_str().unwrap();

    let stiff = preset_toml("fig1-ctmc").replace("dt = 0.0009765625", "dt = 2.0");
    let cfg = write(dir.path(), "stiff.toml", &stiff);
    assert_eq!(rootsep(&["run", "--config", &cfg, "--out-dir", out_dir]).status.code(), Some(3));

    let gaussian = preset_toml("bm2d-demo");
    let gaussian = gaussian.replace("kind = \"time-change\"\nt = 0.1", "kind = \"gaussian\"");
    assert!(gaussian.contains("gaussian"), "{gaussian}");
    let cfg = write(dir.path(), "gauss.toml", &gaussian);
    let out = rootsep(&["run", "--config", &cfg, "--out-dir", out_dir]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}
