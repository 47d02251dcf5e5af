//! End-to-end checks of the command-line interface: exit codes, schema
//! rejection, and byte-identical reruns.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_counterfact"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("counterfact-cli-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_file() {
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            if name == "run_record.json" {
                // Carries wall time; excluded from the byte contract.
                continue;
            }
            out.insert(name, std::fs::read(&path).unwrap());
        }
    }
    out
}

#[test]
fn list_shows_the_registry() {
    let output = bin().arg("list").output().unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    for name in ["five_and_ten", "card_game", "quantilizer", "bb_census"] {
        assert!(stdout.contains(name), "missing {name} in list output");
    }
    assert!(stdout.lines().count() >= 15);
}

#[test]
fn unknown_scenario_is_a_usage_error() {
    let output = bin().args(["run", "no_such_scenario"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unknown_parameter_is_a_usage_error() {
    let dir = temp_dir("badparam");
    let config = dir.join("config.toml");
    std::fs::write(&config, "[params]\nnot_a_real_knob = 3\n").unwrap();
    let output = bin()
        .args([
            "run",
            "card_game",
            "--config",
            config.to_str().unwrap(),
            "--out",
            dir.join("out").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("not_a_real_knob"), "stderr: {stderr}");
}

#[test]
fn rerunning_with_the_same_seed_is_byte_identical() {
    let dir_a = temp_dir("rerun-a");
    let dir_b = temp_dir("rerun-b");
    for dir in [&dir_a, &dir_b] {
        let output = bin()
            .args([
                "run",
                "oscillation",
                "--seed",
                "7",
                "--out",
                dir.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(output.status.success(), "{output:?}");
    }
    let a = dir_bytes(&dir_a);
    let b = dir_bytes(&dir_b);
    assert!(!a.is_empty());
    assert_eq!(a, b, "artifacts must be byte-identical across reruns");
}

#[test]
fn run_record_is_written_with_config_hash() {
    let dir = temp_dir("record");
    let output = bin()
        .args([
            "run",
            "rps_equilibrium",
            "--out",
            dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let record: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.join("run_record.json")).unwrap()).unwrap();
    assert_eq!(record["scenario"], "rps_equilibrium");
    assert_eq!(record["checks_passed"], true);
    assert!(record["config_hash"].as_str().unwrap().len() == 16);
}

#[test]
fn verify_filter_without_match_is_a_usage_error() {
    let output = bin()
        .args(["verify", "--filter", "zzz_nothing"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn verify_single_criterion_prints_a_pass_line() {
    let output = bin()
        .args(["verify", "--filter", "causal"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("[PASS] criterion  9"), "stdout: {stdout}");
}

#[test]
fn plots_flag_emits_svg() {
    let dir = temp_dir("plots");
    let output = bin()
        .args([
            "run",
            "oscillation",
            "--plots",
            "--out",
            dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(dir.join("weights.svg").exists());
}

#[test]
fn out_env_var_sets_the_default_root() {
    let root = temp_dir("envroot");
    let output = bin()
        .args(["run", "twin_pd"])
        .env("COUNTERFACT_OUT", &root)
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    assert!(root.join("twin_pd").join("twin_pd.json").exists());
}
