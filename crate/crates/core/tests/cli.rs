//! End-to-end checks of the command-line binary: exit codes, output
//! formats and cross-command round trips.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fuzzseg_core::bench::split_at;
use fuzzseg_core::bundled;
use fuzzseg_core::{read_scene, write_scene, RuleBase, VehicleClass};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fuzzseg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    serde_json::from_slice(&output.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&output.stdout)
        )
    })
}

/// Writes the bundled model and camera files plus one inducted rulebase
/// per class, returning the rulebase paths.
fn induct_all(dir: &Path) -> Vec<PathBuf> {
    let camera = dir.join("camera.json");
    std::fs::write(&camera, bundled::camera_json()).unwrap();
    let mut rules = Vec::new();
    for class in VehicleClass::ALL {
        let model = dir.join(format!("{class}.json"));
        std::fs::write(&model, bundled::model_json(class)).unwrap();
        let out = dir.join(format!("{class}.rules.json"));
        let output = run(&[
            "induct",
            "--model",
            model.to_str().unwrap(),
            "--camera",
            camera.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(
            code(&output),
            0,
            "{}",
            String::from_utf8_lossy(&output.stderr)
        );
        rules.push(out);
    }
    rules
}

fn rule_args(rules: &[PathBuf]) -> Vec<&str> {
    let mut args = vec!["--rules"];
    args.extend(rules.iter().map(|p| p.to_str().unwrap()));
    args
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
    assert_eq!(code(&run(&["classify", "--help"])), 0);
}

#[test]
fn unknown_flags_and_missing_args_exit_one() {
    assert_eq!(code(&run(&["--nope"])), 1);
    assert_eq!(code(&run(&["induct"])), 1);
    assert_eq!(code(&run(&["classify", "--scene", "x.jsonl"])), 1);
}

#[test]
fn induct_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    let camera = dir.path().join("camera.json");
    std::fs::write(&model, bundled::model_json(VehicleClass::Bus)).unwrap();
    std::fs::write(&camera, bundled::camera_json()).unwrap();
    let mut outputs = Vec::new();
    for name in ["a.json", "b.json"] {
        let out = dir.path().join(name);
        let output = run(&[
            "induct",
            "--model",
            model.to_str().unwrap(),
            "--camera",
            camera.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&output), 0);
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let rb = RuleBase::from_json(std::str::from_utf8(&outputs[0]).unwrap()).unwrap();
    assert_eq!(rb.class_id, VehicleClass::Bus);
}

#[test]
fn extract_feeds_classify() {
    let dir = tempfile::tempdir().unwrap();
    let rules = induct_all(dir.path());
    let mask = dir.path().join("mask.txt");
    std::fs::write(
        &mask,
        "6 4\n1 1 0 0 2 2\n1 1 0 0 2 2\n1 1 0 0 0 0\n0 0 0 0 0 0\n",
    )
    .unwrap();
    let scene = dir.path().join("scene.jsonl");
    let output = run(&[
        "extract",
        "--mask",
        mask.to_str().unwrap(),
        "--out",
        scene.to_str().unwrap(),
    ]);
    assert_eq!(code(&output), 0);
    let text = std::fs::read_to_string(&scene).unwrap();
    assert_eq!(read_scene(text.as_bytes()).unwrap().len(), 2);

    let mut args = vec!["classify"];
    args.extend(rule_args(&rules));
    args.extend(["--scene", scene.to_str().unwrap()]);
    let output = run(&args);
    assert_eq!(
        code(&output),
        0,
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    let doc = stdout_json(&output);
    assert_eq!(doc["scores"].as_object().unwrap().len(), 5);
    assert!(doc["winner"].is_string());
}

#[test]
fn fragmented_scene_classifies_as_its_class() {
    let dir = tempfile::tempdir().unwrap();
    let rules = induct_all(dir.path());
    // halve every reference segment across its longer extent, the same
    // fragmentation the synthetic benchmark applies
    let mut fragments = Vec::new();
    for seg in &bundled::class_model(VehicleClass::PersonalCar).segments {
        let (a, b) = split_at(seg, seg.width() >= seg.height(), 0.5).unwrap();
        fragments.push(a);
        fragments.push(b);
    }
    let scene = dir.path().join("scene.jsonl");
    let mut buf = Vec::new();
    write_scene(&mut buf, &fragments, None).unwrap();
    std::fs::write(&scene, buf).unwrap();

    let overlay = dir.path().join("overlay.svg");
    let mut args = vec!["classify"];
    args.extend(rule_args(&rules));
    args.extend([
        "--scene",
        scene.to_str().unwrap(),
        "--overlay",
        overlay.to_str().unwrap(),
    ]);
    let output = run(&args);
    assert_eq!(
        code(&output),
        0,
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    let doc = stdout_json(&output);
    assert_eq!(doc["winner"], "personal_car");
    assert_eq!(doc["anchor_index"], 0);
    let svg = std::fs::read_to_string(&overlay).unwrap();
    assert!(svg.contains("<svg"));
}

#[test]
fn classify_exit_codes_separate_usage_from_degenerate_input() {
    let dir = tempfile::tempdir().unwrap();
    let rules = induct_all(dir.path());

    // missing scene file: I/O usage error
    let mut args = vec!["classify"];
    args.extend(rule_args(&rules));
    args.extend(["--scene", "no-such-file.jsonl"]);
    assert_eq!(code(&run(&args)), 1);

    // tau outside [0, 1]: usage error
    let scene = dir.path().join("scene.jsonl");
    std::fs::write(&scene, "").unwrap();
    let mut args = vec!["classify"];
    args.extend(rule_args(&rules));
    args.extend(["--scene", scene.to_str().unwrap(), "--tau", "1.5"]);
    assert_eq!(code(&run(&args)), 1);

    // empty scene: degenerate input
    let mut args = vec!["classify"];
    args.extend(rule_args(&rules));
    args.extend(["--scene", scene.to_str().unwrap()]);
    assert_eq!(code(&run(&args)), 2);

    // all-background mask: degenerate input
    let mask = dir.path().join("mask.txt");
    std::fs::write(&mask, "2 2\n0 0\n0 0\n").unwrap();
    let mut args = vec!["classify"];
    args.extend(rule_args(&rules));
    args.extend(["--scene", mask.to_str().unwrap()]);
    assert_eq!(code(&run(&args)), 2);

    // malformed rulebase: parse error
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{").unwrap();
    let output = run(&[
        "classify",
        "--rules",
        broken.to_str().unwrap(),
        "--scene",
        scene.to_str().unwrap(),
    ]);
    assert_eq!(code(&output), 1);
}

#[test]
fn bench_reports_parseable_accuracy() {
    let output = run(&[
        "bench",
        "--classes",
        "personal_car",
        "--scenes",
        "3",
        "--seed",
        "7",
    ]);
    assert_eq!(
        code(&output),
        0,
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    let doc = stdout_json(&output);
    let accuracy = doc["overall_accuracy"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&accuracy));
    assert!(doc["per_class"]["personal_car"]["scenes"].as_u64().unwrap() == 3);
}
