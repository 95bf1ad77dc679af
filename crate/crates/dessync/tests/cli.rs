//! End-to-end checks of the command-line interface: exit-code contract,
//! verdict JSON schema, deterministic graph output and the facts runner.

mod common;

use std::process::{Command, Output};

use dessync::model::ModelFile;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dessync"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn verify_exit_codes_follow_the_contract() {
    let fixture = common::fixture_path();
    let all_initial = common::fixture_all_initial_path();

    // violated properties exit 3
    let out = run(&["verify", &all_initial, "--property", "iso-reversed", "--secret", "x0"]);
    assert_eq!(out.status.code(), Some(3));
    let verdict: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(verdict["version"], 1);
    assert_eq!(verdict["property"], "iso-reversed");
    assert_eq!(verdict["holds"], false);
    assert!(verdict["witness"].is_array());
    assert_eq!(verdict["state"], serde_json::json!(["x0"]));

    let out = run(&["verify", &all_initial, "--property", "iso", "--secret", "x0"]);
    assert_eq!(out.status.code(), Some(3));

    // the fixture's own secret list ({x2}) drives the csso default
    let out = run(&["verify", &fixture, "--property", "csso"]);
    assert_eq!(out.status.code(), Some(3));
    let verdict: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(verdict["state"], serde_json::json!(["x2"]));
    let witness = verdict["witness"].as_array().unwrap();
    assert!(!witness.is_empty());

    // empty secret holds trivially, exit 0
    let out = run(&["verify", &fixture, "--property", "csso", "--secret", ""]);
    assert_eq!(out.status.code(), Some(0));
    let verdict: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(verdict["holds"], true);
    assert!(verdict["witness"].is_null());

    // a property that holds: csso with an isolated-but-never-certain secret
    let out = run(&["verify", &fixture, "--property", "csso", "--secret", "x4"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    let fixture = common::fixture_path();
    // unknown property value (clap-level)
    let out = run(&["verify", &fixture, "--property", "nope"]);
    assert_eq!(out.status.code(), Some(1));
    // unknown secret state name
    let out = run(&["verify", &fixture, "--property", "csso", "--secret", "zz"]);
    assert_eq!(out.status.code(), Some(1));
    // iso secret must be initial
    let out = run(&["verify", &fixture, "--property", "iso", "--secret", "x2"]);
    assert_eq!(out.status.code(), Some(1));
    // seeds are css-only
    let out = run(&["build", &fixture, "--structure", "observer", "--seeds", "x0"]);
    assert_eq!(out.status.code(), Some(1));
    // unknown trace event
    let out = run(&["replay", &fixture, "--trace", "a12 zz"]);
    assert_eq!(out.status.code(), Some(1));
    // explicitly empty seed list
    let out = run(&["build", &fixture, "--structure", "css", "--seeds", ""]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn model_errors_exit_two() {
    // missing file
    let out = run(&["verify", "/nonexistent/model.json", "--property", "csso"]);
    assert_eq!(out.status.code(), Some(2));

    // structurally broken model
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    let mut file = ModelFile::parse(common::FIXTURE).unwrap();
    file.sites[0].kappa = 0;
    std::fs::write(&path, file.to_json()).unwrap();
    let out = run(&["verify", path.to_str().unwrap(), "--property", "csso"]);
    assert_eq!(out.status.code(), Some(2));

    // trace outside the plant language
    let out = run(&["replay", &common::fixture_path(), "--trace", "g3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn build_feasible_css_dot_is_deterministic_and_shades_critical_states() {
    let fixture = common::fixture_path();
    let a = run(&["build", &fixture, "--structure", "feasible-css"]);
    assert_eq!(a.status.code(), Some(0));
    let b = run(&["build", &fixture, "--structure", "feasible-css"]);
    assert_eq!(stdout(&a), stdout(&b));
    let dot = stdout(&a);
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("style=filled, fillcolor=lightgrey"));
    assert!(dot.contains("(a12.a12|a12.a12|g3)"));
}

#[test]
fn build_css_from_a_single_seed_has_three_state_layers() {
    let out = run(&[
        "build",
        &common::fixture_path(),
        "--structure",
        "css",
        "--seeds",
        "x2",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let layers: std::collections::BTreeSet<u64> = value["states"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["layer"].as_u64().unwrap())
        .collect();
    assert_eq!(layers, [0, 1, 2].into_iter().collect());
    assert_eq!(value["si_states"].as_array().unwrap().len(), 3);
}

#[test]
fn observer_of_a_never_synchronizing_plant_is_a_single_node() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("silent.json");
    std::fs::write(
        &path,
        r#"{
            "states": ["p", "q"],
            "events": ["o", "u"],
            "initial": ["p"],
            "transitions": [ { "from": "p", "event": "u", "to": ["q"] } ],
            "sites": [ { "name": "O1", "events": ["o"], "kappa": 1 } ]
        }"#,
    )
    .unwrap();
    let out = run(&["build", path.to_str().unwrap(), "--structure", "observer"]);
    assert_eq!(out.status.code(), Some(0));
    let dot = stdout(&out);
    assert_eq!(dot.matches("shape=box").count(), 1);
    assert!(dot.contains("{p,q}"));
    // only the initial-state arrow, no transitions
    assert_eq!(dot.matches(" -> ").count(), 1);
}

#[test]
fn build_writes_to_the_requested_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("observer.dot");
    let out = run(&[
        "build",
        &common::fixture_path(),
        "--structure",
        "observer",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let dot = std::fs::read_to_string(&path).unwrap();
    assert!(dot.contains("{x0,x1}"));
}

#[test]
fn build_iobserver_and_reversed_render() {
    for structure in ["iobserver", "reversed"] {
        for format in ["dot", "json"] {
            let out = run(&[
                "build",
                &common::fixture_path(),
                "--structure",
                structure,
                "--format",
                format,
            ]);
            assert_eq!(out.status.code(), Some(0), "{structure} {format}");
            assert!(!stdout(&out).is_empty());
        }
    }
}

#[test]
fn facts_command_reports_per_fact_lines() {
    let out = run(&["facts", &common::fixture_path(), &common::golden_facts_path()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("ok   ")).count(), 10);
    assert!(text.contains("all 10 facts hold"));

    // a mutated model fails a named fact and exits 2
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mutated.json");
    let mut file = ModelFile::parse(common::FIXTURE).unwrap();
    file.transitions.retain(|t| !(t.from == "x2" && t.event == "b13"));
    std::fs::write(&path, file.to_json()).unwrap();
    let out = run(&["facts", path.to_str().unwrap(), &common::golden_facts_path()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("FAIL b13-reach of x2"));
}

#[test]
fn replay_of_an_empty_trace_reports_the_initial_estimate() {
    let out = run(&["replay", &common::fixture_path(), "--trace", ""]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(
        text.lines().collect::<Vec<_>>(),
        vec!["current={x0,x1} initial={x0,x1}", "pending=(||)"]
    );
}

#[test]
fn verify_iso_on_default_fixture_secret_is_rejected_as_usage() {
    // the bundled fixture's secret {x2} is not an initial state
    let out = run(&["verify", &common::fixture_path(), "--property", "iso"]);
    assert_eq!(out.status.code(), Some(1));
}
