mod support;

use std::process::{Command, Output};

use bindkit::replay::{load_events, run_replay, run_undo_redo, PostOp, ReplayOptions, Scenario};
use serde_json::Value;
use support::data_file;

fn bindkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bindkit")).args(args).output().expect("binary runs")
}

fn replay_json(args: &[&str]) -> Value {
    let out = bindkit(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn shape_xy(report: &Value, id: &str) -> (f64, f64) {
    let s = report["model"].as_array().unwrap().iter().find(|s| s["id"] == id).expect("shape in model");
    (s["x"].as_f64().unwrap(), s["y"].as_f64().unwrap())
}

#[test]
fn replay_prints_a_report() {
    let sc = data_file("drag_lock_translate.json");
    let tr = data_file("drag_lock_gesture.json");
    let r = replay_json(&["replay", "--scenario", &sc, "--trace", &tr]);
    assert_eq!(r["history"]["undo"].as_array().unwrap().len(), 1);
    assert_eq!(r["history"]["undo"][0]["kind"], "Translate");
    assert_eq!(shape_xy(&r, "n1"), (3.0, 3.0));
    assert!(r["logs"].as_array().unwrap().iter().any(|l| l["level"] == "cmd"));
}

#[test]
fn post_ops_and_log_override() {
    let sc = data_file("drag_lock_translate.json");
    let tr = data_file("drag_lock_gesture.json");
    let r = replay_json(&["replay", "--scenario", &sc, "--trace", &tr, "--post", "undo,undo,redo", "--log", "interaction"]);
    let ops: Vec<bool> = r["post_ops"].as_array().unwrap().iter().map(|o| o["applied"].as_bool().unwrap()).collect();
    assert_eq!(ops, [true, false, true]);
    assert_eq!(shape_xy(&r, "n1"), (3.0, 3.0));
    assert!(r["logs"].as_array().unwrap().iter().all(|l| l["level"] == "interaction"));
}

#[test]
fn report_file() {
    let out = std::env::temp_dir().join(format!("bindkit-report-{}.json", std::process::id()));
    let out_s = out.to_str().unwrap();
    let sc = data_file("dnd_translate.json");
    let tr = data_file("dnd_gesture.json");
    let o = bindkit(&["replay", "--scenario", &sc, "--trace", &tr, "--report", out_s]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    std::fs::remove_file(&out).ok();
    assert_eq!(shape_xy(&r, "n1"), (3.0, 3.0));
}

#[test]
fn exit_codes() {
    let sc = data_file("drag_lock_translate.json");
    let tr = data_file("drag_lock_gesture.json");
    assert_eq!(bindkit(&["replay", "--scenario", "/nonexistent.json", "--trace", &tr]).status.code(), Some(2));
    assert_eq!(bindkit(&["replay", "--scenario", &sc, "--trace", &sc]).status.code(), Some(2));
    assert_eq!(bindkit(&["replay", "--scenario", &sc]).status.code(), Some(2));
    assert_eq!(bindkit(&["bench", "--scenario", &sc, "--moves", "10", "--reps", "3"]).status.code(), Some(1));

    let bad = std::env::temp_dir().join(format!("bindkit-bad-{}.json", std::process::id()));
    std::fs::write(&bad, r#"{"bindings": [{"interaction": "swipe", "command": "translate", "on": ["n1"]}]}"#).unwrap();
    let code = bindkit(&["replay", "--scenario", bad.to_str().unwrap(), "--trace", &tr]).status.code();
    std::fs::remove_file(&bad).ok();
    assert_eq!(code, Some(1));
}

#[test]
fn bench_runs_both_paths() {
    let sc = data_file("dnd_translate.json");
    let o = bindkit(&["bench", "--scenario", &sc, "--moves", "2000", "--reps", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("binding") && text.contains("direct") && text.contains("ratio"), "{text}");
    let tr = data_file("dnd_gesture.json");
    assert_eq!(bindkit(&["bench", "--scenario", &sc, "--trace", &tr, "--reps", "3"]).status.code(), Some(0));
}

#[test]
fn editor_session() {
    let scenario = Scenario::load(&data_file("editor.json")).unwrap();
    let events = load_events(&data_file("editor_session.json"), &scenario).unwrap();
    let r = run_replay(&scenario, &events, &ReplayOptions::default()).unwrap();
    let kinds: Vec<_> = r.history.undo.iter().map(|h| h.kind).collect();
    assert_eq!(kinds, ["Translate", "DrawRect", "ChangeColor", "DelShapes"]);
    let r1 = r.shape("r1").unwrap();
    assert_eq!((r1.x, r1.y), (45.0, 50.0));
    assert!(r.shape("r2").is_none());
    assert!(r.model.iter().any(|s| s.id.as_str().starts_with("rect")));

    let undone = run_undo_redo(&scenario, &events, &[PostOp::Undo, PostOp::Undo]).unwrap();
    let r2 = undone.shape("r2").expect("delete undone");
    assert_eq!(r2.color, "black");
    assert_eq!(undone.history.redo.len(), 2);
}

#[test]
fn ndjson_traces_replay_like_robot_scripts() {
    let scenario = Scenario::load(&data_file("dnd_translate.json")).unwrap();
    let events = load_events(&data_file("dnd_gesture.json"), &scenario).unwrap();
    let ndjson = bindkit::trace::write_trace(&events);
    let again = bindkit::replay::parse_events(&ndjson, &scenario).unwrap();
    assert_eq!(events, again);
}
