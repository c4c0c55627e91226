//! Replays the editor session from `examples/data` and prints a summary.

use bindkit::replay::{load_events, run_replay, ReplayOptions, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data");
    let scenario = Scenario::load(&format!("{dir}/editor.json"))?;
    let events = load_events(&format!("{dir}/editor_session.json"), &scenario)?;
    let report = run_replay(&scenario, &events, &ReplayOptions::default())?;
    println!("{} events, {} commands created", report.stats.events, report.stats.commands_created);
    for p in &report.produced {
        println!("  {:<10} {:<12} {:?}", p.binding, p.kind, p.status);
    }
    for s in &report.model {
        println!("  shape {} at ({}, {}) {}", s.id, s.x, s.y, s.color);
    }
    for l in &report.logs {
        println!("  [{}] {}", l.binding, l.msg);
    }
    Ok(())
}
