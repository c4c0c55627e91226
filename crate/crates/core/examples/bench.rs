//! Binding dispatch against hand-written listeners on a synthetic drag.

use bindkit::replay::{run_benchmark, synthetic_drag, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = Scenario::load(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/dnd_translate.json"))?;
    let moves = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(100_000);
    let r = run_benchmark(&scenario, &synthetic_drag("n1", (1.0, 1.0), moves), 5)?;
    println!("binding {:.1} ns/event (sd {:.1})", r.binding.mean_ns_per_event, r.binding.stddev_ns_per_event);
    println!("direct  {:.1} ns/event (sd {:.1})", r.direct.mean_ns_per_event, r.direct.stddev_ns_per_event);
    println!("ratio   {:.2}, both end with {} registered command(s)", r.ratio, r.history_len);
    Ok(())
}
