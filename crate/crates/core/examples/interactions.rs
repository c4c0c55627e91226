//! Every catalog interaction fed the same short gesture.

use bindkit::event::{Event, EventKind, NodeId, Point};
use bindkit::interaction::{construct_interaction, INTERACTIONS};
use serde_json::json;

fn main() {
    let n = NodeId::from("n1");
    let p = |kind, t, x| Event::pointer(kind, t, n.clone(), Point::new(x, x), 0);
    let gesture = [
        p(EventKind::PointerPress, 0, 1.0),
        p(EventKind::PointerMove, 10, 2.0),
        p(EventKind::PointerRelease, 20, 3.0),
        p(EventKind::PointerClick, 20, 3.0),
        Event::key_event(EventKind::KeyPress, 30, n.clone(), "a"),
        Event::key_event(EventKind::KeyRelease, 40, n.clone(), "a"),
        Event::touch(EventKind::TouchStart, 50, n.clone(), 1, Point::new(1.0, 1.0)),
        Event::touch(EventKind::TouchEnd, 60, n.clone(), 1, Point::new(1.0, 1.0)),
        Event::scroll(70, n.clone(), Point::new(1.0, 1.0)),
    ];
    for name in INTERACTIONS {
        let params = if matches!(name, "multi_touch" | "tap") { json!({"n": 1}) } else { json!({}) };
        let mut i = construct_interaction(name, &params).expect("catalog entry");
        i.register_nodes([n.clone()]);
        let mut trail = Vec::new();
        for e in &gesture {
            let out = i.process(e);
            if !out.signals.is_empty() {
                trail.push(format!("{}:{:?}", e.kind().as_str(), out.signals));
            }
            if i.fsm().is_over() {
                i.reinit();
            }
        }
        println!("{name:<12} {}", trail.join(" "));
    }
}
