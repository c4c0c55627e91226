//! Observing what bindings produce, running a command suite, and
//! generating a suite skeleton.

use bindkit::binder::button_binder;
use bindkit::binding::BindingContext;
use bindkit::demo::{ChangeColor, Drawing, Shape};
use bindkit::event::{Event, EventKind, NodeId, Point};
use bindkit::testkit::{assert_cmd_produced, generate_test_skeleton, BindingsObservation, CommandMeta, CommandSuiteSpec};

struct World {
    drawing: Drawing,
    target: NodeId,
}

fn world(target: &str) -> World {
    World { drawing: Drawing::new([Shape::new("r1", 0.0, 0.0, 10.0, 10.0)]), target: NodeId::from(target) }
}

fn main() {
    let drawing = Drawing::new([Shape::new("r1", 0.0, 0.0, 10.0, 10.0)]);
    let mut ctx = BindingContext::new();
    let obs = BindingsObservation::attach(&mut ctx);
    let d = drawing.clone();
    button_binder()
        .to_produce(move |p| ChangeColor::new(&d, p.object.as_ref().expect("clicked node"), "red"))
        .on_dynamic(&drawing.node_list())
        .bind(&mut ctx)
        .expect("complete binder");
    let n = NodeId::from("r1");
    for (kind, t) in [(EventKind::PointerPress, 0), (EventKind::PointerRelease, 5)] {
        ctx.dispatch(&Event::pointer(kind, t, n.clone(), Point::new(1.0, 1.0), 0)).expect("monotone");
    }
    println!("observed: {:?}", obs.produced().iter().map(|p| (p.kind, p.status)).collect::<Vec<_>>());
    println!("one ChangeColor: {:?}", assert_cmd_produced(&obs, "ChangeColor", 1));

    let suite = CommandSuiteSpec::new(CommandMeta::new("ChangeColor", &["shape", "color"], true), |w: &World| {
        ChangeColor::new(&w.drawing, &w.target, "red")
    })
    .can_do("existing shape", || world("r1"))
    .cannot_do("missing shape", || world("zz"))
    .do_checker("now red", |w| assert_eq!(w.drawing.shape(&w.target).unwrap().color, "red"))
    .undo_checker("colour restored", |w| assert_eq!(w.drawing.shape(&w.target).unwrap().color, "black"));
    print!("{}", suite.run());

    print!("{}", generate_test_skeleton(&CommandMeta::new("ChangeColor", &["shape", "color"], true)));
}
