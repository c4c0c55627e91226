//! A hand-built machine: press, hold for 500 ms, release. Releasing early
//! cancels.

use bindkit::clock::VirtualClock;
use bindkit::event::{Event, EventKind, NodeId, Point};
use bindkit::fsm::{Fsm, FsmSpec, TimerToken};

fn main() {
    let mut b = FsmSpec::builder("long_press");
    let init = b.initial();
    let pressed = b.state("pressed");
    let held = b.state("held");
    let done = b.terminal("done");
    let too_short = b.cancelling("too_short");
    b.on(init, pressed, EventKind::PointerPress)
        .on_timeout(pressed, held, 500)
        .on(pressed, too_short, EventKind::PointerRelease)
        .on(held, done, EventKind::PointerRelease);
    let spec = b.build().expect("valid machine");

    for release_at in [200, 800] {
        let mut fsm = Fsm::new(spec.clone());
        let mut clock = VirtualClock::<TimerToken>::new();
        let mut timers = Vec::new();
        let node = NodeId::from("button");
        let events = [
            Event::pointer(EventKind::PointerPress, 0, node.clone(), Point::new(0.0, 0.0), 0),
            Event::pointer(EventKind::PointerRelease, release_at, node, Point::new(0.0, 0.0), 0),
        ];
        println!("release at {release_at} ms");
        for e in &events {
            for token in clock.advance_to(e.time()).expect("monotone") {
                let out = fsm.on_timeout(token);
                println!("  timeout -> {:<10} {:?}", fsm.current_state_name(), out.signals);
            }
            let out = fsm.process_event(e);
            println!("  {:<14} -> {:<10} {:?}", e.kind().as_str(), fsm.current_state_name(), out.signals);
            fsm.drain_timers(&mut timers);
            for (token, deadline) in timers.drain(..) {
                clock.schedule(deadline, token);
            }
        }
    }
}
