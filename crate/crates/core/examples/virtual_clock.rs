//! Timeouts on virtual time: deadlines fire in order when the clock moves.

use bindkit::clock::VirtualClock;

fn main() {
    let mut clock = VirtualClock::new();
    clock.schedule(300, "keys_typed idle");
    let late = clock.schedule(1000, "double click expired");
    clock.schedule(300, "tap window closed");
    println!("next deadline: {:?}", clock.next_deadline());
    println!("at 300: {:?}", clock.advance_to(300).unwrap());
    clock.cancel(late);
    println!("at 2000: {:?}", clock.advance_to(2000).unwrap());
    println!("going back: {}", clock.advance_to(10).unwrap_err());
}
