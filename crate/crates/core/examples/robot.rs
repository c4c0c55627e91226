//! Scripted input: the robot targets shapes by id and turns gestures into
//! timed events.

use bindkit::demo::Shape;
use bindkit::event::NodeId;
use bindkit::replay::{compile_robot, Layout, Robot, RobotScript};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let layout = Layout::new([Shape::new("r1", 10.0, 10.0, 20.0, 20.0)], Some(NodeId::from("canvas")));
    let mut r = Robot::new(layout.clone()).step(25);
    r.move_to("r1")?.press(0)?;
    r.glide((60.0, 40.0), 3)?;
    r.release(0)?.key("Escape");
    for e in r.events() {
        println!("{:>4} {:<15} {:<7} {:?}", e.time(), e.kind().as_str(), e.target().as_str(), e.position());
    }

    let script: RobotScript = serde_json::from_str(r#"{"step": 40, "robot": [{"move_to": [15, 15]}, {"click": 2}]}"#)?;
    let events = compile_robot(&script, layout)?;
    println!("script: {} events ending at {} ms", events.len(), events.last().map_or(0, |e| e.time()));
    Ok(())
}
