//! Command suite for `Translate`.

use bindkit::testkit::{CommandMeta, CommandSuiteSpec};
#[allow(unused_imports)]
use bindkit::demo::{Drawing, Shape, Translate};
use bindkit::event::NodeId;

/// What fixtures prepare and checkers inspect.
#[allow(dead_code)]
pub struct TranslateWorld {
    pub drawing: Drawing,
    pub origin: (f64, f64),
    pub shape: NodeId,
    pub new_x: f64,
    pub new_y: f64,
}

fn world(shape: &str, new_x: f64, new_y: f64) -> TranslateWorld {
    let drawing = Drawing::new([Shape::new("n1", 0.0, 0.0, 10.0, 10.0), Shape::new("n2", 20.0, 20.0, 5.0, 5.0)]);
    let shape = NodeId::from(shape);
    let origin = drawing.position(&shape).expect("fixture shape");
    TranslateWorld { drawing, origin, shape, new_x, new_y }
}

pub fn translate_suite() -> CommandSuiteSpec<TranslateWorld> {
    let meta = CommandMeta::new("Translate", &["shape", "new_x", "new_y"], true);
    CommandSuiteSpec::new(meta, |w: &TranslateWorld| -> Translate {
        let _ = w;
        let mut t = Translate::new(&w.drawing, &w.shape).expect("fixture shape");
        t.new_x = w.new_x;
        t.new_y = w.new_y;
        t
    })
    .can_do("first shape", || world("n1", 3.0, 3.0))
    .can_do("second shape, one axis", || world("n2", 20.0, 7.5))
    .cannot_do("destination is the origin", || world("n1", 0.0, 0.0))
    .do_checker("shape at destination", |w| assert_eq!(w.drawing.position(&w.shape), Some((w.new_x, w.new_y))))
    .do_checker("other shapes untouched", |w| {
        for s in w.drawing.shapes().iter().filter(|s| s.id != w.shape) {
            assert_eq!((s.x, s.y), if s.id.as_str() == "n1" { (0.0, 0.0) } else { (20.0, 20.0) });
        }
    })
    .undo_checker("shape back at origin", |w| assert_eq!(w.drawing.position(&w.shape), Some(w.origin)))
}
