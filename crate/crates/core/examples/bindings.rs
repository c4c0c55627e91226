//! Declarative bindings: a drag moves a point, undo puts it back.

use std::cell::Cell;
use std::rc::Rc;

use bindkit::binder::dnd_binder;
use bindkit::binding::{BindingContext, LogLevel, LogLevels, MemorySink};
use bindkit::command::{Command, CommandError, Completion, Undoable};
use bindkit::event::{Event, EventKind, NodeId, Point};

type Pos = Rc<Cell<(f64, f64)>>;

struct MoveBy {
    pos: Pos,
    by: (f64, f64),
    from: (f64, f64),
}

impl Command for MoveBy {
    fn can_execute(&self) -> bool {
        self.by != (0.0, 0.0)
    }
    fn create_memento(&mut self) {
        self.from = self.pos.get();
    }
    fn execution(&mut self) -> Result<Completion, CommandError> {
        self.pos.set((self.from.0 + self.by.0, self.from.1 + self.by.1));
        Ok(Completion::Done)
    }
    fn undoable(&mut self) -> Option<&mut dyn Undoable> {
        Some(self)
    }
}

impl Undoable for MoveBy {
    fn undo(&mut self) -> Result<(), CommandError> {
        self.pos.set(self.from);
        Ok(())
    }
}

fn main() {
    let pos: Pos = Rc::new(Cell::new((0.0, 0.0)));
    let mut ctx = BindingContext::new();
    let log = MemorySink::new();
    ctx.set_log_sink(log.clone());

    let p = pos.clone();
    dnd_binder()
        .when(|d| d.button == Some(0))
        .to_produce(move |_| MoveBy { pos: p.clone(), by: (0.0, 0.0), from: (0.0, 0.0) })
        .then(|d, c| c.by = d.vector().unwrap_or_default())
        .continuous(true)
        .on(["handle"])
        .name("drag-handle")
        .log(LogLevels::NONE.with(LogLevel::Binding).with(LogLevel::Cmd))
        .bind(&mut ctx)
        .expect("complete binder");

    let n = NodeId::from("handle");
    let ev = |kind, t, x: f64| Event::pointer(kind, t, n.clone(), Point::new(x, x / 2.0), 0);
    for e in [ev(EventKind::PointerPress, 0, 0.0), ev(EventKind::PointerMove, 10, 4.0), ev(EventKind::PointerMove, 20, 8.0)] {
        ctx.dispatch(&e).expect("monotone");
        println!("t={:<3} position {:?}", e.time(), pos.get());
    }
    ctx.dispatch(&ev(EventKind::PointerRelease, 30, 8.0)).expect("monotone");
    println!("released: {:?}, history {}", pos.get(), ctx.history().undos().count());
    ctx.undo().expect("one command to undo");
    println!("undone:   {:?}", pos.get());
    for r in log.records() {
        println!("  [{:?} t={}] {}", r.level, r.t, r.msg);
    }
}
