//! An undoable command and a bounded history.

use std::cell::Cell;
use std::rc::Rc;

use bindkit::command::{Command, CommandError, CommandInstance, Completion, History, Undoable};

struct Add {
    total: Rc<Cell<i64>>,
    by: i64,
}

impl Command for Add {
    fn can_execute(&self) -> bool {
        self.by != 0
    }
    fn execution(&mut self) -> Result<Completion, CommandError> {
        self.total.set(self.total.get() + self.by);
        Ok(Completion::Done)
    }
    fn undoable(&mut self) -> Option<&mut dyn Undoable> {
        Some(self)
    }
}

impl Undoable for Add {
    fn undo(&mut self) -> Result<(), CommandError> {
        self.total.set(self.total.get() - self.by);
        Ok(())
    }
}

fn main() {
    let total = Rc::new(Cell::new(0));
    let mut history = History::new(3);
    for by in [1, 0, 10, 100, 1000] {
        let mut c = CommandInstance::new(Add { total: total.clone(), by });
        if !c.can_execute() {
            println!("add {by}: not executable");
            continue;
        }
        c.execute().expect("execution");
        if let Some(old) = history.add(c) {
            println!("add {by}: evicted {:?}", old.id());
        }
        println!("add {by}: total {}", total.get());
    }
    while let Some(c) = history.undo() {
        c.undo().expect("undo");
        println!("undo: total {}", total.get());
    }
    history.redo().expect("something to redo").redo().expect("redo");
    println!("redo: total {}, {} undoable, {} redoable", total.get(), history.undos().count(), history.redos().count());
}
