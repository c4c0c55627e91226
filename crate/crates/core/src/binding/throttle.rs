//! Coalescing of successive same-kind events.

use crate::event::{Event, Millis};

/// A window opens on an event with nothing pending and closes `ms` later.
/// Same-kind events inside the window replace the pending one. An event of
/// another kind flushes the pending one and is delivered right after it.
#[derive(Debug, Default)]
pub(crate) struct Throttle {
    ms: Millis,
    pending: Option<Event>,
    generation: u64,
}

pub(crate) enum Offer {
    /// Held; schedule the window close at `deadline` with this generation.
    Opened { deadline: Millis, generation: u64 },
    Replaced,
    /// Deliver the flushed event, then the offered one.
    Flush(Event),
}

impl Throttle {
    pub(crate) fn new(ms: Millis) -> Self {
        Throttle { ms, pending: None, generation: 0 }
    }

    pub(crate) fn is_off(&self) -> bool {
        self.ms == 0
    }

    pub(crate) fn offer(&mut self, e: &Event) -> Offer {
        match self.pending.take() {
            Some(p) if p.kind() == e.kind() => {
                self.pending = Some(e.clone());
                Offer::Replaced
            }
            Some(p) => {
                self.generation += 1;
                Offer::Flush(p)
            }
            None => {
                self.generation += 1;
                self.pending = Some(e.clone());
                Offer::Opened { deadline: e.time() + self.ms, generation: self.generation }
            }
        }
    }

    /// The pending event if `generation` is the open window.
    pub(crate) fn close(&mut self, generation: u64) -> Option<Event> {
        if generation != self.generation {
            return None;
        }
        self.generation += 1;
        self.pending.take()
    }

    pub(crate) fn clear(&mut self) {
        self.generation += 1;
        self.pending = None;
    }
}
