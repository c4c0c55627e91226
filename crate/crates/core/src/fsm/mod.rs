//! Finite-state machines driving the interaction life cycle.
//!
//! A machine leaves its initial state (`started`), takes transitions through
//! standard states (`updated`), and stops in a terminal (`updated` then `ended`) or
//! cancelling (`cancelled`) state. Transitions are triggered by events (with an
//! optional guard), by a timeout armed on state entry, or by an inner machine
//! reaching a terminal state. A machine can also run concurrent copies of a
//! template, one per touch point.

mod click;
mod machine;
mod spec;

use std::fmt;

use thiserror::Error;

pub use click::ClickSynthesizer;
pub use machine::{Fsm, TimerToken};
pub use spec::{FsmBuilder, FsmContext, FsmSpec, FsmTemplate, Guard, InnerId, Mark, StateHook, StateId, StateKind, Transition, Trigger};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FsmError {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown inner machine #{0}")]
    UnknownInner(usize),
    #[error("state `{0}` is final and cannot have outgoing transitions")]
    TransitionFromFinal(String),
    #[error("timeout of state `{0}` must be positive")]
    ZeroTimeout(String),
    #[error("state `{0}` has more than one timeout transition")]
    DuplicateTimeout(String),
    #[error("machine `{0}` cannot reach a terminal or cancelling state")]
    NoFinalState(String),
    #[error("state `{0}` is not reachable from the initial state")]
    Unreachable(String),
    #[error("machine has no concurrency spec")]
    NotConcurrent,
    #[error("touch already tracked: {0}")]
    TouchAlreadyTracked(u32),
    #[error("all {0} touch slots are taken")]
    ConcurrencyFull(usize),
    #[error("late start is not supported on concurrent machines")]
    LateStartUnsupported,
}

/// One arc of the interaction life cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Signal {
    Started,
    Updated,
    Ended,
    Cancelled,
}

impl Signal {
    const ALL: [Signal; 4] = [Signal::Started, Signal::Updated, Signal::Ended, Signal::Cancelled];

    fn bit(self) -> u8 {
        1 << (self as u8)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Signal::Started => "started",
            Signal::Updated => "updated",
            Signal::Ended => "ended",
            Signal::Cancelled => "cancelled",
        }
    }
}

/// The signals emitted by one step, always iterated in life-cycle order.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Signals(u8);

impl Signals {
    pub const NONE: Signals = Signals(0);

    pub fn add(&mut self, s: Signal) {
        self.0 |= s.bit();
    }

    pub fn with(mut self, s: Signal) -> Self {
        self.add(s);
        self
    }

    pub fn contains(self, s: Signal) -> bool {
        self.0 & s.bit() != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Signal> {
        Signal::ALL.into_iter().filter(move |s| self.contains(*s))
    }
}

impl FromIterator<Signal> for Signals {
    fn from_iter<T: IntoIterator<Item = Signal>>(iter: T) -> Self {
        iter.into_iter().fold(Signals::NONE, Signals::with)
    }
}

impl fmt::Debug for Signals {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.iter()).finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiredBy {
    Event,
    Timeout,
    Sub,
}

/// The transition a step took.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fired {
    pub from: StateId,
    pub to: StateId,
    pub by: FiredBy,
    /// Set when the transition was taken by a concurrent copy.
    pub touch: Option<u32>,
    /// A concurrent copy finished before the parent started and was dropped.
    pub released: bool,
}

/// Result of feeding one event or timeout to a machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FsmOutcome {
    pub consumed_event: bool,
    pub signals: Signals,
    pub fired: Option<Fired>,
}

impl FsmOutcome {
    pub const IGNORED: FsmOutcome = FsmOutcome { consumed_event: false, signals: Signals::NONE, fired: None };

    pub fn ended(&self) -> bool {
        self.signals.contains(Signal::Ended)
    }

    pub fn cancelled(&self) -> bool {
        self.signals.contains(Signal::Cancelled)
    }
}
