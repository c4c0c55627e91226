//! Immutable machine definitions and their builder.

use std::fmt;
use std::sync::Arc;

use crate::event::{Event, EventKind, EventKindSet, Millis, Point};

use super::FsmError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub(crate) usize);

impl StateId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Index of an inner machine referenced by sub-machine transitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct InnerId(pub(crate) usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateKind {
    Initial,
    Standard,
    Terminal,
    Cancelling,
}

impl StateKind {
    pub fn is_final(self) -> bool {
        matches!(self, StateKind::Terminal | StateKind::Cancelling)
    }
}

/// The parts of an event a machine remembers between transitions.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mark {
    pub time: Millis,
    pub position: Option<Point>,
    pub button: Option<u8>,
    pub touch_id: Option<u32>,
}

impl Mark {
    pub(crate) fn of(e: &Event) -> Mark {
        Mark { time: e.time(), position: e.position(), button: e.button(), touch_id: e.touch_id() }
    }
}

/// Machine-local context visible to guards and state hooks.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FsmContext {
    /// Time the current state was entered.
    pub entered_at: Millis,
    /// Event that took the machine out of its initial state.
    pub origin: Option<Mark>,
    /// Event that entered the current state.
    pub last: Option<Mark>,
}

pub type Guard = Arc<dyn Fn(&Event, &FsmContext) -> bool + Send + Sync>;
pub type StateHook = Arc<dyn Fn(&FsmContext) + Send + Sync>;

#[derive(Clone)]
pub enum Trigger {
    Event(EventKind),
    Timeout(Millis),
    Sub(InnerId),
}

impl fmt::Debug for Trigger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Trigger::Event(k) => write!(f, "{k}"),
            Trigger::Timeout(ms) => write!(f, "timeout({ms}ms)"),
            Trigger::Sub(i) => write!(f, "sub#{}", i.0),
        }
    }
}

#[derive(Clone)]
pub struct Transition {
    pub source: StateId,
    pub target: StateId,
    pub trigger: Trigger,
    pub(crate) guard: Option<Guard>,
}

impl Transition {
    pub fn has_guard(&self) -> bool {
        self.guard.is_some()
    }
}

impl fmt::Debug for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} --{:?}{}--> {:?}", self.source, self.trigger, if self.guard.is_some() { "[g]" } else { "" }, self.target)
    }
}

pub(crate) struct StateDef {
    pub(crate) name: Arc<str>,
    pub(crate) kind: StateKind,
    pub(crate) on_entry: Vec<StateHook>,
    pub(crate) on_exit: Vec<StateHook>,
}

/// What an inner machine is instantiated from.
#[derive(Clone)]
pub enum FsmTemplate {
    Graph(Arc<FsmSpec>),
    /// `required` concurrent copies of `copy`, one per touch id.
    Concurrent { copy: Arc<FsmSpec>, required: usize },
}

impl FsmTemplate {
    pub fn name(&self) -> &str {
        match self {
            FsmTemplate::Graph(s) | FsmTemplate::Concurrent { copy: s, .. } => s.name(),
        }
    }
}

/// A validated state graph. Shared between running machines.
pub struct FsmSpec {
    pub(crate) name: String,
    pub(crate) states: Vec<StateDef>,
    pub(crate) transitions: Vec<Transition>,
    pub(crate) outgoing: Vec<Vec<usize>>,
    pub(crate) own_kinds: Vec<EventKindSet>,
    pub(crate) subs: Vec<Vec<usize>>,
    pub(crate) timeout: Vec<Option<usize>>,
    pub(crate) inner: Vec<FsmTemplate>,
}

impl FsmSpec {
    pub const INITIAL: StateId = StateId(0);

    pub fn builder(name: impl Into<String>) -> FsmBuilder {
        FsmBuilder::new(name)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.states.len()).map(StateId)
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s.0].name
    }

    pub fn state_kind(&self, s: StateId) -> StateKind {
        self.states[s.0].kind
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| &*s.name == name).map(StateId)
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transitions_from(&self, s: StateId) -> impl Iterator<Item = &Transition> {
        self.outgoing[s.0].iter().map(move |&t| &self.transitions[t])
    }

    pub fn inner_templates(&self) -> &[FsmTemplate] {
        &self.inner
    }

    /// States reachable from the initial state, following every trigger.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.states.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(s) = stack.pop() {
            for &t in &self.outgoing[s] {
                let to = self.transitions[t].target.0;
                if !seen[to] {
                    seen[to] = true;
                    stack.push(to);
                }
            }
        }
        seen
    }
}

impl fmt::Debug for FsmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FsmSpec")
            .field("name", &self.name)
            .field("states", &self.states.iter().map(|s| (&*s.name, s.kind)).collect::<Vec<_>>())
            .field("transitions", &self.transitions)
            .finish()
    }
}

/// Incremental construction of an [`FsmSpec`].
///
/// The initial state exists from the start and is named `init`.
pub struct FsmBuilder {
    name: String,
    states: Vec<StateDef>,
    transitions: Vec<Transition>,
    inner: Vec<FsmTemplate>,
}

impl FsmBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        FsmBuilder {
            name: name.into(),
            states: vec![StateDef { name: Arc::from("init"), kind: StateKind::Initial, on_entry: Vec::new(), on_exit: Vec::new() }],
            transitions: Vec::new(),
            inner: Vec::new(),
        }
    }

    pub fn initial(&self) -> StateId {
        FsmSpec::INITIAL
    }

    fn add_state(&mut self, name: &str, kind: StateKind) -> StateId {
        self.states.push(StateDef { name: Arc::from(name), kind, on_entry: Vec::new(), on_exit: Vec::new() });
        StateId(self.states.len() - 1)
    }

    pub fn state(&mut self, name: &str) -> StateId {
        self.add_state(name, StateKind::Standard)
    }

    pub fn terminal(&mut self, name: &str) -> StateId {
        self.add_state(name, StateKind::Terminal)
    }

    pub fn cancelling(&mut self, name: &str) -> StateId {
        self.add_state(name, StateKind::Cancelling)
    }

    pub fn inner(&mut self, template: FsmTemplate) -> InnerId {
        self.inner.push(template);
        InnerId(self.inner.len() - 1)
    }

    pub fn on(&mut self, source: StateId, target: StateId, kind: EventKind) -> &mut Self {
        self.transitions.push(Transition { source, target, trigger: Trigger::Event(kind), guard: None });
        self
    }

    pub fn on_if(
        &mut self,
        source: StateId,
        target: StateId,
        kind: EventKind,
        guard: impl Fn(&Event, &FsmContext) -> bool + Send + Sync + 'static,
    ) -> &mut Self {
        self.transitions.push(Transition { source, target, trigger: Trigger::Event(kind), guard: Some(Arc::new(guard)) });
        self
    }

    pub fn on_timeout(&mut self, source: StateId, target: StateId, after: Millis) -> &mut Self {
        self.transitions.push(Transition { source, target, trigger: Trigger::Timeout(after), guard: None });
        self
    }

    pub fn on_sub(&mut self, source: StateId, target: StateId, inner: InnerId) -> &mut Self {
        self.transitions.push(Transition { source, target, trigger: Trigger::Sub(inner), guard: None });
        self
    }

    pub fn on_entry(&mut self, state: StateId, hook: impl Fn(&FsmContext) + Send + Sync + 'static) -> &mut Self {
        self.states[state.0].on_entry.push(Arc::new(hook));
        self
    }

    pub fn on_exit(&mut self, state: StateId, hook: impl Fn(&FsmContext) + Send + Sync + 'static) -> &mut Self {
        self.states[state.0].on_exit.push(Arc::new(hook));
        self
    }

    pub fn build(self) -> Result<Arc<FsmSpec>, FsmError> {
        let n = self.states.len();
        let mut outgoing = vec![Vec::new(); n];
        let mut own_kinds = vec![EventKindSet::EMPTY; n];
        let mut subs: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut timeout = vec![None; n];
        for (i, t) in self.transitions.iter().enumerate() {
            if t.source.0 >= n || t.target.0 >= n {
                return Err(FsmError::UnknownState(format!("{:?}", t)));
            }
            let src = &self.states[t.source.0];
            if src.kind.is_final() {
                return Err(FsmError::TransitionFromFinal(src.name.to_string()));
            }
            match t.trigger {
                Trigger::Event(kind) => own_kinds[t.source.0].insert(kind),
                Trigger::Timeout(ms) => {
                    if ms == 0 {
                        return Err(FsmError::ZeroTimeout(src.name.to_string()));
                    }
                    if timeout[t.source.0].replace(i).is_some() {
                        return Err(FsmError::DuplicateTimeout(src.name.to_string()));
                    }
                }
                Trigger::Sub(InnerId(k)) => {
                    if k >= self.inner.len() {
                        return Err(FsmError::UnknownInner(k));
                    }
                    if !subs[t.source.0].contains(&k) {
                        subs[t.source.0].push(k);
                    }
                }
            }
            outgoing[t.source.0].push(i);
        }
        let spec = FsmSpec {
            name: self.name,
            states: self.states,
            transitions: self.transitions,
            outgoing,
            own_kinds,
            subs,
            timeout,
            inner: self.inner,
        };
        let reach = spec.reachable();
        if !spec.states().any(|s| reach[s.0] && spec.state_kind(s).is_final()) {
            return Err(FsmError::NoFinalState(spec.name));
        }
        Ok(Arc::new(spec))
    }
}
