//! Running machines.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::event::{Event, EventKind, EventKindSet, Millis};

use super::spec::{FsmContext, FsmSpec, FsmTemplate, Mark, StateId, StateKind, Trigger};
use super::{Fired, FiredBy, FsmError, FsmOutcome, Signal, Signals};

static NEXT_TOKEN: AtomicU64 = AtomicU64::new(1);

/// Identifies one armed timeout. A token that no longer matches the armed
/// timeout of its machine is stale and ignored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TimerToken(u64);

impl TimerToken {
    fn fresh() -> Self {
        TimerToken(NEXT_TOKEN.fetch_add(1, Ordering::Relaxed))
    }
}

type KeyFilter = Arc<[Box<str>]>;

#[derive(Debug, Clone, Copy)]
struct Armed {
    token: TimerToken,
    deadline: Millis,
    transition: usize,
}

struct Graph {
    spec: Arc<FsmSpec>,
    current: StateId,
    started: bool,
    over: bool,
    ctx: FsmContext,
    armed: Option<Armed>,
    inner: Vec<Fsm>,
    late_start: Option<StateId>,
}

struct Concurrent {
    copy: Arc<FsmSpec>,
    required: usize,
    copies: Vec<(u32, Fsm)>,
    started: bool,
    over: Option<StateKind>,
}

enum Body {
    Graph(Graph),
    Concurrent(Concurrent),
}

/// A running instance of an [`FsmSpec`], or a set of concurrent copies of one.
pub struct Fsm {
    body: Body,
    key_filter: Option<KeyFilter>,
    fresh_timers: Vec<(TimerToken, Millis)>,
}

impl Fsm {
    pub fn new(spec: Arc<FsmSpec>) -> Fsm {
        let inner = spec.inner.iter().map(Fsm::from_template).collect();
        Fsm {
            body: Body::Graph(Graph {
                spec,
                current: FsmSpec::INITIAL,
                started: false,
                over: false,
                ctx: FsmContext::default(),
                armed: None,
                inner,
                late_start: None,
            }),
            key_filter: None,
            fresh_timers: Vec::new(),
        }
    }

    /// A machine running one copy of `copy` per touch id, and starting once
    /// `required` copies run at the same time.
    pub fn concurrent(copy: Arc<FsmSpec>, required: usize) -> Fsm {
        assert!(required > 0, "a concurrent machine needs at least one copy");
        Fsm {
            body: Body::Concurrent(Concurrent { copy, required, copies: Vec::new(), started: false, over: None }),
            key_filter: None,
            fresh_timers: Vec::new(),
        }
    }

    pub fn from_template(template: &FsmTemplate) -> Fsm {
        match template {
            FsmTemplate::Graph(spec) => Fsm::new(spec.clone()),
            FsmTemplate::Concurrent { copy, required } => Fsm::concurrent(copy.clone(), *required),
        }
    }

    /// The graph this machine runs. For a concurrent machine, the copy graph.
    pub fn spec(&self) -> &Arc<FsmSpec> {
        match &self.body {
            Body::Graph(g) => &g.spec,
            Body::Concurrent(c) => &c.copy,
        }
    }

    /// A graph machine without inner machines.
    pub fn is_flat(&self) -> bool {
        matches!(&self.body, Body::Graph(g) if g.inner.is_empty())
    }

    pub fn is_concurrent(&self) -> bool {
        matches!(self.body, Body::Concurrent(_))
    }

    /// Current state of a graph machine; `None` for a concurrent one.
    pub fn current_state(&self) -> Option<StateId> {
        match &self.body {
            Body::Graph(g) => Some(g.current),
            Body::Concurrent(_) => None,
        }
    }

    pub fn current_state_name(&self) -> &str {
        match &self.body {
            Body::Graph(g) => g.spec.state_name(g.current),
            Body::Concurrent(c) => match (c.started, c.over) {
                (_, Some(StateKind::Terminal)) => "ended",
                (_, Some(_)) => "cancelled",
                (true, None) => "running",
                (false, None) => "init",
            },
        }
    }

    pub fn context(&self) -> Option<&FsmContext> {
        match &self.body {
            Body::Graph(g) => Some(&g.ctx),
            Body::Concurrent(_) => None,
        }
    }

    pub fn is_started(&self) -> bool {
        match &self.body {
            Body::Graph(g) => g.started,
            Body::Concurrent(c) => c.started,
        }
    }

    /// True once a terminal or cancelling state is reached, until `reinit`.
    pub fn is_over(&self) -> bool {
        self.finished_kind().is_some()
    }

    pub fn is_running(&self) -> bool {
        self.is_started() && !self.is_over()
    }

    /// Kind of the final state the machine stopped in.
    pub fn finished_kind(&self) -> Option<StateKind> {
        match &self.body {
            Body::Graph(g) if g.over => Some(g.spec.state_kind(g.current)),
            Body::Graph(_) => None,
            Body::Concurrent(c) => c.over,
        }
    }

    pub fn inner_machines(&self) -> &[Fsm] {
        match &self.body {
            Body::Graph(g) => &g.inner,
            Body::Concurrent(_) => &[],
        }
    }

    /// Tracked concurrent copies and their touch ids.
    pub fn copies(&self) -> impl Iterator<Item = (u32, &Fsm)> {
        let copies: &[(u32, Fsm)] = match &self.body {
            Body::Graph(_) => &[],
            Body::Concurrent(c) => &c.copies,
        };
        copies.iter().map(|(id, m)| (*id, m))
    }

    /// Restricts key transitions to the given key names, here and in every
    /// inner machine.
    pub fn set_key_filter(&mut self, keys: Option<&[String]>) {
        let filter: Option<KeyFilter> = keys.map(|k| k.iter().map(|s| s.as_str().into()).collect());
        self.apply_key_filter(filter);
    }

    fn apply_key_filter(&mut self, filter: Option<KeyFilter>) {
        match &mut self.body {
            Body::Graph(g) => g.inner.iter_mut().for_each(|m| m.apply_key_filter(filter.clone())),
            Body::Concurrent(c) => c.copies.iter_mut().for_each(|(_, m)| m.apply_key_filter(filter.clone())),
        }
        self.key_filter = filter;
    }

    /// Delays `started` until the named state is first entered.
    pub fn set_late_start(&mut self, state: &str) -> Result<(), FsmError> {
        match &mut self.body {
            Body::Graph(g) => {
                let id = g.spec.state_by_name(state).ok_or_else(|| FsmError::UnknownState(state.to_owned()))?;
                g.late_start = Some(id);
                Ok(())
            }
            Body::Concurrent(_) => Err(FsmError::LateStartUnsupported),
        }
    }

    /// Back to the initial state. Armed timeouts become stale.
    pub fn reinit(&mut self) {
        self.fresh_timers.clear();
        match &mut self.body {
            Body::Graph(g) => {
                g.current = FsmSpec::INITIAL;
                g.started = false;
                g.over = false;
                g.ctx = FsmContext::default();
                g.armed = None;
                g.inner.iter_mut().for_each(Fsm::reinit);
            }
            Body::Concurrent(c) => {
                c.copies.clear();
                c.started = false;
                c.over = None;
            }
        }
    }

    /// Attaches a fresh copy for `key` on a concurrent machine.
    pub fn spawn_concurrent(&mut self, key: u32) -> Result<(), FsmError> {
        let filter = self.key_filter.clone();
        let Body::Concurrent(c) = &mut self.body else {
            return Err(FsmError::NotConcurrent);
        };
        if c.copies.iter().any(|(id, _)| *id == key) {
            return Err(FsmError::TouchAlreadyTracked(key));
        }
        if c.copies.len() >= c.required {
            return Err(FsmError::ConcurrencyFull(c.required));
        }
        let mut copy = Fsm::new(c.copy.clone());
        copy.apply_key_filter(filter);
        c.copies.push((key, copy));
        Ok(())
    }

    /// Event kinds that could trigger a transition right now.
    pub fn active_event_kinds(&self) -> EventKindSet {
        match &self.body {
            Body::Graph(g) => {
                if g.over {
                    return EventKindSet::EMPTY;
                }
                let cur = g.current.0;
                g.spec.subs[cur].iter().fold(g.spec.own_kinds[cur], |acc, &k| acc.union(g.inner[k].active_event_kinds()))
            }
            Body::Concurrent(c) => {
                if c.over.is_some() {
                    return EventKindSet::EMPTY;
                }
                let mut set = EventKindSet::EMPTY;
                if c.copies.len() < c.required {
                    set.insert(EventKind::TouchStart);
                }
                c.copies.iter().filter(|(_, m)| !m.is_over()).fold(set, |acc, (_, m)| acc.union(m.active_event_kinds()))
            }
        }
    }

    /// Moves timeouts armed since the last call into `out`, inner machines
    /// included.
    pub fn drain_timers(&mut self, out: &mut Vec<(TimerToken, Millis)>) {
        out.append(&mut self.fresh_timers);
        match &mut self.body {
            Body::Graph(g) => g.inner.iter_mut().for_each(|m| m.drain_timers(out)),
            Body::Concurrent(c) => c.copies.iter_mut().for_each(|(_, m)| m.drain_timers(out)),
        }
    }

    pub fn process_event(&mut self, e: &Event) -> FsmOutcome {
        match &mut self.body {
            Body::Graph(_) => self.graph_event(e),
            Body::Concurrent(_) => self.concurrent_event(e),
        }
    }

    pub fn on_timeout(&mut self, token: TimerToken) -> FsmOutcome {
        match &mut self.body {
            Body::Graph(_) => self.graph_timeout(token),
            Body::Concurrent(c) => {
                if c.over.is_some() {
                    return FsmOutcome::IGNORED;
                }
                for idx in 0..c.copies.len() {
                    let out = c.copies[idx].1.on_timeout(token);
                    if out.fired.is_some() {
                        return c.after_copy(idx, out);
                    }
                }
                FsmOutcome::IGNORED
            }
        }
    }

    fn key_allowed(&self, e: &Event) -> bool {
        match (&self.key_filter, e.key()) {
            (Some(filter), Some(key)) => filter.iter().any(|k| &**k == key),
            _ => true,
        }
    }

    fn graph_event(&mut self, e: &Event) -> FsmOutcome {
        let key_ok = self.key_allowed(e);
        let Body::Graph(g) = &mut self.body else { unreachable!() };
        if g.over {
            return FsmOutcome::IGNORED;
        }
        let spec = &*g.spec;
        let cur = g.current.0;
        let mut inner_consumed = false;
        let mut finished: u64 = 0;
        for &k in &spec.subs[cur] {
            let out = g.inner[k].process_event(e);
            inner_consumed |= out.consumed_event;
            if g.inner[k].is_over() {
                finished |= 1 << k;
            }
        }
        let kind = e.kind();
        let chosen = spec.outgoing[cur].iter().copied().find(|&t| {
            let tr = &spec.transitions[t];
            match tr.trigger {
                Trigger::Event(k) => {
                    k == kind
                        && (!kind.is_key() || key_ok)
                        && tr.guard.as_ref().map_or(true, |guard| guard(e, &g.ctx))
                }
                Trigger::Sub(inner) => {
                    finished & (1 << inner.0) != 0 && g.inner[inner.0].finished_kind() == Some(StateKind::Terminal)
                }
                Trigger::Timeout(_) => false,
            }
        });
        let chosen = chosen.map(|t| (t, if matches!(spec.transitions[t].trigger, Trigger::Sub(_)) { FiredBy::Sub } else { FiredBy::Event }));
        let outcome = match chosen {
            Some((t, by)) => self.fire(t, Some(e), e.time(), by),
            None => FsmOutcome { consumed_event: inner_consumed, ..FsmOutcome::IGNORED },
        };
        if finished != 0 {
            let Body::Graph(g) = &mut self.body else { unreachable!() };
            for (k, m) in g.inner.iter_mut().enumerate() {
                if finished & (1 << k) != 0 {
                    m.reinit();
                }
            }
        }
        outcome
    }

    fn graph_timeout(&mut self, token: TimerToken) -> FsmOutcome {
        let Body::Graph(g) = &mut self.body else { unreachable!() };
        if g.over {
            return FsmOutcome::IGNORED;
        }
        if let Some(armed) = g.armed.filter(|a| a.token == token) {
            g.armed = None;
            return self.fire(armed.transition, None, armed.deadline, FiredBy::Timeout);
        }
        let spec = g.spec.clone();
        let cur = g.current.0;
        for &k in &spec.subs[cur] {
            let out = g.inner[k].on_timeout(token);
            if out.fired.is_none() {
                continue;
            }
            if !g.inner[k].is_over() {
                return FsmOutcome { consumed_event: false, ..FsmOutcome::IGNORED };
            }
            let ended = g.inner[k].finished_kind() == Some(StateKind::Terminal);
            g.inner[k].reinit();
            let chosen = spec.outgoing[cur]
                .iter()
                .copied()
                .find(|&t| ended && matches!(spec.transitions[t].trigger, Trigger::Sub(i) if i.0 == k));
            return match chosen {
                Some(t) => {
                    let now = g.ctx.entered_at.max(g.ctx.last.map_or(0, |m| m.time));
                    self.fire(t, None, now, FiredBy::Sub)
                }
                None => FsmOutcome::IGNORED,
            };
        }
        FsmOutcome::IGNORED
    }

    fn fire(&mut self, t: usize, event: Option<&Event>, now: Millis, by: FiredBy) -> FsmOutcome {
        let Body::Graph(g) = &mut self.body else { unreachable!() };
        let spec = &*g.spec;
        let tr = &spec.transitions[t];
        let from = g.current;
        let to = tr.target;
        for hook in &spec.states[from.0].on_exit {
            hook(&g.ctx);
        }
        g.armed = None;
        g.current = to;
        g.ctx.entered_at = now;
        if let Some(e) = event {
            let mark = Mark::of(e);
            if g.ctx.origin.is_none() {
                g.ctx.origin = Some(mark);
            }
            g.ctx.last = Some(mark);
        }
        for hook in &spec.states[to.0].on_entry {
            hook(&g.ctx);
        }
        let refs = &spec.subs[to.0];
        for (k, m) in g.inner.iter_mut().enumerate() {
            if !refs.contains(&k) {
                m.reinit();
            }
        }
        let kind = spec.state_kind(to);
        let mut signals = Signals::NONE;
        if !g.started && g.late_start.map_or(true, |s| s == to) {
            g.started = true;
            signals.add(Signal::Started);
        }
        if kind.is_final() {
            g.over = true;
        }
        if g.started {
            match kind {
                StateKind::Terminal => {
                    signals.add(Signal::Updated);
                    signals.add(Signal::Ended);
                }
                StateKind::Cancelling => signals.add(Signal::Cancelled),
                _ => signals.add(Signal::Updated),
            }
        }
        if !g.over {
            if let Some(ti) = spec.timeout[to.0] {
                let Trigger::Timeout(after) = spec.transitions[ti].trigger else { unreachable!() };
                let armed = Armed { token: TimerToken::fresh(), deadline: now + after, transition: ti };
                g.armed = Some(armed);
                self.fresh_timers.push((armed.token, armed.deadline));
            }
        }
        FsmOutcome { consumed_event: true, signals, fired: Some(Fired { from, to, by, touch: None, released: false }) }
    }

    fn concurrent_event(&mut self, e: &Event) -> FsmOutcome {
        let filter = self.key_filter.clone();
        let Body::Concurrent(c) = &mut self.body else { unreachable!() };
        if c.over.is_some() {
            return FsmOutcome::IGNORED;
        }
        let Some(id) = e.touch_id() else {
            return FsmOutcome::IGNORED;
        };
        let idx = match c.copies.iter().position(|(k, _)| *k == id) {
            Some(idx) => idx,
            None if e.kind() == EventKind::TouchStart && c.copies.len() < c.required => {
                let mut copy = Fsm::new(c.copy.clone());
                copy.apply_key_filter(filter);
                c.copies.push((id, copy));
                let idx = c.copies.len() - 1;
                let out = c.copies[idx].1.process_event(e);
                if out.fired.is_none() {
                    c.copies.pop();
                    return FsmOutcome::IGNORED;
                }
                return c.after_copy(idx, out);
            }
            None => return FsmOutcome::IGNORED,
        };
        let out = c.copies[idx].1.process_event(e);
        if out.fired.is_none() {
            return FsmOutcome { consumed_event: out.consumed_event, ..FsmOutcome::IGNORED };
        }
        c.after_copy(idx, out)
    }
}

impl Concurrent {
    fn after_copy(&mut self, idx: usize, out: FsmOutcome) -> FsmOutcome {
        let id = self.copies[idx].0;
        let mut fired = out.fired.map(|f| Fired { touch: Some(id), ..f });
        let mut signals = Signals::NONE;
        let copy = &self.copies[idx].1;
        if let Some(kind) = copy.finished_kind() {
            if !self.started {
                self.copies.remove(idx);
                if let Some(f) = fired.as_mut() {
                    f.released = true;
                }
            } else if kind == StateKind::Cancelling {
                self.over = Some(StateKind::Cancelling);
                signals.add(Signal::Cancelled);
            } else if self.copies.iter().all(|(_, m)| m.is_over()) {
                self.over = Some(StateKind::Terminal);
                signals.add(Signal::Ended);
            }
        } else if self.copies.iter().filter(|(_, m)| m.is_running()).count() == self.required {
            if self.started {
                signals.add(Signal::Updated);
            } else {
                self.started = true;
                signals.add(Signal::Started);
            }
        }
        FsmOutcome { consumed_event: true, signals, fired }
    }
}

impl std::fmt::Debug for Fsm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fsm")
            .field("spec", &self.spec().name())
            .field("state", &self.current_state_name())
            .field("started", &self.is_started())
            .finish()
    }
}
