//! Oracles and generators shared by the integration tests and the
//! acceptance suite.
#![allow(dead_code)]

use std::cell::RefCell;
use std::collections::{HashMap, VecDeque};
use std::rc::Rc;
use std::sync::{Arc, Mutex};

use bindkit::binder::{binder, BindError, Routine, RoutineKind, RoutineStage};
use bindkit::binding::{BindingContext, CommandEvent};
use bindkit::clock::VirtualClock;
use bindkit::demo::{DelShapes, Drawing, Shape};
use bindkit::testkit::{CommandMeta, CommandSuiteSpec};
use bindkit::command::{Command, CommandError, CommandId, Completion, Undoable};
use bindkit::event::{Event, EventKind, Millis, NodeId, Point};
use bindkit::fsm::{Fsm, FsmOutcome, FsmSpec, Signal, Signals, TimerToken};
use bindkit::interaction::{self, construct_interaction, InteractionData, NodeList, PointData, UserInteraction};
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{json, Value};

pub const N1: &str = "n1";

/// Every catalog entry, with the parameter sets worth telling apart.
pub fn catalog() -> Vec<(&'static str, Value)> {
    vec![
        ("click", Value::Null),
        ("double_click", Value::Null),
        ("double_click", json!({"alt": true})),
        ("drag_lock", Value::Null),
        ("drag_lock", json!({"alt": true})),
        ("dnd", Value::Null),
        ("press", Value::Null),
        ("key_pressed", Value::Null),
        ("keys_typed", Value::Null),
        ("multi_touch", json!({"n": 1})),
        ("multi_touch", json!({"n": 2})),
        ("multi_touch", json!({"n": 3})),
        ("tap", json!({"n": 1})),
        ("tap", json!({"n": 3})),
        ("scroll", Value::Null),
    ]
}

/// One recorded step: time, signals, state after the step.
pub type SignalLog = Vec<(Millis, Signals, String)>;

/// Runs one interaction alone the way a binding runs it: timeouts due at
/// an event's time fire first, and a finished machine is reinitialised.
pub struct Driver {
    pub interaction: UserInteraction<InteractionData>,
    clock: VirtualClock<TimerToken>,
    timers: Vec<(TimerToken, Millis)>,
    pub log: SignalLog,
}

impl Driver {
    /// `naive` hands every event to the machine instead of only the kinds
    /// the current state listens to.
    pub fn new(mut interaction: UserInteraction<InteractionData>, naive: bool) -> Self {
        interaction.register_nodes([NodeId::from(N1)]);
        interaction.set_kind_filter(!naive);
        Driver { interaction, clock: VirtualClock::new(), timers: Vec::new(), log: Vec::new() }
    }

    pub fn catalog(name: &str, params: &Value, naive: bool) -> Self {
        Driver::new(construct_interaction(name, params).expect("catalog entry"), naive)
    }

    fn record(&mut self, t: Millis, out: FsmOutcome) {
        self.interaction.drain_timers(&mut self.timers);
        for (token, deadline) in self.timers.drain(..) {
            self.clock.schedule(deadline, token);
        }
        if !out.signals.is_empty() {
            self.log.push((t, out.signals, self.interaction.fsm().current_state_name().to_owned()));
        }
        if self.interaction.fsm().is_over() {
            self.interaction.reinit();
        }
    }

    fn advance(&mut self, to: Millis) {
        while let Some(d) = self.clock.next_deadline().filter(|&d| d <= to) {
            for token in self.clock.advance_to(d).expect("monotone") {
                let out = self.interaction.on_timeout(token);
                self.record(d, out);
            }
        }
        self.clock.advance_to(to).expect("monotone");
    }

    pub fn feed(&mut self, e: &Event) {
        self.advance(e.time());
        let out = self.interaction.process(e);
        self.record(e.time(), out);
    }

    /// Fires every pending timeout.
    pub fn finish(&mut self) {
        while let Some(d) = self.clock.next_deadline() {
            self.advance(d);
        }
    }

    pub fn run(mut self, events: &[Event]) -> SignalLog {
        for e in events {
            self.feed(e);
        }
        self.finish();
        self.log
    }

    pub fn count(log: &SignalLog, s: Signal) -> usize {
        log.iter().filter(|(_, sig, _)| sig.contains(s)).count()
    }
}

/// A random, time-ordered trace mixing every event kind, mostly on `n1`.
pub fn random_trace(rng: &mut impl Rng, max_len: usize) -> Vec<Event> {
    let len = rng.gen_range(0..=max_len);
    let gaps: [Millis; 8] = [0, 1, 20, 100, 499, 600, 999, 1001];
    let keys = ["ESC", "Escape", "a", "Delete"];
    let mut t = 0;
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        t += if rng.gen_bool(0.1) { rng.gen_range(0..1600) } else { *gaps.choose(rng).unwrap() };
        let target = NodeId::from(if rng.gen_bool(0.9) { N1 } else { "n2" });
        let at = Point::new(f64::from(rng.gen_range(0..6u8)), f64::from(rng.gen_range(0..6u8)));
        let kind = *EventKind::ALL.choose(rng).unwrap();
        let e = if kind.is_pointer() {
            Event::pointer(kind, t, target, at, if rng.gen_bool(0.8) { 0 } else { rng.gen_range(1..3) })
        } else if kind.is_key() {
            Event::key_event(kind, t, target, keys.choose(rng).unwrap())
        } else if kind.is_touch() {
            Event::touch(kind, t, target, rng.gen_range(1..4), at)
        } else {
            Event::scroll(t, target, at)
        };
        out.push(e);
    }
    out
}

/// Always executable, undoable, and counted.
pub struct Counted {
    pub runs: Rc<RefCell<u32>>,
}

impl Command for Counted {
    fn execution(&mut self) -> Result<Completion, CommandError> {
        *self.runs.borrow_mut() += 1;
        Ok(Completion::Done)
    }
    fn undoable(&mut self) -> Option<&mut dyn Undoable> {
        Some(self)
    }
}

impl Undoable for Counted {
    fn undo(&mut self) -> Result<(), CommandError> {
        *self.runs.borrow_mut() -= 1;
        Ok(())
    }
}

/// What a binding did with one trace.
#[derive(Debug, Default)]
pub struct ExecutionAudit {
    pub created: usize,
    pub done: usize,
    pub discarded: usize,
    /// Commands seen in more than one execution, or executions with more
    /// than one command.
    pub violations: Vec<String>,
}

/// Binds the catalog interaction on `n1` to [`Counted`] and replays `events`.
pub fn audit_binding(name: &str, params: &Value, events: &[Event]) -> ExecutionAudit {
    let mut ctx = BindingContext::new();
    ctx.set_click_synthesis(false);
    let seen: Rc<RefCell<Vec<(CommandEvent, CommandId, u64, bool)>>> = Rc::default();
    let s = seen.clone();
    ctx.observe(move |ev, rec| {
        s.borrow_mut().push((ev, rec.command, rec.execution, rec.status == bindkit::command::CommandStatus::Discarded));
    });
    let (name, params) = (name.to_owned(), params.clone());
    let runs = Rc::new(RefCell::new(0));
    binder()
        .using(move || construct_interaction(&name, &params).expect("catalog entry"))
        .to_produce(move |_| Counted { runs: runs.clone() })
        .on([N1])
        .bind(&mut ctx)
        .expect("complete binder");
    for e in events {
        ctx.dispatch(e).expect("monotone trace");
    }
    ctx.settle().expect("quiescence");

    let mut audit = ExecutionAudit::default();
    let mut exec_of: HashMap<CommandId, u64> = HashMap::new();
    let mut cmd_of: HashMap<u64, CommandId> = HashMap::new();
    for &(ev, id, exec, discarded) in seen.borrow().iter() {
        match ev {
            CommandEvent::Created => audit.created += 1,
            CommandEvent::Settled if discarded => audit.discarded += 1,
            CommandEvent::Settled => audit.done += 1,
        }
        if *exec_of.entry(id).or_insert(exec) != exec {
            audit.violations.push(format!("command {id} seen in executions {} and {exec}", exec_of[&id]));
        }
        if *cmd_of.entry(exec).or_insert(id) != id {
            audit.violations.push(format!("execution {exec} has commands {} and {id}", cmd_of[&exec]));
        }
    }
    audit
}

/// Reference model of the undo history: two plain stacks, the undo one
/// dropping its oldest entry past `capacity`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoStacks {
    pub undo: Vec<u32>,
    pub redo: Vec<u32>,
    pub capacity: usize,
}

impl TwoStacks {
    pub fn new(capacity: usize) -> Self {
        TwoStacks { undo: Vec::new(), redo: Vec::new(), capacity }
    }

    pub fn add(&mut self, x: u32) -> Option<u32> {
        self.redo.clear();
        self.undo.push(x);
        (self.undo.len() > self.capacity).then(|| self.undo.remove(0))
    }

    pub fn undo(&mut self) -> Option<u32> {
        let x = self.undo.pop()?;
        self.redo.push(x);
        Some(x)
    }

    pub fn redo(&mut self) -> Option<u32> {
        let x = self.redo.pop()?;
        self.undo.push(x);
        Some(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HistoryOp {
    Add(u32),
    Undo,
    Redo,
}

/// `add_pct` percent adds, the rest split between undo and redo.
pub fn random_history_ops(rng: &mut impl Rng, max_len: usize, add_pct: u32) -> Vec<HistoryOp> {
    let len = rng.gen_range(0..=max_len);
    let mut next = 0;
    (0..len)
        .map(|_| {
            if rng.gen_range(0..100) < add_pct {
                next += 1;
                HistoryOp::Add(next)
            } else if rng.gen_bool(0.6) {
                HistoryOp::Undo
            } else {
                HistoryOp::Redo
            }
        })
        .collect()
}

/// First divergence between the history and the model, if any.
pub fn history_mismatch(ops: &[HistoryOp], capacity: usize) -> Option<String> {
    let mut h = bindkit::command::History::new(capacity);
    let mut m = TwoStacks::new(capacity);
    for (i, op) in ops.iter().enumerate() {
        let (got, want) = match *op {
            HistoryOp::Add(x) => (h.add(x), m.add(x)),
            HistoryOp::Undo => (h.undo().copied(), m.undo()),
            HistoryOp::Redo => (h.redo().copied(), m.redo()),
        };
        let undo: Vec<u32> = h.undos().copied().collect();
        let redo: Vec<u32> = h.redos().copied().collect();
        if got != want || undo != m.undo || redo != m.redo {
            return Some(format!("step {i} {op:?}: got {got:?} {undo:?}/{redo:?}, model {want:?} {:?}/{:?}", m.undo, m.redo));
        }
    }
    None
}

/// An interaction that records which moves and releases reach it.
pub fn recorder(seen: Arc<Mutex<Vec<(EventKind, Millis)>>>) -> UserInteraction<()> {
    let spec: Arc<FsmSpec> = {
        let mut b = FsmSpec::builder("recorder");
        let init = b.initial();
        let moving = b.state("moving");
        let done = b.terminal("done");
        b.on(init, moving, EventKind::PointerMove)
            .on(moving, moving, EventKind::PointerMove)
            .on(init, done, EventKind::PointerRelease)
            .on(moving, done, EventKind::PointerRelease);
        b.build().expect("recorder machine")
    };
    UserInteraction::new("recorder", Fsm::new(spec), || (), move |_, step| {
        let e = step.event.expect("event transition");
        seen.lock().unwrap().push((e.kind(), e.time()));
    })
}

pub struct Noop;

impl Command for Noop {
    fn execution(&mut self) -> Result<Completion, CommandError> {
        Ok(Completion::Done)
    }
}

/// `(is_move, t)` steps on `n1`.
pub type MoveTrace = Vec<(bool, Millis)>;

fn step_event(is_move: bool, t: Millis) -> Event {
    let kind = if is_move { EventKind::PointerMove } else { EventKind::PointerRelease };
    Event::pointer(kind, t, NodeId::from(N1), Point::new(0.0, 0.0), 0)
}

/// What the engine delivers to an interaction behind a throttle of `ms`.
/// `None` means no throttle routine at all.
pub fn throttled(ms: Option<Millis>, trace: &[(bool, Millis)]) -> Vec<(EventKind, Millis)> {
    let seen = Arc::new(Mutex::new(Vec::new()));
    let mut ctx = BindingContext::new();
    let s = seen.clone();
    let b = binder().using(move || recorder(s.clone())).to_produce(|_| Noop).on([N1]);
    match ms {
        Some(ms) => b.throttle(ms).bind(&mut ctx),
        None => b.bind(&mut ctx),
    }
    .expect("complete binder");
    for &(m, t) in trace {
        ctx.dispatch(&step_event(m, t)).expect("monotone trace");
    }
    ctx.settle().expect("quiescence");
    let v = seen.lock().unwrap().clone();
    v
}

/// The coalescing rule written out directly: within a window opened by an
/// event, a same-kind event replaces the pending one; a different kind
/// flushes the pending event and passes through; the pending event is
/// delivered with its own timestamp when the window closes.
pub fn throttle_oracle(ms: Millis, trace: &[(bool, Millis)]) -> Vec<(EventKind, Millis)> {
    let kind = |m: bool| if m { EventKind::PointerMove } else { EventKind::PointerRelease };
    if ms == 0 {
        return trace.iter().map(|&(m, t)| (kind(m), t)).collect();
    }
    let mut out = Vec::new();
    let mut window: Option<(Millis, (bool, Millis))> = None;
    for &(m, t) in trace {
        if let Some((close, p)) = window {
            if close <= t {
                out.push((kind(p.0), p.1));
                window = None;
            }
        }
        match window {
            None => window = Some((t + ms, (m, t))),
            Some((close, p)) if p.0 == m => window = Some((close, (m, t))),
            Some((_, p)) => {
                out.push((kind(p.0), p.1));
                out.push((kind(m), t));
                window = None;
            }
        }
    }
    if let Some((_, p)) = window {
        out.push((kind(p.0), p.1));
    }
    out
}

pub fn random_move_trace(rng: &mut impl Rng, max_len: usize) -> MoveTrace {
    let len = rng.gen_range(0..=max_len);
    let mut t = 0;
    (0..len)
        .map(|_| {
            t += rng.gen_range(0..30);
            (rng.gen_bool(0.8), t)
        })
        .collect()
}

/// Line-level differences between two texts of equal line count.
pub fn changed_lines<'a>(a: &'a str, b: &'a str) -> Option<Vec<(&'a str, &'a str)>> {
    let (la, lb): (Vec<_>, Vec<_>) = (a.lines().collect(), b.lines().collect());
    (la.len() == lb.len()).then(|| la.into_iter().zip(lb).filter(|(x, y)| x != y).collect())
}

/// Whether `needles` occur in `hay` in order, each as a whole line.
pub fn lines_in_order(needles: &[&str], hay: &str) -> Result<(), String> {
    let mut rest: VecDeque<&str> = hay.lines().collect();
    for n in needles {
        loop {
            match rest.pop_front() {
                Some(l) if l == *n => break,
                Some(_) => {}
                None => return Err(format!("line not found in order: {n}")),
            }
        }
    }
    Ok(())
}

pub fn data_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data")
}

pub fn data_file(name: &str) -> String {
    data_dir().join(name).to_str().expect("utf-8 path").to_owned()
}

/// A routine of the given kind with a throwaway argument.
pub fn routine(kind: RoutineKind, salt: u32) -> Routine<PointData, Noop> {
    match kind {
        RoutineKind::Using => Routine::Using(Rc::new(interaction::click)),
        RoutineKind::ToProduce => Routine::ToProduce(Rc::new(|_| Ok(Noop))),
        RoutineKind::On => Routine::On(vec![NodeId::from(format!("n{salt}").as_str())]),
        RoutineKind::OnDynamic => Routine::OnDynamic(NodeList::new()),
        RoutineKind::First => Routine::First(Rc::new(|_, _| {})),
        RoutineKind::Then => Routine::Then(Rc::new(|_, _| {})),
        RoutineKind::End => Routine::End(Rc::new(|_, _| {})),
        RoutineKind::Cancel => Routine::Cancel(Rc::new(|_| {})),
        RoutineKind::EndOrCancel => Routine::EndOrCancel(Rc::new(|_| {})),
        RoutineKind::When => Routine::When(Rc::new(|_| true)),
        RoutineKind::With => Routine::With(vec![format!("k{salt}")]),
        RoutineKind::Throttle => Routine::Throttle(Millis::from(salt)),
        RoutineKind::StrictStart => Routine::StrictStart(salt % 2 == 0),
        RoutineKind::Continuous => Routine::Continuous(salt % 2 == 0),
        RoutineKind::Consume => Routine::Consume(salt % 2 == 0),
        RoutineKind::Log => Routine::Log(bindkit::binding::LogLevels::ALL),
        RoutineKind::Name => Routine::Name(format!("b{salt}")),
    }
}

/// The ordering rules of a binder written positionally: where the first
/// misplaced routine sits, and whether a well-ordered sequence is complete.
pub fn binder_oracle(seq: &[RoutineKind]) -> (Option<usize>, bool) {
    use RoutineKind::*;
    let pos = |k: RoutineKind, upto: usize| seq[..upto].iter().position(|&x| x == k);
    for (i, &k) in seq.iter().enumerate() {
        let bad = match k {
            Using => pos(Using, i).is_some(),
            ToProduce => pos(Using, i).is_none() || pos(ToProduce, i).is_some(),
            When | With | Cancel | EndOrCancel => pos(Using, i).is_none(),
            First | Then | End => pos(ToProduce, i).is_none(),
            _ => false,
        };
        if bad {
            return (Some(i), false);
        }
    }
    let has = |k| seq.contains(&k);
    (None, has(Using) && has(ToProduce) && (has(On) || has(OnDynamic)))
}

/// Walks every routine sequence up to `max_len` that the binder accepts,
/// checking each rejection and each `bind` against [`binder_oracle`].
/// Returns (accepted sequences, bindable sequences).
pub fn binder_exhaustive(max_len: usize) -> Result<(u64, u64), String> {
    type Stage = RoutineStage<PointData, Noop>;
    let (mut checked, mut bindable) = (0u64, 0u64);
    let mut stack: Vec<(Vec<RoutineKind>, Stage)> = vec![(Vec::new(), Stage::new())];
    while let Some((seq, stage)) = stack.pop() {
        let (violation, complete) = binder_oracle(&seq);
        if violation.is_some() {
            return Err(format!("{seq:?} accepted, oracle rejects at {violation:?}"));
        }
        let bound = stage.bind(&mut BindingContext::new());
        if bound.is_ok() != complete {
            return Err(format!("{seq:?}: bind gave {bound:?}, oracle says complete = {complete}"));
        }
        bindable += u64::from(complete);
        checked += 1;
        if seq.len() == max_len {
            continue;
        }
        for k in RoutineKind::ALL {
            let mut next = seq.clone();
            next.push(k);
            match stage.apply(routine(k, next.len() as u32)) {
                Ok(s) => stack.push((next, s)),
                Err(BindError::Illegal { routine, .. }) if routine == k => {
                    if binder_oracle(&next).0 != Some(seq.len()) {
                        return Err(format!("{next:?} rejected, oracle accepts"));
                    }
                }
                Err(e) => return Err(format!("{next:?}: unexpected {e}")),
            }
        }
    }
    Ok((checked, bindable))
}

pub struct DelWorld {
    pub drawing: Drawing,
    pub shapes: Vec<NodeId>,
    pub before: Vec<Shape>,
}

fn del_world(ids: &[&str]) -> DelWorld {
    let drawing = Drawing::new([
        Shape::new("a", 0.0, 0.0, 5.0, 5.0),
        Shape::new("b", 10.0, 0.0, 5.0, 5.0),
        Shape::new("c", 20.0, 0.0, 5.0, 5.0),
    ]);
    let before = drawing.shapes();
    DelWorld { drawing, shapes: ids.iter().map(|&i| NodeId::from(i)).collect(), before }
}

pub fn del_shapes_suite() -> CommandSuiteSpec<DelWorld> {
    let meta = CommandMeta::new("DelShapes", &["shapes"], true);
    CommandSuiteSpec::new(meta, |w: &DelWorld| DelShapes::new(&w.drawing, w.shapes.clone()))
        .can_do("one shape", || del_world(&["b"]))
        .can_do("two shapes, out of order", || del_world(&["c", "a"]))
        .can_do("every shape", || del_world(&["a", "b", "c"]))
        .cannot_do("nothing selected", || del_world(&[]))
        .cannot_do("unknown shape", || del_world(&["a", "zz"]))
        .do_checker("selected shapes gone", |w| assert!(w.shapes.iter().all(|s| !w.drawing.contains(s))))
        .do_checker("others kept in order", |w| {
            let kept: Vec<_> = w.before.iter().filter(|s| !w.shapes.contains(&s.id)).cloned().collect();
            assert_eq!(w.drawing.shapes(), kept);
        })
        .undo_checker("drawing restored", |w| assert_eq!(w.drawing.shapes(), w.before))
}
