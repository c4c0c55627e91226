//! Dispatch-overhead benchmark: bindings against hand-written listeners.
//!
//! The direct path registers per-kind listeners that implement the same
//! drag-to-translate behaviour by hand, sharing the command type, the
//! interaction data and the rule evaluator with the binding path.

use std::collections::HashMap;
use std::time::Instant;

use serde::Serialize;

use super::{ReplayError, Rule, Scenario};
use crate::command::{CommandInstance, History};
use crate::demo::{DemoCommand, Drawing, Shape, Translate};
use crate::event::{Event, EventKind, NodeId};
use crate::interaction::{is_escape, FromToData, InteractionData, NodeList};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathTiming {
    pub mean_ns_per_event: f64,
    pub stddev_ns_per_event: f64,
    pub samples: Vec<f64>,
}

impl PathTiming {
    fn from_samples(samples: Vec<f64>) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
        PathTiming { mean_ns_per_event: mean, stddev_ns_per_event: var.sqrt(), samples }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub events: usize,
    pub reps: usize,
    pub binding: PathTiming,
    pub direct: PathTiming,
    /// binding mean / direct mean.
    pub ratio: f64,
    pub model: Vec<Shape>,
    pub history_len: usize,
}

enum Phase {
    Idle,
    Pressed,
    Dragged,
}

struct DirectDnd {
    nodes: Vec<NodeId>,
    list: Option<NodeList>,
    rule: Option<Rule>,
    phase: Phase,
    data: InteractionData,
    cmd: Option<Box<dyn DemoCommand>>,
}

impl DirectDnd {
    fn targets(&self, n: &NodeId) -> bool {
        self.nodes.iter().any(|x| x == n) || self.list.as_ref().is_some_and(|l| l.contains(n))
    }

    fn holds(&self) -> bool {
        self.rule.as_ref().map_or(true, |r| r.eval(&self.data))
    }

    fn from_to(&mut self) -> &mut FromToData {
        match &mut self.data {
            InteractionData::FromTo(f) => f,
            _ => unreachable!("dnd data"),
        }
    }

    fn update(&mut self, drawing: &Drawing) {
        if !self.holds() {
            return;
        }
        if self.cmd.is_none() {
            let Some(src) = self.from_to().src_object.clone() else { return };
            match Translate::new(drawing, &src) {
                Ok(t) => self.cmd = Some(Box::new(t)),
                Err(_) => return self.reset(),
            }
        }
        if let Some(c) = self.cmd.as_mut() {
            c.update(&self.data);
        }
    }

    fn reset(&mut self) {
        self.phase = Phase::Idle;
        self.data = InteractionData::FromTo(FromToData::default());
        self.cmd = None;
    }

    fn handle(&mut self, e: &Event, drawing: &Drawing, history: &mut History<CommandInstance>) {
        if !self.targets(e.target()) {
            return;
        }
        match (e.kind(), &self.phase) {
            (EventKind::PointerPress, Phase::Idle) => {
                self.from_to().set_src(e);
                self.phase = Phase::Pressed;
                self.update(drawing);
            }
            (EventKind::PointerMove, Phase::Pressed | Phase::Dragged) => {
                self.from_to().set_tgt(e);
                self.phase = Phase::Dragged;
                self.update(drawing);
            }
            (EventKind::PointerRelease, Phase::Pressed) => self.reset(),
            (EventKind::PointerRelease, Phase::Dragged) => {
                self.from_to().set_tgt(e);
                self.update(drawing);
                if self.holds() {
                    if let Some(c) = self.cmd.take() {
                        let mut inst = CommandInstance::new(c);
                        if inst.can_execute() && inst.execute().is_ok() {
                            history.add(inst);
                        }
                    }
                }
                self.reset();
            }
            (EventKind::KeyPress, Phase::Dragged) if is_escape(e) => self.reset(),
            _ => {}
        }
    }
}

/// Hand-written listeners keyed by event kind.
struct Direct {
    drawing: Drawing,
    history: History<CommandInstance>,
    handlers: Vec<DirectDnd>,
    listeners: HashMap<EventKind, Vec<usize>>,
}

impl Direct {
    fn build(scenario: &Scenario) -> Result<Direct, ReplayError> {
        let drawing = Drawing::new(scenario.shapes.iter().cloned());
        let mut handlers = Vec::new();
        let mut listeners: HashMap<EventKind, Vec<usize>> = HashMap::new();
        for (i, b) in scenario.bindings.iter().enumerate() {
            let plain = b.params.is_empty() && !b.continuous && !b.strict_start && b.throttle == 0 && !b.consume && b.keys.is_none();
            if b.interaction != "dnd" || b.command != "translate" || !plain {
                return Err(ReplayError::Bench(format!(
                    "binding {i}: no direct-callback counterpart (supported: plain dnd bindings producing translate)"
                )));
            }
            let rule = b.when.as_deref().map(Rule::parse).transpose().map_err(|e| ReplayError::Scenario(e.to_string()))?;
            handlers.push(DirectDnd {
                nodes: b.on.iter().map(|n| NodeId::from(n.as_str())).collect(),
                list: b.on_shapes.then(|| drawing.node_list()),
                rule,
                phase: Phase::Idle,
                data: InteractionData::FromTo(FromToData::default()),
                cmd: None,
            });
            for k in [EventKind::PointerPress, EventKind::PointerMove, EventKind::PointerRelease, EventKind::KeyPress] {
                listeners.entry(k).or_default().push(i);
            }
        }
        Ok(Direct { drawing, history: History::new(scenario.history_capacity), handlers, listeners })
    }

    fn dispatch(&mut self, e: &Event) {
        if let Some(ls) = self.listeners.get(&e.kind()) {
            for &i in ls {
                self.handlers[i].handle(e, &self.drawing, &mut self.history);
            }
        }
    }
}

/// Times both paths over `reps` sequential runs of `events`, and fails
/// unless they end in the same model and history length.
pub fn run_benchmark(scenario: &Scenario, events: &[Event], reps: usize) -> Result<BenchReport, ReplayError> {
    if reps < 3 {
        return Err(ReplayError::Bench(format!("need at least 3 repetitions, got {reps}")));
    }
    if events.is_empty() {
        return Err(ReplayError::Bench("empty trace".into()));
    }
    Direct::build(scenario)?;
    let per_event = |ns: u128| ns as f64 / events.len() as f64;
    let (mut bs, mut ds) = (Vec::with_capacity(reps), Vec::with_capacity(reps));
    let mut end = None;
    // One untimed warm-up round, then alternate which path goes first.
    for rep in 0..=reps {
        let mut s = scenario.session(None)?;
        let mut d = Direct::build(scenario)?;
        let mut binding_ns = 0;
        let mut direct_ns = 0;
        for path in [rep % 2, 1 - rep % 2] {
            let start = Instant::now();
            if path == 0 {
                for e in events {
                    s.ctx.dispatch(e)?;
                }
                s.ctx.settle()?;
                binding_ns = start.elapsed().as_nanos();
            } else {
                for e in events {
                    d.dispatch(e);
                }
                direct_ns = start.elapsed().as_nanos();
            }
        }
        if rep > 0 {
            bs.push(per_event(binding_ns));
            ds.push(per_event(direct_ns));
        }

        let (bm, dm) = (s.drawing.shapes(), d.drawing.shapes());
        let (bh, dh) = (s.ctx.history().undos().count(), d.history.undos().count());
        if bm != dm || bh != dh {
            return Err(ReplayError::Bench(format!(
                "paths diverged: binding history {bh}, direct history {dh}, models equal: {}",
                bm == dm
            )));
        }
        end = Some((bm, bh));
    }
    let (model, history_len) = end.expect("reps >= 3");
    let (binding, direct) = (PathTiming::from_samples(bs), PathTiming::from_samples(ds));
    Ok(BenchReport { events: events.len(), reps, ratio: binding.mean_ns_per_event / direct.mean_ns_per_event, binding, direct, model, history_len })
}

/// Press on `node` at `at`, `moves` one-pixel moves, release.
pub fn synthetic_drag(node: &str, at: (f64, f64), moves: usize) -> Vec<Event> {
    let node = NodeId::from(node);
    let mut ev = Vec::with_capacity(moves + 2);
    let p = |i: usize| crate::event::Point::new(at.0 + (i % 97) as f64 + 1.0, at.1 + (i % 89) as f64 + 1.0);
    ev.push(Event::pointer(EventKind::PointerPress, 0, node.clone(), at.into(), 0));
    for i in 0..moves {
        ev.push(Event::pointer(EventKind::PointerMove, 1 + i as u64, node.clone(), p(i), 0));
    }
    ev.push(Event::pointer(EventKind::PointerRelease, 2 + moves as u64, node, p(moves.saturating_sub(1)), 0));
    ev
}
