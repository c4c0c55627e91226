//! Scenario-driven replay of event traces through the demo editor.
//!
//! A scenario file declares shapes and bindings; a trace is either an
//! NDJSON event file or a robot script. Replays are deterministic.

mod bench;
mod robot;
mod rules;

use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::binder::{Routine, RoutineStage};
use crate::binding::{BindingContext, BindingId, ContextError, LogLevel, LogLevels, LogRecord, MemorySink};
use crate::command::{CommandStatus, History, DEFAULT_CAPACITY};
use crate::demo::{data_target, ChangeColor, DelShapes, DemoCommand, DrawRect, Drawing, Shape, Translate};
use crate::event::{Event, Millis, NodeId};
use crate::interaction::{construct_interaction, InteractionData};
use crate::testkit::BindingsObservation;
use crate::trace::parse_trace;

pub use bench::{run_benchmark, synthetic_drag, BenchReport, PathTiming};
pub use robot::{compile_robot, Layout, Robot, RobotError, RobotScript, RobotStep, Target, DEFAULT_STEP};
pub use rules::{Rule, RuleError};

/// Node that receives pointer events outside every shape.
pub const DEFAULT_BACKGROUND: &str = "canvas";

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("scenario error: {0}")]
    Scenario(String),
    #[error("robot script error: {0}")]
    Robot(#[from] RobotError),
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error("benchmark error: {0}")]
    Bench(String),
}

impl ReplayError {
    /// 2 for I/O and parse errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            ReplayError::Io { .. } | ReplayError::Parse(_) => 2,
            _ => 1,
        }
    }
}

fn default_capacity() -> usize {
    DEFAULT_CAPACITY
}

fn yes() -> bool {
    true
}

fn default_background() -> String {
    DEFAULT_BACKGROUND.to_owned()
}

/// One declarative binding.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BindingSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub interaction: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    pub command: String,
    #[serde(default)]
    pub command_params: Map<String, Value>,
    /// Static target nodes.
    #[serde(default)]
    pub on: Vec<String>,
    /// Also target every shape of the drawing, including shapes added later.
    #[serde(default)]
    pub on_shapes: bool,
    #[serde(default)]
    pub when: Option<String>,
    #[serde(default)]
    pub continuous: bool,
    #[serde(default)]
    pub strict_start: bool,
    #[serde(default)]
    pub throttle: Millis,
    #[serde(default)]
    pub consume: bool,
    #[serde(default)]
    pub log: Vec<LogLevel>,
    #[serde(default)]
    pub keys: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub shapes: Vec<Shape>,
    /// Extra node ids that are not shapes.
    #[serde(default)]
    pub nodes: Vec<String>,
    #[serde(default = "default_background")]
    pub background: String,
    pub bindings: Vec<BindingSpec>,
    #[serde(default = "default_capacity")]
    pub history_capacity: usize,
    #[serde(default = "yes")]
    pub click_synthesis: bool,
}

#[derive(Debug, Clone, PartialEq)]
enum CommandSpec {
    Translate,
    DrawRect,
    ChangeColor(String),
    DelShapes,
}

impl CommandSpec {
    fn parse(name: &str, params: &Map<String, Value>) -> Result<Self, String> {
        let allowed: &[&str] = if name == "change_color" { &["color"] } else { &[] };
        if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(format!("command `{name}` has no parameter `{k}`"));
        }
        Ok(match name {
            "translate" => CommandSpec::Translate,
            "draw_rect" => CommandSpec::DrawRect,
            "change_color" => match params.get("color") {
                Some(Value::String(c)) => CommandSpec::ChangeColor(c.clone()),
                Some(_) => return Err("`color` must be a string".into()),
                None => return Err("command `change_color` needs `color`".into()),
            },
            "del_shapes" => CommandSpec::DelShapes,
            other => return Err(format!("unknown command `{other}`")),
        })
    }

    fn make(&self, drawing: &Drawing, d: &InteractionData) -> Result<Box<dyn DemoCommand>, String> {
        let target = || data_target(d).ok_or_else(|| "interaction data has no target".to_owned());
        Ok(match self {
            CommandSpec::Translate => Box::new(Translate::new(drawing, target()?)?),
            CommandSpec::DrawRect => Box::new(DrawRect::new(drawing)),
            CommandSpec::ChangeColor(c) => Box::new(ChangeColor::new(drawing, target()?, c)),
            CommandSpec::DelShapes => Box::new(DelShapes::new(drawing, vec![target()?.clone()])),
        })
    }
}

/// A scenario instantiated into a live context.
pub struct Session {
    pub ctx: BindingContext,
    pub drawing: Drawing,
    pub observation: BindingsObservation,
    pub logs: MemorySink,
    pub bindings: Vec<BindingId>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario, ReplayError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| ReplayError::Parse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &str) -> Result<Scenario, ReplayError> {
        let text = std::fs::read_to_string(path).map_err(|source| ReplayError::Io { path: path.to_owned(), source })?;
        Scenario::from_json(&text)
    }

    fn known_node(&self, id: &str) -> bool {
        id == self.background || self.nodes.iter().any(|n| n == id) || self.shapes.iter().any(|s| s.id.as_str() == id)
    }

    /// Resolves every reference without dispatching anything.
    pub fn validate(&self) -> Result<(), ReplayError> {
        let err = |i: usize, msg: String| ReplayError::Scenario(format!("binding {i}: {msg}"));
        if self.history_capacity == 0 {
            return Err(ReplayError::Scenario("history_capacity must be positive".into()));
        }
        for (i, s) in self.shapes.iter().enumerate() {
            if self.shapes[..i].iter().any(|o| o.id == s.id) {
                return Err(ReplayError::Scenario(format!("duplicate shape `{}`", s.id)));
            }
        }
        for (i, b) in self.bindings.iter().enumerate() {
            construct_interaction(&b.interaction, &Value::Object(b.params.clone())).map_err(|e| err(i, e.to_string()))?;
            CommandSpec::parse(&b.command, &b.command_params).map_err(|e| err(i, e))?;
            if let Some(w) = &b.when {
                Rule::parse(w).map_err(|e| err(i, e.to_string()))?;
            }
            if let Some(n) = b.on.iter().find(|n| !self.known_node(n)) {
                return Err(err(i, format!("unknown node `{n}`")));
            }
            if b.on.is_empty() && !b.on_shapes {
                return Err(err(i, "no target: set `on` or `on_shapes`".into()));
            }
        }
        Ok(())
    }

    pub fn layout(&self) -> Layout {
        Layout::new(self.shapes.iter().cloned(), Some(NodeId::from(self.background.as_str())))
    }

    /// Builds the drawing and binds everything. `log` replaces the log
    /// levels of every binding when given.
    pub fn session(&self, log: Option<LogLevels>) -> Result<Session, ReplayError> {
        self.validate()?;
        let drawing = Drawing::new(self.shapes.iter().cloned());
        let mut ctx = BindingContext::new().with_history_capacity(self.history_capacity);
        let logs = MemorySink::new();
        ctx.set_log_sink(logs.clone());
        ctx.set_click_synthesis(self.click_synthesis);
        let observation = BindingsObservation::attach(&mut ctx);
        let mut bindings = Vec::new();
        for b in &self.bindings {
            let stage = self.stage(b, &drawing, log)?;
            bindings.push(stage.bind(&mut ctx).map_err(|e| ReplayError::Scenario(e.to_string()))?);
        }
        Ok(Session { ctx, drawing, observation, logs, bindings })
    }

    fn stage(&self, b: &BindingSpec, drawing: &Drawing, log: Option<LogLevels>) -> Result<RoutineStage<InteractionData, Box<dyn DemoCommand>>, ReplayError> {
        let scenario = |e: crate::binder::BindError| ReplayError::Scenario(e.to_string());
        let (name, params) = (b.interaction.clone(), Value::Object(b.params.clone()));
        let cmd = CommandSpec::parse(&b.command, &b.command_params).map_err(ReplayError::Scenario)?;
        let dr = drawing.clone();
        let mut routines: Vec<Routine<InteractionData, Box<dyn DemoCommand>>> = vec![
            Routine::Using(std::rc::Rc::new(move || construct_interaction(&name, &params).expect("validated interaction"))),
            Routine::ToProduce(std::rc::Rc::new(move |d: &InteractionData| cmd.make(&dr, d))),
            Routine::Then(std::rc::Rc::new(|d: &InteractionData, c: &mut Box<dyn DemoCommand>| c.update(d))),
            Routine::Continuous(b.continuous),
            Routine::StrictStart(b.strict_start),
            Routine::Throttle(b.throttle),
            Routine::Consume(b.consume),
            Routine::Log(log.unwrap_or_else(|| b.log.iter().copied().collect())),
        ];
        if !b.on.is_empty() {
            routines.push(Routine::On(b.on.iter().map(|n| NodeId::from(n.as_str())).collect()));
        }
        if b.on_shapes {
            routines.push(Routine::OnDynamic(drawing.node_list()));
        }
        if let Some(w) = &b.when {
            let rule = Rule::parse(w).map_err(|e| ReplayError::Scenario(e.to_string()))?;
            routines.push(Routine::When(std::rc::Rc::new(move |d: &InteractionData| rule.eval(d))));
        }
        if let Some(keys) = &b.keys {
            routines.push(Routine::With(keys.clone()));
        }
        if let Some(n) = &b.name {
            routines.push(Routine::Name(n.clone()));
        }
        routines.into_iter().try_fold(RoutineStage::new(), |s, r| s.apply(r)).map_err(scenario)
    }
}

/// Reads a trace: a robot script (JSON object with a `robot` field) or
/// NDJSON events.
pub fn parse_events(text: &str, scenario: &Scenario) -> Result<Vec<Event>, ReplayError> {
    if let Ok(script) = serde_json::from_str::<RobotScript>(text) {
        return Ok(compile_robot(&script, scenario.layout())?);
    }
    parse_trace(text.as_bytes()).map_err(|e| ReplayError::Parse(e.to_string()))
}

pub fn load_events(path: &str, scenario: &Scenario) -> Result<Vec<Event>, ReplayError> {
    let text = std::fs::read_to_string(path).map_err(|source| ReplayError::Io { path: path.to_owned(), source })?;
    parse_events(&text, scenario)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PostOp {
    Undo,
    Redo,
}

impl std::str::FromStr for PostOp {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "undo" => Ok(PostOp::Undo),
            "redo" => Ok(PostOp::Redo),
            _ => Err(format!("unknown operation `{s}` (expected undo or redo)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProducedEntry {
    pub binding: String,
    pub kind: &'static str,
    pub status: CommandStatus,
    pub execution: u64,
    pub params: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistoryEntry {
    pub kind: &'static str,
    pub params: Value,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct HistoryReport {
    pub undo: Vec<HistoryEntry>,
    pub redo: Vec<HistoryEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PostOpResult {
    pub op: PostOp,
    pub applied: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stats {
    pub events: usize,
    pub commands_created: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub total_ns: u128,
    pub ns_per_event: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayReport {
    pub produced: Vec<ProducedEntry>,
    pub model: Vec<Shape>,
    pub history: HistoryReport,
    pub post_ops: Vec<PostOpResult>,
    pub logs: Vec<LogRecord>,
    pub stats: Stats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl ReplayReport {
    pub fn without_timing(mut self) -> Self {
        self.timing = None;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Registered commands of `kind` currently in the undo history.
    pub fn registered(&self, kind: &str) -> usize {
        self.history.undo.iter().filter(|h| h.kind == kind).count()
    }

    pub fn shape(&self, id: &str) -> Option<&Shape> {
        self.model.iter().find(|s| s.id.as_str() == id)
    }
}

fn history_report(h: &History<crate::command::CommandInstance>) -> HistoryReport {
    let entry = |c: &crate::command::CommandInstance| HistoryEntry { kind: c.kind(), params: c.params() };
    HistoryReport { undo: h.undos().map(entry).collect(), redo: h.redos().map(entry).collect() }
}

#[derive(Debug, Clone, Default)]
pub struct ReplayOptions {
    pub log: Option<LogLevels>,
    pub post: Vec<PostOp>,
}

/// Dispatches `events` in order, then fires pending timeouts.
pub fn run_replay(scenario: &Scenario, events: &[Event], opts: &ReplayOptions) -> Result<ReplayReport, ReplayError> {
    let mut s = scenario.session(opts.log)?;
    let start = Instant::now();
    for e in events {
        s.ctx.dispatch(e)?;
    }
    s.ctx.settle()?;
    let total_ns = start.elapsed().as_nanos();
    let post_ops = opts
        .post
        .iter()
        .map(|&op| {
            let r = match op {
                PostOp::Undo => s.ctx.undo(),
                PostOp::Redo => s.ctx.redo(),
            };
            match r {
                Ok(_) => PostOpResult { op, applied: true, note: None },
                Err(e) => PostOpResult { op, applied: false, note: Some(e.to_string()) },
            }
        })
        .collect();
    let produced = s
        .observation
        .produced()
        .into_iter()
        .map(|p| ProducedEntry { binding: p.binding, kind: p.kind, status: p.status, execution: p.execution, params: p.params })
        .collect();
    Ok(ReplayReport {
        produced,
        model: s.drawing.shapes(),
        history: history_report(s.ctx.history()),
        post_ops,
        logs: s.logs.records(),
        stats: Stats { events: events.len(), commands_created: s.ctx.creations() },
        timing: (!events.is_empty()).then(|| Timing { total_ns, ns_per_event: total_ns as f64 / events.len() as f64 }),
    })
}

/// [`run_replay`] followed by undo/redo operations on the history.
pub fn run_undo_redo(scenario: &Scenario, events: &[Event], post: &[PostOp]) -> Result<ReplayReport, ReplayError> {
    run_replay(scenario, events, &ReplayOptions { log: None, post: post.to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;

    const DRAG_LOCK: &str = r#"{
        "shapes": [{"id": "n1", "x": 0, "y": 0, "w": 10, "h": 10}],
        "bindings": [{"interaction": "drag_lock", "command": "translate", "on": ["n1"], "when": "button == primary"}]
    }"#;

    fn gesture(button_ok: bool) -> Vec<Event> {
        let mut r = Robot::new(Scenario::from_json(DRAG_LOCK).unwrap().layout());
        r.move_to((1.0, 1.0)).unwrap().click(2).unwrap();
        r.glide((4.0, 4.0), 3).unwrap();
        r.click(2).unwrap();
        let mut ev = r.into_events();
        if !button_ok {
            ev = ev
                .into_iter()
                .map(|e| match (e.button(), e.position()) {
                    (Some(_), Some(p)) => Event::pointer(e.kind(), e.time(), e.target().clone(), p, 2),
                    _ => e,
                })
                .collect();
        }
        ev
    }

    #[test]
    fn drag_lock_translate() {
        let s = Scenario::from_json(DRAG_LOCK).unwrap();
        let r = run_replay(&s, &gesture(true), &ReplayOptions::default()).unwrap();
        assert_eq!(r.registered("Translate"), 1, "{}", r.to_json());
        let n1 = r.shape("n1").unwrap();
        assert_eq!((n1.x, n1.y), (3.0, 3.0));
        let r = run_replay(&s, &gesture(false), &ReplayOptions::default()).unwrap();
        assert_eq!(r.registered("Translate"), 0);
        assert!(r.produced.is_empty());
    }

    #[test]
    fn empty_trace_and_undo_redo() {
        let s = Scenario::from_json(DRAG_LOCK).unwrap();
        let r = run_replay(&s, &[], &ReplayOptions::default()).unwrap();
        assert!(r.produced.is_empty() && r.history.undo.is_empty() && r.timing.is_none());
        let r = run_undo_redo(&s, &[], &[PostOp::Undo]).unwrap();
        assert!(!r.post_ops[0].applied);
        let r = run_undo_redo(&s, &gesture(true), &[PostOp::Undo]).unwrap();
        assert_eq!((r.model[0].x, r.model[0].y), (0.0, 0.0));
        let r = run_undo_redo(&s, &gesture(true), &[PostOp::Undo, PostOp::Redo]).unwrap();
        assert_eq!((r.model[0].x, r.model[0].y), (3.0, 3.0));
    }

    #[test]
    fn deterministic_reports() {
        let s = Scenario::from_json(DRAG_LOCK).unwrap();
        let opts = ReplayOptions { log: Some(LogLevels::ALL), post: vec![] };
        let a = run_replay(&s, &gesture(true), &opts).unwrap().without_timing().to_json();
        let b = run_replay(&s, &gesture(true), &opts).unwrap().without_timing().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn scenario_errors() {
        let bad = [
            (r#"{"bindings": [{"interaction": "swipe", "command": "translate", "on": ["canvas"]}]}"#, 1),
            (r#"{"bindings": [{"interaction": "dnd", "command": "rotate", "on": ["canvas"]}]}"#, 1),
            (r#"{"bindings": [{"interaction": "dnd", "command": "translate", "on": ["nope"]}]}"#, 1),
            (r#"{"bindings": [{"interaction": "dnd", "command": "translate", "on": ["canvas"], "when": "size > 2"}]}"#, 1),
            (r#"{"bindings": [{"interaction": "dnd", "command": "change_color", "on": ["canvas"]}]}"#, 1),
            (r#"{"bindings": [{"interaction": "tap", "command": "translate", "on": ["canvas"]}]}"#, 1),
            (r#"{"bindings": [{"interaction": "dnd", "command": "translate"}]}"#, 1),
            (r#"{"bindings": ["#, 2),
            (r#"{"bindings": [], "extra": 1}"#, 2),
        ];
        for (text, code) in bad {
            assert_eq!(Scenario::from_json(text).err().map(|e| e.exit_code()), Some(code), "{text}");
        }
    }

    #[test]
    fn draw_and_delete_on_dynamic_shapes() {
        let s = Scenario::from_json(
            r#"{
            "bindings": [
                {"interaction": "dnd", "command": "draw_rect", "on": ["canvas"]},
                {"interaction": "double_click", "command": "del_shapes", "on_shapes": true, "consume": true}
            ]}"#,
        )
        .unwrap();
        let mut r = Robot::new(s.layout());
        r.move_to((10.0, 10.0)).unwrap().press(0).unwrap().glide((30.0, 40.0), 2).unwrap().release(0).unwrap();
        let draw = r.events().to_vec();
        let r1 = run_replay(&s, &draw, &ReplayOptions::default()).unwrap();
        assert_eq!(r1.model.len(), 1);
        assert_eq!(r1.model[0].id.as_str(), "rect1");
        let mut ev = draw.clone();
        let t = ev.last().unwrap().time() + 100;
        for (i, kind) in [crate::event::EventKind::PointerPress, crate::event::EventKind::PointerRelease].repeat(2).into_iter().enumerate() {
            ev.push(Event::pointer(kind, t + i as Millis * 50, "rect1".into(), crate::event::Point::new(20.0, 20.0), 0));
        }
        let r2 = run_replay(&s, &ev, &ReplayOptions::default()).unwrap();
        assert!(r2.model.is_empty(), "{}", r2.to_json());
        assert_eq!(r2.history.undo.len(), 2);
    }
}
