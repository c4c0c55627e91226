//! A scripted input robot producing timestamped event traces.
//!
//! Every emitted event advances time by one step (100 ms by default).
//! Pointer events target the topmost node under the pointer, or the node
//! that received the press while a button is held.

use std::collections::HashMap;

use serde::Deserialize;
use thiserror::Error;

use crate::demo::Shape;
use crate::event::{Event, EventKind, Millis, NodeId, Point};

pub const DEFAULT_STEP: Millis = 100;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RobotError {
    #[error("release of button {0} without a press")]
    ReleaseWithoutPress(u8),
    #[error("button {0} is already pressed")]
    AlreadyPressed(u8),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("touch {0} is not down")]
    TouchNotDown(u32),
    #[error("touch {0} is already down")]
    TouchAlreadyDown(u32),
}

/// A destination: a node (its center) or a point.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Target {
    Node(String),
    Point([f64; 2]),
}

impl From<&str> for Target {
    fn from(s: &str) -> Self {
        Target::Node(s.to_owned())
    }
}

impl From<(f64, f64)> for Target {
    fn from((x, y): (f64, f64)) -> Self {
        Target::Point([x, y])
    }
}

/// One step of a robot script file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RobotStep {
    MoveTo(Target),
    /// `n` evenly spaced moves ending at `to`.
    Glide { to: Target, n: u32 },
    Press(u8),
    Release(u8),
    Click(u32),
    Key(String),
    TouchStart { id: u32, at: Target },
    TouchMove { id: u32, at: Target },
    TouchEnd { id: u32 },
    Wait(Millis),
}

/// A robot script file: `{"step": 100, "robot": [...]}`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotScript {
    #[serde(default = "default_step")]
    pub step: Millis,
    #[serde(default)]
    pub start: Millis,
    pub robot: Vec<RobotStep>,
}

fn default_step() -> Millis {
    DEFAULT_STEP
}

/// Node bounds for hit testing; later entries are on top.
#[derive(Debug, Clone, Default)]
pub struct Layout {
    nodes: Vec<Shape>,
    background: Option<NodeId>,
}

impl Layout {
    pub fn new(nodes: impl IntoIterator<Item = Shape>, background: Option<NodeId>) -> Self {
        Layout { nodes: nodes.into_iter().collect(), background }
    }

    fn hit(&self, p: Point) -> NodeId {
        self.nodes
            .iter()
            .rev()
            .find(|s| s.contains(p))
            .map(|s| s.id.clone())
            .or_else(|| self.background.clone())
            .unwrap_or_else(|| NodeId::from(super::DEFAULT_BACKGROUND))
    }

    fn center(&self, id: &str) -> Option<Point> {
        self.nodes.iter().find(|s| s.id.as_str() == id).map(|s| Point::new(s.x + s.w / 2.0, s.y + s.h / 2.0))
    }
}

#[derive(Debug, Clone)]
pub struct Robot {
    layout: Layout,
    step: Millis,
    t: Millis,
    pos: Point,
    held: Option<(u8, NodeId)>,
    touches: HashMap<u32, NodeId>,
    events: Vec<Event>,
}

impl Robot {
    pub fn new(layout: Layout) -> Self {
        Robot { layout, step: DEFAULT_STEP, t: 0, pos: Point::new(0.0, 0.0), held: None, touches: HashMap::new(), events: Vec::new() }
    }

    pub fn step(mut self, step: Millis) -> Self {
        self.step = step;
        self
    }

    pub fn starting_at(mut self, t: Millis) -> Self {
        self.t = t;
        self
    }

    pub fn now(&self) -> Millis {
        self.t
    }

    fn resolve(&self, target: &Target) -> Result<Point, RobotError> {
        match target {
            Target::Point([x, y]) => Ok(Point::new(*x, *y)),
            Target::Node(id) => self.layout.center(id).ok_or_else(|| RobotError::UnknownNode(id.clone())),
        }
    }

    fn pointer_target(&self) -> NodeId {
        match &self.held {
            Some((_, n)) => n.clone(),
            None => self.layout.hit(self.pos),
        }
    }

    fn emit(&mut self, e: Event) {
        self.events.push(e);
        self.t += self.step;
    }

    fn pointer(&mut self, kind: EventKind, button: u8) {
        let e = Event::pointer(kind, self.t, self.pointer_target(), self.pos, button);
        self.emit(e);
    }

    pub fn move_to(&mut self, to: impl Into<Target>) -> Result<&mut Self, RobotError> {
        self.pos = self.resolve(&to.into())?;
        self.pointer(EventKind::PointerMove, self.held.as_ref().map_or(0, |h| h.0));
        Ok(self)
    }

    pub fn glide(&mut self, to: impl Into<Target>, n: u32) -> Result<&mut Self, RobotError> {
        let end = self.resolve(&to.into())?;
        let start = self.pos;
        for k in 1..=n {
            let f = f64::from(k) / f64::from(n);
            self.move_to((start.x + (end.x - start.x) * f, start.y + (end.y - start.y) * f))?;
        }
        Ok(self)
    }

    pub fn press(&mut self, button: u8) -> Result<&mut Self, RobotError> {
        if let Some((b, _)) = &self.held {
            return Err(RobotError::AlreadyPressed(*b));
        }
        let target = self.layout.hit(self.pos);
        self.held = Some((button, target));
        self.pointer(EventKind::PointerPress, button);
        Ok(self)
    }

    pub fn release(&mut self, button: u8) -> Result<&mut Self, RobotError> {
        match &self.held {
            Some((b, _)) if *b == button => {}
            _ => return Err(RobotError::ReleaseWithoutPress(button)),
        }
        self.pointer(EventKind::PointerRelease, button);
        self.held = None;
        Ok(self)
    }

    /// `n` primary-button press/release pairs at the current position.
    pub fn click(&mut self, n: u32) -> Result<&mut Self, RobotError> {
        for _ in 0..n {
            self.press(0)?.release(0)?;
        }
        Ok(self)
    }

    /// Press and release of a key on the node under the pointer.
    pub fn key(&mut self, key: &str) -> &mut Self {
        for kind in [EventKind::KeyPress, EventKind::KeyRelease] {
            let e = Event::key_event(kind, self.t, self.pointer_target(), key);
            self.emit(e);
        }
        self
    }

    pub fn touch_start(&mut self, id: u32, at: impl Into<Target>) -> Result<&mut Self, RobotError> {
        if self.touches.contains_key(&id) {
            return Err(RobotError::TouchAlreadyDown(id));
        }
        let p = self.resolve(&at.into())?;
        let node = self.layout.hit(p);
        self.touches.insert(id, node.clone());
        self.emit(Event::touch(EventKind::TouchStart, self.t, node, id, p));
        Ok(self)
    }

    pub fn touch_move(&mut self, id: u32, at: impl Into<Target>) -> Result<&mut Self, RobotError> {
        let p = self.resolve(&at.into())?;
        let node = self.touches.get(&id).cloned().ok_or(RobotError::TouchNotDown(id))?;
        self.emit(Event::touch(EventKind::TouchMove, self.t, node, id, p));
        Ok(self)
    }

    pub fn touch_end(&mut self, id: u32) -> Result<&mut Self, RobotError> {
        let node = self.touches.remove(&id).ok_or(RobotError::TouchNotDown(id))?;
        let p = self.events.iter().rev().find(|e| e.touch_id() == Some(id)).and_then(|e| e.position()).unwrap_or(self.pos);
        self.emit(Event::touch(EventKind::TouchEnd, self.t, node, id, p));
        Ok(self)
    }

    /// Lets time pass without events.
    pub fn wait(&mut self, ms: Millis) -> &mut Self {
        self.t += ms;
        self
    }

    pub fn run(&mut self, step: &RobotStep) -> Result<&mut Self, RobotError> {
        match step {
            RobotStep::MoveTo(t) => self.move_to(t.clone()),
            RobotStep::Glide { to, n } => self.glide(to.clone(), *n),
            RobotStep::Press(b) => self.press(*b),
            RobotStep::Release(b) => self.release(*b),
            RobotStep::Click(n) => self.click(*n),
            RobotStep::Key(k) => Ok(self.key(k)),
            RobotStep::TouchStart { id, at } => self.touch_start(*id, at.clone()),
            RobotStep::TouchMove { id, at } => self.touch_move(*id, at.clone()),
            RobotStep::TouchEnd { id } => self.touch_end(*id),
            RobotStep::Wait(ms) => Ok(self.wait(*ms)),
        }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }
}

/// Compiles a script against a layout.
pub fn compile_robot(script: &RobotScript, layout: Layout) -> Result<Vec<Event>, RobotError> {
    let mut r = Robot::new(layout).step(script.step).starting_at(script.start);
    for s in &script.robot {
        r.run(s)?;
    }
    Ok(r.into_events())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fsm::{ClickSynthesizer, Fsm};
    use crate::interaction::machines;

    fn layout() -> Layout {
        Layout::new([Shape::new("n1", 0.0, 0.0, 10.0, 10.0)], Some("canvas".into()))
    }

    #[test]
    fn drag_gesture() {
        let mut r = Robot::new(layout());
        r.move_to("n1").unwrap().press(0).unwrap().move_to((30.0, 30.0)).unwrap().release(0).unwrap();
        let ev = r.events();
        let kinds: Vec<_> = ev.iter().map(|e| e.kind()).collect();
        assert_eq!(kinds, [EventKind::PointerMove, EventKind::PointerPress, EventKind::PointerMove, EventKind::PointerRelease]);
        assert!(ev[1..].iter().all(|e| e.target().as_str() == "n1"));
        assert_eq!(ev[0].position(), Some(Point::new(5.0, 5.0)));
        assert_eq!(ev.iter().map(|e| e.time()).collect::<Vec<_>>(), [0, 100, 200, 300]);
    }

    #[test]
    fn release_without_press() {
        assert_eq!(Robot::new(layout()).release(0).err(), Some(RobotError::ReleaseWithoutPress(0)));
        assert_eq!(Robot::new(layout()).move_to("zz").err(), Some(RobotError::UnknownNode("zz".into())));
    }

    fn double_click_outcome(script: &str) -> (bool, bool) {
        let script: RobotScript = serde_json::from_str(script).unwrap();
        let events = compile_robot(&script, layout()).unwrap();
        let mut fsm = Fsm::new(machines::double_click(1000, false));
        let mut clicks = ClickSynthesizer::new();
        let mut timers = Vec::new();
        let (mut ended, mut cancelled) = (false, false);
        let mut pending: Vec<(crate::fsm::TimerToken, Millis)> = Vec::new();
        for e in &events {
            pending.sort_by_key(|p| p.1);
            while pending.first().is_some_and(|p| p.1 <= e.time()) {
                let (tok, _) = pending.remove(0);
                let out = fsm.on_timeout(tok);
                cancelled |= out.cancelled();
            }
            let derived = clicks.feed(e);
            for ev in std::iter::once(e).chain(derived.as_ref()) {
                let out = fsm.process_event(ev);
                ended |= out.ended();
                cancelled |= out.cancelled();
                fsm.drain_timers(&mut timers);
                pending.append(&mut timers);
                if fsm.is_over() {
                    fsm.reinit();
                }
            }
        }
        for (tok, _) in pending {
            cancelled |= fsm.on_timeout(tok).cancelled();
        }
        (ended, cancelled)
    }

    #[test]
    fn scripted_double_clicks() {
        assert_eq!(double_click_outcome(r#"{"robot": [{"move_to": "n1"}, {"click": 2}]}"#), (true, false));
        assert_eq!(double_click_outcome(r#"{"robot": [{"move_to": "n1"}, {"click": 1}, {"wait": 1200}, {"click": 1}]}"#).0, false);
        let glide: RobotScript = serde_json::from_str(r#"{"step": 10, "robot": [{"glide": {"to": [4, 4], "n": 3}}]}"#).unwrap();
        let ev = compile_robot(&glide, layout()).unwrap();
        assert_eq!(ev.last().unwrap().position(), Some(Point::new(4.0, 4.0)));
        assert_eq!(ev.len(), 3);
    }
}
