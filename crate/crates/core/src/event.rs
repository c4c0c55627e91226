//! Low-level UI events: the words interactions are assembled from.
//!
//! Events are toolkit-agnostic. Each one carries a virtual timestamp, the
//! interactive object it targets, and a kind-specific payload. Construction
//! goes through [`make_event`] (or the [`Event`] shorthands), which checks that
//! the payload matches the kind.

use std::cell::Cell;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Virtual milliseconds.
pub type Millis = u64;

/// The closed set of low-level event kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    PointerPress,
    PointerRelease,
    PointerMove,
    PointerClick,
    KeyPress,
    KeyRelease,
    TouchStart,
    TouchMove,
    TouchEnd,
    Scroll,
}

impl EventKind {
    pub const ALL: [EventKind; 10] = [
        EventKind::PointerPress,
        EventKind::PointerRelease,
        EventKind::PointerMove,
        EventKind::PointerClick,
        EventKind::KeyPress,
        EventKind::KeyRelease,
        EventKind::TouchStart,
        EventKind::TouchMove,
        EventKind::TouchEnd,
        EventKind::Scroll,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::PointerPress => "pointer_press",
            EventKind::PointerRelease => "pointer_release",
            EventKind::PointerMove => "pointer_move",
            EventKind::PointerClick => "pointer_click",
            EventKind::KeyPress => "key_press",
            EventKind::KeyRelease => "key_release",
            EventKind::TouchStart => "touch_start",
            EventKind::TouchMove => "touch_move",
            EventKind::TouchEnd => "touch_end",
            EventKind::Scroll => "scroll",
        }
    }

    pub fn is_pointer(self) -> bool {
        matches!(
            self,
            EventKind::PointerPress
                | EventKind::PointerRelease
                | EventKind::PointerMove
                | EventKind::PointerClick
        )
    }

    pub fn is_key(self) -> bool {
        matches!(self, EventKind::KeyPress | EventKind::KeyRelease)
    }

    pub fn is_touch(self) -> bool {
        matches!(
            self,
            EventKind::TouchStart | EventKind::TouchMove | EventKind::TouchEnd
        )
    }

    fn bit(self) -> u16 {
        1 << (self as u16)
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventKind {
    type Err = EventError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EventKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| EventError::UnknownKind(s.to_owned()))
    }
}

/// A set of event kinds, stored as a bit mask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct EventKindSet(u16);

impl EventKindSet {
    pub const EMPTY: EventKindSet = EventKindSet(0);

    pub fn all() -> Self {
        EventKind::ALL.into_iter().collect()
    }

    pub fn insert(&mut self, kind: EventKind) {
        self.0 |= kind.bit();
    }

    pub fn contains(self, kind: EventKind) -> bool {
        self.0 & kind.bit() != 0
    }

    pub fn union(self, other: EventKindSet) -> EventKindSet {
        EventKindSet(self.0 | other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = EventKind> {
        EventKind::ALL.into_iter().filter(move |k| self.contains(*k))
    }
}

impl FromIterator<EventKind> for EventKindSet {
    fn from_iter<T: IntoIterator<Item = EventKind>>(iter: T) -> Self {
        let mut set = EventKindSet::EMPTY;
        for k in iter {
            set.insert(k);
        }
        set
    }
}

impl fmt::Debug for EventKindSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Identifier of an interactive object.
///
/// Cheap to clone; equality first compares pointers.
#[derive(Clone, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(Arc<str>);

impl NodeId {
    pub fn new(id: impl AsRef<str>) -> Result<Self, EventError> {
        let id = id.as_ref();
        if id.is_empty() {
            return Err(EventError::EmptyNodeId);
        }
        Ok(NodeId(Arc::from(id)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl PartialEq for NodeId {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    /// Panics on the empty string; use [`NodeId::new`] for untrusted input.
    fn from(s: &str) -> Self {
        NodeId::new(s).expect("node id must not be empty")
    }
}

impl Serialize for NodeId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for NodeId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        NodeId::new(s).map_err(serde::de::Error::custom)
    }
}

/// A position on the abstract canvas.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point { x, y }
    }
}

/// Keyboard modifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modifier {
    Shift,
    Ctrl,
    Alt,
    Meta,
}

impl Modifier {
    pub const ALL: [Modifier; 4] = [Modifier::Shift, Modifier::Ctrl, Modifier::Alt, Modifier::Meta];

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Modifiers(u8);

impl Modifiers {
    pub const NONE: Modifiers = Modifiers(0);

    pub fn with(mut self, m: Modifier) -> Self {
        self.0 |= m.bit();
        self
    }

    pub fn contains(self, m: Modifier) -> bool {
        self.0 & m.bit() != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Modifier> {
        Modifier::ALL.into_iter().filter(move |m| self.contains(*m))
    }
}

impl FromIterator<Modifier> for Modifiers {
    fn from_iter<T: IntoIterator<Item = Modifier>>(iter: T) -> Self {
        iter.into_iter().fold(Modifiers::NONE, Modifiers::with)
    }
}

impl Serialize for Modifiers {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl fmt::Debug for Modifiers {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EventError {
    #[error("unknown event kind `{0}`")]
    UnknownKind(String),
    #[error("node id must not be empty")]
    EmptyNodeId,
    #[error("missing {field} for {kind} event")]
    Missing { kind: EventKind, field: &'static str },
    #[error("unexpected {field} for {kind} event")]
    Unexpected { kind: EventKind, field: &'static str },
}

/// The optional fields of an event, before they are checked against a kind.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Payload {
    pub position: Option<Point>,
    pub button: Option<u8>,
    pub key: Option<String>,
    pub touch_id: Option<u32>,
    pub modifiers: Modifiers,
}

impl Payload {
    pub fn at(x: f64, y: f64) -> Self {
        Payload { position: Some(Point::new(x, y)), ..Payload::default() }
    }

    pub fn button(mut self, button: u8) -> Self {
        self.button = Some(button);
        self
    }

    pub fn key(key: impl Into<String>) -> Self {
        Payload { key: Some(key.into()), ..Payload::default() }
    }

    pub fn touch(mut self, id: u32) -> Self {
        self.touch_id = Some(id);
        self
    }

    pub fn modifiers(mut self, modifiers: Modifiers) -> Self {
        self.modifiers = modifiers;
        self
    }
}

/// A well-formed UI event.
///
/// All fields are immutable after construction except the `consumed` flag,
/// which can only go from `false` to `true`.
#[derive(Clone, PartialEq)]
pub struct Event {
    kind: EventKind,
    time: Millis,
    target: NodeId,
    position: Option<Point>,
    button: Option<u8>,
    key: Option<Box<str>>,
    touch_id: Option<u32>,
    modifiers: Modifiers,
    consumed: Cell<bool>,
}

/// Builds an event, checking that the payload carries exactly the fields the
/// kind requires.
///
/// Pointer events need a position and a button, key events a key, touch events
/// a touch id and a position, scroll events a position. Modifiers are allowed
/// on every kind.
pub fn make_event(kind: EventKind, time: Millis, target: NodeId, payload: Payload) -> Result<Event, EventError> {
    use EventKind::*;
    let missing = |field| EventError::Missing { kind, field };
    let unexpected = |field| EventError::Unexpected { kind, field };

    let (needs_pos, needs_button, needs_key, needs_touch) = match kind {
        PointerPress | PointerRelease | PointerMove | PointerClick => (true, true, false, false),
        KeyPress | KeyRelease => (false, false, true, false),
        TouchStart | TouchMove | TouchEnd => (true, false, false, true),
        Scroll => (true, false, false, false),
    };
    let checks = [
        ("position", needs_pos, payload.position.is_some()),
        ("button", needs_button, payload.button.is_some()),
        ("key", needs_key, payload.key.is_some()),
        ("touch id", needs_touch, payload.touch_id.is_some()),
    ];
    for (field, needed, present) in checks {
        match (needed, present) {
            (true, false) => return Err(missing(field)),
            (false, true) => return Err(unexpected(field)),
            _ => {}
        }
    }
    Ok(Event {
        kind,
        time,
        target,
        position: payload.position,
        button: payload.button,
        key: payload.key.map(String::into_boxed_str),
        touch_id: payload.touch_id,
        modifiers: payload.modifiers,
        consumed: Cell::new(false),
    })
}

impl Event {
    pub fn pointer(kind: EventKind, time: Millis, target: NodeId, at: Point, button: u8) -> Event {
        assert!(kind.is_pointer(), "{kind} is not a pointer event");
        make_event(kind, time, target, Payload::at(at.x, at.y).button(button)).expect("well-formed pointer event")
    }

    pub fn key_event(kind: EventKind, time: Millis, target: NodeId, key: &str) -> Event {
        assert!(kind.is_key(), "{kind} is not a key event");
        make_event(kind, time, target, Payload::key(key)).expect("well-formed key event")
    }

    pub fn touch(kind: EventKind, time: Millis, target: NodeId, id: u32, at: Point) -> Event {
        assert!(kind.is_touch(), "{kind} is not a touch event");
        make_event(kind, time, target, Payload::at(at.x, at.y).touch(id)).expect("well-formed touch event")
    }

    pub fn scroll(time: Millis, target: NodeId, at: Point) -> Event {
        make_event(EventKind::Scroll, time, target, Payload::at(at.x, at.y)).expect("well-formed scroll event")
    }

    pub fn kind(&self) -> EventKind {
        self.kind
    }

    pub fn time(&self) -> Millis {
        self.time
    }

    pub fn target(&self) -> &NodeId {
        &self.target
    }

    pub fn position(&self) -> Option<Point> {
        self.position
    }

    pub fn button(&self) -> Option<u8> {
        self.button
    }

    pub fn key(&self) -> Option<&str> {
        self.key.as_deref()
    }

    pub fn touch_id(&self) -> Option<u32> {
        self.touch_id
    }

    pub fn modifiers(&self) -> Modifiers {
        self.modifiers
    }

    pub fn is_consumed(&self) -> bool {
        self.consumed.get()
    }

    pub fn consume(&self) {
        self.consumed.set(true);
    }

    /// Copy of this event with another timestamp and kind, same payload.
    pub(crate) fn derive(&self, kind: EventKind, time: Millis) -> Event {
        Event { kind, time, consumed: Cell::new(false), ..self.clone() }
    }

    pub fn payload(&self) -> Payload {
        Payload {
            position: self.position,
            button: self.button,
            key: self.key.as_deref().map(str::to_owned),
            touch_id: self.touch_id,
            modifiers: self.modifiers,
        }
    }
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("Event");
        d.field("kind", &self.kind).field("t", &self.time).field("target", &self.target);
        if let Some(p) = self.position {
            d.field("at", &(p.x, p.y));
        }
        if let Some(b) = self.button {
            d.field("button", &b);
        }
        if let Some(k) = &self.key {
            d.field("key", k);
        }
        if let Some(t) = self.touch_id {
            d.field("touch", &t);
        }
        if !self.modifiers.is_empty() {
            d.field("mods", &self.modifiers);
        }
        if self.consumed.get() {
            d.field("consumed", &true);
        }
        d.finish()
    }
}
