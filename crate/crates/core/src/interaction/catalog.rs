//! Predefined interactions.

use std::sync::{Arc, OnceLock};

use serde_json::Value;

use crate::event::{EventKind, Millis};
use crate::fsm::{FiredBy, Fsm, FsmSpec, FsmTemplate};

use super::data::{FromToData, InteractionData, KeysData, MultiTouchData, PointData, TapData, TouchData};
use super::{InteractionError, UserInteraction};

pub const DOUBLE_CLICK_TIMEOUT: Millis = 1000;
pub const DOUBLE_CLICK_ALT_TIMEOUT: Millis = 500;
pub const KEYS_TYPED_TIMEOUT: Millis = 1000;
pub const TAP_TIMEOUT: Millis = 1000;

/// Names accepted by [`construct_interaction`].
pub const INTERACTIONS: [&str; 10] =
    ["click", "double_click", "drag_lock", "dnd", "press", "key_pressed", "keys_typed", "multi_touch", "tap", "scroll"];

/// The machines behind the catalog.
pub mod machines {
    use super::*;
    use crate::interaction::is_escape;

    fn single(name: &str, kind: EventKind, done: &str) -> Arc<FsmSpec> {
        let mut b = FsmSpec::builder(name);
        let init = b.initial();
        let end = b.terminal(done);
        b.on(init, end, kind);
        b.build().expect("single-step machine")
    }

    pub fn click() -> Arc<FsmSpec> {
        static SPEC: OnceLock<Arc<FsmSpec>> = OnceLock::new();
        SPEC.get_or_init(|| single("click", EventKind::PointerClick, "clicked")).clone()
    }

    pub fn press() -> Arc<FsmSpec> {
        static SPEC: OnceLock<Arc<FsmSpec>> = OnceLock::new();
        SPEC.get_or_init(|| single("press", EventKind::PointerPress, "pressed")).clone()
    }

    pub fn scroll() -> Arc<FsmSpec> {
        static SPEC: OnceLock<Arc<FsmSpec>> = OnceLock::new();
        SPEC.get_or_init(|| single("scroll", EventKind::Scroll, "scrolled")).clone()
    }

    pub fn key_pressed() -> Arc<FsmSpec> {
        static SPEC: OnceLock<Arc<FsmSpec>> = OnceLock::new();
        SPEC.get_or_init(|| single("key_pressed", EventKind::KeyPress, "pressed")).clone()
    }

    /// Two clicks within `timeout`. The `alt` variant also cancels on move.
    pub fn double_click(timeout: Millis, alt: bool) -> Arc<FsmSpec> {
        let mut b = FsmSpec::builder("double_click");
        let init = b.initial();
        let sub = b.inner(FsmTemplate::Graph(click()));
        let clicked = b.state("clicked");
        let dbl = b.terminal("double_clicked");
        let cancelled = b.cancelling("cancelled");
        b.on_sub(init, clicked, sub).on_sub(clicked, dbl, sub).on_timeout(clicked, cancelled, timeout);
        if alt {
            b.on(clicked, cancelled, EventKind::PointerMove);
        }
        b.build().expect("double-click machine")
    }

    /// A double click locks, moves drag, a double click unlocks. Escape
    /// cancels, and so does unlocking without any move.
    pub fn drag_lock(double_click_timeout: Millis, alt: bool) -> Arc<FsmSpec> {
        let mut b = FsmSpec::builder("drag_lock");
        let init = b.initial();
        let dbl = b.inner(FsmTemplate::Graph(double_click(double_click_timeout, alt)));
        let locked = b.state("locked");
        let moved = b.state("moved");
        let unlocked = b.terminal("unlocked");
        let canceled = b.cancelling("canceled");
        b.on_sub(init, locked, dbl)
            .on(locked, moved, EventKind::PointerMove)
            .on_if(locked, canceled, EventKind::KeyPress, |e, _| is_escape(e))
            .on_sub(locked, canceled, dbl)
            .on(moved, moved, EventKind::PointerMove)
            .on_if(moved, canceled, EventKind::KeyPress, |e, _| is_escape(e))
            .on_sub(moved, unlocked, dbl);
        b.build().expect("drag-lock machine")
    }

    pub fn dnd() -> Arc<FsmSpec> {
        static SPEC: OnceLock<Arc<FsmSpec>> = OnceLock::new();
        SPEC.get_or_init(|| {
            let mut b = FsmSpec::builder("dnd");
            let init = b.initial();
            let pressed = b.state("pressed");
            let dragged = b.state("dragged");
            let released = b.terminal("released");
            let cancelled = b.cancelling("cancelled");
            b.on(init, pressed, EventKind::PointerPress)
                .on(pressed, dragged, EventKind::PointerMove)
                .on(pressed, cancelled, EventKind::PointerRelease)
                .on(dragged, dragged, EventKind::PointerMove)
                .on(dragged, released, EventKind::PointerRelease)
                .on_if(dragged, cancelled, EventKind::KeyPress, |e, _| is_escape(e));
            b.build().expect("dnd machine")
        })
        .clone()
    }

    /// Key releases until `timeout` passes without one.
    pub fn keys_typed(timeout: Millis) -> Arc<FsmSpec> {
        let mut b = FsmSpec::builder("keys_typed");
        let init = b.initial();
        let typing = b.state("typing");
        let ended = b.terminal("ended");
        b.on(init, typing, EventKind::KeyRelease).on(typing, typing, EventKind::KeyRelease).on_timeout(typing, ended, timeout);
        b.build().expect("keys-typed machine")
    }

    /// One touch point: start, moves, end.
    pub fn touch_dnd() -> Arc<FsmSpec> {
        static SPEC: OnceLock<Arc<FsmSpec>> = OnceLock::new();
        SPEC.get_or_init(|| {
            let mut b = FsmSpec::builder("touch_dnd");
            let init = b.initial();
            let touched = b.state("touched");
            let released = b.terminal("released");
            b.on(init, touched, EventKind::TouchStart)
                .on(touched, touched, EventKind::TouchMove)
                .on(touched, released, EventKind::TouchEnd);
            b.build().expect("touch machine")
        })
        .clone()
    }

    /// `n` taps, each a touch start then an end of the same touch, with at
    /// most `timeout` between a tap and the next.
    pub fn tap(n: usize, timeout: Millis) -> Arc<FsmSpec> {
        assert!(n > 0);
        let mut b = FsmSpec::builder("tap");
        let cancelled = b.cancelling("cancelled");
        let mut up = b.initial();
        for k in 1..=n {
            let down = b.state(&format!("down_{k}"));
            let next_up = if k == n { b.terminal(&format!("up_{k}")) } else { b.state(&format!("up_{k}")) };
            b.on(up, down, EventKind::TouchStart).on_if(down, next_up, EventKind::TouchEnd, |e, ctx| {
                ctx.last.and_then(|m| m.touch_id) == e.touch_id()
            });
            if k > 1 {
                b.on_timeout(up, cancelled, timeout);
            }
            up = next_up;
        }
        b.build().expect("tap machine")
    }
}

fn point_interaction(name: &str, spec: Arc<FsmSpec>) -> UserInteraction<PointData> {
    UserInteraction::new(name, Fsm::new(spec), PointData::default, |d: &mut PointData, step| {
        if let Some(e) = step.event {
            d.set_from(e);
        }
    })
}

pub fn click() -> UserInteraction<PointData> {
    point_interaction("click", machines::click())
}

pub fn press() -> UserInteraction<PointData> {
    point_interaction("press", machines::press())
}

pub fn scroll() -> UserInteraction<PointData> {
    point_interaction("scroll", machines::scroll())
}

pub fn double_click() -> UserInteraction<PointData> {
    double_click_with(DOUBLE_CLICK_TIMEOUT, false).expect("default timeout is positive")
}

pub fn double_click_with(timeout: Millis, alt: bool) -> Result<UserInteraction<PointData>, InteractionError> {
    positive("double_click", "timeout", timeout)?;
    Ok(UserInteraction::new("double_click", Fsm::new(machines::double_click(timeout, alt)), PointData::default, |d: &mut PointData, step| {
        if let Some(e) = step.event.filter(|e| e.kind() == EventKind::PointerClick) {
            d.set_from(e);
        }
    }))
}

pub fn drag_lock() -> UserInteraction<FromToData> {
    drag_lock_with(DOUBLE_CLICK_TIMEOUT, false).expect("default timeout is positive")
}

pub fn drag_lock_with(double_click_timeout: Millis, alt: bool) -> Result<UserInteraction<FromToData>, InteractionError> {
    positive("drag_lock", "timeout", double_click_timeout)?;
    let spec = machines::drag_lock(double_click_timeout, alt);
    let locked = spec.state_by_name("locked").expect("locked state");
    let unlocked = spec.state_by_name("unlocked").expect("unlocked state");
    Ok(UserInteraction::new("drag_lock", Fsm::new(spec), FromToData::default, move |d: &mut FromToData, step| {
        let Some(e) = step.event else { return };
        match (step.fired.by, step.fired.to) {
            (FiredBy::Sub, to) if to == locked => {
                d.set_src(e);
                d.set_tgt(e);
            }
            (FiredBy::Sub, to) if to == unlocked => d.set_tgt(e),
            (FiredBy::Event, _) if e.kind() == EventKind::PointerMove => d.set_tgt(e),
            _ => {}
        }
    }))
}

pub fn dnd() -> UserInteraction<FromToData> {
    UserInteraction::new("dnd", Fsm::new(machines::dnd()), FromToData::default, |d: &mut FromToData, step| {
        let Some(e) = step.event else { return };
        match e.kind() {
            EventKind::PointerPress => d.set_src(e),
            EventKind::PointerMove | EventKind::PointerRelease => d.set_tgt(e),
            _ => {}
        }
    })
}

pub fn key_pressed() -> UserInteraction<KeysData> {
    UserInteraction::new("key_pressed", Fsm::new(machines::key_pressed()), KeysData::default, push_key)
}

pub fn keys_typed() -> UserInteraction<KeysData> {
    keys_typed_with(KEYS_TYPED_TIMEOUT).expect("default timeout is positive")
}

pub fn keys_typed_with(timeout: Millis) -> Result<UserInteraction<KeysData>, InteractionError> {
    positive("keys_typed", "timeout", timeout)?;
    Ok(UserInteraction::new("keys_typed", Fsm::new(machines::keys_typed(timeout)), KeysData::default, push_key))
}

fn push_key(d: &mut KeysData, step: &super::Step<'_>) {
    if let Some(e) = step.event {
        if let Some(k) = e.key() {
            d.keys.push(k.to_owned());
            d.target = Some(e.target().clone());
        }
    }
}

pub fn multi_touch(n: usize) -> Result<UserInteraction<MultiTouchData>, InteractionError> {
    if n < 1 {
        return Err(invalid("multi_touch", "n", "must be at least 1"));
    }
    Ok(UserInteraction::new("multi_touch", Fsm::concurrent(machines::touch_dnd(), n), MultiTouchData::default, |d: &mut MultiTouchData, step| {
        let (Some(e), Some(id)) = (step.event, step.fired.touch) else { return };
        if step.fired.released {
            d.touches.retain(|t| t.id != id);
            return;
        }
        match d.touches.iter_mut().find(|t| t.id == id) {
            Some(t) => t.data.set_tgt(e),
            None => {
                let mut data = FromToData::default();
                data.set_src(e);
                d.touches.push(TouchData { id, data });
            }
        }
    }))
}

pub fn tap(n: usize) -> Result<UserInteraction<TapData>, InteractionError> {
    tap_with(n, TAP_TIMEOUT)
}

pub fn tap_with(n: usize, timeout: Millis) -> Result<UserInteraction<TapData>, InteractionError> {
    if n < 1 {
        return Err(invalid("tap", "n", "must be at least 1"));
    }
    positive("tap", "timeout", timeout)?;
    Ok(UserInteraction::new("tap", Fsm::new(machines::tap(n, timeout)), TapData::default, |d: &mut TapData, step| {
        if let Some(e) = step.event.filter(|e| e.kind() == EventKind::TouchStart) {
            d.taps.push(PointData::of(e));
        }
    }))
}

fn invalid(interaction: &str, param: &str, reason: &str) -> InteractionError {
    InteractionError::InvalidParam { interaction: interaction.into(), param: param.into(), reason: reason.into() }
}

fn positive(interaction: &str, param: &str, value: Millis) -> Result<(), InteractionError> {
    if value == 0 {
        return Err(invalid(interaction, param, "must be positive"));
    }
    Ok(())
}

struct Params<'a> {
    interaction: &'a str,
    map: Option<&'a serde_json::Map<String, Value>>,
}

impl<'a> Params<'a> {
    fn new(interaction: &'a str, params: &'a Value, allowed: &[&str]) -> Result<Self, InteractionError> {
        let map = match params {
            Value::Null => None,
            Value::Object(m) => Some(m),
            _ => return Err(invalid(interaction, "params", "must be an object")),
        };
        if let Some(unknown) = map.and_then(|m| m.keys().find(|k| !allowed.contains(&k.as_str()))) {
            return Err(invalid(interaction, unknown, "unknown parameter"));
        }
        Ok(Params { interaction, map })
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.map.and_then(|m| m.get(key))
    }

    fn uint(&self, key: &str, default: u64) -> Result<u64, InteractionError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.as_u64().ok_or_else(|| invalid(self.interaction, key, "must be a non-negative integer")),
        }
    }

    fn flag(&self, key: &str) -> Result<bool, InteractionError> {
        match self.get(key) {
            None => Ok(false),
            Some(v) => v.as_bool().ok_or_else(|| invalid(self.interaction, key, "must be a boolean")),
        }
    }

    fn required_n(&self) -> Result<usize, InteractionError> {
        match self.get("n") {
            None => Err(invalid(self.interaction, "n", "is required")),
            Some(_) => Ok(self.uint("n", 0)? as usize),
        }
    }
}

/// Builds a catalog interaction by name. `params` is `null` or an object.
///
/// | name | params | data |
/// |---|---|---|
/// | `click`, `press`, `scroll` | | point |
/// | `double_click` | `timeout`, `alt` | point |
/// | `drag_lock` | `timeout`, `alt` (of the inner double click) | from/to |
/// | `dnd` | | from/to |
/// | `key_pressed` | | keys |
/// | `keys_typed` | `timeout` | keys |
/// | `multi_touch` | `n` | multi-touch |
/// | `tap` | `n`, `timeout` | tap |
pub fn construct_interaction(name: &str, params: &Value) -> Result<UserInteraction<InteractionData>, InteractionError> {
    let p = |allowed: &[&str]| Params::new(name, params, allowed);
    Ok(match name {
        "click" => {
            p(&[])?;
            click().into_dyn()
        }
        "press" => {
            p(&[])?;
            press().into_dyn()
        }
        "scroll" => {
            p(&[])?;
            scroll().into_dyn()
        }
        "double_click" | "drag_lock" => {
            let p = p(&["timeout", "alt"])?;
            let alt = p.flag("alt")?;
            let timeout = p.uint("timeout", if alt { DOUBLE_CLICK_ALT_TIMEOUT } else { DOUBLE_CLICK_TIMEOUT })?;
            if name == "double_click" {
                double_click_with(timeout, alt)?.into_dyn()
            } else {
                drag_lock_with(timeout, alt)?.into_dyn()
            }
        }
        "dnd" => {
            p(&[])?;
            dnd().into_dyn()
        }
        "key_pressed" => {
            p(&[])?;
            key_pressed().into_dyn()
        }
        "keys_typed" => keys_typed_with(p(&["timeout"])?.uint("timeout", KEYS_TYPED_TIMEOUT)?)?.into_dyn(),
        "multi_touch" => multi_touch(p(&["n"])?.required_n()?)?.into_dyn(),
        "tap" => {
            let p = p(&["n", "timeout"])?;
            tap_with(p.required_n()?, p.uint("timeout", TAP_TIMEOUT)?)?.into_dyn()
        }
        other => return Err(InteractionError::Unknown(other.to_owned())),
    })
}
