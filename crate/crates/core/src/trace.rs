//! Newline-delimited JSON event traces.
//!
//! One object per line:
//!
//! ```text
//! {"t":0,"kind":"pointer_press","target":"n1","x":5,"y":5,"button":0}
//! {"t":10,"kind":"key_press","target":"canvas","key":"Escape","mods":["shift"]}
//! ```
//!
//! Unknown fields are rejected and timestamps must be non-decreasing.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event::{make_event, Event, EventError, EventKind, Millis, Modifier, NodeId, Payload, Point};

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace is not valid UTF-8")]
    Utf8(#[from] std::str::Utf8Error),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: {source}")]
    Event {
        line: usize,
        #[source]
        source: EventError,
    },
    #[error("line {line}: x and y must be given together")]
    HalfPosition { line: usize },
    #[error("line {line}: time {current} is earlier than previous time {previous}")]
    NonMonotone { line: usize, previous: Millis, current: Millis },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    t: Millis,
    kind: EventKind,
    target: NodeId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    button: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    key: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    touch: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    mods: Vec<Modifier>,
}

pub fn parse_trace(bytes: &[u8]) -> Result<Vec<Event>, TraceError> {
    let text = std::str::from_utf8(bytes)?;
    let mut events = Vec::new();
    let mut previous: Option<Millis> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(raw).map_err(|source| TraceError::Json { line, source })?;
        let position = match (rec.x, rec.y) {
            (Some(x), Some(y)) => Some(Point::new(x, y)),
            (None, None) => None,
            _ => return Err(TraceError::HalfPosition { line }),
        };
        if let Some(prev) = previous {
            if rec.t < prev {
                return Err(TraceError::NonMonotone { line, previous: prev, current: rec.t });
            }
        }
        previous = Some(rec.t);
        let payload = Payload {
            position,
            button: rec.button,
            key: rec.key,
            touch_id: rec.touch,
            modifiers: rec.mods.into_iter().collect(),
        };
        events.push(make_event(rec.kind, rec.t, rec.target, payload).map_err(|source| TraceError::Event { line, source })?);
    }
    Ok(events)
}

pub fn write_trace(events: &[Event]) -> String {
    let mut out = String::new();
    for e in events {
        let rec = Record {
            t: e.time(),
            kind: e.kind(),
            target: e.target().clone(),
            x: e.position().map(|p| p.x),
            y: e.position().map(|p| p.y),
            button: e.button(),
            key: e.key().map(str::to_owned),
            touch: e.touch_id(),
            mods: e.modifiers().iter().collect(),
        };
        out.push_str(&serde_json::to_string(&rec).expect("trace records always serialize"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::Modifiers;
    use proptest::prelude::*;

    #[test]
    fn empty_input() {
        assert!(parse_trace(b"").unwrap().is_empty());
    }

    #[test]
    fn two_lines() {
        let text = br#"{"t":0,"kind":"pointer_press","target":"n1","x":5,"y":5,"button":0}
{"t":5,"kind":"key_press","target":"n1","key":"Escape","mods":["ctrl"]}
"#;
        let events = parse_trace(text).unwrap();
        assert_eq!(events.len(), 2);
        assert_eq!(events[1].key(), Some("Escape"));
        assert!(events[1].modifiers().contains(Modifier::Ctrl));
    }

    #[test]
    fn non_monotone() {
        let text = br#"{"t":5,"kind":"scroll","target":"n","x":0,"y":0}
{"t":3,"kind":"scroll","target":"n","x":0,"y":0}"#;
        let err = parse_trace(text).unwrap_err();
        assert!(matches!(err, TraceError::NonMonotone { line: 2, previous: 5, current: 3 }));
        assert!(err.to_string().contains('5') && err.to_string().contains('3'));
    }

    #[test]
    fn malformed_json_names_line() {
        let text = b"{\"t\":0,\"kind\":\"scroll\",\"target\":\"n\",\"x\":0,\"y\":0}\n{oops";
        let err = parse_trace(text).unwrap_err();
        assert!(matches!(err, TraceError::Json { line: 2, .. }));
        assert!(err.to_string().starts_with("line 2:"));
    }

    #[test]
    fn unknown_field_rejected() {
        let text = br#"{"t":0,"kind":"scroll","target":"n","x":0,"y":0,"force":1}"#;
        assert!(matches!(parse_trace(text).unwrap_err(), TraceError::Json { line: 1, .. }));
    }

    #[test]
    fn unknown_kind_rejected() {
        let text = br#"{"t":0,"kind":"hover","target":"n"}"#;
        assert!(matches!(parse_trace(text).unwrap_err(), TraceError::Json { .. }));
    }

    #[test]
    fn payload_checked() {
        let text = br#"{"t":0,"kind":"pointer_move","target":"n"}"#;
        assert!(matches!(parse_trace(text).unwrap_err(), TraceError::Event { line: 1, .. }));
        let text = br#"{"t":0,"kind":"scroll","target":"n","x":1}"#;
        assert!(matches!(parse_trace(text).unwrap_err(), TraceError::HalfPosition { line: 1 }));
    }

    fn arb_event() -> impl Strategy<Value = (EventKind, Payload)> {
        let pos = (-1e6f64..1e6, -1e6f64..1e6);
        let mods = prop::collection::vec(prop::sample::select(Modifier::ALL.to_vec()), 0..3)
            .prop_map(|m| m.into_iter().collect::<Modifiers>());
        (prop::sample::select(EventKind::ALL.to_vec()), pos, any::<u8>(), "[a-zA-Z]{1,8}", any::<u32>(), mods).prop_map(
            |(kind, (x, y), button, key, touch, mods)| {
                let payload = if kind.is_pointer() {
                    Payload::at(x, y).button(button)
                } else if kind.is_key() {
                    Payload::key(key)
                } else if kind.is_touch() {
                    Payload::at(x, y).touch(touch)
                } else {
                    Payload::at(x, y)
                };
                (kind, payload.modifiers(mods))
            },
        )
    }

    proptest! {
        #[test]
        fn serialize_then_parse_is_identity(
            items in prop::collection::vec((arb_event(), 0u64..50, "[a-z][a-z0-9]{0,5}"), 0..20)
        ) {
            let mut t = 0;
            let events: Vec<Event> = items
                .into_iter()
                .map(|((kind, payload), dt, target)| {
                    t += dt;
                    make_event(kind, t, NodeId::from(target.as_str()), payload).unwrap()
                })
                .collect();
            let text = write_trace(&events);
            prop_assert_eq!(parse_trace(text.as_bytes()).unwrap(), events);
        }
    }
}
