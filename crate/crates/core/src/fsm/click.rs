//! Click synthesis from press and release pairs.

use crate::event::{Event, EventKind, NodeId, Point};

/// Emits a `pointer_click` after a release that closes a press on the same
/// node with the same button, at most [`ClickSynthesizer::MAX_DISTANCE`] away.
#[derive(Debug, Default, Clone)]
pub struct ClickSynthesizer {
    pressed: Option<(NodeId, Point, u8)>,
}

impl ClickSynthesizer {
    pub const MAX_DISTANCE: f64 = 1.0;

    pub fn new() -> Self {
        Self::default()
    }

    pub fn reset(&mut self) {
        self.pressed = None;
    }

    pub fn feed(&mut self, e: &Event) -> Option<Event> {
        match e.kind() {
            EventKind::PointerPress => {
                self.pressed = Some((e.target().clone(), e.position()?, e.button()?));
                None
            }
            EventKind::PointerRelease => {
                let (node, at, button) = self.pressed.take()?;
                let pos = e.position()?;
                (node == *e.target() && e.button() == Some(button) && at.distance(pos) <= Self::MAX_DISTANCE)
                    .then(|| e.derive(EventKind::PointerClick, e.time()))
            }
            _ => None,
        }
    }
}
