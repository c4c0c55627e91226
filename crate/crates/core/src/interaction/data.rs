//! Interaction data families.

use serde::Serialize;

use crate::event::{Event, Modifiers, NodeId, Point};

/// Data of click-like interactions.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PointData {
    pub object: Option<NodeId>,
    pub position: Option<Point>,
    pub button: Option<u8>,
    pub modifiers: Modifiers,
}

impl PointData {
    pub(crate) fn set_from(&mut self, e: &Event) {
        self.object = Some(e.target().clone());
        self.position = e.position();
        self.button = e.button();
        self.modifiers = e.modifiers();
    }

    pub(crate) fn of(e: &Event) -> PointData {
        let mut d = PointData::default();
        d.set_from(e);
        d
    }
}

/// Data of interactions that operate from a source to a target.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FromToData {
    pub src_object: Option<NodeId>,
    pub tgt_object: Option<NodeId>,
    pub src_position: Option<Point>,
    pub tgt_position: Option<Point>,
    pub button: Option<u8>,
}

impl FromToData {
    pub(crate) fn set_src(&mut self, e: &Event) {
        self.src_object = Some(e.target().clone());
        self.src_position = e.position();
        if e.button().is_some() {
            self.button = e.button();
        }
    }

    pub(crate) fn set_tgt(&mut self, e: &Event) {
        self.tgt_object = Some(e.target().clone());
        self.tgt_position = e.position();
    }

    /// `tgt - src`, once both positions are known.
    pub fn vector(&self) -> Option<(f64, f64)> {
        let (s, t) = (self.src_position?, self.tgt_position?);
        Some((t.x - s.x, t.y - s.y))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct KeysData {
    pub keys: Vec<String>,
    pub target: Option<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TouchData {
    pub id: u32,
    #[serde(flatten)]
    pub data: FromToData,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MultiTouchData {
    pub touches: Vec<TouchData>,
}

impl MultiTouchData {
    pub fn touch(&self, id: u32) -> Option<&FromToData> {
        self.touches.iter().find(|t| t.id == id).map(|t| &t.data)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TapData {
    pub taps: Vec<PointData>,
}

/// Any family, for configuration-driven code.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", content = "data", rename_all = "snake_case")]
pub enum InteractionData {
    Point(PointData),
    FromTo(FromToData),
    Keys(KeysData),
    MultiTouch(MultiTouchData),
    Tap(TapData),
    Custom(serde_json::Value),
}

impl InteractionData {
    pub fn family(&self) -> &'static str {
        match self {
            InteractionData::Point(_) => PointData::FAMILY,
            InteractionData::FromTo(_) => FromToData::FAMILY,
            InteractionData::Keys(_) => KeysData::FAMILY,
            InteractionData::MultiTouch(_) => MultiTouchData::FAMILY,
            InteractionData::Tap(_) => TapData::FAMILY,
            InteractionData::Custom(_) => "custom",
        }
    }

    pub fn get<D: DataFamily>(&self) -> Option<&D> {
        D::from_dyn(self)
    }
}

/// A concrete data type that can be viewed through [`InteractionData`].
pub trait DataFamily: Clone + Default + std::fmt::Debug + 'static {
    const FAMILY: &'static str;
    fn into_dyn(self) -> InteractionData;
    fn from_dyn(d: &InteractionData) -> Option<&Self>;
    fn from_dyn_mut(d: &mut InteractionData) -> Option<&mut Self>;
}

macro_rules! family {
    ($ty:ty, $variant:ident, $name:literal) => {
        impl DataFamily for $ty {
            const FAMILY: &'static str = $name;

            fn into_dyn(self) -> InteractionData {
                InteractionData::$variant(self)
            }

            fn from_dyn(d: &InteractionData) -> Option<&Self> {
                match d {
                    InteractionData::$variant(x) => Some(x),
                    _ => None,
                }
            }

            fn from_dyn_mut(d: &mut InteractionData) -> Option<&mut Self> {
                match d {
                    InteractionData::$variant(x) => Some(x),
                    _ => None,
                }
            }
        }
    };
}

family!(PointData, Point, "point");
family!(FromToData, FromTo, "from_to");
family!(KeysData, Keys, "keys");
family!(MultiTouchData, MultiTouch, "multi_touch");
family!(TapData, Tap, "tap");

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::EventKind;

    #[test]
    fn from_to_vector() {
        let mut d = FromToData::default();
        assert_eq!(d.vector(), None);
        d.set_src(&Event::pointer(EventKind::PointerPress, 0, NodeId::from("a"), Point::new(1.0, 1.0), 0));
        d.set_tgt(&Event::pointer(EventKind::PointerMove, 1, NodeId::from("b"), Point::new(4.0, 5.0), 0));
        assert_eq!(d.vector(), Some((3.0, 4.0)));
        assert_eq!(d.button, Some(0));
        assert_eq!(d.tgt_object, Some(NodeId::from("b")));
    }

    #[test]
    fn dyn_views() {
        let d = FromToData::default().into_dyn();
        assert_eq!(d.family(), "from_to");
        assert!(d.get::<FromToData>().is_some());
        assert!(d.get::<PointData>().is_none());
        let json = serde_json::to_value(&d).unwrap();
        assert_eq!(json["family"], "from_to");
    }
}
