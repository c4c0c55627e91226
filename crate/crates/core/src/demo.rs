//! A small drawing editor: shapes and the commands that edit them.
//!
//! The model is shared through [`Drawing`] handles. It is only mutated by
//! commands, which makes it a convenient subject for replay and benchmarks.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::command::{Command, CommandError, Completion, Undoable};
use crate::event::{NodeId, Point};
use crate::interaction::{InteractionData, NodeList};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shape {
    pub id: NodeId,
    pub x: f64,
    pub y: f64,
    #[serde(default = "default_size")]
    pub w: f64,
    #[serde(default = "default_size")]
    pub h: f64,
    #[serde(default = "default_color")]
    pub color: String,
}

fn default_size() -> f64 {
    10.0
}

fn default_color() -> String {
    "black".into()
}

impl Shape {
    pub fn new(id: &str, x: f64, y: f64, w: f64, h: f64) -> Self {
        Shape { id: id.into(), x, y, w, h, color: default_color() }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x && p.x <= self.x + self.w && p.y >= self.y && p.y <= self.y + self.h
    }
}

#[derive(Debug, Default)]
struct Model {
    shapes: Vec<Shape>,
    index: HashMap<NodeId, usize>,
    next_id: usize,
}

impl Model {
    fn reindex(&mut self) {
        self.index = self.shapes.iter().enumerate().map(|(i, s)| (s.id.clone(), i)).collect();
    }
}

/// Shared handle to the shapes. Clones point to the same drawing.
#[derive(Debug, Clone, Default)]
pub struct Drawing {
    model: Rc<RefCell<Model>>,
    nodes: NodeList,
}

impl Drawing {
    pub fn new(shapes: impl IntoIterator<Item = Shape>) -> Self {
        let d = Drawing::default();
        for s in shapes {
            d.insert(d.len(), s);
        }
        d
    }

    /// The shape ids, kept in sync with the model; usable as a dynamic
    /// binding target.
    pub fn node_list(&self) -> NodeList {
        self.nodes.clone()
    }

    pub fn len(&self) -> usize {
        self.model.borrow().shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shapes(&self) -> Vec<Shape> {
        self.model.borrow().shapes.clone()
    }

    pub fn shape(&self, id: &NodeId) -> Option<Shape> {
        let m = self.model.borrow();
        m.index.get(id).map(|&i| m.shapes[i].clone())
    }

    pub fn position(&self, id: &NodeId) -> Option<(f64, f64)> {
        let m = self.model.borrow();
        m.index.get(id).map(|&i| (m.shapes[i].x, m.shapes[i].y))
    }

    pub fn contains(&self, id: &NodeId) -> bool {
        self.model.borrow().index.contains_key(id)
    }

    /// Topmost shape under `p`.
    pub fn shape_at(&self, p: Point) -> Option<NodeId> {
        self.model.borrow().shapes.iter().rev().find(|s| s.contains(p)).map(|s| s.id.clone())
    }

    fn set_position(&self, id: &NodeId, (x, y): (f64, f64)) -> bool {
        let mut m = self.model.borrow_mut();
        let Some(&i) = m.index.get(id) else { return false };
        let s = &mut m.shapes[i];
        s.x = x;
        s.y = y;
        true
    }

    fn set_color(&self, id: &NodeId, color: &str) -> Option<String> {
        let mut m = self.model.borrow_mut();
        let &i = m.index.get(id)?;
        Some(std::mem::replace(&mut m.shapes[i].color, color.to_owned()))
    }

    fn fresh_id(&self) -> NodeId {
        let mut m = self.model.borrow_mut();
        loop {
            m.next_id += 1;
            let id = NodeId::from(format!("rect{}", m.next_id).as_str());
            if !m.index.contains_key(&id) {
                return id;
            }
        }
    }

    fn insert(&self, at: usize, s: Shape) {
        self.nodes.add(s.id.clone());
        let mut m = self.model.borrow_mut();
        let at = at.min(m.shapes.len());
        m.shapes.insert(at, s);
        m.reindex();
    }

    fn remove(&self, id: &NodeId) -> Option<(usize, Shape)> {
        let mut m = self.model.borrow_mut();
        let i = *m.index.get(id)?;
        let s = m.shapes.remove(i);
        m.reindex();
        drop(m);
        self.nodes.remove(id);
        Some((i, s))
    }
}

/// Where the data of any interaction family points at.
pub fn data_target(d: &InteractionData) -> Option<&NodeId> {
    match d {
        InteractionData::Point(p) => p.object.as_ref(),
        InteractionData::FromTo(f) => f.src_object.as_ref(),
        InteractionData::MultiTouch(m) => m.touches.first().and_then(|t| t.data.src_object.as_ref()),
        InteractionData::Tap(t) => t.taps.last().and_then(|p| p.object.as_ref()),
        InteractionData::Keys(k) => k.target.as_ref(),
        InteractionData::Custom(_) => None,
    }
}

/// Source and target positions of a from-to gesture.
pub fn data_vector(d: &InteractionData) -> Option<(Point, Point)> {
    match d {
        InteractionData::FromTo(f) => Some((f.src_position?, f.tgt_position?)),
        InteractionData::MultiTouch(m) => {
            let t = &m.touches.first()?.data;
            Some((t.src_position?, t.tgt_position?))
        }
        _ => None,
    }
}

/// Demo commands refresh themselves from interaction data.
pub trait DemoCommand: Command {
    fn update(&mut self, d: &InteractionData);
}

impl Command for Box<dyn DemoCommand> {
    fn can_execute(&self) -> bool {
        (**self).can_execute()
    }
    fn execution(&mut self) -> Result<Completion, CommandError> {
        (**self).execution()
    }
    fn create_memento(&mut self) {
        (**self).create_memento()
    }
    fn undoable(&mut self) -> Option<&mut dyn Undoable> {
        (**self).undoable()
    }
    fn params(&self) -> Value {
        (**self).params()
    }
    fn kind(&self) -> &'static str {
        (**self).kind()
    }
}

/// Moves a shape. The origin is captured at creation; the command can
/// execute once the target differs from it.
pub struct Translate {
    drawing: Drawing,
    shape: NodeId,
    origin: (f64, f64),
    pub new_x: f64,
    pub new_y: f64,
    memento: (f64, f64),
}

impl Translate {
    pub fn new(drawing: &Drawing, shape: &NodeId) -> Result<Self, String> {
        let origin = drawing.position(shape).ok_or_else(|| format!("no shape {shape}"))?;
        Ok(Translate { drawing: drawing.clone(), shape: shape.clone(), origin, new_x: origin.0, new_y: origin.1, memento: origin })
    }

    pub fn shape(&self) -> &NodeId {
        &self.shape
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    /// Sets the destination to the origin moved by `(dx, dy)`.
    pub fn set_offset(&mut self, dx: f64, dy: f64) {
        self.new_x = self.origin.0 + dx;
        self.new_y = self.origin.1 + dy;
    }
}

impl Command for Translate {
    fn can_execute(&self) -> bool {
        self.drawing.contains(&self.shape) && (self.new_x, self.new_y) != self.origin
    }
    fn create_memento(&mut self) {
        self.memento = self.drawing.position(&self.shape).unwrap_or(self.origin);
    }
    fn execution(&mut self) -> Result<Completion, CommandError> {
        if self.drawing.set_position(&self.shape, (self.new_x, self.new_y)) {
            Ok(Completion::Done)
        } else {
            Err(CommandError::Failed(format!("no shape {}", self.shape)))
        }
    }
    fn undoable(&mut self) -> Option<&mut dyn Undoable> {
        Some(self)
    }
    fn params(&self) -> Value {
        json!({"shape": self.shape, "new_x": self.new_x, "new_y": self.new_y})
    }
}

impl Undoable for Translate {
    fn undo(&mut self) -> Result<(), CommandError> {
        self.drawing.set_position(&self.shape, self.memento);
        Ok(())
    }
}

impl DemoCommand for Translate {
    fn update(&mut self, d: &InteractionData) {
        if let Some((s, t)) = data_vector(d) {
            self.set_offset(t.x - s.x, t.y - s.y);
        }
    }
}

/// Adds a rectangle spanning two corners.
pub struct DrawRect {
    drawing: Drawing,
    pub from: Point,
    pub to: Point,
    added: Option<NodeId>,
}

impl DrawRect {
    pub fn new(drawing: &Drawing) -> Self {
        DrawRect { drawing: drawing.clone(), from: Point::new(0.0, 0.0), to: Point::new(0.0, 0.0), added: None }
    }

    fn shape(&self, id: NodeId) -> Shape {
        let (x, y) = (self.from.x.min(self.to.x), self.from.y.min(self.to.y));
        Shape { id, x, y, w: (self.to.x - self.from.x).abs(), h: (self.to.y - self.from.y).abs(), color: default_color() }
    }
}

impl Command for DrawRect {
    fn can_execute(&self) -> bool {
        self.from.x != self.to.x && self.from.y != self.to.y
    }
    fn execution(&mut self) -> Result<Completion, CommandError> {
        let id = match self.added.take() {
            Some(id) => {
                self.drawing.remove(&id);
                id
            }
            None => self.drawing.fresh_id(),
        };
        self.drawing.insert(usize::MAX, self.shape(id.clone()));
        self.added = Some(id);
        Ok(Completion::Done)
    }
    fn undoable(&mut self) -> Option<&mut dyn Undoable> {
        Some(self)
    }
    fn params(&self) -> Value {
        json!({"from": [self.from.x, self.from.y], "to": [self.to.x, self.to.y], "id": self.added})
    }
}

impl Undoable for DrawRect {
    fn undo(&mut self) -> Result<(), CommandError> {
        if let Some(id) = &self.added {
            self.drawing.remove(id);
        }
        Ok(())
    }

    fn redo(&mut self) -> Result<Completion, CommandError> {
        if let Some(id) = &self.added {
            self.drawing.insert(usize::MAX, self.shape(id.clone()));
        }
        Ok(Completion::Done)
    }
}

impl DemoCommand for DrawRect {
    fn update(&mut self, d: &InteractionData) {
        if let Some((s, t)) = data_vector(d) {
            self.from = s;
            self.to = t;
        }
    }
}

pub struct ChangeColor {
    drawing: Drawing,
    shape: NodeId,
    pub color: String,
    memento: Option<String>,
}

impl ChangeColor {
    pub fn new(drawing: &Drawing, shape: &NodeId, color: &str) -> Self {
        ChangeColor { drawing: drawing.clone(), shape: shape.clone(), color: color.to_owned(), memento: None }
    }
}

impl Command for ChangeColor {
    fn can_execute(&self) -> bool {
        self.drawing.shape(&self.shape).is_some_and(|s| s.color != self.color)
    }
    fn create_memento(&mut self) {
        self.memento = self.drawing.shape(&self.shape).map(|s| s.color);
    }
    fn execution(&mut self) -> Result<Completion, CommandError> {
        self.drawing.set_color(&self.shape, &self.color).map(|_| Completion::Done).ok_or_else(|| CommandError::Failed(format!("no shape {}", self.shape)))
    }
    fn undoable(&mut self) -> Option<&mut dyn Undoable> {
        Some(self)
    }
    fn params(&self) -> Value {
        json!({"shape": self.shape, "color": self.color})
    }
}

impl Undoable for ChangeColor {
    fn undo(&mut self) -> Result<(), CommandError> {
        let m = self.memento.as_deref().ok_or(CommandError::NoMemento)?;
        self.drawing.set_color(&self.shape, m);
        Ok(())
    }
}

impl DemoCommand for ChangeColor {
    fn update(&mut self, _: &InteractionData) {}
}

/// Removes shapes; undo puts them back at their former rank.
pub struct DelShapes {
    drawing: Drawing,
    pub shapes: Vec<NodeId>,
    removed: Vec<(usize, Shape)>,
}

impl DelShapes {
    pub fn new(drawing: &Drawing, shapes: Vec<NodeId>) -> Self {
        DelShapes { drawing: drawing.clone(), shapes, removed: Vec::new() }
    }
}

impl Command for DelShapes {
    fn can_execute(&self) -> bool {
        !self.shapes.is_empty() && self.shapes.iter().all(|s| self.drawing.contains(s))
    }
    fn execution(&mut self) -> Result<Completion, CommandError> {
        self.removed = self.shapes.iter().filter_map(|s| self.drawing.remove(s)).collect();
        Ok(Completion::Done)
    }
    fn undoable(&mut self) -> Option<&mut dyn Undoable> {
        Some(self)
    }
    fn params(&self) -> Value {
        json!({"shapes": self.shapes})
    }
}

impl Undoable for DelShapes {
    fn undo(&mut self) -> Result<(), CommandError> {
        for (i, s) in self.removed.drain(..).rev() {
            self.drawing.insert(i, s);
        }
        Ok(())
    }
}

impl DemoCommand for DelShapes {
    fn update(&mut self, _: &InteractionData) {}
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::command::CommandInstance;

    fn drawing() -> Drawing {
        Drawing::new([Shape::new("a", 0.0, 0.0, 10.0, 10.0), Shape::new("b", 20.0, 0.0, 5.0, 5.0), Shape::new("c", 40.0, 0.0, 5.0, 5.0)])
    }

    #[test]
    fn translate_round_trip() {
        let d = drawing();
        let mut t = Translate::new(&d, &"a".into()).unwrap();
        assert!(!t.can_execute());
        t.set_offset(3.0, 3.0);
        let mut c = CommandInstance::new(t);
        c.execute().unwrap();
        assert_eq!(d.position(&"a".into()), Some((3.0, 3.0)));
        c.undo().unwrap();
        assert_eq!(d.position(&"a".into()), Some((0.0, 0.0)));
        c.redo().unwrap();
        assert_eq!(d.position(&"a".into()), Some((3.0, 3.0)));
        assert!(Translate::new(&d, &"zz".into()).is_err());
    }

    #[test]
    fn del_shapes_restores_order() {
        let d = drawing();
        let before = d.shapes();
        let mut c = CommandInstance::new(DelShapes::new(&d, vec!["c".into(), "a".into()]));
        c.execute().unwrap();
        assert_eq!(d.shapes().iter().map(|s| s.id.as_str()).collect::<Vec<_>>(), ["b"]);
        assert!(!d.node_list().contains(&"a".into()));
        c.undo().unwrap();
        assert_eq!(d.shapes(), before);
        assert!(d.node_list().contains(&"a".into()));
        c.redo().unwrap();
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn draw_rect_and_color() {
        let d = drawing();
        let mut r = DrawRect::new(&d);
        r.from = Point::new(50.0, 50.0);
        r.to = Point::new(40.0, 60.0);
        let mut c = CommandInstance::new(r);
        c.execute().unwrap();
        let s = d.shape(&"rect1".into()).unwrap();
        assert_eq!((s.x, s.y, s.w, s.h), (40.0, 50.0, 10.0, 10.0));
        assert_eq!(d.shape_at(Point::new(45.0, 55.0)), Some("rect1".into()));
        c.undo().unwrap();
        assert_eq!(d.len(), 3);
        c.redo().unwrap();
        assert_eq!(d.len(), 4);

        let mut c = CommandInstance::new(ChangeColor::new(&d, &"b".into(), "red"));
        c.execute().unwrap();
        assert_eq!(d.shape(&"b".into()).unwrap().color, "red");
        c.undo().unwrap();
        assert_eq!(d.shape(&"b".into()).unwrap().color, "black");
    }
}
