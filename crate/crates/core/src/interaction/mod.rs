//! User interactions: a machine plus the data it maintains.
//!
//! Every fired transition updates the interaction data before the binding
//! sees the step's signals. Data is flushed on `reinit` and on deactivation.

mod catalog;
mod data;

use std::cell::RefCell;
use std::fmt;
use std::rc::Rc;
use std::sync::Arc;

use thiserror::Error;

use crate::event::{Event, EventKind, EventKindSet, Millis, NodeId};
use crate::fsm::{Fired, Fsm, FsmError, FsmOutcome, TimerToken};

pub use catalog::{
    construct_interaction, machines, click, dnd, double_click, double_click_with, drag_lock, drag_lock_with, key_pressed, keys_typed,
    keys_typed_with, multi_touch, press, scroll, tap, tap_with, DOUBLE_CLICK_ALT_TIMEOUT, DOUBLE_CLICK_TIMEOUT, INTERACTIONS,
    KEYS_TYPED_TIMEOUT, TAP_TIMEOUT,
};
pub use data::{DataFamily, FromToData, InteractionData, KeysData, MultiTouchData, PointData, TapData, TouchData};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InteractionError {
    #[error("unknown interaction `{0}`")]
    Unknown(String),
    #[error("invalid parameter `{param}` for {interaction}: {reason}")]
    InvalidParam { interaction: String, param: String, reason: String },
    #[error(transparent)]
    Fsm(#[from] FsmError),
}

/// A fired transition as seen by a data updater.
#[derive(Debug, Clone, Copy)]
pub struct Step<'a> {
    /// The event that fired it; `None` for timeouts.
    pub event: Option<&'a Event>,
    pub fired: Fired,
    pub fsm: &'a Fsm,
}

pub type Updater<D> = Arc<dyn Fn(&mut D, &Step<'_>) + Send + Sync>;

/// A shared, mutable list of nodes. Interactions holding it see additions
/// and removals immediately.
#[derive(Debug, Clone, Default)]
pub struct NodeList(Rc<RefCell<Vec<NodeId>>>);

impl NodeList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&self, node: NodeId) {
        let mut v = self.0.borrow_mut();
        if !v.contains(&node) {
            v.push(node);
        }
    }

    pub fn remove(&self, node: &NodeId) -> bool {
        let mut v = self.0.borrow_mut();
        let before = v.len();
        v.retain(|n| n != node);
        v.len() != before
    }

    pub fn contains(&self, node: &NodeId) -> bool {
        self.0.borrow().contains(node)
    }

    pub fn to_vec(&self) -> Vec<NodeId> {
        self.0.borrow().clone()
    }

    pub fn len(&self) -> usize {
        self.0.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl FromIterator<NodeId> for NodeList {
    fn from_iter<T: IntoIterator<Item = NodeId>>(iter: T) -> Self {
        let list = NodeList::new();
        iter.into_iter().for_each(|n| list.add(n));
        list
    }
}

/// A running interaction with data of type `D`.
pub struct UserInteraction<D> {
    name: Arc<str>,
    fsm: Fsm,
    data: D,
    fresh: Arc<dyn Fn() -> D + Send + Sync>,
    updater: Updater<D>,
    nodes: Vec<NodeId>,
    lists: Vec<NodeList>,
    activated: bool,
    kind_filter: bool,
    active: Option<EventKindSet>,
}

impl<D: Clone + 'static> UserInteraction<D> {
    pub fn new(
        name: impl Into<Arc<str>>,
        fsm: Fsm,
        fresh: impl Fn() -> D + Send + Sync + 'static,
        updater: impl Fn(&mut D, &Step<'_>) + Send + Sync + 'static,
    ) -> Self {
        UserInteraction {
            name: name.into(),
            fsm,
            data: fresh(),
            fresh: Arc::new(fresh),
            updater: Arc::new(updater),
            nodes: Vec::new(),
            lists: Vec::new(),
            activated: true,
            kind_filter: true,
            active: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn fsm(&self) -> &Fsm {
        &self.fsm
    }

    pub fn data(&self) -> &D {
        &self.data
    }

    pub fn data_snapshot(&self) -> D {
        self.data.clone()
    }

    pub fn fresh_data(&self) -> D {
        (self.fresh)()
    }

    pub fn is_running(&self) -> bool {
        self.fsm.is_running()
    }

    pub fn is_activated(&self) -> bool {
        self.activated
    }

    /// Turning an interaction off resets its machine and flushes its data.
    pub fn set_activated(&mut self, on: bool) {
        if !on {
            self.reinit();
        }
        self.activated = on;
    }

    /// Skipping events outside the active kinds is on by default.
    pub fn set_kind_filter(&mut self, on: bool) {
        self.kind_filter = on;
    }

    pub fn register_nodes(&mut self, nodes: impl IntoIterator<Item = NodeId>) {
        for n in nodes {
            if !self.nodes.contains(&n) {
                self.nodes.push(n);
            }
        }
    }

    pub fn unregister_node(&mut self, node: &NodeId) {
        self.nodes.retain(|n| n != node);
    }

    pub fn register_list(&mut self, list: NodeList) {
        self.lists.push(list);
    }

    pub fn registered_nodes(&self) -> Vec<NodeId> {
        let mut all = self.nodes.clone();
        for l in &self.lists {
            for n in l.to_vec() {
                if !all.contains(&n) {
                    all.push(n);
                }
            }
        }
        all
    }

    pub fn accepts_target(&self, node: &NodeId) -> bool {
        self.nodes.iter().any(|n| n == node) || self.lists.iter().any(|l| l.contains(node))
    }

    pub fn set_late_start(&mut self, state: &str) -> Result<(), FsmError> {
        self.fsm.set_late_start(state)
    }

    pub fn set_key_filter(&mut self, keys: Option<&[String]>) {
        self.fsm.set_key_filter(keys);
    }

    pub fn active_event_kinds(&mut self) -> EventKindSet {
        match self.active {
            Some(set) => set,
            None => {
                let set = self.fsm.active_event_kinds();
                self.active = Some(set);
                set
            }
        }
    }

    /// Whether `e` would be handed to the machine.
    pub fn accepts(&mut self, e: &Event) -> bool {
        self.activated && self.accepts_target(e.target()) && (!self.kind_filter || self.active_event_kinds().contains(e.kind()))
    }

    pub fn process(&mut self, e: &Event) -> FsmOutcome {
        if !self.accepts(e) {
            return FsmOutcome::IGNORED;
        }
        self.feed(e)
    }

    /// [`Self::process`] for an event whose target was already checked.
    pub(crate) fn process_targeted(&mut self, e: &Event) -> FsmOutcome {
        if !self.activated || (self.kind_filter && !self.active_event_kinds().contains(e.kind())) {
            return FsmOutcome::IGNORED;
        }
        self.feed(e)
    }

    /// Runs the machine on `e` without node or kind filtering.
    pub fn feed(&mut self, e: &Event) -> FsmOutcome {
        if !self.activated {
            return FsmOutcome::IGNORED;
        }
        let out = self.fsm.process_event(e);
        let self_loop = matches!(out.fired, Some(f) if f.from == f.to) && self.fsm.is_flat();
        if out.consumed_event && !self_loop {
            self.active = None;
        }
        if let Some(fired) = out.fired {
            (self.updater)(&mut self.data, &Step { event: Some(e), fired, fsm: &self.fsm });
        }
        out
    }

    pub fn on_timeout(&mut self, token: TimerToken) -> FsmOutcome {
        if !self.activated {
            return FsmOutcome::IGNORED;
        }
        let out = self.fsm.on_timeout(token);
        if let Some(fired) = out.fired {
            self.active = None;
            (self.updater)(&mut self.data, &Step { event: None, fired, fsm: &self.fsm });
        }
        out
    }

    pub fn drain_timers(&mut self, out: &mut Vec<(TimerToken, Millis)>) {
        self.fsm.drain_timers(out);
    }

    pub fn reinit(&mut self) {
        self.fsm.reinit();
        self.data = (self.fresh)();
        self.active = None;
    }

    /// Same interaction with its data exposed as [`InteractionData`].
    pub fn into_dyn(self) -> UserInteraction<InteractionData>
    where
        D: DataFamily,
    {
        let updater = self.updater;
        let fresh = self.fresh;
        UserInteraction {
            name: self.name,
            fsm: self.fsm,
            data: self.data.into_dyn(),
            fresh: Arc::new(move || fresh().into_dyn()),
            updater: Arc::new(move |d: &mut InteractionData, step: &Step<'_>| {
                if let Some(d) = D::from_dyn_mut(d) {
                    updater(d, step)
                }
            }),
            nodes: self.nodes,
            lists: self.lists,
            activated: self.activated,
            kind_filter: self.kind_filter,
            active: self.active,
        }
    }
}

impl<D: fmt::Debug> fmt::Debug for UserInteraction<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UserInteraction")
            .field("name", &self.name)
            .field("state", &self.fsm.current_state_name())
            .field("data", &self.data)
            .field("activated", &self.activated)
            .finish()
    }
}

pub fn is_escape(e: &Event) -> bool {
    e.kind() == EventKind::KeyPress && matches!(e.key(), Some("Escape" | "ESC"))
}
