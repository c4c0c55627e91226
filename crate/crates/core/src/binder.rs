//! Staged, immutable binder configuration.
//!
//! Every routine returns a new stage and leaves the receiver untouched, so a
//! partially configured binder can be shared and completed several times.
//!
//! ```
//! use bindkit::binder::binder;
//! use bindkit::binding::BindingContext;
//! use bindkit::command::Command;
//! use bindkit::interaction::{self, FromToData};
//!
//! struct Noop;
//! impl Command for Noop {
//!     fn execution(&mut self) -> Result<bindkit::command::Completion, bindkit::command::CommandError> {
//!         Ok(bindkit::command::Completion::Done)
//!     }
//! }
//!
//! let mut ctx = BindingContext::new();
//! let base = binder().using(interaction::dnd).when(|d: &FromToData| d.button == Some(0));
//! base.to_produce(|_| Noop).on(["canvas"]).bind(&mut ctx).unwrap();
//! base.to_produce(|_| Noop).on(["palette"]).bind(&mut ctx).unwrap();
//! assert_eq!(ctx.binding_count(), 2);
//! ```

use std::fmt;
use std::marker::PhantomData;
use std::rc::Rc;

use thiserror::Error;

use crate::binding::{
    BindingConfig, BindingContext, BindingId, CmdHook, CommandFactory, DataHook, EndHook, InteractionFactory, LogLevels, Predicate,
};
use crate::command::Command;
use crate::event::{Millis, NodeId};
use crate::interaction::{self, FromToData, InteractionError, KeysData, MultiTouchData, NodeList, PointData, TapData, UserInteraction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Empty,
    HasInteraction,
    HasCommand,
    Complete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RoutineKind {
    Using,
    ToProduce,
    On,
    OnDynamic,
    First,
    Then,
    End,
    Cancel,
    EndOrCancel,
    When,
    With,
    Throttle,
    StrictStart,
    Continuous,
    Consume,
    Log,
    Name,
}

impl RoutineKind {
    pub const ALL: [RoutineKind; 17] = [
        RoutineKind::Using,
        RoutineKind::ToProduce,
        RoutineKind::On,
        RoutineKind::OnDynamic,
        RoutineKind::First,
        RoutineKind::Then,
        RoutineKind::End,
        RoutineKind::Cancel,
        RoutineKind::EndOrCancel,
        RoutineKind::When,
        RoutineKind::With,
        RoutineKind::Throttle,
        RoutineKind::StrictStart,
        RoutineKind::Continuous,
        RoutineKind::Consume,
        RoutineKind::Log,
        RoutineKind::Name,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RoutineKind::Using => "using",
            RoutineKind::ToProduce => "toProduce",
            RoutineKind::On => "on",
            RoutineKind::OnDynamic => "onDynamic",
            RoutineKind::First => "first",
            RoutineKind::Then => "then",
            RoutineKind::End => "end",
            RoutineKind::Cancel => "cancel",
            RoutineKind::EndOrCancel => "endOrCancel",
            RoutineKind::When => "when",
            RoutineKind::With => "with",
            RoutineKind::Throttle => "throttle",
            RoutineKind::StrictStart => "strictStart",
            RoutineKind::Continuous => "continuous",
            RoutineKind::Consume => "consume",
            RoutineKind::Log => "log",
            RoutineKind::Name => "name",
        }
    }
}

impl fmt::Display for RoutineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The stage table: `Ok` if `kind` may be applied at `stage`, otherwise the
/// reason it may not.
pub fn check_routine(stage: Stage, kind: RoutineKind) -> Result<(), &'static str> {
    use RoutineKind::*;
    let has_i = stage != Stage::Empty;
    let has_c = matches!(stage, Stage::HasCommand | Stage::Complete);
    match kind {
        Using if has_i => Err("interaction already selected"),
        ToProduce if !has_i => Err("interaction not selected"),
        ToProduce if has_c => Err("command already selected"),
        When | With | Cancel | EndOrCancel if !has_i => Err("interaction not selected"),
        First | Then | End if !has_c => Err("command not selected"),
        _ => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BindError {
    #[error("`{routine}` is not allowed here: {reason}")]
    Illegal { routine: RoutineKind, reason: &'static str },
    #[error("incomplete binder, missing: {}", .0.join(", "))]
    Incomplete(Vec<&'static str>),
    #[error(transparent)]
    Interaction(#[from] InteractionError),
}

/// One routine with its argument.
pub enum Routine<D, C> {
    Using(InteractionFactory<D>),
    ToProduce(CommandFactory<D, C>),
    On(Vec<NodeId>),
    OnDynamic(NodeList),
    First(CmdHook<D, C>),
    Then(CmdHook<D, C>),
    End(EndHook<D, C>),
    Cancel(DataHook<D>),
    EndOrCancel(DataHook<D>),
    When(Predicate<D>),
    With(Vec<String>),
    Throttle(Millis),
    StrictStart(bool),
    Continuous(bool),
    Consume(bool),
    Log(LogLevels),
    Name(String),
}

impl<D, C> Routine<D, C> {
    pub fn kind(&self) -> RoutineKind {
        match self {
            Routine::Using(_) => RoutineKind::Using,
            Routine::ToProduce(_) => RoutineKind::ToProduce,
            Routine::On(_) => RoutineKind::On,
            Routine::OnDynamic(_) => RoutineKind::OnDynamic,
            Routine::First(_) => RoutineKind::First,
            Routine::Then(_) => RoutineKind::Then,
            Routine::End(_) => RoutineKind::End,
            Routine::Cancel(_) => RoutineKind::Cancel,
            Routine::EndOrCancel(_) => RoutineKind::EndOrCancel,
            Routine::When(_) => RoutineKind::When,
            Routine::With(_) => RoutineKind::With,
            Routine::Throttle(_) => RoutineKind::Throttle,
            Routine::StrictStart(_) => RoutineKind::StrictStart,
            Routine::Continuous(_) => RoutineKind::Continuous,
            Routine::Consume(_) => RoutineKind::Consume,
            Routine::Log(_) => RoutineKind::Log,
            Routine::Name(_) => RoutineKind::Name,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
struct Flags {
    name: Option<String>,
    nodes: Vec<NodeId>,
    keys: Option<Vec<String>>,
    continuous: bool,
    strict_start: bool,
    consume: bool,
    throttle_ms: Millis,
    log: LogLevels,
}

/// A binder stage checked at run time against the stage table.
pub struct RoutineStage<D, C> {
    flags: Flags,
    lists: Vec<NodeList>,
    interaction: Option<InteractionFactory<D>>,
    factory: Option<CommandFactory<D, C>>,
    when: Vec<Predicate<D>>,
    cancel: Vec<DataHook<D>>,
    end_or_cancel: Vec<DataHook<D>>,
    first: Vec<CmdHook<D, C>>,
    then: Vec<CmdHook<D, C>>,
    end: Vec<EndHook<D, C>>,
}

impl<D, C> Clone for RoutineStage<D, C> {
    fn clone(&self) -> Self {
        RoutineStage {
            flags: self.flags.clone(),
            lists: self.lists.clone(),
            interaction: self.interaction.clone(),
            factory: self.factory.clone(),
            when: self.when.clone(),
            cancel: self.cancel.clone(),
            end_or_cancel: self.end_or_cancel.clone(),
            first: self.first.clone(),
            then: self.then.clone(),
            end: self.end.clone(),
        }
    }
}

impl<D, C> Default for RoutineStage<D, C> {
    fn default() -> Self {
        RoutineStage {
            flags: Flags::default(),
            lists: Vec::new(),
            interaction: None,
            factory: None,
            when: Vec::new(),
            cancel: Vec::new(),
            end_or_cancel: Vec::new(),
            first: Vec::new(),
            then: Vec::new(),
            end: Vec::new(),
        }
    }
}

/// Observable content of a stage, for comparisons.
#[derive(Debug, Clone, PartialEq)]
pub struct StageSummary {
    pub stage: Stage,
    pub name: Option<String>,
    pub nodes: Vec<NodeId>,
    pub dynamic_lists: usize,
    pub keys: Option<Vec<String>>,
    pub continuous: bool,
    pub strict_start: bool,
    pub consume: bool,
    pub throttle_ms: Millis,
    pub log: LogLevels,
    /// Hook counts: when, first, then, end, cancel, endOrCancel.
    pub hooks: [usize; 6],
}

impl<D, C> RoutineStage<D, C> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn stage(&self) -> Stage {
        match (self.interaction.is_some(), self.factory.is_some(), self.has_nodes()) {
            (false, _, _) => Stage::Empty,
            (true, false, _) => Stage::HasInteraction,
            (true, true, false) => Stage::HasCommand,
            (true, true, true) => Stage::Complete,
        }
    }

    fn has_nodes(&self) -> bool {
        !self.flags.nodes.is_empty() || !self.lists.is_empty()
    }

    pub fn summary(&self) -> StageSummary {
        StageSummary {
            stage: self.stage(),
            name: self.flags.name.clone(),
            nodes: self.flags.nodes.clone(),
            dynamic_lists: self.lists.len(),
            keys: self.flags.keys.clone(),
            continuous: self.flags.continuous,
            strict_start: self.flags.strict_start,
            consume: self.flags.consume,
            throttle_ms: self.flags.throttle_ms,
            log: self.flags.log,
            hooks: [self.when.len(), self.first.len(), self.then.len(), self.end.len(), self.cancel.len(), self.end_or_cancel.len()],
        }
    }

    /// Returns a new stage with `r` applied.
    pub fn apply(&self, r: Routine<D, C>) -> Result<Self, BindError> {
        let routine = r.kind();
        check_routine(self.stage(), routine).map_err(|reason| BindError::Illegal { routine, reason })?;
        let mut s = self.clone();
        match r {
            Routine::Using(f) => s.interaction = Some(f),
            Routine::ToProduce(f) => s.factory = Some(f),
            Routine::On(nodes) => s.flags_mut().on(nodes),
            Routine::OnDynamic(l) => s.flags_mut().on_dynamic(l),
            Routine::First(h) => s.first.push(h),
            Routine::Then(h) => s.then.push(h),
            Routine::End(h) => s.end.push(h),
            Routine::Cancel(h) => s.cancel.push(h),
            Routine::EndOrCancel(h) => s.end_or_cancel.push(h),
            Routine::When(p) => s.when.push(p),
            Routine::With(keys) => s.flags.keys = Some(keys),
            Routine::Throttle(ms) => s.flags_mut().throttle(ms),
            Routine::StrictStart(b) => s.flags_mut().strict_start(b),
            Routine::Continuous(b) => s.flags_mut().continuous(b),
            Routine::Consume(b) => s.flags_mut().consume(b),
            Routine::Log(l) => s.flags_mut().log(l),
            Routine::Name(n) => s.flags_mut().name(n),
        }
        Ok(s)
    }

    fn flags_mut(&mut self) -> FlagEdit<'_> {
        FlagEdit { flags: &mut self.flags, lists: &mut self.lists }
    }

    fn missing(&self) -> Vec<&'static str> {
        let mut m = Vec::new();
        if self.interaction.is_none() {
            m.push("using");
        }
        if self.factory.is_none() {
            m.push("toProduce");
        }
        if !self.has_nodes() {
            m.push("on");
        }
        m
    }

    /// Moves the data-typed part to a stage producing another command type.
    /// Command-typed parts are dropped.
    fn retype<C2>(&self) -> RoutineStage<D, C2> {
        RoutineStage {
            flags: self.flags.clone(),
            lists: self.lists.clone(),
            interaction: self.interaction.clone(),
            factory: None,
            when: self.when.clone(),
            cancel: self.cancel.clone(),
            end_or_cancel: self.end_or_cancel.clone(),
            first: Vec::new(),
            then: Vec::new(),
            end: Vec::new(),
        }
    }
}

impl<D: Clone + 'static, C: Command> RoutineStage<D, C> {
    /// Creates, attaches and activates a binding.
    pub fn bind(&self, ctx: &mut BindingContext) -> Result<BindingId, BindError> {
        let missing = self.missing();
        if !missing.is_empty() {
            return Err(BindError::Incomplete(missing));
        }
        let f = &self.flags;
        let cfg = BindingConfig {
            name: f.name.clone(),
            interaction: self.interaction.clone().expect("checked"),
            factory: self.factory.clone().expect("checked"),
            first: self.first.clone(),
            then: self.then.clone(),
            end: self.end.clone(),
            cancel: self.cancel.clone(),
            end_or_cancel: self.end_or_cancel.clone(),
            when: self.when.clone(),
            nodes: f.nodes.clone(),
            lists: self.lists.clone(),
            keys: f.keys.clone(),
            continuous: f.continuous,
            strict_start: f.strict_start,
            consume: f.consume,
            throttle_ms: f.throttle_ms,
            log: f.log,
        };
        Ok(ctx.add_binding(Rc::new(cfg)))
    }
}

/// No interaction selected yet.
#[derive(Clone, Default)]
pub struct Binder {
    flags: Flags,
    lists: Vec<NodeList>,
}

/// Placeholder command type of stages without a command.
pub struct NoCommand(PhantomData<()>);

/// An interaction is selected; its data type is `D`.
pub struct InteractionBinder<D>(RoutineStage<D, NoCommand>);

/// An interaction and a command factory are selected.
pub struct CommandBinder<D, C>(RoutineStage<D, C>);

impl<D> Clone for InteractionBinder<D> {
    fn clone(&self) -> Self {
        InteractionBinder(self.0.clone())
    }
}

impl<D, C> Clone for CommandBinder<D, C> {
    fn clone(&self) -> Self {
        CommandBinder(self.0.clone())
    }
}

pub fn binder() -> Binder {
    Binder::default()
}

macro_rules! shared_routines {
    ($apply:ident) => {
        /// Adds static target nodes; repeated calls take the union.
        pub fn on<N: Into<NodeId>>(&self, nodes: impl IntoIterator<Item = N>) -> Self {
            self.$apply(|s| s.on(nodes.into_iter().map(Into::into).collect()))
        }

        /// Targets every node of a list that may change after binding.
        pub fn on_dynamic(&self, list: &NodeList) -> Self {
            self.$apply(|s| s.on_dynamic(list.clone()))
        }

        pub fn name(&self, name: impl Into<String>) -> Self {
            let name = name.into();
            self.$apply(|s| s.name(name))
        }

        pub fn log(&self, levels: impl Into<LogLevels>) -> Self {
            let levels = levels.into();
            self.$apply(|s| s.log(levels))
        }

        pub fn throttle(&self, ms: Millis) -> Self {
            self.$apply(|s| s.throttle(ms))
        }

        pub fn strict_start(&self, on: bool) -> Self {
            self.$apply(|s| s.strict_start(on))
        }

        pub fn continuous(&self, on: bool) -> Self {
            self.$apply(|s| s.continuous(on))
        }

        pub fn consume(&self, on: bool) -> Self {
            self.$apply(|s| s.consume(on))
        }
    };
}

/// Helper carrying the flag part of any stage.
struct FlagEdit<'a> {
    flags: &'a mut Flags,
    lists: &'a mut Vec<NodeList>,
}

impl FlagEdit<'_> {
    fn on(self, nodes: Vec<NodeId>) {
        for n in nodes {
            if !self.flags.nodes.contains(&n) {
                self.flags.nodes.push(n);
            }
        }
    }
    fn on_dynamic(self, l: NodeList) {
        self.lists.push(l);
    }
    fn name(self, n: String) {
        self.flags.name = Some(n);
    }
    fn log(self, l: LogLevels) {
        self.flags.log = l;
    }
    fn throttle(self, ms: Millis) {
        self.flags.throttle_ms = ms;
    }
    fn strict_start(self, b: bool) {
        self.flags.strict_start = b;
    }
    fn continuous(self, b: bool) {
        self.flags.continuous = b;
    }
    fn consume(self, b: bool) {
        self.flags.consume = b;
    }
}

impl Binder {
    fn edit(&self, f: impl FnOnce(FlagEdit<'_>)) -> Self {
        let mut b = self.clone();
        f(FlagEdit { flags: &mut b.flags, lists: &mut b.lists });
        b
    }

    shared_routines!(edit);

    /// Selects the interaction; `f` builds a fresh one per binding.
    pub fn using<D: Clone + 'static>(&self, f: impl Fn() -> UserInteraction<D> + 'static) -> InteractionBinder<D> {
        let s = RoutineStage { flags: self.flags.clone(), lists: self.lists.clone(), ..RoutineStage::default() };
        InteractionBinder(s.apply(Routine::Using(Rc::new(f))).expect("empty stage accepts using"))
    }

    /// Like [`Binder::using`] for constructors that validate parameters; the
    /// constructor runs once here so errors surface at configuration time.
    pub fn try_using<D: Clone + 'static>(
        &self,
        f: impl Fn() -> Result<UserInteraction<D>, InteractionError> + 'static,
    ) -> Result<InteractionBinder<D>, BindError> {
        f()?;
        Ok(self.using(move || f().expect("validated at configuration")))
    }
}

impl<D> InteractionBinder<D> {
    fn edit(&self, f: impl FnOnce(FlagEdit<'_>)) -> Self {
        let mut s = self.0.clone();
        f(FlagEdit { flags: &mut s.flags, lists: &mut s.lists });
        InteractionBinder(s)
    }

    fn push(&self, r: Routine<D, NoCommand>) -> Self {
        InteractionBinder(self.0.apply(r).expect("interaction stage"))
    }

    shared_routines!(edit);

    /// Adds a condition on the interaction data; conditions are combined with AND.
    pub fn when(&self, p: impl Fn(&D) -> bool + 'static) -> Self {
        self.push(Routine::When(Rc::new(p)))
    }

    /// Restricts keyboard interactions to these keys.
    pub fn with<K: Into<String>>(&self, keys: impl IntoIterator<Item = K>) -> Self {
        self.push(Routine::With(keys.into_iter().map(Into::into).collect()))
    }

    pub fn cancel(&self, h: impl Fn(&D) + 'static) -> Self {
        self.push(Routine::Cancel(Rc::new(h)))
    }

    pub fn end_or_cancel(&self, h: impl Fn(&D) + 'static) -> Self {
        self.push(Routine::EndOrCancel(Rc::new(h)))
    }

    pub fn to_produce<C: Command>(&self, f: impl Fn(&D) -> C + 'static) -> CommandBinder<D, C> {
        self.try_to_produce(move |d| Ok(f(d)))
    }

    /// A factory that may fail; failures cancel the execution.
    pub fn try_to_produce<C: Command>(&self, f: impl Fn(&D) -> Result<C, String> + 'static) -> CommandBinder<D, C> {
        let s = self.0.retype::<C>();
        CommandBinder(s.apply(Routine::ToProduce(Rc::new(f))).expect("interaction stage accepts toProduce"))
    }

    pub fn stage(&self) -> RoutineStage<D, NoCommand> {
        self.0.clone()
    }
}

impl<D, C> CommandBinder<D, C> {
    fn edit(&self, f: impl FnOnce(FlagEdit<'_>)) -> Self {
        let mut s = self.0.clone();
        f(FlagEdit { flags: &mut s.flags, lists: &mut s.lists });
        CommandBinder(s)
    }

    fn push(&self, r: Routine<D, C>) -> Self {
        CommandBinder(self.0.apply(r).expect("command stage"))
    }

    shared_routines!(edit);

    pub fn when(&self, p: impl Fn(&D) -> bool + 'static) -> Self {
        self.push(Routine::When(Rc::new(p)))
    }

    pub fn with<K: Into<String>>(&self, keys: impl IntoIterator<Item = K>) -> Self {
        self.push(Routine::With(keys.into_iter().map(Into::into).collect()))
    }

    pub fn cancel(&self, h: impl Fn(&D) + 'static) -> Self {
        self.push(Routine::Cancel(Rc::new(h)))
    }

    pub fn end_or_cancel(&self, h: impl Fn(&D) + 'static) -> Self {
        self.push(Routine::EndOrCancel(Rc::new(h)))
    }

    /// Runs once, right after the command is created.
    pub fn first(&self, h: impl Fn(&D, &mut C) + 'static) -> Self {
        self.push(Routine::First(Rc::new(h)))
    }

    /// Runs on each update and at the end, before execution.
    pub fn then(&self, h: impl Fn(&D, &mut C) + 'static) -> Self {
        self.push(Routine::Then(Rc::new(h)))
    }

    /// Runs when the interaction ends, with the command if one exists.
    pub fn end(&self, h: impl Fn(&D, Option<&mut C>) + 'static) -> Self {
        self.push(Routine::End(Rc::new(h)))
    }

    pub fn stage(&self) -> RoutineStage<D, C> {
        self.0.clone()
    }
}

impl<D: Clone + 'static, C: Command> CommandBinder<D, C> {
    pub fn bind(&self, ctx: &mut BindingContext) -> Result<BindingId, BindError> {
        self.0.bind(ctx)
    }
}

pub fn drag_lock_binder() -> InteractionBinder<FromToData> {
    binder().using(interaction::drag_lock)
}

pub fn dnd_binder() -> InteractionBinder<FromToData> {
    binder().using(interaction::dnd)
}

pub fn tap_binder(n: usize) -> Result<InteractionBinder<TapData>, BindError> {
    binder().try_using(move || interaction::tap(n))
}

pub fn multi_touch_binder(n: usize) -> Result<InteractionBinder<MultiTouchData>, BindError> {
    binder().try_using(move || interaction::multi_touch(n))
}

/// Key presses, optionally restricted with `with`.
pub fn key_binder() -> InteractionBinder<KeysData> {
    binder().using(interaction::key_pressed)
}

/// Button activations (clicks).
pub fn button_binder() -> InteractionBinder<PointData> {
    binder().using(interaction::click)
}
