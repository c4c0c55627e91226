//! Bindings and the context that drives them.
//!
//! A [`BindingContext`] owns the bindings, the virtual clock, the command
//! history and the log sink. Events go in through [`BindingContext::dispatch`];
//! bindings see them in registration order until one consumes the event.

mod core;
pub mod log;
mod throttle;

use std::sync::Arc;

use serde::Serialize;
use serde_json::Value;

use crate::clock::{ClockError, VirtualClock};
use crate::command::{Command, CommandError, CommandId, CommandInstance, CommandStatus, History};
use crate::event::{Event, Millis};
use crate::fsm::{ClickSynthesizer, TimerToken};

pub use self::core::{BindingConfig, CmdHook, CommandFactory, DataHook, EndHook, InteractionFactory, Predicate};
pub use self::log::{LogLevel, LogLevels, LogRecord, LogSink, MemorySink, StderrSink};

use self::core::{AnyBinding, Binding};

/// Upper bound on wake-ups processed by one [`BindingContext::settle`].
pub const SETTLE_LIMIT: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BindingId(pub(crate) usize);

impl BindingId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Wake {
    Fsm(BindingId, TimerToken),
    Throttle(BindingId, u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandEvent {
    Created,
    Settled,
}

/// What observers learn about a command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommandRecord {
    pub binding: String,
    pub binding_id: BindingId,
    pub command: CommandId,
    pub kind: &'static str,
    pub status: CommandStatus,
    /// Index of the interaction execution that produced the command, from 1.
    pub execution: u64,
    pub params: Value,
}

pub(crate) struct PendingCommand {
    binding: BindingId,
    name: Arc<str>,
    log: LogLevels,
    execution: u64,
    cmd: CommandInstance,
}

type Observer = Box<dyn FnMut(CommandEvent, &CommandRecord)>;

pub(crate) struct Env<'a> {
    clock: &'a mut VirtualClock<Wake>,
    history: &'a mut History<CommandInstance>,
    sink: &'a mut dyn LogSink,
    observers: &'a mut Vec<Observer>,
    pending: &'a mut Vec<PendingCommand>,
    creations: &'a mut u64,
    scratch: &'a mut Vec<(TimerToken, Millis)>,
}

impl Env<'_> {
    fn log(&mut self, level: LogLevel, binding: &str, msg: String) {
        self.sink.record(LogRecord { level, t: self.clock.now(), msg, binding: binding.to_owned() });
    }

    fn notify(&mut self, ev: CommandEvent, rec: &CommandRecord) {
        for o in self.observers.iter_mut() {
            o(ev, rec);
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ContextError {
    #[error(transparent)]
    Clock(#[from] ClockError),
    #[error("settle did not converge after {0} wake-ups")]
    NoQuiescence(usize),
    #[error(transparent)]
    Command(#[from] CommandError),
    #[error("nothing to {0}")]
    EmptyHistory(&'static str),
    #[error("unknown binding {0:?}")]
    UnknownBinding(BindingId),
}

/// Owns bindings, virtual time, the undo history and logging.
pub struct BindingContext {
    bindings: Vec<Box<dyn AnyBinding>>,
    clock: VirtualClock<Wake>,
    history: History<CommandInstance>,
    sink: Box<dyn LogSink>,
    observers: Vec<Observer>,
    pending: Vec<PendingCommand>,
    creations: u64,
    scratch: Vec<(TimerToken, Millis)>,
    clicks: Option<ClickSynthesizer>,
}

impl Default for BindingContext {
    fn default() -> Self {
        BindingContext::new()
    }
}

macro_rules! env {
    ($s:ident) => {
        Env {
            clock: &mut $s.clock,
            history: &mut $s.history,
            sink: &mut *$s.sink,
            observers: &mut $s.observers,
            pending: &mut $s.pending,
            creations: &mut $s.creations,
            scratch: &mut $s.scratch,
        }
    };
}

impl BindingContext {
    pub fn new() -> Self {
        BindingContext {
            bindings: Vec::new(),
            clock: VirtualClock::new(),
            history: History::default(),
            sink: Box::new(StderrSink),
            observers: Vec::new(),
            pending: Vec::new(),
            creations: 0,
            scratch: Vec::new(),
            clicks: Some(ClickSynthesizer::new()),
        }
    }

    pub fn with_history_capacity(mut self, capacity: usize) -> Self {
        self.history = History::new(capacity);
        self
    }

    /// Whether a `pointer_click` is derived from each press/release pair on
    /// the same node. On by default.
    pub fn set_click_synthesis(&mut self, on: bool) {
        self.clicks = on.then(ClickSynthesizer::new);
    }

    pub fn set_log_sink(&mut self, sink: impl LogSink + 'static) {
        self.sink = Box::new(sink);
    }

    pub fn observe(&mut self, f: impl FnMut(CommandEvent, &CommandRecord) + 'static) {
        self.observers.push(Box::new(f));
    }

    pub(crate) fn add_binding<D: Clone + 'static, C: Command>(&mut self, cfg: std::rc::Rc<BindingConfig<D, C>>) -> BindingId {
        let id = BindingId(self.bindings.len());
        self.bindings.push(Box::new(Binding::new(id, cfg)));
        id
    }

    pub fn now(&self) -> Millis {
        self.clock.now()
    }

    pub fn binding_count(&self) -> usize {
        self.bindings.len()
    }

    pub fn binding_name(&self, id: BindingId) -> Option<&str> {
        self.bindings.get(id.0).map(|b| b.name())
    }

    pub fn interaction_name(&self, id: BindingId) -> Option<&str> {
        self.bindings.get(id.0).map(|b| b.interaction_name())
    }

    /// Number of interaction executions the binding has started.
    pub fn executions(&self, id: BindingId) -> Option<u64> {
        self.bindings.get(id.0).map(|b| b.executions())
    }

    pub fn is_running(&self, id: BindingId) -> Option<bool> {
        self.bindings.get(id.0).map(|b| b.is_running())
    }

    pub fn is_activated(&self, id: BindingId) -> Option<bool> {
        self.bindings.get(id.0).map(|b| b.is_activated())
    }

    /// The command of the ongoing execution, if one was created.
    pub fn current_command(&self, id: BindingId) -> Option<&CommandInstance> {
        self.bindings.get(id.0)?.current_command()
    }

    /// Commands created so far, executed or not.
    pub fn creations(&self) -> u64 {
        self.creations
    }

    pub fn history(&self) -> &History<CommandInstance> {
        &self.history
    }

    pub fn pending_commands(&self) -> usize {
        self.pending.len()
    }

    /// Deactivation cancels an ongoing execution and drops throttled events.
    pub fn set_activated(&mut self, id: BindingId, on: bool) -> Result<(), ContextError> {
        let b = self.bindings.get_mut(id.0).ok_or(ContextError::UnknownBinding(id))?;
        b.set_activated(on, &mut env!(self));
        Ok(())
    }

    /// Fires every wake-up due at or before `to`, then moves the clock.
    pub fn advance_to(&mut self, to: Millis) -> Result<(), ContextError> {
        if to < self.clock.now() {
            return Err(ClockError { now: self.clock.now(), requested: to }.into());
        }
        while let Some((deadline, wake)) = self.clock.pop_due(to) {
            self.clock.set_now(deadline.max(self.clock.now()))?;
            self.wake(wake);
        }
        self.clock.set_now(to)?;
        Ok(())
    }

    /// Fires pending wake-ups until none remain.
    pub fn settle(&mut self) -> Result<(), ContextError> {
        for _ in 0..SETTLE_LIMIT {
            match self.clock.next_deadline() {
                None => {
                    self.poll_pending(true);
                    return Ok(());
                }
                Some(d) => {
                    let (deadline, wake) = self.clock.pop_due(d).expect("deadline is due");
                    self.clock.set_now(deadline.max(self.clock.now()))?;
                    self.wake(wake);
                }
            }
        }
        Err(ContextError::NoQuiescence(SETTLE_LIMIT))
    }

    fn wake(&mut self, wake: Wake) {
        let mut env = env!(self);
        match wake {
            Wake::Fsm(id, token) => self.bindings[id.0].timeout(token, &mut env),
            Wake::Throttle(id, generation) => self.bindings[id.0].throttle_close(generation, &mut env),
        }
    }

    /// Delivers one event. Time first advances to the event's timestamp.
    pub fn dispatch(&mut self, e: &Event) -> Result<(), ContextError> {
        self.advance_to(e.time())?;
        self.poll_pending(false);
        let click = self.clicks.as_mut().and_then(|c| c.feed(e));
        self.deliver(e);
        if let Some(click) = click {
            self.deliver(&click);
        }
        Ok(())
    }

    fn deliver(&mut self, e: &Event) {
        let mut env = env!(self);
        for b in self.bindings.iter_mut() {
            if e.is_consumed() {
                break;
            }
            b.dispatch(e, &mut env);
        }
    }

    /// Resolves finished asynchronous commands; `block` waits for all.
    pub fn poll_pending(&mut self, block: bool) {
        if self.pending.is_empty() {
            return;
        }
        let mut env = env!(self);
        let mut i = 0;
        while i < env.pending.len() {
            let p = &mut env.pending[i];
            let res = if block { Some(p.cmd.wait()) } else { p.cmd.poll() };
            let Some(res) = res else {
                i += 1;
                continue;
            };
            let PendingCommand { binding, name, log, execution, mut cmd } = env.pending.remove(i);
            let ok = res.is_ok();
            if let Err(e) = res {
                if log.contains(LogLevel::Binding) {
                    env.log(LogLevel::Binding, &name, format!("{} of execution {execution} failed: {e}", cmd.kind()));
                }
            }
            if ok {
                cmd.mark_done();
            } else {
                cmd.discard();
            }
            let rec = CommandRecord {
                binding: name.to_string(),
                binding_id: binding,
                command: cmd.id(),
                kind: cmd.kind(),
                status: cmd.status(),
                execution,
                params: cmd.params(),
            };
            env.notify(CommandEvent::Settled, &rec);
            if ok && cmd.is_undoable() {
                if log.contains(LogLevel::Cmd) {
                    env.log(LogLevel::Cmd, &name, format!("registered {} of execution {execution}", cmd.kind()));
                }
                env.history.add(cmd);
            }
        }
    }

    pub fn undo(&mut self) -> Result<CommandId, ContextError> {
        let c = self.history.undo().ok_or(ContextError::EmptyHistory("undo"))?;
        let id = c.id();
        if let Err(e) = c.undo() {
            self.history.redo();
            return Err(e.into());
        }
        Ok(id)
    }

    pub fn redo(&mut self) -> Result<CommandId, ContextError> {
        let c = self.history.redo().ok_or(ContextError::EmptyHistory("redo"))?;
        let id = c.id();
        if let Err(e) = c.redo() {
            self.history.undo();
            return Err(e.into());
        }
        Ok(id)
    }
}
