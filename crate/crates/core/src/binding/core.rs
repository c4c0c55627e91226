//! One binding: an interaction turned into commands.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::rc::Rc;
use std::sync::Arc;

use crate::command::{Command, CommandError, CommandInstance, CommandStatus, Executed};
use crate::event::{Event, Millis, NodeId};
use crate::fsm::{FsmOutcome, Signal, TimerToken};
use crate::interaction::{NodeList, UserInteraction};

use super::log::{LogLevel, LogLevels};
use super::throttle::{Offer, Throttle};
use super::{BindingId, CommandEvent, CommandRecord, Env, PendingCommand, Wake};

pub type InteractionFactory<D> = Rc<dyn Fn() -> UserInteraction<D>>;
pub type CommandFactory<D, C> = Rc<dyn Fn(&D) -> Result<C, String>>;
pub type CmdHook<D, C> = Rc<dyn Fn(&D, &mut C)>;
pub type EndHook<D, C> = Rc<dyn Fn(&D, Option<&mut C>)>;
pub type DataHook<D> = Rc<dyn Fn(&D)>;
pub type Predicate<D> = Rc<dyn Fn(&D) -> bool>;

/// A complete, immutable binding configuration.
pub struct BindingConfig<D, C> {
    pub name: Option<String>,
    pub interaction: InteractionFactory<D>,
    pub factory: CommandFactory<D, C>,
    pub first: Vec<CmdHook<D, C>>,
    pub then: Vec<CmdHook<D, C>>,
    pub end: Vec<EndHook<D, C>>,
    pub cancel: Vec<DataHook<D>>,
    pub end_or_cancel: Vec<DataHook<D>>,
    pub when: Vec<Predicate<D>>,
    pub nodes: Vec<NodeId>,
    pub lists: Vec<NodeList>,
    pub keys: Option<Vec<String>>,
    pub continuous: bool,
    pub strict_start: bool,
    pub consume: bool,
    pub throttle_ms: Millis,
    pub log: LogLevels,
}

fn guarded<R>(f: impl FnOnce() -> R) -> Result<R, String> {
    catch_unwind(AssertUnwindSafe(f)).map_err(|p| {
        p.downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| p.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "hook panicked".to_owned())
    })
}

pub(crate) struct Binding<D, C> {
    id: BindingId,
    name: Arc<str>,
    cfg: Rc<BindingConfig<D, C>>,
    interaction: UserInteraction<D>,
    current: Option<CommandInstance>,
    throttle: Throttle,
    activated: bool,
    executions: u64,
}

impl<D: Clone + 'static, C: Command> Binding<D, C> {
    pub(crate) fn new(id: BindingId, cfg: Rc<BindingConfig<D, C>>) -> Self {
        let mut interaction = (cfg.interaction)();
        interaction.register_nodes(cfg.nodes.iter().cloned());
        for l in &cfg.lists {
            interaction.register_list(l.clone());
        }
        if let Some(keys) = &cfg.keys {
            interaction.set_key_filter(Some(keys));
        }
        let name: Arc<str> = match &cfg.name {
            Some(n) => n.as_str().into(),
            None => format!("{}#{}", interaction.name(), id.0).into(),
        };
        Binding { id, name, throttle: Throttle::new(cfg.throttle_ms), cfg, interaction, current: None, activated: true, executions: 0 }
    }

    fn log(&self, env: &mut Env<'_>, level: LogLevel, msg: impl FnOnce() -> String) {
        if self.cfg.log.contains(level) {
            env.log(level, &self.name, msg());
        }
    }

    fn record(&self, cmd: &CommandInstance, status: CommandStatus) -> CommandRecord {
        CommandRecord {
            binding: self.name.to_string(),
            binding_id: self.id,
            command: cmd.id(),
            kind: cmd.kind(),
            status,
            execution: self.executions,
            params: cmd.params(),
        }
    }

    fn when(&self) -> Result<bool, String> {
        let d = self.interaction.data();
        guarded(|| self.cfg.when.iter().all(|w| w(d)))
    }

    fn run_cmd_hooks(&mut self, hooks: &[CmdHook<D, C>]) -> Result<(), String> {
        let d = self.interaction.data();
        let Some(c) = self.current.as_mut().and_then(|c| c.downcast_mut::<C>()) else { return Ok(()) };
        guarded(|| hooks.iter().for_each(|h| h(d, c)))
    }

    fn run_data_hooks(&self, hooks: &[DataHook<D>]) -> Result<(), String> {
        let d = self.interaction.data();
        guarded(|| hooks.iter().for_each(|h| h(d)))
    }

    fn create(&mut self, env: &mut Env<'_>) -> Result<(), String> {
        let d = self.interaction.data();
        let cmd = guarded(|| (self.cfg.factory)(d))??;
        let inst = CommandInstance::new(cmd);
        *env.creations += 1;
        self.log(env, LogLevel::Binding, || format!("created {} in execution {}", inst.kind(), self.executions));
        env.notify(CommandEvent::Created, &self.record(&inst, CommandStatus::Created));
        self.current = Some(inst);
        let cfg = self.cfg.clone();
        self.run_cmd_hooks(&cfg.first)
    }

    fn ensure_command(&mut self, env: &mut Env<'_>) -> Result<(), String> {
        if self.current.is_none() {
            self.create(env)?;
        }
        Ok(())
    }

    fn handle(&mut self, out: FsmOutcome, env: &mut Env<'_>) {
        let s = out.signals;
        if !s.is_empty() {
            if self.cfg.log.contains(LogLevel::Interaction) {
                for sig in s.iter() {
                    let msg = format!("{} {} ({})", self.interaction.name(), sig.as_str(), self.interaction.fsm().current_state_name());
                    env.log(LogLevel::Interaction, &self.name, msg);
                }
            }
            if let Err(msg) = self.on_signals(s, env) {
                self.fail(env, msg);
            }
        }
        if self.interaction.fsm().is_over() {
            self.interaction.reinit();
        }
    }

    fn on_signals(&mut self, s: crate::fsm::Signals, env: &mut Env<'_>) -> Result<(), String> {
        if s.contains(Signal::Started) {
            self.executions += 1;
            if self.when()? {
                self.create(env)?;
            } else if self.cfg.strict_start {
                self.log(env, LogLevel::Binding, || "when() is false at start: execution cancelled".to_owned());
                self.on_cancel(env);
                return Ok(());
            }
        }
        if s.contains(Signal::Ended) {
            self.on_end(env)
        } else if s.contains(Signal::Cancelled) {
            self.on_cancel(env);
            Ok(())
        } else if s.contains(Signal::Updated) {
            self.on_update(env)
        } else {
            Ok(())
        }
    }

    fn on_update(&mut self, env: &mut Env<'_>) -> Result<(), String> {
        if !self.when()? {
            return Ok(());
        }
        self.ensure_command(env)?;
        let cfg = self.cfg.clone();
        self.run_cmd_hooks(&cfg.then)?;
        if cfg.continuous {
            let c = self.current.as_mut().expect("command exists");
            if c.is_pending() {
                if let Some(Err(e)) = c.poll() {
                    let msg = e.to_string();
                    self.log(env, LogLevel::Binding, || msg);
                }
            }
            let c = self.current.as_mut().expect("command exists");
            if !c.is_pending() && c.can_execute() {
                let res = c.execute();
                self.log_execution(env, res);
            }
        }
        Ok(())
    }

    fn log_execution(&self, env: &mut Env<'_>, res: Result<Executed, CommandError>) {
        let Some(c) = &self.current else { return };
        match res {
            Ok(Executed::Yes) => self.log(env, LogLevel::Cmd, || format!("executed {} of execution {} {}", c.kind(), self.executions, c.params())),
            Ok(Executed::Pending) => self.log(env, LogLevel::Cmd, || format!("started {} of execution {}", c.kind(), self.executions)),
            Ok(Executed::NotExecutable) => self.log(env, LogLevel::Cmd, || format!("{} of execution {} cannot execute", c.kind(), self.executions)),
            Err(e) => self.log(env, LogLevel::Binding, || format!("{} of execution {} failed: {e}", c.kind(), self.executions)),
        }
    }

    fn on_end(&mut self, env: &mut Env<'_>) -> Result<(), String> {
        let cfg = self.cfg.clone();
        let when = self.when()?;
        if when {
            self.ensure_command(env)?;
            self.run_cmd_hooks(&cfg.then)?;
            let c = self.current.as_mut().expect("command exists");
            if c.is_pending() {
                c.wait().ok();
            }
            let res = c.execute();
            self.log_execution(env, res);
        }
        {
            let d = self.interaction.data();
            let mut c = self.current.as_mut().and_then(|c| c.downcast_mut::<C>());
            if let Err(msg) = guarded(|| cfg.end.iter().for_each(|h| h(d, c.as_deref_mut()))) {
                self.log(env, LogLevel::Binding, || format!("end hook failed: {msg}"));
            }
        }
        if let Err(msg) = self.run_data_hooks(&cfg.end_or_cancel) {
            self.log(env, LogLevel::Binding, || format!("endOrCancel hook failed: {msg}"));
        }
        if let Some(mut c) = self.current.take() {
            if when && c.is_pending() {
                env.pending.push(PendingCommand { binding: self.id, name: self.name.clone(), log: cfg.log, execution: self.executions, cmd: c });
            } else if when && c.was_executed() {
                self.settle(env, c);
            } else {
                if c.was_executed() {
                    self.undo_effects(env, &mut c);
                }
                c.discard();
                self.log(env, LogLevel::Cmd, || format!("discarded {} of execution {}", c.kind(), self.executions));
                env.notify(CommandEvent::Settled, &self.record(&c, CommandStatus::Discarded));
            }
        }
        self.interaction.reinit();
        Ok(())
    }

    /// An executed command at the end of an execution: registered if undoable.
    fn settle(&self, env: &mut Env<'_>, mut c: CommandInstance) {
        c.mark_done();
        env.notify(CommandEvent::Settled, &self.record(&c, CommandStatus::Done));
        if c.is_undoable() {
            self.log(env, LogLevel::Cmd, || format!("registered {} of execution {}", c.kind(), self.executions));
            env.history.add(c);
        }
    }

    fn undo_effects(&self, env: &mut Env<'_>, c: &mut CommandInstance) {
        match c.undo() {
            Ok(()) => self.log(env, LogLevel::Cmd, || format!("undone {} of execution {}", c.kind(), self.executions)),
            Err(e) => self.log(env, LogLevel::Binding, || format!("undo of {} of execution {} failed: {e}", c.kind(), self.executions)),
        }
    }

    fn on_cancel(&mut self, env: &mut Env<'_>) {
        let cfg = self.cfg.clone();
        if let Err(msg) = self.run_data_hooks(&cfg.cancel) {
            self.log(env, LogLevel::Binding, || format!("cancel hook failed: {msg}"));
        }
        if let Err(msg) = self.run_data_hooks(&cfg.end_or_cancel) {
            self.log(env, LogLevel::Binding, || format!("endOrCancel hook failed: {msg}"));
        }
        if let Some(mut c) = self.current.take() {
            if c.is_pending() {
                c.wait().ok();
            }
            if c.was_executed() {
                self.undo_effects(env, &mut c);
            }
            c.discard();
            env.notify(CommandEvent::Settled, &self.record(&c, CommandStatus::Discarded));
        }
        self.interaction.reinit();
    }

    fn fail(&mut self, env: &mut Env<'_>, msg: String) {
        self.log(env, LogLevel::Binding, || format!("error: {msg}; execution cancelled"));
        self.on_cancel(env);
    }

    fn deliver(&mut self, e: &Event, env: &mut Env<'_>) -> bool {
        let out = self.interaction.process_targeted(e);
        if out.consumed_event {
            self.interaction.drain_timers(env.scratch);
            for (token, deadline) in env.scratch.drain(..) {
                env.clock.schedule(deadline, Wake::Fsm(self.id, token));
            }
        }
        let consumed = out.consumed_event;
        self.handle(out, env);
        consumed
    }
}

/// The object-safe view the context drives.
pub(crate) trait AnyBinding {
    fn name(&self) -> &str;
    fn interaction_name(&self) -> &str;
    fn dispatch(&mut self, e: &Event, env: &mut Env<'_>);
    fn timeout(&mut self, token: TimerToken, env: &mut Env<'_>);
    fn throttle_close(&mut self, generation: u64, env: &mut Env<'_>);
    fn set_activated(&mut self, on: bool, env: &mut Env<'_>);
    fn is_activated(&self) -> bool;
    fn is_running(&self) -> bool;
    fn executions(&self) -> u64;
    fn current_command(&self) -> Option<&CommandInstance>;
}

impl<D: Clone + 'static, C: Command> AnyBinding for Binding<D, C> {
    fn name(&self) -> &str {
        &self.name
    }

    fn interaction_name(&self) -> &str {
        self.interaction.name()
    }

    fn dispatch(&mut self, e: &Event, env: &mut Env<'_>) {
        if !self.activated || !self.interaction.accepts_target(e.target()) {
            return;
        }
        let consumed = if self.throttle.is_off() {
            self.deliver(e, env)
        } else {
            match self.throttle.offer(e) {
                Offer::Opened { deadline, generation } => {
                    env.clock.schedule(deadline, Wake::Throttle(self.id, generation));
                    false
                }
                Offer::Replaced => false,
                Offer::Flush(p) => {
                    self.deliver(&p, env);
                    self.deliver(e, env)
                }
            }
        };
        if consumed && self.cfg.consume {
            e.consume();
        }
    }

    fn timeout(&mut self, token: TimerToken, env: &mut Env<'_>) {
        let out = self.interaction.on_timeout(token);
        self.interaction.drain_timers(env.scratch);
        for (token, deadline) in env.scratch.drain(..) {
            env.clock.schedule(deadline, Wake::Fsm(self.id, token));
        }
        self.handle(out, env);
    }

    fn throttle_close(&mut self, generation: u64, env: &mut Env<'_>) {
        if let Some(e) = self.throttle.close(generation) {
            self.deliver(&e, env);
        }
    }

    fn set_activated(&mut self, on: bool, env: &mut Env<'_>) {
        if !on && self.activated {
            if self.interaction.is_running() || self.current.is_some() {
                self.log(env, LogLevel::Binding, || "deactivated while running: execution cancelled".to_owned());
                self.on_cancel(env);
            }
            self.throttle.clear();
        }
        self.activated = on;
        self.interaction.set_activated(on);
    }

    fn is_activated(&self) -> bool {
        self.activated
    }

    fn is_running(&self) -> bool {
        self.interaction.is_running()
    }

    fn executions(&self) -> u64 {
        self.executions
    }

    fn current_command(&self) -> Option<&CommandInstance> {
        self.current.as_ref()
    }
}
