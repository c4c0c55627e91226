//! Test oracles: produced-command observation, command suites and suite
//! skeleton generation.

use std::cell::RefCell;
use std::fmt::{self, Write as _};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::rc::Rc;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::binding::{BindingContext, BindingId, CommandEvent, CommandRecord};
use crate::command::{Command, CommandId, CommandInstance, CommandStatus, Executed};

/// One settled command as seen by an observation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Produced {
    pub binding: String,
    pub binding_id: BindingId,
    pub command: CommandId,
    pub kind: &'static str,
    pub status: CommandStatus,
    pub execution: u64,
    pub params: Value,
}

impl From<&CommandRecord> for Produced {
    fn from(r: &CommandRecord) -> Self {
        Produced {
            binding: r.binding.clone(),
            binding_id: r.binding_id,
            command: r.command,
            kind: r.kind,
            status: r.status,
            execution: r.execution,
            params: r.params.clone(),
        }
    }
}

/// Collects every command the observed bindings settle, executed or
/// discarded, in order.
#[derive(Debug, Clone, Default)]
pub struct BindingsObservation {
    produced: Rc<RefCell<Vec<Produced>>>,
    created: Rc<RefCell<u64>>,
}

impl BindingsObservation {
    /// Observes every binding of `ctx`.
    pub fn attach(ctx: &mut BindingContext) -> Self {
        Self::attach_filtered(ctx, None)
    }

    /// Observes the given bindings only.
    pub fn attach_to(ctx: &mut BindingContext, ids: &[BindingId]) -> Self {
        Self::attach_filtered(ctx, Some(ids.to_vec()))
    }

    fn attach_filtered(ctx: &mut BindingContext, ids: Option<Vec<BindingId>>) -> Self {
        let obs = BindingsObservation::default();
        let (produced, created) = (obs.produced.clone(), obs.created.clone());
        ctx.observe(move |ev, r| {
            if ids.as_ref().is_some_and(|ids| !ids.contains(&r.binding_id)) {
                return;
            }
            match ev {
                CommandEvent::Created => *created.borrow_mut() += 1,
                CommandEvent::Settled => produced.borrow_mut().push(r.into()),
            }
        });
        obs
    }

    pub fn produced(&self) -> Vec<Produced> {
        self.produced.borrow().clone()
    }

    /// Commands created so far, including unsettled ones.
    pub fn created(&self) -> u64 {
        *self.created.borrow()
    }

    /// Settled commands of `kind` that were not discarded.
    pub fn count(&self, kind: &str) -> usize {
        self.produced.borrow().iter().filter(|p| p.kind == kind && p.status != CommandStatus::Discarded).count()
    }

    /// Settled commands of `kind` that were discarded.
    pub fn discarded(&self, kind: &str) -> usize {
        self.produced.borrow().iter().filter(|p| p.kind == kind && p.status == CommandStatus::Discarded).count()
    }

    pub fn clear(&self) {
        self.produced.borrow_mut().clear();
        *self.created.borrow_mut() = 0;
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("expected {expected} `{kind}` command(s), found {found}; produced: {produced:?}")]
pub struct ProducedMismatch {
    pub kind: String,
    pub expected: usize,
    pub found: usize,
    pub produced: Vec<Produced>,
}

/// Passes iff exactly `count` non-discarded commands of `kind` were produced.
pub fn assert_cmd_produced(obs: &BindingsObservation, kind: &str, count: usize) -> Result<(), ProducedMismatch> {
    let found = obs.count(kind);
    if found == count {
        Ok(())
    } else {
        Err(ProducedMismatch { kind: kind.to_owned(), expected: count, found, produced: obs.produced() })
    }
}

/// Declarative description of a command, used by suites and skeletons.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommandMeta {
    pub name: String,
    pub fields: Vec<String>,
    pub undoable: bool,
}

impl CommandMeta {
    pub fn new(name: impl Into<String>, fields: &[&str], undoable: bool) -> Self {
        CommandMeta { name: name.into(), fields: fields.iter().map(|f| f.to_string()).collect(), undoable }
    }
}

type Setup<W> = Box<dyn Fn() -> W>;
type Check<W> = Box<dyn Fn(&W)>;

/// A suite of scenarios for one command type. `W` holds the world a fixture
/// prepares: the model and whatever the checkers inspect. Fixtures and
/// checkers fail by panicking, as with `assert!`.
pub struct CommandSuiteSpec<W> {
    meta: CommandMeta,
    create: Box<dyn Fn(&W) -> CommandInstance>,
    can_do: Vec<(String, Setup<W>)>,
    cannot_do: Vec<(String, Setup<W>)>,
    do_checkers: Vec<(String, Check<W>)>,
    undo_checkers: Vec<(String, Check<W>)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SuiteError {
    #[error("suite `{0}` has no can-do fixture")]
    NoCanDo(String),
    #[error("suite `{0}` has no do checker")]
    NoDoCheckers(String),
    #[error("`{0}` is not undoable but the suite has undo checkers")]
    UndoCheckersOnNonUndoable(String),
    #[error("`{0}` is undoable but the suite has no undo checker")]
    MissingUndoCheckers(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScenarioResult {
    pub name: String,
    pub outcome: Outcome,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub scenarios: Vec<ScenarioResult>,
    pub notes: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.scenarios.iter().all(|s| s.outcome == Outcome::Pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suite {}", self.suite)?;
        for s in &self.scenarios {
            writeln!(f, "  {:?} {} {}", s.outcome, s.name, s.detail)?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned()).unwrap_or_else(|| "panic".into())
}

enum Step {
    Fail(String),
    Error(String),
}

impl<W: 'static> CommandSuiteSpec<W> {
    pub fn new<C: Command>(meta: CommandMeta, create: impl Fn(&W) -> C + 'static) -> Self {
        CommandSuiteSpec {
            meta,
            create: Box::new(move |w| CommandInstance::new(create(w))),
            can_do: Vec::new(),
            cannot_do: Vec::new(),
            do_checkers: Vec::new(),
            undo_checkers: Vec::new(),
        }
    }

    pub fn meta(&self) -> &CommandMeta {
        &self.meta
    }

    pub fn can_do(mut self, name: impl Into<String>, setup: impl Fn() -> W + 'static) -> Self {
        self.can_do.push((name.into(), Box::new(setup)));
        self
    }

    pub fn cannot_do(mut self, name: impl Into<String>, setup: impl Fn() -> W + 'static) -> Self {
        self.cannot_do.push((name.into(), Box::new(setup)));
        self
    }

    pub fn do_checker(mut self, name: impl Into<String>, check: impl Fn(&W) + 'static) -> Self {
        self.do_checkers.push((name.into(), Box::new(check)));
        self
    }

    pub fn undo_checker(mut self, name: impl Into<String>, check: impl Fn(&W) + 'static) -> Self {
        self.undo_checkers.push((name.into(), Box::new(check)));
        self
    }

    pub fn validate(&self) -> Result<(), SuiteError> {
        let name = || self.meta.name.clone();
        if self.can_do.is_empty() {
            return Err(SuiteError::NoCanDo(name()));
        }
        if self.do_checkers.is_empty() {
            return Err(SuiteError::NoDoCheckers(name()));
        }
        match (self.meta.undoable, self.undo_checkers.is_empty()) {
            (false, false) => Err(SuiteError::UndoCheckersOnNonUndoable(name())),
            (true, true) => Err(SuiteError::MissingUndoCheckers(name())),
            _ => Ok(()),
        }
    }

    fn setup(&self, f: &Setup<W>) -> Result<(W, CommandInstance), Step> {
        let w = catch_unwind(AssertUnwindSafe(f)).map_err(|p| Step::Error(format!("fixture: {}", panic_message(p))))?;
        let c = catch_unwind(AssertUnwindSafe(|| (self.create)(&w))).map_err(|p| Step::Error(format!("create: {}", panic_message(p))))?;
        if c.is_undoable() != self.meta.undoable {
            return Err(Step::Error(format!("declared undoable = {}, command says {}", self.meta.undoable, c.is_undoable())));
        }
        Ok((w, c))
    }

    fn check(checkers: &[(String, Check<W>)], w: &W, phase: &str) -> Result<(), Step> {
        for (name, c) in checkers {
            catch_unwind(AssertUnwindSafe(|| c(w))).map_err(|p| Step::Fail(format!("{phase} checker {name}: {}", panic_message(p))))?;
        }
        Ok(())
    }

    fn execute(c: &mut CommandInstance) -> Result<(), Step> {
        match c.execute() {
            Ok(Executed::Yes) => Ok(()),
            Ok(Executed::Pending) => c.wait().map_err(|e| Step::Fail(format!("execution: {e}"))),
            Ok(Executed::NotExecutable) => Err(Step::Fail("command cannot execute".into())),
            Err(e) => Err(Step::Fail(format!("execution: {e}"))),
        }
    }

    fn undo(c: &mut CommandInstance, w: &W, undo: &[(String, Check<W>)]) -> Result<(), Step> {
        c.undo().map_err(|e| Step::Fail(format!("undo: {e}")))?;
        Self::check(undo, w, "undo")
    }

    fn redo(c: &mut CommandInstance, w: &W, done: &[(String, Check<W>)]) -> Result<(), Step> {
        c.redo().map_err(|e| Step::Fail(format!("redo: {e}")))?;
        Self::check(done, w, "redo")
    }

    /// Runs every scenario. Invalid suites are reported as errors.
    pub fn run(&self) -> SuiteReport {
        let mut report = SuiteReport { suite: self.meta.name.clone(), scenarios: Vec::new(), notes: Vec::new() };
        if let Err(e) = self.validate() {
            report.scenarios.push(ScenarioResult { name: "validate".into(), outcome: Outcome::Error, detail: e.to_string() });
            return report;
        }
        let mut push = |name: String, r: Result<(), Step>| {
            let (outcome, detail) = match r {
                Ok(()) => (Outcome::Pass, String::new()),
                Err(Step::Fail(d)) => (Outcome::Fail, d),
                Err(Step::Error(d)) => (Outcome::Error, d),
            };
            report.scenarios.push(ScenarioResult { name, outcome, detail });
        };
        let (done, undone) = (&self.do_checkers, &self.undo_checkers);
        for (fx, setup) in &self.can_do {
            push(
                format!("canDo[{fx}]"),
                self.setup(setup).and_then(|(_, c)| if c.can_execute() { Ok(()) } else { Err(Step::Fail("cannot execute".into())) }),
            );
            push(
                format!("do[{fx}]"),
                self.setup(setup).and_then(|(w, mut c)| {
                    Self::execute(&mut c)?;
                    Self::check(done, &w, "do")
                }),
            );
            if !self.meta.undoable {
                continue;
            }
            push(
                format!("undo[{fx}]"),
                self.setup(setup).and_then(|(w, mut c)| {
                    Self::execute(&mut c)?;
                    Self::undo(&mut c, &w, undone)
                }),
            );
            push(
                format!("redo[{fx}]"),
                self.setup(setup).and_then(|(w, mut c)| {
                    Self::execute(&mut c)?;
                    Self::undo(&mut c, &w, undone)?;
                    Self::redo(&mut c, &w, done)
                }),
            );
            push(
                format!("cycles[{fx}]"),
                self.setup(setup).and_then(|(w, mut c)| {
                    Self::execute(&mut c)?;
                    Self::check(done, &w, "do")?;
                    for _ in 0..3 {
                        Self::undo(&mut c, &w, undone)?;
                        Self::redo(&mut c, &w, done)?;
                    }
                    Ok(())
                }),
            );
        }
        for (fx, setup) in &self.cannot_do {
            push(
                format!("cannotDo[{fx}]"),
                self.setup(setup).and_then(|(_, c)| if c.can_execute() { Err(Step::Fail("can execute".into())) } else { Ok(()) }),
            );
        }
        if self.cannot_do.is_empty() {
            report.notes.push("cannotDo scenarios skipped: no fixture".into());
        }
        if !self.meta.undoable {
            report.notes.push("undo, redo and cycle scenarios skipped: command is not undoable".into());
        }
        report
    }
}

fn snake(s: &str) -> String {
    let mut out = String::new();
    for (i, ch) in s.chars().enumerate() {
        if ch.is_uppercase() {
            if i > 0 {
                out.push('_');
            }
            out.extend(ch.to_lowercase());
        } else {
            out.push(ch);
        }
    }
    out
}

/// Marker left on every line to complete by hand.
pub const FILL: &str = "FILL";

/// Rust source of a suite scaffold for the described command. Lines to
/// complete carry a `FILL` comment; the scaffold compiles as is.
pub fn generate_test_skeleton(meta: &CommandMeta) -> String {
    let name = &meta.name;
    let world = format!("{name}World");
    let f = snake(name);
    let mut s = String::new();
    let _ = writeln!(s, "//! Command suite for `{name}`.");
    let _ = writeln!(s);
    let _ = writeln!(s, "use bindkit::testkit::{{CommandMeta, CommandSuiteSpec}};");
    let _ = writeln!(s, "#[allow(unused_imports)]");
    let _ = writeln!(s, "use super::*; // {FILL}: bring the command and model types into scope");
    let _ = writeln!(s);
    let _ = writeln!(s, "/// What fixtures prepare and checkers inspect.");
    let _ = writeln!(s, "#[allow(dead_code)]");
    if meta.fields.is_empty() {
        let _ = writeln!(s, "pub struct {world} {{}}");
    } else {
        let _ = writeln!(s, "pub struct {world} {{");
        for field in &meta.fields {
            let _ = writeln!(s, "    pub {}: (), // {FILL}: type", snake(field));
        }
        let _ = writeln!(s, "}}");
    }
    let _ = writeln!(s);
    let fields: Vec<String> = meta.fields.iter().map(|f| format!("{f:?}")).collect();
    let _ = writeln!(s, "pub fn {f}_suite() -> CommandSuiteSpec<{world}> {{");
    let _ = writeln!(s, "    let meta = CommandMeta::new({name:?}, &[{}], {});", fields.join(", "), meta.undoable);
    let _ = writeln!(s, "    CommandSuiteSpec::new(meta, |w: &{world}| -> {name} {{");
    let _ = writeln!(s, "        let _ = w;");
    let _ = writeln!(s, "        todo!(\"create the command\") // {FILL}");
    let _ = writeln!(s, "    }})");
    let _ = writeln!(s, "    .can_do(\"can_do_1\", || todo!(\"a world where the command can execute\")) // {FILL}");
    let _ = writeln!(s, "    .cannot_do(\"cannot_do_1\", || todo!(\"a world where it cannot\")) // {FILL}");
    let _ = writeln!(s, "    .do_checker(\"do_1\", |_w| todo!(\"assert the effects\")) // {FILL}");
    if meta.undoable {
        let _ = writeln!(s, "    .undo_checker(\"undo_1\", |_w| todo!(\"assert the effects are reverted\")) // {FILL}");
    }
    let _ = writeln!(s, "}}");
    s
}
