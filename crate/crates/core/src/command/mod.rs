//! Commands, undo support and the undo/redo history.

mod history;

use std::any::Any;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, TryRecvError};

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

pub use history::{History, DEFAULT_CAPACITY};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommandError {
    #[error("no memento: the command was never executed")]
    NoMemento,
    #[error("command is not undoable")]
    NotUndoable,
    #[error("cannot execute a command in status {0:?}")]
    Status(CommandStatus),
    #[error("command failed: {0}")]
    Failed(String),
    #[error("asynchronous completion was dropped")]
    Disconnected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandStatus {
    Created,
    Executed,
    Done,
    Discarded,
}

/// How an execution finished.
pub enum Completion {
    Done,
    /// The effect runs elsewhere and reports through the channel.
    Pending(Receiver<Result<(), String>>),
}

impl Completion {
    /// A pending completion and the sender that resolves it.
    pub fn pending() -> (Completion, mpsc::Sender<Result<(), String>>) {
        let (tx, rx) = mpsc::channel();
        (Completion::Pending(rx), tx)
    }
}

impl fmt::Debug for Completion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Completion::Done => "Done",
            Completion::Pending(_) => "Pending",
        })
    }
}

/// A change to the application.
pub trait Command: Any {
    fn can_execute(&self) -> bool {
        true
    }

    fn execution(&mut self) -> Result<Completion, CommandError>;

    /// Called once, right before the first execution.
    fn create_memento(&mut self) {}

    fn undoable(&mut self) -> Option<&mut dyn Undoable> {
        None
    }

    /// Parameters for logs and reports.
    fn params(&self) -> Value {
        Value::Null
    }

    /// Short type name, used to classify produced commands.
    fn kind(&self) -> &'static str {
        short_type_name::<Self>()
    }
}

impl Command for Box<dyn Command> {
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

pub trait Undoable: Command {
    fn undo(&mut self) -> Result<(), CommandError>;

    fn redo(&mut self) -> Result<Completion, CommandError> {
        self.execution()
    }
}

/// Process-wide unique command identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CommandId(u64);

impl CommandId {
    fn fresh() -> Self {
        static NEXT: AtomicU64 = AtomicU64::new(1);
        CommandId(NEXT.fetch_add(1, Ordering::Relaxed))
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for CommandId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// What `execute` did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Executed {
    Yes,
    NotExecutable,
    /// Started; resolve with [`CommandInstance::poll`].
    Pending,
}

/// A command with its life-cycle bookkeeping.
pub struct CommandInstance {
    id: CommandId,
    kind: &'static str,
    status: CommandStatus,
    memento: bool,
    undoable: bool,
    pending: Option<Receiver<Result<(), String>>>,
    cmd: Box<dyn Command>,
}

pub(crate) fn short_type_name<T: ?Sized>() -> &'static str {
    let full = std::any::type_name::<T>();
    let base = full.split('<').next().unwrap_or(full);
    base.rsplit("::").next().unwrap_or(base)
}

impl CommandInstance {
    pub fn new<C: Command>(cmd: C) -> Self {
        let mut cmd: Box<dyn Command> = Box::new(cmd);
        let undoable = cmd.undoable().is_some();
        CommandInstance {
            id: CommandId::fresh(),
            kind: cmd.kind(),
            status: CommandStatus::Created,
            memento: false,
            undoable,
            pending: None,
            cmd,
        }
    }

    pub fn id(&self) -> CommandId {
        self.id
    }

    /// Short type name of the wrapped command.
    pub fn kind(&self) -> &'static str {
        self.kind
    }

    pub fn status(&self) -> CommandStatus {
        self.status
    }

    pub fn was_executed(&self) -> bool {
        matches!(self.status, CommandStatus::Executed | CommandStatus::Done)
    }

    pub fn memento_created(&self) -> bool {
        self.memento
    }

    pub fn is_undoable(&self) -> bool {
        self.undoable
    }

    pub fn is_pending(&self) -> bool {
        self.pending.is_some()
    }

    pub fn can_execute(&self) -> bool {
        self.cmd.can_execute()
    }

    pub fn params(&self) -> Value {
        self.cmd.params()
    }

    pub fn command(&self) -> &dyn Command {
        &*self.cmd
    }

    pub fn downcast_ref<C: Command>(&self) -> Option<&C> {
        (&*self.cmd as &dyn Any).downcast_ref()
    }

    pub fn downcast_mut<C: Command>(&mut self) -> Option<&mut C> {
        (&mut *self.cmd as &mut dyn Any).downcast_mut()
    }

    /// Runs the command if it can execute. The memento is taken before the
    /// first execution only.
    pub fn execute(&mut self) -> Result<Executed, CommandError> {
        if !matches!(self.status, CommandStatus::Created | CommandStatus::Executed) || self.pending.is_some() {
            return Err(CommandError::Status(self.status));
        }
        if !self.cmd.can_execute() {
            return Ok(Executed::NotExecutable);
        }
        if !self.memento {
            self.cmd.create_memento();
            self.memento = true;
        }
        match self.cmd.execution()? {
            Completion::Done => {
                self.status = CommandStatus::Executed;
                Ok(Executed::Yes)
            }
            Completion::Pending(rx) => {
                self.pending = Some(rx);
                Ok(Executed::Pending)
            }
        }
    }

    /// Checks a pending execution. `None` while it is still running.
    pub fn poll(&mut self) -> Option<Result<(), CommandError>> {
        let rx = self.pending.as_ref()?;
        let res = match rx.try_recv() {
            Err(TryRecvError::Empty) => return None,
            Err(TryRecvError::Disconnected) => Err(CommandError::Disconnected),
            Ok(Err(msg)) => Err(CommandError::Failed(msg)),
            Ok(Ok(())) => {
                self.status = CommandStatus::Executed;
                Ok(())
            }
        };
        self.pending = None;
        Some(res)
    }

    /// Blocks until a pending execution resolves.
    pub fn wait(&mut self) -> Result<(), CommandError> {
        let Some(rx) = self.pending.take() else { return Ok(()) };
        match rx.recv() {
            Ok(Ok(())) => {
                self.status = CommandStatus::Executed;
                Ok(())
            }
            Ok(Err(msg)) => Err(CommandError::Failed(msg)),
            Err(_) => Err(CommandError::Disconnected),
        }
    }

    pub(crate) fn mark_done(&mut self) {
        if self.status == CommandStatus::Executed {
            self.status = CommandStatus::Done;
        }
    }

    pub(crate) fn discard(&mut self) {
        self.pending = None;
        self.status = CommandStatus::Discarded;
    }

    pub fn undo(&mut self) -> Result<(), CommandError> {
        if !self.was_executed() {
            return Err(CommandError::NoMemento);
        }
        self.cmd.undoable().ok_or(CommandError::NotUndoable)?.undo()
    }

    pub fn redo(&mut self) -> Result<(), CommandError> {
        if !self.was_executed() {
            return Err(CommandError::NoMemento);
        }
        match self.cmd.undoable().ok_or(CommandError::NotUndoable)?.redo()? {
            Completion::Done => Ok(()),
            Completion::Pending(rx) => match rx.recv() {
                Ok(res) => res.map_err(CommandError::Failed),
                Err(_) => Err(CommandError::Disconnected),
            },
        }
    }
}

impl fmt::Debug for CommandInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CommandInstance").field("id", &self.id).field("kind", &self.kind).field("status", &self.status).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;
    use std::rc::Rc;

    struct Counter {
        value: Rc<Cell<i32>>,
        delta: i32,
        memento: Option<i32>,
        mementos_taken: u32,
    }

    impl Counter {
        fn new(value: Rc<Cell<i32>>, delta: i32) -> Self {
            Counter { value, delta, memento: None, mementos_taken: 0 }
        }
    }

    impl Command for Counter {
        fn can_execute(&self) -> bool {
            self.delta != 0
        }
        fn execution(&mut self) -> Result<Completion, CommandError> {
            self.value.set(self.memento.unwrap() + self.delta);
            Ok(Completion::Done)
        }
        fn create_memento(&mut self) {
            self.memento = Some(self.value.get());
            self.mementos_taken += 1;
        }
        fn undoable(&mut self) -> Option<&mut dyn Undoable> {
            Some(self)
        }
    }

    impl Undoable for Counter {
        fn undo(&mut self) -> Result<(), CommandError> {
            self.value.set(self.memento.ok_or(CommandError::NoMemento)?);
            Ok(())
        }
    }

    struct Plain;
    impl Command for Plain {
        fn execution(&mut self) -> Result<Completion, CommandError> {
            Ok(Completion::Done)
        }
    }

    #[test]
    fn memento_once() {
        let v = Rc::new(Cell::new(10));
        let mut c = CommandInstance::new(Counter::new(v.clone(), 5));
        assert_eq!(c.kind(), "Counter");
        assert!(c.is_undoable());
        assert_eq!(c.execute().unwrap(), Executed::Yes);
        c.downcast_mut::<Counter>().unwrap().delta = 7;
        c.execute().unwrap();
        assert_eq!(v.get(), 17);
        assert_eq!(c.downcast_ref::<Counter>().unwrap().mementos_taken, 1);
        c.undo().unwrap();
        assert_eq!(v.get(), 10);
        c.redo().unwrap();
        assert_eq!(v.get(), 17);
    }

    #[test]
    fn not_executable_is_noop() {
        let v = Rc::new(Cell::new(1));
        let mut c = CommandInstance::new(Counter::new(v.clone(), 0));
        assert_eq!(c.execute().unwrap(), Executed::NotExecutable);
        assert_eq!(c.status(), CommandStatus::Created);
        assert!(!c.memento_created());
        assert_eq!(c.undo(), Err(CommandError::NoMemento));
    }

    #[test]
    fn plain_commands_cannot_undo() {
        let mut c = CommandInstance::new(Plain);
        assert!(!c.is_undoable());
        c.execute().unwrap();
        assert_eq!(c.undo(), Err(CommandError::NotUndoable));
    }

    #[test]
    fn status_progression() {
        let mut c = CommandInstance::new(Plain);
        c.execute().unwrap();
        c.mark_done();
        assert_eq!(c.status(), CommandStatus::Done);
        assert_eq!(c.execute(), Err(CommandError::Status(CommandStatus::Done)));
    }

    struct Async(Option<mpsc::Sender<Result<(), String>>>);
    impl Command for Async {
        fn execution(&mut self) -> Result<Completion, CommandError> {
            let (c, tx) = Completion::pending();
            self.0 = Some(tx);
            Ok(c)
        }
    }

    #[test]
    fn async_completion() {
        let mut c = CommandInstance::new(Async(None));
        assert_eq!(c.execute().unwrap(), Executed::Pending);
        assert!(c.poll().is_none());
        assert_eq!(c.status(), CommandStatus::Created);
        let tx = c.downcast_mut::<Async>().unwrap().0.take().unwrap();
        std::thread::spawn(move || tx.send(Ok(())).unwrap()).join().unwrap();
        assert_eq!(c.poll(), Some(Ok(())));
        assert_eq!(c.status(), CommandStatus::Executed);

        let mut failing = CommandInstance::new(Async(None));
        failing.execute().unwrap();
        let tx = failing.downcast_mut::<Async>().unwrap().0.take().unwrap();
        tx.send(Err("disk full".into())).unwrap();
        assert_eq!(failing.poll(), Some(Err(CommandError::Failed("disk full".into()))));
        assert_eq!(failing.status(), CommandStatus::Created);
    }

    #[test]
    fn boxed_commands_keep_their_kind() {
        let boxed: Box<dyn Command> = Box::new(Counter::new(Rc::new(Cell::new(0)), 1));
        let c = CommandInstance::new(boxed);
        assert_eq!(c.kind(), "Counter");
        assert!(c.is_undoable());
    }

    #[test]
    fn ids_are_unique() {
        let a = CommandInstance::new(Plain);
        let b = CommandInstance::new(Plain);
        assert_ne!(a.id(), b.id());
    }
}
