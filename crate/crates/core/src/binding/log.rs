//! Binding log records and sinks.

use std::cell::RefCell;
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::event::Millis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogLevel {
    Interaction,
    Binding,
    Cmd,
}

impl LogLevel {
    pub const ALL: [LogLevel; 3] = [LogLevel::Interaction, LogLevel::Binding, LogLevel::Cmd];

    pub fn as_str(self) -> &'static str {
        match self {
            LogLevel::Interaction => "interaction",
            LogLevel::Binding => "binding",
            LogLevel::Cmd => "cmd",
        }
    }
}

impl FromStr for LogLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LogLevel::ALL.into_iter().find(|l| l.as_str() == s).ok_or_else(|| format!("unknown log level `{s}`"))
    }
}

#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct LogLevels(u8);

impl LogLevels {
    pub const NONE: LogLevels = LogLevels(0);
    pub const ALL: LogLevels = LogLevels(0b111);

    pub fn with(mut self, l: LogLevel) -> Self {
        self.0 |= 1 << l as u8;
        self
    }

    pub fn contains(self, l: LogLevel) -> bool {
        self.0 & (1 << l as u8) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = LogLevel> {
        LogLevel::ALL.into_iter().filter(move |l| self.contains(*l))
    }
}

impl FromIterator<LogLevel> for LogLevels {
    fn from_iter<T: IntoIterator<Item = LogLevel>>(iter: T) -> Self {
        iter.into_iter().fold(LogLevels::NONE, LogLevels::with)
    }
}

impl From<LogLevel> for LogLevels {
    fn from(l: LogLevel) -> Self {
        LogLevels::NONE.with(l)
    }
}

impl fmt::Debug for LogLevels {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogRecord {
    pub level: LogLevel,
    pub t: Millis,
    pub msg: String,
    pub binding: String,
}

pub trait LogSink {
    fn record(&mut self, record: LogRecord);
}

impl<F: FnMut(LogRecord)> LogSink for F {
    fn record(&mut self, record: LogRecord) {
        self(record)
    }
}

/// Writes one JSON object per record to standard error.
#[derive(Debug, Default, Clone, Copy)]
pub struct StderrSink;

impl LogSink for StderrSink {
    fn record(&mut self, record: LogRecord) {
        eprintln!("{}", serde_json::to_string(&record).expect("log records serialize"));
    }
}

/// Keeps records in memory; clones share the same buffer.
#[derive(Debug, Default, Clone)]
pub struct MemorySink(Rc<RefCell<Vec<LogRecord>>>);

impl MemorySink {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn records(&self) -> Vec<LogRecord> {
        self.0.borrow().clone()
    }

    pub fn clear(&self) {
        self.0.borrow_mut().clear();
    }
}

impl LogSink for MemorySink {
    fn record(&mut self, record: LogRecord) {
        self.0.borrow_mut().push(record);
    }
}
