//! Toolkit-agnostic user interaction processing.

pub mod binder;
pub mod binding;
pub mod clock;
pub mod command;
pub mod event;
pub mod fsm;
pub mod interaction;
pub mod testkit;
pub mod trace;
pub mod demo;
pub mod replay;
