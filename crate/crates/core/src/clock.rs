//! Deterministic virtual time.
//!
//! Nothing in the crate reads the wall clock. Timeouts are registered on a
//! [`VirtualClock`] and fire when the clock is advanced past their deadline.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::event::Millis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("clock cannot rewind from {now} to {requested}")]
pub struct ClockError {
    pub now: Millis,
    pub requested: Millis,
}

/// Handle to a scheduled timeout, usable to cancel it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TimerId(u64);

/// A monotone clock with pending timeouts.
///
/// Timeouts fire in deadline order; ties fire in registration order. The
/// boundary is inclusive: a timeout with deadline `d` fires on `advance_to(d)`.
#[derive(Debug, Clone)]
pub struct VirtualClock<T> {
    now: Millis,
    next_seq: u64,
    pending: BTreeMap<(Millis, u64), T>,
}

impl<T> Default for VirtualClock<T> {
    fn default() -> Self {
        VirtualClock { now: 0, next_seq: 0, pending: BTreeMap::new() }
    }
}

impl<T> VirtualClock<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn starting_at(now: Millis) -> Self {
        VirtualClock { now, ..Self::default() }
    }

    pub fn now(&self) -> Millis {
        self.now
    }

    pub fn schedule(&mut self, deadline: Millis, token: T) -> TimerId {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.pending.insert((deadline, seq), token);
        TimerId(seq)
    }

    pub fn cancel(&mut self, id: TimerId) -> Option<T> {
        let key = *self.pending.keys().find(|(_, seq)| *seq == id.0)?;
        self.pending.remove(&key)
    }

    pub fn next_deadline(&self) -> Option<Millis> {
        self.pending.keys().next().map(|(d, _)| *d)
    }

    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }

    /// Removes and returns the earliest timeout due at or before `to`,
    /// without moving `now`.
    pub(crate) fn pop_due(&mut self, to: Millis) -> Option<(Millis, T)> {
        let (&(deadline, seq), _) = self.pending.first_key_value()?;
        if deadline > to {
            return None;
        }
        let token = self.pending.remove(&(deadline, seq))?;
        Some((deadline, token))
    }

    /// Moves the clock forward. Used by drivers that fire timeouts one by one
    /// through [`VirtualClock::pop_due`].
    pub(crate) fn set_now(&mut self, to: Millis) -> Result<(), ClockError> {
        if to < self.now {
            return Err(ClockError { now: self.now, requested: to });
        }
        self.now = to;
        Ok(())
    }

    /// Advances to `to`, returning every timeout with a deadline `<= to`.
    pub fn advance_to(&mut self, to: Millis) -> Result<Vec<T>, ClockError> {
        if to < self.now {
            return Err(ClockError { now: self.now, requested: to });
        }
        let mut fired = Vec::new();
        while let Some((_, token)) = self.pop_due(to) {
            fired.push(token);
        }
        self.now = to;
        Ok(fired)
    }
}
