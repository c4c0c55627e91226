//! Linear undo/redo stacks.

use std::collections::VecDeque;

pub const DEFAULT_CAPACITY: usize = 20;

/// Two stacks with a bounded undo side. The oldest entry is evicted when the
/// capacity is exceeded.
#[derive(Debug, Clone)]
pub struct History<T> {
    undos: VecDeque<T>,
    redos: Vec<T>,
    capacity: usize,
}

impl<T> Default for History<T> {
    fn default() -> Self {
        History::new(DEFAULT_CAPACITY)
    }
}

impl<T> History<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "history capacity must be positive");
        History { undos: VecDeque::new(), redos: Vec::new(), capacity }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Pushes an entry and clears the redo stack. Returns the evicted entry.
    pub fn add(&mut self, entry: T) -> Option<T> {
        self.redos.clear();
        self.undos.push_back(entry);
        if self.undos.len() > self.capacity {
            self.undos.pop_front()
        } else {
            None
        }
    }

    /// Moves the last undoable entry to the redo stack.
    pub fn undo(&mut self) -> Option<&mut T> {
        let e = self.undos.pop_back()?;
        self.redos.push(e);
        self.redos.last_mut()
    }

    /// Moves the last redoable entry back to the undo stack.
    pub fn redo(&mut self) -> Option<&mut T> {
        let e = self.redos.pop()?;
        self.undos.push_back(e);
        self.undos.back_mut()
    }

    /// Oldest first.
    pub fn undos(&self) -> impl Iterator<Item = &T> {
        self.undos.iter()
    }

    /// Oldest first; the next redo is the last one.
    pub fn redos(&self) -> impl Iterator<Item = &T> {
        self.redos.iter()
    }

    pub fn last_undo(&self) -> Option<&T> {
        self.undos.back()
    }

    pub fn last_redo(&self) -> Option<&T> {
        self.redos.last()
    }

    pub fn clear(&mut self) {
        self.undos.clear();
        self.redos.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn contents(h: &History<char>) -> (String, String) {
        (h.undos().collect(), h.redos().collect())
    }

    #[test]
    fn stack_discipline() {
        let mut h = History::new(20);
        h.add('A');
        h.add('B');
        assert_eq!(h.undo().copied(), Some('B'));
        assert_eq!(h.undo().copied(), Some('A'));
        assert_eq!(h.redo().copied(), Some('A'));
        assert_eq!(contents(&h), ("A".into(), "B".into()));
        assert_eq!(h.redo().copied(), Some('B'));
        assert_eq!(contents(&h), ("AB".into(), "".into()));
    }

    #[test]
    fn add_clears_redos() {
        let mut h = History::new(20);
        h.add('A');
        h.undo();
        h.add('B');
        assert_eq!(contents(&h), ("B".into(), "".into()));
    }

    #[test]
    fn empty_ops() {
        let mut h: History<char> = History::default();
        assert!(h.undo().is_none());
        assert!(h.redo().is_none());
        assert_eq!(h.capacity(), 20);
    }

    #[test]
    fn eviction() {
        let mut h = History::new(2);
        assert_eq!(h.add(1), None);
        assert_eq!(h.add(2), None);
        assert_eq!(h.add(3), Some(1));
        assert_eq!(h.undos().copied().collect::<Vec<_>>(), vec![2, 3]);
    }
}
