//! Name-keyed registry of strategy objects.

use crate::error::{Error, Result};
use std::sync::Arc;

/// An ordered set of named strategies sharing one trait.
pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: Vec<(&'static str, Arc<T>)>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Registry {
            kind,
            entries: Vec::new(),
        }
    }

    /// Adds a strategy; a later registration under the same name replaces the earlier one.
    pub fn register(&mut self, name: &'static str, item: Arc<T>) -> &mut Self {
        if let Some(slot) = self.entries.iter_mut().find(|(n, _)| *n == name) {
            slot.1 = item;
        } else {
            self.entries.push((name, item));
        }
        self
    }

    pub fn get(&self, name: &str) -> Result<Arc<T>> {
        let key = name.trim();
        self.entries
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(key))
            .map(|(_, item)| item.clone())
            .ok_or_else(|| Error::Unknown {
                kind: self.kind,
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }
}
