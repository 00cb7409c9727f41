//! String interning with stable, insertion-ordered ids.

use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};

/// FNV-1a, deterministic and fast on short feature strings.
#[derive(Clone)]
pub struct FnvHasher(u64);

impl Default for FnvHasher {
    fn default() -> Self {
        FnvHasher(0xcbf2_9ce4_8422_2325)
    }
}

impl Hasher for FnvHasher {
    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

type FnvMap<K, V> = HashMap<K, V, BuildHasherDefault<FnvHasher>>;

/// A bidirectional string ↔ id map with a freeze flag.
///
/// Ids are assigned in first-seen order, so two runs that intern the same
/// strings in the same order produce identical ids. Once frozen, lookups of
/// unseen strings return `None` instead of growing the map.
#[derive(Debug, Clone, Default)]
pub struct Alphabet {
    by_name: FnvMap<String, u32>,
    names: Vec<String>,
    frozen: bool,
}

impl Alphabet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of interned strings.
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Returns the id of `name`, interning it if absent and not frozen.
    /// Returns `None` only when frozen and absent.
    pub fn intern(&mut self, name: &str) -> Option<u32> {
        if let Some(&id) = self.by_name.get(name) {
            return Some(id);
        }
        if self.frozen {
            return None;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_string());
        self.by_name.insert(name.to_string(), id);
        Some(id)
    }

    /// Lookup without interning.
    pub fn get(&self, name: &str) -> Option<u32> {
        self.by_name.get(name).copied()
    }

    /// The string for `id`. Panics if `id` was never assigned.
    pub fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    /// All interned strings in id order.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }
}
