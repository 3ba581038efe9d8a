//! Ordered key-value storage for the index components.
//!
//! Keys are two `u32` parts packed big-endian into eight bytes, so byte order
//! equals `(first, second)` order and a range scan from `(a, lo)` to `(a, hi)`
//! visits exactly the keys with first part `a` and second part in `lo..=hi`.
//! Values are sorted, duplicate-free `u32` lists.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Key([u8; 8]);

impl Key {
    pub fn new(first: u32, second: u32) -> Self {
        let mut b = [0u8; 8];
        b[..4].copy_from_slice(&first.to_be_bytes());
        b[4..].copy_from_slice(&second.to_be_bytes());
        Key(b)
    }

    pub fn from_bytes(bytes: [u8; 8]) -> Self {
        Key(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 8] {
        &self.0
    }

    pub fn first(&self) -> u32 {
        u32::from_be_bytes(self.0[..4].try_into().unwrap())
    }

    pub fn second(&self) -> u32 {
        u32::from_be_bytes(self.0[4..].try_into().unwrap())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OrderedKv {
    map: BTreeMap<Key, Vec<u32>>,
}

impl OrderedKv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, key: Key) -> Option<&[u32]> {
        self.map.get(&key).map(Vec::as_slice)
    }

    /// Inserts `value` into the list under `key`, keeping it sorted.
    pub fn insert_value(&mut self, key: Key, value: u32) {
        let list = self.map.entry(key).or_default();
        match list.last() {
            Some(&last) if last < value => list.push(value),
            None => list.push(value),
            _ => {
                if let Err(pos) = list.binary_search(&value) {
                    list.insert(pos, value);
                }
            }
        }
    }

    /// Removes `value` from the list under `key`, dropping empty entries.
    pub fn remove_value(&mut self, key: Key, value: u32) -> bool {
        let Some(list) = self.map.get_mut(&key) else {
            return false;
        };
        let Ok(pos) = list.binary_search(&value) else {
            return false;
        };
        list.remove(pos);
        if list.is_empty() {
            self.map.remove(&key);
        }
        true
    }

    pub(crate) fn put_list(&mut self, key: Key, list: Vec<u32>) {
        debug_assert!(list.windows(2).all(|w| w[0] < w[1]));
        if !list.is_empty() {
            self.map.insert(key, list);
        }
    }

    /// Keys with first part `first` and second part in `seconds`, ascending.
    pub fn scan(
        &self,
        first: u32,
        seconds: RangeInclusive<u32>,
    ) -> impl DoubleEndedIterator<Item = (Key, &[u32])> + '_ {
        let lo = Key::new(first, *seconds.start());
        let hi = Key::new(first, *seconds.end());
        self.map.range(lo..=hi).map(|(k, v)| (*k, v.as_slice()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Key, &[u32])> + '_ {
        self.map.iter().map(|(k, v)| (*k, v.as_slice()))
    }
}
