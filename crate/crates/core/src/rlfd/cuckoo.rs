//! Bottom-level table: one slot per flow, three candidate slots per key.

use rand::Rng;

use crate::hash::KeyedHash;

pub const HASHES: usize = 3;
pub const MAX_DISPLACEMENTS: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Entry {
    pub key: u64,
    pub bytes: u64,
    pub reported: bool,
}

#[derive(Clone, Debug)]
pub struct CuckooTable {
    slots: Vec<Option<Entry>>,
    hash: KeyedHash,
    len: usize,
    failures: u64,
}

impl CuckooTable {
    pub fn new(capacity: usize, hash: KeyedHash) -> Self {
        CuckooTable { slots: vec![None; capacity], hash, len: 0, failures: 0 }
    }

    pub fn capacity(&self) -> usize {
        self.slots.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Insertions abandoned since the last `reset`.
    pub fn failures(&self) -> u64 {
        self.failures
    }

    /// Empties the table and installs a new hash key.
    pub fn reset(&mut self, hash: KeyedHash) {
        self.slots.iter_mut().for_each(|s| *s = None);
        self.hash = hash;
        self.len = 0;
        self.failures = 0;
    }

    fn candidates(&self, key: u64) -> [usize; HASHES] {
        let h = self.hash.hash(key);
        let n = self.slots.len() as u64;
        let mut out = [0; HASHES];
        for (j, c) in out.iter_mut().enumerate() {
            let chunk = (h >> (21 * j)) & 0x1f_ffff;
            *c = ((chunk * n) >> 21) as usize;
        }
        out
    }

    pub fn find(&self, key: u64) -> Option<usize> {
        self.candidates(key)
            .into_iter()
            .find(|&i| matches!(self.slots[i], Some(e) if e.key == key))
    }

    pub fn get_mut(&mut self, slot: usize) -> &mut Entry {
        self.slots[slot].as_mut().expect("slot occupied")
    }

    /// Places `key` with a zero count. Gives up after `MAX_DISPLACEMENTS`
    /// kicks and restores the table, so resident counts are never lost.
    pub fn insert(&mut self, key: u64, rng: &mut impl Rng) -> Option<usize> {
        if let Some(i) = self.candidates(key).into_iter().find(|&i| self.slots[i].is_none()) {
            self.slots[i] = Some(Entry { key, bytes: 0, reported: false });
            self.len += 1;
            return Some(i);
        }
        if self.len == self.slots.len() {
            self.failures += 1;
            return None;
        }
        let mut homeless = Entry { key, bytes: 0, reported: false };
        let mut path: Vec<usize> = Vec::new();
        let mut prev = usize::MAX;
        for _ in 0..MAX_DISPLACEMENTS {
            let cands = self.candidates(homeless.key);
            if let Some(i) = cands.into_iter().find(|&i| self.slots[i].is_none()) {
                self.slots[i] = Some(homeless);
                self.len += 1;
                // later kicks may have moved the newcomer again
                return self.find(key);
            }
            let mut victim = cands[rng.random_range(0..HASHES)];
            if victim == prev && cands.iter().any(|&c| c != prev) {
                while victim == prev {
                    victim = cands[rng.random_range(0..HASHES)];
                }
            }
            let evicted = self.slots[victim].replace(homeless).expect("candidate slot full");
            homeless = evicted;
            path.push(victim);
            prev = victim;
        }
        for &slot in path.iter().rev() {
            homeless = self.slots[slot].replace(homeless).expect("path slot full");
        }
        debug_assert_eq!(homeless.key, key);
        self.failures += 1;
        None
    }

    pub fn entries(&self) -> impl Iterator<Item = &Entry> {
        self.slots.iter().flatten()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::rng_from_seed;

    #[test]
    fn insert_find_and_count() {
        let mut rng = rng_from_seed(1);
        let mut t = CuckooTable::new(8, KeyedHash::new(3, 4));
        let s = t.insert(42, &mut rng).unwrap();
        t.get_mut(s).bytes += 100;
        assert_eq!(t.find(42), Some(s));
        assert_eq!(t.find(43), None);
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn failed_insert_preserves_contents() {
        let mut rng = rng_from_seed(2);
        let mut t = CuckooTable::new(16, KeyedHash::new(5, 6));
        let mut placed = Vec::new();
        for k in 0..64u64 {
            if let Some(s) = t.insert(k, &mut rng) {
                t.get_mut(s).bytes = k + 1;
                placed.push(k);
            }
        }
        assert_eq!(t.len(), 16.min(placed.len()));
        for k in placed {
            let s = t.find(k).expect("resident key survives failed inserts");
            assert_eq!(t.get_mut(s).bytes, k + 1);
        }
        assert!(t.failures() > 0);
    }
}
