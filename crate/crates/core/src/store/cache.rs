use std::hash::Hash;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex};

use lru::LruCache;

/// Cumulative cache counters. Subtracting two snapshots gives the activity in between.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    pub evictions: u64,
    pub disk_reads: u64,
    pub bytes_read: u64,
}

impl std::ops::Sub for CacheStats {
    type Output = CacheStats;

    fn sub(self, rhs: CacheStats) -> CacheStats {
        CacheStats {
            hits: self.hits - rhs.hits,
            misses: self.misses - rhs.misses,
            evictions: self.evictions - rhs.evictions,
            disk_reads: self.disk_reads - rhs.disk_reads,
            bytes_read: self.bytes_read - rhs.bytes_read,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FetchOutcome {
    Hit,
    /// Read from disk, with the number of bytes read.
    Miss(u64),
}

struct Inner<K: Hash + Eq, V> {
    lru: Option<LruCache<K, Arc<V>>>,
    stats: CacheStats,
}

/// Slot-bounded LRU cache of decoded slices. Capacity 0 disables caching.
///
/// The lock is held only around bookkeeping; loads run unlocked, so two
/// threads missing on the same key may both read it.
pub struct SliceCache<K: Hash + Eq, V> {
    capacity: usize,
    inner: Mutex<Inner<K, V>>,
}

impl<K: Hash + Eq + Clone, V> SliceCache<K, V> {
    pub fn new(capacity: usize) -> Self {
        let lru = NonZeroUsize::new(capacity).map(LruCache::new);
        Self { capacity, inner: Mutex::new(Inner { lru, stats: CacheStats::default() }) }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap().lru.as_ref().map_or(0, LruCache::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stats(&self) -> CacheStats {
        self.inner.lock().unwrap().stats
    }

    pub fn contains(&self, key: &K) -> bool {
        self.inner.lock().unwrap().lru.as_ref().is_some_and(|l| l.contains(key))
    }

    /// Keys from most to least recently used.
    pub fn keys(&self) -> Vec<K> {
        self.inner.lock().unwrap().lru.as_ref().map_or_else(Vec::new, |l| l.iter().map(|(k, _)| k.clone()).collect())
    }

    /// Returns the cached value or calls `load`, which yields the value and its size on disk.
    pub fn fetch<E>(&self, key: &K, load: impl FnOnce() -> Result<(V, u64), E>) -> Result<(Arc<V>, FetchOutcome), E> {
        {
            let mut g = self.inner.lock().unwrap();
            if let Some(v) = g.lru.as_mut().and_then(|l| l.get(key)).cloned() {
                g.stats.hits += 1;
                return Ok((v, FetchOutcome::Hit));
            }
        }
        let (v, bytes) = load()?;
        let v = Arc::new(v);
        let mut g = self.inner.lock().unwrap();
        g.stats.misses += 1;
        g.stats.disk_reads += 1;
        g.stats.bytes_read += bytes;
        if let Some(lru) = g.lru.as_mut() {
            if !lru.contains(key) && lru.push(key.clone(), v.clone()).is_some() {
                g.stats.evictions += 1;
            }
        }
        Ok((v, FetchOutcome::Miss(bytes)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn access(c: &SliceCache<char, char>, k: char) -> FetchOutcome {
        c.fetch::<()>(&k, || Ok((k, 1))).unwrap().1
    }

    #[test]
    fn textbook_trace() {
        let c = SliceCache::new(2);
        for k in ['A', 'B', 'A', 'C'] {
            access(&c, k);
        }
        assert!(!c.contains(&'B'));
        assert_eq!(c.keys(), vec!['C', 'A']);
        assert_eq!(access(&c, 'B'), FetchOutcome::Miss(1));
        let s = c.stats();
        assert_eq!((s.hits, s.misses, s.evictions, s.disk_reads), (1, 4, 2, 4));
    }

    #[test]
    fn zero_capacity_reads_every_time() {
        let c = SliceCache::new(0);
        for _ in 0..5 {
            assert_eq!(access(&c, 'x'), FetchOutcome::Miss(1));
        }
        assert_eq!(c.stats().disk_reads, 5);
        assert!(c.is_empty());
    }

    #[test]
    fn load_error_counts_nothing() {
        let c: SliceCache<u8, u8> = SliceCache::new(1);
        assert!(c.fetch(&1, || Err("gone")).is_err());
        assert_eq!(c.stats(), CacheStats::default());
    }

    proptest! {
        #[test]
        fn never_exceeds_capacity(cap in 0usize..5, trace in proptest::collection::vec(0u8..8, 0..60)) {
            let c: SliceCache<u8, u8> = SliceCache::new(cap);
            for k in trace {
                c.fetch::<()>(&k, || Ok((k, 1))).unwrap();
                prop_assert!(c.len() <= cap);
            }
        }
    }
}
