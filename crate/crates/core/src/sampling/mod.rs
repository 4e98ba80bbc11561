//! Randomness substrate: hashing, ℓ0-samplers and bucketed edge samplers.

pub mod hash;
pub mod l0;

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

pub use hash::{HashFamily, HashMode};
pub use l0::{L0Output, L0Sampler, SamplerKind};

/// Independent stream of seeds: `derive_seed(s, tag, i)` for distinct `(tag, i)`.
pub fn derive_seed(seed: u64, tag: u64, index: u64) -> u64 {
    hash::mix64(hash::mix64(seed ^ tag.wrapping_mul(0xa076_1d64_78bd_642f)).wrapping_add(index))
}

/// Shared construction options for bucketed samplers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerOptions {
    pub kind: SamplerKind,
    pub hash_mode: HashMode,
    /// Independence degree requested from the bucket hash.
    pub independence: usize,
    /// Upper bound on keys, used to size sketch levels.
    pub universe: u64,
}

impl SamplerOptions {
    pub fn new(universe: u64) -> Self {
        Self {
            kind: SamplerKind::Reference,
            hash_mode: HashMode::Auto,
            independence: 2,
            universe,
        }
    }
}

/// Histogram `support size -> number of buckets`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Occupancy {
    pub buckets: usize,
    pub histogram: BTreeMap<usize, usize>,
}

impl Occupancy {
    fn from_sizes(sizes: impl Iterator<Item = usize>) -> Self {
        let mut occ = Occupancy::default();
        for s in sizes {
            occ.buckets += 1;
            *occ.histogram.entry(s).or_default() += 1;
        }
        occ
    }
}

/// Edges entering or leaving a sampled set after one update.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SetDelta {
    pub added: Vec<u64>,
    pub removed: Vec<u64>,
}

impl SetDelta {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty()
    }

    pub fn clear(&mut self) {
        self.added.clear();
        self.removed.clear();
    }
}

/// `w` buckets of `r` independent ℓ0-samplers; `F` is the set of all emitted keys.
#[derive(Debug, Clone)]
pub struct SparseRecoverer {
    hash: HashFamily,
    per_bucket: usize,
    samplers: Vec<L0Sampler>,
    outputs: Vec<L0Output>,
    /// how many samplers currently emit each key
    emitted: HashMap<u64, u32>,
    failing: usize,
    touched: Vec<(u64, bool)>,
}

impl SparseRecoverer {
    pub fn new(buckets: usize, per_bucket: usize, options: SamplerOptions, seed: u64) -> Self {
        let buckets = buckets.max(1);
        let per_bucket = per_bucket.max(1);
        let hash = HashFamily::new(options.independence, buckets as u64, derive_seed(seed, 1, 0), options.hash_mode);
        let samplers = (0..buckets * per_bucket)
            .map(|i| L0Sampler::new(options.kind, derive_seed(seed, 2, i as u64), options.universe))
            .collect();
        Self {
            hash,
            per_bucket,
            samplers,
            outputs: vec![L0Output::Empty; buckets * per_bucket],
            emitted: HashMap::new(),
            failing: 0,
            touched: Vec::new(),
        }
    }

    pub fn buckets(&self) -> usize {
        self.samplers.len() / self.per_bucket
    }

    pub fn per_bucket(&self) -> usize {
        self.per_bucket
    }

    pub fn sampler_count(&self) -> usize {
        self.samplers.len()
    }

    /// Samplers whose last emission was `Fail`.
    pub fn failing(&self) -> usize {
        self.failing
    }

    pub fn contains(&self, key: u64) -> bool {
        self.emitted.contains_key(&key)
    }

    pub fn len(&self) -> usize {
        self.emitted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.emitted.is_empty()
    }

    /// Current `F`, sorted.
    pub fn snapshot(&self) -> Vec<u64> {
        let mut keys: Vec<u64> = self.emitted.keys().copied().collect();
        keys.sort_unstable();
        keys
    }

    fn bump(&mut self, key: u64, by: i32) {
        let before = self.emitted.contains_key(&key);
        let c = self.emitted.entry(key).or_insert(0);
        *c = (*c as i32 + by) as u32;
        if *c == 0 {
            self.emitted.remove(&key);
        }
        if !self.touched.iter().any(|&(k, _)| k == key) {
            self.touched.push((key, before));
        }
    }

    /// Applies `delta` to `key`, writing the resulting change of `F` into `out`.
    pub fn update(&mut self, key: u64, delta: i64, out: &mut SetDelta) {
        out.clear();
        let b = self.hash.eval(key) as usize;
        self.touched.clear();
        for i in b * self.per_bucket..(b + 1) * self.per_bucket {
            self.samplers[i].update(key, delta);
            let new = self.samplers[i].emit();
            let old = std::mem::replace(&mut self.outputs[i], new);
            if old == new {
                continue;
            }
            self.failing = self.failing + (new == L0Output::Fail) as usize - (old == L0Output::Fail) as usize;
            if let L0Output::Key(k) = old {
                self.bump(k, -1);
            }
            if let L0Output::Key(k) = new {
                self.bump(k, 1);
            }
        }
        for &(k, before) in &self.touched {
            match (before, self.emitted.contains_key(&k)) {
                (false, true) => out.added.push(k),
                (true, false) => out.removed.push(k),
                _ => {}
            }
        }
    }

    pub fn occupancy(&self) -> Occupancy {
        Occupancy::from_sizes(self.samplers.iter().step_by(self.per_bucket).map(L0Sampler::support_size))
    }
}

/// One emitted position changing: bucket `bucket` went from `old` to `new`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleChange {
    pub bucket: usize,
    pub old: Option<u64>,
    pub new: Option<u64>,
}

/// `s` buckets with one ℓ0-sampler each; `S` is the set of bucket samples.
#[derive(Debug, Clone)]
pub struct DenseSampler {
    hash: HashFamily,
    samplers: Vec<L0Sampler>,
    outputs: Vec<L0Output>,
    failing: usize,
}

impl DenseSampler {
    pub fn new(buckets: usize, options: SamplerOptions, seed: u64) -> Self {
        let buckets = buckets.max(1);
        let hash = HashFamily::new(options.independence, buckets as u64, derive_seed(seed, 3, 0), options.hash_mode);
        Self {
            hash,
            samplers: (0..buckets)
                .map(|i| L0Sampler::new(options.kind, derive_seed(seed, 4, i as u64), options.universe))
                .collect(),
            outputs: vec![L0Output::Empty; buckets],
            failing: 0,
        }
    }

    pub fn buckets(&self) -> usize {
        self.samplers.len()
    }

    pub fn bucket_of(&self, key: u64) -> usize {
        self.hash.eval(key) as usize
    }

    pub fn failing(&self) -> usize {
        self.failing
    }

    /// Routes the update to its bucket; reports the change of that bucket's sample.
    pub fn update(&mut self, key: u64, delta: i64) -> Option<SampleChange> {
        let b = self.bucket_of(key);
        self.samplers[b].update(key, delta);
        let new = self.samplers[b].emit();
        let old = std::mem::replace(&mut self.outputs[b], new);
        if old == new {
            return None;
        }
        self.failing = self.failing + (new == L0Output::Fail) as usize - (old == L0Output::Fail) as usize;
        Some(SampleChange {
            bucket: b,
            old: old.key(),
            new: new.key(),
        })
    }

    pub fn sample(&self, bucket: usize) -> Option<u64> {
        self.outputs[bucket].key()
    }

    /// Current `S`, in bucket order.
    pub fn snapshot(&self) -> Vec<u64> {
        self.outputs.iter().filter_map(|o| o.key()).collect()
    }

    pub fn occupancy(&self) -> Occupancy {
        Occupancy::from_sizes(self.samplers.iter().map(L0Sampler::support_size))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::edge_key;

    fn opts() -> SamplerOptions {
        SamplerOptions::new(1 << 20)
    }

    #[test]
    fn sparse_recovers_small_sets() {
        let mut ok = 0;
        let mut delta = SetDelta::default();
        for seed in 0..100 {
            let mut r = SparseRecoverer::new(200, 10, opts(), seed);
            let keys: Vec<u64> = (0..50u64).map(|i| i * 7919 + 3).collect();
            for &k in &keys {
                r.update(k, 1, &mut delta);
            }
            let f = r.snapshot();
            assert!(f.iter().all(|k| keys.contains(k)));
            if f.len() == keys.len() {
                ok += 1;
            }
        }
        assert!(ok >= 95, "{ok}");
        let r = SparseRecoverer::new(10, 2, opts(), 0);
        assert!(r.snapshot().is_empty());
    }

    #[test]
    fn sparse_delta_tracks_snapshot() {
        let mut r = SparseRecoverer::new(8, 3, opts(), 5);
        let mut mirror = std::collections::BTreeSet::new();
        let mut delta = SetDelta::default();
        for step in 0..400u64 {
            let key = step % 37;
            let d = if (step / 37) % 2 == 0 { 1 } else { -1 };
            r.update(key, d, &mut delta);
            for k in &delta.removed {
                assert!(mirror.remove(k));
            }
            for k in &delta.added {
                assert!(mirror.insert(*k));
            }
            assert_eq!(mirror.iter().copied().collect::<Vec<_>>(), r.snapshot());
        }
    }

    #[test]
    fn single_edge_always_sampled() {
        for seed in 0..50 {
            let mut d = DenseSampler::new(4, opts(), seed);
            d.update(edge_key(0, 1, 10), 1);
            assert_eq!(d.snapshot(), vec![edge_key(0, 1, 10)]);
        }
        assert!(DenseSampler::new(4, opts(), 0).snapshot().is_empty());
    }

    #[test]
    fn one_update_changes_one_bucket() {
        let mut d = DenseSampler::new(16, opts(), 3);
        for k in 0..200u64 {
            let before = d.snapshot();
            let change = d.update(k, 1);
            let after = d.snapshot();
            let diff = before.iter().filter(|x| !after.contains(x)).count() + after.iter().filter(|x| !before.contains(x)).count();
            assert!(diff <= 2);
            assert_eq!(diff > 0, change.is_some());
        }
        let occ = d.occupancy();
        assert_eq!(occ.buckets, 16);
        assert_eq!(occ.histogram.iter().map(|(s, c)| s * c).sum::<usize>(), 200);
    }
}
