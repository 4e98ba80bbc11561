//! ℓ0-samplers over a set maintained by insertions and deletions.
//!
//! Both variants emit the same kind of sample: the support element with the
//! smallest seeded priority. The sample is uniform over the support and only
//! changes when the support does.

use super::hash::{keyed_mix, mix64, pow_mod, MERSENNE_61};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum L0Output {
    Key(u64),
    Empty,
    Fail,
}

impl L0Output {
    pub fn key(self) -> Option<u64> {
        match self {
            L0Output::Key(k) => Some(k),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplerKind {
    /// Stores the support explicitly.
    #[default]
    Reference,
    /// Small-space sketch of 1-sparse recovery cells.
    Sketch,
}

impl std::str::FromStr for SamplerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reference" => Ok(Self::Reference),
            "sketch" => Ok(Self::Sketch),
            other => Err(format!("unknown sampler kind {other:?}")),
        }
    }
}

/// Exact sampler: keeps `(priority, key)` pairs ordered by priority.
///
/// A sorted vector, since bucketed use keeps supports to a handful of keys.
#[derive(Debug, Clone)]
pub struct ReferenceL0 {
    seed: u64,
    support: Vec<(u64, u64)>,
}

impl ReferenceL0 {
    pub fn new(seed: u64) -> Self {
        Self {
            seed: mix64(seed),
            support: Vec::new(),
        }
    }

    pub fn update(&mut self, key: u64, delta: i64) {
        let entry = (keyed_mix(key, self.seed), key);
        match (self.support.binary_search(&entry), delta > 0) {
            (Err(i), true) => self.support.insert(i, entry),
            (Ok(i), false) => {
                self.support.remove(i);
            }
            _ => {}
        }
    }

    pub fn emit(&self) -> L0Output {
        self.support.first().map_or(L0Output::Empty, |&(_, k)| L0Output::Key(k))
    }

    pub fn support_size(&self) -> usize {
        self.support.len()
    }
}

/// A 1-sparse recovery cell: `(count, Σ key, Σ z^key mod p)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Cell {
    count: i64,
    keysum: i128,
    fingerprint: u64,
}

impl Cell {
    fn add(&mut self, key: u64, delta: i64, term: u64) {
        self.count += delta;
        self.keysum += delta as i128 * key as i128;
        self.fingerprint = if delta > 0 {
            (self.fingerprint + term) % MERSENNE_61
        } else {
            (self.fingerprint + MERSENNE_61 - term) % MERSENNE_61
        };
    }

    fn is_zero(&self) -> bool {
        self.count == 0 && self.keysum == 0 && self.fingerprint == 0
    }

    /// The single key held by the cell, if the cell passes the 1-sparse test.
    fn recover(&self, z: u64) -> Option<u64> {
        if self.count != 1 || self.keysum < 0 || self.keysum >= MERSENNE_61 as i128 {
            return None;
        }
        let key = self.keysum as u64;
        (pow_mod(z, key) == self.fingerprint).then_some(key)
    }
}

/// Sketch sampler with independent repetitions.
///
/// In each repetition a key gets level `j` with probability `2^{-(j+1)}` (trailing
/// zeros of a keyed hash), and cell `j` aggregates keys of level exactly `j`; the
/// nested sub-sample "level `>= j`" is the suffix of cells from `j` up. A repetition
/// succeeds when its deepest nonzero cell is 1-sparse, and that key is emitted.
/// Repetitions are tried in order, so the output depends only on the support.
#[derive(Debug, Clone)]
pub struct SketchL0 {
    z: u64,
    seeds: Vec<u64>,
    cells: Vec<Vec<Cell>>,
    max_level: usize,
}

pub const DEFAULT_REPETITIONS: usize = 8;

impl SketchL0 {
    /// `universe` bounds the keys; cells beyond `log2(universe) + 2` are merged.
    pub fn new(seed: u64, universe: u64, repetitions: usize) -> Self {
        let base = mix64(seed ^ 0x5ce7_c4ed);
        let z = 2 + mix64(base) % (MERSENNE_61 - 3);
        let seeds = (0..repetitions.max(1) as u64).map(|r| mix64(base.wrapping_add(r + 1))).collect::<Vec<_>>();
        let max_level = (64 - universe.max(2).leading_zeros()) as usize + 2;
        Self {
            z,
            cells: vec![Vec::new(); seeds.len()],
            seeds,
            max_level,
        }
    }

    fn level(&self, rep: usize, key: u64) -> usize {
        (keyed_mix(key, self.seeds[rep]).trailing_zeros() as usize).min(self.max_level)
    }

    pub fn update(&mut self, key: u64, delta: i64) {
        let term = pow_mod(self.z, key);
        for rep in 0..self.seeds.len() {
            let lvl = self.level(rep, key);
            let cells = &mut self.cells[rep];
            if cells.len() <= lvl {
                cells.resize(lvl + 1, Cell::default());
            }
            cells[lvl].add(key, delta, term);
            while cells.last().is_some_and(Cell::is_zero) {
                cells.pop();
            }
        }
    }

    pub fn emit(&self) -> L0Output {
        if self.cells[0].is_empty() {
            return L0Output::Empty;
        }
        for cells in &self.cells {
            if let Some(key) = cells.last().and_then(|c| c.recover(self.z)) {
                return L0Output::Key(key);
            }
        }
        L0Output::Fail
    }

    /// Exact under set semantics: cell counts add up to the support size.
    pub fn support_size(&self) -> usize {
        self.cells[0].iter().map(|c| c.count).sum::<i64>().max(0) as usize
    }

    /// Number of cells currently allocated, summed over repetitions.
    pub fn cells_in_use(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone)]
pub enum L0Sampler {
    Reference(ReferenceL0),
    Sketch(SketchL0),
}

impl L0Sampler {
    pub fn new(kind: SamplerKind, seed: u64, universe: u64) -> Self {
        match kind {
            SamplerKind::Reference => L0Sampler::Reference(ReferenceL0::new(seed)),
            SamplerKind::Sketch => L0Sampler::Sketch(SketchL0::new(seed, universe, DEFAULT_REPETITIONS)),
        }
    }

    #[inline]
    pub fn update(&mut self, key: u64, delta: i64) {
        match self {
            L0Sampler::Reference(s) => s.update(key, delta),
            L0Sampler::Sketch(s) => s.update(key, delta),
        }
    }

    #[inline]
    pub fn emit(&self) -> L0Output {
        match self {
            L0Sampler::Reference(s) => s.emit(),
            L0Sampler::Sketch(s) => s.emit(),
        }
    }

    pub fn support_size(&self) -> usize {
        match self {
            L0Sampler::Reference(s) => s.support_size(),
            L0Sampler::Sketch(s) => s.support_size(),
        }
    }
}
