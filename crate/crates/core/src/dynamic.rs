//! Full-space dynamic engine.
//!
//! One (α, d_k, L)-decomposition is kept per rung of a geometric threshold ladder.
//! After every edge update each rung repairs itself by moving dirty nodes one level
//! at a time until none is left.
//!
//! Per rung, node `v` keeps lists `Friends_i[v]` for `i <= ℓ(v)`: neighbors at level
//! exactly `i` for `i < ℓ(v)`, and neighbors at level `>= ℓ(v)` for `i = ℓ(v)`. The lists
//! are intrusive: an undirected edge `e` owns half-edges `2e` (seen from its first
//! endpoint) and `2e + 1`, and the half-edge of `v` toward `w` always sits in list
//! `min(ℓ(v), ℓ(w))` of `v`. Moving a node therefore touches each entry once.

use std::collections::{HashMap, VecDeque};

use crate::decomposition::{level_count, Decomposition};
use crate::graph::{edge_key, DynamicGraph, GraphError, NodeId, UpdateEvent};
use crate::ledger::WorkLedger;
use crate::num::{ceil_log, Rational, Real};

const NIL: u32 = u32::MAX;

/// Geometric grid `d_k = (1+ε)^{k-1} π`, `k = 1..=K`, with `K = 2 + ceil(log_{1+ε}(σ/π))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdLadder<T> {
    pub pi: f64,
    pub sigma: f64,
    pub epsilon: f64,
    thresholds: Vec<T>,
}

impl<T: Real> ThresholdLadder<T> {
    pub fn new(pi: f64, sigma: f64, epsilon: f64) -> Self {
        let k = 2 + ceil_log(1.0 + epsilon, sigma / pi);
        Self::with_rungs(pi, sigma, epsilon, k)
    }

    pub fn with_rungs(pi: f64, sigma: f64, epsilon: f64, rungs: usize) -> Self {
        let thresholds = (0..rungs)
            .map(|k| T::of(pi * (1.0 + epsilon).powi(k as i32)))
            .collect();
        Self {
            pi,
            sigma,
            epsilon,
            thresholds,
        }
    }

    /// `π = 1/(4n)`, `σ = 4n`.
    pub fn full_space(n: usize, epsilon: f64) -> Self {
        let n = n.max(1) as f64;
        Self::new(1.0 / (4.0 * n), 4.0 * n, epsilon)
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    /// `d_k` for 1-based `k`.
    pub fn d(&self, k: usize) -> T {
        self.thresholds[k - 1]
    }

    pub fn thresholds(&self) -> &[T] {
        &self.thresholds
    }
}

/// `α = 2 + 3ε`.
pub fn default_alpha(epsilon: f64) -> f64 {
    2.0 + 3.0 * epsilon
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicConfig {
    pub epsilon: f64,
    /// `None` selects `2 + 3ε`.
    pub alpha: Option<f64>,
}

impl Default for DynamicConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            alpha: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Move {
    Up,
    Down,
}

/// Level state of one rung.
#[derive(Debug, Clone)]
struct Rung<T> {
    d: T,
    cut: T,
    top: u32,
    stride: usize,
    level: Vec<u32>,
    head: Vec<u32>,
    count: Vec<u32>,
    prev: Vec<u32>,
    next: Vec<u32>,
    queue: VecDeque<NodeId>,
    queued: Vec<bool>,
    /// nodes per exact level, indexed by level
    nodes_at: Vec<u32>,
    /// edges per `min(ℓ(u), ℓ(v))`
    edges_at: Vec<u32>,
}

#[inline]
fn other_end(ends: &[(NodeId, NodeId)], h: u32) -> NodeId {
    let (a, b) = ends[(h >> 1) as usize];
    if h & 1 == 0 {
        b
    } else {
        a
    }
}

impl<T: Real> Rung<T> {
    fn new(n: usize, num_levels: usize, alpha: T, d: T) -> Self {
        let stride = num_levels + 1;
        let mut nodes_at = vec![0; num_levels + 2];
        nodes_at[1] = n as u32;
        Self {
            d,
            cut: alpha.product(d),
            top: num_levels as u32,
            stride,
            level: vec![1; n],
            head: vec![NIL; n * stride],
            count: vec![0; n * stride],
            prev: Vec::new(),
            next: Vec::new(),
            queue: VecDeque::new(),
            queued: vec![false; n],
            nodes_at,
            edges_at: vec![0; num_levels + 2],
        }
    }

    #[inline]
    fn slot(&self, v: NodeId, i: u32) -> usize {
        v as usize * self.stride + i as usize
    }

    #[inline]
    fn link(&mut self, h: u32, v: NodeId, i: u32) {
        let s = self.slot(v, i);
        let first = self.head[s];
        self.prev[h as usize] = NIL;
        self.next[h as usize] = first;
        if first != NIL {
            self.prev[first as usize] = h;
        }
        self.head[s] = h;
        self.count[s] += 1;
    }

    #[inline]
    fn unlink(&mut self, h: u32, v: NodeId, i: u32) {
        let s = self.slot(v, i);
        let (p, q) = (self.prev[h as usize], self.next[h as usize]);
        if p == NIL {
            self.head[s] = q;
        } else {
            self.next[p as usize] = q;
        }
        if q != NIL {
            self.prev[q as usize] = p;
        }
        self.count[s] -= 1;
    }

    #[inline]
    fn count_at(&self, v: NodeId, i: u32) -> u32 {
        self.count[self.slot(v, i)]
    }

    /// `D_v(Z_{ℓ(v)})`.
    fn degree_at_level(&self, v: NodeId) -> u32 {
        self.count_at(v, self.level[v as usize])
    }

    fn dirty(&self, v: NodeId) -> Option<Move> {
        let l = self.level[v as usize];
        let here = self.count_at(v, l);
        if l < self.top && T::from_count(here as usize) > self.cut {
            Some(Move::Up)
        } else if l > 1 && T::from_count((self.count_at(v, l - 1) + here) as usize) < self.d {
            Some(Move::Down)
        } else {
            None
        }
    }

    fn mark(&mut self, v: NodeId) {
        if !self.queued[v as usize] && self.dirty(v).is_some() {
            self.queued[v as usize] = true;
            self.queue.push_back(v);
        }
    }

    fn grow(&mut self, half_edges: usize) {
        if self.prev.len() < half_edges {
            self.prev.resize(half_edges, NIL);
            self.next.resize(half_edges, NIL);
        }
    }

    fn add_edge(&mut self, e: u32, u: NodeId, w: NodeId) {
        let i = self.level[u as usize].min(self.level[w as usize]);
        self.link(2 * e, u, i);
        self.link(2 * e + 1, w, i);
        self.edges_at[i as usize] += 1;
        self.mark(u);
        self.mark(w);
    }

    fn remove_edge(&mut self, e: u32, u: NodeId, w: NodeId) {
        let i = self.level[u as usize].min(self.level[w as usize]);
        self.unlink(2 * e, u, i);
        self.unlink(2 * e + 1, w, i);
        self.edges_at[i as usize] -= 1;
        self.mark(u);
        self.mark(w);
    }

    fn promote(&mut self, y: NodeId, ends: &[(NodeId, NodeId)]) -> u64 {
        let i = self.level[y as usize];
        let mut work = 1;
        let mut h = self.head[self.slot(y, i)];
        while h != NIL {
            let nxt = self.next[h as usize];
            let w = other_end(ends, h);
            if self.level[w as usize] > i {
                self.unlink(h, y, i);
                self.link(h, y, i + 1);
                self.unlink(h ^ 1, w, i);
                self.link(h ^ 1, w, i + 1);
                self.edges_at[i as usize] -= 1;
                self.edges_at[i as usize + 1] += 1;
            }
            work += 1;
            h = nxt;
        }
        self.level[y as usize] = i + 1;
        self.nodes_at[i as usize] -= 1;
        self.nodes_at[i as usize + 1] += 1;
        self.mark_neighbors(y, i + 1, ends);
        work
    }

    fn demote(&mut self, y: NodeId, ends: &[(NodeId, NodeId)]) -> u64 {
        let i = self.level[y as usize];
        let mut work = 1;
        let mut h = self.head[self.slot(y, i)];
        while h != NIL {
            let nxt = self.next[h as usize];
            let w = other_end(ends, h);
            self.unlink(h, y, i);
            self.link(h, y, i - 1);
            self.unlink(h ^ 1, w, i);
            self.link(h ^ 1, w, i - 1);
            self.edges_at[i as usize] -= 1;
            self.edges_at[i as usize - 1] += 1;
            work += 1;
            h = nxt;
        }
        self.level[y as usize] = i - 1;
        self.nodes_at[i as usize] -= 1;
        self.nodes_at[i as usize - 1] += 1;
        self.mark_neighbors(y, i - 1, ends);
        work
    }

    /// Neighbors whose counts moved: those at level `>= ℓ(y)` after a promotion, and
    /// those at level `>= ℓ(y)+1` after a demotion; both live in list `ℓ(y)` of `y`.
    fn mark_neighbors(&mut self, y: NodeId, at: u32, ends: &[(NodeId, NodeId)]) {
        let mut h = self.head[self.slot(y, at)];
        while h != NIL {
            let w = other_end(ends, h);
            self.mark(w);
            h = self.next[h as usize];
        }
    }

    fn recover(&mut self, k: u32, ends: &[(NodeId, NodeId)], ledger: &mut WorkLedger, changes: &mut Vec<(u32, NodeId)>) {
        while let Some(y) = self.queue.pop_front() {
            self.queued[y as usize] = false;
            let mut moved = false;
            while let Some(mv) = self.dirty(y) {
                let work = match mv {
                    Move::Up => self.promote(y, ends),
                    Move::Down => self.demote(y, ends),
                };
                ledger.charge(work);
                moved = true;
            }
            if moved {
                changes.push((k, y));
            }
        }
    }

    /// Densest prefix `Z_j`, `j ∈ [1, L-1]`, as `(j, edges, nodes)`; ties toward smaller `j`.
    fn densest_prefix(&self) -> (u32, u64, u64) {
        let top = self.top as usize;
        let (mut nodes, mut edges) = (0u64, 0u64);
        let mut suffix = vec![(0u64, 0u64); top + 1];
        for j in (1..=top).rev() {
            nodes += self.nodes_at[j] as u64;
            edges += self.edges_at[j] as u64;
            suffix[j] = (edges, nodes);
        }
        let mut best = (1u32, 0u64, 1u64);
        for (j, &(e, v)) in suffix.iter().enumerate().take(top).skip(1) {
            if v > 0 && e * best.2 > best.1 * v {
                best = (j as u32, e, v);
            }
        }
        best
    }
}

/// The full-space engine, generic over the threshold scalar.
#[derive(Debug, Clone)]
pub struct DynamicDensity<T: Real> {
    epsilon: f64,
    alpha: T,
    num_levels: usize,
    ladder: ThresholdLadder<T>,
    graph: DynamicGraph,
    ids: HashMap<u64, u32>,
    ends: Vec<(NodeId, NodeId)>,
    free: Vec<u32>,
    rungs: Vec<Rung<T>>,
    top_bits: Vec<u64>,
    ledger: WorkLedger,
    changes: Vec<(u32, NodeId)>,
}

impl<T: Real> DynamicDensity<T> {
    pub fn new(n: usize, config: DynamicConfig) -> Self {
        let ladder = ThresholdLadder::full_space(n, config.epsilon);
        Self::with_ladder(n, config, ladder)
    }

    pub fn with_ladder(n: usize, config: DynamicConfig, ladder: ThresholdLadder<T>) -> Self {
        let alpha = T::of(config.alpha.unwrap_or_else(|| default_alpha(config.epsilon)));
        let num_levels = level_count(n, config.epsilon);
        let rungs: Vec<Rung<T>> = ladder
            .thresholds()
            .iter()
            .map(|&d| Rung::new(n, num_levels, alpha, d))
            .collect();
        let words = rungs.len().div_ceil(64);
        Self {
            epsilon: config.epsilon,
            alpha,
            num_levels,
            ladder,
            graph: DynamicGraph::new(n),
            ids: HashMap::new(),
            ends: Vec::new(),
            free: Vec::new(),
            rungs,
            top_bits: vec![0; words],
            ledger: WorkLedger::new(),
            changes: Vec::new(),
        }
    }

    /// Replaces the ledger, e.g. with [`WorkLedger::recording`].
    pub fn set_ledger(&mut self, ledger: WorkLedger) {
        self.ledger = ledger;
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn m(&self) -> usize {
        self.graph.m()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn num_levels(&self) -> usize {
        self.num_levels
    }

    pub fn ladder(&self) -> &ThresholdLadder<T> {
        &self.ladder
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    pub fn ledger(&self) -> &WorkLedger {
        &self.ledger
    }

    /// Levels of rung `k` (1-based).
    pub fn levels(&self, k: usize) -> &[u32] {
        &self.rungs[k - 1].level
    }

    /// `(rung, node)` pairs (rungs 1-based) whose level changed during the most recent update.
    pub fn last_level_changes(&self) -> &[(u32, NodeId)] {
        &self.changes
    }

    pub fn decomposition(&self, k: usize) -> Decomposition<T> {
        let r = &self.rungs[k - 1];
        Decomposition {
            levels: r.level.clone(),
            num_levels: self.num_levels,
            alpha: self.alpha,
            d: r.d,
        }
    }

    /// `D_v(Z_{ℓ(v)})` in rung `k`, read from the maintained counters.
    pub fn degree_at_level(&self, k: usize, v: NodeId) -> u32 {
        self.rungs[k - 1].degree_at_level(v)
    }

    pub fn insert(&mut self, u: NodeId, v: NodeId) -> Result<(), GraphError> {
        self.graph.insert(u, v)?;
        let key = edge_key(u, v, self.graph.n());
        let e = match self.free.pop() {
            Some(e) => {
                self.ends[e as usize] = (u, v);
                e
            }
            None => {
                self.ends.push((u, v));
                (self.ends.len() - 1) as u32
            }
        };
        self.ids.insert(key, e);
        let half_edges = 2 * self.ends.len();
        self.changes.clear();
        for k in 0..self.rungs.len() {
            let rung = &mut self.rungs[k];
            rung.grow(half_edges);
            rung.add_edge(e, u, v);
            rung.recover(k as u32 + 1, &self.ends, &mut self.ledger, &mut self.changes);
            set_bit(&mut self.top_bits, k, rung.nodes_at[rung.top as usize] > 0);
        }
        self.ledger.end_event();
        Ok(())
    }

    pub fn delete(&mut self, u: NodeId, v: NodeId) -> Result<(), GraphError> {
        self.graph.delete(u, v)?;
        let key = edge_key(u, v, self.graph.n());
        let e = self.ids.remove(&key).expect("edge id for a present edge");
        let (a, b) = self.ends[e as usize];
        self.changes.clear();
        for k in 0..self.rungs.len() {
            let rung = &mut self.rungs[k];
            rung.remove_edge(e, a, b);
            rung.recover(k as u32 + 1, &self.ends, &mut self.ledger, &mut self.changes);
            set_bit(&mut self.top_bits, k, rung.nodes_at[rung.top as usize] > 0);
        }
        self.free.push(e);
        self.ledger.end_event();
        Ok(())
    }

    /// Applies an update; queries are no-ops.
    pub fn apply(&mut self, event: &UpdateEvent) -> Result<(), GraphError> {
        match *event {
            UpdateEvent::Insert(u, v) => self.insert(u, v),
            UpdateEvent::Delete(u, v) => self.delete(u, v),
            UpdateEvent::Query => Ok(()),
        }
    }

    /// Largest 1-based rung whose top level is nonempty.
    pub fn k_prime(&self) -> Option<usize> {
        self.top_bits
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(i, &w)| i * 64 + (63 - w.leading_zeros() as usize) + 1)
    }

    /// `d_{k'} / (2(1+ε)^2)`, or zero when every top level is empty.
    pub fn query_value(&self) -> T {
        match self.k_prime() {
            Some(k) => self.ladder.d(k) / T::of(2.0 * (1.0 + self.epsilon).powi(2)),
            None => T::zero_value(),
        }
    }

    /// The densest prefix over all rungs and levels, with its exact density.
    pub fn query_subgraph_with_density(&self) -> (Vec<NodeId>, Rational) {
        let mut best: Option<(usize, u32, u64, u64)> = None;
        for (k, r) in self.rungs.iter().enumerate() {
            let (j, e, v) = r.densest_prefix();
            if e == 0 {
                continue;
            }
            if best.is_none_or(|(_, _, be, bv)| e * bv > be * v) {
                best = Some((k, j, e, v));
            }
        }
        match best {
            None => (Vec::new(), Rational::from_integer(0)),
            Some((k, j, e, v)) => {
                let nodes = (0..self.n() as NodeId)
                    .filter(|&x| self.rungs[k].level[x as usize] >= j)
                    .collect();
                (nodes, Rational::new(e as i64, v as i64))
            }
        }
    }

    pub fn query_subgraph(&self) -> Vec<NodeId> {
        self.query_subgraph_with_density().0
    }
}

fn set_bit(bits: &mut [u64], k: usize, on: bool) {
    if on {
        bits[k / 64] |= 1 << (k % 64);
    } else {
        bits[k / 64] &= !(1 << (k % 64));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{check_valid, Validator};
    use crate::num::Threshold;
    use crate::oracles::{exact_undirected, subgraph_density};
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type Engine = DynamicDensity<f64>;

    fn all_valid(engine: &Engine) -> bool {
        let mut validator = Validator::new();
        (1..=engine.ladder().len()).all(|k| {
            let dec = engine.decomposition(k);
            validator.is_valid(engine.graph().edges(), &dec.levels, dec.num_levels, dec.alpha, dec.d)
        })
    }

    /// Checks every list invariant directly from levels and adjacency.
    fn lists_consistent(engine: &Engine) -> bool {
        let l = engine.num_levels() as u32;
        for (k, r) in engine.rungs.iter().enumerate() {
            for v in 0..engine.n() as NodeId {
                let lv = r.level[v as usize];
                for i in 1..=l {
                    let expect = engine
                        .graph()
                        .neighbors(v)
                        .filter(|&w| {
                            let lw = r.level[w as usize];
                            if i < lv {
                                lw == i
                            } else if i == lv {
                                lw >= i
                            } else {
                                false
                            }
                        })
                        .count() as u32;
                    if r.count_at(v, i) != expect {
                        eprintln!("rung {k} node {v} list {i}: {} vs {expect}", r.count_at(v, i));
                        return false;
                    }
                }
            }
        }
        true
    }

    fn clique_engine(k: u32, eps: f64) -> Engine {
        let mut e = Engine::new(k as usize, DynamicConfig { epsilon: eps, alpha: None });
        for u in 0..k {
            for v in u + 1..k {
                e.insert(u, v).unwrap();
            }
        }
        e
    }

    #[test]
    fn ladder_shape() {
        let ladder = ThresholdLadder::<f64>::full_space(100, 0.1);
        assert!(ladder.d(1) < 1.0 / (2.3 * 100.0));
        assert!(*ladder.thresholds().last().unwrap() >= 400.0);
        assert_eq!(ladder.len(), 2 + ceil_log(1.1, 160_000.0));
    }

    #[test]
    fn empty_graph_queries() {
        let e = Engine::new(5, DynamicConfig::default());
        assert_eq!(e.query_value(), 0.0);
        assert!(e.query_subgraph().is_empty());
        assert_eq!(e.k_prime(), None);
    }

    #[test]
    fn single_edge() {
        let mut e = Engine::new(4, DynamicConfig::default());
        e.insert(0, 1).unwrap();
        assert!(e.query_value() > 0.0);
        assert!(all_valid(&e));
        for k in 1..=e.ladder().len() {
            if e.ladder().d(k) >= 1.0 {
                assert!(e.levels(k).iter().all(|&l| l == 1));
            }
        }
        assert_eq!(e.insert(1, 0), Err(GraphError::DuplicateInsert(1, 0)));
        assert_eq!(e.delete(2, 3), Err(GraphError::MissingDelete(2, 3)));
    }

    #[test]
    fn k10_estimate_within_bound() {
        let e = clique_engine(10, 0.1);
        let out = e.query_value();
        let bound = 2.0 * 2.3 * 1.1f64.powi(3);
        assert!(out <= 4.5 && 4.5 <= bound * out, "output {out}");
        assert!(all_valid(&e));
        assert!(lists_consistent(&e));
    }

    #[test]
    fn k4_delete_keeps_validity_and_teardown_resets() {
        let mut e = clique_engine(4, 0.1);
        e.delete(0, 1).unwrap();
        assert!(all_valid(&e));
        for (u, v) in [(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
            e.delete(u, v).unwrap();
        }
        for k in 1..=e.ladder().len() {
            assert!(e.levels(k).iter().all(|&l| l == 1));
        }
        assert_eq!(e.query_value(), 0.0);
    }

    #[test]
    fn star_center_cascade() {
        let n = 40;
        let mut e = Engine::new(n, DynamicConfig::default());
        for v in 1..n as NodeId {
            e.insert(0, v).unwrap();
        }
        for v in 1..n as NodeId {
            e.delete(0, v).unwrap();
            assert!(all_valid(&e));
        }
        assert!(lists_consistent(&e));
    }

    #[test]
    fn subgraph_finds_planted_clique() {
        let mut e = Engine::new(100, DynamicConfig::default());
        for u in 0..10 {
            for v in u + 1..10 {
                e.insert(u, v).unwrap();
            }
        }
        assert_eq!(e.query_subgraph(), (0..10).collect::<Vec<_>>());
        let (set, rho) = e.query_subgraph_with_density();
        assert_eq!(subgraph_density(e.graph(), &set), rho);
        assert!(rho.as_f64() >= e.query_value());
    }

    #[test]
    fn random_inserts_stay_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 100;
        let mut pairs: Vec<(NodeId, NodeId)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        pairs.shuffle(&mut rng);
        let mut e = Engine::new(n as usize, DynamicConfig::default());
        for &(u, v) in pairs.iter().take(2000) {
            e.insert(u, v).unwrap();
            assert!(all_valid(&e));
        }
        assert!(lists_consistent(&e));
    }

    #[test]
    fn gnp_ratio_against_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 60;
        let mut e = Engine::new(n, DynamicConfig::default());
        for u in 0..n as NodeId {
            for v in u + 1..n as NodeId {
                if rng.gen_bool(0.3) {
                    e.insert(u, v).unwrap();
                }
            }
        }
        let opt = exact_undirected(e.graph()).unwrap().density.as_f64();
        let out = e.query_value();
        let ratio = opt / out;
        assert!((1.0..=2.0 * 2.3 * 1.1f64.powi(3)).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn alternating_updates_cost() {
        let mut e = clique_engine(8, 0.1);
        let before = e.ledger().total();
        for _ in 0..1000 {
            e.delete(0, 1).unwrap();
            e.insert(0, 1).unwrap();
        }
        let per = (e.ledger().total() - before) as f64 / 2000.0;
        let scale = e.num_levels() as f64 / 0.1 * e.ladder().len() as f64;
        assert!(per <= scale, "{per} per update");
    }

    #[test]
    fn f32_engine_agrees_on_clique() {
        let mut e = DynamicDensity::<f32>::new(10, DynamicConfig::default());
        for u in 0..10 {
            for v in u + 1..10 {
                e.insert(u, v).unwrap();
            }
        }
        let out = e.query_value() as f64;
        assert!(out <= 4.5 && out > 0.5);
        let dec = e.decomposition(e.k_prime().unwrap());
        assert!(check_valid(e.graph(), &dec).is_ok());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn churn_keeps_every_rung_valid(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 25;
            let mut e = Engine::new(n, DynamicConfig { epsilon: 0.25, alpha: None });
            let mut present: Vec<(NodeId, NodeId)> = Vec::new();
            for _ in 0..300 {
                if !present.is_empty() && rng.gen_bool(0.4) {
                    let i = rng.gen_range(0..present.len());
                    let (u, v) = present.swap_remove(i);
                    e.delete(u, v).unwrap();
                } else {
                    let u = rng.gen_range(0..n as NodeId);
                    let v = rng.gen_range(0..n as NodeId);
                    if u == v || e.graph().has_edge(u, v) {
                        continue;
                    }
                    e.insert(u, v).unwrap();
                    present.push((u, v));
                }
                prop_assert!(all_valid(&e));
                prop_assert_eq!(e.query_value() == 0.0, e.m() == 0);
            }
            prop_assert!(lists_consistent(&e));
        }
    }
}
