//! Deterministic synthetic update streams.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{edge_key, NodeId, UpdateEvent};
use crate::stream::StreamFile;

/// Current edge set with O(1) uniform deletion.
#[derive(Debug, Clone)]
pub struct EdgePool {
    n: usize,
    list: Vec<(NodeId, NodeId)>,
    pos: HashMap<u64, usize>,
}

impl EdgePool {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            list: Vec::new(),
            pos: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn contains(&self, u: NodeId, v: NodeId) -> bool {
        self.pos.contains_key(&edge_key(u, v, self.n))
    }

    pub fn insert(&mut self, u: NodeId, v: NodeId) -> bool {
        let key = edge_key(u, v, self.n);
        if u == v || self.pos.contains_key(&key) {
            return false;
        }
        self.pos.insert(key, self.list.len());
        self.list.push((u, v));
        true
    }

    pub fn remove_at(&mut self, i: usize) -> (NodeId, NodeId) {
        let (u, v) = self.list.swap_remove(i);
        self.pos.remove(&edge_key(u, v, self.n));
        if let Some(&(a, b)) = self.list.get(i) {
            self.pos.insert(edge_key(a, b, self.n), i);
        }
        (u, v)
    }

    /// Inserts a uniformly random absent edge; `None` if the graph looks complete.
    pub fn insert_random(&mut self, rng: &mut impl Rng) -> Option<(NodeId, NodeId)> {
        let full = self.n * self.n.saturating_sub(1) / 2;
        if self.len() >= full {
            return None;
        }
        loop {
            let u = rng.gen_range(0..self.n as NodeId);
            let v = rng.gen_range(0..self.n as NodeId);
            if self.insert(u, v) {
                return Some((u, v));
            }
        }
    }

    pub fn remove_random(&mut self, rng: &mut impl Rng) -> Option<(NodeId, NodeId)> {
        if self.is_empty() {
            None
        } else {
            let i = rng.gen_range(0..self.len());
            Some(self.remove_at(i))
        }
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.list
    }
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gnp_edges(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Vec<(NodeId, NodeId)> {
    let mut edges = Vec::new();
    for u in 0..n as NodeId {
        for v in u + 1..n as NodeId {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    edges
}

/// Inserts `G(n, p)` in random order, then deletes a random `delete_fraction` of it.
pub fn erdos_renyi_dynamic(n: usize, p: f64, delete_fraction: f64, seed: u64) -> StreamFile {
    let mut rng = rng_for(seed);
    let mut edges = gnp_edges(n, p, &mut rng);
    edges.shuffle(&mut rng);
    let mut events: Vec<UpdateEvent> = edges.iter().map(|&(u, v)| UpdateEvent::Insert(u, v)).collect();
    let removals = (edges.len() as f64 * delete_fraction).round() as usize;
    edges.shuffle(&mut rng);
    events.extend(edges[..removals].iter().map(|&(u, v)| UpdateEvent::Delete(u, v)));
    events.push(UpdateEvent::Query);
    StreamFile::from_events(n, false, events)
}

/// `G(n, p)` with a clique on `k` random nodes, all inserted in random order.
pub fn planted_clique(n: usize, k: usize, p: f64, seed: u64) -> StreamFile {
    let mut rng = rng_for(seed);
    let mut pool = EdgePool::new(n);
    for (u, v) in gnp_edges(n, p, &mut rng) {
        pool.insert(u, v);
    }
    let mut nodes: Vec<NodeId> = (0..n as NodeId).collect();
    nodes.shuffle(&mut rng);
    let members = &nodes[..k.min(n)];
    for (i, &u) in members.iter().enumerate() {
        for &v in &members[i + 1..] {
            pool.insert(u, v);
        }
    }
    let mut edges = pool.edges().to_vec();
    edges.shuffle(&mut rng);
    let mut events: Vec<UpdateEvent> = edges.into_iter().map(|(u, v)| UpdateEvent::Insert(u, v)).collect();
    events.push(UpdateEvent::Query);
    StreamFile::from_events(n, false, events)
}

/// All edges of `K_k` in lexicographic order, then one query.
pub fn clique_buildup(k: usize) -> StreamFile {
    let mut events = Vec::new();
    for u in 0..k as NodeId {
        for v in u + 1..k as NodeId {
            events.push(UpdateEvent::Insert(u, v));
        }
    }
    events.push(UpdateEvent::Query);
    StreamFile::from_events(k, false, events)
}

/// Random inserts and deletes that hover around `target_m` edges.
pub fn churn_events(n: usize, steps: usize, target_m: usize, seed: u64) -> Vec<UpdateEvent> {
    let mut rng = rng_for(seed);
    let mut pool = EdgePool::new(n);
    let mut events = Vec::with_capacity(steps);
    while events.len() < steps {
        let p_insert = if pool.len() < target_m { 0.6 } else { 0.4 };
        let ev = if pool.is_empty() || rng.gen_bool(p_insert) {
            pool.insert_random(&mut rng).map(|(u, v)| UpdateEvent::Insert(u, v))
        } else {
            pool.remove_random(&mut rng).map(|(u, v)| UpdateEvent::Delete(u, v))
        };
        match ev {
            Some(e) => events.push(e),
            None => break,
        }
    }
    events
}

/// Churn with `m` hovering around `2n`, followed by one query.
pub fn churn(n: usize, steps: usize, seed: u64) -> StreamFile {
    let mut events = churn_events(n, steps, 2 * n, seed);
    events.push(UpdateEvent::Query);
    StreamFile::from_events(n, false, events)
}

/// Grows to `high` edges and shrinks to `low` edges, `cycles` times, with random
/// edges; used to drive regime changes.
pub fn oscillating(n: usize, low: usize, high: usize, cycles: usize, seed: u64) -> Vec<UpdateEvent> {
    let mut rng = rng_for(seed);
    let mut pool = EdgePool::new(n);
    let mut events = Vec::new();
    for _ in 0..cycles {
        while pool.len() < high {
            match pool.insert_random(&mut rng) {
                Some((u, v)) => events.push(UpdateEvent::Insert(u, v)),
                None => break,
            }
        }
        while pool.len() > low {
            let (u, v) = pool.remove_random(&mut rng).expect("nonempty");
            events.push(UpdateEvent::Delete(u, v));
        }
    }
    events
}

/// Random directed graph on `n` nodes, each arc present with probability `p`,
/// inserted in random order.
pub fn random_digraph_events(n: usize, p: f64, seed: u64) -> Vec<UpdateEvent> {
    let mut rng = rng_for(seed);
    let mut arcs = Vec::new();
    for u in 0..n as NodeId {
        for v in 0..n as NodeId {
            if u != v && rng.gen_bool(p) {
                arcs.push(UpdateEvent::Insert(u, v));
            }
        }
    }
    arcs.shuffle(&mut rng);
    arcs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DynamicGraph;

    fn replays(s: &StreamFile) -> DynamicGraph {
        let mut g = DynamicGraph::new(s.n);
        for e in s.events() {
            g.apply(&e).unwrap();
        }
        g
    }

    #[test]
    fn clique_buildup_shape() {
        let s = clique_buildup(10);
        assert_eq!(s.records.len(), 46);
        assert_eq!(s.records.last().unwrap().event, UpdateEvent::Query);
        assert_eq!(replays(&s).m(), 45);
    }

    #[test]
    fn churn_is_deterministic_and_legal() {
        let a = churn(100, 10_000, 7).to_text();
        assert_eq!(a, churn(100, 10_000, 7).to_text());
        assert_ne!(a, churn(100, 10_000, 8).to_text());
        let g = replays(&churn(100, 10_000, 7));
        assert!(g.m() > 100 && g.m() < 300);
    }

    #[test]
    fn planted_clique_contains_clique() {
        let s = planted_clique(200, 15, 0.05, 3);
        let g = replays(&s);
        let opt = crate::oracles::exact_undirected(&g).unwrap().density;
        assert!(opt >= crate::num::Rational::from_integer(7));
    }

    #[test]
    fn erdos_renyi_deletes_requested_fraction() {
        let s = erdos_renyi_dynamic(50, 0.2, 0.5, 1);
        let inserts = s.events().filter(|e| matches!(e, UpdateEvent::Insert(..))).count();
        let g = replays(&s);
        assert_eq!(g.m(), inserts - (inserts as f64 * 0.5).round() as usize);
    }

    #[test]
    fn oscillation_hits_both_bounds() {
        let events = oscillating(30, 10, 60, 3, 2);
        let mut g = DynamicGraph::new(30);
        let (mut lo, mut hi) = (usize::MAX, 0);
        for (i, e) in events.iter().enumerate() {
            g.apply(e).unwrap();
            if i > 60 {
                lo = lo.min(g.m());
            }
            hi = hi.max(g.m());
        }
        assert_eq!((lo, hi), (10, 60));
    }
}
