//! Dynamic graph representation and the update-event model.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

/// Node identifier, an index in `[0, n)`.
pub type NodeId = u32;

/// Errors raised when an event violates the graph's preconditions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("edge ({0}, {1}) inserted twice")]
    DuplicateInsert(NodeId, NodeId),
    #[error("edge ({0}, {1}) deleted but not present")]
    MissingDelete(NodeId, NodeId),
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("node {node} out of range for n={n}")]
    NodeOutOfRange { node: NodeId, n: usize },
}

/// One element of an update stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UpdateEvent {
    Insert(NodeId, NodeId),
    Delete(NodeId, NodeId),
    Query,
}

impl UpdateEvent {
    pub fn endpoints(&self) -> Option<(NodeId, NodeId)> {
        match *self {
            UpdateEvent::Insert(u, v) | UpdateEvent::Delete(u, v) => Some((u, v)),
            UpdateEvent::Query => None,
        }
    }

    pub fn is_update(&self) -> bool {
        !matches!(self, UpdateEvent::Query)
    }
}

/// Canonical key of the unordered pair `{u, v}`: `min * n + max`.
#[inline]
pub fn edge_key(u: NodeId, v: NodeId, n: usize) -> u64 {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    a as u64 * n as u64 + b as u64
}

/// Inverse of [`edge_key`].
#[inline]
pub fn key_edge(key: u64, n: usize) -> (NodeId, NodeId) {
    ((key / n as u64) as NodeId, (key % n as u64) as NodeId)
}

/// Ordered-pair key for directed edges: `u * n + v`.
#[inline]
pub fn arc_key(u: NodeId, v: NodeId, n: usize) -> u64 {
    u as u64 * n as u64 + v as u64
}

/// Edge list with O(1) insert, delete and membership, iterated densely.
#[derive(Debug, Clone, Default)]
struct EdgeIndex {
    list: Vec<(NodeId, NodeId)>,
    pos: HashMap<u64, usize>,
}

impl EdgeIndex {
    fn insert(&mut self, key: u64, e: (NodeId, NodeId)) {
        self.pos.insert(key, self.list.len());
        self.list.push(e);
    }

    fn remove(&mut self, key: u64, n: usize, keyer: fn(NodeId, NodeId, usize) -> u64) {
        let at = self.pos.remove(&key).expect("indexed edge");
        self.list.swap_remove(at);
        if at < self.list.len() {
            let (a, b) = self.list[at];
            self.pos.insert(keyer(a, b, n), at);
        }
    }
}

/// Undirected simple graph over a fixed node set.
#[derive(Debug, Clone)]
pub struct DynamicGraph {
    n: usize,
    adjacency: Vec<HashSet<NodeId>>,
    edges: EdgeIndex,
}

impl DynamicGraph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            adjacency: vec![HashSet::new(); n],
            edges: EdgeIndex::default(),
        }
    }

    /// Builds a graph from an edge list, rejecting duplicates and loops.
    pub fn from_edges(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self, GraphError> {
        let mut g = Self::new(n);
        for &(u, v) in edges {
            g.insert(u, v)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.list.len()
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adjacency[v as usize].len()
    }

    pub fn neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adjacency[v as usize].iter().copied()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        (u as usize) < self.n && self.adjacency[u as usize].contains(&v)
    }

    /// All edges, each once, in unspecified order.
    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges.list
    }

    fn check(&self, u: NodeId, v: NodeId) -> Result<(), GraphError> {
        for node in [u, v] {
            if node as usize >= self.n {
                return Err(GraphError::NodeOutOfRange { node, n: self.n });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        Ok(())
    }

    pub fn insert(&mut self, u: NodeId, v: NodeId) -> Result<(), GraphError> {
        self.check(u, v)?;
        if !self.adjacency[u as usize].insert(v) {
            return Err(GraphError::DuplicateInsert(u, v));
        }
        self.adjacency[v as usize].insert(u);
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        self.edges.insert(edge_key(a, b, self.n), (a, b));
        Ok(())
    }

    pub fn delete(&mut self, u: NodeId, v: NodeId) -> Result<(), GraphError> {
        self.check(u, v)?;
        if !self.adjacency[u as usize].remove(&v) {
            return Err(GraphError::MissingDelete(u, v));
        }
        self.adjacency[v as usize].remove(&u);
        self.edges.remove(edge_key(u, v, self.n), self.n, edge_key);
        Ok(())
    }

    /// Applies one event; queries are no-ops. A failing event leaves the graph untouched.
    pub fn apply(&mut self, event: &UpdateEvent) -> Result<(), GraphError> {
        match *event {
            UpdateEvent::Insert(u, v) => self.insert(u, v),
            UpdateEvent::Delete(u, v) => self.delete(u, v),
            UpdateEvent::Query => Ok(()),
        }
    }

    /// Validates an event against the current state without applying it.
    pub fn precheck(&self, event: &UpdateEvent) -> Result<(), GraphError> {
        match *event {
            UpdateEvent::Insert(u, v) => {
                self.check(u, v)?;
                if self.has_edge(u, v) {
                    return Err(GraphError::DuplicateInsert(u, v));
                }
                Ok(())
            }
            UpdateEvent::Delete(u, v) => {
                self.check(u, v)?;
                if !self.has_edge(u, v) {
                    return Err(GraphError::MissingDelete(u, v));
                }
                Ok(())
            }
            UpdateEvent::Query => Ok(()),
        }
    }
}

/// Directed simple graph; `(u, v)` and `(v, u)` are distinct edges.
#[derive(Debug, Clone)]
pub struct DirectedDynamicGraph {
    n: usize,
    out_adjacency: Vec<HashSet<NodeId>>,
    in_adjacency: Vec<HashSet<NodeId>>,
    edges: EdgeIndex,
}

impl DirectedDynamicGraph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            out_adjacency: vec![HashSet::new(); n],
            in_adjacency: vec![HashSet::new(); n],
            edges: EdgeIndex::default(),
        }
    }

    pub fn from_edges(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self, GraphError> {
        let mut g = Self::new(n);
        for &(u, v) in edges {
            g.insert(u, v)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.list.len()
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.out_adjacency[v as usize].len()
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_adjacency[v as usize].len()
    }

    pub fn out_neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.out_adjacency[v as usize].iter().copied()
    }

    pub fn in_neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.in_adjacency[v as usize].iter().copied()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        (u as usize) < self.n && self.out_adjacency[u as usize].contains(&v)
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges.list
    }

    fn check(&self, u: NodeId, v: NodeId) -> Result<(), GraphError> {
        for node in [u, v] {
            if node as usize >= self.n {
                return Err(GraphError::NodeOutOfRange { node, n: self.n });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        Ok(())
    }

    pub fn insert(&mut self, u: NodeId, v: NodeId) -> Result<(), GraphError> {
        self.check(u, v)?;
        if !self.out_adjacency[u as usize].insert(v) {
            return Err(GraphError::DuplicateInsert(u, v));
        }
        self.in_adjacency[v as usize].insert(u);
        self.edges.insert(arc_key(u, v, self.n), (u, v));
        Ok(())
    }

    pub fn delete(&mut self, u: NodeId, v: NodeId) -> Result<(), GraphError> {
        self.check(u, v)?;
        if !self.out_adjacency[u as usize].remove(&v) {
            return Err(GraphError::MissingDelete(u, v));
        }
        self.in_adjacency[v as usize].remove(&u);
        self.edges.remove(arc_key(u, v, self.n), self.n, arc_key);
        Ok(())
    }

    pub fn apply(&mut self, event: &UpdateEvent) -> Result<(), GraphError> {
        match *event {
            UpdateEvent::Insert(u, v) => self.insert(u, v),
            UpdateEvent::Delete(u, v) => self.delete(u, v),
            UpdateEvent::Query => Ok(()),
        }
    }

    pub fn precheck(&self, event: &UpdateEvent) -> Result<(), GraphError> {
        match *event {
            UpdateEvent::Insert(u, v) => {
                self.check(u, v)?;
                if self.has_edge(u, v) {
                    return Err(GraphError::DuplicateInsert(u, v));
                }
                Ok(())
            }
            UpdateEvent::Delete(u, v) => {
                self.check(u, v)?;
                if !self.has_edge(u, v) {
                    return Err(GraphError::MissingDelete(u, v));
                }
                Ok(())
            }
            UpdateEvent::Query => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn insert_then_delete() {
        let mut g = DynamicGraph::new(3);
        g.apply(&UpdateEvent::Insert(0, 1)).unwrap();
        assert_eq!(g.m(), 1);
        assert_eq!(g.degree(0), 1);
        assert_eq!(g.degree(1), 1);
        g.apply(&UpdateEvent::Delete(0, 1)).unwrap();
        assert_eq!(g.m(), 0);
    }

    #[test]
    fn precondition_errors() {
        let mut g = DynamicGraph::new(3);
        g.insert(0, 1).unwrap();
        assert_eq!(g.insert(0, 1), Err(GraphError::DuplicateInsert(0, 1)));
        assert_eq!(g.insert(1, 0), Err(GraphError::DuplicateInsert(1, 0)));
        assert_eq!(g.delete(1, 2), Err(GraphError::MissingDelete(1, 2)));
        assert_eq!(g.insert(2, 2), Err(GraphError::SelfLoop(2)));
        assert!(matches!(g.insert(0, 7), Err(GraphError::NodeOutOfRange { node: 7, .. })));
        // failed events leave state intact
        assert_eq!(g.m(), 1);
    }

    #[test]
    fn edge_keys_are_canonical() {
        assert_eq!(edge_key(3, 1, 10), edge_key(1, 3, 10));
        assert_eq!(key_edge(edge_key(7, 2, 10), 10), (2, 7));
        assert_ne!(arc_key(3, 1, 10), arc_key(1, 3, 10));
    }

    #[test]
    fn directed_mirrors_adjacency() {
        let mut g = DirectedDynamicGraph::new(4);
        g.insert(0, 1).unwrap();
        g.insert(1, 0).unwrap();
        assert_eq!(g.m(), 2);
        assert_eq!(g.out_degree(0), 1);
        assert_eq!(g.in_degree(0), 1);
        assert_eq!(g.insert(0, 1), Err(GraphError::DuplicateInsert(0, 1)));
        g.delete(0, 1).unwrap();
        assert!(!g.has_edge(0, 1));
        assert!(g.has_edge(1, 0));
    }

    proptest! {
        // Replaying inserts followed by mirrored deletes empties the graph.
        #[test]
        fn replay_and_reverse_empties(pairs in proptest::collection::vec((0u32..12, 0u32..12), 0..60)) {
            let mut g = DynamicGraph::new(12);
            let mut inserted = Vec::new();
            for (u, v) in pairs {
                if u != v && !g.has_edge(u, v) {
                    g.insert(u, v).unwrap();
                    inserted.push((u, v));
                }
                let sum: usize = (0..12).map(|x| g.degree(x)).sum();
                prop_assert_eq!(sum, 2 * g.m());
            }
            for &(u, v) in inserted.iter().rev() {
                g.delete(v, u).unwrap();
            }
            prop_assert_eq!(g.m(), 0);
            for x in 0..12 {
                prop_assert_eq!(g.degree(x), 0);
            }
        }
    }
}
