//! Directed densest subgraph through the derived bipartite view.
//!
//! Every node `v` plays two roles: `s_v` (out-edges) and `t_v` (in-edges), each
//! with its own level. An arc `(u, v)` is the derived edge `(s_u, t_v)`. One
//! (α, d_S, d_T, L)-decomposition is kept for every pair of thresholds on a
//! geometric grid; the estimate comes from the pair with the largest product
//! `d_S · d_T` whose top level is nonempty.

use std::collections::VecDeque;

use crate::dynamic::default_alpha;
use crate::graph::{DirectedDynamicGraph, GraphError, NodeId, UpdateEvent};
use crate::ledger::WorkLedger;
use crate::num::{ceil_log, Real};

/// `L = 2(2 + ceil(log_{1+ε} n))`.
pub fn directed_level_count(n: usize, epsilon: f64) -> usize {
    2 * (2 + ceil_log(1.0 + epsilon, n as f64))
}

/// `λ* = 1 - sqrt(1 - 1/n)`, the smallest possible `λ_S` on a nonempty graph.
pub fn lambda_star(n: usize) -> f64 {
    let n = n.max(1) as f64;
    1.0 - (1.0 - 1.0 / n).sqrt()
}

/// Grid `q_k = (1+ε)^{k-1} λ*/α` for `k = 0..=K`, `K` the first index with `q_k >= n²`.
pub fn directed_grid(n: usize, epsilon: f64, alpha: f64) -> Vec<f64> {
    let base = lambda_star(n) / alpha;
    let cap = (n * n) as f64;
    let mut q = Vec::new();
    let mut k = 0i32;
    loop {
        let v = base * (1.0 + epsilon).powi(k - 1);
        q.push(v);
        if v >= cap {
            return q;
        }
        k += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectedConfig {
    pub epsilon: f64,
    /// `None` selects `2 + 3ε`.
    pub alpha: Option<f64>,
}

impl Default for DirectedConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.25,
            alpha: None,
        }
    }
}

/// Levels of one (α, d_S, d_T, L)-decomposition. Roles are indexed `v` for `s_v`
/// and `n + v` for `t_v`.
#[derive(Debug, Clone)]
struct Pair<T> {
    d_s: T,
    d_t: T,
    cut_s: T,
    cut_t: T,
    level: Vec<u32>,
    /// `D_y(opposite side at level >= ℓ(y))`
    at: Vec<u32>,
    /// `D_y(opposite side at level >= ℓ(y) - 1)`
    below: Vec<u32>,
    queue: VecDeque<u32>,
    queued: Vec<bool>,
    at_top: usize,
}

impl<T: Real> Pair<T> {
    fn new(n: usize, alpha: T, d_s: T, d_t: T) -> Self {
        Self {
            d_s,
            d_t,
            cut_s: alpha.product(d_s),
            cut_t: alpha.product(d_t),
            level: vec![1; 2 * n],
            at: vec![0; 2 * n],
            below: vec![0; 2 * n],
            queue: VecDeque::new(),
            queued: vec![false; 2 * n],
            at_top: 0,
        }
    }

    fn enqueue(&mut self, y: u32) {
        if !self.queued[y as usize] {
            self.queued[y as usize] = true;
            self.queue.push_back(y);
        }
    }

    /// Contribution of the neighbor at level `other` to `(at, below)` of a node at `own`.
    #[inline]
    fn contribution(own: u32, other: u32) -> (u32, u32) {
        ((other >= own) as u32, (other + 1 >= own) as u32)
    }

    fn edge(&mut self, s: u32, t: u32, add: bool) {
        for (x, y) in [(s, t), (t, s)] {
            let (a, b) = Self::contribution(self.level[x as usize], self.level[y as usize]);
            if add {
                self.at[x as usize] += a;
                self.below[x as usize] += b;
            } else {
                self.at[x as usize] -= a;
                self.below[x as usize] -= b;
            }
            self.enqueue(x);
        }
    }

    fn thresholds(&self, y: u32, n: usize) -> (T, T) {
        if (y as usize) < n {
            (self.d_s, self.cut_s)
        } else {
            (self.d_t, self.cut_t)
        }
    }

    fn recover(&mut self, graph: &DirectedDynamicGraph, top: u32, ledger: &mut WorkLedger) {
        let n = graph.n();
        while let Some(y) = self.queue.pop_front() {
            self.queued[y as usize] = false;
            let (d, cut) = self.thresholds(y, n);
            let l = self.level[y as usize];
            let to = if l < top && T::from_count(self.at[y as usize] as usize) > cut {
                l + 1
            } else if l > 1 && T::from_count(self.below[y as usize] as usize) < d {
                l - 1
            } else {
                continue;
            };
            self.move_node(graph, y, to, top, ledger);
            self.enqueue(y);
        }
    }

    fn move_node(&mut self, graph: &DirectedDynamicGraph, y: u32, to: u32, top: u32, ledger: &mut WorkLedger) {
        let n = graph.n();
        let from = self.level[y as usize];
        self.level[y as usize] = to;
        if from == top {
            self.at_top -= 1;
        }
        if to == top {
            self.at_top += 1;
        }
        let (at, below) = (&mut self.at, &mut self.below);
        let (mut own_at, mut own_below) = (0, 0);
        let nbrs: Box<dyn Iterator<Item = u32>> = if (y as usize) < n {
            Box::new(graph.out_neighbors(y).map(|w| w + n as u32))
        } else {
            Box::new(graph.in_neighbors(y - n as u32))
        };
        let mut work = 1u64;
        let mut touched = Vec::new();
        for x in nbrs {
            work += 1;
            let lx = self.level[x as usize];
            let (a, b) = Self::contribution(to, lx);
            own_at += a;
            own_below += b;
            let (oa, ob) = Self::contribution(lx, from);
            let (na, nb) = Self::contribution(lx, to);
            if (oa, ob) != (na, nb) {
                at[x as usize] = at[x as usize] + na - oa;
                below[x as usize] = below[x as usize] + nb - ob;
                touched.push(x);
            }
        }
        self.at[y as usize] = own_at;
        self.below[y as usize] = own_below;
        for x in touched {
            self.enqueue(x);
        }
        ledger.charge(work);
    }

    /// `true` when every node satisfies both rules at its level.
    fn is_clean(&self, n: usize, top: u32) -> bool {
        (0..2 * n as u32).all(|y| {
            let (d, cut) = self.thresholds(y, n);
            let l = self.level[y as usize];
            !(l < top && T::from_count(self.at[y as usize] as usize) > cut)
                && !(l > 1 && T::from_count(self.below[y as usize] as usize) < d)
        })
    }
}

/// Full-space directed engine over `(K+1)²` threshold pairs.
#[derive(Debug, Clone)]
pub struct DirectedDensity<T: Real> {
    epsilon: f64,
    alpha: T,
    num_levels: usize,
    grid: Vec<T>,
    graph: DirectedDynamicGraph,
    pairs: Vec<Pair<T>>,
    ledger: WorkLedger,
}

impl<T: Real> DirectedDensity<T> {
    pub fn new(n: usize, config: DirectedConfig) -> Self {
        let alpha_f = config.alpha.unwrap_or_else(|| default_alpha(config.epsilon));
        let alpha = T::of(alpha_f);
        let grid: Vec<T> = directed_grid(n, config.epsilon, alpha_f).into_iter().map(T::of).collect();
        let mut pairs = Vec::with_capacity(grid.len() * grid.len());
        for &d_s in &grid {
            for &d_t in &grid {
                pairs.push(Pair::new(n, alpha, d_s, d_t));
            }
        }
        Self {
            epsilon: config.epsilon,
            alpha,
            num_levels: directed_level_count(n, config.epsilon),
            grid,
            graph: DirectedDynamicGraph::new(n),
            pairs,
            ledger: WorkLedger::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn m(&self) -> usize {
        self.graph.m()
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn num_levels(&self) -> usize {
        self.num_levels
    }

    /// The threshold grid `q_0..q_K`.
    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn graph(&self) -> &DirectedDynamicGraph {
        &self.graph
    }

    pub fn ledger(&self) -> &WorkLedger {
        &self.ledger
    }

    fn pair_index(&self, a: usize, b: usize) -> usize {
        a * self.grid.len() + b
    }

    /// Out-role and in-role levels of the decomposition for `(q_a, q_b)`.
    pub fn levels(&self, a: usize, b: usize) -> (&[u32], &[u32]) {
        let p = &self.pairs[self.pair_index(a, b)];
        let n = self.n();
        (&p.level[..n], &p.level[n..])
    }

    /// Whether the top level of the decomposition for `(q_a, q_b)` is nonempty.
    pub fn top_nonempty(&self, a: usize, b: usize) -> bool {
        self.pairs[self.pair_index(a, b)].at_top > 0
    }

    /// Whether every maintained decomposition is clean per its own counters.
    pub fn all_clean(&self) -> bool {
        let top = self.num_levels as u32;
        self.pairs.iter().all(|p| p.is_clean(self.n(), top))
    }

    pub fn insert(&mut self, u: NodeId, v: NodeId) -> Result<(), GraphError> {
        self.graph.insert(u, v)?;
        self.update_pairs(u, v, true);
        Ok(())
    }

    pub fn delete(&mut self, u: NodeId, v: NodeId) -> Result<(), GraphError> {
        self.graph.delete(u, v)?;
        self.update_pairs(u, v, false);
        Ok(())
    }

    fn update_pairs(&mut self, u: NodeId, v: NodeId, add: bool) {
        let t = v + self.n() as u32;
        let top = self.num_levels as u32;
        for p in &mut self.pairs {
            p.edge(u, t, add);
            p.recover(&self.graph, top, &mut self.ledger);
        }
        self.ledger.end_event();
    }

    pub fn apply(&mut self, event: &UpdateEvent) -> Result<(), GraphError> {
        match *event {
            UpdateEvent::Insert(u, v) => self.insert(u, v),
            UpdateEvent::Delete(u, v) => self.delete(u, v),
            UpdateEvent::Query => Ok(()),
        }
    }

    /// `γ`: the largest `d_S · d_T` over pairs with a nonempty top level, or zero.
    pub fn gamma(&self) -> T {
        self.pairs
            .iter()
            .filter(|p| p.at_top > 0)
            .map(|p| p.d_s * p.d_t)
            .fold(T::zero_value(), |a, b| if b > a { b } else { a })
    }

    /// `sqrt(γ) / (2 sqrt(1+ε))`.
    pub fn query(&self) -> T {
        self.gamma().sqrt() / T::of(2.0 * (1.0 + self.epsilon).sqrt())
    }
}

/// Exact check of the directed decomposition rules for one pair, from scratch.
pub fn directed_is_valid(
    graph: &DirectedDynamicGraph,
    out_level: &[u32],
    in_level: &[u32],
    num_levels: usize,
    alpha: f64,
    d_s: f64,
    d_t: f64,
) -> bool {
    let n = graph.n();
    let top = num_levels as u32;
    let check = |own: u32, nbrs: &mut dyn Iterator<Item = u32>, d: f64| {
        let (mut at, mut below) = (0usize, 0usize);
        for l in nbrs {
            at += (l >= own) as usize;
            below += (l + 1 >= own) as usize;
        }
        !(own < top && at as f64 > alpha * d) && !(own > 1 && (below as f64) < d)
    };
    (0..n as NodeId).all(|v| {
        check(out_level[v as usize], &mut graph.out_neighbors(v).map(|w| in_level[w as usize]), d_s)
            && check(in_level[v as usize], &mut graph.in_neighbors(v).map(|w| out_level[w as usize]), d_t)
    })
}
