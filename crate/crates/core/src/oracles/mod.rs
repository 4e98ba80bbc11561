//! Exact and approximate ground truth for densest-subgraph values.

pub mod flow;

use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::graph::{DirectedDynamicGraph, DynamicGraph, NodeId};
use crate::num::{density, Rational};
use flow::FlowNetwork;

pub const DEFAULT_FLOW_CAP: usize = 500;
pub const BRUTE_FORCE_CAP: usize = 20;
pub const DIRECTED_CAP: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("instance has {n} nodes, above the oracle cap of {cap}")]
pub struct CapExceeded {
    pub n: usize,
    pub cap: usize,
}

fn check_cap(n: usize, cap: usize) -> Result<(), CapExceeded> {
    if n > cap {
        Err(CapExceeded { n, cap })
    } else {
        Ok(())
    }
}

/// Maximum density with a node set attaining it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactResult {
    pub density: Rational,
    pub witness: Vec<NodeId>,
}

/// Edges with both endpoints in `set`.
pub fn induced_edges(graph: &DynamicGraph, set: &[NodeId]) -> usize {
    let mut inside = vec![false; graph.n()];
    for &v in set {
        inside[v as usize] = true;
    }
    graph
        .edges()
        .iter()
        .filter(|&&(u, v)| inside[u as usize] && inside[v as usize])
        .count()
}

pub fn subgraph_density(graph: &DynamicGraph, set: &[NodeId]) -> Rational {
    density(induced_edges(graph, set), set.len())
}

/// Runs one min-cut on the scaled Goldberg network for guess `p / scale` and
/// returns the source side of the maximal minimum cut (without `s`).
fn goldberg_source_side(graph: &DynamicGraph, p: i64, scale: i64) -> Vec<NodeId> {
    let n = graph.n();
    let m = graph.m() as i64;
    let (s, t) = (n, n + 1);
    let mut net = FlowNetwork::new(n + 2);
    for v in 0..n {
        let deg = graph.degree(v as NodeId) as i64;
        net.add_edge(s, v, m * scale);
        net.add_edge(v, t, m * scale + 2 * p - deg * scale);
    }
    for &(u, v) in graph.edges() {
        net.add_undirected(u as usize, v as usize, scale);
    }
    net.max_preflow(s, t);
    let sink = net.sink_side(t);
    (0..n as NodeId).filter(|&v| !sink[v as usize]).collect()
}

/// Exact maximum density via repeated minimum cuts, for `n <= cap`.
///
/// Keeps `lo` attained by a witness and `hi` known to be unattainable. Distinct
/// densities with denominators at most `n` differ by more than `1/n^2`, so once
/// the gap drops below that, `lo` is the optimum. Guesses are taken on the grid
/// `1/(2n^2)` so capacities stay integral and small.
pub fn exact_undirected_capped(graph: &DynamicGraph, cap: usize) -> Result<ExactResult, CapExceeded> {
    let n = graph.n();
    check_cap(n, cap)?;
    if graph.m() == 0 {
        return Ok(ExactResult {
            density: Rational::zero(),
            witness: Vec::new(),
        });
    }
    let scale = 2 * (n as i64) * (n as i64);
    let gap = Rational::new(1, (n * n) as i64);
    let mut witness: Vec<NodeId> = (0..n as NodeId).collect();
    let mut lo = density(graph.m(), n);
    let mut hi = Rational::from_integer(n as i64);
    while hi - lo >= gap {
        let mid = (lo + hi) / 2;
        let p = (mid * scale).floor().to_integer();
        let side = goldberg_source_side(graph, p, scale);
        if side.is_empty() {
            hi = Rational::new(p, scale);
        } else {
            lo = subgraph_density(graph, &side);
            witness = side;
        }
    }
    Ok(ExactResult { density: lo, witness })
}

pub fn exact_undirected(graph: &DynamicGraph) -> Result<ExactResult, CapExceeded> {
    exact_undirected_capped(graph, DEFAULT_FLOW_CAP)
}

/// Exhaustive search over all nonempty subsets, for `n <= 20`.
pub fn exact_undirected_bruteforce(graph: &DynamicGraph) -> Result<ExactResult, CapExceeded> {
    let n = graph.n();
    check_cap(n, BRUTE_FORCE_CAP)?;
    let adj: Vec<u32> = (0..n as NodeId)
        .map(|v| graph.neighbors(v).fold(0u32, |acc, w| acc | 1 << w))
        .collect();
    let mut best = (Rational::zero(), 0u32);
    for mask in 1u32..(1u32 << n) {
        let twice: u32 = (0..n).filter(|&v| mask >> v & 1 == 1).map(|v| (adj[v] & mask).count_ones()).sum();
        let rho = density(twice as usize / 2, mask.count_ones() as usize);
        if rho > best.0 {
            best = (rho, mask);
        }
    }
    Ok(ExactResult {
        density: best.0,
        witness: (0..n as NodeId).filter(|&v| best.1 >> v & 1 == 1).collect(),
    })
}

/// Greedy peeling: repeatedly delete a minimum-degree node and keep the densest
/// intermediate set. Returns a density at least half the optimum.
pub fn charikar_peel(graph: &DynamicGraph) -> ExactResult {
    let n = graph.n();
    let mut deg: Vec<usize> = (0..n as NodeId).map(|v| graph.degree(v)).collect();
    let max_deg = deg.iter().copied().max().unwrap_or(0);
    let mut buckets: Vec<Vec<NodeId>> = vec![Vec::new(); max_deg + 1];
    for v in 0..n {
        buckets[deg[v]].push(v as NodeId);
    }
    let mut removed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut edges = graph.m();
    let mut best = (density(edges, n), 0usize);
    let mut low = 0;
    for step in 0..n {
        let v = loop {
            while buckets[low].is_empty() {
                low += 1;
            }
            let v = buckets[low].pop().unwrap();
            if !removed[v as usize] && deg[v as usize] == low {
                break v;
            }
        };
        removed[v as usize] = true;
        order.push(v);
        edges -= deg[v as usize];
        for w in graph.neighbors(v) {
            let w = w as usize;
            if !removed[w] {
                deg[w] -= 1;
                buckets[deg[w]].push(w as NodeId);
                low = low.min(deg[w]);
            }
        }
        let rho = density(edges, n - step - 1);
        if rho > best.0 {
            best = (rho, step + 1);
        }
    }
    let mut witness: Vec<NodeId> = if graph.m() == 0 { Vec::new() } else { order[best.1..].to_vec() };
    witness.sort_unstable();
    ExactResult {
        density: best.0,
        witness,
    }
}

/// Exact directed optimum `max |E(X,Y)| / sqrt(|X||Y|)` with the derived
/// quantities `λ_S = e (1 - sqrt(1 - 1/|X|))` and `λ_T = e (1 - sqrt(1 - 1/|Y|))`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedExact {
    /// `ρ(G)^2` as an exact rational.
    pub density_squared: Rational,
    pub density: f64,
    pub x: Vec<NodeId>,
    pub y: Vec<NodeId>,
    pub lambda_s: f64,
    pub lambda_t: f64,
}

/// Enumerates every nonempty `X`; for a fixed `X` the best `Y` of each size takes
/// the nodes with the most in-arcs from `X`. Requires `n <= 10`.
pub fn exact_directed(graph: &DirectedDynamicGraph) -> Result<DirectedExact, CapExceeded> {
    let n = graph.n();
    check_cap(n, DIRECTED_CAP)?;
    let empty = DirectedExact {
        density_squared: Rational::zero(),
        density: 0.0,
        x: Vec::new(),
        y: Vec::new(),
        lambda_s: 0.0,
        lambda_t: 0.0,
    };
    if graph.m() == 0 {
        return Ok(empty);
    }
    // best as (e, |X|, |Y|, xmask, ymask), compared by e^2 / (|X||Y|)
    let mut best: Option<(i64, i64, i64, u32, u32)> = None;
    let mut counts: Vec<(i64, NodeId)> = Vec::with_capacity(n);
    for xmask in 1u32..(1u32 << n) {
        counts.clear();
        for y in 0..n as NodeId {
            let c = graph.in_neighbors(y).filter(|&u| xmask >> u & 1 == 1).count() as i64;
            counts.push((c, y));
        }
        counts.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let xs = xmask.count_ones() as i64;
        let mut e = 0i64;
        let mut ymask = 0u32;
        for (k, &(c, y)) in counts.iter().enumerate() {
            e += c;
            ymask |= 1 << y;
            let ys = k as i64 + 1;
            let better = match best {
                None => true,
                Some((be, bx, by, _, _)) => e * e * bx * by > be * be * xs * ys,
            };
            if better {
                best = Some((e, xs, ys, xmask, ymask));
            }
        }
    }
    let (e, xs, ys, xmask, ymask) = best.expect("nonempty graph");
    let sq = Rational::new(e * e, xs * ys);
    let lambda = |size: i64| e as f64 * (1.0 - (1.0 - 1.0 / size as f64).sqrt());
    Ok(DirectedExact {
        density_squared: sq,
        density: sq.to_f64().unwrap_or(f64::NAN).sqrt(),
        x: (0..n as NodeId).filter(|&v| xmask >> v & 1 == 1).collect(),
        y: (0..n as NodeId).filter(|&v| ymask >> v & 1 == 1).collect(),
        lambda_s: lambda(xs),
        lambda_t: lambda(ys),
    })
}
