//! Highest-label push-relabel with the gap heuristic.
//!
//! Only the first phase runs: the result is a maximum preflow, which is enough
//! for the flow value and for a minimum cut.

use std::collections::VecDeque;

/// Residual network with paired arcs: arc `e` and `e ^ 1` are mutual reverses.
#[derive(Debug, Clone, Default)]
pub struct FlowNetwork {
    adj: Vec<Vec<usize>>,
    to: Vec<u32>,
    cap: Vec<i64>,
}

impl FlowNetwork {
    pub fn new(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    fn add_pair(&mut self, u: usize, v: usize, forward: i64, backward: i64) {
        let e = self.to.len();
        self.to.push(v as u32);
        self.cap.push(forward);
        self.to.push(u as u32);
        self.cap.push(backward);
        self.adj[u].push(e);
        self.adj[v].push(e + 1);
    }

    /// Directed arc `u -> v`.
    pub fn add_edge(&mut self, u: usize, v: usize, cap: i64) {
        self.add_pair(u, v, cap, 0);
    }

    /// Capacity `cap` in both directions.
    pub fn add_undirected(&mut self, u: usize, v: usize, cap: i64) {
        self.add_pair(u, v, cap, cap);
    }

    /// Computes a maximum preflow from `s` to `t` and returns its value.
    pub fn max_preflow(&mut self, s: usize, t: usize) -> i64 {
        let n = self.node_count();
        let mut h = vec![n; n];
        // exact distance labels to start with
        h[t] = 0;
        let mut queue = VecDeque::from([t]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let v = self.to[e] as usize;
                if v != s && h[v] == n && self.cap[e ^ 1] > 0 {
                    h[v] = h[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        h[s] = n;

        let mut excess = vec![0i64; n];
        let mut count = vec![0usize; n + 1];
        for (v, &hv) in h.iter().enumerate() {
            if hv < n && v != s {
                count[hv] += 1;
            }
        }
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..self.adj[s].len() {
            let e = self.adj[s][i];
            let c = self.cap[e];
            if c > 0 {
                let v = self.to[e] as usize;
                self.cap[e] = 0;
                self.cap[e ^ 1] += c;
                if excess[v] == 0 && v != t && h[v] < n {
                    buckets[h[v]].push(v);
                }
                excess[v] += c;
            }
        }

        let mut cur = vec![0usize; n];
        let mut b = n.saturating_sub(1);
        loop {
            while b > 0 && buckets[b].is_empty() {
                b -= 1;
            }
            let Some(u) = buckets[b].pop() else { break };
            if h[u] >= n || excess[u] == 0 {
                continue;
            }
            let top = self.discharge(u, s, t, &mut h, &mut excess, &mut count, &mut cur, &mut buckets);
            b = b.max(top);
        }
        excess[t]
    }

    #[allow(clippy::too_many_arguments)]
    fn discharge(
        &mut self,
        u: usize,
        s: usize,
        t: usize,
        h: &mut [usize],
        excess: &mut [i64],
        count: &mut [usize],
        cur: &mut [usize],
        buckets: &mut [Vec<usize>],
    ) -> usize {
        let n = h.len();
        // highest label of a node activated here
        let mut top = 0;
        while excess[u] > 0 {
            if cur[u] == self.adj[u].len() {
                let old = h[u];
                let lowest = self.adj[u]
                    .iter()
                    .filter(|&&e| self.cap[e] > 0)
                    .map(|&e| h[self.to[e] as usize])
                    .min()
                    .unwrap_or(n);
                count[old] -= 1;
                if count[old] == 0 {
                    // gap: nothing above `old` can reach the sink any more
                    for hw in h.iter_mut() {
                        if *hw > old && *hw < n {
                            count[*hw] -= 1;
                            *hw = n;
                        }
                    }
                    h[u] = n;
                    return top;
                }
                if lowest + 1 >= n {
                    h[u] = n;
                    return top;
                }
                h[u] = lowest + 1;
                count[h[u]] += 1;
                cur[u] = 0;
                continue;
            }
            let e = self.adj[u][cur[u]];
            let v = self.to[e] as usize;
            if self.cap[e] > 0 && h[u] == h[v] + 1 {
                let d = excess[u].min(self.cap[e]);
                self.cap[e] -= d;
                self.cap[e ^ 1] += d;
                excess[u] -= d;
                if excess[v] == 0 && v != t && v != s {
                    buckets[h[v]].push(v);
                    top = top.max(h[v]);
                }
                excess[v] += d;
            } else {
                cur[u] += 1;
            }
        }
        top
    }

    /// Nodes that can still reach `t` in the residual network.
    ///
    /// After [`max_preflow`](Self::max_preflow) the complement is the source side
    /// of the maximal minimum cut.
    pub fn sink_side(&self, t: usize) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        seen[t] = true;
        let mut queue = VecDeque::from([t]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let v = self.to[e] as usize;
                if !seen[v] && self.cap[e ^ 1] > 0 {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Plain Edmonds-Karp, used only to cross-check.
    fn edmonds_karp(n: usize, arcs: &[(usize, usize, i64)], s: usize, t: usize) -> i64 {
        let mut cap = vec![vec![0i64; n]; n];
        for &(u, v, c) in arcs {
            cap[u][v] += c;
        }
        let mut flow = 0;
        loop {
            let mut prev = vec![usize::MAX; n];
            prev[s] = s;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for v in 0..n {
                    if prev[v] == usize::MAX && cap[u][v] > 0 {
                        prev[v] = u;
                        q.push_back(v);
                    }
                }
            }
            if prev[t] == usize::MAX {
                return flow;
            }
            let mut bottleneck = i64::MAX;
            let mut v = t;
            while v != s {
                bottleneck = bottleneck.min(cap[prev[v]][v]);
                v = prev[v];
            }
            let mut v = t;
            while v != s {
                cap[prev[v]][v] -= bottleneck;
                cap[v][prev[v]] += bottleneck;
                v = prev[v];
            }
            flow += bottleneck;
        }
    }

    #[test]
    fn textbook_network() {
        let mut net = FlowNetwork::new(6);
        for &(u, v, c) in &[(0, 1, 16), (0, 2, 13), (1, 2, 10), (2, 1, 4), (1, 3, 12), (3, 2, 9), (2, 4, 14), (4, 3, 7), (3, 5, 20), (4, 5, 4)] {
            net.add_edge(u, v, c);
        }
        assert_eq!(net.max_preflow(0, 5), 23);
    }

    #[test]
    fn matches_edmonds_karp_on_random_networks() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.gen_range(2..12);
            let arcs: Vec<(usize, usize, i64)> = (0..rng.gen_range(0..40))
                .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..20)))
                .filter(|&(u, v, _)| u != v)
                .collect();
            let mut net = FlowNetwork::new(n);
            for &(u, v, c) in &arcs {
                net.add_edge(u, v, c);
            }
            let value = net.max_preflow(0, n - 1);
            assert_eq!(value, edmonds_karp(n, &arcs, 0, n - 1));
            // the cut induced by the residual graph has the same capacity
            let sink = net.sink_side(n - 1);
            assert!(!sink[0]);
            let cut: i64 = arcs.iter().filter(|&&(u, v, _)| !sink[u] && sink[v]).map(|a| a.2).sum();
            assert_eq!(cut, value);
        }
    }
}
