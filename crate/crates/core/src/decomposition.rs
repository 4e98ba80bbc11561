//! Static (α, d, L)-decompositions: construction, validation and prefix densities.
//!
//! A decomposition is stored as a level per node. `Z_i = {v : level(v) >= i}`, so
//! `Z_1 = V` and the nesting `Z_{i+1} ⊆ Z_i` hold by construction of the encoding.
//! The constraints checked are, for every `i < L` and `v ∈ Z_i`:
//!
//! * `D_v(Z_i) > αd` forces `v ∈ Z_{i+1}`;
//! * `D_v(Z_i) < d` forbids `v ∈ Z_{i+1}`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::{DynamicGraph, NodeId};
use crate::num::{ceil_log, density, Rational, Threshold};

/// `L = 2 + ceil(log_{1+ε} n)`.
pub fn level_count(n: usize, epsilon: f64) -> usize {
    2 + ceil_log(1.0 + epsilon, n as f64)
}

/// Parameters shared by every decomposition of one engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionParams {
    pub alpha: f64,
    pub epsilon: f64,
    pub levels: usize,
}

impl DecompositionParams {
    pub fn new(n: usize, epsilon: f64, alpha: f64) -> Self {
        Self {
            alpha,
            epsilon,
            levels: level_count(n, epsilon),
        }
    }
}

/// Level assignment of an (α, d, L)-decomposition. Levels are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition<T> {
    pub levels: Vec<u32>,
    pub num_levels: usize,
    pub alpha: T,
    pub d: T,
}

impl<T: Threshold> Decomposition<T> {
    /// The trivial assignment with every node at level 1 (`Z_2 = ∅`).
    pub fn ground(n: usize, num_levels: usize, alpha: T, d: T) -> Self {
        Self {
            levels: vec![1; n],
            num_levels,
            alpha,
            d,
        }
    }

    pub fn level(&self, v: NodeId) -> u32 {
        self.levels[v as usize]
    }

    /// Members of `Z_i`, in increasing node order.
    pub fn z_set(&self, i: u32) -> Vec<NodeId> {
        (0..self.levels.len() as NodeId)
            .filter(|&v| self.levels[v as usize] >= i)
            .collect()
    }

    /// Rebuilds the level encoding from nested sets `Z_1 ⊇ … ⊇ Z_L` (index 0 is `Z_1`).
    pub fn from_sets(n: usize, sets: &[Vec<NodeId>], alpha: T, d: T) -> Self {
        let mut levels = vec![1u32; n];
        for (idx, set) in sets.iter().enumerate() {
            for &v in set {
                levels[v as usize] = levels[v as usize].max(idx as u32 + 1);
            }
        }
        Self {
            levels,
            num_levels: sets.len(),
            alpha,
            d,
        }
    }

    pub fn top_is_empty(&self) -> bool {
        !self.levels.iter().any(|&l| l as usize == self.num_levels)
    }
}

/// Builds a decomposition by iterated peeling.
///
/// Nodes with `d <= D_v(Z_i) <= αd` are left out of `Z_{i+1}`, which makes the
/// output deterministic and each `Z_i` as small as the definition allows.
pub fn build_peeling<T: Threshold>(graph: &DynamicGraph, alpha: T, d: T, num_levels: usize) -> Decomposition<T> {
    let n = graph.n();
    let cut = alpha.product(d);
    let mut levels = vec![1u32; n];
    let mut deg: Vec<usize> = (0..n as NodeId).map(|v| graph.degree(v)).collect();
    let mut alive: Vec<NodeId> = (0..n as NodeId).collect();
    for i in 1..num_levels as u32 {
        let (keep, drop): (Vec<NodeId>, Vec<NodeId>) = alive
            .iter()
            .partition(|&&v| T::from_count(deg[v as usize]) > cut);
        for &v in &keep {
            levels[v as usize] = i + 1;
        }
        for &v in &drop {
            for w in graph.neighbors(v) {
                if levels[w as usize] > i {
                    deg[w as usize] -= 1;
                }
            }
        }
        alive = keep;
        if alive.is_empty() {
            break;
        }
    }
    Decomposition {
        levels,
        num_levels,
        alpha,
        d,
    }
}

/// Which side of the definition a node violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rule {
    /// `D_v(Z_i) > αd` but `v ∉ Z_{i+1}`.
    MustPromote,
    /// `D_v(Z_i) < d` but `v ∈ Z_{i+1}`.
    MustNotPromote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub node: NodeId,
    pub level: u32,
    pub degree: usize,
    pub rule: Rule,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violation(s)", self.violations.len())?;
        for v in self.violations.iter().take(8) {
            write!(f, "; node {} level {} degree {} {:?}", v.node, v.level, v.degree, v.rule)?;
        }
        Ok(())
    }
}

/// Reusable scratch space for validating many decompositions of one graph.
///
/// Only two degrees per node matter: `D_v(Z_ℓ)` and `D_v(Z_{ℓ-1})` with `ℓ = level(v)`.
/// Since `D_v(Z_i)` does not increase with `i`, a node satisfies every constraint at
/// every level iff it satisfies the promotion rule at `ℓ` and the exclusion rule at `ℓ-1`.
#[derive(Debug, Clone, Default)]
pub struct Validator {
    at_level: Vec<u32>,
    below_level: Vec<u32>,
}

impl Validator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fast yes/no check in `O(n + m)`.
    pub fn is_valid<T: Threshold>(
        &mut self,
        edges: &[(NodeId, NodeId)],
        levels: &[u32],
        num_levels: usize,
        alpha: T,
        d: T,
    ) -> bool {
        let n = levels.len();
        self.at_level.clear();
        self.at_level.resize(n, 0);
        self.below_level.clear();
        self.below_level.resize(n, 0);
        for &(u, w) in edges {
            let (lu, lw) = (levels[u as usize], levels[w as usize]);
            if lw >= lu {
                self.at_level[u as usize] += 1;
            }
            if lw + 1 >= lu {
                self.below_level[u as usize] += 1;
            }
            if lu >= lw {
                self.at_level[w as usize] += 1;
            }
            if lu + 1 >= lw {
                self.below_level[w as usize] += 1;
            }
        }
        let cut = alpha.product(d);
        let top = num_levels as u32;
        levels.iter().enumerate().all(|(v, &l)| {
            (l >= top || T::from_count(self.at_level[v] as usize) <= cut)
                && (l <= 1 || T::from_count(self.below_level[v] as usize) >= d)
        })
    }
}

/// Full per-level degree profile `D_v(Z_i)` for `i ∈ [1, level(v)]`.
fn degree_profiles(graph: &DynamicGraph, levels: &[u32]) -> Vec<Vec<usize>> {
    let mut prof: Vec<Vec<usize>> = levels.iter().map(|&l| vec![0; l as usize + 1]).collect();
    for &(u, w) in graph.edges() {
        for (a, b) in [(u, w), (w, u)] {
            let la = levels[a as usize];
            let lb = levels[b as usize];
            // b ∈ Z_i for all i <= lb
            for i in 1..=la.min(lb) {
                prof[a as usize][i as usize] += 1;
            }
        }
    }
    prof
}

/// Checks every constraint; on failure lists each `(node, level, degree, rule)` broken.
pub fn check_valid<T: Threshold>(graph: &DynamicGraph, dec: &Decomposition<T>) -> Result<(), ViolationReport> {
    let mut validator = Validator::new();
    if validator.is_valid(graph.edges(), &dec.levels, dec.num_levels, dec.alpha, dec.d) {
        return Ok(());
    }
    let cut = dec.alpha.product(dec.d);
    let prof = degree_profiles(graph, &dec.levels);
    let mut violations = Vec::new();
    for (v, &l) in dec.levels.iter().enumerate() {
        for i in 1..=l.min(dec.num_levels as u32 - 1) {
            let deg = prof[v][i as usize];
            let promoted = l > i;
            if !promoted && T::from_count(deg) > cut {
                violations.push(Violation {
                    node: v as NodeId,
                    level: i,
                    degree: deg,
                    rule: Rule::MustPromote,
                });
            }
            if promoted && T::from_count(deg) < dec.d {
                violations.push(Violation {
                    node: v as NodeId,
                    level: i,
                    degree: deg,
                    rule: Rule::MustNotPromote,
                });
            }
        }
    }
    Err(ViolationReport { violations })
}

/// Sizes `|Z_j|` and `|E(Z_j)|` for `j = 1..=L`, indexed by `j`.
pub fn prefix_sizes(edges: &[(NodeId, NodeId)], levels: &[u32], num_levels: usize) -> (Vec<usize>, Vec<usize>) {
    let mut nodes = vec![0usize; num_levels + 2];
    let mut inner = vec![0usize; num_levels + 2];
    for &l in levels {
        nodes[l as usize] += 1;
    }
    for &(u, w) in edges {
        inner[levels[u as usize].min(levels[w as usize]) as usize] += 1;
    }
    for j in (1..=num_levels).rev() {
        nodes[j] += nodes[j + 1];
        inner[j] += inner[j + 1];
    }
    (nodes, inner)
}

/// The prefix `Z_j`, `j ∈ [1, L-1]`, of maximum density (ties toward smaller `j`).
pub fn densest_prefix<T: Threshold>(graph: &DynamicGraph, dec: &Decomposition<T>) -> (u32, Rational) {
    let (nodes, inner) = prefix_sizes(graph.edges(), &dec.levels, dec.num_levels);
    let mut best = (1u32, density(inner[1], nodes[1]));
    for j in 2..dec.num_levels.max(2) {
        let rho = density(inner[j], nodes[j]);
        if rho > best.1 {
            best = (j as u32, rho);
        }
    }
    best
}

/// JSON shape used by the CLI's dump output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionDump {
    pub alpha: f64,
    pub d: f64,
    #[serde(rename = "L")]
    pub num_levels: usize,
    pub levels: Vec<u32>,
}

impl<T: Threshold> From<&Decomposition<T>> for DecompositionDump {
    fn from(dec: &Decomposition<T>) -> Self {
        Self {
            alpha: dec.alpha.as_f64(),
            d: dec.d.as_f64(),
            num_levels: dec.num_levels,
            levels: dec.levels.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::exact_undirected_bruteforce;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn clique(k: u32) -> DynamicGraph {
        let mut g = DynamicGraph::new(k as usize);
        for u in 0..k {
            for v in u + 1..k {
                g.insert(u, v).unwrap();
            }
        }
        g
    }

    fn gnp(n: usize, p: f64, seed: u64) -> DynamicGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = DynamicGraph::new(n);
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                if rng.gen_bool(p) {
                    g.insert(u, v).unwrap();
                }
            }
        }
        g
    }

    /// Independent validator: recompute every Z_i from scratch and test both rules
    /// at every level with exact arithmetic.
    fn naive_valid(g: &DynamicGraph, dec: &Decomposition<Rational>) -> bool {
        let cut = dec.alpha * dec.d;
        for i in 1..dec.num_levels as u32 {
            let z: Vec<bool> = dec.levels.iter().map(|&l| l >= i).collect();
            for v in 0..g.n() {
                if !z[v] {
                    continue;
                }
                let deg = g.neighbors(v as u32).filter(|&w| z[w as usize]).count() as i64;
                let deg = Rational::from_integer(deg);
                let promoted = dec.levels[v] > i;
                if deg > cut && !promoted {
                    return false;
                }
                if deg < dec.d && promoted {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn empty_graph_stays_on_ground_level() {
        let g = DynamicGraph::new(5);
        let dec = build_peeling(&g, 1.0, 1.0, 4);
        assert!(dec.levels.iter().all(|&l| l == 1));
        assert!(check_valid(&g, &dec).is_ok());
    }

    #[test]
    fn k4_rises_to_top() {
        let g = clique(4);
        let dec = build_peeling(&g, 1.0, 2.0, 4);
        assert_eq!(dec.levels, vec![4; 4]);
    }

    #[test]
    fn random_graph_passes_naive_validator() {
        let g = gnp(20, 0.3, 11);
        let alpha = Rational::new(3, 2);
        let d = Rational::from_integer(3);
        let dec = build_peeling(&g, alpha, d, 6);
        assert!(naive_valid(&g, &dec));
        assert!(check_valid(&g, &dec).is_ok());
    }

    #[test]
    fn k4_all_ground_violates_promotion() {
        let g = clique(4);
        let dec = Decomposition::ground(4, 3, 1.0, 2.0);
        let report = check_valid(&g, &dec).unwrap_err();
        assert_eq!(report.violations.len(), 4);
        for (v, viol) in report.violations.iter().enumerate() {
            assert_eq!(viol.node, v as NodeId);
            assert_eq!(viol.level, 1);
            assert_eq!(viol.degree, 3);
            assert_eq!(viol.rule, Rule::MustPromote);
        }
    }

    #[test]
    fn path_middle_violates_exclusion() {
        // a - b - c with b lifted to level 2 while D_b(Z_1) = 2 < d = 3
        let g = DynamicGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let dec = Decomposition {
            levels: vec![1, 2, 1],
            num_levels: 3,
            alpha: 1.0,
            d: 3.0,
        };
        let report = check_valid(&g, &dec).unwrap_err();
        assert_eq!(
            report.violations,
            vec![Violation {
                node: 1,
                level: 1,
                degree: 2,
                rule: Rule::MustNotPromote
            }]
        );
        // with d = 2 the same assignment is fine
        let ok = Decomposition { d: 2.0, ..dec };
        assert!(check_valid(&g, &ok).is_ok());
    }

    #[test]
    fn densest_prefix_of_clique() {
        let g = clique(5);
        let dec = build_peeling(&g, 1.0, 1.0, 4);
        assert_eq!(densest_prefix(&g, &dec), (1, Rational::from_integer(2)));
        let empty = DynamicGraph::new(4);
        let dec = build_peeling(&empty, 1.0, 1.0, 4);
        assert_eq!(densest_prefix(&empty, &dec), (1, Rational::from_integer(0)));
    }

    #[test]
    fn densest_prefix_matches_recomputation() {
        let g = gnp(30, 0.2, 5);
        let dec = build_peeling(&g, 1.5, 2.5, level_count(30, 0.1));
        let (j, rho) = densest_prefix(&g, &dec);
        let mut best = (1u32, Rational::from_integer(0));
        for i in 1..dec.num_levels as u32 {
            let z = dec.z_set(i);
            let inside = g
                .edges()
                .iter()
                .filter(|&&(a, b)| dec.level(a) >= i && dec.level(b) >= i)
                .count();
            let r = density(inside, z.len());
            if r > best.1 {
                best = (i, r);
            }
        }
        assert_eq!((j, rho), best);
    }

    #[test]
    fn dump_has_expected_keys() {
        let dec = Decomposition::ground(3, 4, 2.3, 0.5);
        let json = serde_json::to_value(DecompositionDump::from(&dec)).unwrap();
        assert_eq!(json["L"], 4);
        assert_eq!(json["levels"], serde_json::json!([1, 1, 1]));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn peeling_is_valid_and_matches_naive(seed in any::<u64>(), p in 0.05f64..0.6, dn in 1i64..12) {
            let g = gnp(14, p, seed);
            let d = Rational::new(dn, 2);
            let alpha = Rational::new(23, 10);
            let dec = build_peeling(&g, alpha, d, level_count(14, 0.25));
            prop_assert!(naive_valid(&g, &dec));
            prop_assert!(check_valid(&g, &dec).is_ok());
        }

        #[test]
        fn fast_check_agrees_with_naive(seed in any::<u64>(), lv in proptest::collection::vec(1u32..5, 10)) {
            let g = gnp(10, 0.4, seed);
            let dec = Decomposition { levels: lv, num_levels: 4, alpha: Rational::new(3, 2), d: Rational::from_integer(2) };
            prop_assert_eq!(check_valid(&g, &dec).is_ok(), naive_valid(&g, &dec));
        }

        #[test]
        fn level_encoding_round_trip(lv in proptest::collection::vec(1u32..6, 1..20)) {
            let dec = Decomposition { levels: lv.clone(), num_levels: 5, alpha: 1.0, d: 1.0 };
            let sets: Vec<Vec<NodeId>> = (1..=5).map(|i| dec.z_set(i)).collect();
            let back = Decomposition::from_sets(lv.len(), &sets, 1.0, 1.0);
            prop_assert_eq!(back.levels, lv);
        }

        // If d exceeds 2(1+ε)d* the top level is empty; if d < d*/α it is not.
        #[test]
        fn top_level_brackets_optimum(seed in any::<u64>(), p in 0.1f64..0.7) {
            let n = 12;
            let eps = 0.25;
            let g = gnp(n, p, seed);
            prop_assume!(g.m() > 0);
            let opt = exact_undirected_bruteforce(&g).unwrap().density;
            let alpha = Rational::new(11, 4);
            let levels = level_count(n, eps);
            let hi = opt * Rational::new(5, 2) + Rational::new(1, 100);
            prop_assert!(build_peeling(&g, alpha, hi, levels).top_is_empty());
            let lo = opt / alpha - Rational::new(1, 100);
            if lo > Rational::from_integer(0) {
                prop_assert!(!build_peeling(&g, alpha, lo, levels).top_is_empty());
            }
        }

        // Degrees inside each prefix sum to twice its edge count.
        #[test]
        fn prefix_degree_sum_identity(seed in any::<u64>()) {
            let g = gnp(16, 0.3, seed);
            let dec = build_peeling(&g, 2.0, 1.5, 6);
            let (nodes, inner) = prefix_sizes(g.edges(), &dec.levels, 6);
            for j in 1..=6u32 {
                let z = dec.z_set(j);
                prop_assert_eq!(z.len(), nodes[j as usize]);
                let deg_sum: usize = z.iter().map(|&v| g.neighbors(v).filter(|&w| dec.level(w) >= j).count()).sum();
                prop_assert_eq!(deg_sum, 2 * inner[j as usize]);
            }
        }
    }
}
