//! Dynamic streaming estimator with small space.
//!
//! Time-steps are classified as sparse or dense by the edge count, with hysteresis.
//! In sparse steps a [`SparseRecoverer`] holds every edge and the recovered set `F`
//! drives an embedded [`DynamicDensity`]. In dense steps each rung keeps one
//! decomposition built from sampled edge sets `S_1..S_{L-1}` (one [`DenseSampler`]
//! per level), repaired after every update by draining dirty nodes level by level.
//!
//! Per rung and level `i` the engine keeps the sampled adjacency of `S_i` and the
//! counter `Degree_i[v] = |{w : (v,w) ∈ S_i, ℓ(w) >= i}|`. A level change of `w`
//! walks the sampled adjacency of `w` at every level it enters or leaves.

use serde::Serialize;

use crate::decomposition::level_count;
use crate::dynamic::{default_alpha, DynamicConfig, DynamicDensity};
use crate::graph::{edge_key, key_edge, DynamicGraph, GraphError, NodeId, UpdateEvent};
use crate::ledger::WorkLedger;
use crate::num::{ceil_log, Real};
use crate::sampling::{derive_seed, DenseSampler, HashMode, Occupancy, SamplerKind, SamplerOptions, SetDelta, SparseRecoverer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Sparse,
    Dense,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Sparse => "sparse",
            Regime::Dense => "dense",
        })
    }
}

/// Hysteresis on the edge count: dense once `m > enter`, sparse again once `m < exit`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeClassifier {
    pub state: Regime,
    pub enter_dense: f64,
    pub exit_dense: f64,
}

impl RegimeClassifier {
    pub fn new(enter_dense: f64, exit_dense: f64) -> Self {
        Self {
            state: Regime::Sparse,
            enter_dense,
            exit_dense,
        }
    }

    /// Classifies the step with edge count `m`; returns the new state if it changed.
    pub fn observe(&mut self, m: usize) -> Option<Regime> {
        let m = m as f64;
        let next = match self.state {
            Regime::Sparse if m > self.enter_dense => Regime::Dense,
            Regime::Dense if m < self.exit_dense => Regime::Sparse,
            s => s,
        };
        (next != self.state).then(|| {
            self.state = next;
            next
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamingConfig {
    pub epsilon: f64,
    /// `None` selects `2 + 3ε`.
    pub alpha: Option<f64>,
    pub c: f64,
    /// Scales the regime thresholds (and with them the sparse bucket count).
    pub threshold_scale: f64,
    /// Scales the number of samplers per sparse bucket. Only memory depends on it,
    /// since an update touches a single bucket.
    pub copies_scale: f64,
    /// Scales `λ = c ln n`, the sampled-degree unit of the dense path.
    pub sample_scale: f64,
    pub seed: u64,
    pub sampler: SamplerKind,
    pub hash_mode: HashMode,
    /// Independence of the bucket hashes; `None` uses `n ln² n`.
    pub independence: Option<usize>,
}

impl Default for StreamingConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            alpha: None,
            c: 1.0,
            threshold_scale: 0.03,
            copies_scale: 2.0,
            sample_scale: 1.0,
            seed: 0,
            sampler: SamplerKind::Reference,
            hash_mode: HashMode::Auto,
            independence: None,
        }
    }
}

impl StreamingConfig {
    /// One knob for the regime thresholds and the dense sampling rate.
    pub fn with_scale(self, scale: f64) -> Self {
        Self {
            threshold_scale: scale,
            sample_scale: scale,
            ..self
        }
    }
}

/// Quantities derived from the configuration and `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StreamingParams {
    pub n: usize,
    pub epsilon: f64,
    pub alpha: f64,
    /// `c ln n · sample_scale`
    pub lambda: f64,
    pub enter_dense: f64,
    pub exit_dense: f64,
    pub sparse_buckets: usize,
    pub sparse_copies: usize,
    pub levels: usize,
    pub rungs: usize,
    pub promote_above: f64,
    pub demote_below: f64,
    pub independence: usize,
}

impl StreamingParams {
    pub fn new(n: usize, config: &StreamingConfig) -> Self {
        let eps = config.epsilon;
        let alpha = config.alpha.unwrap_or_else(|| default_alpha(eps));
        let ln = (n.max(2) as f64).ln();
        let nf = n.max(1) as f64;
        let lambda = config.c * ln * config.sample_scale;
        let enter = 8.0 * alpha * config.c * config.c * nf * ln * ln * config.threshold_scale;
        let sigma = 2.0 * (1.0 + eps) * nf;
        Self {
            n,
            epsilon: eps,
            alpha,
            lambda,
            enter_dense: enter,
            exit_dense: enter / 2.0,
            sparse_buckets: enter.ceil().max(1.0) as usize,
            sparse_copies: (config.c * config.c * ln * ln * config.copies_scale).ceil().max(1.0) as usize,
            levels: level_count(n, eps),
            // smallest possible π is 1/(2αn), so this K covers [π, σ] at every step
            rungs: 2 + ceil_log(1.0 + eps, sigma * 2.0 * alpha * nf),
            promote_above: (1.0 - eps).powi(2) * alpha * lambda,
            demote_below: (1.0 + eps).powi(2) * lambda,
            independence: config.independence.unwrap_or((nf * ln * ln).ceil() as usize),
        }
    }

    /// Buckets per dense sampler on rung `k` (1-based): `2αnλ / (1+ε)^{k-1}`.
    pub fn samples_per_level(&self, k: usize) -> usize {
        let s = 2.0 * self.alpha * self.n as f64 * self.lambda / (1.0 + self.epsilon).powi(k as i32 - 1);
        s.ceil().max(1.0) as usize
    }

    /// `d_k` at edge count `m`, with `π = m/(2αn)`.
    pub fn threshold(&self, k: usize, m: usize) -> f64 {
        m as f64 / (2.0 * self.alpha * self.n as f64) * (1.0 + self.epsilon).powi(k as i32 - 1)
    }
}

/// Sampled decomposition of one rung.
#[derive(Debug, Clone)]
struct SampledRung {
    n: usize,
    /// `L - 1` samplers; index `i - 1` holds `S_i`
    samplers: Vec<DenseSampler>,
    /// sampled neighbors, `[(i - 1) * n + v]`
    adj: Vec<Vec<NodeId>>,
    level: Vec<u32>,
    /// `Degree_i[v]`, `[(i - 1) * n + v]`
    deg: Vec<u32>,
    cand: Vec<Vec<NodeId>>,
    marked: Vec<bool>,
    top: u32,
    at_top: usize,
    active: bool,
}

impl SampledRung {
    fn new(n: usize, levels: usize, buckets: usize, options: SamplerOptions, seed: u64) -> Self {
        let groups = levels - 1;
        Self {
            n,
            samplers: (0..groups)
                .map(|i| DenseSampler::new(buckets, options, derive_seed(seed, 21, i as u64)))
                .collect(),
            adj: vec![Vec::new(); groups * n],
            level: vec![1; n],
            deg: vec![0; groups * n],
            cand: vec![Vec::new(); groups],
            marked: vec![false; groups * n],
            top: levels as u32,
            at_top: 0,
            active: false,
        }
    }

    fn groups(&self) -> usize {
        self.samplers.len()
    }

    #[inline]
    fn slot(&self, i: u32, v: NodeId) -> usize {
        (i as usize - 1) * self.n + v as usize
    }

    fn push_cand(&mut self, i: u32, v: NodeId) {
        let s = self.slot(i, v);
        if !self.marked[s] {
            self.marked[s] = true;
            self.cand[i as usize - 1].push(v);
        }
    }

    /// Adds or removes sampled edge `(a, b)` of `S_i`.
    fn sampled_edge(&mut self, i: u32, a: NodeId, b: NodeId, add: bool, ledger: &mut WorkLedger) {
        for (x, y) in [(a, b), (b, a)] {
            let s = self.slot(i, x);
            if add {
                self.adj[s].push(y);
            } else {
                let p = self.adj[s].iter().position(|&z| z == y).expect("sampled edge present");
                self.adj[s].swap_remove(p);
            }
        }
        ledger.charge(1);
        if !self.active {
            return;
        }
        for (x, y) in [(a, b), (b, a)] {
            if self.level[y as usize] >= i {
                let s = self.slot(i, x);
                if add {
                    self.deg[s] += 1;
                } else {
                    self.deg[s] -= 1;
                }
                self.push_cand(i, x);
            }
        }
    }

    fn update(&mut self, key: u64, delta: i64, ledger: &mut WorkLedger) -> usize {
        let mut most = 0;
        for idx in 0..self.samplers.len() {
            ledger.charge(1);
            if let Some(ch) = self.samplers[idx].update(key, delta) {
                let i = idx as u32 + 1;
                let mut changed = 0;
                for (k, add) in [(ch.old, false), (ch.new, true)] {
                    if let Some(k) = k {
                        let (a, b) = key_edge(k, self.n);
                        self.sampled_edge(i, a, b, add, ledger);
                        changed += 1;
                    }
                }
                most = most.max(changed);
            }
        }
        most
    }

    /// INITIALIZE: every node at level 1, then a full repair.
    fn initialize(&mut self, p: &StreamingParams, ledger: &mut WorkLedger) {
        self.active = true;
        self.level.iter_mut().for_each(|l| *l = 1);
        self.deg.iter_mut().for_each(|d| *d = 0);
        self.marked.iter_mut().for_each(|m| *m = false);
        self.cand.iter_mut().for_each(Vec::clear);
        self.at_top = 0;
        for v in 0..self.n as NodeId {
            let s = self.slot(1, v);
            self.deg[s] = self.adj[s].len() as u32;
            self.push_cand(1, v);
        }
        ledger.charge((self.n * self.groups()) as u64);
        self.recover(p, ledger);
    }

    fn deactivate(&mut self) {
        self.active = false;
        self.at_top = 0;
    }

    fn set_level(&mut self, w: NodeId, to: u32, ledger: &mut WorkLedger) {
        let from = self.level[w as usize];
        self.level[w as usize] = to;
        let groups = self.groups() as u32;
        if from == self.top {
            self.at_top -= 1;
        }
        if to == self.top {
            self.at_top += 1;
        }
        let (lo, hi, up) = if to > from { (from + 1, to, true) } else { (to + 1, from, false) };
        let mut work = 1u64;
        for j in lo..=hi.min(groups) {
            let s = self.slot(j, w);
            let nbrs = std::mem::take(&mut self.adj[s]);
            work += nbrs.len() as u64;
            for &x in &nbrs {
                let t = self.slot(j, x);
                if up {
                    self.deg[t] += 1;
                } else {
                    self.deg[t] -= 1;
                }
                self.push_cand(j, x);
            }
            self.adj[s] = nbrs;
        }
        if up && to <= groups {
            self.push_cand(to, w);
        }
        ledger.charge(work);
    }

    /// RECOVER-SAMPLE: for `i = 1..L-1`, promote nodes at level `i` whose sampled
    /// degree exceeds the promotion threshold and demote nodes above `i` whose
    /// sampled degree falls below the demotion threshold down to `i`.
    fn recover(&mut self, p: &StreamingParams, ledger: &mut WorkLedger) {
        for i in 1..=self.groups() as u32 {
            if self.cand[i as usize - 1].is_empty() {
                continue;
            }
            let batch = std::mem::take(&mut self.cand[i as usize - 1]);
            // Moves made at level i never change Degree_i, so one pass suffices.
            for &v in &batch {
                let s = self.slot(i, v);
                self.marked[s] = false;
                let l = self.level[v as usize];
                let d = self.deg[s] as f64;
                if l == i && d > p.promote_above {
                    self.set_level(v, i + 1, ledger);
                } else if l > i && d < p.demote_below {
                    self.set_level(v, i, ledger);
                }
            }
            let mut batch = batch;
            batch.clear();
            if self.cand[i as usize - 1].is_empty() {
                self.cand[i as usize - 1] = batch;
            }
        }
    }
}

/// Snapshot of the engine after one update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StreamingStatus {
    pub regime: Regime,
    pub m: usize,
    pub output: f64,
    pub work_total: u64,
    pub sampler_failures: usize,
}

/// The small-space dynamic estimator.
#[derive(Debug, Clone)]
pub struct DynamicStreaming<T: Real> {
    params: StreamingParams,
    config: StreamingConfig,
    classifier: RegimeClassifier,
    graph: DynamicGraph,
    sparse: SparseRecoverer,
    engine: DynamicDensity<T>,
    rungs: Vec<SampledRung>,
    ledger: WorkLedger,
    delta: SetDelta,
    transitions: usize,
    max_sample_changes: usize,
}

impl<T: Real> DynamicStreaming<T> {
    pub fn new(n: usize, config: StreamingConfig) -> Self {
        let params = StreamingParams::new(n, &config);
        let options = SamplerOptions {
            kind: config.sampler,
            hash_mode: config.hash_mode,
            independence: params.independence,
            universe: (n * n).max(2) as u64,
        };
        let sparse = SparseRecoverer::new(
            params.sparse_buckets,
            params.sparse_copies,
            options,
            derive_seed(config.seed, 20, 0),
        );
        let rungs = (1..=params.rungs)
            .map(|k| {
                SampledRung::new(
                    n,
                    params.levels,
                    params.samples_per_level(k),
                    options,
                    derive_seed(config.seed, 22, k as u64),
                )
            })
            .collect();
        Self {
            classifier: RegimeClassifier::new(params.enter_dense, params.exit_dense),
            graph: DynamicGraph::new(n),
            sparse,
            engine: Self::fresh_engine(n, &config),
            rungs,
            ledger: WorkLedger::new(),
            delta: SetDelta::default(),
            transitions: 0,
            max_sample_changes: 0,
            params,
            config,
        }
    }

    fn fresh_engine(n: usize, config: &StreamingConfig) -> DynamicDensity<T> {
        DynamicDensity::new(
            n,
            DynamicConfig {
                epsilon: config.epsilon,
                alpha: config.alpha,
            },
        )
    }

    pub fn set_ledger(&mut self, ledger: WorkLedger) {
        self.ledger = ledger;
    }

    pub fn params(&self) -> &StreamingParams {
        &self.params
    }

    pub fn config(&self) -> &StreamingConfig {
        &self.config
    }

    pub fn regime(&self) -> Regime {
        self.classifier.state
    }

    pub fn m(&self) -> usize {
        self.graph.m()
    }

    /// The exact graph, kept only to reject illegal updates and for inspection.
    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    pub fn ledger(&self) -> &WorkLedger {
        &self.ledger
    }

    pub fn work_total(&self) -> u64 {
        self.ledger.total()
    }

    /// Number of regime changes so far.
    pub fn transitions(&self) -> usize {
        self.transitions
    }

    /// Samplers whose current emission is `Fail`.
    pub fn sampler_failures(&self) -> usize {
        self.sparse.failing() + self.rungs.iter().flat_map(|r| &r.samplers).map(DenseSampler::failing).sum::<usize>()
    }

    /// Largest number of sampled-set changes any single dense sampler saw in one update.
    pub fn max_sample_changes(&self) -> usize {
        self.max_sample_changes
    }

    /// The recovered set `F`, sorted.
    pub fn recovered(&self) -> Vec<u64> {
        self.sparse.snapshot()
    }

    pub fn sparse_engine(&self) -> &DynamicDensity<T> {
        &self.engine
    }

    /// Levels of rung `k` (1-based) while the dense path is active.
    pub fn dense_levels(&self, k: usize) -> Option<&[u32]> {
        let r = &self.rungs[k - 1];
        r.active.then_some(r.level.as_slice())
    }

    /// Current `S_i` of rung `k`, as edge keys in bucket order.
    pub fn dense_samples(&self, k: usize, i: usize) -> Vec<u64> {
        self.rungs[k - 1].samplers[i - 1].snapshot()
    }

    /// `d_k` at the current edge count.
    pub fn dense_threshold(&self, k: usize) -> f64 {
        self.params.threshold(k, self.m())
    }

    pub fn sparse_occupancy(&self) -> Occupancy {
        self.sparse.occupancy()
    }

    pub fn dense_occupancy(&self, k: usize, i: usize) -> Occupancy {
        self.rungs[k - 1].samplers[i - 1].occupancy()
    }

    pub fn apply(&mut self, event: &UpdateEvent) -> Result<(), GraphError> {
        let (u, v, delta) = match *event {
            UpdateEvent::Insert(u, v) => (u, v, 1),
            UpdateEvent::Delete(u, v) => (u, v, -1),
            UpdateEvent::Query => return Ok(()),
        };
        self.graph.apply(event)?;
        let key = edge_key(u, v, self.graph.n());

        self.ledger.charge(self.sparse.per_bucket() as u64);
        self.sparse.update(key, delta, &mut self.delta);
        if self.classifier.state == Regime::Sparse {
            let before = self.engine.ledger().total();
            Self::feed(&mut self.engine, &self.delta, self.graph.n());
            self.ledger.charge(self.engine.ledger().total() - before);
        }

        for rung in &mut self.rungs {
            let changed = rung.update(key, delta, &mut self.ledger);
            self.max_sample_changes = self.max_sample_changes.max(changed);
        }

        match self.classifier.observe(self.graph.m()) {
            Some(Regime::Dense) => {
                self.transitions += 1;
                self.engine = Self::fresh_engine(self.graph.n(), &self.config);
                for rung in &mut self.rungs {
                    rung.initialize(&self.params, &mut self.ledger);
                }
            }
            Some(Regime::Sparse) => {
                self.transitions += 1;
                for rung in &mut self.rungs {
                    rung.deactivate();
                }
                let mut engine = Self::fresh_engine(self.graph.n(), &self.config);
                for k in self.sparse.snapshot() {
                    let (a, b) = key_edge(k, self.graph.n());
                    engine.insert(a, b).expect("recovered edges are distinct");
                }
                self.ledger.charge(engine.ledger().total() + engine.m() as u64);
                self.engine = engine;
            }
            None => {
                if self.classifier.state == Regime::Dense {
                    for rung in &mut self.rungs {
                        rung.recover(&self.params, &mut self.ledger);
                    }
                }
            }
        }
        self.ledger.end_event();
        Ok(())
    }

    fn feed(engine: &mut DynamicDensity<T>, delta: &SetDelta, n: usize) {
        for &k in &delta.removed {
            let (a, b) = key_edge(k, n);
            engine.delete(a, b).expect("recovered edge present");
        }
        for &k in &delta.added {
            let (a, b) = key_edge(k, n);
            engine.insert(a, b).expect("recovered edge absent");
        }
    }

    /// Largest 1-based rung whose top level is nonempty (dense path only).
    pub fn dense_k_prime(&self) -> Option<usize> {
        self.rungs.iter().rposition(|r| r.active && r.at_top > 0).map(|k| k + 1)
    }

    pub fn query(&self) -> T {
        if self.m() == 0 {
            return T::zero_value();
        }
        match self.classifier.state {
            Regime::Sparse => self.engine.query_value(),
            Regime::Dense => match self.dense_k_prime() {
                Some(k) => T::of(self.params.threshold(k, self.m()) / (2.0 * (1.0 + self.params.epsilon).powi(2))),
                None => T::zero_value(),
            },
        }
    }

    pub fn status(&self) -> StreamingStatus {
        StreamingStatus {
            regime: self.regime(),
            m: self.m(),
            output: self.query().as_f64(),
            work_total: self.work_total(),
            sampler_failures: self.sampler_failures(),
        }
    }
}
