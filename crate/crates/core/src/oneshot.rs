//! Single-pass estimator: keep a bank of independent edge samplers and an edge
//! counter, then build one sampled decomposition per threshold at the end.

use thiserror::Error;

use crate::decomposition::level_count;
use crate::graph::{edge_key, key_edge, DynamicGraph, GraphError, UpdateEvent};
use crate::num::ceil_log;
use crate::sampling::hash::keyed_mix;
use crate::sampling::l0::{SketchL0, DEFAULT_REPETITIONS};
use crate::sampling::{derive_seed, L0Output, SamplerKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OneshotError {
    #[error("sample bank holds {available} samplers but the ladder needs {needed}; raise the bank or lower the scale")]
    InsufficientSamples { needed: usize, available: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneshotConfig {
    pub epsilon: f64,
    /// Sampling constant `c`; the per-group budget is `λ = c · ln n · scale`.
    pub c: f64,
    pub scale: f64,
    pub seed: u64,
    pub sampler: SamplerKind,
    /// Caps the bank below `λ* K*` (the full bank is used when `None`).
    pub bank_limit: Option<usize>,
}

impl Default for OneshotConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            c: 4.0,
            scale: 1.0,
            seed: 0,
            sampler: SamplerKind::Reference,
            bank_limit: None,
        }
    }
}

/// `α = (1+ε)/(1-ε)`.
pub fn oneshot_alpha(epsilon: f64) -> f64 {
    (1.0 + epsilon) / (1.0 - epsilon)
}

/// Bank of independent uniform edge samplers.
///
/// The reference bank stores the edge set once; sampler `j` returns the edge at
/// position `floor(u_j · m)` of the sorted key list, with `u_j` drawn from its own
/// seed. Each sampler is then an independent uniform draw from the final `E`,
/// which is the distribution of independent exact ℓ0-samplers. The sketch bank
/// keeps one real sketch per sampler and is only practical for small banks.
#[derive(Debug, Clone)]
enum Bank {
    Reference { seed: u64, graph: DynamicGraph },
    Sketch(Vec<SketchL0>),
}

/// Result of [`OneshotStream::finalize`].
#[derive(Debug, Clone, PartialEq)]
pub struct OneshotEstimate {
    pub value: f64,
    pub k_prime: Option<usize>,
    pub rungs: usize,
    pub samples_used: usize,
    pub sampler_failures: usize,
}

#[derive(Debug, Clone)]
pub struct OneshotStream {
    n: usize,
    config: OneshotConfig,
    alpha: f64,
    num_levels: usize,
    m: i64,
    bank_size: usize,
    bank: Bank,
    presence: DynamicGraph,
}

impl OneshotStream {
    pub fn new(n: usize, config: OneshotConfig) -> Self {
        let alpha = oneshot_alpha(config.epsilon);
        let num_levels = level_count(n, config.epsilon);
        let lambda = Self::lambda_for(n, &config);
        let lambda_star = (2.0 * alpha * n as f64 * (num_levels - 1) as f64 * lambda).ceil() as usize;
        let k_star = 2 + ceil_log(1.0 + config.epsilon, 8.0 * alpha * (n * n) as f64);
        let full = lambda_star * k_star;
        let bank_size = config.bank_limit.map_or(full, |l| l.min(full));
        let bank = match config.sampler {
            SamplerKind::Reference => Bank::Reference {
                seed: config.seed,
                graph: DynamicGraph::new(n),
            },
            SamplerKind::Sketch => {
                let universe = (n * n).max(2) as u64;
                Bank::Sketch(
                    (0..bank_size)
                        .map(|j| SketchL0::new(derive_seed(config.seed, 10, j as u64), universe, DEFAULT_REPETITIONS))
                        .collect(),
                )
            }
        };
        Self {
            n,
            config,
            alpha,
            num_levels,
            m: 0,
            bank_size,
            bank,
            presence: DynamicGraph::new(n),
        }
    }

    fn lambda_for(n: usize, config: &OneshotConfig) -> f64 {
        config.c * (n.max(2) as f64).ln() * config.scale
    }

    pub fn lambda(&self) -> f64 {
        Self::lambda_for(self.n, &self.config)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn num_levels(&self) -> usize {
        self.num_levels
    }

    /// Number of samplers in the bank.
    pub fn bank_size(&self) -> usize {
        self.bank_size
    }

    /// The edge counter.
    pub fn m(&self) -> i64 {
        self.m
    }

    pub fn ingest(&mut self, event: &UpdateEvent) -> Result<(), GraphError> {
        let (u, v, delta) = match *event {
            UpdateEvent::Insert(u, v) => (u, v, 1),
            UpdateEvent::Delete(u, v) => (u, v, -1),
            UpdateEvent::Query => return Ok(()),
        };
        self.presence.apply(event)?;
        self.m += delta;
        let key = edge_key(u, v, self.n);
        match &mut self.bank {
            Bank::Reference { graph, .. } => graph.apply(event)?,
            Bank::Sketch(samplers) => {
                for s in samplers.iter_mut() {
                    s.update(key, delta);
                }
            }
        }
        Ok(())
    }

    /// Output of sampler `j` at the current point of the stream.
    pub fn emit(&self, j: usize) -> L0Output {
        match &self.bank {
            Bank::Reference { seed, graph } => {
                let m = graph.m();
                if m == 0 {
                    return L0Output::Empty;
                }
                let mut keys: Vec<u64> = graph.edges().iter().map(|&(a, b)| edge_key(a, b, self.n)).collect();
                keys.sort_unstable();
                L0Output::Key(keys[Self::reference_index(*seed, j, m)])
            }
            Bank::Sketch(samplers) => samplers[j].emit(),
        }
    }

    fn reference_index(seed: u64, j: usize, m: usize) -> usize {
        let u = keyed_mix(j as u64, derive_seed(seed, 11, 0));
        ((u as u128 * m as u128) >> 64) as usize
    }

    /// Group size for rung `k` (1-based): `ceil(c m ln n · scale / d_k)`, which with
    /// `π = m/(2αn)` equals `ceil(2αnλ / (1+ε)^{k-1})`.
    pub fn group_size(&self, k: usize) -> usize {
        let lambda = self.lambda();
        (2.0 * self.alpha * self.n as f64 * lambda / (1.0 + self.config.epsilon).powi(k as i32 - 1)).ceil() as usize
    }

    /// Builds the sampled decompositions and returns `d_{k'} / (2(1+ε)^2)`.
    pub fn finalize(&self) -> Result<OneshotEstimate, OneshotError> {
        let eps = self.config.epsilon;
        if self.m <= 0 {
            return Ok(OneshotEstimate {
                value: 0.0,
                k_prime: None,
                rungs: 0,
                samples_used: 0,
                sampler_failures: 0,
            });
        }
        let n = self.n;
        let m = self.m as f64;
        let pi = m / (2.0 * self.alpha * n as f64);
        let sigma = 2.0 * (1.0 + eps) * n as f64;
        let rungs = 2 + ceil_log(1.0 + eps, sigma / pi);
        let groups = self.num_levels - 1;
        let mut offsets = Vec::with_capacity(rungs + 1);
        let mut total = 0usize;
        for k in 1..=rungs {
            offsets.push(total);
            total += self.group_size(k) * groups;
        }
        if total > self.bank_size {
            return Err(OneshotError::InsufficientSamples {
                needed: total,
                available: self.bank_size,
            });
        }

        let draw = self.sample_source();
        let threshold = (1.0 - eps) * self.alpha * self.lambda();
        let mut failures = 0usize;
        let mut used = 0usize;
        let mut in_z = vec![true; n];
        let mut deg = vec![0u32; n];
        let mut k_prime = None;
        // the largest rung with a nonempty top level is the only one needed
        for k in (1..=rungs).rev() {
            let g = self.group_size(k);
            in_z.iter_mut().for_each(|x| *x = true);
            let mut alive = n;
            for i in 0..groups {
                deg.iter_mut().for_each(|x| *x = 0);
                let base = offsets[k - 1] + i * g;
                for j in base..base + g {
                    used += 1;
                    match draw(j) {
                        L0Output::Key(key) => {
                            let (a, b) = key_edge(key, n);
                            if in_z[a as usize] && in_z[b as usize] {
                                deg[a as usize] += 1;
                                deg[b as usize] += 1;
                            }
                        }
                        L0Output::Fail => failures += 1,
                        L0Output::Empty => {}
                    }
                }
                for v in 0..n {
                    if in_z[v] && (deg[v] as f64) < threshold {
                        in_z[v] = false;
                        alive -= 1;
                    }
                }
                if alive == 0 {
                    break;
                }
            }
            if alive > 0 {
                k_prime = Some(k);
                break;
            }
        }
        let value = k_prime.map_or(0.0, |k| pi * (1.0 + eps).powi(k as i32 - 1) / (2.0 * (1.0 + eps).powi(2)));
        Ok(OneshotEstimate {
            value,
            k_prime,
            rungs,
            samples_used: used,
            sampler_failures: failures,
        })
    }

    fn sample_source(&self) -> Box<dyn Fn(usize) -> L0Output + '_> {
        match &self.bank {
            Bank::Reference { seed, graph } => {
                let mut keys: Vec<u64> = graph.edges().iter().map(|&(a, b)| edge_key(a, b, self.n)).collect();
                keys.sort_unstable();
                let seed = *seed;
                Box::new(move |j| {
                    if keys.is_empty() {
                        L0Output::Empty
                    } else {
                        L0Output::Key(keys[Self::reference_index(seed, j, keys.len())])
                    }
                })
            }
            Bank::Sketch(samplers) => Box::new(move |j| samplers[j].emit()),
        }
    }

    /// The exact graph seen so far (kept only to validate stream legality).
    pub fn graph(&self) -> &DynamicGraph {
        &self.presence
    }
}

/// Convenience: run a whole event sequence and finalize.
pub fn estimate(n: usize, events: &[UpdateEvent], config: OneshotConfig) -> Result<OneshotEstimate, OneshotError> {
    let mut s = OneshotStream::new(n, config);
    for e in events {
        s.ingest(e)?;
    }
    s.finalize()
}
