//! Replays a stream file through one engine and produces per-checkpoint records.

use serde::Serialize;
use thiserror::Error;

use crate::directed::{DirectedConfig, DirectedDensity};
use crate::dynamic::{default_alpha, DynamicConfig, DynamicDensity};
use crate::graph::{DirectedDynamicGraph, DynamicGraph, GraphError, NodeId, UpdateEvent};
use crate::num::Rational;
use crate::oneshot::{oneshot_alpha, OneshotConfig, OneshotError, OneshotStream};
use crate::oracles::{charikar_peel, exact_directed, exact_undirected, exact_undirected_bruteforce, CapExceeded};
use crate::sampling::{HashMode, Occupancy, SamplerKind};
use crate::stream::StreamFile;
use crate::streaming::{DynamicStreaming, Regime, StreamingConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Full,
    Oneshot,
    Stream,
    Directed,
    Oracle,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Mode::Full),
            "oneshot" => Ok(Mode::Oneshot),
            "stream" => Ok(Mode::Stream),
            "directed" => Ok(Mode::Directed),
            "oracle" => Ok(Mode::Oracle),
            other => Err(format!("unknown mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleAlgo {
    #[default]
    Flow,
    Brute,
    Directed,
    Charikar,
}

impl std::str::FromStr for OracleAlgo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "flow" => Ok(OracleAlgo::Flow),
            "brute" => Ok(OracleAlgo::Brute),
            "directed" => Ok(OracleAlgo::Directed),
            "charikar" => Ok(OracleAlgo::Charikar),
            other => Err(format!("unknown oracle {other:?}")),
        }
    }
}

/// `α` as configured: a number, or resolved per mode.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum AlphaChoice {
    #[default]
    Auto,
    Value(f64),
}

impl std::str::FromStr for AlphaChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(AlphaChoice::Auto);
        }
        let a: f64 = s.parse().map_err(|_| format!("alpha must be a number or \"auto\", got {s:?}"))?;
        if a < 1.0 || !a.is_finite() {
            return Err(format!("alpha must be at least 1, got {a}"));
        }
        Ok(AlphaChoice::Value(a))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    /// `None` picks 0.25 in directed mode and 0.1 elsewhere.
    pub epsilon: Option<f64>,
    pub alpha: AlphaChoice,
    /// `None` keeps each engine's defaults.
    pub scale: Option<f64>,
    /// Overrides only the dense sampling scale in stream mode.
    pub sample_scale: Option<f64>,
    pub seed: u64,
    pub checkpoint_every: Option<usize>,
    pub algo: OracleAlgo,
    pub sampler: SamplerKind,
    pub hash_mode: HashMode,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Full,
            epsilon: None,
            alpha: AlphaChoice::Auto,
            scale: None,
            sample_scale: None,
            seed: 0,
            checkpoint_every: None,
            algo: OracleAlgo::Flow,
            sampler: SamplerKind::Reference,
            hash_mode: HashMode::Auto,
        }
    }
}

impl RunConfig {
    pub fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or(if self.mode == Mode::Directed { 0.25 } else { 0.1 })
    }

    /// `(1+ε)/(1-ε)` for the one-shot estimator, `2 + 3ε` for the others.
    pub fn alpha(&self) -> f64 {
        match self.alpha {
            AlphaChoice::Value(a) => a,
            AlphaChoice::Auto if self.mode == Mode::Oneshot => oneshot_alpha(self.epsilon()),
            AlphaChoice::Auto => default_alpha(self.epsilon()),
        }
    }

    /// Ratio bound `Opt/Output` promised by the engine.
    pub fn ratio_bound(&self) -> f64 {
        let e = self.epsilon();
        match self.mode {
            Mode::Directed => 4.0 * self.alpha() * (1.0 + e).powf(1.5),
            Mode::Oracle => 1.0,
            _ => 2.0 * self.alpha() * (1.0 + e).powi(3),
        }
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let e = self.epsilon();
        if !(e > 0.0 && e < 1.0) {
            return Err(RunError::Config(format!("epsilon must lie in (0, 1), got {e}")));
        }
        for s in [self.scale, self.sample_scale].into_iter().flatten() {
            if !(s > 0.0 && s.is_finite()) {
                return Err(RunError::Config(format!("scale must be positive, got {s}")));
            }
        }
        if self.checkpoint_every == Some(0) {
            return Err(RunError::Config("checkpoint interval must be positive".into()));
        }
        Ok(())
    }

    fn streaming(&self) -> StreamingConfig {
        let mut c = StreamingConfig {
            epsilon: self.epsilon(),
            alpha: Some(self.alpha()),
            seed: self.seed,
            sampler: self.sampler,
            hash_mode: self.hash_mode,
            ..StreamingConfig::default()
        };
        if let Some(s) = self.scale {
            c = c.with_scale(s);
        }
        if let Some(s) = self.sample_scale {
            c.sample_scale = s;
        }
        c
    }

    fn oneshot(&self) -> OneshotConfig {
        OneshotConfig {
            epsilon: self.epsilon(),
            scale: self.scale.unwrap_or(1.0),
            seed: self.seed,
            sampler: self.sampler,
            ..OneshotConfig::default()
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("line {line}: {source}")]
    Precondition { line: usize, source: GraphError },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Cap(#[from] CapExceeded),
    #[error("{0}")]
    Oneshot(OneshotError),
    #[error("{mode:?} mode cannot replay this stream (directed={directed})")]
    Directedness { mode: Mode, directed: bool },
}

impl RunError {
    /// Precondition failures exit with 3, configuration problems with 2.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            _ => 3,
        }
    }
}

/// One JSON line.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum CheckpointRecord {
    Full {
        step: usize,
        m: usize,
        output: f64,
        k_prime: Option<usize>,
        work_total: u64,
    },
    Oneshot {
        step: usize,
        m: i64,
        output: f64,
        k_prime: Option<usize>,
        samples_used: usize,
        sampler_failures: usize,
    },
    Stream {
        step: usize,
        regime: Regime,
        m: usize,
        output: f64,
        work_total: u64,
        sampler_failures: usize,
    },
    Directed {
        step: usize,
        m: usize,
        output: f64,
        gamma: f64,
        work_total: u64,
    },
    Oracle {
        step: usize,
        m: usize,
        algo: OracleAlgo,
        density: String,
        density_f64: f64,
        witness: Vec<NodeId>,
        #[serde(skip_serializing_if = "Option::is_none")]
        witness_in: Option<Vec<NodeId>>,
    },
}

impl CheckpointRecord {
    pub fn step(&self) -> usize {
        match *self {
            CheckpointRecord::Full { step, .. }
            | CheckpointRecord::Oneshot { step, .. }
            | CheckpointRecord::Stream { step, .. }
            | CheckpointRecord::Directed { step, .. }
            | CheckpointRecord::Oracle { step, .. } => step,
        }
    }

    pub fn output(&self) -> f64 {
        match *self {
            CheckpointRecord::Full { output, .. }
            | CheckpointRecord::Oneshot { output, .. }
            | CheckpointRecord::Stream { output, .. }
            | CheckpointRecord::Directed { output, .. } => output,
            CheckpointRecord::Oracle { density_f64, .. } => density_f64,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }
}

/// Events with checkpoints synthesized every `every` updates, tagged with source lines.
fn schedule(stream: &StreamFile, every: Option<usize>) -> Vec<(usize, UpdateEvent)> {
    let mut out = Vec::with_capacity(stream.records.len());
    let mut updates = 0usize;
    for (i, r) in stream.records.iter().enumerate() {
        out.push((r.line, r.event));
        if r.event.is_update() {
            updates += 1;
            // the file's own `?` right after already covers this step
            let explicit_next = stream.records.get(i + 1).is_some_and(|next| !next.event.is_update());
            if every.is_some_and(|k| updates.is_multiple_of(k)) && !explicit_next {
                out.push((r.line, UpdateEvent::Query));
            }
        }
    }
    out
}

fn rational_text(r: Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Replays `stream` under `config`, returning one record per checkpoint.
pub fn run(config: &RunConfig, stream: &StreamFile) -> Result<Vec<CheckpointRecord>, RunError> {
    config.validate()?;
    let wants_directed = match config.mode {
        Mode::Directed => Some(true),
        Mode::Oracle => None,
        _ => Some(false),
    };
    if wants_directed.is_some_and(|d| d != stream.directed) {
        return Err(RunError::Directedness {
            mode: config.mode,
            directed: stream.directed,
        });
    }
    let events = schedule(stream, config.checkpoint_every);
    let n = stream.n;
    let precondition = |line: usize| move |source: GraphError| RunError::Precondition { line, source };
    let mut records = Vec::new();
    let mut step = 0usize;
    match config.mode {
        Mode::Full => {
            let mut e = DynamicDensity::<f64>::new(
                n,
                DynamicConfig {
                    epsilon: config.epsilon(),
                    alpha: Some(config.alpha()),
                },
            );
            for (line, ev) in events {
                if ev.is_update() {
                    e.apply(&ev).map_err(precondition(line))?;
                    step += 1;
                } else {
                    records.push(CheckpointRecord::Full {
                        step,
                        m: e.m(),
                        output: e.query_value(),
                        k_prime: e.k_prime(),
                        work_total: e.ledger().total(),
                    });
                }
            }
        }
        Mode::Oneshot => {
            let mut e = OneshotStream::new(n, config.oneshot());
            for (line, ev) in events {
                if ev.is_update() {
                    e.ingest(&ev).map_err(precondition(line))?;
                    step += 1;
                }
            }
            let est = e.finalize().map_err(RunError::Oneshot)?;
            records.push(CheckpointRecord::Oneshot {
                step,
                m: e.m(),
                output: est.value,
                k_prime: est.k_prime,
                samples_used: est.samples_used,
                sampler_failures: est.sampler_failures,
            });
        }
        Mode::Stream => {
            let mut e = DynamicStreaming::<f64>::new(n, config.streaming());
            for (line, ev) in events {
                if ev.is_update() {
                    e.apply(&ev).map_err(precondition(line))?;
                    step += 1;
                } else {
                    let s = e.status();
                    records.push(CheckpointRecord::Stream {
                        step,
                        regime: s.regime,
                        m: s.m,
                        output: s.output,
                        work_total: s.work_total,
                        sampler_failures: s.sampler_failures,
                    });
                }
            }
        }
        Mode::Directed => {
            let mut e = DirectedDensity::<f64>::new(
                n,
                DirectedConfig {
                    epsilon: config.epsilon(),
                    alpha: Some(config.alpha()),
                },
            );
            for (line, ev) in events {
                if ev.is_update() {
                    e.apply(&ev).map_err(precondition(line))?;
                    step += 1;
                } else {
                    records.push(CheckpointRecord::Directed {
                        step,
                        m: e.m(),
                        output: e.query(),
                        gamma: e.gamma(),
                        work_total: e.ledger().total(),
                    });
                }
            }
        }
        Mode::Oracle => {
            if config.algo == OracleAlgo::Directed || stream.directed {
                let mut g = DirectedDynamicGraph::new(n);
                for (line, ev) in events {
                    if ev.is_update() {
                        g.apply(&ev).map_err(precondition(line))?;
                        step += 1;
                    } else {
                        let r = exact_directed(&g)?;
                        records.push(CheckpointRecord::Oracle {
                            step,
                            m: g.m(),
                            algo: OracleAlgo::Directed,
                            density: format!("sqrt({})", rational_text(r.density_squared)),
                            density_f64: r.density,
                            witness: r.x,
                            witness_in: Some(r.y),
                        });
                    }
                }
            } else {
                let mut g = DynamicGraph::new(n);
                for (line, ev) in events {
                    if ev.is_update() {
                        g.apply(&ev).map_err(precondition(line))?;
                        step += 1;
                    } else {
                        let r = match config.algo {
                            OracleAlgo::Brute => exact_undirected_bruteforce(&g)?,
                            OracleAlgo::Charikar => charikar_peel(&g),
                            _ => exact_undirected(&g)?,
                        };
                        records.push(CheckpointRecord::Oracle {
                            step,
                            m: g.m(),
                            algo: config.algo,
                            density: rational_text(r.density),
                            density_f64: num_traits::ToPrimitive::to_f64(&r.density).unwrap_or(f64::NAN),
                            witness: r.witness,
                            witness_in: None,
                        });
                    }
                }
            }
        }
    }
    Ok(records)
}

/// One compared checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparedCheckpoint {
    pub trial: u64,
    pub step: usize,
    pub opt: f64,
    pub output: f64,
    pub ratio: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub mode: Mode,
    pub bound: f64,
    pub trials: u64,
    pub checkpoints: Vec<ComparedCheckpoint>,
    pub max_ratio: f64,
    pub failures: usize,
    pub failed_trials: u64,
}

/// `Opt/Output`, with `0/0 = 1`.
pub fn ratio(opt: f64, output: f64) -> f64 {
    if opt == 0.0 && output == 0.0 {
        1.0
    } else if output == 0.0 {
        f64::INFINITY
    } else {
        opt / output
    }
}

/// Runs `trials` seeds starting at `config.seed` and compares each checkpoint with the
/// exact optimum at the same step.
pub fn compare(config: &RunConfig, stream: &StreamFile, trials: u64) -> Result<CompareReport, RunError> {
    if config.mode == Mode::Oracle {
        return Err(RunError::Config("compare needs an engine mode".into()));
    }
    let truth = RunConfig {
        mode: Mode::Oracle,
        algo: if config.mode == Mode::Directed { OracleAlgo::Directed } else { OracleAlgo::Flow },
        checkpoint_every: config.checkpoint_every,
        ..RunConfig::default()
    };
    let opt: Vec<(usize, f64)> = run(&truth, stream)?.iter().map(|r| (r.step(), r.output())).collect();
    let bound = config.ratio_bound();
    let mut checkpoints = Vec::new();
    let mut failed_trials = 0;
    for t in 0..trials.max(1) {
        let cfg = RunConfig {
            seed: config.seed + t,
            ..config.clone()
        };
        let mut trial_ok = true;
        for rec in run(&cfg, stream)? {
            // the one-shot engine reports once, at the end
            let Some(&(_, o)) = opt.iter().rev().find(|(s, _)| *s == rec.step()) else {
                continue;
            };
            let out = rec.output();
            let r = ratio(o, out);
            let ok = out <= o * (1.0 + 1e-9) && r <= bound;
            trial_ok &= ok;
            checkpoints.push(ComparedCheckpoint {
                trial: t,
                step: rec.step(),
                opt: o,
                output: out,
                ratio: r,
                ok,
            });
        }
        failed_trials += (!trial_ok) as u64;
    }
    Ok(CompareReport {
        mode: config.mode,
        bound,
        trials: trials.max(1),
        max_ratio: checkpoints.iter().map(|c| c.ratio).fold(0.0, f64::max),
        failures: checkpoints.iter().filter(|c| !c.ok).count(),
        failed_trials,
        checkpoints,
    })
}

/// Sampler occupancy after replaying a stream in stream mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub n: usize,
    pub m: usize,
    pub regime: Regime,
    pub sparse: Occupancy,
    /// One entry per rung: occupancy of its level-1 sampler.
    pub dense: Vec<Occupancy>,
    pub sampler_failures: usize,
}

pub fn diagnostics(config: &RunConfig, stream: &StreamFile) -> Result<DiagnosticsReport, RunError> {
    config.validate()?;
    if stream.directed {
        return Err(RunError::Directedness {
            mode: Mode::Stream,
            directed: true,
        });
    }
    let mut e = DynamicStreaming::<f64>::new(stream.n, config.streaming());
    for r in &stream.records {
        e.apply(&r.event).map_err(|source| RunError::Precondition { line: r.line, source })?;
    }
    Ok(DiagnosticsReport {
        n: stream.n,
        m: e.m(),
        regime: e.regime(),
        sparse: e.sparse_occupancy(),
        dense: (1..=e.params().rungs).map(|k| e.dense_occupancy(k, 1)).collect(),
        sampler_failures: e.sampler_failures(),
    })
}

/// Replays in full mode and returns the decomposition of rung `k` (1-based); `None`
/// selects the largest rung with a nonempty top level, or rung 1.
pub fn dump(config: &RunConfig, stream: &StreamFile, rung: Option<usize>) -> Result<crate::decomposition::DecompositionDump, RunError> {
    config.validate()?;
    if stream.directed {
        return Err(RunError::Directedness {
            mode: Mode::Full,
            directed: true,
        });
    }
    let mut e = DynamicDensity::<f64>::new(
        stream.n,
        DynamicConfig {
            epsilon: config.epsilon(),
            alpha: Some(config.alpha()),
        },
    );
    for r in &stream.records {
        e.apply(&r.event).map_err(|source| RunError::Precondition { line: r.line, source })?;
    }
    let k = rung.unwrap_or_else(|| e.k_prime().unwrap_or(1));
    if k == 0 || k > e.ladder().len() {
        return Err(RunError::Config(format!("rung must lie in 1..={}", e.ladder().len())));
    }
    Ok((&e.decomposition(k)).into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::clique_buildup;
    use crate::stream::parse_stream;

    #[test]
    fn one_record_per_query() {
        let s = parse_stream("# n=3\n+ 0 1\n+ 1 2\n?\n").unwrap();
        let out = run(&RunConfig::default(), &s).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].step(), 2);
        let every = RunConfig {
            checkpoint_every: Some(1),
            ..RunConfig::default()
        };
        // the synthesized checkpoint after step 2 merges with the explicit one
        assert_eq!(run(&every, &s).unwrap().len(), 2);
    }

    #[test]
    fn flow_and_brute_agree() {
        let s = clique_buildup(7);
        let cfg = |algo| RunConfig {
            mode: Mode::Oracle,
            algo,
            checkpoint_every: Some(4),
            ..RunConfig::default()
        };
        let a: Vec<String> = run(&cfg(OracleAlgo::Flow), &s).unwrap().iter().map(|r| match r {
            CheckpointRecord::Oracle { density, .. } => density.clone(),
            _ => unreachable!(),
        }).collect();
        let b: Vec<String> = run(&cfg(OracleAlgo::Brute), &s).unwrap().iter().map(|r| match r {
            CheckpointRecord::Oracle { density, .. } => density.clone(),
            _ => unreachable!(),
        }).collect();
        assert_eq!(a, b);
        assert_eq!(a.last().unwrap(), "3/1");
    }

    #[test]
    fn precondition_reports_line() {
        let s = parse_stream("# n=3\n+ 0 1\n- 1 2\n").unwrap();
        match run(&RunConfig::default(), &s) {
            Err(RunError::Precondition { line: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn compare_clique_within_bound() {
        let report = compare(&RunConfig::default(), &clique_buildup(10), 1).unwrap();
        assert_eq!(report.failures, 0);
        assert!(report.max_ratio <= report.bound);
    }

    #[test]
    fn auto_alpha_per_mode() {
        let mut c = RunConfig::default();
        assert!((c.alpha() - 2.3).abs() < 1e-12);
        c.mode = Mode::Oneshot;
        assert!((c.alpha() - 1.1 / 0.9).abs() < 1e-12);
        c.mode = Mode::Directed;
        assert!((c.alpha() - 2.75).abs() < 1e-12);
        assert!("0.5".parse::<AlphaChoice>().is_err());
    }

    #[test]
    fn bad_epsilon_rejected() {
        let c = RunConfig {
            epsilon: Some(1.5),
            ..RunConfig::default()
        };
        assert!(matches!(c.validate(), Err(RunError::Config(_))));
    }
}
