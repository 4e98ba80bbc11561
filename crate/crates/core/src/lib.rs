//! Densest-subgraph estimation over fully dynamic edge streams.
//!
//! Three undirected regimes share one layered decomposition: a full-space engine with
//! amortized polylog updates ([`DynamicDensity`]), a one-pass sketching estimator
//! ([`OneshotStream`]) and a small-space engine that also keeps updates cheap
//! ([`DynamicStreaming`]). [`DirectedDensity`] handles the directed variant. Exact
//! oracles in [`oracles`] check all of them.
//!
//! Engines are generic over `f32`/`f64`; validators and oracles also accept
//! [`Rational`].

pub mod decomposition;
pub mod directed;
pub mod dynamic;
pub mod generators;
pub mod graph;
pub mod ledger;
pub mod num;
pub mod oneshot;
pub mod oracles;
pub mod replay;
pub mod sampling;
pub mod stream;
pub mod streaming;

pub use decomposition::{check_valid, Decomposition, DecompositionDump, Validator};
pub use directed::{DirectedConfig, DirectedDensity};
pub use dynamic::{DynamicConfig, DynamicDensity, ThresholdLadder};
pub use graph::{DirectedDynamicGraph, DynamicGraph, GraphError, NodeId, UpdateEvent};
pub use ledger::WorkLedger;
pub use num::{Rational, Real, Threshold};
pub use oneshot::{OneshotConfig, OneshotEstimate, OneshotStream};
pub use stream::{parse_stream, read_stream, StreamFile};
pub use streaming::{DynamicStreaming, Regime, StreamingConfig};

pub type DynamicDensity64 = DynamicDensity<f64>;
pub type DynamicDensity32 = DynamicDensity<f32>;
pub type DynamicStreaming64 = DynamicStreaming<f64>;
pub type DynamicStreaming32 = DynamicStreaming<f32>;
pub type DirectedDensity64 = DirectedDensity<f64>;
pub type DirectedDensity32 = DirectedDensity<f32>;
pub type Decomposition64 = Decomposition<f64>;
pub type ExactDecomposition = Decomposition<Rational>;
