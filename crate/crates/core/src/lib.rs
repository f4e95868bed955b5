//! Sparse `(2k-1)`-spanners of edge streams.
//!
//! * [`incremental`]: one pass over an edge stream with amortized constant
//!   work per edge; weighted inputs are handled when they arrive sorted by
//!   weight.
//! * [`streamsort`]: a multi-pass construction in a model of sequential
//!   stream passes with O(1) records of state interleaved with sort passes.
//! * [`verifier`]: exact-distance oracles and invariant checks.

pub mod error;
pub mod graph_io;
pub mod incremental;
pub mod model;
pub mod streamsort;
pub mod verifier;

pub use error::{Error, Result};
pub use graph_io::{read_edge_stream, write_edge_stream, EdgeStream, WeightRange};
pub use incremental::{build_from_sorted_weighted_stream, build_single_pass, SpannerState, WorkCounters};
pub use model::{Edge, MultiLevelClustering, SamplingHierarchy, VertexId};
pub use verifier::{check_stretch, StretchReport, VerificationReport};
