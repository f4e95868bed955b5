//! The StreamSort model and the spanner algorithm built on it.

pub mod order;
pub mod record;
pub mod runtime;
pub mod spanner;

pub use order::{cmp_order0, cmp_order_cc, ClusterKey, ClusterOrder, SortOrder, VertexPosition};
pub use record::{EdgeRecord, Record, SpannerMark, VertexRecord, RECORD_BYTES};
pub use runtime::{PassAccounting, Runtime, RuntimeError, Storage, Transducer};
pub use spanner::{run, RunOptions, StreamSortOutput};
