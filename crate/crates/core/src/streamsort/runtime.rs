//! A small StreamSort execution environment.
//!
//! Streams are write-once sequences of [`Record`]s, kept in memory or in
//! anonymous temporary files. A stream pass feeds every record of its input,
//! left to right, through a [`Transducer`] that may append records to the
//! output (and edges to the side spanner sink) but never revisit them. The
//! runtime measures the transducer's buffered records after every step and
//! aborts the pass if it exceeds the declared budget; the transducer value
//! itself must also fit in its budget of records plus a few machine words.
//!
//! Sort passes are executed in memory regardless of the storage backend.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::PathBuf;

use thiserror::Error;

use super::order::SortOrder;
use super::record::{DecodeError, Record, RECORD_BYTES};
use crate::model::Edge;

/// Default per-pass state budget, in records.
pub const DEFAULT_STATE_BUDGET: usize = 4;
/// Scalar words a transducer may carry beyond its record budget.
pub const SCALAR_WORDS: usize = 8;

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error("pass `{pass}` held {held} records, budget is {budget}")]
    StateBudget { pass: String, held: usize, budget: usize },
    #[error("pass `{pass}` transducer occupies {bytes} bytes, limit is {limit}")]
    StateSize { pass: String, bytes: usize, limit: usize },
    #[error("pass `{pass}`: {message}")]
    Fault { pass: String, message: String },
    #[error("sort `{pass}`: record {record} lacks key field {field}")]
    MissingKey { pass: String, record: String, field: &'static str },
    #[error("corrupt stream: {0}")]
    Decode(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<DecodeError> for RuntimeError {
    fn from(e: DecodeError) -> Self {
        RuntimeError::Decode(e.0)
    }
}

/// A transducer failure, reported with the pass name by the runtime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fault(pub String);

impl<S: Into<String>> From<S> for Fault {
    fn from(s: S) -> Self {
        Fault(s.into())
    }
}

/// Append-only output of a stream pass.
pub struct Output<'a> {
    main: &'a mut Writer,
    side: &'a mut Vec<Edge>,
    trace: &'a mut Vec<(u8, Edge)>,
    written: usize,
}

impl Output<'_> {
    pub fn emit(&mut self, r: Record) -> Result<(), Fault> {
        self.written += 1;
        self.main.push(r).map_err(|e| Fault(e.to_string()))
    }

    /// Appends an edge to the spanner sink.
    pub fn emit_spanner(&mut self, e: Edge) {
        self.side.push(e);
    }

    /// Diagnostic channel for test harnesses; not an output stream of the
    /// algorithm and not read back by any pass.
    pub fn trace(&mut self, tag: u8, e: Edge) {
        self.trace.push((tag, e));
    }
}

/// A record-at-a-time stream processor with bounded state.
pub trait Transducer {
    /// Maximum records the transducer may hold between steps.
    fn state_budget(&self) -> usize {
        DEFAULT_STATE_BUDGET
    }

    /// Records currently buffered.
    fn held_records(&self) -> usize;

    fn process(&mut self, r: Record, out: &mut Output<'_>) -> Result<(), Fault>;

    fn finish(&mut self, _out: &mut Output<'_>) -> Result<(), Fault> {
        Ok(())
    }
}

/// Passes every record through unchanged.
#[derive(Clone, Copy, Debug, Default)]
pub struct Identity;

impl Transducer for Identity {
    fn held_records(&self) -> usize {
        0
    }

    fn process(&mut self, r: Record, out: &mut Output<'_>) -> Result<(), Fault> {
        out.emit(r)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PassKind {
    Stream,
    Sort,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PassLog {
    pub kind: PassKind,
    pub label: String,
    pub input_records: usize,
    pub output_records: usize,
    pub max_state_records: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PassAccounting {
    pub stream_passes: usize,
    pub sort_passes: usize,
    /// Largest number of records any stream-pass transducer held at once.
    pub max_state_records: usize,
    /// Largest transducer footprint in bytes.
    pub max_state_bytes: usize,
    /// Records consumed by stream passes.
    pub records_processed: u64,
    pub passes: Vec<PassLog>,
}

impl PassAccounting {
    pub fn total_passes(&self) -> usize {
        self.stream_passes + self.sort_passes
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum Storage {
    #[default]
    Memory,
    /// Anonymous temporary files, in the given directory or the system default.
    TempFiles(Option<PathBuf>),
}

impl Storage {
    /// Temp files under `$STREAMSPAN_TMPDIR` when set, memory otherwise.
    pub fn from_env() -> Self {
        match std::env::var_os("STREAMSPAN_TMPDIR") {
            Some(dir) => Storage::TempFiles(Some(dir.into())),
            None => Storage::Memory,
        }
    }
}

enum Writer {
    Memory(Vec<Record>),
    File { out: BufWriter<File>, len: usize },
}

impl Writer {
    fn push(&mut self, r: Record) -> std::io::Result<()> {
        match self {
            Writer::Memory(v) => {
                v.push(r);
                Ok(())
            }
            Writer::File { out, len } => {
                *len += 1;
                out.write_all(&r.encode())
            }
        }
    }

    fn finish(self) -> Result<RecordStream, RuntimeError> {
        Ok(match self {
            Writer::Memory(v) => RecordStream(Data::Memory(v)),
            Writer::File { out, len } => {
                let mut file = out.into_inner().map_err(|e| e.into_error())?;
                file.seek(SeekFrom::Start(0))?;
                RecordStream(Data::File { file, len })
            }
        })
    }
}

enum Data {
    Memory(Vec<Record>),
    File { file: File, len: usize },
}

/// A materialized stream. Consumed by the pass that reads it.
pub struct RecordStream(Data);

impl RecordStream {
    pub fn len(&self) -> usize {
        match &self.0 {
            Data::Memory(v) => v.len(),
            Data::File { len, .. } => *len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn into_records(self) -> RecordIter {
        match self.0 {
            Data::Memory(v) => RecordIter::Memory(v.into_iter()),
            Data::File { file, len } => RecordIter::File { reader: BufReader::new(file), left: len },
        }
    }

    /// Reads the whole stream back, e.g. for inspection in tests.
    pub fn to_vec(self) -> Result<Vec<Record>, RuntimeError> {
        self.into_records().collect()
    }
}

enum RecordIter {
    Memory(std::vec::IntoIter<Record>),
    File { reader: BufReader<File>, left: usize },
}

impl Iterator for RecordIter {
    type Item = Result<Record, RuntimeError>;

    fn next(&mut self) -> Option<Self::Item> {
        match self {
            RecordIter::Memory(it) => it.next().map(Ok),
            RecordIter::File { reader, left } => {
                if *left == 0 {
                    return None;
                }
                *left -= 1;
                let mut buf = [0u8; RECORD_BYTES];
                Some(
                    reader
                        .read_exact(&mut buf)
                        .map_err(RuntimeError::from)
                        .and_then(|_| Record::decode(&buf).map_err(RuntimeError::from)),
                )
            }
        }
    }
}

/// Executes passes and keeps the books.
pub struct Runtime {
    storage: Storage,
    accounting: PassAccounting,
    spanner: Vec<Edge>,
    trace: Vec<(u8, Edge)>,
}

impl Runtime {
    pub fn new(storage: Storage) -> Self {
        Runtime { storage, accounting: PassAccounting::default(), spanner: Vec::new(), trace: Vec::new() }
    }

    pub fn trace(&self) -> &[(u8, Edge)] {
        &self.trace
    }

    pub fn accounting(&self) -> &PassAccounting {
        &self.accounting
    }

    /// Edges appended to the spanner sink so far.
    pub fn spanner(&self) -> &[Edge] {
        &self.spanner
    }

    pub fn into_parts(self) -> (Vec<Edge>, PassAccounting) {
        (self.spanner, self.accounting)
    }

    fn writer(&self) -> Result<Writer, RuntimeError> {
        Ok(match &self.storage {
            Storage::Memory => Writer::Memory(Vec::new()),
            Storage::TempFiles(dir) => {
                let file = match dir {
                    Some(d) => tempfile::tempfile_in(d)?,
                    None => tempfile::tempfile()?,
                };
                Writer::File { out: BufWriter::new(file), len: 0 }
            }
        })
    }

    /// Materializes an initial input stream. Not counted as a pass.
    pub fn load(&mut self, records: impl IntoIterator<Item = Record>) -> Result<RecordStream, RuntimeError> {
        let mut w = self.writer()?;
        for r in records {
            w.push(r)?;
        }
        w.finish()
    }

    pub fn stream_pass<T: Transducer>(
        &mut self,
        label: &str,
        input: RecordStream,
        transducer: &mut T,
    ) -> Result<RecordStream, RuntimeError> {
        let budget = transducer.state_budget();
        let bytes = std::mem::size_of::<T>();
        let limit = budget * std::mem::size_of::<Record>() + SCALAR_WORDS * std::mem::size_of::<u64>();
        if bytes > limit {
            return Err(RuntimeError::StateSize { pass: label.into(), bytes, limit });
        }
        let fault = |f: Fault| RuntimeError::Fault { pass: label.into(), message: f.0 };

        let input_records = input.len();
        let mut main = self.writer()?;
        let mut max_held = 0;
        let mut out = Output { main: &mut main, side: &mut self.spanner, trace: &mut self.trace, written: 0 };
        for r in input.into_records() {
            transducer.process(r?, &mut out).map_err(fault)?;
            let held = transducer.held_records();
            max_held = max_held.max(held);
            if held > budget {
                return Err(RuntimeError::StateBudget { pass: label.into(), held, budget });
            }
        }
        transducer.finish(&mut out).map_err(fault)?;
        let written = out.written;

        let acc = &mut self.accounting;
        acc.stream_passes += 1;
        acc.records_processed += input_records as u64;
        acc.max_state_records = acc.max_state_records.max(max_held);
        acc.max_state_bytes = acc.max_state_bytes.max(bytes);
        acc.passes.push(PassLog {
            kind: PassKind::Stream,
            label: label.into(),
            input_records,
            output_records: written,
            max_state_records: max_held,
        });
        main.finish()
    }

    /// Stable sort of the whole stream.
    pub fn sort_pass(
        &mut self,
        label: &str,
        input: RecordStream,
        order: SortOrder,
    ) -> Result<RecordStream, RuntimeError> {
        let mut records = input.to_vec()?;
        for r in &records {
            order.check_keys(r).map_err(|field| RuntimeError::MissingKey {
                pass: label.into(),
                record: r.to_string(),
                field,
            })?;
        }
        records.sort_by(|a, b| order.compare(a, b));
        let len = records.len();
        self.accounting.sort_passes += 1;
        self.accounting.passes.push(PassLog {
            kind: PassKind::Sort,
            label: label.into(),
            input_records: len,
            output_records: len,
            max_state_records: 0,
        });
        self.load(records)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::streamsort::order::{cmp_order0, ClusterKey, ClusterOrder};
    use crate::streamsort::record::{EdgeRecord, SpannerMark, VertexRecord};

    fn sample() -> Vec<Record> {
        let mut out = vec![];
        for (u, v, w) in [(1, 2, 5.0), (2, 3, 1.0), (1, 3, 2.0)] {
            out.push(Record::Edge(EdgeRecord::singleton(u, v, w)));
            out.push(Record::Edge(EdgeRecord::singleton(v, u, w)));
        }
        out.extend((1..=3).map(|v| Record::Vertex(VertexRecord::singleton(v))));
        out
    }

    #[test]
    fn identity_pass() {
        for storage in [Storage::Memory, Storage::TempFiles(None)] {
            let mut rt = Runtime::new(storage);
            let input = rt.load(sample()).unwrap();
            let out = rt.stream_pass("id", input, &mut Identity).unwrap();
            assert_eq!(out.to_vec().unwrap(), sample());
            assert_eq!(rt.accounting().max_state_records, 0);
            assert_eq!(rt.accounting().stream_passes, 1);
        }
    }

    #[derive(Clone, Copy)]
    struct DropRejected;

    impl Transducer for DropRejected {
        fn held_records(&self) -> usize {
            0
        }
        fn process(&mut self, r: Record, out: &mut Output<'_>) -> Result<(), Fault> {
            match r {
                Record::Edge(e) if e.mark == SpannerMark::Rejected => Ok(()),
                r => out.emit(r),
            }
        }
    }

    #[test]
    fn filter_pass_keeps_subsequence() {
        let mut input = sample();
        if let Record::Edge(e) = &mut input[2] {
            e.mark = SpannerMark::Rejected;
        }
        let expected: Vec<Record> =
            input.iter().copied().filter(|r| r.as_edge().is_none_or(|e| e.mark != SpannerMark::Rejected)).collect();
        let mut rt = Runtime::new(Storage::Memory);
        let s = rt.load(input).unwrap();
        let out = rt.stream_pass("filter", s, &mut DropRejected).unwrap();
        assert_eq!(out.to_vec().unwrap(), expected);
    }

    /// Holds every record until the end: unbounded state.
    struct Hoarder(Vec<Record>);

    impl Transducer for Hoarder {
        fn held_records(&self) -> usize {
            self.0.len()
        }
        fn process(&mut self, r: Record, _out: &mut Output<'_>) -> Result<(), Fault> {
            self.0.push(r);
            Ok(())
        }
    }

    #[test]
    fn budget_violation_aborts() {
        let mut rt = Runtime::new(Storage::Memory);
        let s = rt.load(sample()).unwrap();
        let err = rt.stream_pass("hoard", s, &mut Hoarder(Vec::new())).err().unwrap();
        assert!(matches!(err, RuntimeError::StateBudget { held: 5, budget: 4, .. }), "{err}");
    }

    #[allow(dead_code)]
    struct Fat([Record; 16]);

    impl Transducer for Fat {
        fn held_records(&self) -> usize {
            0
        }
        fn process(&mut self, r: Record, out: &mut Output<'_>) -> Result<(), Fault> {
            out.emit(r)
        }
    }

    #[test]
    fn oversized_transducer_rejected() {
        let mut rt = Runtime::new(Storage::Memory);
        let s = rt.load(sample()).unwrap();
        let fat = Fat([Record::Vertex(VertexRecord::singleton(1)); 16]);
        assert!(matches!(rt.stream_pass("fat", s, &mut { fat }), Err(RuntimeError::StateSize { .. })));
    }

    #[test]
    fn sort_pass_is_stable_and_pairs_occurrences() {
        for storage in [Storage::Memory, Storage::TempFiles(None)] {
            let mut rt = Runtime::new(storage);
            let s = rt.load(sample()).unwrap();
            let sorted = rt.sort_pass("pairs", s, SortOrder::Pairs).unwrap().to_vec().unwrap();
            assert!(sorted.windows(2).all(|w| cmp_order0(&w[0], &w[1]).is_le()));
            let edges: Vec<_> = sorted.iter().filter_map(Record::as_edge).collect();
            for pair in edges.chunks(2) {
                assert_eq!(pair[0].key(), pair[1].key());
            }
            let again = rt.load(sorted.clone()).unwrap();
            let resorted = rt.sort_pass("again", again, SortOrder::Pairs).unwrap().to_vec().unwrap();
            assert_eq!(resorted, sorted);
            assert_eq!(rt.accounting().sort_passes, 2);
        }
    }

    #[test]
    fn sort_pass_reports_missing_key() {
        let mut rt = Runtime::new(Storage::Memory);
        let mut v = VertexRecord::singleton(1);
        v.center = 0;
        let s = rt.load([Record::Vertex(v)]).unwrap();
        let order = SortOrder::Cluster(ClusterOrder::new(ClusterKey::Center, ClusterKey::Label));
        assert!(matches!(rt.sort_pass("cc", s, order), Err(RuntimeError::MissingKey { .. })));
    }

    #[test]
    fn singleton_cluster_order_groups_vertex_with_edges() {
        let mut rt = Runtime::new(Storage::Memory);
        let s = rt.load(sample()).unwrap();
        let order = SortOrder::Cluster(ClusterOrder::new(ClusterKey::Label, ClusterKey::Label));
        let sorted = rt.sort_pass("cc", s, order).unwrap().to_vec().unwrap();
        let mut owner = 0;
        for r in &sorted {
            match r {
                Record::Vertex(v) => owner = v.v,
                Record::Edge(e) => assert_eq!(e.u, owner),
            }
        }
    }
}
