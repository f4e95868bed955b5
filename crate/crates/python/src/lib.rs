use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use streamspan::graph_io::{gen_complete, gen_gnp, gen_grid, sort_by_weight, EdgeStream, WeightRange};
use streamspan::incremental::SpannerState;
use streamspan::model::{Edge, SamplingHierarchy};
use streamspan::streamsort::spanner::{run, RunOptions};
use streamspan::streamsort::Storage;
use streamspan::verifier;

create_exception!(streamspan, StreamspanError, PyException);

fn err(e: streamspan::Error) -> PyErr {
    StreamspanError::new_err(e.to_string())
}

type EdgeTuple = (u32, u32, f64);

fn to_tuples(edges: &[Edge]) -> Vec<EdgeTuple> {
    edges.iter().map(|e| (e.u, e.v, e.w)).collect()
}

fn to_edges(edges: Vec<EdgeTuple>) -> Vec<Edge> {
    edges.into_iter().map(|(u, v, w)| Edge::new(u, v, w)).collect()
}

fn weight_range(weights: Option<(u32, u32)>) -> PyResult<Option<WeightRange>> {
    match weights {
        Some((lo, hi)) if lo > hi => Err(StreamspanError::new_err(format!("empty weight range {lo}:{hi}"))),
        Some((lo, hi)) => Ok(Some(WeightRange { lo, hi })),
        None => Ok(None),
    }
}

/// An edge stream on vertices `1..=n`.
#[pyclass(name = "Graph", module = "streamspan")]
struct PyGraph {
    inner: EdgeStream,
}

#[pymethods]
impl PyGraph {
    #[new]
    #[pyo3(signature = (n, edges, weighted = true))]
    fn new(n: usize, edges: Vec<EdgeTuple>, weighted: bool) -> PyResult<Self> {
        let edges = to_edges(edges);
        for e in &edges {
            e.validate(n).map_err(err)?;
        }
        Ok(PyGraph { inner: EdgeStream::new(n, weighted, edges) })
    }

    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        let f = File::open(&path)?;
        let inner = streamspan::read_edge_stream(BufReader::new(f)).map_err(err)?;
        Ok(PyGraph { inner })
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        let mut out = BufWriter::new(File::create(&path)?);
        streamspan::write_edge_stream(&mut out, &self.inner).map_err(err)?;
        out.flush()?;
        Ok(())
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn weighted(&self) -> bool {
        self.inner.weighted
    }

    #[getter]
    fn edges(&self) -> Vec<EdgeTuple> {
        to_tuples(&self.inner.edges)
    }

    fn distinct_edges(&self) -> Vec<EdgeTuple> {
        to_tuples(&self.inner.distinct_edges())
    }

    fn sorted_by_weight(&self) -> Self {
        PyGraph { inner: sort_by_weight(&self.inner) }
    }

    fn prefix(&self, len: usize) -> Self {
        PyGraph { inner: self.inner.prefix(len) }
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, m={}, weighted={})", self.inner.n, self.inner.len(), self.inner.weighted)
    }
}

#[pyfunction]
#[pyo3(signature = (n, p, seed = 0, weights = None))]
fn gnp(n: usize, p: f64, seed: u64, weights: Option<(u32, u32)>) -> PyResult<PyGraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(StreamspanError::new_err(format!("probability {p} outside [0, 1]")));
    }
    Ok(PyGraph { inner: gen_gnp(n, p, seed, weight_range(weights)?) })
}

#[pyfunction]
#[pyo3(signature = (n, seed = 0, weights = None))]
fn complete(n: usize, seed: u64, weights: Option<(u32, u32)>) -> PyResult<PyGraph> {
    Ok(PyGraph { inner: gen_complete(n, seed, weight_range(weights)?) })
}

#[pyfunction]
#[pyo3(signature = (rows, cols, seed = 0, weights = None))]
fn grid(rows: usize, cols: usize, seed: u64, weights: Option<(u32, u32)>) -> PyResult<PyGraph> {
    Ok(PyGraph { inner: gen_grid(rows, cols, seed, weight_range(weights)?) })
}

/// Nested vertex samples `V = S_0 ⊇ S_1 ⊇ ... ⊇ S_{k-1}`.
#[pyclass(name = "SamplingHierarchy", module = "streamspan", frozen)]
struct PyHierarchy {
    inner: SamplingHierarchy,
}

#[pymethods]
impl PyHierarchy {
    #[new]
    #[pyo3(signature = (n, k, seed = 0))]
    fn new(n: usize, k: u32, seed: u64) -> PyResult<Self> {
        Ok(PyHierarchy { inner: SamplingHierarchy::build(n, k, seed).map_err(err)? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn k(&self) -> u32 {
        self.inner.k()
    }

    /// Highest level whose sample contains `v`.
    fn lmax(&self, v: u32) -> PyResult<u32> {
        if v == 0 || v as usize > self.inner.n() {
            return Err(err(streamspan::Error::VertexOutOfRange { vertex: v as u64, n: self.inner.n() }));
        }
        Ok(self.inner.lmax(v))
    }

    fn level_size(&self, level: u32) -> usize {
        self.inner.level_size(level)
    }
}

/// Single-pass spanner state; feed edges one at a time.
#[pyclass(name = "IncrementalSpanner", module = "streamspan")]
struct PyIncremental {
    inner: SpannerState,
}

impl PyIncremental {
    fn valid(&self, v: u32, level: u32) -> PyResult<()> {
        let (n, k) = (self.inner.n(), self.inner.k());
        if v == 0 || v as usize > n {
            return Err(err(streamspan::Error::VertexOutOfRange { vertex: v as u64, n }));
        }
        if level >= k {
            return Err(err(streamspan::Error::LevelOutOfRange { vertex: v, level, k }));
        }
        Ok(())
    }
}

#[pymethods]
impl PyIncremental {
    #[new]
    #[pyo3(signature = (n, k, seed = 0, check_invariants = false))]
    fn new(n: usize, k: u32, seed: u64, check_invariants: bool) -> PyResult<Self> {
        let h = SamplingHierarchy::build(n, k, seed).map_err(err)?;
        Ok(PyIncremental { inner: SpannerState::new(h).with_invariant_checks(check_invariants) })
    }

    #[pyo3(signature = (u, v, w = 1.0))]
    fn process_edge(&mut self, u: u32, v: u32, w: f64) -> PyResult<()> {
        self.inner.process_edge(Edge::new(u, v, w)).map_err(err)
    }

    /// Feeds a whole graph; with `sorted=True` the stream must be in
    /// nondecreasing weight order.
    #[pyo3(signature = (graph, sorted = false))]
    fn extend(&mut self, graph: &PyGraph, sorted: bool) -> PyResult<()> {
        if sorted {
            return self.inner.process_sorted(graph.inner.iter()).map_err(err);
        }
        for e in graph.inner.iter() {
            self.inner.process_edge(e).map_err(err)?;
        }
        Ok(())
    }

    fn spanner_edges(&self) -> Vec<EdgeTuple> {
        to_tuples(&self.inner.spanner_edges())
    }

    #[getter]
    fn hook_edge_count(&self) -> usize {
        self.inner.hook_edge_count()
    }

    fn level(&self, v: u32) -> PyResult<u32> {
        self.valid(v, 0)?;
        Ok(self.inner.clustering().level(v))
    }

    /// `C_level(v)`, 0 if `v` is unclustered at that level.
    fn center(&self, level: u32, v: u32) -> PyResult<u32> {
        self.valid(v, level)?;
        Ok(self.inner.clustering().center(level, v))
    }

    fn representative_count(&self, u: u32, level: u32) -> PyResult<usize> {
        self.valid(u, level)?;
        Ok(self.inner.representative_count(u, level))
    }

    /// Work counters as `(name, value)` pairs.
    fn counters(&self) -> Vec<(&'static str, u64)> {
        let c = self.inner.counters();
        vec![
            ("edges_processed", c.edges_processed),
            ("prune_calls", c.prune_calls),
            ("prune_scans", c.prune_scans),
            ("promotions", c.promotions),
            ("discards", c.discards),
            ("rises", c.rises),
        ]
    }

    /// Raises if any structural invariant or cluster radius bound fails.
    fn check(&self) -> PyResult<()> {
        self.inner.check().map_err(err)?;
        let radius = verifier::check_cluster_radius(&self.inner);
        match radius.first_counterexample {
            Some(x) => Err(StreamspanError::new_err(format!("cluster radius: {x}"))),
            None => Ok(()),
        }
    }
}

#[pyclass(name = "StreamSortResult", module = "streamspan", get_all, frozen)]
struct PyStreamSortResult {
    spanner: Vec<EdgeTuple>,
    total_passes: usize,
    stream_passes: usize,
    sort_passes: usize,
    max_state_records: usize,
}

#[pyfunction]
#[pyo3(signature = (graph, k, seed = 0, temp_dir = None))]
fn streamsort(graph: &PyGraph, k: u32, seed: u64, temp_dir: Option<PathBuf>) -> PyResult<PyStreamSortResult> {
    let storage = match temp_dir {
        Some(d) => Storage::TempFiles(Some(d)),
        None => Storage::Memory,
    };
    let out = run(k, seed, &graph.inner, &RunOptions { storage, snapshots: false }).map_err(err)?;
    let a = &out.accounting;
    Ok(PyStreamSortResult {
        spanner: to_tuples(&out.spanner),
        total_passes: a.total_passes(),
        stream_passes: a.stream_passes,
        sort_passes: a.sort_passes,
        max_state_records: a.max_state_records,
    })
}

#[pyclass(name = "StretchReport", module = "streamspan", get_all, frozen)]
struct PyStretchReport {
    t: f64,
    max_ratio: f64,
    witness: Option<(u32, u32)>,
    pairs_checked: usize,
    violations: usize,
    passed: bool,
}

/// Checks `d_S(u,v) <= t * w(u,v)` over every edge of `graph`.
#[pyfunction]
fn check_stretch(graph: &PyGraph, spanner: Vec<EdgeTuple>, t: f64) -> PyResult<PyStretchReport> {
    let r = verifier::check_stretch(graph.inner.n, &graph.inner.edges, &to_edges(spanner), t).map_err(err)?;
    Ok(PyStretchReport {
        t: r.t,
        max_ratio: r.max_ratio,
        witness: r.witness,
        pairs_checked: r.pairs_checked,
        violations: r.violations,
        passed: r.passed(),
    })
}

#[pymodule]
#[pyo3(name = "streamspan")]
fn streamspan_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("StreamspanError", m.py().get_type::<StreamspanError>())?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PyHierarchy>()?;
    m.add_class::<PyIncremental>()?;
    m.add_class::<PyStreamSortResult>()?;
    m.add_class::<PyStretchReport>()?;
    m.add_function(wrap_pyfunction!(gnp, m)?)?;
    m.add_function(wrap_pyfunction!(complete, m)?)?;
    m.add_function(wrap_pyfunction!(grid, m)?)?;
    m.add_function(wrap_pyfunction!(streamsort, m)?)?;
    m.add_function(wrap_pyfunction!(check_stretch, m)?)?;
    Ok(())
}
