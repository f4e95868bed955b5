//! `(2k-1)`-spanners in the StreamSort model with O(1) records of working
//! state per stream pass.
//!
//! The edge set is expanded into two occurrences per edge plus one record per
//! vertex, then `k` iterations run. Iteration `i` samples the clusters of
//! `C_{i-1}` (none in iteration `k`), lets each unsampled vertex hook onto
//! its nearest sampled neighbouring cluster, selects the lightest edge to
//! every neighbouring cluster lighter than that hook, and rebuilds the
//! clustering `C_i`. Per sampled iteration this takes five sort passes and
//! five stream passes; the final iteration needs two of each and the
//! preprocessing one sort and two stream passes, so a run uses `10k - 3`
//! passes in total.

use super::order::{ClusterKey, ClusterOrder, SortOrder};
use super::record::{EdgeRecord, Record, SpannerMark, VertexRecord};
use super::runtime::{Fault, Output, PassAccounting, RecordStream, Runtime, Storage, Transducer};
use crate::error::{Error, Result};
use crate::graph_io::EdgeStream;
use crate::model::{sampling_probability, Coins, Edge, DOMAIN_CLUSTER};

/// Documented bound on passes per unit of `k`: a run uses at most
/// `PASSES_PER_ITERATION * k` passes.
pub const PASSES_PER_ITERATION: usize = 10;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub storage: Storage,
    /// Record live edges, vertex centers and removals after every iteration.
    pub snapshots: bool,
}

/// Live state at the start of an iteration.
#[derive(Clone, Debug, Default)]
pub struct IterationSnapshot {
    /// Iteration about to start (1-based).
    pub iteration: u32,
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
    /// Spanner edges emitted before this iteration.
    pub spanner_len: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Removal {
    /// Rejected in favour of a lighter edge to the same cluster.
    Rejected,
    /// Became an intra-cluster edge of the new clustering.
    Purged,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RemovedEdge {
    pub iteration: u32,
    pub edge: Edge,
    pub reason: Removal,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IterationStats {
    pub iteration: u32,
    pub sampled_clusters: u64,
    pub sampled_vertices: u64,
    pub unsampled_vertices: u64,
    /// Unsampled vertices that found a sampled neighbouring cluster.
    pub hooked_vertices: u64,
    /// Edges selected toward clusters lighter than the hook (hooks excluded).
    pub cluster_selections: u64,
    pub spanner_edges_emitted: u64,
    pub rejected_edges: u64,
    pub purged_edges: u64,
    pub live_edges_after: u64,
    pub live_vertices_after: u64,
}

#[derive(Clone, Debug, Default)]
pub struct StreamSortOutput {
    /// Spanner edges, normalized and sorted by endpoints.
    pub spanner: Vec<Edge>,
    /// The same edges in the order they were emitted.
    pub emitted: Vec<Edge>,
    pub accounting: PassAccounting,
    pub iterations: Vec<IterationStats>,
    pub snapshots: Vec<IterationSnapshot>,
    pub removed: Vec<RemovedEdge>,
}

impl StreamSortOutput {
    pub fn pass_bound(k: u32) -> usize {
        PASSES_PER_ITERATION * k as usize
    }
}

/// Coin parameters shared by every iteration of one run.
#[derive(Clone, Copy, Debug)]
pub struct SamplingParams {
    pub coins: Coins,
    pub p: f64,
    pub k: u32,
}

impl SamplingParams {
    pub fn new(n: usize, k: u32, seed: u64) -> Self {
        SamplingParams { coins: Coins::new(seed), p: sampling_probability(n, k), k }
    }

    /// Whether the cluster centered at `center` is sampled in `iteration`.
    pub fn sampled(&self, iteration: u32, center: u32) -> bool {
        iteration < self.k && self.coins.flip(DOMAIN_CLUSTER, iteration, center, self.p)
    }
}

// ---------------------------------------------------------------- transducers

/// Expands each input edge into its two occurrences, then appends one vertex
/// record per vertex.
#[derive(Clone, Copy, Debug)]
pub struct Expand {
    pub n: u32,
}

impl Transducer for Expand {
    fn held_records(&self) -> usize {
        0
    }

    fn process(&mut self, r: Record, out: &mut Output<'_>) -> Result<(), Fault> {
        let Record::Edge(e) = r else {
            return Err("preprocessing expects edge records only".into());
        };
        if e.u == e.v {
            return Err(format!("self-loop at vertex {}", e.u).into());
        }
        if e.u == 0 || e.v == 0 || e.u > self.n || e.v > self.n {
            return Err(format!("edge ({},{}) outside 1..={}", e.u, e.v, self.n).into());
        }
        out.emit(Record::Edge(EdgeRecord::singleton(e.u, e.v, e.w)))?;
        out.emit(Record::Edge(EdgeRecord::singleton(e.v, e.u, e.w)))
    }

    fn finish(&mut self, out: &mut Output<'_>) -> Result<(), Fault> {
        for v in 1..=self.n {
            out.emit(Record::Vertex(VertexRecord::singleton(v)))?;
        }
        Ok(())
    }
}

/// Keeps the lightest copy of parallel edges. Input sorted by `≺₀`, where
/// copies of one oriented pair are adjacent and lightest first.
#[derive(Clone, Copy, Debug, Default)]
pub struct DropParallel {
    last: (u32, u32),
    pub dropped: u64,
}

impl Transducer for DropParallel {
    fn held_records(&self) -> usize {
        0
    }

    fn process(&mut self, r: Record, out: &mut Output<'_>) -> Result<(), Fault> {
        if let Record::Edge(e) = r {
            if (e.u, e.v) == self.last {
                self.dropped += 1;
                return Ok(());
            }
            self.last = (e.u, e.v);
        }
        out.emit(r)
    }
}

/// Flips one coin per cluster of the current clustering and flags the
/// cluster's vertices and outgoing occurrences. Input sorted by
/// `≺(C_{i-1}, C_0)`, so each cluster is contiguous. Also resets the
/// per-iteration vertex fields.
#[derive(Clone, Copy, Debug)]
pub struct SampleClusters {
    pub iteration: u32,
    pub params: SamplingParams,
    current: u32,
    coin: bool,
    pub sampled_clusters: u64,
    pub sampled_vertices: u64,
}

impl SampleClusters {
    pub fn new(iteration: u32, params: SamplingParams) -> Self {
        SampleClusters { iteration, params, current: 0, coin: false, sampled_clusters: 0, sampled_vertices: 0 }
    }

    fn enter(&mut self, center: u32) {
        if center != self.current {
            self.current = center;
            self.coin = self.params.sampled(self.iteration, center);
            self.sampled_clusters += self.coin as u64;
        }
    }
}

impl Transducer for SampleClusters {
    fn held_records(&self) -> usize {
        0
    }

    fn process(&mut self, r: Record, out: &mut Output<'_>) -> Result<(), Fault> {
        match r {
            Record::Vertex(mut v) => {
                self.enter(v.center);
                v.sampled = self.coin;
                v.nearest = f64::INFINITY;
                v.chosen = 0;
                self.sampled_vertices += self.coin as u64;
                out.emit(Record::Vertex(v))
            }
            Record::Edge(mut e) => {
                if e.lcenter != self.current {
                    return Err(format!("edge ({},{}) precedes any vertex of cluster {}", e.u, e.v, e.lcenter).into());
                }
                e.sampled = self.coin;
                out.emit(Record::Edge(e))
            }
        }
    }
}

/// Pairs the occurrences `(u,v)`, `(v,u)` (input sorted by `≺₀`) and ORs
/// their sampled-edge flags.
#[derive(Clone, Copy, Debug, Default)]
pub struct PropagateSampled {
    pending: Option<EdgeRecord>,
}

fn mate(pending: &EdgeRecord, e: &EdgeRecord) -> Result<(), Fault> {
    if (pending.u, pending.v) != (e.v, e.u) {
        return Err(format!("unpaired occurrence ({},{})", pending.u, pending.v).into());
    }
    Ok(())
}

impl Transducer for PropagateSampled {
    fn held_records(&self) -> usize {
        self.pending.is_some() as usize
    }

    fn process(&mut self, r: Record, out: &mut Output<'_>) -> Result<(), Fault> {
        match r {
            Record::Vertex(_) => {
                if let Some(p) = self.pending {
                    return Err(format!("unpaired occurrence ({},{})", p.u, p.v).into());
                }
                out.emit(r)
            }
            Record::Edge(mut e) => match self.pending.take() {
                None => {
                    self.pending = Some(e);
                    Ok(())
                }
                Some(mut p) => {
                    mate(&p, &e)?;
                    let flag = p.sampled || e.sampled;
                    p.sampled = flag;
                    e.sampled = flag;
                    out.emit(Record::Edge(p))?;
                    out.emit(Record::Edge(e))
                }
            },
        }
    }

    fn finish(&mut self, _out: &mut Output<'_>) -> Result<(), Fault> {
        match self.pending {
            Some(p) => Err(format!("unpaired occurrence ({},{})", p.u, p.v).into()),
            None => Ok(()),
        }
    }
}

/// Running minimum over each vertex's sampled-edge occurrences, written
/// into the vertex record that trails them (input sorted by `≺(C_0, C_0)`,
/// vertex last). Ties break on `(weight, rcenter, endpoint)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct NearestSampled {
    owner: u32,
    best: Option<EdgeRecord>,
    pub hooked: u64,
}

impl NearestSampled {
    fn better(a: &EdgeRecord, b: &EdgeRecord) -> bool {
        a.w.total_cmp(&b.w).then((a.rcenter, a.v).cmp(&(b.rcenter, b.v))).is_lt()
    }
}

impl Transducer for NearestSampled {
    fn held_records(&self) -> usize {
        self.best.is_some() as usize
    }

    fn process(&mut self, r: Record, out: &mut Output<'_>) -> Result<(), Fault> {
        match r {
            Record::Edge(e) => {
                if e.u != self.owner {
                    self.owner = e.u;
                    self.best = None;
                }
                if e.sampled && self.best.is_none_or(|b| Self::better(&e, &b)) {
                    self.best = Some(e);
                }
                out.emit(r)
            }
            Record::Vertex(mut v) => {
                let best = if v.v == self.owner { self.best.take() } else { None };
                self.owner = 0;
                self.best = None;
                if !v.sampled {
                    match best {
                        Some(b) => {
                            v.nearest = b.w;
                            v.chosen = b.v;
                            v.center = b.rcenter;
                            self.hooked += 1;
                        }
                        None => {
                            v.nearest = f64::INFINITY;
                            v.chosen = 0;
                        }
                    }
                }
                out.emit(Record::Vertex(v))
            }
        }
    }
}

/// Per vertex (input sorted by `≺(C_0, C_{i-1})` with weights, vertex
/// first): marks the hook edge, selects the lightest edge of every
/// neighbouring cluster lighter than the hook and rejects the rest of that
/// cluster's edges. Vertices that are neither sampled nor hooked are dropped;
/// every occurrence gets its owner's new center as `lcenter` (0 if dropped).
#[derive(Clone, Copy, Debug)]
pub struct SelectEdges {
    last_iteration: bool,
    vertex: Option<VertexRecord>,
    alive: bool,
    group: u32,
    group_selected: bool,
    pub selections: u64,
    pub hooks: u64,
    pub unsampled: u64,
}

impl SelectEdges {
    pub fn new(last_iteration: bool) -> Self {
        SelectEdges {
            last_iteration,
            vertex: None,
            alive: false,
            group: 0,
            group_selected: false,
            selections: 0,
            hooks: 0,
            unsampled: 0,
        }
    }
}

impl Transducer for SelectEdges {
    fn held_records(&self) -> usize {
        self.vertex.is_some() as usize
    }

    fn process(&mut self, r: Record, out: &mut Output<'_>) -> Result<(), Fault> {
        match r {
            Record::Vertex(mut v) => {
                if self.last_iteration {
                    v.sampled = false;
                    v.nearest = f64::INFINITY;
                    v.chosen = 0;
                }
                self.alive = v.sampled || v.nearest.is_finite();
                self.unsampled += !v.sampled as u64;
                self.vertex = Some(v);
                self.group = 0;
                self.group_selected = false;
                if self.alive {
                    out.emit(Record::Vertex(v))?;
                }
                Ok(())
            }
            Record::Edge(mut e) => {
                let v = match self.vertex {
                    Some(v) if v.v == e.u => v,
                    _ => return Err(format!("occurrence ({},{}) has no vertex record", e.u, e.v).into()),
                };
                if !v.sampled {
                    let first_of_group = e.rcenter != self.group;
                    if first_of_group {
                        self.group = e.rcenter;
                        self.group_selected = e.w < v.nearest;
                    }
                    if v.chosen != 0 && e.v == v.chosen {
                        e.mark = SpannerMark::Selected;
                        self.hooks += 1;
                    } else if self.group_selected {
                        if first_of_group {
                            e.mark = SpannerMark::Selected;
                            self.selections += 1;
                        } else {
                            e.mark = SpannerMark::Rejected;
                        }
                    }
                }
                e.lcenter = if self.alive { v.center } else { 0 };
                out.emit(Record::Edge(e))
            }
        }
    }
}

/// Pairs occurrences (input sorted by `≺₀`) and settles each edge: selected
/// on either side goes to the spanner, rejected on either side is dropped,
/// otherwise `rcenter` is refreshed from the mate's `lcenter` and the pair is
/// dropped if it became intra-cluster.
#[derive(Clone, Copy, Debug, Default)]
pub struct ResolvePairs {
    pending: Option<EdgeRecord>,
    pub emitted: u64,
    pub rejected: u64,
    pub purged: u64,
    pub live: u64,
    pub vertices: u64,
    trace: bool,
}

impl ResolvePairs {
    pub fn traced(trace: bool) -> Self {
        ResolvePairs { trace, ..Default::default() }
    }
}

impl Transducer for ResolvePairs {
    fn held_records(&self) -> usize {
        self.pending.is_some() as usize
    }

    fn process(&mut self, r: Record, out: &mut Output<'_>) -> Result<(), Fault> {
        let mut e = match r {
            Record::Vertex(_) => {
                if let Some(p) = self.pending {
                    return Err(format!("unpaired occurrence ({},{})", p.u, p.v).into());
                }
                self.vertices += 1;
                return out.emit(r);
            }
            Record::Edge(e) => e,
        };
        let Some(mut p) = self.pending.take() else {
            self.pending = Some(e);
            return Ok(());
        };
        mate(&p, &e)?;
        let marks = [p.mark, e.mark];
        let normalized = p.edge().normalized();
        if marks.contains(&SpannerMark::Selected) {
            out.emit_spanner(normalized);
            self.emitted += 1;
            return Ok(());
        }
        if marks.contains(&SpannerMark::Rejected) {
            self.rejected += 1;
            if self.trace {
                out.trace(0, normalized);
            }
            return Ok(());
        }
        if p.lcenter == 0 || e.lcenter == 0 {
            return Err(format!("live edge ({},{}) touches a deleted vertex", p.u, p.v).into());
        }
        p.rcenter = e.lcenter;
        e.rcenter = p.lcenter;
        if p.lcenter == p.rcenter {
            self.purged += 1;
            if self.trace {
                out.trace(1, normalized);
            }
            return Ok(());
        }
        p.sampled = false;
        e.sampled = false;
        self.live += 1;
        out.emit(Record::Edge(p))?;
        out.emit(Record::Edge(e))
    }

    fn finish(&mut self, _out: &mut Output<'_>) -> Result<(), Fault> {
        match self.pending {
            Some(p) => Err(format!("unpaired occurrence ({},{})", p.u, p.v).into()),
            None => Ok(()),
        }
    }
}

// ---------------------------------------------------------------- steps

fn pairs() -> SortOrder {
    SortOrder::Pairs
}

/// Loads an edge stream and expands it into occurrence pairs plus vertex
/// records under the singleton clustering, dropping parallel copies.
pub fn preprocess(rt: &mut Runtime, edges: &EdgeStream) -> Result<RecordStream> {
    let n =
        u32::try_from(edges.n).map_err(|_| Error::VertexOutOfRange { vertex: edges.n as u64, n: u32::MAX as usize })?;
    let input = rt.load(edges.iter().map(|e| Record::Edge(EdgeRecord::singleton(e.u, e.v, e.w))))?;
    let expanded = rt.stream_pass("expand", input, &mut Expand { n })?;
    let sorted = rt.sort_pass("pairs", expanded, pairs())?;
    Ok(rt.stream_pass("drop-parallel", sorted, &mut DropParallel::default())?)
}

pub fn sample_clusters(
    rt: &mut Runtime,
    iteration: u32,
    params: SamplingParams,
    stream: RecordStream,
) -> Result<(RecordStream, SampleClusters)> {
    let order = SortOrder::Cluster(ClusterOrder::new(ClusterKey::Center, ClusterKey::Label));
    let sorted = rt.sort_pass("by-cluster", stream, order)?;
    let mut t = SampleClusters::new(iteration, params);
    let out = rt.stream_pass("sample", sorted, &mut t)?;
    Ok((out, t))
}

pub fn propagate_sampled_flag(rt: &mut Runtime, stream: RecordStream) -> Result<RecordStream> {
    let sorted = rt.sort_pass("pairs", stream, pairs())?;
    Ok(rt.stream_pass("propagate-sampled", sorted, &mut PropagateSampled::default())?)
}

pub fn assign_nearest_sampled(rt: &mut Runtime, stream: RecordStream) -> Result<(RecordStream, NearestSampled)> {
    let order = SortOrder::Cluster(ClusterOrder::new(ClusterKey::Label, ClusterKey::Label).weighted().vertex_last());
    let sorted = rt.sort_pass("by-vertex-trailing", stream, order)?;
    let mut t = NearestSampled::default();
    let out = rt.stream_pass("nearest-sampled", sorted, &mut t)?;
    Ok((out, t))
}

pub fn select_spanner_edges(
    rt: &mut Runtime,
    last_iteration: bool,
    stream: RecordStream,
) -> Result<(RecordStream, SelectEdges)> {
    let order = SortOrder::Cluster(ClusterOrder::new(ClusterKey::Label, ClusterKey::Center).weighted());
    let sorted = rt.sort_pass("by-vertex-cluster", stream, order)?;
    let mut t = SelectEdges::new(last_iteration);
    let out = rt.stream_pass("select", sorted, &mut t)?;
    Ok((out, t))
}

pub fn rebuild_clustering(rt: &mut Runtime, stream: RecordStream, trace: bool) -> Result<(RecordStream, ResolvePairs)> {
    let sorted = rt.sort_pass("pairs", stream, pairs())?;
    let mut t = ResolvePairs::traced(trace);
    let out = rt.stream_pass("resolve", sorted, &mut t)?;
    Ok((out, t))
}

/// Builds a `(2k-1)`-spanner of `edges`.
pub fn run(k: u32, seed: u64, edges: &EdgeStream, options: &RunOptions) -> Result<StreamSortOutput> {
    if k == 0 {
        return Err(Error::InvalidStretchParameter(k));
    }
    if edges.n == 0 {
        return Err(Error::EmptyVertexSet);
    }
    let params = SamplingParams::new(edges.n, k, seed);
    let mut rt = Runtime::new(options.storage.clone());
    let mut result = StreamSortOutput::default();
    let mut stream = preprocess(&mut rt, edges)?;

    for iteration in 1..=k {
        if options.snapshots {
            let records = stream.to_vec()?;
            result.snapshots.push(snapshot(iteration, &records, rt.spanner().len()));
            stream = rt.load(records)?;
        }
        let last = iteration == k;
        let mut stats = IterationStats { iteration, ..Default::default() };
        if !last {
            let (s, sampler) = sample_clusters(&mut rt, iteration, params, stream)?;
            stats.sampled_clusters = sampler.sampled_clusters;
            stats.sampled_vertices = sampler.sampled_vertices;
            let s = propagate_sampled_flag(&mut rt, s)?;
            let (s, nearest) = assign_nearest_sampled(&mut rt, s)?;
            stats.hooked_vertices = nearest.hooked;
            stream = s;
        }
        let (s, select) = select_spanner_edges(&mut rt, last, stream)?;
        stats.cluster_selections = select.selections;
        stats.unsampled_vertices = select.unsampled;
        let trace_from = rt.trace().len();
        let (s, resolve) = rebuild_clustering(&mut rt, s, options.snapshots)?;
        stats.spanner_edges_emitted = resolve.emitted;
        stats.rejected_edges = resolve.rejected;
        stats.purged_edges = resolve.purged;
        stats.live_edges_after = resolve.live;
        stats.live_vertices_after = resolve.vertices;
        result.removed.extend(rt.trace()[trace_from..].iter().map(|&(tag, edge)| RemovedEdge {
            iteration,
            edge,
            reason: if tag == 0 { Removal::Rejected } else { Removal::Purged },
        }));
        result.iterations.push(stats);
        stream = s;
    }

    let leftover = stream.to_vec()?;
    if let Some(r) = leftover.iter().find(|r| r.is_edge()) {
        return Err(Error::Invariant(format!("live edge left after the last iteration: {r}")));
    }
    let (emitted, accounting) = rt.into_parts();
    let mut spanner = emitted.clone();
    spanner.sort_by_key(Edge::key);
    result.spanner = spanner;
    result.emitted = emitted;
    result.accounting = accounting;
    Ok(result)
}

fn snapshot(iteration: u32, records: &[Record], spanner_len: usize) -> IterationSnapshot {
    IterationSnapshot {
        iteration,
        vertices: records.iter().filter_map(Record::as_vertex).copied().collect(),
        edges: records.iter().filter_map(Record::as_edge).copied().collect(),
        spanner_len,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_io::{gen_gnp, WeightRange};
    use crate::verifier::check_stretch;

    fn vertex(v: u32, center: u32, sampled: bool) -> Record {
        Record::Vertex(VertexRecord { v, center, sampled, nearest: f64::INFINITY, chosen: 0 })
    }

    fn occ(u: u32, v: u32, w: f64, lcenter: u32, rcenter: u32) -> EdgeRecord {
        EdgeRecord { lcenter, rcenter, ..EdgeRecord::singleton(u, v, w) }
    }

    fn edges_of(records: &[Record]) -> Vec<EdgeRecord> {
        records.iter().filter_map(Record::as_edge).copied().collect()
    }

    #[test]
    fn preprocess_pairs_occurrences_and_drops_heavier_copies() {
        let input = EdgeStream::new(3, true, vec![Edge::new(1, 2, 3.0), Edge::new(2, 1, 1.0), Edge::new(2, 3, 2.0)]);
        let mut rt = Runtime::new(Storage::Memory);
        let out = preprocess(&mut rt, &input).unwrap().to_vec().unwrap();
        let expected = vec![
            vertex(1, 1, false),
            Record::Edge(EdgeRecord::singleton(1, 2, 1.0)),
            Record::Edge(EdgeRecord::singleton(2, 1, 1.0)),
            vertex(2, 2, false),
            Record::Edge(EdgeRecord::singleton(2, 3, 2.0)),
            Record::Edge(EdgeRecord::singleton(3, 2, 2.0)),
            vertex(3, 3, false),
        ];
        assert_eq!(out, expected);
        assert_eq!(rt.accounting().total_passes(), 3);
    }

    #[test]
    fn final_iteration_never_samples() {
        let params = SamplingParams::new(100, 3, 11);
        assert!((1..=100).all(|c| !params.sampled(3, c)));
    }

    #[test]
    fn cluster_coins_have_the_sampling_rate() {
        let (n, k) = (400, 2);
        let mut hits = 0u64;
        for seed in 0..200 {
            let params = SamplingParams::new(n, k, seed);
            hits += (1..=n as u32).filter(|&c| params.sampled(1, c)).count() as u64;
        }
        let trials = 200.0 * n as f64;
        let p = sampling_probability(n, k);
        let se = (p * (1.0 - p) / trials).sqrt();
        assert!((hits as f64 / trials - p).abs() < 4.0 * se);
    }

    #[test]
    fn sampling_fans_out_to_cluster_members() {
        // find a seed whose coin samples cluster 1 but not cluster 3 in iteration 1
        let seed = (0..1000)
            .find(|&s| {
                let p = SamplingParams::new(4, 2, s);
                p.sampled(1, 1) && !p.sampled(1, 3)
            })
            .unwrap();
        let params = SamplingParams::new(4, 2, seed);
        let mut rt = Runtime::new(Storage::Memory);
        let input = vec![
            vertex(1, 1, false),
            vertex(2, 1, false),
            Record::Edge(occ(2, 4, 1.0, 1, 3)),
            vertex(3, 3, false),
            vertex(4, 3, false),
            Record::Edge(occ(4, 2, 1.0, 3, 1)),
        ];
        let s = rt.load(input).unwrap();
        let (out, t) = sample_clusters(&mut rt, 1, params, s).unwrap();
        let out = out.to_vec().unwrap();
        let flags: Vec<bool> = out
            .iter()
            .map(|r| match r {
                Record::Vertex(v) => v.sampled,
                Record::Edge(e) => e.sampled,
            })
            .collect();
        assert_eq!(flags, [true, true, true, false, false, false]);
        assert_eq!((t.sampled_clusters, t.sampled_vertices), (1, 2));
    }

    #[test]
    fn propagation_ors_both_occurrences() {
        let mut rt = Runtime::new(Storage::Memory);
        let mut a = EdgeRecord::singleton(1, 2, 1.0);
        a.sampled = true;
        let b = EdgeRecord::singleton(2, 1, 1.0);
        let s = rt.load([Record::Edge(b), Record::Edge(a)]).unwrap();
        let out = edges_of(&propagate_sampled_flag(&mut rt, s).unwrap().to_vec().unwrap());
        assert!(out.iter().all(|e| e.sampled));
    }

    fn nearest_of(occurrences: Vec<EdgeRecord>) -> VertexRecord {
        let mut rt = Runtime::new(Storage::Memory);
        let mut input = vec![vertex(1, 1, false)];
        input.extend(occurrences.into_iter().map(|mut e| {
            e.sampled = true;
            Record::Edge(e)
        }));
        let s = rt.load(input).unwrap();
        let (out, _) = assign_nearest_sampled(&mut rt, s).unwrap();
        *out.to_vec().unwrap().iter().find_map(Record::as_vertex).unwrap()
    }

    #[test]
    fn nearest_sampled_takes_the_minimum() {
        let v = nearest_of(vec![occ(1, 5, 5.0, 1, 5), occ(1, 3, 3.0, 1, 3), occ(1, 9, 9.0, 1, 9)]);
        assert_eq!((v.nearest, v.chosen, v.center), (3.0, 3, 3));
    }

    #[test]
    fn nearest_sampled_ties_break_on_cluster() {
        let v = nearest_of(vec![occ(1, 2, 3.0, 1, 7), occ(1, 6, 3.0, 1, 4)]);
        assert_eq!((v.nearest, v.chosen, v.center), (3.0, 6, 4));
    }

    #[test]
    fn vertex_without_sampled_neighbour_is_not_hooked() {
        let mut rt = Runtime::new(Storage::Memory);
        let s = rt.load([vertex(1, 1, false), Record::Edge(occ(1, 2, 1.0, 1, 2))]).unwrap();
        let (out, t) = assign_nearest_sampled(&mut rt, s).unwrap();
        let v = *out.to_vec().unwrap().iter().find_map(Record::as_vertex).unwrap();
        assert!(v.nearest.is_infinite());
        assert_eq!((v.chosen, t.hooked), (0, 0));
    }

    #[test]
    fn selection_against_the_hook() {
        let mut rt = Runtime::new(Storage::Memory);
        let hooked = VertexRecord { v: 1, center: 40, sampled: false, nearest: 4.0, chosen: 5 };
        let input = vec![
            Record::Edge(occ(1, 6, 7.0, 1, 50)),
            Record::Edge(occ(1, 5, 4.0, 1, 40)),
            Record::Edge(occ(1, 3, 2.5, 1, 20)),
            Record::Edge(occ(1, 2, 2.0, 1, 20)),
            Record::Edge(occ(1, 4, 3.0, 1, 30)),
            Record::Vertex(hooked),
        ];
        let s = rt.load(input).unwrap();
        let (out, t) = select_spanner_edges(&mut rt, false, s).unwrap();
        let out = edges_of(&out.to_vec().unwrap());
        let marks: Vec<(u32, SpannerMark)> = out.iter().map(|e| (e.v, e.mark)).collect();
        use SpannerMark::*;
        assert_eq!(marks, [(2, Selected), (3, Rejected), (4, Selected), (5, Selected), (6, Undecided)]);
        assert!(out.iter().all(|e| e.lcenter == 40));
        assert_eq!((t.selections, t.hooks), (2, 1));
    }

    #[test]
    fn unhooked_vertex_is_dropped_after_selecting() {
        let mut rt = Runtime::new(Storage::Memory);
        let input = vec![vertex(1, 1, false), Record::Edge(occ(1, 2, 1.0, 1, 2)), Record::Edge(occ(1, 3, 2.0, 1, 2))];
        let s = rt.load(input).unwrap();
        let (out, _) = select_spanner_edges(&mut rt, false, s).unwrap();
        let out = out.to_vec().unwrap();
        assert!(out.iter().all(Record::is_edge));
        let marks: Vec<SpannerMark> = edges_of(&out).iter().map(|e| e.mark).collect();
        assert_eq!(marks, [SpannerMark::Selected, SpannerMark::Rejected]);
        assert!(edges_of(&out).iter().all(|e| e.lcenter == 0));
    }

    #[test]
    fn resolution_rules() {
        let mut rt = Runtime::new(Storage::Memory);
        let mut selected = occ(1, 2, 1.0, 10, 0);
        selected.mark = SpannerMark::Selected;
        let mut rejected = occ(3, 4, 1.0, 10, 0);
        rejected.mark = SpannerMark::Rejected;
        let input = vec![
            Record::Edge(selected),
            Record::Edge(occ(2, 1, 1.0, 20, 0)),
            Record::Edge(rejected),
            Record::Edge(occ(4, 3, 1.0, 10, 0)),
            Record::Edge(occ(5, 6, 1.0, 30, 0)),
            Record::Edge(occ(6, 5, 1.0, 30, 0)),
            Record::Edge(occ(7, 8, 1.0, 30, 0)),
            Record::Edge(occ(8, 7, 1.0, 40, 0)),
        ];
        let s = rt.load(input).unwrap();
        let (out, t) = rebuild_clustering(&mut rt, s, true).unwrap();
        let out = edges_of(&out.to_vec().unwrap());
        assert_eq!(out.len(), 2);
        assert_eq!((out[0].u, out[0].lcenter, out[0].rcenter), (7, 30, 40));
        assert_eq!((out[1].u, out[1].lcenter, out[1].rcenter), (8, 40, 30));
        assert_eq!(rt.spanner(), &[Edge::new(1, 2, 1.0)]);
        assert_eq!((t.emitted, t.rejected, t.purged, t.live), (1, 1, 1, 1));
        assert_eq!(rt.trace(), &[(0, Edge::new(3, 4, 1.0)), (1, Edge::new(5, 6, 1.0))]);
    }

    #[test]
    fn k1_returns_distinct_edges() {
        let mut g = gen_gnp(40, 0.3, 3, Some(WeightRange { lo: 1, hi: 9 }));
        let extra: Vec<Edge> = g.edges.iter().take(5).map(|e| Edge::new(e.v, e.u, e.w + 1.0)).collect();
        g.edges.extend(extra);
        let out = run(1, 0, &g, &RunOptions::default()).unwrap();
        assert_eq!(out.spanner, g.distinct_edges());
        assert_eq!(out.accounting.total_passes(), 10 - 3);
    }

    #[test]
    fn small_runs_span_with_bounded_state() {
        for k in 2..=3 {
            for seed in 0..5 {
                let g = gen_gnp(60, 0.2, seed, Some(WeightRange { lo: 1, hi: 100 }));
                let out = run(k, seed, &g, &RunOptions::default()).unwrap();
                let rep = check_stretch(g.n, &g.edges, &out.spanner, (2 * k - 1) as f64).unwrap();
                assert!(rep.passed(), "k={k} seed={seed} {rep:?}");
                assert_eq!(out.accounting.total_passes(), 10 * k as usize - 3);
                assert!(out.accounting.max_state_records <= 4);
            }
        }
    }

    #[test]
    fn temp_file_storage_matches_memory() {
        let g = gen_gnp(50, 0.2, 9, Some(WeightRange { lo: 1, hi: 20 }));
        let a = run(3, 4, &g, &RunOptions::default()).unwrap();
        let b = run(3, 4, &g, &RunOptions { storage: Storage::TempFiles(None), snapshots: false }).unwrap();
        assert_eq!(a.spanner, b.spanner);
        assert_eq!(a.accounting.total_passes(), b.accounting.total_passes());
    }
}
