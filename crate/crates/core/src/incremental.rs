//! Single-pass streaming spanner construction.
//!
//! Every vertex `u` waits at its level `ℓ(u)` with two buckets: `Temp(u)`, a
//! buffer of freshly arrived edges, and `ℰ(u)`, one representative edge per
//! adjacent level-`ℓ(u)` cluster. An edge into a sampled cluster lifts `u`
//! to a higher level and flushes both buckets into the committed spanner;
//! otherwise the edge is buffered and `Temp(u)` is pruned against `ℰ(u)`
//! once it grows as large as `ℰ(u)`. Pruning touches each buffered edge
//! once, which gives amortized O(1) work per edge.
//!
//! At every quiescent point the union of committed edges and both buckets of
//! every vertex is a `(2k-1)`-spanner of the edges seen so far. If the stream
//! arrives in nondecreasing weight order the same structure is a weighted
//! `(2k-1)`-spanner.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{Edge, MultiLevelClustering, SamplingHierarchy};

/// An edge moved into the spanner for good.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommittedEdge {
    pub edge: Edge,
    /// Set for the edge through which a vertex joined a sampled cluster.
    pub hook: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WorkCounters {
    pub edges_processed: u64,
    pub prune_calls: u64,
    /// Bucket elements scanned by `prune`: `|ℰ(u)| + |Temp(u)|` per call.
    pub prune_scans: u64,
    pub promotions: u64,
    pub discards: u64,
    pub rises: u64,
}

#[derive(Clone, Debug)]
pub struct SpannerState {
    hierarchy: SamplingHierarchy,
    clustering: MultiLevelClustering,
    temp: Vec<Vec<Edge>>,
    reps: Vec<Vec<Edge>>,
    committed: Vec<CommittedEdge>,
    scratch: Vec<bool>,
    // final |ℰ_i(u)| per (u, i), updated on rise and read live for ℓ(u)
    settled_reps: Vec<u32>,
    counters: WorkCounters,
    check_invariants: bool,
}

impl SpannerState {
    pub fn new(hierarchy: SamplingHierarchy) -> Self {
        let n = hierarchy.n();
        let k = hierarchy.k() as usize;
        let clustering = MultiLevelClustering::initial(&hierarchy);
        SpannerState {
            hierarchy,
            clustering,
            temp: vec![Vec::new(); n + 1],
            reps: vec![Vec::new(); n + 1],
            committed: Vec::new(),
            scratch: vec![false; n + 1],
            settled_reps: vec![0; (n + 1) * k],
            counters: WorkCounters::default(),
            check_invariants: false,
        }
    }

    /// Enables per-step assertions: the scratch array is clear on entry to
    /// `prune`, every discarded edge has a representative from the same
    /// cluster, and `|Temp(u)| <= |ℰ(u)|` holds after each edge.
    pub fn with_invariant_checks(mut self, on: bool) -> Self {
        self.check_invariants = on;
        self
    }

    pub fn hierarchy(&self) -> &SamplingHierarchy {
        &self.hierarchy
    }

    pub fn clustering(&self) -> &MultiLevelClustering {
        &self.clustering
    }

    pub fn counters(&self) -> WorkCounters {
        self.counters
    }

    pub fn n(&self) -> usize {
        self.hierarchy.n()
    }

    pub fn k(&self) -> u32 {
        self.hierarchy.k()
    }

    pub fn temp(&self, u: u32) -> &[Edge] {
        &self.temp[u as usize]
    }

    pub fn representatives(&self, u: u32) -> &[Edge] {
        &self.reps[u as usize]
    }

    pub fn committed(&self) -> &[CommittedEdge] {
        &self.committed
    }

    pub fn hook_edges(&self) -> Vec<Edge> {
        self.committed.iter().filter(|c| c.hook).map(|c| c.edge).collect()
    }

    pub fn hook_edge_count(&self) -> usize {
        self.committed.iter().filter(|c| c.hook).count()
    }

    /// Number of representative edges `u` held at `level`: the size when `u`
    /// left that level, or the current `|ℰ(u)|` if `u` is still there.
    pub fn representative_count(&self, u: u32, level: u32) -> usize {
        if self.clustering.level(u) == level {
            self.reps[u as usize].len()
        } else {
            self.settled_reps[u as usize * self.k() as usize + level as usize] as usize
        }
    }

    /// Feeds one stream edge.
    pub fn process_edge(&mut self, e: Edge) -> Result<()> {
        e.validate(self.n())?;
        let (mut u, mut v) = (e.u, e.v);
        if self.clustering.level(u) > self.clustering.level(v) {
            std::mem::swap(&mut u, &mut v);
        }
        let i = self.clustering.level(u);
        let x = self.clustering.center(i, v);
        if x == 0 {
            return Err(Error::Invariant(format!(
                "vertex {v} at level {} is unclustered at level {i}",
                self.clustering.level(v)
            )));
        }
        let h = self.hierarchy.lmax(x);
        let oriented = Edge::new(u, v, e.w);
        self.counters.edges_processed += 1;

        if h > i {
            self.clustering.join(u, x, i + 1, h);
            let k = self.k() as usize;
            self.settled_reps[u as usize * k + i as usize] = self.reps[u as usize].len() as u32;
            let temp = std::mem::take(&mut self.temp[u as usize]);
            let reps = std::mem::take(&mut self.reps[u as usize]);
            self.committed.extend(temp.into_iter().chain(reps).map(|edge| CommittedEdge { edge, hook: false }));
            self.committed.push(CommittedEdge { edge: oriented, hook: true });
            self.counters.rises += 1;
        } else {
            self.temp[u as usize].push(oriented);
            if self.temp[u as usize].len() >= self.reps[u as usize].len() {
                self.prune(u, i)?;
            }
        }

        if self.check_invariants && self.temp[u as usize].len() > self.reps[u as usize].len() {
            return Err(Error::Invariant(format!(
                "bucket bound fails at vertex {u}: |Temp| = {} > |E| = {}",
                self.temp[u as usize].len(),
                self.reps[u as usize].len()
            )));
        }
        Ok(())
    }

    /// Folds `Temp(u)` into `ℰ(u)`, keeping one edge per level-`i` cluster
    /// adjacent to `u` other than `u`'s own, and discarding the rest.
    fn prune(&mut self, u: u32, i: u32) -> Result<()> {
        if self.check_invariants && self.scratch.iter().any(|&a| a) {
            return Err(Error::Invariant("scratch array not clear on entry to prune".into()));
        }
        let ui = u as usize;
        let own = self.clustering.center(i, u);
        let temp = std::mem::take(&mut self.temp[ui]);
        self.counters.prune_calls += 1;
        self.counters.prune_scans += (self.reps[ui].len() + temp.len()) as u64;

        for e in &self.reps[ui] {
            self.scratch[self.clustering.center(i, e.v) as usize] = true;
        }
        for e in temp {
            let c = self.clustering.center(i, e.v);
            debug_assert_ne!(c, 0);
            if !self.scratch[c as usize] && c != own {
                self.scratch[c as usize] = true;
                self.reps[ui].push(e);
                self.counters.promotions += 1;
            } else {
                self.counters.discards += 1;
                if self.check_invariants && c != own {
                    let witnessed = self.reps[ui].iter().any(|r| self.clustering.center(i, r.v) == c);
                    if !witnessed {
                        return Err(Error::Invariant(format!(
                            "discarded ({u},{}) at level {i} without a representative from cluster {c}",
                            e.v
                        )));
                    }
                }
            }
        }
        for e in &self.reps[ui] {
            self.scratch[self.clustering.center(i, e.v) as usize] = false;
        }
        Ok(())
    }

    /// Feeds a stream that must be in nondecreasing weight order, failing
    /// at the first out-of-order edge (1-based position within `edges`).
    pub fn process_sorted(&mut self, edges: impl IntoIterator<Item = Edge>) -> Result<()> {
        let mut previous = f64::NEG_INFINITY;
        for (idx, e) in edges.into_iter().enumerate() {
            if e.w < previous {
                return Err(Error::WeightOrder { position: idx + 1, previous, weight: e.w });
            }
            previous = e.w;
            self.process_edge(e)?;
        }
        Ok(())
    }

    /// The current spanner: committed edges plus every bucket, one entry per
    /// vertex pair (lightest copy kept), sorted by endpoints.
    pub fn spanner_edges(&self) -> Vec<Edge> {
        let mut best: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        let buckets = self.temp.iter().chain(&self.reps).flatten();
        for e in self.committed.iter().map(|c| &c.edge).chain(buckets) {
            best.entry(e.key())
                .and_modify(|w| {
                    if e.w < *w {
                        *w = e.w
                    }
                })
                .or_insert(e.w);
        }
        best.into_iter().map(|((u, v), w)| Edge::new(u, v, w)).collect()
    }

    /// Full structural check at a quiescent point: clustering invariants,
    /// `|Temp(u)| <= |ℰ(u)|`, a clear scratch array, representatives drawn from
    /// distinct foreign clusters, and the hook-edge budget `n(k-1)`.
    pub fn check(&self) -> Result<()> {
        self.clustering.check(&self.hierarchy).map_err(Error::Invariant)?;
        if self.scratch.iter().any(|&a| a) {
            return Err(Error::Invariant("scratch array not clear".into()));
        }
        for u in 1..=self.n() as u32 {
            let (t, r) = (self.temp(u), self.representatives(u));
            if t.len() > r.len() {
                return Err(Error::Invariant(format!(
                    "bucket bound fails at {u}: |Temp| = {} > |E| = {}",
                    t.len(),
                    r.len()
                )));
            }
            let i = self.clustering.level(u);
            let own = self.clustering.center(i, u);
            let mut seen: Vec<u32> = r.iter().map(|e| self.clustering.center(i, e.v)).collect();
            if seen.contains(&own) {
                return Err(Error::Invariant(format!("E({u}) holds an edge into its own cluster")));
            }
            seen.sort_unstable();
            if seen.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Invariant(format!("E({u}) holds two edges from one cluster")));
            }
        }
        let bound = self.n() * (self.k() as usize - 1);
        if self.hook_edge_count() > bound {
            return Err(Error::Invariant(format!("{} hook edges exceed n(k-1) = {bound}", self.hook_edge_count())));
        }
        Ok(())
    }
}

/// Runs the single-pass algorithm over `edges` and returns the final state.
pub fn build_single_pass(hierarchy: SamplingHierarchy, edges: impl IntoIterator<Item = Edge>) -> Result<SpannerState> {
    let mut state = SpannerState::new(hierarchy);
    for e in edges {
        state.process_edge(e)?;
    }
    Ok(state)
}

/// Runs the single-pass algorithm on a stream that must arrive in
/// nondecreasing weight order; the result is a weighted `(2k-1)`-spanner.
/// Fails at the first out-of-order edge (1-based position).
pub fn build_sorted_weighted_state(
    hierarchy: SamplingHierarchy,
    edges: impl IntoIterator<Item = Edge>,
) -> Result<SpannerState> {
    let mut state = SpannerState::new(hierarchy);
    state.process_sorted(edges)?;
    Ok(state)
}

pub fn build_from_sorted_weighted_stream(
    hierarchy: SamplingHierarchy,
    edges: impl IntoIterator<Item = Edge>,
) -> Result<Vec<Edge>> {
    build_sorted_weighted_state(hierarchy, edges).map(|s| s.spanner_edges())
}
