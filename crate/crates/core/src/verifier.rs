//! Exact-distance oracles and checks for spanner outputs.
//!
//! Stretch is checked per edge of the input graph: if every edge `(u,v)`
//! satisfies `d_S(u,v) <= t * w(u,v)` then concatenating along a shortest
//! path gives `d_S(x,y) <= t * d_G(x,y)` for every pair. That needs one
//! shortest-path search in `S` per source vertex instead of all-pairs path
//! reconstruction. [`check_stretch_all_pairs`] computes the full ratio on
//! small graphs so the reduction itself can be tested.
//!
//! Unreachable distances are `f64::INFINITY`, which exceeds every finite sum.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::incremental::SpannerState;
use crate::model::Edge;
use crate::streamsort::spanner::{IterationSnapshot, Removal, RemovedEdge};

/// Default largest `n` accepted by the oracles.
pub const DEFAULT_GUARD: usize = 3000;

/// Undirected adjacency lists, 1-based. Parallel edges keep the lightest copy.
#[derive(Clone, Debug)]
pub struct Graph {
    adj: Vec<Vec<(u32, f64)>>,
    unit: bool,
}

impl Graph {
    pub fn from_edges(n: usize, edges: &[Edge]) -> Self {
        let mut best: HashMap<(u32, u32), f64> = HashMap::with_capacity(edges.len());
        for e in edges {
            let w = best.entry(e.key()).or_insert(e.w);
            if e.w < *w {
                *w = e.w;
            }
        }
        let mut adj = vec![Vec::new(); n + 1];
        let mut unit = true;
        let mut pairs: Vec<_> = best.into_iter().collect();
        pairs.sort_by_key(|&(k, _)| k);
        for ((a, b), w) in pairs {
            unit &= w == 1.0;
            adj[a as usize].push((b, w));
            adj[b as usize].push((a, w));
        }
        Graph { adj, unit }
    }

    pub fn n(&self) -> usize {
        self.adj.len() - 1
    }

    pub fn neighbors(&self, v: u32) -> &[(u32, f64)] {
        &self.adj[v as usize]
    }

    pub fn is_unit_weight(&self) -> bool {
        self.unit
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Item(f64, u32);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Exact distances from `source`; BFS on unit-weight graphs, Dijkstra otherwise.
pub fn exact_distances(g: &Graph, source: u32) -> Result<Vec<f64>> {
    exact_distances_guarded(g, source, DEFAULT_GUARD)
}

pub fn exact_distances_guarded(g: &Graph, source: u32, guard: usize) -> Result<Vec<f64>> {
    if g.n() > guard {
        return Err(Error::GuardExceeded { n: g.n(), limit: guard });
    }
    if source == 0 || source as usize > g.n() {
        return Err(Error::VertexOutOfRange { vertex: source as u64, n: g.n() });
    }
    Ok(if g.unit { bfs(g, source) } else { dijkstra(g, source) })
}

fn bfs(g: &Graph, s: u32) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; g.adj.len()];
    dist[s as usize] = 0.0;
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u as usize] + 1.0;
        for &(v, _) in g.neighbors(u) {
            if dist[v as usize].is_infinite() {
                dist[v as usize] = d;
                queue.push_back(v);
            }
        }
    }
    dist
}

fn dijkstra(g: &Graph, s: u32) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; g.adj.len()];
    dist[s as usize] = 0.0;
    let mut heap = BinaryHeap::from([Item(0.0, s)]);
    while let Some(Item(d, u)) = heap.pop() {
        if d > dist[u as usize] {
            continue;
        }
        for &(v, w) in g.neighbors(u) {
            let nd = d + w;
            if nd < dist[v as usize] {
                dist[v as usize] = nd;
                heap.push(Item(nd, v));
            }
        }
    }
    dist
}

/// `d / base`, with `0/0 = 1`.
fn ratio(d: f64, base: f64) -> f64 {
    if base == 0.0 {
        if d == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        d / base
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StretchReport {
    pub t: f64,
    pub max_ratio: f64,
    /// Pair attaining `max_ratio`.
    pub witness: Option<(u32, u32)>,
    pub pairs_checked: usize,
    pub violations: usize,
}

impl StretchReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn check_n(n: usize, edges: &[Edge], what: &str) -> Result<()> {
    if n > DEFAULT_GUARD {
        return Err(Error::GuardExceeded { n, limit: DEFAULT_GUARD });
    }
    for e in edges {
        e.validate(n).map_err(|err| Error::Invariant(format!("{what}: {err}")))?;
    }
    Ok(())
}

/// Checks `d_S(u,v) <= t * w(u,v)` for every edge `(u,v)` of `g_edges`.
pub fn check_stretch(n: usize, g_edges: &[Edge], s_edges: &[Edge], t: f64) -> Result<StretchReport> {
    check_n(n, g_edges, "graph")?;
    check_n(n, s_edges, "spanner")?;
    let g = Graph::from_edges(n, g_edges);
    let s = Graph::from_edges(n, s_edges);
    let mut report = StretchReport { t, max_ratio: 1.0, witness: None, pairs_checked: 0, violations: 0 };
    for u in 1..=n as u32 {
        let later: Vec<(u32, f64)> = g.neighbors(u).iter().copied().filter(|&(v, _)| v > u).collect();
        if later.is_empty() {
            continue;
        }
        let ds = exact_distances(&s, u)?;
        for (v, w) in later {
            let r = ratio(ds[v as usize], w);
            report.pairs_checked += 1;
            if report.witness.is_none() || r > report.max_ratio {
                report.max_ratio = r;
                report.witness = Some((u, v));
            }
            if ds[v as usize] > t * w {
                report.violations += 1;
            }
        }
    }
    Ok(report)
}

/// Full `max d_S(x,y) / d_G(x,y)` over connected pairs. Quadratic; for tests.
pub fn check_stretch_all_pairs(n: usize, g_edges: &[Edge], s_edges: &[Edge], t: f64) -> Result<StretchReport> {
    check_n(n, g_edges, "graph")?;
    check_n(n, s_edges, "spanner")?;
    let g = Graph::from_edges(n, g_edges);
    let s = Graph::from_edges(n, s_edges);
    let mut report = StretchReport { t, max_ratio: 1.0, witness: None, pairs_checked: 0, violations: 0 };
    for x in 1..=n as u32 {
        let dg = exact_distances(&g, x)?;
        let ds = exact_distances(&s, x)?;
        for y in x + 1..=n as u32 {
            let base = dg[y as usize];
            if base.is_infinite() {
                continue;
            }
            let r = ratio(ds[y as usize], base);
            report.pairs_checked += 1;
            if report.witness.is_none() || r > report.max_ratio {
                report.max_ratio = r;
                report.witness = Some((x, y));
            }
            if ds[y as usize] > t * base {
                report.violations += 1;
            }
        }
    }
    Ok(report)
}

/// Outcome of one invariant suite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: String,
    pub checked: usize,
    pub violations: usize,
    pub first_counterexample: Option<String>,
}

impl CheckOutcome {
    fn new(name: &str) -> Self {
        CheckOutcome { name: name.to_string(), checked: 0, violations: 0, first_counterexample: None }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.violations += 1;
            if self.first_counterexample.is_none() {
                self.first_counterexample = Some(describe());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Every clustered vertex reaches its level-`i` center through at most `i`
/// hook edges.
pub fn check_cluster_radius(state: &SpannerState) -> CheckOutcome {
    let mut out = CheckOutcome::new("cluster_radius");
    let n = state.n();
    let hooks = Graph::from_edges(n, &state.hook_edges().iter().map(|e| Edge::unit(e.u, e.v)).collect::<Vec<_>>());
    let clustering = state.clustering();
    let mut from_center: HashMap<u32, Vec<f64>> = HashMap::new();
    for i in 0..state.k() {
        for v in 1..=n as u32 {
            let x = clustering.center(i, v);
            if x == 0 {
                continue;
            }
            let dist = from_center.entry(x).or_insert_with(|| bfs(&hooks, x));
            let d = dist[v as usize];
            out.record(d <= i as f64, || format!("level={i} vertex={v} center={x} hook_distance={d}"));
        }
    }
    out
}

/// Cluster nesting, the `|Temp| <= |ℰ|` bound and bucket bookkeeping of a
/// quiescent state.
pub fn check_state_invariants(state: &SpannerState) -> CheckOutcome {
    let mut out = CheckOutcome::new("state_invariants");
    let res = state.check();
    out.record(res.is_ok(), || res.unwrap_err().to_string());
    out
}

/// For every live edge `(u,v)` at the start of iteration `i`, `u` reaches
/// its current center through at most `i-1` spanner edges emitted before
/// iteration `i`, each no heavier than `w(u,v)`.
///
/// `emitted` is the spanner in emission order; each snapshot's
/// `spanner_len` marks its prefix.
pub fn check_property_p(n: usize, snapshots: &[IterationSnapshot], emitted: &[Edge]) -> CheckOutcome {
    let mut out = CheckOutcome::new("property_p");
    for snap in snapshots {
        let prefix = &emitted[..snap.spanner_len.min(emitted.len())];
        let g = Graph::from_edges(n, prefix);
        let hops = snap.iteration.saturating_sub(1);
        for e in &snap.edges {
            let ok = e.lcenter != 0 && bounded_reach(&g, e.u, e.lcenter, e.w, hops);
            out.record(ok, || {
                format!(
                    "iteration={} edge=({},{}) w={} center={} max_hops={hops}",
                    snap.iteration, e.u, e.v, e.w, e.lcenter
                )
            });
        }
    }
    out
}

/// Whether `to` is within `hops` edges of `from` using edges of weight `<= cap`.
fn bounded_reach(g: &Graph, from: u32, to: u32, cap: f64, hops: u32) -> bool {
    if from == to {
        return true;
    }
    let mut depth = HashMap::from([(from, 0u32)]);
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        let d = depth[&u];
        if d == hops {
            continue;
        }
        for &(v, w) in g.neighbors(u) {
            if w <= cap && !depth.contains_key(&v) {
                if v == to {
                    return true;
                }
                depth.insert(v, d + 1);
                queue.push_back(v);
            }
        }
    }
    false
}

/// Every edge dropped by the StreamSort driver in iteration `i` is spanned
/// in the final spanner with stretch `2i-1` if rejected, `2i` if purged.
pub fn check_removed_edges(n: usize, removed: &[RemovedEdge], spanner: &[Edge]) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("removed_edge_witness");
    let s = Graph::from_edges(n, spanner);
    let mut by_source: HashMap<u32, Vec<&RemovedEdge>> = HashMap::new();
    for r in removed {
        by_source.entry(r.edge.u.min(r.edge.v)).or_default().push(r);
    }
    let mut sources: Vec<_> = by_source.into_iter().collect();
    sources.sort_by_key(|(u, _)| *u);
    for (u, list) in sources {
        let ds = exact_distances(&s, u)?;
        for r in list {
            let v = r.edge.u.max(r.edge.v);
            let factor = match r.reason {
                Removal::Rejected => 2 * r.iteration - 1,
                Removal::Purged => 2 * r.iteration,
            } as f64;
            let d = ds[v as usize];
            out.record(d <= factor * r.edge.w, || {
                format!("iteration={} edge=({u},{v}) w={} reason={:?} d_S={d}", r.iteration, r.edge.w, r.reason)
            });
        }
    }
    Ok(out)
}

/// One build, as seen by [`check_size_and_work`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BuildSummary {
    pub n: usize,
    pub m: usize,
    pub k: u32,
    pub spanner_size: usize,
    pub hook_edges: usize,
    pub prune_scans: u64,
}

/// `k * n^{1+1/k} + k * n`.
pub fn size_bound(n: usize, k: u32) -> f64 {
    let (n, k) = (n as f64, k as f64);
    k * n.powf(1.0 + 1.0 / k) + k * n
}

#[derive(Clone, Debug, PartialEq)]
pub struct SizeWorkReport {
    pub runs: usize,
    pub mean_size: f64,
    pub size_bound: f64,
    pub max_hook_edges: usize,
    pub hook_violations: usize,
    /// Runs with `prune_scans > 10 (m + k n)`.
    pub scan_violations: usize,
    pub mean_scans_per_edge: f64,
}

/// Aggregates a batch of builds of one configuration.
pub fn check_size_and_work(runs: &[BuildSummary]) -> SizeWorkReport {
    let count = runs.len().max(1) as f64;
    let mut report = SizeWorkReport {
        runs: runs.len(),
        mean_size: runs.iter().map(|r| r.spanner_size as f64).sum::<f64>() / count,
        size_bound: runs.first().map_or(0.0, |r| size_bound(r.n, r.k)),
        max_hook_edges: 0,
        hook_violations: 0,
        scan_violations: 0,
        mean_scans_per_edge: 0.0,
    };
    for r in runs {
        report.max_hook_edges = report.max_hook_edges.max(r.hook_edges);
        report.hook_violations += (r.hook_edges > r.n * (r.k as usize - 1)) as usize;
        report.scan_violations += (r.prune_scans > 10 * (r.m as u64 + r.k as u64 * r.n as u64)) as usize;
        report.mean_scans_per_edge += r.prune_scans as f64 / r.m.max(1) as f64 / count;
    }
    report
}

/// `max / min` of per-family scans-per-edge ratios.
pub fn ratio_spread(ratios: &[f64]) -> f64 {
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    if ratios.is_empty() {
        1.0
    } else {
        max / min
    }
}

/// Line-oriented summary of one verification.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerificationReport {
    pub stretch: Option<StretchReport>,
    pub spanner_size: usize,
    pub hook_edge_count: Option<usize>,
    pub prune_scan_total: Option<u64>,
    pub stream_passes: Option<usize>,
    pub sort_passes: Option<usize>,
    pub checks: Vec<CheckOutcome>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.stretch.as_ref().is_none_or(StretchReport::passed) && self.checks.iter().all(CheckOutcome::passed)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        if let Some(st) = &self.stretch {
            let _ = writeln!(s, "stretch_bound={}", st.t);
            let _ = writeln!(s, "max_stretch_ratio={}", st.max_ratio);
            match st.witness {
                Some((u, v)) => _ = writeln!(s, "witness={u},{v}"),
                None => _ = writeln!(s, "witness=none"),
            }
            let _ = writeln!(s, "pairs_checked={}", st.pairs_checked);
            let _ = writeln!(s, "stretch_violations={}", st.violations);
            let _ = writeln!(s, "stretch={}", if st.passed() { "pass" } else { "fail" });
        }
        let _ = writeln!(s, "spanner_size={}", self.spanner_size);
        if let Some(h) = self.hook_edge_count {
            let _ = writeln!(s, "hook_edge_count={h}");
        }
        if let Some(p) = self.prune_scan_total {
            let _ = writeln!(s, "prune_scan_total={p}");
        }
        if let Some(p) = self.stream_passes {
            let _ = writeln!(s, "stream_passes={p}");
        }
        if let Some(p) = self.sort_passes {
            let _ = writeln!(s, "sort_passes={p}");
        }
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{}={} checked={} violations={}",
                c.name,
                if c.passed() { "pass" } else { "fail" },
                c.checked,
                c.violations
            );
            if let Some(x) = &c.first_counterexample {
                let _ = writeln!(s, "{}_counterexample={x}", c.name);
            }
        }
        let _ = write!(s, "result={}", if self.all_passed() { "pass" } else { "fail" });
        f.write_str(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: u32) -> Vec<Edge> {
        (1..n).map(|i| Edge::unit(i, i + 1)).collect()
    }

    #[test]
    fn path_distances() {
        let g = Graph::from_edges(3, &path(3));
        assert_eq!(exact_distances(&g, 1).unwrap()[1..], [0.0, 1.0, 2.0]);
    }

    #[test]
    fn weighted_triangle() {
        let g = Graph::from_edges(3, &[Edge::new(1, 2, 1.0), Edge::new(2, 3, 1.0), Edge::new(1, 3, 5.0)]);
        assert_eq!(exact_distances(&g, 1).unwrap()[3], 2.0);
    }

    #[test]
    fn unreachable_is_infinite_and_guard_applies() {
        let g = Graph::from_edges(4, &path(2));
        assert!(exact_distances(&g, 1).unwrap()[4].is_infinite());
        assert!(matches!(exact_distances_guarded(&g, 1, 3), Err(Error::GuardExceeded { .. })));
    }

    #[test]
    fn cycle_against_path() {
        let mut cycle = path(5);
        cycle.push(Edge::unit(5, 1));
        let r = check_stretch(5, &cycle, &path(5), 3.0).unwrap();
        assert_eq!(r.max_ratio, 4.0);
        assert_eq!(r.witness, Some((1, 5)));
        assert!(!r.passed());
        assert!(check_stretch(5, &cycle, &path(5), 5.0).unwrap().passed());
        let same = check_stretch(5, &cycle, &cycle, 1.0).unwrap();
        assert_eq!(same.max_ratio, 1.0);
        assert!(same.passed());
    }

    #[test]
    fn zero_weight_edges() {
        let g = [Edge::new(1, 2, 0.0), Edge::new(2, 3, 1.0)];
        assert!(check_stretch(3, &g, &g, 1.0).unwrap().passed());
        let r = check_stretch(3, &g, &g[1..], 3.0).unwrap();
        assert!(r.max_ratio.is_infinite());
        assert!(!r.passed());
    }

    #[test]
    fn bounded_reach_respects_caps() {
        let g = Graph::from_edges(4, &[Edge::new(1, 2, 1.0), Edge::new(2, 3, 4.0), Edge::new(3, 4, 1.0)]);
        assert!(bounded_reach(&g, 1, 2, 1.0, 1));
        assert!(!bounded_reach(&g, 1, 3, 3.0, 5));
        assert!(bounded_reach(&g, 1, 3, 4.0, 2));
        assert!(!bounded_reach(&g, 1, 4, 4.0, 2));
    }

    #[test]
    fn size_work_aggregation() {
        let runs = [
            BuildSummary { n: 10, m: 40, k: 2, spanner_size: 20, hook_edges: 5, prune_scans: 80 },
            BuildSummary { n: 10, m: 40, k: 2, spanner_size: 30, hook_edges: 11, prune_scans: 700 },
        ];
        let r = check_size_and_work(&runs);
        assert_eq!(r.mean_size, 25.0);
        assert_eq!(r.hook_violations, 1);
        assert_eq!(r.scan_violations, 1);
        assert!((r.mean_scans_per_edge - 9.75).abs() < 1e-12);
        assert_eq!(ratio_spread(&[1.0, 1.5, 0.75]), 2.0);
    }

    #[test]
    fn report_lines() {
        let mut rep = VerificationReport { spanner_size: 4, ..Default::default() };
        rep.checks.push(CheckOutcome::new("x"));
        assert!(rep.all_passed());
        assert!(rep.to_string().ends_with("result=pass"));
        rep.checks[0].record(false, || "bad".into());
        assert!(rep.to_string().contains("x_counterexample=bad"));
        assert!(!rep.all_passed());
    }
}
