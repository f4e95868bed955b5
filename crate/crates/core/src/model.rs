//! Vertex and edge vocabulary, the random sampling hierarchy and the
//! multilevel clustering shared by both spanner builders.

use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A vertex label in `1..=n`. Label 0 is reserved for "no vertex" inside
/// clustering arrays and never appears as a `VertexId`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(u32);

impl VertexId {
    pub fn new(id: u32) -> Option<Self> {
        (id != 0).then_some(VertexId(id))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// An undirected weighted edge. Orientation is meaningful only while the
/// edge sits in a per-vertex bucket, where `u` is the owning endpoint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub u: u32,
    pub v: u32,
    pub w: f64,
}

impl Edge {
    pub fn new(u: u32, v: u32, w: f64) -> Self {
        Edge { u, v, w }
    }

    pub fn unit(u: u32, v: u32) -> Self {
        Edge { u, v, w: 1.0 }
    }

    /// Endpoints as `(min, max)`.
    #[inline]
    pub fn key(&self) -> (u32, u32) {
        if self.u <= self.v {
            (self.u, self.v)
        } else {
            (self.v, self.u)
        }
    }

    pub fn normalized(&self) -> Edge {
        let (u, v) = self.key();
        Edge { u, v, w: self.w }
    }

    pub fn reversed(&self) -> Edge {
        Edge { u: self.v, v: self.u, w: self.w }
    }

    /// Checks the endpoints against a vertex count and rejects self-loops.
    pub fn validate(&self, n: usize) -> Result<()> {
        for x in [self.u, self.v] {
            if x == 0 || x as usize > n {
                return Err(Error::VertexOutOfRange { vertex: x as u64, n });
            }
        }
        if self.u == self.v {
            return Err(Error::SelfLoop(self.u));
        }
        if !self.w.is_finite() || self.w < 0.0 {
            return Err(Error::InvalidWeight(self.w));
        }
        Ok(())
    }
}

/// Keyed coin flips. A coin is a pure function of `(seed, domain, level, id)`,
/// so hierarchies and cluster samples can be replayed from the seed alone.
#[derive(Clone, Copy, Debug)]
pub struct Coins {
    seed: u64,
}

/// Coin domain for vertex membership in the sampling hierarchy.
pub const DOMAIN_HIERARCHY: u32 = 1;
/// Coin domain for per-iteration cluster sampling in the StreamSort builder.
pub const DOMAIN_CLUSTER: u32 = 2;

impl Coins {
    pub fn new(seed: u64) -> Self {
        Coins { seed }
    }

    /// A uniform 64-bit word for `(domain, level, id)`.
    pub fn word(&self, domain: u32, level: u32, id: u32) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(((domain as u64) << 32) | level as u64);
        rng.set_word_pos(2 * id as u128);
        rng.next_u64()
    }

    /// Bernoulli(`p`) coin for `(domain, level, id)`.
    pub fn flip(&self, domain: u32, level: u32, id: u32, p: f64) -> bool {
        let unit = (self.word(domain, level, id) >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        unit < p
    }
}

/// Sampling probability `n^{-1/k}` used at every level.
pub fn sampling_probability(n: usize, k: u32) -> f64 {
    (n as f64).powf(-1.0 / k as f64)
}

/// The nested level sets `V = S_0 ⊇ S_1 ⊇ … ⊇ S_{k-1} ⊇ S_k = ∅`, stored as
/// the highest level each vertex belongs to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplingHierarchy {
    n: usize,
    k: u32,
    seed: Option<u64>,
    // index 0 unused
    lmax: Vec<u32>,
}

impl SamplingHierarchy {
    /// Draws the hierarchy. Vertex `v` climbs from level `j-1` to `j` while
    /// its level-`j` coin succeeds, for `j = 1..k-1`.
    pub fn build(n: usize, k: u32, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyVertexSet);
        }
        if k == 0 {
            return Err(Error::InvalidStretchParameter(k));
        }
        if n > u32::MAX as usize - 1 {
            return Err(Error::VertexOutOfRange { vertex: n as u64, n: u32::MAX as usize - 1 });
        }
        let p = sampling_probability(n, k);
        let coins = Coins::new(seed);
        let mut lmax = vec![0u32; n + 1];
        for v in 1..=n as u32 {
            let mut level = 0;
            while level + 1 < k && coins.flip(DOMAIN_HIERARCHY, level + 1, v, p) {
                level += 1;
            }
            lmax[v as usize] = level;
        }
        Ok(SamplingHierarchy { n, k, seed: Some(seed), lmax })
    }

    /// Builds a hierarchy from explicit per-vertex levels (`levels[v-1]`).
    pub fn from_levels(k: u32, levels: &[u32]) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::EmptyVertexSet);
        }
        if k == 0 {
            return Err(Error::InvalidStretchParameter(k));
        }
        if let Some(pos) = levels.iter().position(|&l| l >= k) {
            return Err(Error::LevelOutOfRange { vertex: pos as u32 + 1, level: levels[pos], k });
        }
        let mut lmax = Vec::with_capacity(levels.len() + 1);
        lmax.push(0);
        lmax.extend_from_slice(levels);
        Ok(SamplingHierarchy { n: levels.len(), k, seed: None, lmax })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    #[inline]
    pub fn lmax(&self, v: u32) -> u32 {
        self.lmax[v as usize]
    }

    /// Levels of vertices `1..=n` in order.
    pub fn levels(&self) -> &[u32] {
        &self.lmax[1..]
    }

    /// Whether `v ∈ S_level`.
    #[inline]
    pub fn contains(&self, level: u32, v: u32) -> bool {
        self.lmax[v as usize] >= level
    }

    /// Size of `S_level`.
    pub fn level_size(&self, level: u32) -> usize {
        self.levels().iter().filter(|&&l| l >= level).count()
    }

    /// Whether the level-`level` cluster centered at `center` is sampled,
    /// i.e. the same center also owns a cluster one level up.
    #[inline]
    pub fn is_sampled_cluster(&self, center: u32, level: u32) -> bool {
        self.lmax[center as usize] > level
    }
}

/// Per-level center arrays `C_0 … C_{k-1}` plus each vertex's current level.
/// `C_i(v) == 0` means `v` is unclustered at level `i`.
#[derive(Clone, Debug)]
pub struct MultiLevelClustering {
    centers: Vec<Vec<u32>>,
    level: Vec<u32>,
}

impl MultiLevelClustering {
    /// Singleton clusters `{v}` for every `v ∈ S_i` at every level `i`.
    pub fn initial(h: &SamplingHierarchy) -> Self {
        let n = h.n();
        let centers = (0..h.k())
            .map(|i| (0..=n as u32).map(|v| if v != 0 && h.contains(i, v) { v } else { 0 }).collect())
            .collect();
        let mut level = vec![0u32; n + 1];
        level[1..].copy_from_slice(h.levels());
        MultiLevelClustering { centers, level }
    }

    pub fn n(&self) -> usize {
        self.level.len() - 1
    }

    pub fn k(&self) -> u32 {
        self.centers.len() as u32
    }

    #[inline]
    pub fn center(&self, level: u32, v: u32) -> u32 {
        self.centers[level as usize][v as usize]
    }

    #[inline]
    pub fn level(&self, v: u32) -> u32 {
        self.level[v as usize]
    }

    /// Raw level-`level` center array, index 0 unused.
    pub fn level_array(&self, level: u32) -> &[u32] {
        &self.centers[level as usize]
    }

    /// Moves `u` into the clusters centered at `x` for levels `from..=to` and
    /// raises `ℓ(u)` to `to`.
    pub(crate) fn join(&mut self, u: u32, x: u32, from: u32, to: u32) {
        for j in from..=to {
            debug_assert_eq!(self.centers[j as usize][u as usize], 0);
            self.centers[j as usize][u as usize] = x;
        }
        self.level[u as usize] = to;
    }

    /// Checks `C_0 = id`, contiguity of clustered levels, that centers at
    /// level `i` lie in `S_i` and are their own centers, and nesting:
    /// every cluster at level `i+1` contains the sampled level-`i` cluster
    /// with the same center. Returns the first violation found.
    pub fn check(&self, h: &SamplingHierarchy) -> std::result::Result<(), String> {
        let n = self.n() as u32;
        let k = self.k();
        for v in 1..=n {
            if self.center(0, v) != v {
                return Err(format!("C_0({v}) = {} != {v}", self.center(0, v)));
            }
            let l = self.level(v);
            if l >= k {
                return Err(format!("level of {v} is {l} >= k = {k}"));
            }
            if l < h.lmax(v) {
                return Err(format!("level of {v} fell below its sampled level {}", h.lmax(v)));
            }
            for i in 0..k {
                let x = self.center(i, v);
                if (x != 0) != (i <= l) {
                    return Err(format!("clustered levels of {v} are not [0, {l}] (C_{i} = {x})"));
                }
                if x != 0 {
                    if h.lmax(x) < i {
                        return Err(format!("center {x} of {v} at level {i} is not in S_{i}"));
                    }
                    if self.center(i, x) != x {
                        return Err(format!("center {x} at level {i} is not its own center"));
                    }
                    if i > 0 && !h.is_sampled_cluster(x, i - 1) {
                        return Err(format!("cluster of {x} at level {i} has no sampled level-{} sub-cluster", i - 1));
                    }
                }
            }
        }
        Ok(())
    }
}
