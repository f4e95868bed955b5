//! Total orders for sort passes.
//!
//! * [`cmp_order0`] brings the two occurrences `(u,v)` and `(v,u)` of an
//!   edge next to each other: by `(min, max)` of the endpoints, then by the
//!   oriented pair, then by weight. A vertex record `v` is keyed `(v, 0)` and
//!   so sits ahead of every edge whose smaller endpoint is `v`, never between
//!   the two occurrences of one edge.
//! * [`cmp_order_cc`] is the clustering order `≺(C, C')`: vertices by
//!   `(C(u), C'(u), u)`, edges `(u,v)` by `(C(u), C'(v), u, v)`, and a vertex
//!   `u` ahead of an edge `(x,y)` iff `C(u) <= C(x)` (or after iff
//!   `C(u) >= C(x)` in the vertex-last variant). With the weight key on,
//!   edges compare by weight right after `C'(v)`.
//!
//! Any residual tie is left to the stability of the sort.

use std::cmp::Ordering;

use super::record::Record;

/// Which clustering a key position reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClusterKey {
    /// The current clustering: `lcenter`/`rcenter` on edges, `center` on vertices.
    Center,
    /// The singleton clustering `C_0`: the vertex label itself.
    Label,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexPosition {
    BeforeEdges,
    AfterEdges,
}

/// Parameters of `≺(C, C')`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClusterOrder {
    pub first: ClusterKey,
    pub second: ClusterKey,
    pub vertex_position: VertexPosition,
    pub by_weight: bool,
}

impl ClusterOrder {
    pub fn new(first: ClusterKey, second: ClusterKey) -> Self {
        ClusterOrder { first, second, vertex_position: VertexPosition::BeforeEdges, by_weight: false }
    }

    pub fn vertex_last(mut self) -> Self {
        self.vertex_position = VertexPosition::AfterEdges;
        self
    }

    pub fn weighted(mut self) -> Self {
        self.by_weight = true;
        self
    }

    /// The key fields this order reads from `r`, or a description of the
    /// first one that is unset.
    pub fn check_keys(&self, r: &Record) -> Result<(), &'static str> {
        match r {
            Record::Vertex(v) => {
                if (self.first == ClusterKey::Center || self.second == ClusterKey::Center) && v.center == 0 {
                    return Err("vertex center");
                }
            }
            Record::Edge(e) => {
                if self.first == ClusterKey::Center && e.lcenter == 0 {
                    return Err("edge lcenter");
                }
                if self.second == ClusterKey::Center && e.rcenter == 0 {
                    return Err("edge rcenter");
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SortOrder {
    Pairs,
    Cluster(ClusterOrder),
}

impl SortOrder {
    pub fn compare(&self, a: &Record, b: &Record) -> Ordering {
        match self {
            SortOrder::Pairs => cmp_order0(a, b),
            SortOrder::Cluster(o) => cmp_order_cc(a, b, o),
        }
    }

    pub fn check_keys(&self, r: &Record) -> Result<(), &'static str> {
        match self {
            SortOrder::Pairs => Ok(()),
            SortOrder::Cluster(o) => o.check_keys(r),
        }
    }
}

pub fn cmp_order0(a: &Record, b: &Record) -> Ordering {
    fn key(r: &Record) -> (u32, u32, u32, u32, f64) {
        match r {
            Record::Edge(e) => {
                let (lo, hi) = e.key();
                (lo, hi, e.u, e.v, e.w)
            }
            Record::Vertex(v) => (v.v, 0, 0, 0, 0.0),
        }
    }
    let (ka, kb) = (key(a), key(b));
    (ka.0, ka.1, ka.2, ka.3).cmp(&(kb.0, kb.1, kb.2, kb.3)).then(ka.4.total_cmp(&kb.4))
}

pub fn cmp_order_cc(a: &Record, b: &Record, order: &ClusterOrder) -> Ordering {
    // (C, rank, C', weight, tie1, tie2)
    fn key(r: &Record, o: &ClusterOrder) -> (u32, u8, u32, f64, u32, u32) {
        let (vertex_rank, edge_rank) = match o.vertex_position {
            VertexPosition::BeforeEdges => (0, 1),
            VertexPosition::AfterEdges => (1, 0),
        };
        match r {
            Record::Vertex(v) => {
                let pick = |k: ClusterKey| match k {
                    ClusterKey::Center => v.center,
                    ClusterKey::Label => v.v,
                };
                (pick(o.first), vertex_rank, pick(o.second), 0.0, v.v, 0)
            }
            Record::Edge(e) => {
                let first = match o.first {
                    ClusterKey::Center => e.lcenter,
                    ClusterKey::Label => e.u,
                };
                let second = match o.second {
                    ClusterKey::Center => e.rcenter,
                    ClusterKey::Label => e.v,
                };
                let w = if o.by_weight { e.w } else { 0.0 };
                (first, edge_rank, second, w, e.u, e.v)
            }
        }
    }
    let (ka, kb) = (key(a, order), key(b, order));
    (ka.0, ka.1, ka.2).cmp(&(kb.0, kb.1, kb.2)).then(ka.3.total_cmp(&kb.3)).then((ka.4, ka.5).cmp(&(kb.4, kb.5)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::streamsort::record::{EdgeRecord, VertexRecord};

    fn edge(u: u32, v: u32) -> Record {
        Record::Edge(EdgeRecord::singleton(u, v, 1.0))
    }

    #[test]
    fn order0_examples() {
        assert_eq!(cmp_order0(&edge(3, 1), &edge(1, 4)), Ordering::Less);
        assert_eq!(cmp_order0(&edge(2, 7), &edge(7, 2)), Ordering::Less);
        assert_eq!(cmp_order0(&edge(1, 2), &edge(3, 4)), Ordering::Less);
        assert_eq!(cmp_order0(&edge(1, 2), &edge(1, 2)), Ordering::Equal);
    }

    #[test]
    fn order0_places_vertices_outside_pairs() {
        let v2 = Record::Vertex(VertexRecord::singleton(2));
        assert_eq!(cmp_order0(&v2, &edge(2, 3)), Ordering::Less);
        assert_eq!(cmp_order0(&v2, &edge(1, 2)), Ordering::Greater);
    }

    #[test]
    fn vertex_precedes_edges_of_its_cluster() {
        let o = ClusterOrder::new(ClusterKey::Center, ClusterKey::Label);
        let mut u = VertexRecord::singleton(9);
        u.center = 5;
        let mut e = EdgeRecord::singleton(3, 8, 1.0);
        e.lcenter = 5;
        let (u, e) = (Record::Vertex(u), Record::Edge(e));
        assert_eq!(cmp_order_cc(&u, &e, &o), Ordering::Less);
        assert_eq!(cmp_order_cc(&u, &e, &o.vertex_last()), Ordering::Greater);
    }

    #[test]
    fn weight_key_orders_group() {
        let o = ClusterOrder::new(ClusterKey::Label, ClusterKey::Center).weighted();
        let mut heavy = EdgeRecord::singleton(1, 2, 7.0);
        let mut light = EdgeRecord::singleton(1, 3, 2.0);
        heavy.rcenter = 10;
        light.rcenter = 10;
        assert_eq!(cmp_order_cc(&Record::Edge(light), &Record::Edge(heavy), &o), Ordering::Less);
        let unweighted = ClusterOrder::new(ClusterKey::Label, ClusterKey::Center);
        assert_eq!(cmp_order_cc(&Record::Edge(light), &Record::Edge(heavy), &unweighted), Ordering::Greater);
    }

    #[test]
    fn missing_keys_detected() {
        let o = ClusterOrder::new(ClusterKey::Center, ClusterKey::Center);
        let mut v = VertexRecord::singleton(4);
        v.center = 0;
        assert!(o.check_keys(&Record::Vertex(v)).is_err());
        let mut e = EdgeRecord::singleton(1, 2, 1.0);
        e.rcenter = 0;
        assert!(o.check_keys(&Record::Edge(e)).is_err());
        assert!(ClusterOrder::new(ClusterKey::Label, ClusterKey::Label).check_keys(&Record::Edge(e)).is_ok());
    }
}
