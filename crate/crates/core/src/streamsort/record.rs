//! Stream records and their fixed-width binary layout.
//!
//! Every record is [`RECORD_BYTES`] long, little-endian:
//!
//! | offset | size | edge occurrence `(u,v)` | vertex `v`          |
//! |--------|------|-------------------------|---------------------|
//! | 0      | 1    | tag `b'E'`              | tag `b'V'`          |
//! | 1      | 4    | `u`                     | `v`                 |
//! | 5      | 4    | `v`                     | center `C(v)`       |
//! | 9      | 4    | `lcenter`               | chosen endpoint     |
//! | 13     | 4    | `rcenter`               | 0                   |
//! | 17     | 8    | weight (`f64`)          | `N(v)` (`f64`, ∞ ok)|
//! | 25     | 1    | spanner mark (`i8`)     | sampled (0/1)       |
//! | 26     | 1    | sampled-edge (0/1)      | 0                   |

use std::fmt;

use crate::model::Edge;

pub const RECORD_BYTES: usize = 27;

/// Decision state of an edge occurrence.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SpannerMark {
    Rejected,
    #[default]
    Undecided,
    Selected,
}

impl SpannerMark {
    pub fn as_i8(self) -> i8 {
        match self {
            SpannerMark::Rejected => -1,
            SpannerMark::Undecided => 0,
            SpannerMark::Selected => 1,
        }
    }

    pub fn from_i8(x: i8) -> Option<Self> {
        match x {
            -1 => Some(SpannerMark::Rejected),
            0 => Some(SpannerMark::Undecided),
            1 => Some(SpannerMark::Selected),
            _ => None,
        }
    }
}

/// One occurrence `(u, v)` of an undirected edge, owned by `u`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeRecord {
    pub u: u32,
    pub v: u32,
    pub w: f64,
    /// Center of `u`'s cluster in the current clustering.
    pub lcenter: u32,
    /// Center of `v`'s cluster in the current clustering.
    pub rcenter: u32,
    pub mark: SpannerMark,
    pub sampled: bool,
}

impl EdgeRecord {
    /// Fresh occurrence under the singleton clustering.
    pub fn singleton(u: u32, v: u32, w: f64) -> Self {
        EdgeRecord { u, v, w, lcenter: u, rcenter: v, mark: SpannerMark::Undecided, sampled: false }
    }

    pub fn key(&self) -> (u32, u32) {
        (self.u.min(self.v), self.u.max(self.v))
    }

    pub fn edge(&self) -> Edge {
        Edge::new(self.u, self.v, self.w)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VertexRecord {
    pub v: u32,
    /// `C(v)`; 0 once the vertex has no cluster.
    pub center: u32,
    pub sampled: bool,
    /// Weight of the edge to the nearest sampled cluster, ∞ if none.
    pub nearest: f64,
    /// Other endpoint of the edge realising `nearest`, 0 if none.
    pub chosen: u32,
}

impl VertexRecord {
    pub fn singleton(v: u32) -> Self {
        VertexRecord { v, center: v, sampled: false, nearest: f64::INFINITY, chosen: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Record {
    Edge(EdgeRecord),
    Vertex(VertexRecord),
}

impl Record {
    pub fn as_edge(&self) -> Option<&EdgeRecord> {
        match self {
            Record::Edge(e) => Some(e),
            Record::Vertex(_) => None,
        }
    }

    pub fn as_vertex(&self) -> Option<&VertexRecord> {
        match self {
            Record::Vertex(v) => Some(v),
            Record::Edge(_) => None,
        }
    }

    pub fn is_edge(&self) -> bool {
        matches!(self, Record::Edge(_))
    }

    pub fn encode(&self) -> [u8; RECORD_BYTES] {
        let mut buf = [0u8; RECORD_BYTES];
        let (tag, ids, weight, flags) = match self {
            Record::Edge(e) => (b'E', [e.u, e.v, e.lcenter, e.rcenter], e.w, [e.mark.as_i8() as u8, e.sampled as u8]),
            Record::Vertex(v) => (b'V', [v.v, v.center, v.chosen, 0], v.nearest, [v.sampled as u8, 0]),
        };
        buf[0] = tag;
        for (i, id) in ids.iter().enumerate() {
            buf[1 + 4 * i..5 + 4 * i].copy_from_slice(&id.to_le_bytes());
        }
        buf[17..25].copy_from_slice(&weight.to_le_bytes());
        buf[25..27].copy_from_slice(&flags);
        buf
    }

    pub fn decode(buf: &[u8; RECORD_BYTES]) -> Result<Record, DecodeError> {
        let id = |i: usize| u32::from_le_bytes(buf[1 + 4 * i..5 + 4 * i].try_into().unwrap());
        let weight = f64::from_le_bytes(buf[17..25].try_into().unwrap());
        let flag = |b: u8| match b {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(DecodeError(format!("bad flag byte {other}"))),
        };
        match buf[0] {
            b'E' => Ok(Record::Edge(EdgeRecord {
                u: id(0),
                v: id(1),
                lcenter: id(2),
                rcenter: id(3),
                w: weight,
                mark: SpannerMark::from_i8(buf[25] as i8)
                    .ok_or_else(|| DecodeError(format!("bad spanner mark {}", buf[25] as i8)))?,
                sampled: flag(buf[26])?,
            })),
            b'V' => Ok(Record::Vertex(VertexRecord {
                v: id(0),
                center: id(1),
                chosen: id(2),
                nearest: weight,
                sampled: flag(buf[25])?,
            })),
            tag => Err(DecodeError(format!("unknown record tag {tag:#04x}"))),
        }
    }
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Record::Edge(e) => write!(
                f,
                "edge({},{} w={} lc={} rc={} mark={} sampled={})",
                e.u,
                e.v,
                e.w,
                e.lcenter,
                e.rcenter,
                e.mark.as_i8(),
                e.sampled as u8
            ),
            Record::Vertex(v) => write!(
                f,
                "vertex({} c={} sampled={} N={} chosen={})",
                v.v, v.center, v.sampled as u8, v.nearest, v.chosen
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeError(pub String);

impl fmt::Display for DecodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}
