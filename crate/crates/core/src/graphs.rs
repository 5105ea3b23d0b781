//! Implicit finite graphs. Nothing is materialized: degree and neighbor
//! queries are pure functions of the [`GraphSpec`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// A vertex as a bit pattern. On the hypercube bit `i` is spin `i`
/// (0 for -1, 1 for +1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u64);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub const MAX_HYPERCUBE_DIMENSION: u32 = 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
#[serde(try_from = "RawGraphSpec")]
pub enum GraphSpec {
    Hypercube { n: u32 },
    Complete { size: u64 },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RawGraphSpec {
    Hypercube { n: u32 },
    Complete { size: u64 },
}

impl TryFrom<RawGraphSpec> for GraphSpec {
    type Error = Error;

    fn try_from(raw: RawGraphSpec) -> Result<Self> {
        match raw {
            RawGraphSpec::Hypercube { n } => GraphSpec::hypercube(n),
            RawGraphSpec::Complete { size } => GraphSpec::complete(size),
        }
    }
}

impl GraphSpec {
    pub fn hypercube(n: u32) -> Result<Self> {
        if n == 0 || n > MAX_HYPERCUBE_DIMENSION {
            return Err(Error::InvalidGraph(format!(
                "hypercube dimension must be in 1..={MAX_HYPERCUBE_DIMENSION}, got {n}"
            )));
        }
        Ok(GraphSpec::Hypercube { n })
    }

    pub fn complete(size: u64) -> Result<Self> {
        if size < 2 {
            return Err(Error::InvalidGraph(format!("complete graph needs at least 2 vertices, got {size}")));
        }
        Ok(GraphSpec::Complete { size })
    }

    pub fn vertex_count(&self) -> u64 {
        match *self {
            GraphSpec::Hypercube { n } => 1u64 << n,
            GraphSpec::Complete { size } => size,
        }
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v.0 < self.vertex_count()
    }

    fn check(&self, v: VertexId) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::InvalidVertex { vertex: v.0, count: self.vertex_count() })
        }
    }

    /// Regular graphs only, so the degree does not depend on the vertex.
    #[inline]
    pub fn uniform_degree(&self) -> u64 {
        match *self {
            GraphSpec::Hypercube { n } => n as u64,
            GraphSpec::Complete { size } => size - 1,
        }
    }

    pub fn degree(&self, v: VertexId) -> Result<u64> {
        self.check(v)?;
        Ok(self.uniform_degree())
    }

    pub fn neighbor(&self, v: VertexId, k: u64) -> Result<VertexId> {
        self.check(v)?;
        let degree = self.uniform_degree();
        if k >= degree {
            return Err(Error::NeighborOutOfRange { index: k, degree });
        }
        Ok(self.neighbor_unchecked(v, k))
    }

    /// Hypercube: flip bit `k`. Complete: the `k`-th vertex of `0..size`
    /// with `v` skipped.
    #[inline]
    pub fn neighbor_unchecked(&self, v: VertexId, k: u64) -> VertexId {
        match *self {
            GraphSpec::Hypercube { .. } => VertexId(v.0 ^ (1u64 << k)),
            GraphSpec::Complete { .. } => VertexId(if k < v.0 { k } else { k + 1 }),
        }
    }

    /// Uniform neighbor; consumes exactly one draw-event from `r`.
    #[inline]
    pub fn random_neighbor(&self, v: VertexId, r: &mut RngStream) -> VertexId {
        let k = r.below(self.uniform_degree());
        self.neighbor_unchecked(v, k)
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.uniform_degree()).map(move |k| self.neighbor_unchecked(v, k))
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Hypercube { n } => write!(f, "hypercube:{n}"),
            GraphSpec::Complete { size } => write!(f, "complete:{size}"),
        }
    }
}

impl std::str::FromStr for GraphSpec {
    type Err = Error;

    /// `hypercube:N` or `complete:SIZE`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, value) =
            s.split_once(':').ok_or_else(|| Error::InvalidGraph(format!("expected kind:value, got {s:?}")))?;
        let bad = |_| Error::InvalidGraph(format!("bad number in {s:?}"));
        match kind {
            "hypercube" => GraphSpec::hypercube(value.parse().map_err(bad)?),
            "complete" => GraphSpec::complete(value.parse().map_err(bad)?),
            other => Err(Error::InvalidGraph(format!("unknown graph kind {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::VecDeque;

    use super::*;
    use crate::rng::RngStream;

    fn cube(n: u32) -> GraphSpec {
        GraphSpec::hypercube(n).unwrap()
    }

    fn complete(n: u64) -> GraphSpec {
        GraphSpec::complete(n).unwrap()
    }

    #[test]
    fn vertex_counts() {
        assert_eq!(cube(3).vertex_count(), 8);
        assert_eq!(complete(5).vertex_count(), 5);
        assert_eq!(cube(20).vertex_count(), 1_048_576);
        assert_eq!(cube(63).vertex_count(), 1 << 63);
    }

    #[test]
    fn degrees() {
        for v in 0..16 {
            assert_eq!(cube(4).degree(VertexId(v)).unwrap(), 4);
        }
        assert_eq!(complete(6).degree(VertexId(3)).unwrap(), 5);
        assert_eq!(cube(1).degree(VertexId(0)).unwrap(), 1);
        assert!(matches!(cube(3).degree(VertexId(8)), Err(Error::InvalidVertex { .. })));
    }

    #[test]
    fn neighbor_examples() {
        assert_eq!(cube(3).neighbor(VertexId(0b000), 1).unwrap(), VertexId(0b010));
        assert_eq!(complete(4).neighbor(VertexId(2), 2).unwrap(), VertexId(3));
        assert_eq!(cube(3).neighbor(VertexId(0b111), 0).unwrap(), VertexId(0b110));
        let skip: Vec<_> = complete(4).neighbors(VertexId(2)).collect();
        assert_eq!(skip, vec![VertexId(0), VertexId(1), VertexId(3)]);
        assert!(matches!(cube(3).neighbor(VertexId(0), 3), Err(Error::NeighborOutOfRange { index: 3, degree: 3 })));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(GraphSpec::hypercube(0).is_err());
        assert!(GraphSpec::hypercube(64).is_err());
        assert!(GraphSpec::complete(1).is_err());
        assert_eq!("hypercube:20".parse::<GraphSpec>().unwrap(), cube(20));
        assert_eq!("complete:65536".parse::<GraphSpec>().unwrap(), complete(65536));
        assert!("torus:3".parse::<GraphSpec>().is_err());
    }

    #[test]
    fn unique_neighbors() {
        let mut r = RngStream::new([0, 0]);
        assert_eq!(cube(1).random_neighbor(VertexId(0), &mut r), VertexId(1));
        assert_eq!(complete(2).random_neighbor(VertexId(1), &mut r), VertexId(0));
    }

    #[test]
    fn random_neighbor_is_uniform() {
        // Chi-square against uniform on 4 cells, 3 dof; 99.9% quantile 16.27.
        let g = cube(4);
        let draws = 100_000;
        let mut r = RngStream::new([11, 13]);
        let mut counts = [0u64; 4];
        for _ in 0..draws {
            let w = g.random_neighbor(VertexId(0b1010), &mut r);
            let bit = (w.0 ^ 0b1010).trailing_zeros() as usize;
            counts[bit] += 1;
        }
        let expected = draws as f64 / 4.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        assert!(chi2 < 16.27, "chi2 = {chi2}, counts = {counts:?}");
        for c in counts {
            assert!((c as f64 / draws as f64 - 0.25).abs() < 0.01);
        }
    }

    #[test]
    fn neighbor_relation_is_symmetric() {
        for g in [cube(1), cube(4), cube(10), complete(2), complete(7), complete(64)] {
            for v in 0..g.vertex_count() {
                for w in g.neighbors(VertexId(v)) {
                    assert!(g.neighbors(w).any(|u| u == VertexId(v)), "{g}: {v} -> {w}");
                    assert_ne!(w, VertexId(v));
                }
            }
        }
    }

    #[test]
    fn hypercube_neighbors_differ_in_one_bit() {
        let g = cube(10);
        for v in (0..g.vertex_count()).step_by(7) {
            for w in g.neighbors(VertexId(v)) {
                assert_eq!((v ^ w.0).count_ones(), 1);
            }
        }
    }

    #[test]
    fn small_graphs_are_connected() {
        for g in [cube(1), cube(5), cube(10), complete(2), complete(33)] {
            let n = g.vertex_count() as usize;
            let mut seen = vec![false; n];
            let mut queue = VecDeque::from([VertexId(0)]);
            seen[0] = true;
            while let Some(v) = queue.pop_front() {
                for w in g.neighbors(v) {
                    if !seen[w.0 as usize] {
                        seen[w.0 as usize] = true;
                        queue.push_back(w);
                    }
                }
            }
            assert!(seen.iter().all(|&s| s), "{g} not connected");
        }
    }

    #[test]
    fn config_form_round_trips() {
        let g: GraphSpec = serde_json::from_str(r#"{"kind":"hypercube","n":20}"#).unwrap();
        assert_eq!(g, cube(20));
        let g: GraphSpec = serde_json::from_str(r#"{"kind":"complete","size":65536}"#).unwrap();
        assert_eq!(g, complete(65536));
        assert!(serde_json::from_str::<GraphSpec>(r#"{"kind":"complete","size":1}"#).is_err());
        assert!(serde_json::from_str::<GraphSpec>(r#"{"kind":"hypercube","n":3,"x":1}"#).is_err());
        assert_eq!(serde_json::to_string(&cube(3)).unwrap(), r#"{"kind":"hypercube","n":3}"#);
    }
}
