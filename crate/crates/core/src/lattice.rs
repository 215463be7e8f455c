//! Toroidal triangular lattice, its hexagonal dual, and edge indexing.
//!
//! Sites live on an `L x L` torus (`N = L^2`). Each site has six neighbors
//! given by the offsets `(+1,0), (0,+1), (+1,+1), (-1,0), (0,-1), (-1,-1)`
//! applied modulo `L`. Undirected edges are indexed by their tail site and an
//! axis in `{0,1,2}` for the positive offsets, so there are exactly `3N`
//! edges. The dual lattice is hexagonal: one dual vertex per triangular face
//! (`2N` of them, each of degree 3), and a bijection between primal edges and
//! the dual edges that cross them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Neighbor offsets in the documented order.
pub const NEIGHBOR_OFFSETS: [(i64, i64); 6] = [(1, 0), (0, 1), (1, 1), (-1, 0), (0, -1), (-1, -1)];

/// The three positive axes used for edge indexing: `e1=(1,0)`, `e2=(0,1)`, `e3=(1,1)`.
pub const AXIS_OFFSETS: [(i64, i64); 3] = [(1, 0), (0, 1), (1, 1)];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("lattice side must be at least 3, got {0}")]
    SideTooSmall(u32),
}

/// A lattice site, coordinates reduced modulo `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    pub x: u32,
    pub y: u32,
}

/// Dense site index: `y * L + x`.
pub type SiteId = u32;

/// Undirected primal edge, indexed as `3 * tail + axis`. The tail is the
/// endpoint from which the positive axis offset reaches the head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId(pub u32);

/// Dual (hexagonal-lattice) edge; crosses exactly one primal edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DualEdgeId(pub u32);

/// Dual vertex (triangular face): `2 * site + 0` for the "up" triangle
/// `{v, v+e1, v+e3}`, `2 * site + 1` for the "down" triangle `{v, v+e2, v+e3}`.
pub type DualVertexId = u32;

/// Immutable toroidal triangular lattice geometry.
///
/// Safe to share across threads; all derived structures are precomputed or
/// computed from pure arithmetic.
#[derive(Debug, Clone)]
pub struct LatticeGeometry {
    side: u32,
    neighbors: Vec<[SiteId; 6]>,
}

impl LatticeGeometry {
    pub fn new(side: u32) -> Result<Self, LatticeError> {
        if side < 3 {
            return Err(LatticeError::SideTooSmall(side));
        }
        let n = (side * side) as usize;
        let mut neighbors = vec![[0u32; 6]; n];
        for id in 0..n as u32 {
            let s = Self::site_of_raw(side, id);
            for (k, &(dx, dy)) in NEIGHBOR_OFFSETS.iter().enumerate() {
                let nx = (s.x as i64 + dx).rem_euclid(side as i64) as u32;
                let ny = (s.y as i64 + dy).rem_euclid(side as i64) as u32;
                neighbors[id as usize][k] = ny * side + nx;
            }
        }
        Ok(Self { side, neighbors })
    }

    #[inline(always)]
    pub fn side(&self) -> u32 {
        self.side
    }

    /// Number of sites `N = L^2`.
    #[inline(always)]
    pub fn num_sites(&self) -> u32 {
        self.side * self.side
    }

    /// Number of undirected primal edges, `3N`.
    #[inline(always)]
    pub fn num_edges(&self) -> u32 {
        3 * self.num_sites()
    }

    /// Number of dual vertices (triangular faces), `2N`.
    #[inline(always)]
    pub fn num_dual_vertices(&self) -> u32 {
        2 * self.num_sites()
    }

    #[inline(always)]
    fn site_of_raw(side: u32, id: SiteId) -> Site {
        Site { x: id % side, y: id / side }
    }

    #[inline(always)]
    pub fn site_of(&self, id: SiteId) -> Site {
        Self::site_of_raw(self.side, id)
    }

    #[inline(always)]
    pub fn id_of(&self, s: Site) -> SiteId {
        debug_assert!(s.x < self.side && s.y < self.side);
        s.y * self.side + s.x
    }

    /// The six neighbors of `v` in the documented offset order.
    #[inline(always)]
    pub fn neighbors(&self, v: SiteId) -> &[SiteId; 6] {
        &self.neighbors[v as usize]
    }

    /// Neighbor along one of the six offsets.
    #[inline(always)]
    pub fn neighbor(&self, v: SiteId, dir: usize) -> SiteId {
        self.neighbors[v as usize][dir]
    }

    /// Offset a site by an arbitrary (unreduced) displacement.
    pub fn offset(&self, v: SiteId, dx: i64, dy: i64) -> SiteId {
        let s = self.site_of(v);
        let nx = (s.x as i64 + dx).rem_euclid(self.side as i64) as u32;
        let ny = (s.y as i64 + dy).rem_euclid(self.side as i64) as u32;
        ny * self.side + nx
    }

    /// Edge with the given tail site and positive axis.
    #[inline(always)]
    pub fn edge(&self, tail: SiteId, axis: usize) -> EdgeId {
        debug_assert!(axis < 3);
        EdgeId(3 * tail + axis as u32)
    }

    #[inline(always)]
    pub fn edge_tail(&self, e: EdgeId) -> SiteId {
        e.0 / 3
    }

    #[inline(always)]
    pub fn edge_axis(&self, e: EdgeId) -> usize {
        (e.0 % 3) as usize
    }

    #[inline(always)]
    pub fn edge_head(&self, e: EdgeId) -> SiteId {
        self.neighbor(self.edge_tail(e), self.edge_axis(e))
    }

    /// Canonical direction of an edge: from tail to head along the positive
    /// axis offset. For non-seam edges this points to the endpoint with
    /// larger `x` (ties broken by larger `y`); for seam edges the unreduced
    /// offset sign fixes the orientation.
    #[inline(always)]
    pub fn canonical_direction(&self, e: EdgeId) -> (SiteId, SiteId) {
        (self.edge_tail(e), self.edge_head(e))
    }

    /// The undirected edge joining two adjacent sites, if any.
    pub fn edge_between(&self, u: SiteId, v: SiteId) -> Option<EdgeId> {
        for axis in 0..3 {
            if self.neighbor(u, axis) == v {
                return Some(self.edge(u, axis));
            }
            if self.neighbor(v, axis) == u {
                return Some(self.edge(v, axis));
            }
        }
        None
    }

    /// Dual edge crossing a primal edge (a bijection).
    #[inline(always)]
    pub fn dual_edge(&self, e: EdgeId) -> DualEdgeId {
        DualEdgeId(e.0)
    }

    /// Primal edge crossed by a dual edge (inverse of [`dual_edge`]).
    #[inline(always)]
    pub fn primal_edge(&self, d: DualEdgeId) -> EdgeId {
        EdgeId(d.0)
    }

    #[inline(always)]
    pub fn dual_up(&self, v: SiteId) -> DualVertexId {
        2 * v
    }

    #[inline(always)]
    pub fn dual_down(&self, v: SiteId) -> DualVertexId {
        2 * v + 1
    }

    /// Endpoints of a dual edge: the two triangular faces sharing the
    /// crossed primal edge.
    ///
    /// With `U(v) = {v, v+e1, v+e3}` and `D(v) = {v, v+e2, v+e3}`:
    /// `e1@v` separates `U(v)` and `D(v-e2)`; `e2@v` separates `D(v)` and
    /// `U(v-e1)`; `e3@v` separates `U(v)` and `D(v)`.
    #[inline(always)]
    pub fn dual_endpoints(&self, d: DualEdgeId) -> (DualVertexId, DualVertexId) {
        let e = self.primal_edge(d);
        let v = self.edge_tail(e);
        match self.edge_axis(e) {
            0 => (self.dual_up(v), self.dual_down(self.neighbor(v, 4))),
            1 => (self.dual_down(v), self.dual_up(self.neighbor(v, 3))),
            _ => (self.dual_up(v), self.dual_down(v)),
        }
    }

    /// The three dual edges incident to a dual vertex.
    pub fn dual_incident_edges(&self, dv: DualVertexId) -> [DualEdgeId; 3] {
        let v = dv / 2;
        if dv % 2 == 0 {
            // U(v): boundary edges e1@v, e2@(v+e1), e3@v.
            [
                self.dual_edge(self.edge(v, 0)),
                self.dual_edge(self.edge(self.neighbor(v, 0), 1)),
                self.dual_edge(self.edge(v, 2)),
            ]
        } else {
            // D(v): boundary edges e2@v, e1@(v+e2), e3@v.
            [
                self.dual_edge(self.edge(v, 1)),
                self.dual_edge(self.edge(self.neighbor(v, 1), 0)),
                self.dual_edge(self.edge(v, 2)),
            ]
        }
    }

    /// Corner sites of a triangular face.
    pub fn face_corners(&self, dv: DualVertexId) -> [SiteId; 3] {
        let v = dv / 2;
        if dv % 2 == 0 {
            [v, self.neighbor(v, 0), self.neighbor(v, 2)]
        } else {
            [v, self.neighbor(v, 1), self.neighbor(v, 2)]
        }
    }

    /// Triangle flow constraint data: the three edges of the face together
    /// with the sign (+1/-1) their canonical-direction label contributes when
    /// walking the face boundary `v -> v+ea -> v+e3 -> v`.
    pub fn face_flow_edges(&self, dv: DualVertexId) -> [(EdgeId, i8); 3] {
        let v = dv / 2;
        if dv % 2 == 0 {
            [
                (self.edge(v, 0), 1),
                (self.edge(self.neighbor(v, 0), 1), 1),
                (self.edge(v, 2), -1),
            ]
        } else {
            [
                (self.edge(v, 1), 1),
                (self.edge(self.neighbor(v, 1), 0), 1),
                (self.edge(v, 2), -1),
            ]
        }
    }

    /// Whether the positive-offset representation of an edge crosses the
    /// torus seam (its unreduced head leaves `[0,L)^2`).
    #[inline]
    pub fn is_wrap_edge(&self, e: EdgeId) -> bool {
        let s = self.site_of(self.edge_tail(e));
        let last = self.side - 1;
        match self.edge_axis(e) {
            0 => s.x == last,
            1 => s.y == last,
            _ => s.x == last || s.y == last,
        }
    }

    /// Dual edges crossing the torus seam, scanning every edge whose
    /// unreduced offset leaves `[0,L)^2`. The set is the union of the two
    /// seam dual cycles (2L edges each, sharing one dual edge at the corner),
    /// so its cardinality is `4L - 1`; the induced dual subgraph is connected
    /// with minimum degree 2.
    pub fn wrap_edge_set(&self) -> Vec<DualEdgeId> {
        let mut out = Vec::with_capacity((4 * self.side - 1) as usize);
        for e in 0..self.num_edges() {
            let e = EdgeId(e);
            if self.is_wrap_edge(e) {
                out.push(self.dual_edge(e));
            }
        }
        out
    }

    /// Iterate all edges.
    pub fn edges(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.num_edges()).map(EdgeId)
    }

    /// Iterate all sites.
    pub fn sites(&self) -> impl Iterator<Item = SiteId> {
        0..self.num_sites()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn rejects_tiny_side() {
        assert_eq!(LatticeGeometry::new(2).unwrap_err(), LatticeError::SideTooSmall(2));
        assert!(LatticeGeometry::new(3).is_ok());
    }

    #[test]
    fn neighbors_of_origin_l5() {
        let g = LatticeGeometry::new(5).unwrap();
        let v = g.id_of(Site { x: 0, y: 0 });
        let got: HashSet<Site> = g.neighbors(v).iter().map(|&n| g.site_of(n)).collect();
        let want: HashSet<Site> = [(1, 0), (0, 1), (1, 1), (4, 0), (0, 4), (4, 4)]
            .iter()
            .map(|&(x, y)| Site { x, y })
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn neighbors_interior_l5() {
        let g = LatticeGeometry::new(5).unwrap();
        let v = g.id_of(Site { x: 2, y: 2 });
        let got: HashSet<Site> = g.neighbors(v).iter().map(|&n| g.site_of(n)).collect();
        let want: HashSet<Site> = [(3, 2), (2, 3), (3, 3), (1, 2), (2, 1), (1, 1)]
            .iter()
            .map(|&(x, y)| Site { x, y })
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn neighbor_relation_symmetric_and_six_distinct() {
        for l in [3u32, 4, 5, 7] {
            let g = LatticeGeometry::new(l).unwrap();
            for v in g.sites() {
                let ns: HashSet<SiteId> = g.neighbors(v).iter().copied().collect();
                assert_eq!(ns.len(), 6, "L={l} v={v}");
                for &u in g.neighbors(v) {
                    assert!(g.neighbors(u).contains(&v), "symmetry L={l}");
                }
            }
        }
    }

    #[test]
    fn edge_count_is_3n() {
        let g = LatticeGeometry::new(4).unwrap();
        // Derive the edge set from the neighbor relation and compare.
        let mut pairs = HashSet::new();
        for v in g.sites() {
            for &u in g.neighbors(v) {
                pairs.insert(if u < v { (u, v) } else { (v, u) });
            }
        }
        assert_eq!(pairs.len(), 3 * g.num_sites() as usize);
        // Each indexed edge hits a distinct pair.
        let mut from_ids = HashSet::new();
        for e in g.edges() {
            let (t, h) = g.canonical_direction(e);
            from_ids.insert(if t < h { (t, h) } else { (h, t) });
        }
        assert_eq!(from_ids, pairs);
    }

    #[test]
    fn canonical_direction_examples() {
        let g = LatticeGeometry::new(5).unwrap();
        let a = g.id_of(Site { x: 1, y: 1 });
        let b = g.id_of(Site { x: 2, y: 1 });
        let e = g.edge_between(a, b).unwrap();
        assert_eq!(g.canonical_direction(e), (a, b));

        let c = g.id_of(Site { x: 1, y: 2 });
        let e = g.edge_between(a, c).unwrap();
        assert_eq!(g.canonical_direction(e), (a, c));

        // Seam edge {(L-1,0),(0,0)} is oriented by the unreduced +x offset.
        let s = g.id_of(Site { x: 4, y: 0 });
        let o = g.id_of(Site { x: 0, y: 0 });
        let e = g.edge_between(s, o).unwrap();
        assert_eq!(g.canonical_direction(e), (s, o));
    }

    #[test]
    fn dual_bijection_round_trip() {
        let g = LatticeGeometry::new(4).unwrap();
        let mut seen = HashSet::new();
        for e in g.edges() {
            let d = g.dual_edge(e);
            assert_eq!(g.primal_edge(d), e);
            seen.insert(d);
        }
        assert_eq!(seen.len(), 3 * g.num_sites() as usize);
    }

    #[test]
    fn dual_graph_is_three_regular() {
        let g = LatticeGeometry::new(4).unwrap();
        let mut degree = vec![0u32; g.num_dual_vertices() as usize];
        for e in g.edges() {
            let (a, b) = g.dual_endpoints(g.dual_edge(e));
            assert_ne!(a, b);
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        assert!(degree.iter().all(|&d| d == 3));
    }

    #[test]
    fn face_edges_share_dual_vertex() {
        // Two primal edges sharing a triangle map to dual edges sharing a
        // dual vertex; checked over all faces of L=4.
        let g = LatticeGeometry::new(4).unwrap();
        for dv in 0..g.num_dual_vertices() {
            let edges = g.dual_incident_edges(dv);
            for i in 0..3 {
                for j in (i + 1)..3 {
                    let (a1, b1) = g.dual_endpoints(edges[i]);
                    let (a2, b2) = g.dual_endpoints(edges[j]);
                    assert!(a1 == a2 || a1 == b2 || b1 == a2 || b1 == b2);
                    assert!([a1, b1].contains(&dv) && [a2, b2].contains(&dv));
                }
            }
        }
    }

    #[test]
    fn face_corners_match_flow_edges() {
        let g = LatticeGeometry::new(5).unwrap();
        for dv in 0..g.num_dual_vertices() {
            let corners: HashSet<SiteId> = g.face_corners(dv).iter().copied().collect();
            assert_eq!(corners.len(), 3);
            for (e, _) in g.face_flow_edges(dv) {
                let (t, h) = g.canonical_direction(e);
                assert!(corners.contains(&t) && corners.contains(&h));
            }
        }
    }

    #[test]
    fn wrap_edge_set_is_two_seam_cycles() {
        for l in [3u32, 4, 5, 8] {
            let g = LatticeGeometry::new(l).unwrap();
            let wrap = g.wrap_edge_set();
            // Two seam dual cycles of 2L edges sharing exactly one dual edge.
            assert_eq!(wrap.len(), (4 * l - 1) as usize);

            // Independent scan: unreduced offsets leaving [0,L)^2.
            let mut count = 0usize;
            for v in g.sites() {
                let s = g.site_of(v);
                for (axis, &(dx, dy)) in AXIS_OFFSETS.iter().enumerate() {
                    let (nx, ny) = (s.x as i64 + dx, s.y as i64 + dy);
                    let leaves = nx >= l as i64 || ny >= l as i64;
                    assert_eq!(leaves, g.is_wrap_edge(g.edge(v, axis)));
                    if leaves {
                        count += 1;
                    }
                }
            }
            assert_eq!(count, wrap.len());

            // Induced dual subgraph: connected, minimum degree 2.
            let set: HashSet<DualEdgeId> = wrap.iter().copied().collect();
            let mut deg = std::collections::HashMap::new();
            for &d in &set {
                let (a, b) = g.dual_endpoints(d);
                *deg.entry(a).or_insert(0u32) += 1;
                *deg.entry(b).or_insert(0u32) += 1;
            }
            assert!(deg.values().all(|&d| d >= 2), "L={l}");
            // BFS over shared dual vertices.
            let mut visited = HashSet::new();
            let mut stack = vec![wrap[0]];
            visited.insert(wrap[0]);
            while let Some(d) = stack.pop() {
                let (a, b) = g.dual_endpoints(d);
                for &other in &set {
                    if !visited.contains(&other) {
                        let (c, e) = g.dual_endpoints(other);
                        if c == a || c == b || e == a || e == b {
                            visited.insert(other);
                            stack.push(other);
                        }
                    }
                }
            }
            assert_eq!(visited.len(), set.len(), "L={l}");
        }
    }
}
