//! Particle configurations: occupancy, orientations, boundary statistics,
//! connectivity checks, and exact local deltas for proposed moves.
//!
//! Orientation storage is dense per site with `-1` marking vacancies. The
//! heterogeneous-edge structure is tracked as integer counts per orientation
//! residue `(theta_head - theta_tail) mod q` along each edge's canonical
//! direction, so local updates match a global recount exactly, including the
//! clock-model distance sum derived from those counts.

use crate::lattice::{LatticeGeometry, SiteId};
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("site {0} is not occupied")]
    NotOccupied(SiteId),
    #[error("site {0} is occupied")]
    Occupied(SiteId),
    #[error("sites {0} and {1} are not adjacent")]
    NotAdjacent(SiteId, SiteId),
    #[error("orientation {theta} out of range for q={q}")]
    BadOrientation { theta: i16, q: u8 },
    #[error("duplicate site {0} in particle list")]
    DuplicateSite(SiteId),
    #[error("q must be at least 2, got {0}")]
    BadQ(u8),
    #[error("perimeter undefined: configuration is not simply connected")]
    PerimeterUndefined,
    #[error("operation requires the {0:?} setting")]
    WrongSetting(Setting),
    #[error("initial shape of {n} particles does not fit on an L={l} lattice")]
    ShapeTooLarge { n: usize, l: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Setting {
    Connected,
    General,
}

/// One proposed chain move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Spatial { from: SiteId, to: SiteId },
    Reorient { site: SiteId, new_theta: u8 },
}

pub const MAX_DELTA_ENTRIES: usize = 24;

/// Exact local delta of a move: boundary-edge count change plus signed
/// increments to the per-residue heterogeneous edge counts. At most 12 edges
/// are touched by a spatial move and 6 by a reorientation, each contributing
/// up to two entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveDelta {
    pub da: i32,
    len: u8,
    entries: [(u8, i8); MAX_DELTA_ENTRIES],
}

impl MoveDelta {
    #[inline(always)]
    fn new() -> Self {
        Self { da: 0, len: 0, entries: [(0, 0); MAX_DELTA_ENTRIES] }
    }

    #[inline(always)]
    fn push(&mut self, residue: u8, inc: i8) {
        self.entries[self.len as usize] = (residue, inc);
        self.len += 1;
    }

    #[inline(always)]
    pub fn entries(&self) -> &[(u8, i8)] {
        &self.entries[..self.len as usize]
    }

    /// Change in the heterogeneous edge count.
    #[inline(always)]
    pub fn dh(&self) -> i32 {
        self.entries()
            .iter()
            .filter(|&&(r, _)| r != 0)
            .map(|&(_, inc)| inc as i32)
            .sum()
    }

    /// Change in the clock distance sum, from the residue distance table.
    #[inline(always)]
    pub fn dd(&self, dtable: &[f64]) -> f64 {
        self.entries()
            .iter()
            .map(|&(r, inc)| inc as f64 * dtable[r as usize])
            .sum()
    }

    /// Perimeter change in the connected setting (`a = 2p + 6` on both sides).
    #[inline(always)]
    pub fn dp(&self) -> i32 {
        debug_assert!(self.da % 2 == 0);
        self.da / 2
    }
}

/// Particle configuration on a shared lattice geometry.
#[derive(Debug, Clone)]
pub struct Configuration {
    geometry: Arc<LatticeGeometry>,
    setting: Setting,
    q: u8,
    /// Per-site orientation; -1 marks a vacancy.
    spin: Vec<i8>,
    particles: Vec<SiteId>,
    slot: Vec<u32>,
    /// Boundary edge count a: edges with exactly one occupied endpoint.
    a: u64,
    /// residue_counts[r]: occupied-occupied edges with
    /// `(theta_head - theta_tail) mod q == r` along the canonical direction.
    residue_counts: Vec<i64>,
    /// dtable[r] = 1 - cos(2 pi r / q).
    dtable: Vec<f64>,
}

const EMPTY_SLOT: u32 = u32::MAX;

impl Configuration {
    pub fn new(
        geometry: Arc<LatticeGeometry>,
        setting: Setting,
        q: u8,
        sites: &[(SiteId, u8)],
    ) -> Result<Self, ConfigError> {
        if q < 2 {
            return Err(ConfigError::BadQ(q));
        }
        let n_sites = geometry.num_sites() as usize;
        let mut cfg = Self {
            geometry,
            setting,
            q,
            spin: vec![-1; n_sites],
            particles: Vec::with_capacity(sites.len()),
            slot: vec![EMPTY_SLOT; n_sites],
            a: 0,
            residue_counts: vec![0; q as usize],
            dtable: (0..q)
                .map(|r| 1.0 - (2.0 * std::f64::consts::PI * r as f64 / q as f64).cos())
                .collect(),
        };
        for &(site, theta) in sites {
            if theta >= q {
                return Err(ConfigError::BadOrientation { theta: theta as i16, q });
            }
            if cfg.spin[site as usize] >= 0 {
                return Err(ConfigError::DuplicateSite(site));
            }
            cfg.spin[site as usize] = theta as i8;
            cfg.slot[site as usize] = cfg.particles.len() as u32;
            cfg.particles.push(site);
        }
        let (a, counts) = cfg.recount();
        cfg.a = a;
        cfg.residue_counts = counts;
        Ok(cfg)
    }

    /// Full recount of boundary statistics from scratch (test oracle and
    /// constructor path).
    pub fn recount(&self) -> (u64, Vec<i64>) {
        let g = &self.geometry;
        let mut a = 0u64;
        let mut counts = vec![0i64; self.q as usize];
        for e in g.edges() {
            let (t, h) = g.canonical_direction(e);
            let st = self.spin[t as usize];
            let sh = self.spin[h as usize];
            match (st >= 0, sh >= 0) {
                (true, true) => {
                    let r = (sh as i16 - st as i16).rem_euclid(self.q as i16) as usize;
                    counts[r] += 1;
                }
                (true, false) | (false, true) => a += 1,
                (false, false) => {}
            }
        }
        (a, counts)
    }

    #[inline(always)]
    pub fn geometry(&self) -> &Arc<LatticeGeometry> {
        &self.geometry
    }

    #[inline(always)]
    pub fn setting(&self) -> Setting {
        self.setting
    }

    #[inline(always)]
    pub fn q(&self) -> u8 {
        self.q
    }

    #[inline(always)]
    pub fn num_particles(&self) -> usize {
        self.particles.len()
    }

    #[inline(always)]
    pub fn particles(&self) -> &[SiteId] {
        &self.particles
    }

    #[inline(always)]
    pub fn is_occupied(&self, v: SiteId) -> bool {
        self.spin[v as usize] >= 0
    }

    /// Orientation of the particle at `v`, or None if vacant.
    #[inline(always)]
    pub fn orientation(&self, v: SiteId) -> Option<u8> {
        let s = self.spin[v as usize];
        (s >= 0).then_some(s as u8)
    }

    /// Raw spin including the vacancy sentinel -1.
    #[inline(always)]
    pub fn spin(&self, v: SiteId) -> i8 {
        self.spin[v as usize]
    }

    #[inline(always)]
    pub fn dtable(&self) -> &[f64] {
        &self.dtable
    }

    /// Boundary edge count a: edges with exactly one occupied endpoint.
    #[inline(always)]
    pub fn count_boundary_edges(&self) -> u64 {
        self.a
    }

    /// Heterogeneous edge count h.
    #[inline(always)]
    pub fn count_heterogeneous(&self) -> u64 {
        self.residue_counts.iter().skip(1).sum::<i64>() as u64
    }

    /// Sum of 1 - cos(2 pi (theta_i - theta_j) / q) over adjacent occupied
    /// pairs, derived from the exact residue counts.
    pub fn clock_distance_sum(&self) -> f64 {
        self.residue_counts
            .iter()
            .zip(self.dtable.iter())
            .map(|(&c, &d)| c as f64 * d)
            .sum()
    }

    #[inline(always)]
    pub fn residue_counts(&self) -> &[i64] {
        &self.residue_counts
    }

    /// Perimeter of a simply connected configuration, via a = 2p + 6.
    /// Checks simple connectivity; use [`perimeter_unchecked`] on the hot
    /// path where the chain maintains the invariant.
    pub fn perimeter(&self) -> Result<u64, ConfigError> {
        if !self.is_simply_connected() {
            return Err(ConfigError::PerimeterUndefined);
        }
        Ok(self.perimeter_unchecked())
    }

    /// `(a - 6) / 2`; valid only while the configuration is simply connected
    /// and non-empty.
    #[inline(always)]
    pub fn perimeter_unchecked(&self) -> u64 {
        debug_assert!(self.a >= 6);
        (self.a - 6) / 2
    }

    /// True iff the occupied set is connected and its complement is
    /// connected (hole-free surrogate on the torus in the non-wrapping
    /// regime).
    pub fn is_simply_connected(&self) -> bool {
        self.occupied_connected() && self.complement_connected()
    }

    fn component_connected(&self, occupied_side: bool) -> bool {
        let n_sites = self.geometry.num_sites() as usize;
        let total = if occupied_side {
            self.particles.len()
        } else {
            n_sites - self.particles.len()
        };
        if total == 0 {
            return true;
        }
        let start = if occupied_side {
            self.particles[0]
        } else {
            match (0..n_sites as u32).find(|&v| !self.is_occupied(v)) {
                Some(v) => v,
                None => return true,
            }
        };
        let mut seen = vec![false; n_sites];
        let mut stack = vec![start];
        seen[start as usize] = true;
        let mut count = 0usize;
        while let Some(v) = stack.pop() {
            count += 1;
            for &w in self.geometry.neighbors(v) {
                if !seen[w as usize] && self.is_occupied(w) == occupied_side {
                    seen[w as usize] = true;
                    stack.push(w);
                }
            }
        }
        count == total
    }

    pub fn occupied_connected(&self) -> bool {
        self.component_connected(true)
    }

    pub fn complement_connected(&self) -> bool {
        self.component_connected(false)
    }

    /// Exact local delta of a move, inspecting only the neighborhoods of the
    /// sites involved.
    pub fn local_delta(&self, mv: &Move) -> Result<MoveDelta, ConfigError> {
        match *mv {
            Move::Spatial { from, to } => {
                if !self.is_occupied(from) {
                    return Err(ConfigError::NotOccupied(from));
                }
                if self.is_occupied(to) {
                    return Err(ConfigError::Occupied(to));
                }
                if !self.geometry.neighbors(from).contains(&to) {
                    return Err(ConfigError::NotAdjacent(from, to));
                }
                Ok(self.spatial_delta(from, to))
            }
            Move::Reorient { site, new_theta } => {
                if !self.is_occupied(site) {
                    return Err(ConfigError::NotOccupied(site));
                }
                if new_theta >= self.q {
                    return Err(ConfigError::BadOrientation { theta: new_theta as i16, q: self.q });
                }
                Ok(self.reorient_delta(site, new_theta))
            }
        }
    }

    /// Residue of the edge between `v` (spin `sv`) and its `k`-th neighbor
    /// (spin `sw`), along the canonical direction. For k < 3 the edge's tail
    /// is `v`, otherwise the neighbor.
    #[inline(always)]
    fn residue(&self, k: usize, sv: i8, sw: i8) -> u8 {
        let d = if k < 3 { sw as i16 - sv as i16 } else { sv as i16 - sw as i16 };
        d.rem_euclid(self.q as i16) as u8
    }

    #[inline(always)]
    fn spatial_delta(&self, from: SiteId, to: SiteId) -> MoveDelta {
        let mut delta = MoveDelta::new();
        let theta = self.spin[from as usize];
        // Remove the particle at `from`.
        for (k, &w) in self.geometry.neighbors(from).iter().enumerate() {
            let sw = self.spin[w as usize];
            if sw >= 0 {
                delta.da += 1;
                delta.push(self.residue(k, theta, sw), -1);
            } else {
                delta.da -= 1;
            }
        }
        // Add it at `to`, with `from` now vacant.
        for (k, &w) in self.geometry.neighbors(to).iter().enumerate() {
            let sw = if w == from { -1 } else { self.spin[w as usize] };
            if sw >= 0 {
                delta.da -= 1;
                delta.push(self.residue(k, theta, sw), 1);
            } else {
                delta.da += 1;
            }
        }
        delta
    }

    #[inline(always)]
    fn reorient_delta(&self, site: SiteId, new_theta: u8) -> MoveDelta {
        let mut delta = MoveDelta::new();
        let old = self.spin[site as usize];
        let new = new_theta as i8;
        if old == new {
            return delta;
        }
        for (k, &w) in self.geometry.neighbors(site).iter().enumerate() {
            let sw = self.spin[w as usize];
            if sw >= 0 {
                delta.push(self.residue(k, old, sw), -1);
                delta.push(self.residue(k, new, sw), 1);
            }
        }
        delta
    }

    /// Apply a previously validated move and its delta atomically.
    pub fn apply(&mut self, mv: &Move, delta: &MoveDelta) {
        match *mv {
            Move::Spatial { from, to } => {
                let theta = self.spin[from as usize];
                debug_assert!(theta >= 0 && self.spin[to as usize] < 0);
                self.spin[from as usize] = -1;
                self.spin[to as usize] = theta;
                let slot = self.slot[from as usize];
                self.slot[from as usize] = EMPTY_SLOT;
                self.slot[to as usize] = slot;
                self.particles[slot as usize] = to;
            }
            Move::Reorient { site, new_theta } => {
                self.spin[site as usize] = new_theta as i8;
            }
        }
        self.a = (self.a as i64 + delta.da as i64) as u64;
        for &(r, inc) in delta.entries() {
            self.residue_counts[r as usize] += inc as i64;
        }
    }

    /// Debug/test helper: check cached statistics against a full recount.
    pub fn stats_consistent(&self) -> bool {
        let (a, counts) = self.recount();
        a == self.a && counts == self.residue_counts
    }
}

/// Initial-shape constructors. Orientations are all zero; callers randomize
/// if needed.
impl Configuration {
    /// A horizontal line of `n` particles centered on the lattice.
    pub fn line(
        geometry: Arc<LatticeGeometry>,
        setting: Setting,
        q: u8,
        n: usize,
    ) -> Result<Self, ConfigError> {
        let l = geometry.side();
        if n > (l - 1) as usize {
            return Err(ConfigError::ShapeTooLarge { n, l });
        }
        let y = l / 2;
        let x0 = (l as usize - n) / 2;
        let sites: Vec<(SiteId, u8)> = (0..n)
            .map(|i| (geometry.id_of(crate::lattice::Site { x: (x0 + i) as u32, y }), 0))
            .collect();
        Self::new(geometry, setting, q, &sites)
    }

    /// The first `n` sites of the canonical spiral around the lattice
    /// center. Every prefix of the spiral has minimal perimeter.
    pub fn spiral(
        geometry: Arc<LatticeGeometry>,
        setting: Setting,
        q: u8,
        n: usize,
    ) -> Result<Self, ConfigError> {
        let order = spiral_displacements(n);
        let l = geometry.side() as i64;
        let radius = order.iter().map(|&(dx, dy)| dx.abs().max(dy.abs())).max().unwrap_or(0);
        if 2 * radius + 2 > l {
            return Err(ConfigError::ShapeTooLarge { n, l: geometry.side() });
        }
        let c = geometry.id_of(crate::lattice::Site { x: geometry.side() / 2, y: geometry.side() / 2 });
        let sites: Vec<(SiteId, u8)> =
            order.iter().map(|&(dx, dy)| (geometry.offset(c, dx, dy), 0)).collect();
        Self::new(geometry, setting, q, &sites)
    }

    /// `n` uniformly random distinct sites with uniformly random
    /// orientations (general setting).
    pub fn uniform_random<R: rand::Rng>(
        geometry: Arc<LatticeGeometry>,
        setting: Setting,
        q: u8,
        n: usize,
        rng: &mut R,
    ) -> Result<Self, ConfigError> {
        let n_sites = geometry.num_sites() as usize;
        if n > n_sites {
            return Err(ConfigError::ShapeTooLarge { n, l: geometry.side() });
        }
        let mut ids: Vec<u32> = (0..n_sites as u32).collect();
        for i in 0..n {
            let j = rng.gen_range(i..n_sites);
            ids.swap(i, j);
        }
        let sites: Vec<(SiteId, u8)> =
            ids[..n].iter().map(|&v| (v, rng.gen_range(0..q))).collect();
        Self::new(geometry, setting, q, &sites)
    }

    /// Randomize all orientations uniformly in place.
    pub fn randomize_orientations<R: rand::Rng>(&mut self, rng: &mut R) {
        for i in 0..self.particles.len() {
            let v = self.particles[i];
            self.spin[v as usize] = rng.gen_range(0..self.q) as i8;
        }
        let (a, counts) = self.recount();
        self.a = a;
        self.residue_counts = counts;
    }

    /// Set one particle's orientation directly (test setup).
    pub fn set_orientation(&mut self, v: SiteId, theta: u8) -> Result<(), ConfigError> {
        if !self.is_occupied(v) {
            return Err(ConfigError::NotOccupied(v));
        }
        if theta >= self.q {
            return Err(ConfigError::BadOrientation { theta: theta as i16, q: self.q });
        }
        let mv = Move::Reorient { site: v, new_theta: theta };
        let delta = self.reorient_delta(v, theta);
        self.apply(&mv, &delta);
        Ok(())
    }
}

/// Displacements of the canonical spiral: center first, then ring `k` walked
/// counterclockwise from `(k, 1)` to the corner `(k, 0)`. Starting each ring
/// one step past the corner keeps every prefix at minimal perimeter.
pub fn spiral_displacements(n: usize) -> Vec<(i64, i64)> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    out.push((0, 0));
    let mut k: i64 = 1;
    while out.len() < n {
        // Walk segments: from (k,1) up the +e2 side, then around the ring,
        // ending at the corner (k,0).
        let segments: [((i64, i64), i64); 6] = [
            ((0, 1), k - 1),  // (k,1) -> (k,k)
            ((-1, 0), k),     // -> (0,k)
            ((-1, -1), k),    // -> (-k,0)
            ((0, -1), k),     // -> (-k,-k)
            ((1, 0), k),      // -> (0,-k)
            ((1, 1), k),      // -> (k,0)
        ];
        let mut pos = (k, 1);
        out.push(pos);
        for &((dx, dy), steps) in &segments {
            for _ in 0..steps {
                if out.len() >= n {
                    return out;
                }
                pos = (pos.0 + dx, pos.1 + dy);
                out.push(pos);
            }
        }
        k += 1;
    }
    out
}

/// JSON snapshot of a configuration plus run metadata. Round-trips exactly.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Snapshot {
    pub format_version: u32,
    pub l: u32,
    pub q: u8,
    pub setting: Setting,
    pub model: String,
    pub step: u64,
    pub seed: u64,
    pub particles: Vec<SnapshotParticle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub artifact_version: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct SnapshotParticle {
    pub x: u32,
    pub y: u32,
    pub theta: u8,
}

pub const SNAPSHOT_FORMAT_VERSION: u32 = 1;

impl Snapshot {
    pub fn from_configuration(
        cfg: &Configuration,
        model: &str,
        step: u64,
        seed: u64,
    ) -> Self {
        let g = cfg.geometry();
        let mut particles: Vec<SnapshotParticle> = cfg
            .particles()
            .iter()
            .map(|&v| {
                let s = g.site_of(v);
                SnapshotParticle { x: s.x, y: s.y, theta: cfg.orientation(v).unwrap() }
            })
            .collect();
        particles.sort_by_key(|p| (p.y, p.x));
        Self {
            format_version: SNAPSHOT_FORMAT_VERSION,
            l: g.side(),
            q: cfg.q(),
            setting: cfg.setting(),
            model: model.to_string(),
            step,
            seed,
            particles,
            rng: None,
            config_hash: None,
            artifact_version: None,
        }
    }

    pub fn to_configuration(&self) -> Result<Configuration, ConfigError> {
        let geometry = Arc::new(
            LatticeGeometry::new(self.l).map_err(|_| ConfigError::ShapeTooLarge {
                n: self.particles.len(),
                l: self.l,
            })?,
        );
        let sites: Vec<(SiteId, u8)> = self
            .particles
            .iter()
            .map(|p| (geometry.id_of(crate::lattice::Site { x: p.x, y: p.y }), p.theta))
            .collect();
        Configuration::new(geometry, self.setting, self.q, &sites)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Site;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn geom(l: u32) -> Arc<LatticeGeometry> {
        Arc::new(LatticeGeometry::new(l).unwrap())
    }

    fn build(g: &Arc<LatticeGeometry>, q: u8, sites: &[(u32, u32, u8)]) -> Configuration {
        let ids: Vec<(SiteId, u8)> =
            sites.iter().map(|&(x, y, t)| (g.id_of(Site { x, y }), t)).collect();
        Configuration::new(g.clone(), Setting::Connected, q, &ids).unwrap()
    }

    fn hexagon7(g: &Arc<LatticeGeometry>, center_theta: u8, q: u8) -> Configuration {
        // Center (4,4) plus its six neighbors.
        let mut sites = vec![(4, 4, center_theta)];
        for (dx, dy) in crate::lattice::NEIGHBOR_OFFSETS {
            sites.push(((4 + dx) as u32, (4 + dy) as u32, 0));
        }
        build(g, q, &sites)
    }

    #[test]
    fn boundary_edge_counts() {
        let g = geom(9);
        assert_eq!(build(&g, 2, &[(4, 4, 0)]).count_boundary_edges(), 6);
        assert_eq!(build(&g, 2, &[(4, 4, 0), (5, 4, 0)]).count_boundary_edges(), 10);
        assert_eq!(hexagon7(&g, 0, 2).count_boundary_edges(), 18);
    }

    #[test]
    fn perimeter_examples() {
        let g = geom(9);
        assert_eq!(build(&g, 2, &[(4, 4, 0)]).perimeter().unwrap(), 0);
        assert_eq!(build(&g, 2, &[(4, 4, 0), (5, 4, 0)]).perimeter().unwrap(), 2);
        assert_eq!(hexagon7(&g, 0, 2).perimeter().unwrap(), 6);
        // Disconnected: undefined.
        assert_eq!(
            build(&g, 2, &[(1, 1, 0), (5, 5, 0)]).perimeter(),
            Err(ConfigError::PerimeterUndefined)
        );
    }

    #[test]
    fn heterogeneous_counts() {
        let g = geom(9);
        assert_eq!(hexagon7(&g, 0, 2).count_heterogeneous(), 0);
        assert_eq!(build(&g, 2, &[(4, 4, 0), (5, 4, 1)]).count_heterogeneous(), 1);
        assert_eq!(hexagon7(&g, 1, 2).count_heterogeneous(), 6);
    }

    #[test]
    fn clock_distance_examples() {
        let g = geom(9);
        assert_eq!(build(&g, 4, &[(4, 4, 0), (5, 4, 0)]).clock_distance_sum(), 0.0);
        let d2 = build(&g, 4, &[(4, 4, 0), (5, 4, 2)]).clock_distance_sum();
        assert!((d2 - 2.0).abs() < 1e-15);
        let d1 = build(&g, 4, &[(4, 4, 0), (5, 4, 1)]).clock_distance_sum();
        assert!((d1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn simple_connectivity_examples() {
        let g = geom(9);
        assert!(hexagon7(&g, 0, 2).is_simply_connected());
        assert!(!build(&g, 2, &[(2, 2, 0), (4, 2, 0)]).is_simply_connected());
        // 6-ring with empty center.
        let ring: Vec<(u32, u32, u8)> = crate::lattice::NEIGHBOR_OFFSETS
            .iter()
            .map(|&(dx, dy)| ((4 + dx) as u32, (4 + dy) as u32, 0))
            .collect();
        assert!(!build(&g, 2, &ring).is_simply_connected());
    }

    #[test]
    fn local_deltas_match_recount_on_random_moves() {
        let g = geom(8);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for setting in [Setting::Connected, Setting::General] {
            let mut cfg =
                Configuration::uniform_random(g.clone(), setting, 3, 14, &mut rng).unwrap();
            for _ in 0..3000 {
                let idx = rng.gen_range(0..cfg.num_particles());
                let from = cfg.particles()[idx];
                let mv = if rng.gen::<bool>() {
                    let to = g.neighbor(from, rng.gen_range(0..6));
                    if cfg.is_occupied(to) {
                        continue;
                    }
                    Move::Spatial { from, to }
                } else {
                    Move::Reorient { site: from, new_theta: rng.gen_range(0..3) }
                };
                let delta = cfg.local_delta(&mv).unwrap();
                cfg.apply(&mv, &delta);
                assert!(cfg.stats_consistent());
            }
        }
    }

    #[test]
    fn isolated_particle_translation_invariance() {
        let g = geom(9);
        let cfg = Configuration::new(
            g.clone(),
            Setting::General,
            2,
            &[(g.id_of(Site { x: 4, y: 4 }), 0)],
        )
        .unwrap();
        let mv = Move::Spatial {
            from: g.id_of(Site { x: 4, y: 4 }),
            to: g.id_of(Site { x: 5, y: 4 }),
        };
        let delta = cfg.local_delta(&mv).unwrap();
        assert_eq!(delta.da, 0);
        assert_eq!(delta.dh(), 0);
    }

    #[test]
    fn reorientation_without_disagreement_changes_nothing() {
        let g = geom(9);
        let cfg = build(&g, 3, &[(4, 4, 1), (5, 4, 1)]);
        let mv = Move::Reorient { site: g.id_of(Site { x: 4, y: 4 }), new_theta: 1 };
        let delta = cfg.local_delta(&mv).unwrap();
        assert_eq!(delta.da, 0);
        assert_eq!(delta.dh(), 0);
        assert!(delta.entries().is_empty());
    }

    #[test]
    fn delta_errors() {
        let g = geom(9);
        let cfg = build(&g, 2, &[(4, 4, 0), (5, 4, 0)]);
        let occ = g.id_of(Site { x: 4, y: 4 });
        let other = g.id_of(Site { x: 5, y: 4 });
        let far = g.id_of(Site { x: 1, y: 1 });
        assert_eq!(
            cfg.local_delta(&Move::Spatial { from: occ, to: other }),
            Err(ConfigError::Occupied(other))
        );
        assert_eq!(
            cfg.local_delta(&Move::Spatial { from: occ, to: far }),
            Err(ConfigError::NotAdjacent(occ, far))
        );
        assert_eq!(
            cfg.local_delta(&Move::Spatial { from: far, to: occ }),
            Err(ConfigError::NotOccupied(far))
        );
    }

    #[test]
    fn global_orientation_shift_preserves_h_and_d() {
        let g = geom(8);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cfg =
            Configuration::uniform_random(g.clone(), Setting::General, 4, 16, &mut rng)
                .unwrap();
        let mut shifted = cfg.clone();
        for &v in cfg.particles() {
            let t = cfg.orientation(v).unwrap();
            shifted.set_orientation(v, (t + 1) % 4).unwrap();
        }
        assert_eq!(cfg.count_heterogeneous(), shifted.count_heterogeneous());
        assert_eq!(cfg.clock_distance_sum(), shifted.clock_distance_sum());
    }

    #[test]
    fn line_perimeter_is_maximal() {
        let g = geom(11);
        let cfg = Configuration::line(g, Setting::Connected, 2, 7).unwrap();
        assert_eq!(cfg.perimeter().unwrap(), 12);
    }

    #[test]
    fn spiral_prefixes_are_simply_connected() {
        let g = geom(15);
        for n in 1..=40 {
            let cfg = Configuration::spiral(g.clone(), Setting::Connected, 2, n).unwrap();
            assert!(cfg.is_simply_connected(), "n={n}");
            assert_eq!(cfg.num_particles(), n);
        }
    }

    #[test]
    fn snapshot_round_trip_exact() {
        let g = geom(7);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let cfg =
            Configuration::uniform_random(g, Setting::General, 3, 9, &mut rng).unwrap();
        let snap = Snapshot::from_configuration(&cfg, "clock", 123, 77);
        let text = serde_json::to_string(&snap).unwrap();
        let back: Snapshot = serde_json::from_str(&text).unwrap();
        assert_eq!(snap, back);
        let cfg2 = back.to_configuration().unwrap();
        assert_eq!(cfg2.num_particles(), cfg.num_particles());
        for &v in cfg.particles() {
            assert_eq!(cfg2.orientation(v), cfg.orientation(v));
        }
    }
}
