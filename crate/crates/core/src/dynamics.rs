//! Metropolis-Hastings chains: proposal kernel, connected-setting validity,
//! acceptance probabilities for all setting/model combinations, and the run
//! loop.
//!
//! One activation = one step: pick a particle uniformly, then with equal
//! probability either a spatial move to a uniform neighbor or a reorientation
//! to a new direction drawn uniformly from the `q - 1` other orientations
//! (symmetric either way; excluding the current one wastes no proposals).
//! Invalid spatial proposals are rejected and still count as steps. Weight
//! ratios are evaluated in log space.

use crate::config::{ConfigError, Configuration, Move, MoveDelta, Setting};
use crate::lattice::{LatticeGeometry, SiteId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Pinned generator for reproducible trajectories; recorded in output
/// metadata as "chacha8".
pub const RNG_IDENTITY: &str = "chacha8";

#[derive(Debug, Error, PartialEq)]
pub enum ChainError {
    #[error("q must be at least 2, got {0}")]
    BadQ(u8),
    #[error("{name} must be positive and finite, got {value}")]
    BadParameter { name: &'static str, value: f64 },
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("acceptance evaluated for an invalid move")]
    InvalidMove,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Potts,
    Clock,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub q: u8,
    pub lambda: f64,
    /// Ignored in the general setting, which couples attraction and
    /// alignment into the single parameter lambda.
    pub gamma: f64,
    pub model: Model,
    pub setting: Setting,
    pub seed: u64,
}

impl ChainParams {
    pub fn validate(&self) -> Result<(), ChainError> {
        if self.q < 2 {
            return Err(ChainError::BadQ(self.q));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(ChainError::BadParameter { name: "lambda", value: self.lambda });
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(ChainError::BadParameter { name: "gamma", value: self.gamma });
        }
        Ok(())
    }
}

/// Validity of a spatial move in the connected setting.
///
/// With `S` the occupied sites adjacent to both endpoints and `N(l u l')`
/// the eight sites adjacent to either endpoint (excluding the endpoints),
/// the move is valid iff the target is unoccupied, fewer than 5 of `N(l)`
/// are occupied, and either:
///
/// - Property 1: `|S| >= 1` and every occupied site of `N(l u l')` reaches
///   an occupied common neighbor through occupied sites of `N(l u l')`; or
/// - Property 2: `|S| = 0`, both endpoints have an occupied neighbor besides
///   each other, and the occupied sites of `N(l) \ {l'}` are internally
///   connected, likewise `N(l') \ {l}`.
pub fn is_valid_spatial(
    cfg: &Configuration,
    from: SiteId,
    to: SiteId,
) -> Result<bool, ChainError> {
    if !cfg.is_occupied(from) {
        return Err(ChainError::Config(ConfigError::NotOccupied(from)));
    }
    let dir = match cfg.geometry().neighbors(from).iter().position(|&w| w == to) {
        Some(d) => d,
        None => return Err(ChainError::Config(ConfigError::NotAdjacent(from, to))),
    };
    Ok(valid_spatial_direct(cfg, from, dir))
}

/// Direct evaluation of the validity predicate (reference path; also used
/// when the lattice is too small for the relative-offset table).
fn valid_spatial_direct(cfg: &Configuration, from: SiteId, dir: usize) -> bool {
    let g = cfg.geometry();
    let to = g.neighbor(from, dir);
    if cfg.is_occupied(to) {
        return false;
    }
    let occ_nl = g.neighbors(from).iter().filter(|&&w| cfg.is_occupied(w)).count();
    if occ_nl >= 5 {
        return false;
    }

    // Ring of sites adjacent to either endpoint, endpoints excluded.
    let mut ring = [0 as SiteId; 8];
    let mut len = 0;
    for &w in g.neighbors(from).iter().chain(g.neighbors(to).iter()) {
        if w != from && w != to && !ring[..len].contains(&w) {
            ring[len] = w;
            len += 1;
        }
    }
    let ring = &ring[..len];
    let common: Vec<SiteId> = ring
        .iter()
        .copied()
        .filter(|&w| g.neighbors(from).contains(&w) && g.neighbors(to).contains(&w))
        .collect();
    let s_occ: Vec<SiteId> = common.iter().copied().filter(|&w| cfg.is_occupied(w)).collect();

    let adjacent = |u: SiteId, w: SiteId| g.neighbors(u).contains(&w);
    let closure = |seed: &[SiteId], allowed: &dyn Fn(SiteId) -> bool| -> Vec<SiteId> {
        let mut reach: Vec<SiteId> = seed.to_vec();
        let mut frontier = reach.clone();
        while let Some(u) = frontier.pop() {
            for &w in ring {
                if allowed(w) && cfg.is_occupied(w) && !reach.contains(&w) && adjacent(u, w) {
                    reach.push(w);
                    frontier.push(w);
                }
            }
        }
        reach
    };

    if !s_occ.is_empty() {
        // Property 1.
        let reach = closure(&s_occ, &|_| true);
        ring.iter().all(|&w| !cfg.is_occupied(w) || reach.contains(&w))
    } else {
        // Property 2.
        let nl: Vec<SiteId> =
            g.neighbors(from).iter().copied().filter(|&w| w != to).collect();
        let nlp: Vec<SiteId> =
            g.neighbors(to).iter().copied().filter(|&w| w != from).collect();
        let nl_occ: Vec<SiteId> = nl.iter().copied().filter(|&w| cfg.is_occupied(w)).collect();
        let nlp_occ: Vec<SiteId> = nlp.iter().copied().filter(|&w| cfg.is_occupied(w)).collect();
        if nl_occ.is_empty() || nlp_occ.is_empty() {
            return false;
        }
        let in_nl = |w: SiteId| nl.contains(&w);
        let in_nlp = |w: SiteId| nlp.contains(&w);
        let r1 = closure(&nl_occ[..1], &in_nl);
        let r2 = closure(&nlp_occ[..1], &in_nlp);
        nl_occ.iter().all(|w| r1.contains(w)) && nlp_occ.iter().all(|w| r2.contains(w))
    }
}

/// Per-direction relative geometry of the 8-site ring around a moved edge,
/// with a 256-entry validity table indexed by the ring occupancy mask.
/// Sound for L >= 4 where the relative offsets cannot alias on the torus.
#[derive(Debug, Clone)]
struct ValidTable {
    /// ring_paths[dir][i]: two neighbor hops from `from` reaching ring
    /// position i.
    ring_paths: [[(u8, u8); 8]; 6],
    valid: [[bool; 256]; 6],
}

impl ValidTable {
    fn build() -> Self {
        use crate::lattice::NEIGHBOR_OFFSETS;
        let add = |a: (i64, i64), b: (i64, i64)| (a.0 + b.0, a.1 + b.1);
        let is_neighbor = |a: (i64, i64), b: (i64, i64)| {
            NEIGHBOR_OFFSETS.iter().any(|&(dx, dy)| (a.0 + dx, a.1 + dy) == b)
        };
        let mut ring_paths = [[(0u8, 0u8); 8]; 6];
        let mut valid = [[false; 256]; 6];
        for dir in 0..6 {
            let l = (0i64, 0i64);
            let lp = NEIGHBOR_OFFSETS[dir];
            let mut ring: Vec<(i64, i64)> = Vec::new();
            for &o in &NEIGHBOR_OFFSETS {
                for &base in &[l, lp] {
                    let w = add(base, o);
                    if w != l && w != lp && !ring.contains(&w) {
                        ring.push(w);
                    }
                }
            }
            assert_eq!(ring.len(), 8);
            for (i, &o) in ring.iter().enumerate() {
                // Express each ring offset as two neighbor hops.
                let path = (0..6)
                    .flat_map(|a| (0..6).map(move |b| (a, b)))
                    .find(|&(a, b)| add(NEIGHBOR_OFFSETS[a], NEIGHBOR_OFFSETS[b]) == o)
                    .expect("ring offset decomposes into two hops");
                ring_paths[dir][i] = (path.0 as u8, path.1 as u8);
            }
            let common_mask: u8 = ring
                .iter()
                .enumerate()
                .filter(|&(_, &w)| is_neighbor(l, w) && is_neighbor(lp, w))
                .map(|(i, _)| 1u8 << i)
                .sum();
            let nl_mask: u8 = ring
                .iter()
                .enumerate()
                .filter(|&(_, &w)| is_neighbor(l, w))
                .map(|(i, _)| 1u8 << i)
                .sum();
            let nlp_mask: u8 = ring
                .iter()
                .enumerate()
                .filter(|&(_, &w)| is_neighbor(lp, w))
                .map(|(i, _)| 1u8 << i)
                .sum();
            let mut adj = [0u8; 8];
            for i in 0..8 {
                for j in 0..8 {
                    if i != j && is_neighbor(ring[i], ring[j]) {
                        adj[i] |= 1 << j;
                    }
                }
            }
            let closure = |seed: u8, allowed: u8| -> u8 {
                let mut reach = seed & allowed;
                loop {
                    let mut next = reach;
                    for i in 0..8 {
                        if reach & (1 << i) != 0 {
                            next |= adj[i] & allowed;
                        }
                    }
                    if next == reach {
                        return reach;
                    }
                    reach = next;
                }
            };
            for mask in 0..256usize {
                let m = mask as u8;
                if (m & nl_mask).count_ones() >= 5 {
                    continue;
                }
                let s_occ = m & common_mask;
                let ok = if s_occ != 0 {
                    closure(s_occ, m) == m
                } else {
                    let nl_occ = m & nl_mask;
                    let nlp_occ = m & nlp_mask;
                    nl_occ != 0
                        && nlp_occ != 0
                        && closure(nl_occ & nl_occ.wrapping_neg(), nl_occ) == nl_occ
                        && closure(nlp_occ & nlp_occ.wrapping_neg(), nlp_occ) == nlp_occ
                };
                valid[dir][mask] = ok;
            }
        }
        Self { ring_paths, valid }
    }

    #[inline(always)]
    fn is_valid(&self, cfg: &Configuration, g: &LatticeGeometry, from: SiteId, dir: usize) -> bool {
        let mut mask = 0u8;
        for (i, &(a, b)) in self.ring_paths[dir].iter().enumerate() {
            let w = g.neighbor(g.neighbor(from, a as usize), b as usize);
            if cfg.is_occupied(w) {
                mask |= 1 << i;
            }
        }
        self.valid[dir][mask as usize]
    }
}

/// Log of the acceptance ratio `pi(sigma') / pi(sigma)` for a validated move.
#[inline(always)]
fn log_ratio(params: &ChainParams, cfg: &Configuration, delta: &MoveDelta) -> f64 {
    let ln_gamma = params.gamma.ln();
    match (params.setting, params.model) {
        (Setting::Connected, Model::Potts) => {
            let ln_lg = params.lambda.ln() + ln_gamma;
            -(delta.dp() as f64) * ln_lg - (delta.dh() as f64) * ln_gamma
        }
        (Setting::Connected, Model::Clock) => {
            let ln_lg = params.lambda.ln() + ln_gamma;
            -(delta.dp() as f64) * ln_lg - delta.dd(cfg.dtable()) * ln_gamma
        }
        (Setting::General, Model::Potts) => {
            -((delta.da + delta.dh()) as f64) * params.lambda.ln()
        }
        (Setting::General, Model::Clock) => {
            -(delta.da as f64 + delta.dd(cfg.dtable())) * params.lambda.ln()
        }
    }
}

/// Acceptance probability `min(1, pi(sigma')/pi(sigma))` for a move that has
/// already passed validity.
pub fn acceptance_probability(
    cfg: &Configuration,
    mv: &Move,
    params: &ChainParams,
) -> Result<f64, ChainError> {
    params.validate()?;
    if let Move::Spatial { from, to } = *mv {
        let valid = match params.setting {
            Setting::Connected => is_valid_spatial(cfg, from, to)?,
            Setting::General => {
                if !cfg.is_occupied(from) {
                    return Err(ChainError::Config(ConfigError::NotOccupied(from)));
                }
                cfg.geometry().neighbors(from).contains(&to) && !cfg.is_occupied(to)
            }
        };
        if !valid {
            return Err(ChainError::InvalidMove);
        }
    }
    let delta = cfg.local_delta(mv)?;
    Ok(log_ratio(params, cfg, &delta).exp().min(1.0))
}

/// A single chain instance: parameters, pinned RNG, and step counters.
pub struct Chain {
    params: ChainParams,
    rng: ChaCha8Rng,
    table: Option<ValidTable>,
    ln_lambda: f64,
    ln_gamma: f64,
    steps: u64,
    accepted: u64,
}

impl Chain {
    pub fn new(params: ChainParams) -> Result<Self, ChainError> {
        params.validate()?;
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(params.seed),
            table: match params.setting {
                Setting::Connected => Some(ValidTable::build()),
                Setting::General => None,
            },
            ln_lambda: params.lambda.ln(),
            ln_gamma: params.gamma.ln(),
            params,
            steps: 0,
            accepted: 0,
        })
    }

    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps
    }

    pub fn accepted(&self) -> u64 {
        self.accepted
    }

    /// Draw one proposal: uniform particle, then an equal-probability coin
    /// between a spatial move to a uniform neighbor and a reorientation to a
    /// uniform new orientation among the `q - 1` others.
    pub fn propose(&mut self, cfg: &Configuration) -> Move {
        debug_assert!(cfg.num_particles() >= 1);
        let idx = self.rng.gen_range(0..cfg.num_particles());
        let site = cfg.particles()[idx];
        if self.rng.gen::<bool>() {
            let dir = self.rng.gen_range(0..6usize);
            Move::Spatial { from: site, to: cfg.geometry().neighbor(site, dir) }
        } else {
            let theta = cfg.orientation(site).expect("proposed particle is occupied");
            let offset = self.rng.gen_range(1..self.params.q);
            Move::Reorient { site, new_theta: (theta + offset) % self.params.q }
        }
    }

    /// One activation: propose, validate, Metropolis-accept, apply.
    /// Returns whether the configuration changed state (accepted moves;
    /// a reorientation to the same orientation counts as accepted).
    pub fn step(&mut self, cfg: &mut Configuration) -> bool {
        self.steps += 1;
        let n = cfg.num_particles();
        let idx = self.rng.gen_range(0..n);
        let from = cfg.particles()[idx];
        let mv = if self.rng.gen::<bool>() {
            let dir = self.rng.gen_range(0..6usize);
            let to = cfg.geometry().neighbor(from, dir);
            let valid = !cfg.is_occupied(to)
                && match self.params.setting {
                    Setting::General => true,
                    Setting::Connected => {
                        if cfg.geometry().side() >= 4 {
                            let g = cfg.geometry();
                            self.table.as_ref().unwrap().is_valid(cfg, g, from, dir)
                        } else {
                            valid_spatial_direct(cfg, from, dir)
                        }
                    }
                };
            if !valid {
                return false;
            }
            Move::Spatial { from, to }
        } else {
            let theta = cfg.orientation(from).expect("chain particles are occupied");
            let offset = self.rng.gen_range(1..self.params.q);
            Move::Reorient { site: from, new_theta: (theta + offset) % self.params.q }
        };

        let delta = cfg.local_delta(&mv).expect("proposal passed validity");
        let logr = match (self.params.setting, self.params.model) {
            (Setting::Connected, Model::Potts) => {
                -(delta.dp() as f64) * (self.ln_lambda + self.ln_gamma)
                    - (delta.dh() as f64) * self.ln_gamma
            }
            (Setting::Connected, Model::Clock) => {
                -(delta.dp() as f64) * (self.ln_lambda + self.ln_gamma)
                    - delta.dd(cfg.dtable()) * self.ln_gamma
            }
            (Setting::General, Model::Potts) => {
                -((delta.da + delta.dh()) as f64) * self.ln_lambda
            }
            (Setting::General, Model::Clock) => {
                -(delta.da as f64 + delta.dd(cfg.dtable())) * self.ln_lambda
            }
        };
        if logr < 0.0 && self.rng.gen::<f64>() >= logr.exp() {
            return false;
        }
        cfg.apply(&mv, &delta);
        self.accepted += 1;
        true
    }

    /// Execute `steps` activations, invoking the observer at step 0, every
    /// `sample_interval` steps, and at the final step.
    pub fn run<F: FnMut(u64, &Configuration)>(
        &mut self,
        cfg: &mut Configuration,
        steps: u64,
        sample_interval: u64,
        mut observe: F,
    ) {
        let interval = sample_interval.max(1);
        observe(0, cfg);
        for s in 1..=steps {
            self.step(cfg);
            if s % interval == 0 || s == steps {
                observe(s, cfg);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Site;
    use std::sync::Arc;

    fn geom(l: u32) -> Arc<LatticeGeometry> {
        Arc::new(LatticeGeometry::new(l).unwrap())
    }

    fn conn(g: &Arc<LatticeGeometry>, q: u8, sites: &[(u32, u32)]) -> Configuration {
        let ids: Vec<(SiteId, u8)> =
            sites.iter().map(|&(x, y)| (g.id_of(Site { x, y }), 0)).collect();
        Configuration::new(g.clone(), Setting::Connected, q, &ids).unwrap()
    }

    #[test]
    fn domino_slide_is_valid() {
        // Move one particle of a domino around its partner to an adjacent
        // empty site sharing one occupied common neighbor.
        let g = geom(7);
        let cfg = conn(&g, 2, &[(3, 3), (4, 3)]);
        let from = g.id_of(Site { x: 3, y: 3 });
        let to = g.id_of(Site { x: 4, y: 4 });
        // Common neighbors of (3,3) and (4,4) are (4,3)=occupied and (3,4).
        assert!(is_valid_spatial(&cfg, from, to).unwrap());
    }

    #[test]
    fn disconnecting_middle_of_line_is_invalid() {
        let g = geom(7);
        let cfg = conn(&g, 2, &[(2, 3), (3, 3), (4, 3)]);
        let from = g.id_of(Site { x: 3, y: 3 });
        for dir in 0..6 {
            let to = g.neighbor(from, dir);
            if !cfg.is_occupied(to) {
                assert!(!is_valid_spatial(&cfg, from, to).unwrap(), "dir {dir}");
            }
        }
    }

    #[test]
    fn singleton_has_no_valid_spatial_moves() {
        let g = geom(5);
        let cfg = conn(&g, 2, &[(2, 2)]);
        let from = g.id_of(Site { x: 2, y: 2 });
        for dir in 0..6 {
            let to = g.neighbor(from, dir);
            assert!(!is_valid_spatial(&cfg, from, to).unwrap());
        }
    }

    #[test]
    fn errors_on_unoccupied_source() {
        let g = geom(5);
        let cfg = conn(&g, 2, &[(2, 2)]);
        let from = g.id_of(Site { x: 0, y: 0 });
        let to = g.id_of(Site { x: 1, y: 0 });
        assert!(matches!(
            is_valid_spatial(&cfg, from, to),
            Err(ChainError::Config(ConfigError::NotOccupied(_)))
        ));
    }

    #[test]
    fn table_matches_direct_evaluation() {
        use rand::Rng;
        let g = geom(6);
        let table = ValidTable::build();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let n = rng.gen_range(1..=8usize);
            let mut sites = std::collections::HashSet::new();
            while sites.len() < n {
                sites.insert((rng.gen_range(0..6u32), rng.gen_range(0..6u32)));
            }
            let sites: Vec<(u32, u32)> = sites.into_iter().collect();
            let ids: Vec<(SiteId, u8)> =
                sites.iter().map(|&(x, y)| (g.id_of(Site { x, y }), 0)).collect();
            let cfg = Configuration::new(g.clone(), Setting::Connected, 2, &ids).unwrap();
            for &(x, y) in &sites {
                let from = g.id_of(Site { x, y });
                for dir in 0..6 {
                    let direct = valid_spatial_direct(&cfg, from, dir);
                    let fast = !cfg.is_occupied(g.neighbor(from, dir))
                        && table.is_valid(&cfg, &g, from, dir);
                    assert_eq!(direct, fast, "from=({x},{y}) dir={dir}");
                }
            }
        }
    }

    #[test]
    fn acceptance_examples() {
        let g = geom(7);
        // Connected+Potts reorientation with dh=+2, dp=0, gamma=4 -> 1/16.
        let mut cfg = conn(&g, 2, &[(2, 3), (3, 3), (4, 3)]);
        for &(x, y) in &[(2u32, 3u32), (3, 3), (4, 3)] {
            cfg.set_orientation(g.id_of(Site { x, y }), 0).unwrap();
        }
        let params = ChainParams {
            q: 2,
            lambda: 1.0,
            gamma: 4.0,
            model: Model::Potts,
            setting: Setting::Connected,
            seed: 0,
        };
        let mv = Move::Reorient { site: g.id_of(Site { x: 3, y: 3 }), new_theta: 1 };
        let p = acceptance_probability(&cfg, &mv, &params).unwrap();
        assert!((p - 1.0 / 16.0).abs() < 1e-15);

        // Ratio > 1 is clipped at 1.
        let params2 = ChainParams { gamma: 0.25, ..params };
        let p2 = acceptance_probability(&cfg, &mv, &params2).unwrap();
        assert_eq!(p2, 1.0);
    }

    #[test]
    fn clock_reorientation_example() {
        // q=4: reorient a particle from agreeing with its single neighbor to
        // differing by 2 (d = 1 - cos(pi) = 2), gamma=3 -> 1/9.
        let g = geom(7);
        let cfg = conn(&g, 4, &[(3, 3), (4, 3)]);
        let params = ChainParams {
            q: 4,
            lambda: 2.0,
            gamma: 3.0,
            model: Model::Clock,
            setting: Setting::Connected,
            seed: 0,
        };
        let mv = Move::Reorient { site: g.id_of(Site { x: 3, y: 3 }), new_theta: 2 };
        let p = acceptance_probability(&cfg, &mv, &params).unwrap();
        assert!((p - 1.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_infinity_limit_rejects_heterogeneous() {
        let g = geom(7);
        let cfg = conn(&g, 2, &[(3, 3), (4, 3)]);
        let params = ChainParams {
            q: 2,
            lambda: 1.0,
            gamma: 1e15,
            model: Model::Potts,
            setting: Setting::Connected,
            seed: 0,
        };
        let mv = Move::Reorient { site: g.id_of(Site { x: 3, y: 3 }), new_theta: 1 };
        let p = acceptance_probability(&cfg, &mv, &params).unwrap();
        assert!(p < 1e-12);
    }

    #[test]
    fn identical_seeds_give_identical_trajectories() {
        let g = geom(9);
        let params = ChainParams {
            q: 3,
            lambda: 2.0,
            gamma: 3.0,
            model: Model::Potts,
            setting: Setting::Connected,
            seed: 42,
        };
        let run = || {
            let mut cfg =
                Configuration::spiral(g.clone(), Setting::Connected, 3, 7).unwrap();
            let mut chain = Chain::new(params).unwrap();
            for _ in 0..20_000 {
                chain.step(&mut cfg);
            }
            let mut sites: Vec<(SiteId, u8)> = cfg
                .particles()
                .iter()
                .map(|&v| (v, cfg.orientation(v).unwrap()))
                .collect();
            sites.sort_unstable();
            (sites, chain.accepted())
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn run_zero_steps_keeps_configuration_and_samples_once() {
        let g = geom(7);
        let mut cfg = conn(&g, 2, &[(3, 3), (4, 3)]);
        let before: Vec<SiteId> = cfg.particles().to_vec();
        let params = ChainParams {
            q: 2,
            lambda: 2.0,
            gamma: 2.0,
            model: Model::Potts,
            setting: Setting::Connected,
            seed: 1,
        };
        let mut chain = Chain::new(params).unwrap();
        let mut samples = 0;
        chain.run(&mut cfg, 0, 10, |_, _| samples += 1);
        assert_eq!(samples, 1);
        assert_eq!(cfg.particles(), &before[..]);
    }

    #[test]
    fn connected_run_preserves_simple_connectivity_and_count() {
        let g = geom(11);
        let mut cfg = Configuration::line(g.clone(), Setting::Connected, 2, 6).unwrap();
        let params = ChainParams {
            q: 2,
            lambda: 3.0,
            gamma: 2.0,
            model: Model::Potts,
            setting: Setting::Connected,
            seed: 5,
        };
        let mut chain = Chain::new(params).unwrap();
        chain.run(&mut cfg, 50_000, 1000, |_, c| {
            assert!(c.is_simply_connected());
            assert_eq!(c.num_particles(), 6);
            assert!(c.stats_consistent());
        });
    }

    #[test]
    fn general_run_preserves_particle_count() {
        let g = geom(8);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut cfg =
            Configuration::uniform_random(g.clone(), Setting::General, 3, 12, &mut rng)
                .unwrap();
        let params = ChainParams {
            q: 3,
            lambda: 1.5,
            gamma: 1.0,
            model: Model::Clock,
            setting: Setting::General,
            seed: 9,
        };
        let mut chain = Chain::new(params).unwrap();
        chain.run(&mut cfg, 50_000, 1000, |_, c| {
            assert_eq!(c.num_particles(), 12);
            assert!(c.stats_consistent());
        });
    }

    #[test]
    fn proposal_frequencies_match_kernel() {
        // Reorient fraction ~ 1/2 and each (particle, direction) spatial
        // pair ~ 1/(12 n), within 3-sigma binomial bands.
        let g = geom(9);
        let cfg = conn(&g, 2, &[(4, 4), (5, 4), (4, 5)]);
        let params = ChainParams {
            q: 2,
            lambda: 1.0,
            gamma: 1.0,
            model: Model::Potts,
            setting: Setting::Connected,
            seed: 11,
        };
        let mut chain = Chain::new(params).unwrap();
        let trials = 600_000usize;
        let mut reorients = 0usize;
        let mut spatial_counts = std::collections::HashMap::new();
        for _ in 0..trials {
            match chain.propose(&cfg) {
                Move::Reorient { .. } => reorients += 1,
                Move::Spatial { from, to } => {
                    *spatial_counts.entry((from, to)).or_insert(0usize) += 1
                }
            }
        }
        let p_half = 0.5;
        let sigma_half = (trials as f64 * p_half * (1.0 - p_half)).sqrt();
        assert!((reorients as f64 - trials as f64 * p_half).abs() < 3.0 * sigma_half);
        let n = cfg.num_particles() as f64;
        let p_pair = 1.0 / (2.0 * n * 6.0);
        let sigma_pair = (trials as f64 * p_pair * (1.0 - p_pair)).sqrt();
        assert_eq!(spatial_counts.len(), 18);
        for (&_, &c) in &spatial_counts {
            assert!((c as f64 - trials as f64 * p_pair).abs() < 3.0 * sigma_pair + 1.0);
        }
    }
}
