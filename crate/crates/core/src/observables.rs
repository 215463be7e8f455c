//! Phase classifiers and structural measurements: alignment, compression,
//! expansion, isoperimetric quantities, internal boundary contours, and
//! delta-bridge systems certifying aggregation regions in the general
//! setting.

use crate::config::{ConfigError, Configuration};
use crate::lattice::{DualEdgeId, SiteId};
use serde::Serialize;
use std::collections::BTreeSet;

/// Per-orientation particle counts and the most popular orientation
/// (ties broken toward smaller theta).
#[derive(Debug, Clone, Serialize)]
pub struct AlignmentReport {
    pub counts: Vec<u64>,
    pub dominant: u8,
    pub rho_p: f64,
}

pub fn alignment_report(cfg: &Configuration) -> AlignmentReport {
    let mut counts = vec![0u64; cfg.q() as usize];
    for &v in cfg.particles() {
        counts[cfg.orientation(v).unwrap() as usize] += 1;
    }
    let dominant = counts
        .iter()
        .enumerate()
        .max_by_key(|&(i, &c)| (c, std::cmp::Reverse(i)))
        .map(|(i, _)| i as u8)
        .unwrap_or(0);
    let n = cfg.num_particles().max(1) as f64;
    AlignmentReport { rho_p: counts[dominant as usize] as f64 / n, counts, dominant }
}

/// True iff some orientation is held by at least `(1 - delta) * n` particles.
pub fn is_aligned(cfg: &Configuration, delta: f64) -> bool {
    let rep = alignment_report(cfg);
    let n = cfg.num_particles() as f64;
    rep.counts[rep.dominant as usize] as f64 >= (1.0 - delta) * n
}

/// True iff every orientation fraction is within `eps` of `1/q`.
pub fn is_eps_nonaligned(cfg: &Configuration, eps: f64) -> bool {
    let rep = alignment_report(cfg);
    let n = cfg.num_particles() as f64;
    let target = 1.0 / cfg.q() as f64;
    rep.counts.iter().all(|&c| (c as f64 / n - target).abs() <= eps)
}

/// Smallest integer `p >= 0` with `n <= floor(((p+3)^2 + 3) / 12)`: the
/// minimum perimeter of `n` particles on the triangular lattice.
pub fn p_min_exact(n: u64) -> u64 {
    assert!(n >= 1);
    let capacity = |p: u64| ((p + 3) * (p + 3) + 3) / 12;
    // Start just below the analytic lower bound and walk up.
    let approx = (12.0 * n as f64 - 3.0).sqrt() - 3.0;
    let mut p = (approx.floor() as i64 - 2).max(0) as u64;
    while capacity(p) < n {
        p += 1;
    }
    p
}

/// Maximum perimeter `2n - 2` (0 for a single particle).
pub fn p_max(n: u64) -> u64 {
    if n <= 1 {
        0
    } else {
        2 * n - 2
    }
}

/// Perimeter at most `alpha * p_min(n)`.
pub fn is_alpha_compressed(cfg: &Configuration, alpha: f64) -> Result<bool, ConfigError> {
    let p = cfg.perimeter()?;
    Ok(p as f64 <= alpha * p_min_exact(cfg.num_particles() as u64) as f64)
}

/// Perimeter greater than `beta * p_max(n)`.
pub fn is_beta_expanded(cfg: &Configuration, beta: f64) -> Result<bool, ConfigError> {
    let p = cfg.perimeter()?;
    Ok(p as f64 > beta * p_max(cfg.num_particles() as u64) as f64)
}

/// Minimum boundary length of a region of `k` sites on an `N`-site torus.
/// Exact (`2 p_min + 6`) in the non-wrapping regime `k < N/3`; otherwise the
/// asymptotic growth rounded to an integer (flagged approximate by the
/// second return).
pub fn bd_min(k: u64, n_sites: u64) -> (u64, bool) {
    assert!(k >= 1 && k <= n_sites);
    if 3 * k < n_sites {
        (2 * p_min_exact(k) + 6, true)
    } else {
        let c = k as f64 / n_sites as f64;
        let v = bd_min_asymptotic(c) * (n_sites as f64).sqrt();
        (v.round() as u64, false)
    }
}

/// Coefficient of `sqrt(N)` in the asymptotic minimum boundary length for
/// regions of `c * N` sites.
pub fn bd_min_asymptotic(c: f64) -> f64 {
    assert!(c > 0.0 && c < 1.0);
    if c < 1.0 / 3.0 {
        4.0 * (3.0 * c).sqrt()
    } else if c <= 2.0 / 3.0 {
        4.0
    } else {
        4.0 * (3.0 * (1.0 - c)).sqrt()
    }
}

/// Number of dual edges separating `region` from the rest of the occupied
/// set, counting only edges among occupied sites.
pub fn internal_boundary_contour_length(
    cfg: &Configuration,
    region: &BTreeSet<SiteId>,
) -> Result<u64, ConfigError> {
    for &v in region {
        if !cfg.is_occupied(v) {
            return Err(ConfigError::NotOccupied(v));
        }
    }
    let g = cfg.geometry();
    let mut count = 0u64;
    for e in g.edges() {
        let (t, h) = g.canonical_direction(e);
        if cfg.is_occupied(t) && cfg.is_occupied(h) && (region.contains(&t) != region.contains(&h))
        {
            count += 1;
        }
    }
    Ok(count)
}

/// Complex contours of a configuration: connected components (by shared
/// dual vertex) of the dual edges crossing primal edges whose endpoint spins
/// differ, vacancies counted as spin -1. Each component has minimum dual
/// degree 2.
#[derive(Debug, Clone)]
pub struct Contours {
    /// contour index -> dual edges.
    pub components: Vec<Vec<DualEdgeId>>,
    /// dual vertex -> contour index (or NONE).
    pub vertex_owner: Vec<u32>,
}

pub const NO_CONTOUR: u32 = u32::MAX;

pub fn complex_contours(cfg: &Configuration) -> Contours {
    let g = cfg.geometry();
    let heterogeneous: Vec<DualEdgeId> = g
        .edges()
        .filter(|&e| {
            let (t, h) = g.canonical_direction(e);
            cfg.spin(t) != cfg.spin(h)
        })
        .map(|e| g.dual_edge(e))
        .collect();
    // Union-find over dual vertices restricted to heterogeneous edges.
    let mut parent: Vec<u32> = (0..g.num_dual_vertices()).collect();
    fn find(parent: &mut [u32], mut v: u32) -> u32 {
        while parent[v as usize] != v {
            parent[v as usize] = parent[parent[v as usize] as usize];
            v = parent[v as usize];
        }
        v
    }
    for &d in &heterogeneous {
        let (a, b) = g.dual_endpoints(d);
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra as usize] = rb;
        }
    }
    let mut root_to_idx = std::collections::HashMap::new();
    let mut components: Vec<Vec<DualEdgeId>> = Vec::new();
    let mut vertex_owner = vec![NO_CONTOUR; g.num_dual_vertices() as usize];
    for &d in &heterogeneous {
        let (a, _) = g.dual_endpoints(d);
        let root = find(&mut parent, a);
        let idx = *root_to_idx.entry(root).or_insert_with(|| {
            components.push(Vec::new());
            components.len() - 1
        });
        components[idx].push(d);
    }
    for (idx, edges) in components.iter().enumerate() {
        for &d in edges {
            let (a, b) = g.dual_endpoints(d);
            vertex_owner[a as usize] = idx as u32;
            vertex_owner[b as usize] = idx as u32;
        }
    }
    Contours { components, vertex_owner }
}

/// A delta-bridge system `(B, I, Theta)` for a configuration.
#[derive(Debug, Clone)]
pub struct BridgeSystem {
    pub bridges: BTreeSet<DualEdgeId>,
    pub bridged_contours: BTreeSet<DualEdgeId>,
    /// Region orientation per site; -1 for vacancy-dominated regions.
    pub theta: Vec<i8>,
    pub delta: f64,
}

/// Construct a delta-bridge system for `cfg` by the seam-seeded column
/// sweep: seed `I` with every complex contour touching the wrap edges, then
/// while some minimal bridged region has more than `delta |R|` unbridged
/// sites, sweep a deficient column, adding rightward dual edges from its
/// bridged sites to `B` and absorbing every touched contour wholly into `I`.
/// Sites incident to the wrap edges count as bridge seeds, which both
/// bootstraps contour-free configurations and keeps `B u I u E_wrap`
/// connected.
pub fn construct_bridge_system(cfg: &Configuration, delta: f64) -> BridgeSystem {
    assert!(delta > 0.0 && delta < 1.0);
    let g = cfg.geometry().clone();
    let l = g.side();
    let n_sites = g.num_sites() as usize;

    let contours = complex_contours(cfg);
    let wrap: Vec<DualEdgeId> = g.wrap_edge_set();
    let mut wrap_vertex = vec![false; g.num_dual_vertices() as usize];
    let mut seed_site = vec![false; n_sites];
    for &d in &wrap {
        let (a, b) = g.dual_endpoints(d);
        wrap_vertex[a as usize] = true;
        wrap_vertex[b as usize] = true;
        let e = g.primal_edge(d);
        seed_site[g.edge_tail(e) as usize] = true;
        seed_site[g.edge_head(e) as usize] = true;
    }

    let mut absorbed = vec![false; contours.components.len()];
    // Seed: contours sharing a dual vertex with the wrap set.
    for (idx, edges) in contours.components.iter().enumerate() {
        if edges.iter().any(|&d| {
            let (a, b) = g.dual_endpoints(d);
            wrap_vertex[a as usize] || wrap_vertex[b as usize]
        }) {
            absorbed[idx] = true;
        }
    }

    let mut bridges: BTreeSet<DualEdgeId> = BTreeSet::new();
    // blocked[e] = primal edge crossed by an absorbed contour edge.
    let mut blocked = vec![false; g.num_edges() as usize];
    let mut i_site = vec![false; n_sites];
    let sync_absorbed =
        |absorbed: &[bool], blocked: &mut [bool], i_site: &mut [bool]| {
            for b in blocked.iter_mut() {
                *b = false;
            }
            for s in i_site.iter_mut() {
                *s = false;
            }
            for (idx, edges) in contours.components.iter().enumerate() {
                if absorbed[idx] {
                    for &d in edges {
                        let e = g.primal_edge(d);
                        blocked[e.0 as usize] = true;
                        i_site[g.edge_tail(e) as usize] = true;
                        i_site[g.edge_head(e) as usize] = true;
                    }
                }
            }
        };
    sync_absorbed(&absorbed, &mut blocked, &mut i_site);

    // Bridged sites: monochromatic paths to sites incident to I or E_wrap.
    let compute_bridged = |i_site: &[bool]| -> Vec<bool> {
        let mut bridged = vec![false; n_sites];
        let mut stack: Vec<SiteId> = Vec::new();
        for v in 0..n_sites as u32 {
            if i_site[v as usize] || seed_site[v as usize] {
                bridged[v as usize] = true;
                stack.push(v);
            }
        }
        while let Some(v) = stack.pop() {
            let sv = cfg.spin(v);
            for &w in g.neighbors(v) {
                if !bridged[w as usize] && cfg.spin(w) == sv {
                    bridged[w as usize] = true;
                    stack.push(w);
                }
            }
        }
        bridged
    };

    // Minimal bridged regions: components after deleting primal(I).
    let compute_regions = |blocked: &[bool]| -> Vec<u32> {
        let mut region = vec![u32::MAX; n_sites];
        let mut next = 0u32;
        let mut stack: Vec<SiteId> = Vec::new();
        for start in 0..n_sites as u32 {
            if region[start as usize] != u32::MAX {
                continue;
            }
            region[start as usize] = next;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for dir in 0..6usize {
                    let w = g.neighbor(v, dir);
                    if region[w as usize] != u32::MAX {
                        continue;
                    }
                    let e = if dir < 3 { g.edge(v, dir) } else { g.edge(w, dir - 3) };
                    if !blocked[e.0 as usize] {
                        region[w as usize] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        region
    };

    loop {
        let bridged = compute_bridged(&i_site);
        let region = compute_regions(&blocked);
        let n_regions = region.iter().copied().max().map_or(0, |m| m + 1) as usize;
        let mut size = vec![0u64; n_regions];
        let mut unbridged = vec![0u64; n_regions];
        for v in 0..n_sites {
            size[region[v] as usize] += 1;
            if !bridged[v] {
                unbridged[region[v] as usize] += 1;
            }
        }
        let deficient =
            (0..n_regions).find(|&r| unbridged[r] as f64 > delta * size[r] as f64);
        let r = match deficient {
            None => break,
            Some(r) => r as u32,
        };
        // Deficient column within the region (exists by averaging).
        let mut chosen_x = None;
        for x in 0..l {
            let mut csize = 0u64;
            let mut cunbr = 0u64;
            for y in 0..l {
                let v = y * l + x;
                if region[v as usize] == r {
                    csize += 1;
                    if !bridged[v as usize] {
                        cunbr += 1;
                    }
                }
            }
            if csize > 0 && cunbr as f64 > delta * csize as f64 {
                chosen_x = Some(x);
                break;
            }
        }
        let x = chosen_x.expect("a deficient region has a deficient column");

        // Add rightward dual edges from every bridged site of the column
        // restricted to the region; absorb every contour touching a new edge.
        let mut progressed = false;
        for y in 0..l {
            let v = y * l + x;
            if region[v as usize] != r || !bridged[v as usize] {
                continue;
            }
            for axis in [0usize, 2usize] {
                let e = g.edge(v, axis);
                let d = g.dual_edge(e);
                if blocked[e.0 as usize] || bridges.contains(&d) {
                    continue;
                }
                bridges.insert(d);
                progressed = true;
                let (a, b) = g.dual_endpoints(d);
                for dv in [a, b] {
                    let owner = contours.vertex_owner[dv as usize];
                    if owner != NO_CONTOUR && !absorbed[owner as usize] {
                        absorbed[owner as usize] = true;
                    }
                }
            }
        }
        debug_assert!(progressed, "column sweep must make progress");
        if !progressed {
            break;
        }
        sync_absorbed(&absorbed, &mut blocked, &mut i_site);
    }

    // Final I set; drop B edges that were absorbed into I.
    let mut bridged_contours: BTreeSet<DualEdgeId> = BTreeSet::new();
    for (idx, edges) in contours.components.iter().enumerate() {
        if absorbed[idx] {
            bridged_contours.extend(edges.iter().copied());
        }
    }
    bridges.retain(|d| !bridged_contours.contains(d));

    // Region orientations: the common spin of the region's sites incident
    // to its I boundary; a region with no I boundary spans the seam frame,
    // whose incident sites then share one spin.
    let region = compute_regions(&blocked);
    let n_regions = region.iter().copied().max().map_or(0, |m| m + 1) as usize;
    let mut anchor: Vec<Option<i8>> = vec![None; n_regions];
    for v in 0..n_sites {
        if i_site[v] {
            let r = region[v] as usize;
            let s = cfg.spin(v as u32);
            debug_assert!(anchor[r].is_none() || anchor[r] == Some(s));
            anchor[r] = Some(s);
        }
    }
    let mut fallback: Vec<Option<i8>> = vec![None; n_regions];
    for v in 0..n_sites {
        if seed_site[v] {
            let r = region[v] as usize;
            if fallback[r].is_none() {
                fallback[r] = Some(cfg.spin(v as u32));
            }
        }
    }
    let theta: Vec<i8> = (0..n_sites)
        .map(|v| {
            let r = region[v] as usize;
            anchor[r].or(fallback[r]).expect("every region touches I or the seam")
        })
        .collect();

    BridgeSystem { bridges, bridged_contours, theta, delta }
}

/// Structural report on the aggregation region `R = { v : Theta(v) != -1 }`.
#[derive(Debug, Clone, Serialize)]
pub struct RegionReport {
    pub region_size: u64,
    pub boundary_length: u64,
    pub empty_inside: u64,
    pub particles_outside: u64,
    pub dominant_inside: i8,
    pub dominant_inside_count: u64,
    pub bridge_i_len: u64,
    pub bridge_b_len: u64,
}

/// The bridge-system tolerance used to certify delta-aggregation: the
/// region construction needs a much finer sweep than the target delta, per
/// the derivation eps = 1 - sqrt(1-delta), x = (1-delta)^(-1/4) - 1,
/// alpha' = 1 + x/3, delta' < min(eps, 1 - 1/alpha'^2, rho (1-(1-x/3)^2)).
pub fn derived_bridge_delta(delta: f64, rho: f64) -> f64 {
    assert!(delta > 0.0 && delta < 1.0);
    let eps = 1.0 - (1.0 - delta).sqrt();
    let x = (1.0 - delta).powf(-0.25) - 1.0;
    let alpha_prime = 1.0 + x / 3.0;
    let b1 = eps;
    let b2 = 1.0 - 1.0 / (alpha_prime * alpha_prime);
    let b3 = rho * (1.0 - (1.0 - x / 3.0) * (1.0 - x / 3.0));
    (0.5 * b1.min(b2).min(b3)).max(1e-9)
}

pub fn aggregation_region(cfg: &Configuration, delta: f64) -> (RegionReport, BridgeSystem) {
    let rho = cfg.num_particles() as f64 / cfg.geometry().num_sites() as f64;
    let bs = construct_bridge_system(cfg, derived_bridge_delta(delta, rho.max(1e-6)));
    let g = cfg.geometry();
    let in_region = |v: SiteId| bs.theta[v as usize] != -1;
    let mut region_size = 0u64;
    let mut empty_inside = 0u64;
    let mut particles_outside = 0u64;
    let mut counts = vec![0u64; cfg.q() as usize];
    for v in 0..g.num_sites() {
        if in_region(v) {
            region_size += 1;
            match cfg.orientation(v) {
                None => empty_inside += 1,
                Some(t) => counts[t as usize] += 1,
            }
        } else if cfg.is_occupied(v) {
            particles_outside += 1;
        }
    }
    let mut boundary_length = 0u64;
    for e in g.edges() {
        let (t, h) = g.canonical_direction(e);
        if in_region(t) != in_region(h) {
            boundary_length += 1;
        }
    }
    let (dominant, count) = counts
        .iter()
        .enumerate()
        .max_by_key(|&(i, &c)| (c, std::cmp::Reverse(i)))
        .map(|(i, &c)| (i as i8, c))
        .unwrap_or((-1, 0));
    (
        RegionReport {
            region_size,
            boundary_length,
            empty_inside,
            particles_outside,
            dominant_inside: if count == 0 { -1 } else { dominant },
            dominant_inside_count: count,
            bridge_i_len: bs.bridged_contours.len() as u64,
            bridge_b_len: bs.bridges.len() as u64,
        },
        bs,
    )
}

impl RegionReport {
    /// The aggregation clauses: few empty sites inside, few particles
    /// outside, low boundary length.
    pub fn is_aggregated(&self, cfg: &Configuration, alpha: f64, delta: f64) -> bool {
        let n_sites = cfg.geometry().num_sites() as u64;
        let n = cfg.num_particles() as u64;
        if n == 0 || self.region_size == 0 {
            return false;
        }
        let (bd, _) = bd_min(n, n_sites);
        self.empty_inside as f64 <= delta * self.region_size as f64
            && self.particles_outside as f64 <= delta * (n_sites - self.region_size) as f64
            && self.boundary_length as f64 <= alpha * bd as f64
    }

    /// The aggregation-with-alignment clauses: a dominant orientation fills
    /// the region, few particles outside, low boundary length.
    pub fn is_aggregated_aligned(&self, cfg: &Configuration, alpha: f64, delta: f64) -> bool {
        let n_sites = cfg.geometry().num_sites() as u64;
        let n = cfg.num_particles() as u64;
        if n == 0 || self.region_size == 0 {
            return false;
        }
        let (bd, _) = bd_min(n, n_sites);
        self.dominant_inside_count as f64 >= (1.0 - delta) * self.region_size as f64
            && self.particles_outside as f64 <= delta * (n_sites - self.region_size) as f64
            && self.boundary_length as f64 <= alpha * bd as f64
    }
}
