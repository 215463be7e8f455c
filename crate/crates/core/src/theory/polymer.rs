//! The polymer flow model: encoding orientation differences as consistent
//! edge labelings, anchored enumeration of polymers, and the finite
//! partition-function identity check.
//!
//! A polymer is a labeling of lattice edges by `{0,..,q-1}` whose nonzero
//! support is connected under shared endpoints and whose flow around every
//! closed walk vanishes mod q; on a non-wrapping patch that is equivalent to
//! zero flow around every triangle. In dual terms the support of a
//! consistent labeling meets every triangular face in 0, 2, or 3 edges, so
//! each dual component has minimum degree 2.

use super::TheoryError;
use crate::config::Configuration;
use crate::lattice::{DualEdgeId, EdgeId, LatticeGeometry, SiteId};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

/// A single polymer: its nonzero edge labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolymerLabeling {
    pub labels: BTreeMap<EdgeId, u8>,
}

impl PolymerLabeling {
    pub fn support(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.labels.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Vertices incident to a support edge.
    pub fn vertices(&self, g: &LatticeGeometry) -> BTreeSet<SiteId> {
        let mut out = BTreeSet::new();
        for &e in self.labels.keys() {
            out.insert(g.edge_tail(e));
            out.insert(g.edge_head(e));
        }
        out
    }

    /// log weight: Potts `-|E| ln gamma`; clock
    /// `sum (cos(2 pi l / q) - 1) ln gamma`.
    pub fn log_weight(&self, gamma: f64, q: u8, clock: bool) -> f64 {
        if clock {
            self.labels
                .values()
                .map(|&l| {
                    ((2.0 * std::f64::consts::PI * l as f64 / q as f64).cos() - 1.0) * gamma.ln()
                })
                .sum()
        } else {
            -(self.len() as f64) * gamma.ln()
        }
    }
}

/// A set of pairwise compatible polymers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolymerConfiguration {
    pub polymers: Vec<PolymerLabeling>,
}

/// Encode a configuration whose boundary-walk particles all have
/// orientation 0 into its polymer configuration: each internal edge gets the
/// label `(theta(head) - theta(tail)) mod q` along its canonical direction
/// and the nonzero support splits into polymers by shared endpoints.
pub fn encode_polymers(cfg: &Configuration) -> Result<PolymerConfiguration, TheoryError> {
    if !cfg.is_simply_connected() {
        return Err(TheoryError::NotSimplyConnected);
    }
    let g = cfg.geometry();
    for &v in cfg.particles() {
        let on_boundary = g.neighbors(v).iter().any(|&w| !cfg.is_occupied(w));
        if on_boundary && cfg.orientation(v) != Some(0) {
            return Err(TheoryError::BoundaryNotZero(v));
        }
    }
    let q = cfg.q() as i16;
    let mut labels: BTreeMap<EdgeId, u8> = BTreeMap::new();
    for e in g.edges() {
        let (t, h) = g.canonical_direction(e);
        if let (Some(tt), Some(th)) = (cfg.orientation(t), cfg.orientation(h)) {
            let r = (th as i16 - tt as i16).rem_euclid(q) as u8;
            if r != 0 {
                labels.insert(e, r);
            }
        }
    }
    // Split into components by shared endpoints.
    let mut site_edges: HashMap<SiteId, Vec<EdgeId>> = HashMap::new();
    for &e in labels.keys() {
        site_edges.entry(g.edge_tail(e)).or_default().push(e);
        site_edges.entry(g.edge_head(e)).or_default().push(e);
    }
    let mut seen: HashSet<EdgeId> = HashSet::new();
    let mut polymers = Vec::new();
    for &e0 in labels.keys() {
        if seen.contains(&e0) {
            continue;
        }
        let mut comp = BTreeMap::new();
        let mut stack = vec![e0];
        seen.insert(e0);
        while let Some(e) = stack.pop() {
            comp.insert(e, labels[&e]);
            for v in [g.edge_tail(e), g.edge_head(e)] {
                for &other in &site_edges[&v] {
                    if seen.insert(other) {
                        stack.push(other);
                    }
                }
            }
        }
        polymers.push(PolymerLabeling { labels: comp });
    }
    polymers.sort_by(|a, b| a.labels.keys().next().cmp(&b.labels.keys().next()));
    Ok(PolymerConfiguration { polymers })
}

/// Inverse of [`encode_polymers`]: rebuild orientations on the occupied set
/// of `shape` by integrating the union labeling from the all-zero boundary.
pub fn decode_polymers(
    shape: &Configuration,
    pc: &PolymerConfiguration,
) -> Result<Configuration, TheoryError> {
    if !shape.is_simply_connected() {
        return Err(TheoryError::NotSimplyConnected);
    }
    let g = shape.geometry();
    let q = shape.q() as i16;
    let mut label_of: HashMap<EdgeId, u8> = HashMap::new();
    for p in &pc.polymers {
        for (&e, &l) in &p.labels {
            if label_of.insert(e, l).is_some() {
                return Err(TheoryError::Inconsistent);
            }
        }
    }
    let mut theta: HashMap<SiteId, i16> = HashMap::new();
    // All boundary particles are 0; integrate inward over occupied edges.
    let mut stack: Vec<SiteId> = Vec::new();
    for &v in shape.particles() {
        if g.neighbors(v).iter().any(|&w| !shape.is_occupied(w)) {
            theta.insert(v, 0);
            stack.push(v);
        }
    }
    if stack.is_empty() && shape.num_particles() > 0 {
        // No boundary particle can only happen on a fully packed torus.
        return Err(TheoryError::Budget("occupied set has no boundary".into()));
    }
    while let Some(v) = stack.pop() {
        let tv = theta[&v];
        for (k, &w) in g.neighbors(v).iter().enumerate() {
            if !shape.is_occupied(w) {
                continue;
            }
            let e = if k < 3 { g.edge(v, k) } else { g.edge(w, k - 3) };
            let l = label_of.get(&e).copied().unwrap_or(0) as i16;
            // Label counts along the canonical direction (tail -> head).
            let tw = if g.edge_tail(e) == v { (tv + l).rem_euclid(q) } else { (tv - l).rem_euclid(q) };
            match theta.get(&w) {
                None => {
                    theta.insert(w, tw);
                    stack.push(w);
                }
                Some(&prev) => {
                    if prev != tw {
                        return Err(TheoryError::Inconsistent);
                    }
                }
            }
        }
    }
    let sites: Vec<(SiteId, u8)> = shape
        .particles()
        .iter()
        .map(|&v| (v, *theta.get(&v).unwrap_or(&0) as u8))
        .collect();
    Configuration::new(g.clone(), shape.setting(), shape.q(), &sites)
        .map_err(|_| TheoryError::Inconsistent)
}

/// Enumerate all consistent nonzero labelings of `support` (edges in fixed
/// order), invoking `f` with the label slice for each one. Labels take
/// values in `1..q`; every triangular face must have zero signed flow.
pub fn fold_labelings<F: FnMut(&[u8])>(
    g: &LatticeGeometry,
    q: u8,
    support: &[EdgeId],
    mut f: F,
) {
    let m = support.len();
    if m == 0 {
        f(&[]);
        return;
    }
    let index_of: HashMap<EdgeId, usize> = support.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    // Triangles touching the support, with (edge index, sign) members.
    let mut tri: HashMap<u32, Vec<(usize, i8)>> = HashMap::new();
    for dv in triangles_touching(g, support) {
        let mut members = Vec::new();
        for (e, sign) in g.face_flow_edges(dv) {
            if let Some(&i) = index_of.get(&e) {
                members.push((i, sign));
            }
        }
        if members.len() == 1 {
            // A face with a single nonzero labeled edge cannot balance.
            return;
        }
        if !members.is_empty() {
            tri.insert(dv, members);
        }
    }
    // Order support so each edge (after the first of its dual component)
    // closes a triangle with an earlier edge where possible.
    let order = propagation_order(g, support);
    let triangles: Vec<Vec<(usize, i8)>> = tri.into_values().collect();
    // For each triangle, the position in `order` after which it is complete.
    let pos_in_order: Vec<usize> = {
        let mut pos = vec![0usize; m];
        for (rank, &i) in order.iter().enumerate() {
            pos[i] = rank;
        }
        pos
    };
    let mut tri_by_rank: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (ti, members) in triangles.iter().enumerate() {
        let last = members.iter().map(|&(i, _)| pos_in_order[i]).max().unwrap();
        tri_by_rank[last].push(ti);
    }

    let mut labels = vec![0u8; m];
    fn rec<F: FnMut(&[u8])>(
        rank: usize,
        order: &[usize],
        labels: &mut [u8],
        q: u8,
        triangles: &[Vec<(usize, i8)>],
        tri_by_rank: &[Vec<usize>],
        f: &mut F,
    ) {
        if rank == order.len() {
            f(labels);
            return;
        }
        let i = order[rank];
        for l in 1..q {
            labels[i] = l;
            let ok = tri_by_rank[rank].iter().all(|&ti| {
                let s: i32 = triangles[ti]
                    .iter()
                    .map(|&(j, sign)| sign as i32 * labels[j] as i32)
                    .sum();
                s.rem_euclid(q as i32) == 0
            });
            if ok {
                rec(rank + 1, order, labels, q, triangles, tri_by_rank, f);
            }
        }
        labels[i] = 0;
    }
    rec(0, &order, &mut labels, q, &triangles, &tri_by_rank, &mut f);
}

fn triangles_touching(g: &LatticeGeometry, support: &[EdgeId]) -> BTreeSet<u32> {
    let mut out = BTreeSet::new();
    for &e in support {
        let (a, b) = g.dual_endpoints(g.dual_edge(e));
        out.insert(a);
        out.insert(b);
    }
    out
}

/// Index order over `support` in which consecutive same-dual-component edges
/// share a triangle, so two-edge flow constraints force labels early.
fn propagation_order(g: &LatticeGeometry, support: &[EdgeId]) -> Vec<usize> {
    let m = support.len();
    let dual_of: Vec<DualEdgeId> = support.iter().map(|&e| g.dual_edge(e)).collect();
    let mut vert_to_edges: HashMap<u32, Vec<usize>> = HashMap::new();
    for (i, &d) in dual_of.iter().enumerate() {
        let (a, b) = g.dual_endpoints(d);
        vert_to_edges.entry(a).or_default().push(i);
        vert_to_edges.entry(b).or_default().push(i);
    }
    let mut order = Vec::with_capacity(m);
    let mut seen = vec![false; m];
    for start in 0..m {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        order.push(start);
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            let (a, b) = g.dual_endpoints(dual_of[i]);
            for v in [a, b] {
                for &j in &vert_to_edges[&v] {
                    if !seen[j] {
                        seen[j] = true;
                        order.push(j);
                        queue.push_back(j);
                    }
                }
            }
        }
    }
    order
}

/// Count consistent nonzero labelings of a support.
pub fn count_labelings(g: &LatticeGeometry, q: u8, support: &[EdgeId]) -> u64 {
    let mut count = 0u64;
    fold_labelings(g, q, support, |_| count += 1);
    count
}

/// All connected-dual, minimum-degree-2 subsets of `allowed` dual edges with
/// size in `[min_size, max_size]`, each reported once (rooted at its minimal
/// dual edge).
fn enumerate_contour_sets(
    g: &LatticeGeometry,
    allowed: &BTreeSet<DualEdgeId>,
    min_size: usize,
    max_size: usize,
) -> Vec<BTreeSet<DualEdgeId>> {
    let mut out = Vec::new();
    let all: Vec<DualEdgeId> = allowed.iter().copied().collect();
    for &root in &all {
        enumerate_rooted(g, allowed, root, min_size, max_size, true, &mut out);
    }
    out
}

/// Connected-dual min-degree-2 supersets of `root` within `allowed`, each
/// enumerated exactly once by include/exclude decisions over an ordered
/// candidate frontier. When `root_is_min`, only sets whose minimal dual edge
/// is `root` are visited.
fn enumerate_rooted(
    g: &LatticeGeometry,
    allowed: &BTreeSet<DualEdgeId>,
    root: DualEdgeId,
    min_size: usize,
    max_size: usize,
    root_is_min: bool,
    out: &mut Vec<BTreeSet<DualEdgeId>>,
) {
    let adjacent = |d: DualEdgeId| -> Vec<DualEdgeId> {
        let (a, b) = g.dual_endpoints(d);
        let mut v = Vec::with_capacity(4);
        for dv in [a, b] {
            for cand in g.dual_incident_edges(dv) {
                if cand != d && allowed.contains(&cand) && (!root_is_min || cand > root) {
                    v.push(cand);
                }
            }
        }
        v.sort();
        v.dedup();
        v
    };

    struct Ctx<'a> {
        g: &'a LatticeGeometry,
        min_size: usize,
        max_size: usize,
        out: &'a mut Vec<BTreeSet<DualEdgeId>>,
    }

    fn deficiency(g: &LatticeGeometry, set: &BTreeSet<DualEdgeId>) -> usize {
        let mut deg: HashMap<u32, u32> = HashMap::new();
        for &d in set.iter() {
            let (a, b) = g.dual_endpoints(d);
            *deg.entry(a).or_insert(0) += 1;
            *deg.entry(b).or_insert(0) += 1;
        }
        deg.values().filter(|&&c| c == 1).count()
    }

    fn rec(
        ctx: &mut Ctx,
        set: &mut BTreeSet<DualEdgeId>,
        candidates: &[DualEdgeId],
        excluded: &mut BTreeSet<DualEdgeId>,
        adjacent: &dyn Fn(DualEdgeId) -> Vec<DualEdgeId>,
    ) {
        let d = deficiency(ctx.g, set);
        let budget = ctx.max_size - set.len();
        if d > 2 * budget {
            return;
        }
        // Find the next undecided candidate; when none remain this path's
        // set is final and recorded once.
        let mut rest = candidates;
        let cand = loop {
            match rest.split_last() {
                None => {
                    if set.len() >= ctx.min_size && d == 0 {
                        ctx.out.push(set.clone());
                    }
                    return;
                }
                Some((&c, tail)) => {
                    rest = tail;
                    if !set.contains(&c) && !excluded.contains(&c) {
                        break c;
                    }
                }
            }
        };
        if set.len() < ctx.max_size {
            // Include.
            set.insert(cand);
            let mut next: Vec<DualEdgeId> = rest.to_vec();
            next.extend(
                adjacent(cand)
                    .into_iter()
                    .filter(|d| !set.contains(d) && !excluded.contains(d)),
            );
            rec(ctx, set, &next, excluded, adjacent);
            set.remove(&cand);
        }
        // Exclude.
        excluded.insert(cand);
        rec(ctx, set, rest, excluded, adjacent);
        excluded.remove(&cand);
    }

    let mut set = BTreeSet::from([root]);
    let candidates = adjacent(root);
    let mut excluded = BTreeSet::new();
    let mut ctx = Ctx { g, min_size, max_size, out };
    rec(&mut ctx, &mut set, &candidates, &mut excluded, &adjacent);
}

/// Exact count of polymers with `m` edges whose vertex set contains `v`
/// (valid on a lattice large enough that supports cannot wrap).
pub fn enumerate_polymers(
    g: &LatticeGeometry,
    v: SiteId,
    m: usize,
    q: u8,
) -> Result<u64, TheoryError> {
    if m > 12 {
        return Err(TheoryError::Budget(format!("m={m} exceeds the exhaustive budget 12")));
    }
    if (g.side() as usize) < 2 * m + 3 {
        return Err(TheoryError::Budget(format!(
            "lattice side {} too small for non-wrapping supports of size {m}",
            g.side()
        )));
    }
    if m < 1 {
        return Ok(0);
    }
    // Anchor dual edges: duals of the six edges at v, in increasing order.
    let mut anchors: Vec<DualEdgeId> = (0..6usize)
        .map(|k| {
            let e = if k < 3 { g.edge(v, k) } else { g.edge(g.neighbor(v, k), k - 3) };
            g.dual_edge(e)
        })
        .collect();
    anchors.sort();
    anchors.dedup();

    // Restrict the search to dual edges within reach of v.
    let allowed = ball_dual_edges(g, v, m + 2);

    let mut total = 0u64;
    let mut seen_supports: HashSet<BTreeSet<DualEdgeId>> = HashSet::new();

    // Single-contour supports containing an anchor.
    for (ai, &a) in anchors.iter().enumerate() {
        let mut sets = Vec::new();
        enumerate_rooted(g, &allowed, a, m, m, false, &mut sets);
        for s in sets {
            // Count each support once: `a` must be its smallest anchor.
            if anchors[..ai].iter().any(|p| s.contains(p)) {
                continue;
            }
            if !seen_supports.insert(s.clone()) {
                continue;
            }
            let support: Vec<EdgeId> = s.iter().map(|&d| g.primal_edge(d)).collect();
            total += count_labelings(g, q, &support);
        }
    }

    // Two-component supports: a pair of six-edge stars (the only contours of
    // size 6) at non-adjacent centers whose vertex sets meet.
    if m == 12 {
        let centers = ball_sites(g, v, (m + 2) as i64);
        for (i, &u1) in centers.iter().enumerate() {
            for &u2 in centers.iter().skip(i + 1) {
                if g.neighbors(u1).contains(&u2) {
                    continue;
                }
                let v1: BTreeSet<SiteId> =
                    std::iter::once(u1).chain(g.neighbors(u1).iter().copied()).collect();
                let v2: BTreeSet<SiteId> =
                    std::iter::once(u2).chain(g.neighbors(u2).iter().copied()).collect();
                if v1.intersection(&v2).next().is_none() {
                    continue;
                }
                if !v1.contains(&v) && !v2.contains(&v) {
                    continue;
                }
                let support: Vec<EdgeId> = star_edges(g, u1)
                    .into_iter()
                    .chain(star_edges(g, u2))
                    .collect();
                total += count_labelings(g, q, &support);
            }
        }
    }
    Ok(total)
}

fn star_edges(g: &LatticeGeometry, u: SiteId) -> Vec<EdgeId> {
    (0..6usize)
        .map(|k| if k < 3 { g.edge(u, k) } else { g.edge(g.neighbor(u, k), k - 3) })
        .collect()
}

fn ball_sites(g: &LatticeGeometry, v: SiteId, radius: i64) -> Vec<SiteId> {
    let mut out = Vec::new();
    for dx in -radius..=radius {
        for dy in -radius..=radius {
            out.push(g.offset(v, dx, dy));
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn ball_dual_edges(g: &LatticeGeometry, v: SiteId, radius: usize) -> BTreeSet<DualEdgeId> {
    let r = radius as i64;
    let mut out = BTreeSet::new();
    for &s in &ball_sites(g, v, r) {
        for axis in 0..3 {
            out.insert(g.dual_edge(g.edge(s, axis)));
        }
    }
    out
}

/// Report from the finite partition identity: the particle-weight sum over
/// all interior orientation assignments (boundary fixed to 0) against the
/// polymer partition function.
#[derive(Debug, Clone)]
pub struct IdentityReport {
    pub particle_side: f64,
    pub polymer_side: f64,
    pub rel_err: f64,
    pub pass: bool,
    pub interior_sites: usize,
    pub polymer_supports: usize,
}

/// Check `w(Omega_P^0) = (lambda gamma)^{-|P|} Xi_P` for the boundary given
/// by the occupied set of `shape`. Both sides are computed with the common
/// factor `(lambda gamma)^{-p}` removed; equality is asserted to a relative
/// tolerance of 1e-10.
pub fn polymer_partition_identity_check(
    shape: &Configuration,
    gamma: f64,
    clock: bool,
) -> Result<IdentityReport, TheoryError> {
    if !shape.is_simply_connected() {
        return Err(TheoryError::NotSimplyConnected);
    }
    let g = shape.geometry().clone();
    let q = shape.q();
    let interior: Vec<SiteId> = shape
        .particles()
        .iter()
        .copied()
        .filter(|&v| g.neighbors(v).iter().all(|&w| shape.is_occupied(w)))
        .collect();
    if interior.len() > 12 {
        return Err(TheoryError::Budget(format!(
            "{} interior sites exceeds the enumeration budget 12",
            interior.len()
        )));
    }

    // Particle side: sum over interior assignments of gamma^{-h} (Potts) or
    // the clock product, boundary orientations fixed at zero.
    let mut cfg = shape.clone();
    for &v in shape.particles() {
        cfg.set_orientation(v, 0).unwrap();
    }
    let mut particle_side = 0.0f64;
    let mut assignment = vec![0u8; interior.len()];
    loop {
        for (i, &v) in interior.iter().enumerate() {
            cfg.set_orientation(v, assignment[i]).unwrap();
        }
        let logw = if clock {
            -cfg.clock_distance_sum() * gamma.ln()
        } else {
            -(cfg.count_heterogeneous() as f64) * gamma.ln()
        };
        particle_side += logw.exp();
        // Advance the odometer.
        let mut i = 0;
        loop {
            if i == assignment.len() {
                break;
            }
            assignment[i] += 1;
            if assignment[i] < q {
                break;
            }
            assignment[i] = 0;
            i += 1;
        }
        if i == assignment.len() {
            break;
        }
    }

    // Polymer side: enumerate supports within the region, then sum over
    // compatible families of (support, labeling sum) pairs.
    let internal_duals: BTreeSet<DualEdgeId> = g
        .edges()
        .filter(|&e| {
            let (t, h) = g.canonical_direction(e);
            shape.is_occupied(t) && shape.is_occupied(h)
        })
        .map(|e| g.dual_edge(e))
        .collect();
    if internal_duals.len() > 30 {
        return Err(TheoryError::Budget(format!(
            "{} internal edges exceeds the enumeration budget 30",
            internal_duals.len()
        )));
    }
    let contour_sets = enumerate_contour_sets(&g, &internal_duals, 6, internal_duals.len());
    // Polymer supports: connected (by shared primal vertex) unions of
    // pairwise dual-disjoint contour sets.
    let supports = connected_unions(&g, &contour_sets);
    let mut weighted: Vec<(BTreeSet<SiteId>, f64)> = Vec::new();
    for support_duals in &supports {
        let support: Vec<EdgeId> = support_duals.iter().map(|&d| g.primal_edge(d)).collect();
        let mut wsum = 0.0f64;
        fold_labelings(&g, q, &support, |labels| {
            let logw = if clock {
                labels
                    .iter()
                    .map(|&l| {
                        ((2.0 * std::f64::consts::PI * l as f64 / q as f64).cos() - 1.0)
                            * gamma.ln()
                    })
                    .sum::<f64>()
            } else {
                -(labels.len() as f64) * gamma.ln()
            };
            wsum += logw.exp();
        });
        if wsum > 0.0 {
            let mut verts = BTreeSet::new();
            for &e in &support {
                verts.insert(g.edge_tail(e));
                verts.insert(g.edge_head(e));
            }
            weighted.push((verts, wsum));
        }
    }
    let polymer_side = independent_set_sum(&weighted);

    let rel_err = (particle_side - polymer_side).abs() / particle_side.abs().max(1e-300);
    Ok(IdentityReport {
        particle_side,
        polymer_side,
        rel_err,
        pass: rel_err <= 1e-10,
        interior_sites: interior.len(),
        polymer_supports: weighted.len(),
    })
}

/// Connected-by-shared-vertex unions of pairwise dual-disjoint contour sets.
fn connected_unions(
    g: &LatticeGeometry,
    contours: &[BTreeSet<DualEdgeId>],
) -> Vec<BTreeSet<DualEdgeId>> {
    let verts: Vec<BTreeSet<SiteId>> = contours
        .iter()
        .map(|c| {
            let mut s = BTreeSet::new();
            for &d in c {
                let e = g.primal_edge(d);
                s.insert(g.edge_tail(e));
                s.insert(g.edge_head(e));
            }
            s
        })
        .collect();
    let duals: Vec<BTreeSet<u32>> = contours
        .iter()
        .map(|c| {
            let mut s = BTreeSet::new();
            for &d in c {
                let (a, b) = g.dual_endpoints(d);
                s.insert(a);
                s.insert(b);
            }
            s
        })
        .collect();
    let n = contours.len();
    let mut out: Vec<BTreeSet<DualEdgeId>> = Vec::new();
    // DFS over subsets, grown connected, smallest index first.
    fn extend(
        n: usize,
        chosen: &mut Vec<usize>,
        contours: &[BTreeSet<DualEdgeId>],
        verts: &[BTreeSet<SiteId>],
        duals: &[BTreeSet<u32>],
        out: &mut Vec<BTreeSet<DualEdgeId>>,
    ) {
        let mut union = BTreeSet::new();
        for &i in chosen.iter() {
            union.extend(contours[i].iter().copied());
        }
        out.push(union);
        let &base = chosen.first().unwrap();
        for j in (base + 1)..n {
            if chosen.contains(&j) {
                continue;
            }
            // Dual-disjoint from every chosen component, vertex-connected to
            // at least one.
            let disjoint = chosen.iter().all(|&i| duals[i].intersection(&duals[j]).next().is_none());
            let connected =
                chosen.iter().any(|&i| verts[i].intersection(&verts[j]).next().is_some());
            if disjoint && connected {
                chosen.push(j);
                extend(n, chosen, contours, verts, duals, out);
                chosen.pop();
            }
        }
    }
    for i in 0..n {
        let mut chosen = vec![i];
        extend(n, &mut chosen, contours, &verts, &duals, &mut out);
    }
    out.sort();
    out.dedup();
    out
}

/// Sum over independent sets (pairwise vertex-disjoint supports) of the
/// product of support weights, including the empty family (weight 1).
fn independent_set_sum(weighted: &[(BTreeSet<SiteId>, f64)]) -> f64 {
    fn rec(items: &[(BTreeSet<SiteId>, f64)], start: usize, used: &BTreeSet<SiteId>) -> f64 {
        let mut total = 1.0;
        for i in start..items.len() {
            let (verts, w) = &items[i];
            if verts.intersection(used).next().is_none() {
                let mut next = used.clone();
                next.extend(verts.iter().copied());
                total += w * rec(items, i + 1, &next);
            }
        }
        total
    }
    rec(weighted, 0, &BTreeSet::new())
}
