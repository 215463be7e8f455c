//! Independent verification oracles used by tests: an explicit boundary-walk
//! perimeter, brute-force shape enumeration, and helpers for exhaustive
//! small-instance checks. These deliberately avoid the incremental data
//! structures they are used to validate.

use crate::config::Configuration;
use crate::lattice::{LatticeGeometry, Site, SiteId};
use std::collections::HashSet;

/// Geometric counterclockwise neighbor order under the standard embedding
/// `(x + y/2, y * sqrt(3)/2)`.
const CCW: [(i64, i64); 6] = [(1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1)];

/// Length of the minimal closed walk over occupied sites enclosing all
/// occupied sites, traced explicitly by contour following. Returns None for
/// empty, disconnected, or holed configurations. Only meaningful for
/// configurations that do not wrap the torus.
pub fn boundary_walk_perimeter(cfg: &Configuration) -> Option<u64> {
    let n = cfg.num_particles();
    if n == 0 || !cfg.is_simply_connected() {
        return None;
    }
    if n == 1 {
        return Some(0);
    }
    let g = cfg.geometry();
    let step = |v: SiteId, dir: usize| -> SiteId {
        let (dx, dy) = CCW[dir];
        g.offset(v, dx, dy)
    };

    // Start at the occupied site with minimal (y, x); its -e1, -e2, -e3
    // neighbors are unoccupied, so the walk below traces the outer boundary.
    let start = *cfg
        .particles()
        .iter()
        .min_by_key(|&&v| {
            let s = g.site_of(v);
            (s.y, s.x)
        })
        .unwrap();

    // Arrive "from below" (virtual incoming direction +e2) and repeatedly
    // take the first occupied neighbor scanning counterclockwise from
    // (incoming + 4) mod 6.
    let first_out = {
        let mut d = (2 + 4) % 6;
        loop {
            if cfg.is_occupied(step(start, d)) {
                break d;
            }
            d = (d + 1) % 6;
        }
    };
    let mut site = step(start, first_out);
    let mut in_dir = first_out;
    let mut len: u64 = 1;
    loop {
        if site == start {
            // Determine the next outgoing direction; if it repeats the very
            // first edge of the walk, the contour is closed.
            let mut d = (in_dir + 4) % 6;
            loop {
                if cfg.is_occupied(step(site, d)) {
                    break;
                }
                d = (d + 1) % 6;
            }
            if d == first_out {
                return Some(len);
            }
            site = step(site, d);
            in_dir = d;
            len += 1;
            continue;
        }
        let mut d = (in_dir + 4) % 6;
        loop {
            if cfg.is_occupied(step(site, d)) {
                break;
            }
            d = (d + 1) % 6;
        }
        site = step(site, d);
        in_dir = d;
        len += 1;
    }
}

/// All connected shapes of `n` sites, normalized by translation (minimal
/// site shifted to the origin), enumerated by brute force on displacement
/// vectors. Suitable for n <= 6.
pub fn enumerate_connected_shapes(n: usize) -> Vec<Vec<(i64, i64)>> {
    assert!(n >= 1 && n <= 6, "exhaustive enumeration budget");
    let mut shapes: HashSet<Vec<(i64, i64)>> = HashSet::new();
    let mut current: Vec<(i64, i64)> = vec![(0, 0)];
    grow(&mut current, n, &mut shapes);
    let mut out: Vec<Vec<(i64, i64)>> = shapes.into_iter().collect();
    out.sort();
    out
}

fn neighbors_of(p: (i64, i64)) -> [(i64, i64); 6] {
    let mut out = [(0, 0); 6];
    for (i, &(dx, dy)) in crate::lattice::NEIGHBOR_OFFSETS.iter().enumerate() {
        out[i] = (p.0 + dx, p.1 + dy);
    }
    out
}

fn normalize(cells: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let minx = cells.iter().map(|c| c.0).min().unwrap();
    let miny = cells.iter().map(|c| c.1).min().unwrap();
    let mut v: Vec<(i64, i64)> = cells.iter().map(|c| (c.0 - minx, c.1 - miny)).collect();
    v.sort();
    v
}

fn grow(current: &mut Vec<(i64, i64)>, n: usize, shapes: &mut HashSet<Vec<(i64, i64)>>) {
    if current.len() == n {
        shapes.insert(normalize(current));
        return;
    }
    let frontier: HashSet<(i64, i64)> = current
        .iter()
        .flat_map(|&c| neighbors_of(c))
        .filter(|p| !current.contains(p))
        .collect();
    for p in frontier {
        current.push(p);
        grow(current, n, shapes);
        current.pop();
    }
}

/// Independent checker for delta-bridge systems: re-derives contours,
/// regions, and bridged sites from scratch and verifies every defining
/// clause. Returns the first violated clause as an error string.
pub fn check_bridge_system(
    cfg: &Configuration,
    bs: &crate::observables::BridgeSystem,
) -> Result<(), String> {
    use crate::lattice::DualEdgeId;
    use std::collections::HashMap;

    let g = cfg.geometry();
    let delta = bs.delta;
    let b = &bs.bridges;
    let i = &bs.bridged_contours;

    // Clause: B and I are disjoint and the bridge budget holds.
    if b.intersection(i).next().is_some() {
        return Err("B and I intersect".into());
    }
    if (b.len() as f64) > (1.0 - delta) / (2.0 * delta) * i.len() as f64 {
        return Err(format!(
            "bridge budget exceeded: |B|={} > (1-d)/(2d) |I| with |I|={}",
            b.len(),
            i.len()
        ));
    }

    // Clause: the subgraph induced by I has no vertex of degree < 2.
    let degree_of = |edges: &dyn Fn(&mut dyn FnMut(DualEdgeId))| -> HashMap<u32, u32> {
        let mut deg = HashMap::new();
        let mut visit = |d: DualEdgeId| {
            let (x, y) = g.dual_endpoints(d);
            *deg.entry(x).or_insert(0) += 1;
            *deg.entry(y).or_insert(0) += 1;
        };
        edges(&mut visit);
        deg
    };
    let i_deg = degree_of(&|f| i.iter().for_each(|&d| f(d)));
    if i_deg.values().any(|&d| d < 2) {
        return Err("I has a dual vertex of degree < 2".into());
    }

    // Clause: B u I u E_wrap is connected with no vertex of degree < 2.
    let wrap = g.wrap_edge_set();
    let mut network: HashSet<DualEdgeId> = wrap.iter().copied().collect();
    network.extend(b.iter().copied());
    network.extend(i.iter().copied());
    let net_deg = degree_of(&|f| network.iter().for_each(|&d| f(d)));
    if net_deg.values().any(|&d| d < 2) {
        return Err("B u I u E_wrap has a dual vertex of degree < 2".into());
    }
    {
        let mut adj: HashMap<u32, Vec<DualEdgeId>> = HashMap::new();
        for &d in &network {
            let (x, y) = g.dual_endpoints(d);
            adj.entry(x).or_default().push(d);
            adj.entry(y).or_default().push(d);
        }
        let mut seen: HashSet<DualEdgeId> = HashSet::new();
        let first = *network.iter().next().unwrap();
        let mut stack = vec![first];
        seen.insert(first);
        while let Some(d) = stack.pop() {
            let (x, y) = g.dual_endpoints(d);
            for v in [x, y] {
                for &other in &adj[&v] {
                    if seen.insert(other) {
                        stack.push(other);
                    }
                }
            }
        }
        if seen.len() != network.len() {
            return Err("B u I u E_wrap is not connected".into());
        }
    }

    // Independent contour decomposition of sigma.
    let het: Vec<DualEdgeId> = g
        .edges()
        .filter(|&e| {
            let (t, h) = g.canonical_direction(e);
            cfg.spin(t) != cfg.spin(h)
        })
        .map(|e| g.dual_edge(e))
        .collect();
    let mut comp_of: HashMap<DualEdgeId, usize> = HashMap::new();
    let mut comps: Vec<Vec<DualEdgeId>> = Vec::new();
    {
        let mut vert_adj: HashMap<u32, Vec<DualEdgeId>> = HashMap::new();
        for &d in &het {
            let (x, y) = g.dual_endpoints(d);
            vert_adj.entry(x).or_default().push(d);
            vert_adj.entry(y).or_default().push(d);
        }
        for &d0 in &het {
            if comp_of.contains_key(&d0) {
                continue;
            }
            let idx = comps.len();
            let mut edges = vec![];
            let mut stack = vec![d0];
            comp_of.insert(d0, idx);
            while let Some(d) = stack.pop() {
                edges.push(d);
                let (x, y) = g.dual_endpoints(d);
                for v in [x, y] {
                    for &other in &vert_adj[&v] {
                        if !comp_of.contains_key(&other) {
                            comp_of.insert(other, idx);
                            stack.push(other);
                        }
                    }
                }
            }
            comps.push(edges);
        }
    }

    // Clause: I is a union of whole contours of sigma, and no other contour
    // shares a dual vertex with the network.
    for &d in i.iter() {
        let idx = match comp_of.get(&d) {
            Some(&idx) => idx,
            None => return Err("I contains a non-heterogeneous dual edge".into()),
        };
        if !comps[idx].iter().all(|e| i.contains(e)) {
            return Err("I contains a partial complex contour".into());
        }
    }
    let net_vertices: HashSet<u32> = network
        .iter()
        .flat_map(|&d| {
            let (x, y) = g.dual_endpoints(d);
            [x, y]
        })
        .collect();
    for (idx, edges) in comps.iter().enumerate() {
        let in_i = i.contains(&edges[0]);
        if in_i {
            continue;
        }
        let touches = edges.iter().any(|&d| {
            let (x, y) = g.dual_endpoints(d);
            net_vertices.contains(&x) || net_vertices.contains(&y)
        });
        if touches {
            return Err(format!("unbridged contour {idx} touches B u I u E_wrap"));
        }
    }

    // Regions: components after deleting the primal edges of I.
    let n_sites = g.num_sites() as usize;
    let i_primal: HashSet<u32> = i.iter().map(|&d| g.primal_edge(d).0).collect();
    let mut region = vec![usize::MAX; n_sites];
    let mut n_regions = 0usize;
    for s in 0..n_sites as u32 {
        if region[s as usize] != usize::MAX {
            continue;
        }
        let mut stack = vec![s];
        region[s as usize] = n_regions;
        while let Some(v) = stack.pop() {
            for dir in 0..6usize {
                let w = g.neighbor(v, dir);
                if region[w as usize] != usize::MAX {
                    continue;
                }
                let e = if dir < 3 { g.edge(v, dir) } else { g.edge(w, dir - 3) };
                if !i_primal.contains(&e.0) {
                    region[w as usize] = n_regions;
                    stack.push(w);
                }
            }
        }
        n_regions += 1;
    }

    // Clause: Theta(u) = Theta(v) iff the dual edge of {u,v} is not in I.
    for e in g.edges() {
        let (t, h) = g.canonical_direction(e);
        let same = bs.theta[t as usize] == bs.theta[h as usize];
        let in_i = i_primal.contains(&e.0);
        if same == in_i {
            return Err(format!(
                "Theta clause violated at edge {:?}: same={same} in_i={in_i}",
                e
            ));
        }
    }

    // Bridged sites: monochromatic path to a site incident to I or E_wrap.
    let mut seedv = vec![false; n_sites];
    for &d in i.iter().chain(wrap.iter()) {
        let e = g.primal_edge(d);
        seedv[g.edge_tail(e) as usize] = true;
        seedv[g.edge_head(e) as usize] = true;
    }
    let mut bridged = vec![false; n_sites];
    let mut stack: Vec<u32> = Vec::new();
    for v in 0..n_sites as u32 {
        if seedv[v as usize] {
            bridged[v as usize] = true;
            stack.push(v);
        }
    }
    while let Some(v) = stack.pop() {
        for &w in g.neighbors(v) {
            if !bridged[w as usize] && cfg.spin(w) == cfg.spin(v) {
                bridged[w as usize] = true;
                stack.push(w);
            }
        }
    }

    // Clause: each region has at most delta |R| unbridged sites, and Theta
    // equals the spin of some bridged site of the region.
    let mut size = vec![0u64; n_regions];
    let mut unbridged = vec![0u64; n_regions];
    let mut theta_ok = vec![false; n_regions];
    let mut theta_val = vec![None::<i8>; n_regions];
    for v in 0..n_sites {
        let r = region[v];
        size[r] += 1;
        if !bridged[v] {
            unbridged[r] += 1;
        }
        match theta_val[r] {
            None => theta_val[r] = Some(bs.theta[v]),
            Some(t) => {
                if t != bs.theta[v] {
                    return Err(format!("Theta not constant on region {r}"));
                }
            }
        }
        if bridged[v] && cfg.spin(v as u32) == bs.theta[v] {
            theta_ok[r] = true;
        }
    }
    for r in 0..n_regions {
        if unbridged[r] as f64 > delta * size[r] as f64 {
            return Err(format!(
                "region {r}: {} unbridged of {} exceeds delta={delta}",
                unbridged[r], size[r]
            ));
        }
        if !theta_ok[r] {
            return Err(format!("region {r}: Theta does not match any bridged site"));
        }
    }
    Ok(())
}

/// Place a translation-normalized shape on the lattice near its center,
/// returning site ids.
pub fn place_shape(g: &LatticeGeometry, shape: &[(i64, i64)]) -> Vec<SiteId> {
    let cx = (g.side() / 2) as i64;
    let cy = (g.side() / 2) as i64;
    shape
        .iter()
        .map(|&(dx, dy)| {
            let x = (cx + dx).rem_euclid(g.side() as i64) as u32;
            let y = (cy + dy).rem_euclid(g.side() as i64) as u32;
            g.id_of(Site { x, y })
        })
        .collect()
}
