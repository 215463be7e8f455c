//! Delta-bridge-system construction against the independent definition
//! checker, plus aggregation-region behavior.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sops_core::config::{Configuration, Setting};
use sops_core::lattice::{LatticeGeometry, Site};
use sops_core::observables::{aggregation_region, construct_bridge_system};
use sops_core::oracle::check_bridge_system;
use std::sync::Arc;

fn geom(l: u32) -> Arc<LatticeGeometry> {
    Arc::new(LatticeGeometry::new(l).unwrap())
}

#[test]
fn empty_configuration_gets_trivial_system() {
    let g = geom(8);
    let cfg = Configuration::new(g, Setting::General, 2, &[]).unwrap();
    let bs = construct_bridge_system(&cfg, 0.2);
    assert!(bs.bridges.is_empty());
    assert!(bs.bridged_contours.is_empty());
    assert!(bs.theta.iter().all(|&t| t == -1));
    check_bridge_system(&cfg, &bs).unwrap();
}

#[test]
fn seam_touching_cluster_needs_no_bridges() {
    // A monochromatic cluster crossing the seam: its occupancy contour is
    // wrap-connected, so it seeds I directly and B stays empty.
    let g = geom(10);
    let mut sites = Vec::new();
    for x in 0..4u32 {
        for y in [9u32, 0, 1] {
            sites.push((g.id_of(Site { x, y }), 1u8));
        }
    }
    let cfg = Configuration::new(g.clone(), Setting::General, 3, &sites).unwrap();
    let bs = construct_bridge_system(&cfg, 0.3);
    assert!(bs.bridges.is_empty());
    // I is exactly the cluster's occupancy contour.
    let expected: std::collections::BTreeSet<_> = g
        .edges()
        .filter(|&e| {
            let (t, h) = g.canonical_direction(e);
            cfg.is_occupied(t) != cfg.is_occupied(h)
        })
        .map(|e| g.dual_edge(e))
        .collect();
    assert_eq!(bs.bridged_contours, expected);
    check_bridge_system(&cfg, &bs).unwrap();
}

#[test]
fn single_center_site_is_bridged_on_small_lattice() {
    // L=4, delta=0.05: one unbridged site exceeds delta*N, so the sweep
    // must bridge it.
    let g = geom(4);
    let center = g.id_of(Site { x: 2, y: 2 });
    let cfg = Configuration::new(g.clone(), Setting::General, 2, &[(center, 0)]).unwrap();
    let bs = construct_bridge_system(&cfg, 0.05);
    check_bridge_system(&cfg, &bs).unwrap();
    // The particle's contour was absorbed, making it bridged and giving its
    // singleton region orientation 0.
    assert_eq!(bs.theta[center as usize], 0);
    assert!(!bs.bridged_contours.is_empty());
}

#[test]
fn random_configurations_pass_the_checker() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0u32;
    for &l in &[8u32, 12, 16] {
        let g = geom(l);
        for _ in 0..60 {
            let n_sites = g.num_sites() as usize;
            let n = rng.gen_range(1..=(n_sites / 3).max(1));
            let q = *[2u8, 3, 4].iter().nth(rng.gen_range(0..3)).unwrap();
            let cfg =
                Configuration::uniform_random(g.clone(), Setting::General, q, n, &mut rng)
                    .unwrap();
            for delta in [0.1, 0.2, 0.3] {
                let bs = construct_bridge_system(&cfg, delta);
                if let Err(e) = check_bridge_system(&cfg, &bs) {
                    panic!("L={l} n={n} q={q} delta={delta}: {e}");
                }
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 3 * 60 * 3);
}

#[test]
fn packed_monochromatic_spiral_aggregates() {
    let g = geom(20);
    let n = 40usize;
    let cfg = Configuration::spiral(g.clone(), Setting::General, 2, n).unwrap();
    let (report, bs) = aggregation_region(&cfg, 0.05);
    check_bridge_system(&cfg, &bs).unwrap();
    assert_eq!(report.region_size, n as u64);
    assert_eq!(report.empty_inside, 0);
    assert_eq!(report.particles_outside, 0);
    assert_eq!(report.dominant_inside, 0);
    assert_eq!(report.dominant_inside_count, n as u64);
    assert!(report.is_aggregated(&cfg, 2.0, 0.05));
    assert!(report.is_aggregated_aligned(&cfg, 2.0, 0.05));
}

#[test]
fn scattered_singletons_do_not_aggregate() {
    // Well-separated isolated particles: no low-boundary region exists.
    let g = geom(24);
    let mut sites = Vec::new();
    for i in 0..6u32 {
        for j in 0..6u32 {
            sites.push((g.id_of(Site { x: 4 * i, y: 4 * j }), ((i + j) % 2) as u8));
        }
    }
    let cfg = Configuration::new(g.clone(), Setting::General, 2, &sites).unwrap();
    let (report, bs) = aggregation_region(&cfg, 0.1);
    check_bridge_system(&cfg, &bs).unwrap();
    assert!(!report.is_aggregated(&cfg, 2.0, 0.1));
}

#[test]
fn uniform_all_one_spin_block() {
    // A large block plus isolated far particles at several deltas.
    let g = geom(12);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..40 {
        let mut sites = Vec::new();
        let w = rng.gen_range(2..5u32);
        for x in 0..w {
            for y in 0..w {
                sites.push((g.id_of(Site { x: x + 2, y: y + 2 }), 0u8));
            }
        }
        if rng.gen::<bool>() {
            sites.push((g.id_of(Site { x: 10, y: 10 }), 1u8));
        }
        let cfg = Configuration::new(g.clone(), Setting::General, 2, &sites).unwrap();
        for delta in [0.1, 0.25] {
            let bs = construct_bridge_system(&cfg, delta);
            if let Err(e) = check_bridge_system(&cfg, &bs) {
                panic!("w={w} delta={delta}: {e}");
            }
        }
    }
}
