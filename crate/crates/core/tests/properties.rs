//! Property-based invariants over random configurations and move
//! sequences.

use proptest::prelude::*;
use sops_core::config::{Configuration, Move, Setting};
use sops_core::lattice::LatticeGeometry;
use sops_core::theory::polymer::{decode_polymers, encode_polymers};
use std::sync::Arc;

fn arb_general_config() -> impl Strategy<Value = (Configuration, u64)> {
    (3u8..=5, 2u8..=5, 1usize..=20, any::<u64>()).prop_map(|(lq, q, n, seed)| {
        let l = 6 + lq as u32;
        let g = Arc::new(LatticeGeometry::new(l).unwrap());
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let cfg = Configuration::uniform_random(g, Setting::General, q, n, &mut rng).unwrap();
        (cfg, seed)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Cached boundary statistics stay equal to a full recount under any
    /// sequence of random moves.
    #[test]
    fn incremental_stats_match_recount((mut cfg, seed) in arb_general_config()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xdead);
        let g = cfg.geometry().clone();
        for _ in 0..200 {
            let idx = rng.gen_range(0..cfg.num_particles());
            let from = cfg.particles()[idx];
            let mv = if rng.gen::<bool>() {
                Move::Spatial { from, to: g.neighbor(from, rng.gen_range(0..6)) }
            } else {
                Move::Reorient { site: from, new_theta: rng.gen_range(0..cfg.q()) }
            };
            if let Ok(delta) = cfg.local_delta(&mv) {
                cfg.apply(&mv, &delta);
            }
        }
        prop_assert!(cfg.stats_consistent());
    }

    /// Heterogeneous-edge count and clock distance sum are invariant under
    /// a global cyclic orientation shift.
    #[test]
    fn global_shift_invariance((cfg, _) in arb_general_config(), k in 1u8..5) {
        let q = cfg.q();
        let mut shifted = cfg.clone();
        for &v in cfg.particles() {
            let t = cfg.orientation(v).unwrap();
            shifted.set_orientation(v, (t + k % q) % q).unwrap();
        }
        prop_assert_eq!(cfg.count_heterogeneous(), shifted.count_heterogeneous());
        prop_assert_eq!(cfg.clock_distance_sum(), shifted.clock_distance_sum());
    }

    /// Snapshot serialization round-trips to an identical configuration.
    #[test]
    fn snapshot_round_trip((cfg, _) in arb_general_config()) {
        let snap = sops_core::config::Snapshot::from_configuration(&cfg, "potts", 0, 0);
        let text = serde_json::to_string(&snap).unwrap();
        let back: sops_core::config::Snapshot = serde_json::from_str(&text).unwrap();
        let cfg2 = back.to_configuration().unwrap();
        prop_assert_eq!(cfg.num_particles(), cfg2.num_particles());
        for &v in cfg.particles() {
            prop_assert_eq!(cfg.orientation(v), cfg2.orientation(v));
        }
    }

    /// Encoding a boundary-zero configuration into polymers and decoding it
    /// back is the identity, with the heterogeneous count equal to the
    /// total support size.
    #[test]
    fn polymer_round_trip(thetas in proptest::collection::vec(0u8..3, 7), seed in any::<u64>()) {
        let g = Arc::new(LatticeGeometry::new(13).unwrap());
        let c = g.id_of(sops_core::lattice::Site { x: 6, y: 6 });
        // Hexagon-19 patch with free interior orientations (7 sites).
        let mut sites = vec![];
        for dx in -2i64..=2 {
            for dy in -2i64..=2 {
                let hexdist = if dx * dy >= 0 { dx.abs().max(dy.abs()) } else { dx.abs() + dy.abs() };
                if hexdist <= 2 {
                    sites.push((g.offset(c, dx, dy), 0u8));
                }
            }
        }
        let mut cfg = Configuration::new(g.clone(), Setting::Connected, 3, &sites).unwrap();
        let interior: Vec<u32> = cfg
            .particles()
            .iter()
            .copied()
            .filter(|&v| g.neighbors(v).iter().all(|&w| cfg.is_occupied(w)))
            .collect();
        for (i, &v) in interior.iter().enumerate() {
            cfg.set_orientation(v, thetas[i % thetas.len()]).unwrap();
        }
        let _ = seed;
        let pc = encode_polymers(&cfg).unwrap();
        let back = decode_polymers(&cfg, &pc).unwrap();
        for &v in cfg.particles() {
            prop_assert_eq!(back.orientation(v), cfg.orientation(v));
        }
        let support: usize = pc.polymers.iter().map(|p| p.len()).sum();
        prop_assert_eq!(support as u64, cfg.count_heterogeneous());
    }
}
