//! Brute-force stationary-distribution oracle for tiny instances: exhaustive
//! state enumeration, exact weights, the full one-step transition matrix of
//! the chain, and stationarity / detailed-balance / total-variation checks.

use super::TheoryError;
use crate::config::{Configuration, Setting};
use crate::dynamics::{is_valid_spatial, ChainParams, Model};
use crate::lattice::{LatticeGeometry, SiteId};
use std::collections::HashMap;
use std::sync::Arc;

pub type StateKey = Vec<(SiteId, u8)>;

pub struct StationaryOracle {
    pub params: ChainParams,
    pub geometry: Arc<LatticeGeometry>,
    pub states: Vec<StateKey>,
    pub index: HashMap<StateKey, usize>,
    pub pi: Vec<f64>,
    /// Sparse transition rows including the diagonal self-loop entry.
    pub rows: Vec<Vec<(usize, f64)>>,
}

const STATE_BUDGET: usize = 1_000_000;

/// Enumerate all states (occupancy choices x orientation assignments,
/// restricted to simply connected occupancies in the connected setting),
/// normalize the exact weights, and build the one-step transition matrix.
pub fn exact_stationary(
    params: &ChainParams,
    l: u32,
    n: usize,
) -> Result<StationaryOracle, TheoryError> {
    params.validate().map_err(|e| TheoryError::Domain(e.to_string()))?;
    let geometry = Arc::new(
        LatticeGeometry::new(l).map_err(|e| TheoryError::Domain(e.to_string()))?,
    );
    let n_sites = geometry.num_sites() as usize;
    if n == 0 || n > n_sites {
        return Err(TheoryError::Domain(format!("bad particle count {n}")));
    }

    // Occupancy sets.
    fn next_combination(combo: &mut [usize], n_items: usize) -> bool {
        let k = combo.len();
        let mut i = k;
        while i > 0 {
            i -= 1;
            if combo[i] != i + n_items - k {
                combo[i] += 1;
                for j in i + 1..k {
                    combo[j] = combo[j - 1] + 1;
                }
                return true;
            }
        }
        false
    }
    let mut occupancies: Vec<Vec<SiteId>> = Vec::new();
    let mut combo: Vec<usize> = (0..n).collect();
    loop {
        let sites: Vec<SiteId> = combo.iter().map(|&i| i as SiteId).collect();
        let keep = match params.setting {
            Setting::General => true,
            Setting::Connected => {
                let cfg = Configuration::new(
                    geometry.clone(),
                    Setting::Connected,
                    params.q,
                    &sites.iter().map(|&v| (v, 0)).collect::<Vec<_>>(),
                )
                .unwrap();
                cfg.is_simply_connected()
            }
        };
        if keep {
            occupancies.push(sites);
        }
        if !next_combination(&mut combo, n_sites) {
            break;
        }
    }

    let orient_count =
        (params.q as usize).checked_pow(n as u32).unwrap_or(usize::MAX);
    let total = occupancies.len().saturating_mul(orient_count);
    if total > STATE_BUDGET {
        return Err(TheoryError::Budget(format!(
            "{total} states exceeds the oracle budget {STATE_BUDGET}"
        )));
    }

    // Enumerate states and weights.
    let mut states: Vec<StateKey> = Vec::with_capacity(total);
    let mut logw: Vec<f64> = Vec::with_capacity(total);
    for occ in &occupancies {
        let mut thetas = vec![0u8; n];
        loop {
            let key: StateKey = occ.iter().copied().zip(thetas.iter().copied()).collect();
            let cfg = Configuration::new(geometry.clone(), params.setting, params.q, &key)
                .unwrap();
            logw.push(state_log_weight(&cfg, params));
            states.push(key);
            // Odometer over orientations.
            let mut i = 0;
            loop {
                if i == n {
                    break;
                }
                thetas[i] += 1;
                if thetas[i] < params.q {
                    break;
                }
                thetas[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
    }
    let max_logw = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut pi: Vec<f64> = logw.iter().map(|&w| (w - max_logw).exp()).collect();
    let z: f64 = pi.iter().sum();
    for p in &mut pi {
        *p /= z;
    }
    let index: HashMap<StateKey, usize> =
        states.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();

    // Transition matrix from the proposal kernel, validity, and Metropolis
    // acceptance on exact state weights.
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(states.len());
    for (si, key) in states.iter().enumerate() {
        let cfg =
            Configuration::new(geometry.clone(), params.setting, params.q, key).unwrap();
        let mut row: HashMap<usize, f64> = HashMap::new();
        let mut self_loop = 0.0f64;
        let p_spatial = 1.0 / (12.0 * n as f64);
        let p_reorient = 1.0 / (2.0 * n as f64 * (params.q as f64 - 1.0));
        for (pi_idx, &(site, theta)) in key.iter().enumerate() {
            // Spatial proposals.
            for dir in 0..6usize {
                let to = geometry.neighbor(site, dir);
                let valid = match params.setting {
                    Setting::General => !cfg.is_occupied(to),
                    Setting::Connected => is_valid_spatial(&cfg, site, to).unwrap(),
                };
                if !valid {
                    self_loop += p_spatial;
                    continue;
                }
                let mut target = key.clone();
                target[pi_idx] = (to, theta);
                target.sort_unstable();
                let ti = *index.get(&target).expect("valid move stays in the state space");
                let acc = (logw[ti] - logw[si]).exp().min(1.0);
                *row.entry(ti).or_insert(0.0) += p_spatial * acc;
                self_loop += p_spatial * (1.0 - acc);
            }
            // Reorientation proposals to each of the q-1 other orientations.
            for t in 0..params.q {
                if t == theta {
                    continue;
                }
                let mut target = key.clone();
                target[pi_idx] = (site, t);
                let ti = *index.get(&target).unwrap();
                let acc = (logw[ti] - logw[si]).exp().min(1.0);
                *row.entry(ti).or_insert(0.0) += p_reorient * acc;
                self_loop += p_reorient * (1.0 - acc);
            }
        }
        *row.entry(si).or_insert(0.0) += self_loop;
        let mut row: Vec<(usize, f64)> = row.into_iter().collect();
        row.sort_unstable_by_key(|&(i, _)| i);
        rows.push(row);
    }

    Ok(StationaryOracle { params: *params, geometry, states, index, pi, rows })
}

fn state_log_weight(cfg: &Configuration, params: &ChainParams) -> f64 {
    match (params.setting, params.model) {
        (Setting::Connected, Model::Potts) => {
            -(cfg.perimeter_unchecked() as f64) * (params.lambda * params.gamma).ln()
                - (cfg.count_heterogeneous() as f64) * params.gamma.ln()
        }
        (Setting::Connected, Model::Clock) => {
            -(cfg.perimeter_unchecked() as f64) * (params.lambda * params.gamma).ln()
                - cfg.clock_distance_sum() * params.gamma.ln()
        }
        (Setting::General, Model::Potts) => {
            -((cfg.count_boundary_edges() + cfg.count_heterogeneous()) as f64)
                * params.lambda.ln()
        }
        (Setting::General, Model::Clock) => {
            -(cfg.count_boundary_edges() as f64 + cfg.clock_distance_sum())
                * params.lambda.ln()
        }
    }
}

impl StationaryOracle {
    /// `max_sigma |(pi P)(sigma) - pi(sigma)|` plus row-sum defect, both of
    /// which must vanish for a stochastic matrix with stationary pi.
    pub fn stationarity_deviation(&self) -> f64 {
        let mut pip = vec![0.0f64; self.states.len()];
        let mut worst_row = 0.0f64;
        for (si, row) in self.rows.iter().enumerate() {
            let mut total = 0.0;
            for &(ti, p) in row {
                pip[ti] += self.pi[si] * p;
                total += p;
            }
            worst_row = worst_row.max((total - 1.0).abs());
        }
        let mut dev = 0.0f64;
        for i in 0..pip.len() {
            dev += (pip[i] - self.pi[i]).abs();
        }
        dev.max(worst_row)
    }

    /// Maximum detailed-balance violation over all transition pairs,
    /// relative to the larger flow.
    pub fn detailed_balance_deviation(&self) -> f64 {
        let flow: Vec<HashMap<usize, f64>> = self
            .rows
            .iter()
            .map(|row| row.iter().copied().collect::<HashMap<usize, f64>>())
            .collect();
        let mut worst = 0.0f64;
        for (si, row) in self.rows.iter().enumerate() {
            for &(ti, p) in row {
                if ti == si {
                    continue;
                }
                let fwd = self.pi[si] * p;
                let back = self.pi[ti] * flow[ti].get(&si).copied().unwrap_or(0.0);
                let scale = fwd.abs().max(back.abs()).max(1e-300);
                worst = worst.max((fwd - back).abs() / scale);
            }
        }
        worst
    }

    pub fn state_key(cfg: &Configuration) -> StateKey {
        let mut key: StateKey = cfg
            .particles()
            .iter()
            .map(|&v| (v, cfg.orientation(v).unwrap()))
            .collect();
        key.sort_unstable();
        key
    }

    /// Total-variation distance between pi and an empirical visit histogram.
    pub fn tv_distance(&self, counts: &HashMap<StateKey, u64>) -> f64 {
        let total: u64 = counts.values().sum();
        let mut tv = 0.0f64;
        let mut seen_mass = 0.0f64;
        for (i, key) in self.states.iter().enumerate() {
            let emp = counts.get(key).copied().unwrap_or(0) as f64 / total as f64;
            tv += (self.pi[i] - emp).abs();
            seen_mass += emp;
        }
        // Any visited state outside the enumerated space counts fully.
        tv += 1.0 - seen_mass;
        tv / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn general_single_particle_is_uniform() {
        let params = ChainParams {
            q: 2,
            lambda: 2.0,
            gamma: 1.0,
            model: Model::Potts,
            setting: Setting::General,
            seed: 0,
        };
        let oracle = exact_stationary(&params, 3, 1).unwrap();
        assert_eq!(oracle.states.len(), 18);
        for &p in &oracle.pi {
            assert!((p - 1.0 / 18.0).abs() < 1e-12);
        }
        assert!(oracle.stationarity_deviation() < 1e-12);
    }

    #[test]
    fn general_two_particles_hand_enumeration() {
        // L=3, n=2, q=2, lambda=2: adjacent pairs have a=10 and h in {0,1};
        // non-adjacent pairs have a=12, h=0. 27 edges and 9 non-adjacent
        // pairs, 4 orientation choices each.
        let params = ChainParams {
            q: 2,
            lambda: 2.0,
            gamma: 1.0,
            model: Model::Potts,
            setting: Setting::General,
            seed: 0,
        };
        let oracle = exact_stationary(&params, 3, 2).unwrap();
        assert_eq!(oracle.states.len(), 144);
        let lam: f64 = 2.0;
        let z = 27.0 * 2.0 * lam.powi(-10)
            + 27.0 * 2.0 * lam.powi(-11)
            + 9.0 * 4.0 * lam.powi(-12);
        let g = &oracle.geometry;
        for (i, key) in oracle.states.iter().enumerate() {
            let (a, b) = (key[0], key[1]);
            let adjacent = g.neighbors(a.0).contains(&b.0);
            let expected = if adjacent {
                if a.1 == b.1 {
                    lam.powi(-10) / z
                } else {
                    lam.powi(-11) / z
                }
            } else {
                lam.powi(-12) / z
            };
            assert!((oracle.pi[i] - expected).abs() < 1e-14, "state {key:?}");
        }
    }

    #[test]
    fn stationarity_and_detailed_balance_tiny_instances() {
        for (setting, model, l, n) in [
            (Setting::General, Model::Potts, 3, 2),
            (Setting::General, Model::Clock, 3, 2),
            (Setting::Connected, Model::Potts, 5, 2),
            (Setting::Connected, Model::Clock, 5, 2),
        ] {
            let params = ChainParams {
                q: 2,
                lambda: 1.7,
                gamma: 2.3,
                model,
                setting,
                seed: 0,
            };
            let oracle = exact_stationary(&params, l, n).unwrap();
            assert!(
                oracle.stationarity_deviation() < 1e-12,
                "{setting:?}/{model:?}: {}",
                oracle.stationarity_deviation()
            );
            assert!(
                oracle.detailed_balance_deviation() < 1e-12,
                "{setting:?}/{model:?}"
            );
        }
    }

    #[test]
    fn budget_error() {
        let params = ChainParams {
            q: 4,
            lambda: 2.0,
            gamma: 1.0,
            model: Model::Potts,
            setting: Setting::General,
            seed: 0,
        };
        assert!(matches!(
            exact_stationary(&params, 6, 8),
            Err(TheoryError::Budget(_))
        ));
    }
}
