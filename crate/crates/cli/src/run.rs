//! Single-run execution: initial-state construction, metric streaming, and
//! snapshot output.

use crate::config::{Initial, RunConfig, ARTIFACT_VERSION};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sops_core::config::{Configuration, Setting, Snapshot};
use sops_core::dynamics::{Chain, ChainParams, Model, RNG_IDENTITY};
use sops_core::lattice::LatticeGeometry;
use sops_core::observables::*;
use std::sync::Arc;

pub fn chain_params(cfg: &RunConfig, seed: u64, lambda: f64, gamma: f64) -> ChainParams {
    ChainParams {
        q: cfg.q,
        lambda,
        gamma,
        model: cfg.model,
        setting: cfg.setting,
        seed,
    }
}

/// Build the initial configuration. Line and spiral starts carry all-zero
/// orientations; the uniform-random start draws sites and orientations from
/// a stream derived from the run seed.
pub fn initial_configuration(cfg: &RunConfig, seed: u64) -> Result<Configuration, String> {
    let geometry =
        Arc::new(LatticeGeometry::new(cfg.l).map_err(|e| format!("lattice: {e}"))?);
    match &cfg.initial {
        Initial::Line => Configuration::line(geometry, cfg.setting, cfg.q, cfg.n)
            .map_err(|e| format!("initial line: {e}")),
        Initial::Spiral => Configuration::spiral(geometry, cfg.setting, cfg.q, cfg.n)
            .map_err(|e| format!("initial spiral: {e}")),
        Initial::UniformRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
            Configuration::uniform_random(geometry, cfg.setting, cfg.q, cfg.n, &mut rng)
                .map_err(|e| format!("initial uniform_random: {e}"))
        }
        Initial::FromSnapshot(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| format!("snapshot {path}: {e}"))?;
            let snap: Snapshot =
                serde_json::from_str(&text).map_err(|e| format!("snapshot {path}: {e}"))?;
            if snap.l != cfg.l || snap.q != cfg.q || snap.particles.len() != cfg.n {
                return Err(format!(
                    "snapshot {path} does not match config (l={}, q={}, n={})",
                    snap.l,
                    snap.q,
                    snap.particles.len()
                ));
            }
            let state =
                snap.to_configuration().map_err(|e| format!("snapshot {path}: {e}"))?;
            if cfg.setting == Setting::Connected && !state.is_simply_connected() {
                return Err(format!(
                    "snapshot {path} is not simply connected; unusable in the connected setting"
                ));
            }
            Ok(state)
        }
    }
}

/// The fixed CSV metric columns, in order. One name contains a comma and
/// is quoted in the emitted header per standard CSV rules; data cells never
/// contain commas.
pub const COLUMNS: [&str; 15] = [
    "step",
    "n",
    "a",
    "h",
    "d_sum",
    "perimeter",
    "rho_p",
    "dominant",
    "aligned(delta)",
    "nonaligned(eps)",
    "compressed(alpha)",
    "expanded(beta)",
    "aggregated(alpha,delta)",
    "bridge_I_len",
    "bridge_B_len",
];

pub fn csv_header() -> String {
    COLUMNS
        .iter()
        .map(|c| if c.contains(',') { format!("\"{c}\"") } else { c.to_string() })
        .collect::<Vec<_>>()
        .join(",")
}

/// One sampled metrics row. Columns that are undefined in the active
/// setting are left empty.
pub fn metrics_row(cfg: &RunConfig, step: u64, state: &Configuration) -> String {
    let rep = alignment_report(state);
    let aligned = is_aligned(state, cfg.classifiers.delta) as u8;
    let nonaligned = is_eps_nonaligned(state, cfg.classifiers.eps) as u8;
    let mut row = format!(
        "{step},{},{},{},{:.6},",
        state.num_particles(),
        state.count_boundary_edges(),
        state.count_heterogeneous(),
        state.clock_distance_sum(),
    );
    match state.setting() {
        Setting::Connected => {
            let p = state.perimeter_unchecked();
            row.push_str(&format!("{p},"));
            row.push_str(&format!("{:.6},{},", rep.rho_p, rep.dominant));
            row.push_str(&format!("{aligned},{nonaligned},"));
            let compressed =
                (p as f64 <= cfg.classifiers.alpha * p_min_exact(state.num_particles() as u64) as f64)
                    as u8;
            let expanded =
                (p as f64 > cfg.classifiers.beta * p_max(state.num_particles() as u64) as f64) as u8;
            row.push_str(&format!("{compressed},{expanded},,,"));
        }
        Setting::General => {
            row.push(',');
            row.push_str(&format!("{:.6},{},", rep.rho_p, rep.dominant));
            row.push_str(&format!("{aligned},{nonaligned},,,"));
            let (report, bs) = aggregation_region(state, cfg.classifiers.delta);
            let agg = report
                .is_aggregated(state, cfg.classifiers.alpha, cfg.classifiers.delta)
                as u8;
            row.push_str(&format!(
                "{agg},{},{}",
                bs.bridged_contours.len(),
                bs.bridges.len()
            ));
        }
    }
    row
}

pub struct RunArtifacts {
    pub final_state: Configuration,
    pub rows: Vec<String>,
    pub accepted: u64,
}

/// Execute the configured run, returning the metric rows (header excluded).
pub fn execute(cfg: &RunConfig, seed: u64) -> Result<RunArtifacts, String> {
    let mut state = initial_configuration(cfg, seed)?;
    let params = chain_params(cfg, seed, cfg.lambda, cfg.gamma_or_default());
    let mut chain = Chain::new(params).map_err(|e| format!("chain: {e}"))?;
    let mut rows = Vec::new();
    chain.run(&mut state, cfg.steps, cfg.sample_interval, |step, s| {
        rows.push(metrics_row(cfg, step, s));
    });
    Ok(RunArtifacts { final_state: state, rows, accepted: chain.accepted() })
}

pub fn write_metrics_csv(
    path: &str,
    cfg: &RunConfig,
    rows: &[String],
) -> Result<(), String> {
    let mut out = String::new();
    out.push_str(&format!(
        "# config_hash={} rng={} version={}\n",
        cfg.hash(),
        RNG_IDENTITY,
        ARTIFACT_VERSION
    ));
    out.push_str(&csv_header());
    out.push('\n');
    for row in rows {
        out.push_str(row);
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| format!("write {path}: {e}"))
}

pub fn model_name(model: Model) -> &'static str {
    match model {
        Model::Potts => "potts",
        Model::Clock => "clock",
    }
}

pub fn write_snapshot(
    path: &str,
    cfg: &RunConfig,
    state: &Configuration,
    step: u64,
    seed: u64,
) -> Result<(), String> {
    let mut snap = Snapshot::from_configuration(state, model_name(cfg.model), step, seed);
    snap.rng = Some(RNG_IDENTITY.to_string());
    snap.config_hash = Some(cfg.hash());
    snap.artifact_version = Some(ARTIFACT_VERSION.to_string());
    let text = serde_json::to_string_pretty(&snap).map_err(|e| e.to_string())?;
    std::fs::write(path, text).map_err(|e| format!("write {path}: {e}"))
}
