//! Parameter sweeps: replicas run concurrently with independent seeds and
//! no shared mutable state; aggregation is a deterministic fold over
//! replica results sorted by cell and seed.

use crate::config::{RunConfig, SweepGrid};
use crate::run;
use rayon::prelude::*;
use sops_core::config::Setting;

/// Classifier votes from one replica's final window (last 10% of samples,
/// majority vote per classifier).
#[derive(Debug, Clone, Copy, Default)]
pub struct ReplicaVotes {
    pub aligned: bool,
    pub nonaligned: bool,
    pub compressed: bool,
    pub expanded: bool,
    pub aggregated: bool,
}

#[derive(Debug, Clone)]
pub struct CellSummary {
    pub lambda: f64,
    pub gamma: Option<f64>,
    pub replicas: usize,
    pub frac_aligned: f64,
    pub frac_nonaligned: f64,
    pub frac_compressed: f64,
    pub frac_expanded: f64,
    pub frac_aggregated: f64,
}

fn column(header_field: &str) -> usize {
    run::COLUMNS.iter().position(|&c| c == header_field).expect("column exists")
}

/// Majority vote over the final 10% of sampled rows for one 0/1 column.
fn window_vote(rows: &[String], col: usize) -> bool {
    let start = rows.len() - (rows.len() / 10).max(1);
    let window = &rows[start..];
    let ones = window
        .iter()
        .filter(|r| r.split(',').nth(col).map_or(false, |v| v == "1"))
        .count();
    2 * ones > window.len()
}

pub fn replica_votes(rows: &[String]) -> ReplicaVotes {
    ReplicaVotes {
        aligned: window_vote(rows, column("aligned(delta)")),
        nonaligned: window_vote(rows, column("nonaligned(eps)")),
        compressed: window_vote(rows, column("compressed(alpha)")),
        expanded: window_vote(rows, column("expanded(beta)")),
        aggregated: window_vote(rows, column("aggregated(alpha,delta)")),
    }
}

/// Run the sweep grid; cells are the cross product of lambdas and gammas
/// (the base values when a list is empty), each with every seed.
pub fn run_sweep(cfg: &RunConfig, grid: &SweepGrid) -> Result<Vec<CellSummary>, String> {
    let lambdas = if grid.lambdas.is_empty() { vec![cfg.lambda] } else { grid.lambdas.clone() };
    let gammas: Vec<Option<f64>> = match cfg.setting {
        Setting::General => vec![None],
        Setting::Connected => {
            if grid.gammas.is_empty() {
                vec![cfg.gamma]
            } else {
                grid.gammas.iter().copied().map(Some).collect()
            }
        }
    };
    if grid.seeds.is_empty() {
        return Err("sweep.seeds must be nonempty".into());
    }

    let mut jobs = Vec::new();
    for &lambda in &lambdas {
        for &gamma in &gammas {
            for &seed in &grid.seeds {
                jobs.push((lambda, gamma, seed));
            }
        }
    }
    let results: Vec<Result<((u64, u64, u64), ReplicaVotes), String>> = jobs
        .par_iter()
        .map(|&(lambda, gamma, seed)| {
            let mut sub = cfg.clone();
            sub.lambda = lambda;
            sub.gamma = gamma;
            sub.seed = seed;
            sub.validate().map_err(|e| e.to_string())?;
            let artifacts = run::execute(&sub, seed)?;
            Ok(((lambda.to_bits(), gamma.map_or(0, f64::to_bits), seed), replica_votes(&artifacts.rows)))
        })
        .collect();

    let mut failures: Vec<String> = Vec::new();
    let mut votes: Vec<((u64, u64, u64), ReplicaVotes)> = Vec::new();
    for r in results {
        match r {
            Ok(v) => votes.push(v),
            Err(e) => failures.push(e),
        }
    }
    if !failures.is_empty() {
        return Err(format!(
            "{} of {} replicas failed; first: {}",
            failures.len(),
            jobs.len(),
            failures[0]
        ));
    }
    // Deterministic merge independent of execution order.
    votes.sort_by_key(|&(k, _)| k);

    let mut cells = Vec::new();
    for &lambda in &lambdas {
        for &gamma in &gammas {
            let key = (lambda.to_bits(), gamma.map_or(0, f64::to_bits));
            let cell: Vec<&ReplicaVotes> = votes
                .iter()
                .filter(|&&((l, g, _), _)| (l, g) == key)
                .map(|(_, v)| v)
                .collect();
            let frac = |f: fn(&ReplicaVotes) -> bool| {
                cell.iter().filter(|v| f(v)).count() as f64 / cell.len() as f64
            };
            cells.push(CellSummary {
                lambda,
                gamma,
                replicas: cell.len(),
                frac_aligned: frac(|v| v.aligned),
                frac_nonaligned: frac(|v| v.nonaligned),
                frac_compressed: frac(|v| v.compressed),
                frac_expanded: frac(|v| v.expanded),
                frac_aggregated: frac(|v| v.aggregated),
            });
        }
    }
    Ok(cells)
}

pub fn summary_csv(cfg: &RunConfig, cells: &[CellSummary]) -> String {
    let mut out = format!(
        "# config_hash={} rng={} version={}\n",
        cfg.hash(),
        sops_core::dynamics::RNG_IDENTITY,
        crate::config::ARTIFACT_VERSION
    );
    out.push_str(
        "lambda,gamma,replicas,frac_aligned,frac_nonaligned,frac_compressed,frac_expanded,frac_aggregated\n",
    );
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{:.3},{:.3},{:.3},{:.3},{:.3}\n",
            c.lambda,
            c.gamma.map_or(String::new(), |g| g.to_string()),
            c.replicas,
            c.frac_aligned,
            c.frac_nonaligned,
            c.frac_compressed,
            c.frac_expanded,
            c.frac_aggregated
        ));
    }
    out
}
