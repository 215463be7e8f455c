//! The `verify` subcommand: JSON reports for the Kotecky-Preiss
//! certificate, anchored polymer counts, threshold tables, the
//! isoperimetric sandwich, and metric/snapshot pairing.

use serde::Serialize;
use serde_json::json;
use sops_core::lattice::{LatticeGeometry, Site};
use sops_core::observables::p_min_exact;
use sops_core::theory::kp::{kp_condition_check, kp_condition_check_clock, KP_DEFAULT_C};
use sops_core::theory::polymer::enumerate_polymers;
use sops_core::theory::thresholds::{thresholds, ThresholdInputs};
use std::sync::Arc;

#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub check_name: String,
    pub inputs: serde_json::Value,
    pub value: serde_json::Value,
    pub bound: serde_json::Value,
    pub pass: bool,
}

pub fn kp_report(gamma: f64, q: u8, c: f64, clock: bool) -> CheckReport {
    let result = if clock {
        kp_condition_check_clock(gamma, q, c)
    } else {
        kp_condition_check(gamma, q, c)
    };
    match result {
        Ok(rep) => CheckReport {
            check_name: if clock { "kp_clock" } else { "kp_potts" }.into(),
            inputs: json!({"gamma": gamma, "q": q, "c": c}),
            value: json!({
                "residual": rep.residual,
                "finite_sum": rep.finite_sum,
                "tail": rep.tail,
                "tail_convergent": rep.tail_convergent,
                "gamma_effective": rep.gamma_effective,
            }),
            bound: json!(c),
            pass: rep.holds,
        },
        Err(e) => CheckReport {
            check_name: "kp".into(),
            inputs: json!({"gamma": gamma, "q": q, "c": c}),
            value: json!(e.to_string()),
            bound: json!(c),
            pass: false,
        },
    }
}

/// Closed-form anchored counts as printed; enumeration is the authority.
pub fn nu_printed(m: usize, q: u64) -> u64 {
    sops_core::theory::kp::nu_closed_form(m, q)
}

pub fn nu_report(m: usize, q: u8) -> CheckReport {
    let side = (2 * m + 5).max(15) as u32;
    let g = Arc::new(LatticeGeometry::new(side).unwrap());
    let v = g.id_of(Site { x: side / 2, y: side / 2 });
    match enumerate_polymers(&g, v, m, q) {
        Ok(count) => {
            let printed = nu_printed(m, q as u64);
            CheckReport {
                check_name: "nu_enumeration".into(),
                inputs: json!({"m": m, "q": q}),
                value: json!(count),
                bound: json!(printed),
                pass: count == printed,
            }
        }
        Err(e) => CheckReport {
            check_name: "nu_enumeration".into(),
            inputs: json!({"m": m, "q": q}),
            value: json!(e.to_string()),
            bound: json!(null),
            pass: false,
        },
    }
}

pub fn thresholds_report(inputs: ThresholdInputs) -> CheckReport {
    let table = thresholds(inputs);
    let ok = table.lambda_gamma_compression.is_ok() && table.alpha_star.is_ok();
    CheckReport {
        check_name: "thresholds".into(),
        inputs: serde_json::to_value(&table.inputs).unwrap(),
        value: serde_json::to_value(&table).unwrap(),
        bound: json!(null),
        pass: ok,
    }
}

pub fn isoperimetric_report(max_n: u64) -> CheckReport {
    let mut worst: Option<u64> = None;
    for n in 1..=max_n {
        let p = p_min_exact(n) as f64;
        let lower = 2.0 * 3f64.sqrt() * ((n as f64) - 0.25).sqrt() - 3.0;
        let upper = 2.0 * 3f64.sqrt() * (n as f64).sqrt();
        if !(lower <= p && p <= upper) {
            worst = Some(n);
            break;
        }
    }
    CheckReport {
        check_name: "isoperimetric_sandwich".into(),
        inputs: json!({"max_n": max_n}),
        value: json!(worst),
        bound: json!("2 sqrt(3) sqrt(n - 1/4) - 3 <= p_min(n) <= 2 sqrt(3) sqrt(n)"),
        pass: worst.is_none(),
    }
}

fn embedded_hash(text: &str) -> Option<String> {
    // CSV comment line or snapshot JSON field.
    if let Some(rest) = text.strip_prefix("# ") {
        let first_line = rest.lines().next()?;
        for token in first_line.split_whitespace() {
            if let Some(h) = token.strip_prefix("config_hash=") {
                return Some(h.to_string());
            }
        }
    }
    let parsed: serde_json::Value = serde_json::from_str(text).ok()?;
    parsed.get("config_hash")?.as_str().map(String::from)
}

/// Reject metric/snapshot pairs whose embedded config hashes disagree.
pub fn pair_report(metrics_path: &str, snapshot_path: &str) -> Result<CheckReport, String> {
    let metrics =
        std::fs::read_to_string(metrics_path).map_err(|e| format!("{metrics_path}: {e}"))?;
    let snapshot =
        std::fs::read_to_string(snapshot_path).map_err(|e| format!("{snapshot_path}: {e}"))?;
    let mh = embedded_hash(&metrics).ok_or("metrics file has no embedded config hash")?;
    let sh = embedded_hash(&snapshot).ok_or("snapshot file has no embedded config hash")?;
    Ok(CheckReport {
        check_name: "pair_config_hash".into(),
        inputs: json!({"metrics": metrics_path, "snapshot": snapshot_path}),
        value: json!({"metrics_hash": mh, "snapshot_hash": sh}),
        bound: json!("equal"),
        pass: mh == sh,
    })
}

pub const DEFAULT_C: f64 = KP_DEFAULT_C;
