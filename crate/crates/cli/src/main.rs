//! Command-line workbench for the SOPS simulator: single runs, parameter
//! sweeps, exact-oracle comparisons, verification reports, and SVG
//! rendering.
//!
//! Exit codes: 0 success, 1 validation error, 2 runtime error,
//! 3 acceptance-check failure.

mod config;
mod render;
mod run;
mod sweep;
mod verify;

use clap::{Args, Parser, Subcommand};
use config::{Initial, RunConfig};
use sops_core::config::{Setting, Snapshot};
use sops_core::dynamics::{Chain, ChainParams, Model};
use sops_core::theory::stationary::{exact_stationary, StationaryOracle};
use std::collections::HashMap;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "sops", version, about = "SOPS lattice chain workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a single configured run.
    Run(RunArgs),
    /// Run a seed/parameter sweep and aggregate classifier fractions.
    Sweep(RunArgs),
    /// Compare the chain against the exact stationary distribution.
    Oracle(OracleArgs),
    /// Emit verification reports as JSON.
    Verify(VerifyArgs),
    /// Render a snapshot to SVG.
    Render(RenderArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the run configuration file.
    #[arg(long)]
    config: String,
    /// Scalar overrides.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sample_interval: Option<u64>,
    #[arg(long)]
    l: Option<u32>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    q: Option<u8>,
    /// line | spiral | uniform_random | snapshot:PATH
    #[arg(long)]
    initial: Option<String>,
    #[arg(long)]
    metrics_csv: Option<String>,
    #[arg(long)]
    snapshot_json: Option<String>,
    #[arg(long)]
    render_svg: Option<String>,
    #[arg(long)]
    summary_csv: Option<String>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, value_parser = parse_setting)]
    setting: Setting,
    #[arg(long, value_parser = parse_model, default_value = "potts")]
    model: Model,
    #[arg(long)]
    l: u32,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    q: u8,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Sweeps of the empirical run (one sweep = n activations).
    #[arg(long, default_value_t = 1_000_000)]
    sweeps: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    tv_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    db_tol: f64,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(subcommand)]
    check: VerifyCommand,
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Kotecky-Preiss certificate at one (gamma, q).
    Kp {
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        q: u8,
        #[arg(long, default_value_t = verify::DEFAULT_C)]
        c: f64,
        #[arg(long)]
        clock: bool,
    },
    /// Anchored polymer count nu(m, q) against the printed closed form.
    Nu {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        q: u8,
    },
    /// Closed-form threshold table.
    Thresholds {
        #[arg(long)]
        q: u8,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.9)]
        eta: f64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long, default_value_t = 0.1)]
        rho: f64,
        #[arg(long, default_value_t = 4.0)]
        lambda: f64,
        #[arg(long, default_value_t = 2.0)]
        gamma: f64,
    },
    /// Isoperimetric sandwich for all n up to a bound.
    Isoperimetric {
        #[arg(long, default_value_t = 1_000_000)]
        max_n: u64,
    },
    /// Check a metrics/snapshot pair for a matching config hash.
    Pair {
        #[arg(long)]
        metrics: String,
        #[arg(long)]
        snapshot: String,
    },
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    snapshot: String,
    #[arg(long)]
    out: String,
}

fn parse_setting(s: &str) -> Result<Setting, String> {
    match s {
        "connected" => Ok(Setting::Connected),
        "general" => Ok(Setting::General),
        _ => Err(format!("unknown setting `{s}`")),
    }
}

fn parse_model(s: &str) -> Result<Model, String> {
    match s {
        "potts" => Ok(Model::Potts),
        "clock" => Ok(Model::Clock),
        _ => Err(format!("unknown model `{s}`")),
    }
}

fn load_config(args: &RunArgs) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| format!("config {}: {e}", args.config))?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(v) = args.lambda {
        cfg.lambda = v;
    }
    if let Some(v) = args.gamma {
        cfg.gamma = Some(v);
    }
    if let Some(v) = args.steps {
        cfg.steps = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.sample_interval {
        cfg.sample_interval = v;
    }
    if let Some(v) = args.l {
        cfg.l = v;
    }
    if let Some(v) = args.n {
        cfg.n = v;
    }
    if let Some(v) = args.q {
        cfg.q = v;
    }
    if let Some(v) = &args.initial {
        cfg.initial = match v.as_str() {
            "line" => Initial::Line,
            "spiral" => Initial::Spiral,
            "uniform_random" => Initial::UniformRandom,
            other => match other.strip_prefix("snapshot:") {
                Some(path) => Initial::FromSnapshot(path.to_string()),
                None => return Err(format!("unknown initial `{other}`")),
            },
        };
    }
    if args.metrics_csv.is_some() {
        cfg.outputs.metrics_csv = args.metrics_csv.clone();
    }
    if args.snapshot_json.is_some() {
        cfg.outputs.snapshot_json = args.snapshot_json.clone();
    }
    if args.render_svg.is_some() {
        cfg.outputs.render_svg = args.render_svg.clone();
    }
    if args.summary_csv.is_some() {
        cfg.outputs.summary_csv = args.summary_csv.clone();
    }
    Ok(cfg)
}

fn cmd_run(args: &RunArgs) -> Result<(), (u8, String)> {
    let cfg = load_config(args).map_err(|e| (1, e))?;
    cfg.validate().map_err(|e| (1, e.to_string()))?;
    let artifacts = run::execute(&cfg, cfg.seed).map_err(|e| (2, e))?;
    if let Some(path) = &cfg.outputs.metrics_csv {
        run::write_metrics_csv(path, &cfg, &artifacts.rows).map_err(|e| (2, e))?;
    }
    if let Some(path) = &cfg.outputs.snapshot_json {
        run::write_snapshot(path, &cfg, &artifacts.final_state, cfg.steps, cfg.seed)
            .map_err(|e| (2, e))?;
    }
    if let Some(path) = &cfg.outputs.render_svg {
        let mut snap = Snapshot::from_configuration(
            &artifacts.final_state,
            run::model_name(cfg.model),
            cfg.steps,
            cfg.seed,
        );
        snap.config_hash = Some(cfg.hash());
        std::fs::write(path, render::render_svg(&snap)).map_err(|e| (2, e.to_string()))?;
    }
    eprintln!(
        "run complete: {} steps, {} accepted, config_hash={}",
        cfg.steps,
        artifacts.accepted,
        cfg.hash()
    );
    Ok(())
}

fn cmd_sweep(args: &RunArgs) -> Result<(), (u8, String)> {
    let cfg = load_config(args).map_err(|e| (1, e))?;
    let grid = cfg.sweep.clone().ok_or((1, "config has no [sweep] section".to_string()))?;
    let cells = sweep::run_sweep(&cfg, &grid).map_err(|e| (2, e))?;
    let text = sweep::summary_csv(&cfg, &cells);
    match &cfg.outputs.summary_csv {
        Some(path) => std::fs::write(path, &text).map_err(|e| (2, e.to_string()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_oracle(args: &OracleArgs) -> Result<(), (u8, String)> {
    let params = ChainParams {
        q: args.q,
        lambda: args.lambda,
        gamma: args.gamma,
        model: args.model,
        setting: args.setting,
        seed: args.seed,
    };
    let oracle = exact_stationary(&params, args.l, args.n).map_err(|e| (1, e.to_string()))?;
    let stationarity = oracle.stationarity_deviation();
    let db = oracle.detailed_balance_deviation();
    // Empirical run from the most probable state.
    let mode = (0..oracle.states.len())
        .max_by(|&a, &b| oracle.pi[a].partial_cmp(&oracle.pi[b]).unwrap())
        .unwrap();
    let mut cfg = sops_core::config::Configuration::new(
        oracle.geometry.clone(),
        args.setting,
        args.q,
        &oracle.states[mode],
    )
    .unwrap();
    let mut chain = Chain::new(params).map_err(|e| (1, e.to_string()))?;
    let mut counts: HashMap<_, u64> = HashMap::new();
    for _ in 0..args.sweeps.saturating_mul(args.n as u64) {
        chain.step(&mut cfg);
        *counts.entry(StationaryOracle::state_key(&cfg)).or_insert(0) += 1;
    }
    let tv = oracle.tv_distance(&counts);
    let pass = tv <= args.tv_tol && db <= args.db_tol && stationarity <= 1e-10;
    let report = serde_json::json!({
        "check_name": "oracle_equivalence",
        "inputs": {
            "setting": args.setting, "model": args.model, "l": args.l, "n": args.n,
            "q": args.q, "lambda": args.lambda, "gamma": args.gamma,
            "sweeps": args.sweeps, "seed": args.seed,
        },
        "value": {
            "states": oracle.states.len(),
            "stationarity_deviation": stationarity,
            "detailed_balance_deviation": db,
            "tv_distance": tv,
        },
        "bound": { "tv": args.tv_tol, "db": args.db_tol },
        "pass": pass,
    });
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    if pass {
        Ok(())
    } else {
        Err((3, "oracle comparison failed".into()))
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), (u8, String)> {
    let report = match &args.check {
        VerifyCommand::Kp { gamma, q, c, clock } => verify::kp_report(*gamma, *q, *c, *clock),
        VerifyCommand::Nu { m, q } => verify::nu_report(*m, *q),
        VerifyCommand::Thresholds { q, alpha, eta, eps, delta, rho, lambda, gamma } => {
            verify::thresholds_report(sops_core::theory::thresholds::ThresholdInputs {
                q: *q,
                alpha: *alpha,
                eta: *eta,
                eps: *eps,
                delta: *delta,
                rho: *rho,
                lambda: *lambda,
                gamma: *gamma,
            })
        }
        VerifyCommand::Isoperimetric { max_n } => verify::isoperimetric_report(*max_n),
        VerifyCommand::Pair { metrics, snapshot } => {
            verify::pair_report(metrics, snapshot).map_err(|e| (1, e))?
        }
    };
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    if report.pass {
        Ok(())
    } else {
        Err((3, format!("verification `{}` failed", report.check_name)))
    }
}

fn cmd_render(args: &RenderArgs) -> Result<(), (u8, String)> {
    let text = std::fs::read_to_string(&args.snapshot)
        .map_err(|e| (1, format!("{}: {e}", args.snapshot)))?;
    let snap: Snapshot =
        serde_json::from_str(&text).map_err(|e| (1, format!("{}: {e}", args.snapshot)))?;
    std::fs::write(&args.out, render::render_svg(&snap)).map_err(|e| (2, e.to_string()))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Render(args) => cmd_render(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
