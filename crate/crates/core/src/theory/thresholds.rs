//! Closed-form thresholds separating the phase regimes, evaluated in log
//! space where exponents can be large.

use super::TheoryError;
use serde::Serialize;

/// Named threshold values with their inputs echoed. Entries whose formula
/// rejects the inputs carry the domain error instead of a value.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdTable {
    pub inputs: ThresholdInputs,
    /// lambda * gamma must exceed this for alpha-compression.
    pub lambda_gamma_compression: Result<f64, String>,
    /// Largest compression ratio alpha for which alignment is provable.
    pub alpha_star: Result<f64, String>,
    /// Alignment needs gamma above this (given eta, q, alpha).
    pub gamma_star: Result<f64, String>,
    /// Exact non-alignment bound on gamma^3 (connected) / lambda^6 (general).
    pub nonalignment_bound_exact: Result<f64, String>,
    /// Quadratic approximation 1 + eps^2 q^2 / (q-1).
    pub nonalignment_bound_approx: f64,
    /// gamma^3 upper bound translated to gamma.
    pub gamma_nonalignment: Result<f64, String>,
    /// lambda^6 upper bound translated to lambda.
    pub lambda_nonalignment: Result<f64, String>,
    /// Expansion constants and the largest beta for which expansion holds.
    pub expansion_c1: f64,
    pub expansion_c2: f64,
    pub beta_expansion_max: Option<f64>,
    /// Aggregation needs lambda above this (general setting).
    pub lambda0_aggregation: Result<f64, String>,
    /// Dispersion needs lambda below this (general setting).
    pub lambda_s_dispersion: Result<f64, String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdInputs {
    pub q: u8,
    pub alpha: f64,
    pub eta: f64,
    pub eps: f64,
    pub delta: f64,
    pub rho: f64,
    pub lambda: f64,
    pub gamma: f64,
}

pub const EXPANSION_C1: f64 = 2.17;

pub fn expansion_c2() -> f64 {
    2.0 + std::f64::consts::SQRT_2
}

/// `7^(alpha / (alpha - 1))`: lambda * gamma above this gives
/// alpha-compression.
pub fn lambda_gamma_compression_threshold(alpha: f64) -> Result<f64, TheoryError> {
    if alpha <= 1.0 {
        return Err(TheoryError::Domain("alpha must exceed 1".into()));
    }
    Ok((alpha / (alpha - 1.0) * 7f64.ln()).exp())
}

/// `min(sqrt(eta) + sqrt(1-eta), sqrt(1/q) + sqrt(1-1/q))` for eta in
/// (1/2, 1).
pub fn alpha_star(eta: f64, q: u8) -> Result<f64, TheoryError> {
    if !(0.5 < eta && eta < 1.0) {
        return Err(TheoryError::Domain(format!("eta must be in (1/2, 1), got {eta}")));
    }
    let qi = 1.0 / q as f64;
    Ok((eta.sqrt() + (1.0 - eta).sqrt()).min(qi.sqrt() + (1.0 - qi).sqrt()))
}

/// `(3^(2 alpha / (a* - alpha)) * 4^(3/4 + (a* - 1) / (2 d* (a* - alpha))))^(q-1)`
/// with `d* = min(1 - eta, 1/q)`, evaluated in log space.
pub fn gamma_star(eta: f64, q: u8, alpha: f64) -> Result<f64, TheoryError> {
    let a_star = alpha_star(eta, q)?;
    if !(1.0 < alpha && alpha < a_star) {
        return Err(TheoryError::Domain(format!(
            "alpha must be in (1, alpha*={a_star}), got {alpha}"
        )));
    }
    let d_star = (1.0 - eta).min(1.0 / q as f64);
    let log = (q as f64 - 1.0)
        * (2.0 * alpha / (a_star - alpha) * 3f64.ln()
            + (0.75 + (a_star - 1.0) / (2.0 * d_star * (a_star - alpha))) * 4f64.ln());
    Ok(log.exp())
}

/// Exact non-alignment bound
/// `(1 - eps q/(q-1))^((q-1)/q - eps) * (1 + eps q)^(1/q + eps)`.
pub fn nonalignment_bound_exact(q: u8, eps: f64) -> Result<f64, TheoryError> {
    let qf = q as f64;
    if !(eps > 0.0 && eps < 1.0 / qf) {
        return Err(TheoryError::Domain(format!("eps must be in (0, 1/q), got {eps}")));
    }
    let a = 1.0 - eps * qf / (qf - 1.0);
    let b = 1.0 + eps * qf;
    let log = ((qf - 1.0) / qf - eps) * a.ln() + ((1.0 / qf) + eps) * b.ln();
    Ok(log.exp())
}

/// Quadratic expansion of the non-alignment bound,
/// `1 + eps^2 q^2 / (2(q-1))`.
pub fn nonalignment_bound_approx(q: u8, eps: f64) -> f64 {
    let qf = q as f64;
    1.0 + eps * eps * qf * qf / (2.0 * (qf - 1.0))
}

/// Largest beta for which expansion holds at `(lambda, gamma)`:
/// `(ln c1 - ln lambda - 5/2 ln gamma) / (ln c2 - ln lambda - ln gamma)`,
/// defined when `lambda gamma^(5/2) < c1`.
pub fn beta_expansion_max(lambda: f64, gamma: f64) -> Option<f64> {
    let num = EXPANSION_C1.ln() - lambda.ln() - 2.5 * gamma.ln();
    let den = expansion_c2().ln() - lambda.ln() - gamma.ln();
    if num <= 0.0 || den <= 0.0 {
        return None;
    }
    Some((num / den).min(1.0))
}

/// `((3(q+1))^(alpha (1+delta)/(2 delta)) * 36^(1/(4 sqrt(3 rho))))^(1/(alpha - 1/sqrt(1-delta)))`
pub fn lambda0_aggregation(q: u8, rho: f64, alpha: f64, delta: f64) -> Result<f64, TheoryError> {
    if !(rho > 0.0 && rho < 1.0 / 3.0) {
        return Err(TheoryError::Domain(format!("rho must be in (0, 1/3), got {rho}")));
    }
    if alpha <= 1.0 {
        return Err(TheoryError::Domain("alpha must exceed 1".into()));
    }
    let dmax = rho.min(1.0 - 1.0 / (alpha * alpha));
    if !(delta > 0.0 && delta < dmax) {
        return Err(TheoryError::Domain(format!(
            "delta must be in (0, min(rho, 1 - 1/alpha^2) = {dmax}), got {delta}"
        )));
    }
    let log_base = alpha * (1.0 + delta) / (2.0 * delta) * (3.0 * (q as f64 + 1.0)).ln()
        + 36f64.ln() / (4.0 * (3.0 * rho).sqrt());
    let denom = alpha - 1.0 / (1.0 - delta).sqrt();
    debug_assert!(denom > 0.0);
    Ok((log_base / denom).exp())
}

/// `((1/rho)^rho / (e/delta)^delta)^(1/(3 rho))`: dispersion holds below
/// this lambda.
pub fn lambda_s_dispersion(rho: f64, delta: f64) -> Result<f64, TheoryError> {
    if !(rho > 0.0 && rho < 1.0 / 3.0) {
        return Err(TheoryError::Domain(format!("rho must be in (0, 1/3), got {rho}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(TheoryError::Domain(format!("delta must be in (0,1), got {delta}")));
    }
    let log = (rho * (1.0 / rho).ln() - delta * (std::f64::consts::E / delta).ln()) / (3.0 * rho);
    Ok(log.exp())
}

/// Evaluate every threshold at one set of inputs; formulas whose domain
/// rejects the inputs report the error in their entry.
pub fn thresholds(inputs: ThresholdInputs) -> ThresholdTable {
    let err = |e: TheoryError| e.to_string();
    let exact = nonalignment_bound_exact(inputs.q, inputs.eps).map_err(err);
    ThresholdTable {
        lambda_gamma_compression: lambda_gamma_compression_threshold(inputs.alpha).map_err(err),
        alpha_star: alpha_star(inputs.eta, inputs.q).map_err(err),
        gamma_star: gamma_star(inputs.eta, inputs.q, inputs.alpha).map_err(err),
        nonalignment_bound_approx: nonalignment_bound_approx(inputs.q, inputs.eps),
        gamma_nonalignment: exact.clone().map(|v| v.powf(1.0 / 3.0)),
        lambda_nonalignment: exact.clone().map(|v| v.powf(1.0 / 6.0)),
        nonalignment_bound_exact: exact,
        expansion_c1: EXPANSION_C1,
        expansion_c2: expansion_c2(),
        beta_expansion_max: beta_expansion_max(inputs.lambda, inputs.gamma),
        lambda0_aggregation: lambda0_aggregation(inputs.q, inputs.rho, inputs.alpha, inputs.delta)
            .map_err(err),
        lambda_s_dispersion: lambda_s_dispersion(inputs.rho, inputs.delta).map_err(err),
        inputs,
    }
}
