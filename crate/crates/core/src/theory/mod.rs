//! Combinatorial and exact-verification machinery: the polymer flow
//! encoding, anchored polymer enumeration, the Kotecky-Preiss numeric
//! certificate, closed-form threshold calculators, and brute-force
//! stationary-distribution oracles.

pub mod kp;
pub mod polymer;
pub mod stationary;
pub mod thresholds;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TheoryError {
    #[error("boundary particle at site {0} has nonzero orientation")]
    BoundaryNotZero(u32),
    #[error("configuration is not simply connected")]
    NotSimplyConnected,
    #[error("enumeration budget exceeded: {0}")]
    Budget(String),
    #[error("inconsistent polymer labeling")]
    Inconsistent,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("geometric series tail diverges: gamma too small for the bound")]
    DivergentTail,
}

pub use kp::{kp_condition_check, KpReport};
pub use polymer::{
    decode_polymers, encode_polymers, enumerate_polymers, polymer_partition_identity_check,
    PolymerConfiguration, PolymerLabeling,
};
pub use stationary::{exact_stationary, StationaryOracle};
pub use thresholds::ThresholdTable;
