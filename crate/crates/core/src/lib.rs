//! Simulator and analysis workbench for stochastic self-organizing particle
//! systems on the toroidal triangular lattice: connected and general
//! Metropolis chains under Potts and clock weights, phase classifiers,
//! bridge systems, polymer enumeration, and exact small-instance oracles.

pub mod config;
pub mod dynamics;
pub mod lattice;
pub mod observables;
pub mod oracle;
pub mod theory;

pub use config::{Configuration, Move, Setting, Snapshot};
pub use dynamics::{Chain, ChainParams, Model};
pub use lattice::LatticeGeometry;
