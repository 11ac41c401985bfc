//! Measurement-free quantum error correction on stabilizer circuits.
//!
//! The crate builds two-cycle correction circuits for the three-qubit
//! bit-flip code and the distance-three surface code, simulates them on a
//! bit-packed stabilizer tableau with classically controlled Toffoli/CCZ
//! gates, injects circuit-level Pauli noise, and estimates logical error
//! rates and thresholds from time-to-failure Monte Carlo with skip sampling.

pub mod builders;
pub mod circuit;
pub mod code;
pub mod montecarlo;
pub mod noise;
pub mod pauli;
pub mod stats;
pub mod tableau;
pub mod threshold;

pub use builders::{build_bf_circuit, build_circuit, build_surface17_circuit, build_unencoded_circuit, CodeKind};
pub use circuit::{Circuit, CycleSelector, ErrorSite, GateKind, Instruction, Role, SiteKind, TimeStep, Variant};
pub use code::{correction_targets, CodeSpec};
pub use montecarlo::{Classification, Experiment, TrialConfig, TrialResult};
pub use pauli::{Pauli, PauliOperator, Sign};
pub use tableau::{Expectation, Tableau, TableauError};
pub use threshold::{find_threshold_crossing, sweep_physical_error_rates, SweepPoint, ThresholdEstimate};
