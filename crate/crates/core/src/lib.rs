//! Linear-optics simulation of photonic entanglement swapping and
//! polarization state transfer across three interferometers.
//!
//! Layers, bottom up: sparse Fock states ([`fock`]), passive elements as mode
//! unitaries ([`elements`]), staged circuits ([`circuit`]), an independent
//! permanent-based evolution ([`oracle`]), the experiment itself
//! ([`protocol`]) and qubit-level analysis ([`analysis`]).

pub mod analysis;
pub mod circuit;
pub mod elements;
pub mod error;
pub mod fock;
pub mod matrix;
pub mod oracle;
pub mod protocol;
pub mod report;
pub mod sampling;
pub mod serde_complex;
pub mod verify;

pub use analysis::{fidelity, fock_fidelity, DensityMatrix, PolarizationQubit, TwoQubitState};
pub use circuit::{Circuit, CircuitDocument};
pub use elements::{ElementSpec, ModeUnitary};
pub use error::{Error, Result};
pub use fock::{FockState, ModeId, ModeRegistry, OccupationVector, Polarization, PostSelectionPattern};
pub use matrix::ComplexMatrix;
pub use num_complex::Complex64;
pub use protocol::{HeraldCase, ProtocolParams, Scope};
pub use report::ProtocolReport;
