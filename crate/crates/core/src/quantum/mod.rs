//! Dense state-vector simulation for registers of up to five qubits.

mod branch;
mod density;
mod measure;
mod state;

use thiserror::Error;

pub use branch::{branch_distribution, enumerate_branches, Branch, PlanStep};
pub use density::{reduced_density, DensityMatrix2};
pub use measure::{measure_bell, measure_computational, BellOutcome, MeasurementRecord, Outcome};
pub use state::{apply_cnot, apply_cnot_ancilla, apply_sigma_x, make_ghz, Amplitude, StateVector};

/// Three protocol qubits, one eavesdropper ancilla and one spare.
pub const MAX_QUBITS: usize = 5;

/// Absolute tolerance for normalization, Hermiticity and trace checks.
pub const TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("qubit {qubit} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("qubit {0} used twice in a two-qubit operation")]
    SameQubit(usize),
    #[error("register of {0} qubits exceeds the {MAX_QUBITS}-qubit cap")]
    RegisterTooLarge(usize),
    #[error("invalid amplitude vector length {0}")]
    InvalidLength(usize),
    #[error("state norm {0} is not 1")]
    NotNormalized(f64),
    #[error("non-finite amplitude")]
    NonFinite,
    #[error("invalid ket label {0:?}")]
    InvalidKet(String),
    #[error("random draw {0} outside [0, 1)")]
    InvalidDraw(f64),
    #[error("invalid measurement plan: {0}")]
    InvalidPlan(String),
}
