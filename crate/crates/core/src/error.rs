use thiserror::Error;

use crate::channel::Party;
use crate::quantum::QuantumError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("expected {expected} items, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("expected a {expected}-qubit register, found {found} qubits")]
    RegisterSize { expected: usize, found: usize },
    #[error("qubit at position {position} is held by {holder:?}, not {actor:?}")]
    NotHolder {
        position: usize,
        holder: Party,
        actor: Party,
    },
    #[error("transcript carries no decoded key")]
    MissingAliceKey,
    #[error("unknown attack strategy {0:?} (expected none, intercept-ab, intercept-ba or entangle-cnot)")]
    UnknownAttack(String),
    #[error("unknown oracle scenario {0:?}")]
    UnknownScenario(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
