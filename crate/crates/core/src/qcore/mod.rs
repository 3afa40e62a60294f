//! Dense complex linear algebra and small-system quantum simulation.
//!
//! Everything here is a pure function of its inputs. States are compared up
//! to global phase (via fidelity) unless stated otherwise.

mod density;
mod gates;
mod matrix;
mod measure;
mod pad;
mod state;

use thiserror::Error;

pub use density::{trace_distance, DensityMatrix};
pub use gates::{p_power, pauli, standard_gate, Gate, GateMatrix};
pub use matrix::{Matrix, C64};
pub use measure::{
    measure_branches, measure_sample, measure_wire, MeasureBranch, MeasureMode, MeasureResult,
    IMPOSSIBLE,
};
pub use pad::{average_over_keys, average_over_keys_with, qotp_decrypt, qotp_encrypt};
pub use state::{apply_gate, fidelity_up_to_global_phase, StateVector};

/// Tolerance for exact algebraic identities.
pub const ALGEBRAIC_TOL: f64 = 1e-12;
/// Tolerance for averaged or eigenvalue-derived quantities.
pub const AGGREGATE_TOL: f64 = 1e-10;
/// Normalisation slack accepted on construction.
pub const NORM_TOL: f64 = 1e-9;
/// Largest register simulated densely.
pub const MAX_WIRES: usize = 14;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum QcoreError {
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("gate of arity {arity} applied to {wires} wire(s)")]
    ArityMismatch { arity: usize, wires: usize },
    #[error("wire {wire} out of range for {num_wires} wire(s)")]
    WireOutOfRange { wire: usize, num_wires: usize },
    #[error("wire {0} listed twice")]
    DuplicateWire(usize),
    #[error("{0} wires exceeds the dense simulation cap of {MAX_WIRES}")]
    TooManyWires(usize),
    #[error("state not normalised (squared norm {0})")]
    NotNormalized(f64),
    #[error("matrix is not unitary")]
    NotUnitary,
    #[error("matrix is not Hermitian")]
    NotHermitian,
    #[error("matrix has negative eigenvalue {0}")]
    NotPositive(f64),
    #[error("{keys} key(s) for {wires} wire(s)")]
    KeyCountMismatch { keys: usize, wires: usize },
    #[error("wire subset must be non-empty")]
    EmptySubset,
    #[error("bad bit string `{0}`")]
    BadBitString(String),
}
