//! Privacy checks: joint-state runs of the protocol variants, a simulator for
//! the client, and comparisons of what the server ends up holding.
//!
//! Server outputs are compared through Choi matrices of the induced channel:
//! equal Choi matrices mean equal channels, so a zero trace distance between
//! the real and simulated runs means the server can learn nothing it could
//! not have produced alone.

mod choi;
mod enumeration;
mod joint;
mod mixedness;
mod protocols;
mod strategy;

use thiserror::Error;

use crate::circuits::Violation;
use crate::engine::EngineError;
use crate::keytrack::KeyError;
use crate::qcore::QcoreError;

pub use choi::{
    choi_of_induced_channel, choi_of_induced_channel_with, client_output_choi, ideal_output_choi,
    BlockState, ChoiMatrix, CHOI_MAX_WIRES,
};
pub use enumeration::{equivalence_circuits, strategy_circuits};
pub use joint::{ClientMemory, Joint, Owner, Sink, WireId, World};
pub use mixedness::{
    audit_ciphertext_mixedness, audit_ciphertext_mixedness_with, deferred_message_view,
    server_view, AuditLevel, MixednessOptions, MixednessReport, EXHAUSTIVE_MAX_INPUT_WIRES,
    EXHAUSTIVE_MAX_POINTS_LOG2, MONTE_CARLO_TOL, VIEW_MAX_QUANTUM_WIRES,
};
pub use protocols::{
    build_simulator, intermediate_r_randomness, run_intermediate_r, run_protocol1, run_protocol2,
    run_protocol3, run_protocol_with, ClientMode, JointOptions, Protocol, ProtocolRun, SimMessage,
    Simulator,
};
pub use strategy::{bundled_strategies, random_unitary, Action, Hook, ServerStrategy, WireRef};

/// Choi and view comparisons must agree to this trace distance.
pub const CHOI_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum SecurityError {
    #[error("invalid circuit: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidCircuit(Vec<Violation>),
    #[error(transparent)]
    Qcore(#[from] QcoreError),
    #[error(transparent)]
    Key(#[from] KeyError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("joint state would need {0} wires")]
    TooManyWires(usize),
    #[error("{wires} wires exceed the cap of {cap}")]
    DimensionCap { wires: usize, cap: usize },
    #[error("exhaustive averaging over {bits} random bits ({input_wires} input wires) is too large; use Monte Carlo")]
    ExhaustiveTooLarge { input_wires: usize, bits: usize },
    #[error("input has {found} wire(s), circuit expects {expected}")]
    InputWidth { expected: usize, found: usize },
    #[error("{0}")]
    BadStrategy(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}
