//! Delegated evaluation: a client holding Pauli keys and a server holding only
//! ciphertext, talking through typed messages.

mod message;
mod parties;
mod session;

use thiserror::Error;

use crate::circuits::Violation;
use crate::keytrack::KeyError;
use crate::qcore::QcoreError;

pub use message::{
    deserialize_register, serialize_register, Direction, Message, MessageKind, PayloadError,
    Transcript,
};
pub use parties::{
    aux_qubit_state, decrypt_output, r_gate_round, server_apply_clifford, server_measure,
    ClientState, OutcomeRecord, OutcomeSource, ServerState, XRule,
};
pub(crate) use parties::{client_rng, server_rng};
pub use session::{
    check_transcript_structure, run_delegation, run_delegation_branches, run_delegation_with,
    run_session, AuxTiming, ClientEndpoint, DelegationRun, RunOptions, ServerEndpoint,
};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid circuit: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidCircuit(Vec<Violation>),
    #[error(transparent)]
    Qcore(#[from] QcoreError),
    #[error(transparent)]
    Key(#[from] KeyError),
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("{keys} key(s) for a {wires}-wire register")]
    KeyMismatch { keys: usize, wires: usize },
    #[error("scripted outcome has zero probability")]
    ImpossibleBranch,
    #[error("input has {found} wire(s), circuit expects {expected}")]
    InputWidth { expected: usize, found: usize },
    #[error("circuit needs {0} wires plus one for the R gadget, over the simulator limit")]
    TooWide(usize),
}
