//! Framed TCP endpoints for running the delegation client and server as
//! separate processes.
//!
//! Registers travel as serialized amplitudes. That stands in for a quantum
//! channel and says nothing about no-cloning: a real server could not copy
//! what it receives, a socket peer can. Privacy is audited in the joint-state
//! simulator of `qced_core::security`, not here.
//!
//! Wire format: `u32` big-endian length (`1 + payload`), one tag byte, the
//! payload. Tags `0x01..=0x06` are the engine's message kinds. Tag `0x06` is
//! shared by three frames, told apart by payload size:
//!
//! | payload | frame |
//! |---|---|
//! | 40 bytes: SHA-256 of the circuit + seed (`u64` LE) | handshake |
//! | empty | close |
//! | a register | output register |
//!
//! A session is: client hello, server hello, the engine's messages in
//! lockstep, then a close from the client.

mod frame;
mod session;

use std::io;

use qced_core::engine::{EngineError, PayloadError};
use thiserror::Error;

pub use frame::{
    decode, encode, encode_frame, read_frame, write_frame, Frame, Handshake, CLOSE_TAG,
    HANDSHAKE_LEN, MAX_FRAME_LEN,
};
pub use session::{
    connect, connect_with, serve, serve_connection, ClientReport, ServerReport, SessionOptions,
    DEFAULT_TIMEOUT,
};

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("timed out waiting for peer")]
    Timeout,
    #[error("peer closed the connection")]
    PeerClosed,
    #[error("unknown frame tag 0x{0:02x}")]
    UnknownTag(u8),
    #[error("truncated frame: need {need} byte(s), have {have}")]
    Truncated { need: usize, have: usize },
    #[error("frame length {0} is outside 1..={MAX_FRAME_LEN}")]
    BadLength(u32),
    #[error("bad payload: {0}")]
    Payload(#[from] PayloadError),
    #[error("circuit hash mismatch: ours {ours}, peer {theirs}")]
    HashMismatch { ours: String, theirs: String },
    #[error("unexpected frame: {0}")]
    Unexpected(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}
