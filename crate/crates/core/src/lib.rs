//! Delegated computation on one-time-pad encrypted quantum registers.
//!
//! A client pads its register with random Paulis and hands the ciphertext to
//! a server that runs a public circuit gate by gate. Clifford gates need no
//! interaction: the client rewrites its keys ([`keytrack`]). Each R (π/8)
//! gate costs one aux qubit and one classical bit in each direction
//! ([`engine`]). [`security`] replays the protocol as a joint state with a
//! purifying reference and checks that the server's view is reproduced by a
//! simulator that never sees the input.

pub mod circuits;
pub mod engine;
pub mod identities;
pub mod keytrack;
pub mod par;
pub mod qcore;
pub mod security;
