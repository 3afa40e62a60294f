//! Circuit IR, text format, validation and resource accounting.

mod ir;
mod parse;
mod random;
mod resources;
mod simulate;
mod validate;

pub use ir::{Circuit, GateOp, OpKind};
pub use parse::{parse_circuit, Diagnostic, DiagnosticKind, ParseError};
pub use random::{random_circuit, RandomCircuitSpec};
pub use resources::{resources, ResourceReport};
pub use simulate::{simulate_branches, simulate_sampled, PlainBranch};
pub use validate::{validate, Violation};
