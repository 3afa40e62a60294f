//! Line-oriented circuit text format.
//!
//! ```text
//! # comment
//! qubits <n>
//! X <w> | Z <w> | H <w> | P <w> | R <w>
//! CNOT <control> <target>
//! MEASURE <w>
//! AUX
//! ```
//!
//! Mnemonics are case-insensitive; `#` starts a comment anywhere on a line.

use std::fmt;

use thiserror::Error;

use super::ir::{Circuit, GateOp, OpKind};
use super::validate::{Liveness, Violation};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiagnosticKind {
    MissingHeader,
    DuplicateHeader,
    BadHeader,
    UnknownMnemonic(String),
    WrongArgumentCount {
        mnemonic: &'static str,
        expected: usize,
        found: usize,
    },
    BadWire(String),
    Invalid(Violation),
}

/// A problem on a specific (1-based) line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub kind: DiagnosticKind,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: ", self.line)?;
        match &self.kind {
            DiagnosticKind::MissingHeader => f.write_str("missing `qubits <n>` header"),
            DiagnosticKind::DuplicateHeader => f.write_str("`qubits` header repeated"),
            DiagnosticKind::BadHeader => f.write_str("malformed `qubits <n>` header"),
            DiagnosticKind::UnknownMnemonic(m) => write!(f, "unknown mnemonic `{m}`"),
            DiagnosticKind::WrongArgumentCount {
                mnemonic,
                expected,
                found,
            } => write!(f, "{mnemonic} takes {expected} argument(s), found {found}"),
            DiagnosticKind::BadWire(w) => write!(f, "bad wire index `{w}`"),
            DiagnosticKind::Invalid(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{}", .diagnostics.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
pub struct ParseError {
    pub diagnostics: Vec<Diagnostic>,
}

fn parse_wire(token: &str) -> Result<usize, DiagnosticKind> {
    token
        .parse::<usize>()
        .map_err(|_| DiagnosticKind::BadWire(token.to_string()))
}

/// Parses and validates a circuit, reporting every bad line.
pub fn parse_circuit(text: &str) -> Result<Circuit, ParseError> {
    let mut diagnostics = Vec::new();
    let mut header: Option<usize> = None;
    let mut live: Option<Liveness> = None;
    let mut ops = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let head = tokens[0];
        let args = &tokens[1..];
        let mut report = |kind| diagnostics.push(Diagnostic { line, kind });

        if head.eq_ignore_ascii_case("qubits") {
            if header.is_some() {
                report(DiagnosticKind::DuplicateHeader);
                continue;
            }
            match args {
                [n] => match n.parse::<usize>() {
                    Ok(n) => {
                        header = Some(n);
                        live = Some(Liveness::new(n));
                    }
                    Err(_) => report(DiagnosticKind::BadHeader),
                },
                _ => report(DiagnosticKind::BadHeader),
            }
            continue;
        }

        let Some(kind) = OpKind::from_mnemonic(head) else {
            report(DiagnosticKind::UnknownMnemonic(head.to_string()));
            continue;
        };
        let Some(live) = live.as_mut() else {
            report(DiagnosticKind::MissingHeader);
            continue;
        };
        let expected = match kind {
            OpKind::Aux => 0,
            OpKind::Cnot => 2,
            _ => 1,
        };
        if args.len() != expected {
            report(DiagnosticKind::WrongArgumentCount {
                mnemonic: kind.mnemonic(),
                expected,
                found: args.len(),
            });
            continue;
        }
        let wires: Result<Vec<usize>, _> = args.iter().map(|t| parse_wire(t)).collect();
        let wires = match wires {
            Ok(w) => w,
            Err(k) => {
                report(k);
                continue;
            }
        };
        let op = match kind {
            OpKind::X => GateOp::X(wires[0]),
            OpKind::Z => GateOp::Z(wires[0]),
            OpKind::H => GateOp::H(wires[0]),
            OpKind::P => GateOp::P(wires[0]),
            OpKind::R => GateOp::R(wires[0]),
            OpKind::Measure => GateOp::Measure(wires[0]),
            OpKind::Cnot => GateOp::Cnot {
                control: wires[0],
                target: wires[1],
            },
            OpKind::Aux => GateOp::Aux(live.allocated()),
        };
        match live.step(ops.len(), &op) {
            Ok(()) => ops.push(op),
            Err(v) => report(DiagnosticKind::Invalid(v)),
        }
    }

    match header {
        None if diagnostics.is_empty() => Err(ParseError {
            diagnostics: vec![Diagnostic {
                line: text.lines().count().max(1),
                kind: DiagnosticKind::MissingHeader,
            }],
        }),
        _ if !diagnostics.is_empty() => Err(ParseError { diagnostics }),
        Some(n) => Ok(Circuit::new_unchecked(n, ops)),
        None => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_simple_circuit() {
        let c = parse_circuit("qubits 1\nH 0\nMEASURE 0").unwrap();
        assert_eq!(c.initial_wires(), 1);
        assert_eq!(c.ops(), &[GateOp::H(0), GateOp::Measure(0)]);
    }

    #[test]
    fn counts_r_gates() {
        let c = parse_circuit("qubits 2\nCNOT 0 1\nR 1").unwrap();
        assert_eq!(c.initial_wires(), 2);
        assert_eq!(c.r_gate_count(), 1);
    }

    #[test]
    fn duplicate_cnot_wires_rejected() {
        let err = parse_circuit("qubits 1\nCNOT 0 0").unwrap_err();
        assert_eq!(err.diagnostics.len(), 1);
        assert_eq!(err.diagnostics[0].line, 2);
        assert!(err.to_string().contains("duplicate wires"));
    }

    #[test]
    fn comments_case_and_aux() {
        let text = "# bell pair\nQUBITS 1\naux   # fresh wire\nh 0\ncnot 0 1\n";
        let c = parse_circuit(text).unwrap();
        assert_eq!(
            c.ops(),
            &[
                GateOp::Aux(1),
                GateOp::H(0),
                GateOp::Cnot {
                    control: 0,
                    target: 1
                }
            ]
        );
        assert_eq!(c.final_wires(), 2);
    }

    #[test]
    fn error_cases_name_their_lines() {
        let err = parse_circuit("H 0").unwrap_err();
        assert_eq!(err.diagnostics[0].kind, DiagnosticKind::MissingHeader);
        let err = parse_circuit("").unwrap_err();
        assert_eq!(err.diagnostics[0].kind, DiagnosticKind::MissingHeader);
        let err = parse_circuit("qubits 1\nT 0\nX 4\nMEASURE 0\nX 0").unwrap_err();
        let lines: Vec<usize> = err.diagnostics.iter().map(|d| d.line).collect();
        assert_eq!(lines, vec![2, 3, 5]);
        assert!(err.to_string().contains("line 5: wire 0 already measured"));
        let err = parse_circuit("qubits 1\nX\nCNOT 0 a").unwrap_err();
        assert_eq!(err.diagnostics.len(), 2);
    }

    #[test]
    fn round_trip() {
        let c =
            parse_circuit("qubits 2\nH 0\nAUX\nCNOT 0 2\nR 1\nMEASURE 2\nP 0\nZ 1\nX 0").unwrap();
        assert_eq!(parse_circuit(&c.serialize()).unwrap(), c);
    }
}
