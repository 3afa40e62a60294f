//! The fixed circuit family the protocol-equivalence sweep runs over: every
//! one- and two-qubit circuit below, each with at most two R gates.

use crate::circuits::{parse_circuit, Circuit};

fn one_qubit() -> Vec<String> {
    let gates = ["H", "P", "R"];
    let mut out = vec![String::new()];
    let mut layer = vec![Vec::<&str>::new()];
    for _ in 0..3 {
        let mut next = Vec::new();
        for seq in &layer {
            for g in gates {
                let mut s = seq.clone();
                s.push(g);
                next.push(s);
            }
        }
        for seq in &next {
            if seq.iter().filter(|g| **g == "R").count() <= 2 {
                out.push(seq.iter().map(|g| format!("{g} 0\n")).collect());
            }
        }
        layer = next;
    }
    out.push("R 0\nMEASURE 0\n".into());
    out.push("H 0\nR 0\nH 0\nMEASURE 0\n".into());
    out.into_iter()
        .map(|body| format!("qubits 1\n{body}"))
        .collect()
}

fn two_qubit() -> Vec<String> {
    let prefixes = ["", "H 0\n", "H 0\nCNOT 0 1\n"];
    let middles = ["R 0\n", "R 1\n", "R 0\nR 1\n", "R 1\nH 1\nR 1\n"];
    let suffixes = ["", "CNOT 1 0\n", "MEASURE 1\n", "AUX\nCNOT 0 2\n"];
    let mut out = Vec::new();
    for p in prefixes {
        for m in middles {
            for s in suffixes {
                out.push(format!("qubits 2\n{p}{m}{s}"));
            }
        }
    }
    out
}

/// 89 circuits in a fixed order.
pub fn equivalence_circuits() -> Vec<Circuit> {
    one_qubit()
        .into_iter()
        .chain(two_qubit())
        .map(|text| parse_circuit(&text).expect("enumerated circuits are valid"))
        .collect()
}

/// Small circuits for strategy sweeps: one and two qubits, with R gates,
/// measurements and an AUX.
pub fn strategy_circuits() -> Vec<Circuit> {
    [
        "qubits 1\n",
        "qubits 1\nR 0\n",
        "qubits 1\nH 0\nR 0\nMEASURE 0\n",
        "qubits 2\nH 0\nCNOT 0 1\nR 1\n",
        "qubits 2\nR 0\nH 1\nR 1\nCNOT 1 0\n",
        "qubits 2\nAUX\nR 0\nCNOT 0 2\nMEASURE 2\n",
    ]
    .iter()
    .map(|t| parse_circuit(t).expect("valid"))
    .collect()
}
