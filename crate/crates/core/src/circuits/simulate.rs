//! Direct (unencrypted) execution; the oracle delegated runs are checked against.

use std::collections::BTreeMap;

use rand::Rng;

use super::ir::{Circuit, GateOp};
use crate::qcore::{apply_gate, measure_branches, measure_sample, QcoreError, StateVector};

/// One measurement history of a direct run.
#[derive(Clone, Debug, PartialEq)]
pub struct PlainBranch {
    pub probability: f64,
    /// Outcome per measured wire.
    pub outcomes: BTreeMap<usize, bool>,
    /// Measured wires remain in the register, collapsed.
    pub state: StateVector,
}

fn apply_unitary(state: &StateVector, op: &GateOp) -> Result<StateVector, QcoreError> {
    let gate = op.gate().expect("unitary op");
    apply_gate(state, &gate.matrix(), &op.wires())
}

/// Enumerates every measurement branch with non-negligible probability.
pub fn simulate_branches(
    circuit: &Circuit,
    input: &StateVector,
) -> Result<Vec<PlainBranch>, QcoreError> {
    if input.num_wires() != circuit.initial_wires() {
        return Err(QcoreError::DimensionMismatch {
            expected: circuit.initial_wires(),
            found: input.num_wires(),
        });
    }
    let mut branches = vec![PlainBranch {
        probability: 1.0,
        outcomes: BTreeMap::new(),
        state: input.clone(),
    }];
    for op in circuit.ops() {
        let mut next = Vec::with_capacity(branches.len());
        for b in branches {
            match *op {
                GateOp::Aux(_) => next.push(PlainBranch {
                    state: b.state.append_wire(&StateVector::zero(1)?)?,
                    ..b
                }),
                GateOp::Measure(w) => {
                    for m in measure_branches(&b.state, w)? {
                        if let Some(state) = m.state {
                            let mut outcomes = b.outcomes.clone();
                            outcomes.insert(w, m.bit);
                            next.push(PlainBranch {
                                probability: b.probability * m.probability,
                                outcomes,
                                state,
                            });
                        }
                    }
                }
                _ => next.push(PlainBranch {
                    state: apply_unitary(&b.state, op)?,
                    ..b
                }),
            }
        }
        branches = next;
    }
    Ok(branches)
}

/// One sampled run.
pub fn simulate_sampled<R: Rng + ?Sized>(
    circuit: &Circuit,
    input: &StateVector,
    rng: &mut R,
) -> Result<PlainBranch, QcoreError> {
    let mut state = input.clone();
    let mut outcomes = BTreeMap::new();
    let mut probability = 1.0;
    for op in circuit.ops() {
        match *op {
            GateOp::Aux(_) => state = state.append_wire(&StateVector::zero(1)?)?,
            GateOp::Measure(w) => {
                let p1 = state.prob_one(w)?;
                let (bit, post) = measure_sample(&state, w, rng)?;
                probability *= if bit { p1 } else { 1.0 - p1 };
                outcomes.insert(w, bit);
                state = post;
            }
            _ => state = apply_unitary(&state, op)?,
        }
    }
    Ok(PlainBranch {
        probability,
        outcomes,
        state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::parse_circuit;

    #[test]
    fn bell_measurement_branches() {
        let c = parse_circuit("qubits 2\nH 0\nCNOT 0 1\nMEASURE 0").unwrap();
        let b = simulate_branches(&c, &StateVector::zero(2).unwrap()).unwrap();
        assert_eq!(b.len(), 2);
        for br in &b {
            assert!((br.probability - 0.5).abs() < 1e-12);
            let bit = br.outcomes[&0];
            let expect = StateVector::from_bitstring(if bit { "11" } else { "00" }).unwrap();
            assert!(
                crate::qcore::fidelity_up_to_global_phase(&br.state, &expect).unwrap()
                    > 1.0 - 1e-12
            );
        }
    }

    #[test]
    fn input_width_checked() {
        let c = parse_circuit("qubits 2\nH 0").unwrap();
        assert!(simulate_branches(&c, &StateVector::zero(1).unwrap()).is_err());
    }
}
