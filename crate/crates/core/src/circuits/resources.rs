use std::ops::Add;

use super::ir::{Circuit, GateOp};

/// Interaction cost of delegating a circuit.
///
/// Only the R-gadget is interactive: one aux qubit and one classical bit in
/// each direction per R gate. Measurement reports are counted separately.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ResourceReport {
    pub r_gate_count: usize,
    pub aux_qubits_sent: usize,
    pub classical_bits_client_to_server: usize,
    pub classical_bits_server_to_client: usize,
    pub measurement_reports: usize,
}

impl Add for ResourceReport {
    type Output = ResourceReport;

    fn add(self, rhs: ResourceReport) -> ResourceReport {
        ResourceReport {
            r_gate_count: self.r_gate_count + rhs.r_gate_count,
            aux_qubits_sent: self.aux_qubits_sent + rhs.aux_qubits_sent,
            classical_bits_client_to_server: self.classical_bits_client_to_server
                + rhs.classical_bits_client_to_server,
            classical_bits_server_to_client: self.classical_bits_server_to_client
                + rhs.classical_bits_server_to_client,
            measurement_reports: self.measurement_reports + rhs.measurement_reports,
        }
    }
}

pub fn resources(circuit: &Circuit) -> ResourceReport {
    let r = circuit.r_gate_count();
    ResourceReport {
        r_gate_count: r,
        aux_qubits_sent: r,
        classical_bits_client_to_server: r,
        classical_bits_server_to_client: r,
        measurement_reports: circuit
            .ops()
            .iter()
            .filter(|op| matches!(op, GateOp::Measure(_)))
            .count(),
    }
}
