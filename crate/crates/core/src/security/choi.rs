//! Channels induced on the server's side, as Choi matrices with a classical
//! record: one block per value of the server's classical output.

use std::collections::BTreeMap;

use super::joint::{Joint, Owner, WireId};
use super::protocols::{ClientMode, JointOptions, Runner};
use super::strategy::ServerStrategy;
use super::SecurityError;
use crate::circuits::{validate, Circuit, GateOp};
use crate::qcore::{DensityMatrix, Matrix, C64};

/// Largest `reference + input + prior` width a Choi computation accepts.
pub const CHOI_MAX_WIRES: usize = 12;

/// A classical-quantum operator `Σ_k |k⟩⟨k| ⊗ ρ_k` stored by block.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockState {
    quantum_wires: usize,
    blocks: BTreeMap<Vec<bool>, Matrix>,
}

impl BlockState {
    pub fn new(quantum_wires: usize, blocks: BTreeMap<Vec<bool>, Matrix>) -> Self {
        debug_assert!(blocks.values().all(|m| m.dim() == 1 << quantum_wires));
        Self {
            quantum_wires,
            blocks,
        }
    }

    /// `I / 2^(q + c)` over `q` quantum wires and `c` classical bits.
    pub fn maximally_mixed(quantum_wires: usize, classical_bits: usize) -> Self {
        let dim = 1usize << quantum_wires;
        let w = 1.0 / (dim as f64 * (1u64 << classical_bits) as f64);
        let blocks = (0..1usize << classical_bits)
            .map(|v| {
                let key = (0..classical_bits)
                    .map(|i| v >> (classical_bits - 1 - i) & 1 == 1)
                    .collect();
                (key, Matrix::identity(dim).scale(C64::new(w, 0.0)))
            })
            .collect();
        Self::new(quantum_wires, blocks)
    }

    pub fn quantum_wires(&self) -> usize {
        self.quantum_wires
    }

    pub fn blocks(&self) -> &BTreeMap<Vec<bool>, Matrix> {
        &self.blocks
    }

    pub fn trace(&self) -> f64 {
        self.blocks.values().map(|m| m.trace().re).sum()
    }

    /// `½ Σ_k ‖ρ_k − σ_k‖₁`; a block missing on one side counts as zero.
    pub fn trace_distance(&self, other: &BlockState) -> Result<f64, SecurityError> {
        if self.quantum_wires != other.quantum_wires {
            return Err(SecurityError::ShapeMismatch(format!(
                "{} vs {} quantum wires",
                self.quantum_wires, other.quantum_wires
            )));
        }
        let zero = Matrix::zeros(1 << self.quantum_wires);
        let keys: std::collections::BTreeSet<&Vec<bool>> =
            self.blocks.keys().chain(other.blocks.keys()).collect();
        Ok(keys
            .into_iter()
            .map(|k| {
                let a = self.blocks.get(k).unwrap_or(&zero);
                let b = other.blocks.get(k).unwrap_or(&zero);
                0.5 * a.sub(b).hermitian_trace_norm()
            })
            .sum())
    }

    /// Dense matrix with the classical bits as trailing basis qubits.
    pub fn to_density(&self, classical_bits: usize) -> Result<DensityMatrix, SecurityError> {
        let q = 1usize << self.quantum_wires;
        let c = 1usize << classical_bits;
        let mut m = Matrix::zeros(q * c);
        for (key, block) in &self.blocks {
            if key.len() != classical_bits {
                return Err(SecurityError::ShapeMismatch(format!(
                    "record of {} bits, expected {classical_bits}",
                    key.len()
                )));
            }
            let k = key.iter().fold(0usize, |acc, &b| acc << 1 | b as usize);
            for i in 0..q {
                for j in 0..q {
                    m.set(i * c + k, j * c + k, block.get(i, j));
                }
            }
        }
        Ok(DensityMatrix::new(self.quantum_wires + classical_bits, m)?)
    }
}

/// Choi matrix of a channel from `input_wires` to a quantum output plus a
/// classical record, normalised to unit trace. The reference copy of the input
/// occupies the high wires of every block.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    input_wires: usize,
    output_wires: usize,
    state: BlockState,
}

impl ChoiMatrix {
    pub fn input_wires(&self) -> usize {
        self.input_wires
    }

    pub fn output_wires(&self) -> usize {
        self.output_wires
    }

    pub fn input_dim(&self) -> usize {
        1 << self.input_wires
    }

    pub fn output_dim(&self) -> usize {
        1 << self.output_wires
    }

    pub fn records(&self) -> usize {
        self.state.blocks.len()
    }

    pub fn blocks(&self) -> &BTreeMap<Vec<bool>, Matrix> {
        &self.state.blocks
    }

    pub fn trace_distance(&self, other: &ChoiMatrix) -> Result<f64, SecurityError> {
        if self.input_wires != other.input_wires {
            return Err(SecurityError::ShapeMismatch(format!(
                "{} vs {} input wires",
                self.input_wires, other.input_wires
            )));
        }
        self.state.trace_distance(&other.state)
    }

    /// Every block positive semidefinite and `Σ_k Tr_out ρ_k = I / d_in`,
    /// both within `tol`.
    pub fn check_valid(&self, tol: f64) -> Result<(), String> {
        let (din, dout) = (self.input_dim(), self.output_dim());
        let mut reduced = Matrix::zeros(din);
        for (key, block) in &self.state.blocks {
            if !block.is_hermitian(tol) {
                return Err(format!("block {key:?} is not Hermitian"));
            }
            let min = block
                .hermitian_eigenvalues()
                .first()
                .copied()
                .unwrap_or(0.0);
            if min < -tol {
                return Err(format!("block {key:?} has eigenvalue {min:e}"));
            }
            for i in 0..din {
                for j in 0..din {
                    let s: C64 = (0..dout)
                        .map(|k| block.get(i * dout + k, j * dout + k))
                        .sum();
                    reduced.set(i, j, reduced.get(i, j) + s);
                }
            }
        }
        let target = Matrix::identity(din).scale(C64::new(1.0 / din as f64, 0.0));
        let err = reduced.max_abs_diff(&target);
        if err > tol {
            return Err(format!("not trace preserving: deviation {err:e}"));
        }
        Ok(())
    }

    /// A channel that ignores its input and outputs its prior register
    /// untouched, with an empty record.
    pub fn discard_input_keep_prior(input_wires: usize, prior_wires: usize) -> ChoiMatrix {
        let din = 1usize << input_wires;
        let dp = 1usize << prior_wires;
        // I/din on the input references ⊗ Φ⁺ on (prior reference, prior)
        let mut phi = Matrix::zeros(dp * dp);
        for a in 0..dp {
            for b in 0..dp {
                phi.set(a * dp + a, b * dp + b, C64::new(1.0 / dp as f64, 0.0));
            }
        }
        let ident = Matrix::identity(din).scale(C64::new(1.0 / din as f64, 0.0));
        let mut blocks = BTreeMap::new();
        blocks.insert(Vec::new(), ident.kron(&phi));
        ChoiMatrix {
            input_wires: input_wires + prior_wires,
            output_wires: prior_wires,
            state: BlockState::new(input_wires + 2 * prior_wires, blocks),
        }
    }
}

type WireGroups = (Vec<WireId>, Vec<WireId>, Vec<WireId>);

/// Reference-entangled inputs: returns (references, client inputs, prior).
fn entangled_inputs(
    joint: &mut Joint,
    n: usize,
    prior: usize,
) -> Result<WireGroups, SecurityError> {
    let mut refs = Vec::new();
    let mut inputs = Vec::new();
    let mut priors = Vec::new();
    for _ in 0..n {
        let (r, q) = joint.alloc_epr(Owner::Reference, Owner::Client)?;
        refs.push(r);
        inputs.push(q);
    }
    for _ in 0..prior {
        let (r, q) = joint.alloc_epr(Owner::Reference, Owner::Server)?;
        refs.push(r);
        priors.push(q);
    }
    Ok((refs, inputs, priors))
}

fn check_cap(circuit: &Circuit, prior: usize) -> Result<(), SecurityError> {
    let wires = 2 * circuit.initial_wires() + 2 * prior;
    if wires > CHOI_MAX_WIRES {
        return Err(SecurityError::DimensionCap {
            wires,
            cap: CHOI_MAX_WIRES,
        });
    }
    Ok(())
}

/// Choi matrix of the map from (client input ⊗ server prior) to the server's
/// final output: prior register, ancillas and classical record.
pub fn choi_of_induced_channel(
    circuit: &Circuit,
    strategy: &ServerStrategy,
    mode: ClientMode,
) -> Result<ChoiMatrix, SecurityError> {
    choi_of_induced_channel_with(circuit, strategy, JointOptions::new(mode))
}

pub fn choi_of_induced_channel_with(
    circuit: &Circuit,
    strategy: &ServerStrategy,
    opts: JointOptions,
) -> Result<ChoiMatrix, SecurityError> {
    validate(circuit).map_err(SecurityError::InvalidCircuit)?;
    check_cap(circuit, strategy.prior_width())?;
    let mut joint = Joint::new(opts.exec);
    let (refs, inputs, prior) =
        entangled_inputs(&mut joint, circuit.initial_wires(), strategy.prior_width())?;
    let done = Runner::new(joint, circuit, strategy, opts, prior)?.run(&inputs)?;
    let outputs: Vec<WireId> = done.prior.iter().chain(&done.ancillas).copied().collect();
    let keep: Vec<WireId> = refs.iter().chain(&outputs).copied().collect();
    let blocks = done.joint.blocks(&keep, |w| w.record.clone())?;
    Ok(ChoiMatrix {
        input_wires: refs.len(),
        output_wires: outputs.len(),
        state: BlockState::new(keep.len(), blocks),
    })
}

/// Choi matrix of what the client ends up with: the decrypted register and
/// decoded measurement outcomes, against an honest server.
pub fn client_output_choi(
    circuit: &Circuit,
    opts: JointOptions,
) -> Result<ChoiMatrix, SecurityError> {
    validate(circuit).map_err(SecurityError::InvalidCircuit)?;
    check_cap(circuit, 0)?;
    let strategy = ServerStrategy::honest();
    let mut joint = Joint::new(opts.exec);
    let (refs, inputs, _) = entangled_inputs(&mut joint, circuit.initial_wires(), 0)?;
    let done = Runner::new(joint, circuit, &strategy, opts, Vec::new())?.run(&inputs)?;
    client_blocks(&done.joint, &refs, &done.data)
}

fn client_blocks(
    joint: &Joint,
    refs: &[WireId],
    data: &[WireId],
) -> Result<ChoiMatrix, SecurityError> {
    let keep: Vec<WireId> = refs.iter().chain(data).copied().collect();
    let blocks = joint.blocks(&keep, |w| w.client.plain.values().copied().collect())?;
    Ok(ChoiMatrix {
        input_wires: refs.len(),
        output_wires: data.len(),
        state: BlockState::new(keep.len(), blocks),
    })
}

/// Choi matrix of running the circuit directly, for comparison with
/// [`client_output_choi`].
pub fn ideal_output_choi(circuit: &Circuit) -> Result<ChoiMatrix, SecurityError> {
    use super::joint::Sink;
    validate(circuit).map_err(SecurityError::InvalidCircuit)?;
    check_cap(circuit, 0)?;
    let mut joint = Joint::new(crate::par::Execution::Sequential);
    let (refs, mut data, _) = entangled_inputs(&mut joint, circuit.initial_wires(), 0)?;
    for op in circuit.ops() {
        match *op {
            GateOp::Aux(_) => data.push(joint.alloc_zero(Owner::Client)?),
            GateOp::Measure(w) => {
                let bit = joint.measure(data[w], Sink::Client, true)?;
                joint.update_client(move |world| {
                    let b = world.client.bits[bit];
                    world.client.plain.insert(w, b);
                    Ok(())
                })?;
            }
            _ => {
                let ids: Vec<WireId> = op.wires().iter().map(|&k| data[k]).collect();
                joint.apply(&op.gate().expect("unitary").matrix().into_matrix(), &ids);
            }
        }
    }
    client_blocks(&joint, &refs, &data)
}
