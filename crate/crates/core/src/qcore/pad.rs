//! The quantum one-time pad: `X^x Z^z` per wire.

use super::density::DensityMatrix;
use super::gates::pauli;
use super::matrix::Matrix;
use super::state::StateVector;
use super::QcoreError;
use crate::keytrack::PauliKey;
use crate::par::{self, Execution};

fn check_keys(state: &StateVector, keys: &[PauliKey]) -> Result<(), QcoreError> {
    if keys.len() != state.num_wires() {
        return Err(QcoreError::KeyCountMismatch {
            keys: keys.len(),
            wires: state.num_wires(),
        });
    }
    Ok(())
}

/// Applies `X^x Z^z` (Z first) to wire `i` for each `keys[i]`.
pub fn qotp_encrypt(state: &StateVector, keys: &[PauliKey]) -> Result<StateVector, QcoreError> {
    check_keys(state, keys)?;
    let mut out = state.clone();
    for (wire, key) in keys.iter().enumerate() {
        if key.x || key.z {
            out.apply_matrix_mut(&pauli(key.x, key.z), &[wire]);
        }
    }
    Ok(out)
}

/// Inverse pad: `Z^z X^x` per wire.
pub fn qotp_decrypt(state: &StateVector, keys: &[PauliKey]) -> Result<StateVector, QcoreError> {
    check_keys(state, keys)?;
    let mut out = state.clone();
    for (wire, key) in keys.iter().enumerate() {
        if key.x || key.z {
            out.apply_matrix_mut(&pauli(key.x, key.z).adjoint(), &[wire]);
        }
    }
    Ok(out)
}

/// Uniform mixture of `X^x Z^z |ψ⟩` over all `4^|wires|` keys on `wires`.
pub fn average_over_keys(
    state: &StateVector,
    wires: &[usize],
) -> Result<DensityMatrix, QcoreError> {
    average_over_keys_with(Execution::default(), state, wires)
}

pub fn average_over_keys_with(
    exec: Execution,
    state: &StateVector,
    wires: &[usize],
) -> Result<DensityMatrix, QcoreError> {
    if wires.is_empty() {
        return Err(QcoreError::EmptySubset);
    }
    state.check_wires(wires)?;
    let k = wires.len();
    let count = 1usize << (2 * k);
    let dim = state.dim();
    let sum = par::map_reduce_range(
        exec,
        0..count,
        || Matrix::zeros(dim),
        |key_index| {
            let mut s = state.clone();
            for (j, &w) in wires.iter().enumerate() {
                let bits = key_index >> (2 * j);
                s.apply_matrix_mut(&pauli(bits & 1 != 0, bits & 2 != 0), &[w]);
            }
            s.outer()
        },
        |a, b| a.add(&b),
    );
    let mut acc = Matrix::zeros(dim);
    acc.add_assign_scaled(&sum, 1.0 / count as f64);
    Ok(DensityMatrix::from_raw(state.num_wires(), acc))
}
