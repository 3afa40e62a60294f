//! The client's secret: per-wire Pauli keys and how each gadget rewrites them.
//!
//! A wire carrying key `(x, z)` holds `X^x Z^z |ψ⟩`. All exponents are bits;
//! additive exponents are reduced mod 2.

use std::collections::BTreeMap;

use rand::Rng;
use thiserror::Error;

/// One-time-pad key for a single wire: `X^x Z^z`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliKey {
    pub x: bool,
    pub z: bool,
}

impl PauliKey {
    pub const fn new(x: bool, z: bool) -> Self {
        Self { x, z }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self {
            x: rng.random(),
            z: rng.random(),
        }
    }

    /// All four keys, in `(x, z)` order 00, 01, 10, 11.
    pub fn all() -> [PauliKey; 4] {
        [
            PauliKey::new(false, false),
            PauliKey::new(false, true),
            PauliKey::new(true, false),
            PauliKey::new(true, true),
        ]
    }
}

/// Client randomness consumed by one R-gadget: the aux qubit is `Z^z P^p |+⟩`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct RGateRandomness {
    pub p: bool,
    pub z: bool,
}

impl RGateRandomness {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self {
            p: rng.random(),
            z: rng.random(),
        }
    }

    pub fn all() -> [RGateRandomness; 4] {
        [(false, false), (false, true), (true, false), (true, true)].map(|(p, z)| Self { p, z })
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum KeyError {
    #[error("wire {0} has no quantum key")]
    NoKey(usize),
    #[error("wire {0} is already classical")]
    AlreadyClassical(usize),
}

/// Keys for live quantum wires and for wires that have been measured.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KeyRegister {
    quantum: BTreeMap<usize, PauliKey>,
    classical: BTreeMap<usize, bool>,
}

impl KeyRegister {
    pub fn from_keys(keys: &[PauliKey]) -> Self {
        Self {
            quantum: keys.iter().copied().enumerate().collect(),
            classical: BTreeMap::new(),
        }
    }

    pub fn quantum(&self) -> &BTreeMap<usize, PauliKey> {
        &self.quantum
    }

    pub fn classical(&self) -> &BTreeMap<usize, bool> {
        &self.classical
    }

    pub fn get(&self, wire: usize) -> Result<PauliKey, KeyError> {
        self.quantum
            .get(&wire)
            .copied()
            .ok_or(KeyError::NoKey(wire))
    }

    pub fn set(&mut self, wire: usize, key: PauliKey) {
        self.quantum.insert(wire, key);
    }

    pub fn is_classical(&self, wire: usize) -> bool {
        self.classical.contains_key(&wire)
    }

    /// Adds the `(0, 0)` key for a freshly prepared wire.
    pub fn add_aux(&mut self, wire: usize) {
        self.quantum.insert(wire, update_aux());
    }

    /// Moves `wire` to the classical side and returns the decoded outcome.
    pub fn measure(&mut self, wire: usize, reported: bool) -> Result<bool, KeyError> {
        if self.classical.contains_key(&wire) {
            return Err(KeyError::AlreadyClassical(wire));
        }
        let key = self.quantum.remove(&wire).ok_or(KeyError::NoKey(wire))?;
        self.classical.insert(wire, key.x);
        Ok(update_measure(key, reported))
    }

    /// Per-wire keys for a register of `num_wires`; classical wires use `(x, 0)`.
    pub fn dense(&self, num_wires: usize) -> Result<Vec<PauliKey>, KeyError> {
        (0..num_wires)
            .map(|w| {
                if let Some(k) = self.quantum.get(&w) {
                    Ok(*k)
                } else if let Some(&x) = self.classical.get(&w) {
                    Ok(PauliKey::new(x, false))
                } else {
                    Err(KeyError::NoKey(w))
                }
            })
            .collect()
    }
}

/// `X` commutes with the pad up to phase.
pub fn update_x(key: PauliKey) -> PauliKey {
    key
}

/// `Z` commutes with the pad up to phase.
pub fn update_z(key: PauliKey) -> PauliKey {
    key
}

/// `H` swaps the X and Z exponents.
pub fn update_h(key: PauliKey) -> PauliKey {
    PauliKey::new(key.z, key.x)
}

/// `P` adds the X exponent into the Z exponent.
pub fn update_p(key: PauliKey) -> PauliKey {
    PauliKey::new(key.x, key.x ^ key.z)
}

/// Returns `(control, target)` keys after a CNOT.
pub fn update_cnot(control: PauliKey, target: PauliKey) -> (PauliKey, PauliKey) {
    (
        PauliKey::new(control.x, control.z ^ target.z),
        PauliKey::new(control.x ^ target.x, target.z),
    )
}

/// Decodes the server's reported bit: the X key flips the observed outcome.
pub fn update_measure(key: PauliKey, reported: bool) -> bool {
    reported ^ key.x
}

pub fn update_aux() -> PauliKey {
    PauliKey::default()
}

/// Key after the R-gadget, given the server's measured bit `c`.
///
/// X exponent: `x ⊕ c`. Z exponent: `x·(c ⊕ p ⊕ 1) ⊕ z ⊕ d ⊕ p`, where `p`
/// and `d` are the aux-qubit bits.
pub fn update_r(key: PauliKey, rand: RGateRandomness, c: bool) -> PauliKey {
    PauliKey::new(key.x ^ c, (key.x & !(c ^ rand.p)) ^ key.z ^ rand.z ^ rand.p)
}

/// The classical bit sent with the aux qubit: the P-correction exponent `x ⊕ p`.
pub fn client_x_message(key: PauliKey, rand: RGateRandomness) -> bool {
    key.x ^ rand.p
}

#[cfg(test)]
mod tests {
    use super::*;

    const F: bool = false;
    const T: bool = true;

    fn k(x: bool, z: bool) -> PauliKey {
        PauliKey::new(x, z)
    }

    #[test]
    fn clifford_update_tables() {
        for key in PauliKey::all() {
            assert_eq!(update_x(key), key);
            assert_eq!(update_z(key), key);
        }
        assert_eq!(update_h(k(T, F)), k(F, T));
        assert_eq!(update_h(k(F, F)), k(F, F));
        assert_eq!(update_h(k(T, T)), k(T, T));
        assert_eq!(update_p(k(T, F)), k(T, T));
        assert_eq!(update_p(k(F, T)), k(F, T));
        assert_eq!(update_p(k(T, T)), k(T, F));
        assert_eq!(update_cnot(k(T, F), k(F, F)), (k(T, F), k(T, F)));
        assert_eq!(update_cnot(k(F, F), k(F, F)), (k(F, F), k(F, F)));
        assert_eq!(update_cnot(k(F, T), k(T, T)), (k(F, F), k(T, T)));
    }

    #[test]
    fn update_h_and_p_are_involutions() {
        for key in PauliKey::all() {
            assert_eq!(update_h(update_h(key)), key);
            assert_eq!(update_p(update_p(key)), key);
        }
    }

    #[test]
    fn measurement_decoding() {
        assert!(update_measure(k(T, F), F));
        assert!(update_measure(k(F, F), T));
        assert!(!update_measure(k(T, T), T));
    }

    #[test]
    fn register_measure_moves_wire() {
        let mut reg = KeyRegister::from_keys(&[k(T, T), k(F, F)]);
        assert!(reg.measure(0, F).unwrap());
        assert_eq!(reg.classical().get(&0), Some(&T));
        assert_eq!(reg.measure(0, F), Err(KeyError::AlreadyClassical(0)));
        assert_eq!(reg.get(0), Err(KeyError::NoKey(0)));
        reg.add_aux(2);
        assert_eq!(reg.get(2).unwrap(), k(F, F));
        assert_eq!(reg.dense(3).unwrap(), vec![k(T, F), k(F, F), k(F, F)]);
    }

    #[test]
    fn r_update_examples() {
        let r = |p, z| RGateRandomness { p, z };
        assert_eq!(update_r(k(F, F), r(T, F), T), k(T, T));
        assert_eq!(update_r(k(F, F), r(F, F), F), k(F, F));
        assert_eq!(update_r(k(T, F), r(F, F), F), k(T, T));
    }

    #[test]
    fn x_message_examples() {
        let r = |p| RGateRandomness { p, z: F };
        assert!(!client_x_message(k(T, F), r(T)));
        assert!(!client_x_message(k(F, F), r(F)));
        for x in [F, T] {
            let outs: Vec<bool> = [F, T]
                .iter()
                .map(|&p| client_x_message(k(x, F), r(p)))
                .collect();
            assert_eq!(outs.iter().filter(|b| **b).count(), 1);
        }
    }
}
