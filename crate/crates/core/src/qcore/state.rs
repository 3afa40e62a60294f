//! Pure states over a handful of wires.
//!
//! Wire 0 is the most significant bit of the computational-basis index, so
//! the register is `wire 0 ⊗ wire 1 ⊗ …`. For `n` wires, wire `w` lives at
//! bit `n - 1 - w` of the index.

use rand::Rng;
use rand_distr::StandardNormal;

use super::gates::GateMatrix;
use super::matrix::{Matrix, C64, ONE, ZERO};
use super::{QcoreError, MAX_WIRES, NORM_TOL};

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_wires: usize,
    amplitudes: Vec<C64>,
}

#[inline]
pub(crate) fn bit_of(num_wires: usize, wire: usize) -> usize {
    1 << (num_wires - 1 - wire)
}

pub(crate) fn check_wire_count(n: usize) -> Result<(), QcoreError> {
    if n > MAX_WIRES {
        Err(QcoreError::TooManyWires(n))
    } else {
        Ok(())
    }
}

impl StateVector {
    /// Validates length and normalisation.
    pub fn new(num_wires: usize, amplitudes: Vec<C64>) -> Result<Self, QcoreError> {
        check_wire_count(num_wires)?;
        if amplitudes.len() != 1 << num_wires {
            return Err(QcoreError::DimensionMismatch {
                expected: 1 << num_wires,
                found: amplitudes.len(),
            });
        }
        let s = Self {
            num_wires,
            amplitudes,
        };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(QcoreError::NotNormalized(norm));
        }
        Ok(s)
    }

    /// Normalises arbitrary non-zero amplitudes.
    pub fn from_unnormalized(num_wires: usize, amplitudes: Vec<C64>) -> Result<Self, QcoreError> {
        check_wire_count(num_wires)?;
        if amplitudes.len() != 1 << num_wires {
            return Err(QcoreError::DimensionMismatch {
                expected: 1 << num_wires,
                found: amplitudes.len(),
            });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(QcoreError::NotNormalized(0.0));
        }
        Ok(Self {
            num_wires,
            amplitudes: amplitudes.into_iter().map(|a| a / norm).collect(),
        })
    }

    pub(crate) fn from_raw(num_wires: usize, amplitudes: Vec<C64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << num_wires);
        Self {
            num_wires,
            amplitudes,
        }
    }

    pub fn basis(num_wires: usize, index: usize) -> Result<Self, QcoreError> {
        check_wire_count(num_wires)?;
        if index >= 1 << num_wires {
            return Err(QcoreError::WireOutOfRange {
                wire: index,
                num_wires,
            });
        }
        let mut amps = vec![ZERO; 1 << num_wires];
        amps[index] = ONE;
        Ok(Self::from_raw(num_wires, amps))
    }

    pub fn zero(num_wires: usize) -> Result<Self, QcoreError> {
        Self::basis(num_wires, 0)
    }

    /// Computational basis state from a bit string such as `"0110"`; the first character is wire 0.
    pub fn from_bitstring(bits: &str) -> Result<Self, QcoreError> {
        let mut index = 0usize;
        for ch in bits.chars() {
            index = index << 1
                | match ch {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(QcoreError::BadBitString(bits.to_string())),
                };
        }
        if bits.is_empty() {
            return Err(QcoreError::BadBitString(bits.to_string()));
        }
        Self::basis(bits.chars().count(), index)
    }

    /// `(|0⟩ + |1⟩)/√2`.
    pub fn plus() -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::from_raw(1, vec![h, h])
    }

    /// `(|00⟩ + |11⟩)/√2`.
    pub fn epr() -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::from_raw(2, vec![h, ZERO, ZERO, h])
    }

    /// Haar-random pure state (normalised complex Gaussian vector).
    pub fn random<R: Rng + ?Sized>(num_wires: usize, rng: &mut R) -> Self {
        let dim = 1usize << num_wires;
        loop {
            let amps: Vec<C64> = (0..dim)
                .map(|_| {
                    C64::new(
                        rng.sample::<f64, _>(StandardNormal),
                        rng.sample::<f64, _>(StandardNormal),
                    )
                })
                .collect();
            if let Ok(s) = Self::from_unnormalized(num_wires, amps) {
                return s;
            }
        }
    }

    /// Tensor product of independent random single-wire states.
    pub fn random_product<R: Rng + ?Sized>(num_wires: usize, rng: &mut R) -> Self {
        (0..num_wires).fold(Self::from_raw(0, vec![ONE]), |acc, _| {
            acc.tensor(&Self::random(1, rng))
        })
    }

    pub fn num_wires(&self) -> usize {
        self.num_wires
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `self ⊗ other`; the wires of `other` are appended after those of `self`.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        StateVector::from_raw(self.num_wires + other.num_wires, amps)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64, QcoreError> {
        if self.dim() != other.dim() {
            return Err(QcoreError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub(crate) fn check_wires(&self, wires: &[usize]) -> Result<(), QcoreError> {
        for (i, &w) in wires.iter().enumerate() {
            if w >= self.num_wires {
                return Err(QcoreError::WireOutOfRange {
                    wire: w,
                    num_wires: self.num_wires,
                });
            }
            if wires[..i].contains(&w) {
                return Err(QcoreError::DuplicateWire(w));
            }
        }
        Ok(())
    }

    /// Applies a `2^k × 2^k` matrix to the listed wires in place; `wires[0]` is the
    /// matrix's most significant qubit.
    pub(crate) fn apply_matrix_mut(&mut self, matrix: &Matrix, wires: &[usize]) {
        let k = wires.len();
        let sub = 1usize << k;
        debug_assert_eq!(matrix.dim(), sub);
        let masks: Vec<usize> = wires.iter().map(|&w| bit_of(self.num_wires, w)).collect();
        let all_mask: usize = masks.iter().sum();
        let offsets: Vec<usize> = (0..sub)
            .map(|local| {
                masks
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| local & (1 << (k - 1 - j)) != 0)
                    .map(|(_, m)| m)
                    .sum()
            })
            .collect();
        let m = matrix.as_slice();
        let mut gathered = vec![ZERO; sub];
        for base in 0..self.dim() {
            if base & all_mask != 0 {
                continue;
            }
            for (g, off) in gathered.iter_mut().zip(&offsets) {
                *g = self.amplitudes[base + off];
            }
            for (row, off) in offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (col, g) in gathered.iter().enumerate() {
                    acc += m[row * sub + col] * g;
                }
                self.amplitudes[base + off] = acc;
            }
        }
    }

    /// Applies an arbitrary matrix to wires without a unitarity check (for projectors and fixtures).
    pub fn apply_matrix(
        &self,
        matrix: &Matrix,
        wires: &[usize],
    ) -> Result<StateVector, QcoreError> {
        self.check_wires(wires)?;
        if matrix.dim() != 1 << wires.len() {
            return Err(QcoreError::ArityMismatch {
                arity: matrix.dim().trailing_zeros() as usize,
                wires: wires.len(),
            });
        }
        let mut out = self.clone();
        out.apply_matrix_mut(matrix, wires);
        Ok(out)
    }

    /// Exchanges two wires.
    pub fn swap_wires(&self, a: usize, b: usize) -> Result<StateVector, QcoreError> {
        self.check_wires(&[a, b])?;
        let (ma, mb) = (bit_of(self.num_wires, a), bit_of(self.num_wires, b));
        let mut out = self.amplitudes.clone();
        for i in 0..self.dim() {
            let ba = i & ma != 0;
            let bb = i & mb != 0;
            if ba != bb {
                out[i ^ ma ^ mb] = self.amplitudes[i];
            }
        }
        Ok(StateVector::from_raw(self.num_wires, out))
    }

    /// Appends a one-wire state as the new last wire.
    pub fn append_wire(&self, qubit: &StateVector) -> Result<StateVector, QcoreError> {
        check_wire_count(self.num_wires + qubit.num_wires)?;
        Ok(self.tensor(qubit))
    }

    /// Removes a wire that is known to sit in basis state `|bit⟩` and renormalises.
    /// Amplitudes on the other branch are discarded.
    pub fn remove_collapsed_wire(&self, wire: usize, bit: bool) -> Result<StateVector, QcoreError> {
        self.check_wires(&[wire])?;
        let n = self.num_wires;
        let mask = bit_of(n, wire);
        let low = mask - 1;
        let mut amps = Vec::with_capacity(self.dim() / 2);
        for reduced in 0..self.dim() / 2 {
            let hi = (reduced & !low) << 1;
            let idx = hi | (reduced & low) | if bit { mask } else { 0 };
            amps.push(self.amplitudes[idx]);
        }
        StateVector::from_unnormalized(n - 1, amps)
    }

    /// Probability that `wire` reads 1.
    pub fn prob_one(&self, wire: usize) -> Result<f64, QcoreError> {
        self.check_wires(&[wire])?;
        let mask = bit_of(self.num_wires, wire);
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Reduced density matrix on `keep`, in the order given (`keep[0]` most significant).
    pub fn reduced_density(&self, keep: &[usize]) -> Result<Matrix, QcoreError> {
        self.check_wires(keep)?;
        let n = self.num_wires;
        let k = keep.len();
        let rest: Vec<usize> = (0..n).filter(|w| !keep.contains(w)).collect();
        let kd = 1usize << k;
        let rd = 1usize << rest.len();
        let spread = |local: usize, wires: &[usize]| -> usize {
            let len = wires.len();
            wires
                .iter()
                .enumerate()
                .filter(|(j, _)| local & (1 << (len - 1 - j)) != 0)
                .map(|(_, &w)| bit_of(n, w))
                .sum()
        };
        let keep_off: Vec<usize> = (0..kd).map(|i| spread(i, keep)).collect();
        let rest_off: Vec<usize> = (0..rd).map(|i| spread(i, &rest)).collect();
        let mut out = Matrix::zeros(kd);
        // columns: amplitude matrix A[i][e] = psi[keep_i + rest_e]
        let a: Vec<C64> = keep_off
            .iter()
            .flat_map(|ko| rest_off.iter().map(move |ro| (ko, ro)))
            .map(|(ko, ro)| self.amplitudes[ko + ro])
            .collect();
        let data = out.as_mut_slice();
        for i in 0..kd {
            let ri = &a[i * rd..(i + 1) * rd];
            for j in i..kd {
                let rj = &a[j * rd..(j + 1) * rd];
                let v: C64 = ri.iter().zip(rj).map(|(x, y)| x * y.conj()).sum();
                data[i * kd + j] = v;
                data[j * kd + i] = v.conj();
            }
        }
        Ok(out)
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn outer(&self) -> Matrix {
        let d = self.dim();
        let mut data = Vec::with_capacity(d * d);
        for a in &self.amplitudes {
            for b in &self.amplitudes {
                data.push(a * b.conj());
            }
        }
        Matrix::from_raw(d, data)
    }

    pub fn scaled_phase(&self, phase: f64) -> StateVector {
        let p = C64::from_polar(1.0, phase);
        StateVector::from_raw(
            self.num_wires,
            self.amplitudes.iter().map(|a| a * p).collect(),
        )
    }
}

/// Applies `gate` to `wires` (`wires[0]` is the control for CNOT).
pub fn apply_gate(
    state: &StateVector,
    gate: &GateMatrix,
    wires: &[usize],
) -> Result<StateVector, QcoreError> {
    if wires.len() != gate.arity() {
        return Err(QcoreError::ArityMismatch {
            arity: gate.arity(),
            wires: wires.len(),
        });
    }
    state.apply_matrix(gate.matrix(), wires)
}

/// `|⟨ψ|φ⟩|²`, insensitive to global phase.
pub fn fidelity_up_to_global_phase(
    psi: &StateVector,
    phi: &StateVector,
) -> Result<f64, QcoreError> {
    Ok(psi.inner(phi)?.norm_sqr().min(1.0))
}
