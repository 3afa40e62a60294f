//! Density matrices, partial traces and trace distance.

use super::matrix::{Matrix, C64};
use super::state::{bit_of, check_wire_count, StateVector};
use super::{QcoreError, AGGREGATE_TOL, NORM_TOL};

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    num_wires: usize,
    matrix: Matrix,
}

impl DensityMatrix {
    /// Checks Hermiticity, unit trace and positivity.
    pub fn new(num_wires: usize, matrix: Matrix) -> Result<Self, QcoreError> {
        check_wire_count(num_wires)?;
        if matrix.dim() != 1 << num_wires {
            return Err(QcoreError::DimensionMismatch {
                expected: 1 << num_wires,
                found: matrix.dim(),
            });
        }
        if !matrix.is_hermitian(NORM_TOL) {
            return Err(QcoreError::NotHermitian);
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(QcoreError::NotNormalized(tr.re));
        }
        let min = matrix
            .hermitian_eigenvalues()
            .first()
            .copied()
            .unwrap_or(0.0);
        if min < -AGGREGATE_TOL {
            return Err(QcoreError::NotPositive(min));
        }
        Ok(Self { num_wires, matrix })
    }

    pub(crate) fn from_raw(num_wires: usize, matrix: Matrix) -> Self {
        Self { num_wires, matrix }
    }

    pub fn from_pure(state: &StateVector) -> Self {
        Self::from_raw(state.num_wires(), state.outer())
    }

    pub fn maximally_mixed(num_wires: usize) -> Self {
        let d = 1usize << num_wires;
        Self::from_raw(
            num_wires,
            Matrix::identity(d).scale(C64::new(1.0 / d as f64, 0.0)),
        )
    }

    pub fn num_wires(&self) -> usize {
        self.num_wires
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `U ρ U†` with `U` acting on `wires`.
    pub fn conjugate(
        &self,
        unitary: &Matrix,
        wires: &[usize],
    ) -> Result<DensityMatrix, QcoreError> {
        // Apply to columns, then to rows via the adjoint trick.
        let n = self.num_wires;
        let d = 1usize << n;
        let mut cols = Vec::with_capacity(d);
        for j in 0..d {
            let col: Vec<C64> = (0..d).map(|i| self.matrix.get(i, j)).collect();
            let v = StateVector::from_raw(n, col);
            cols.push(v.apply_matrix(unitary, wires)?);
        }
        // cols[j][i] = (Uρ)_{ij}; now right-multiply by U†: rows of (Uρ) get U*.
        let conj = Matrix::from_raw(
            unitary.dim(),
            unitary.as_slice().iter().map(|v| v.conj()).collect(),
        );
        let mut out = Matrix::zeros(d);
        for i in 0..d {
            let row: Vec<C64> = (0..d).map(|j| cols[j].amplitudes()[i]).collect();
            let v = StateVector::from_raw(n, row).apply_matrix(&conj, wires)?;
            for (j, a) in v.amplitudes().iter().enumerate() {
                out.set(i, j, *a);
            }
        }
        Ok(DensityMatrix::from_raw(n, out))
    }

    /// Reduced state on `keep`, ordered as given (`keep[0]` becomes wire 0).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix, QcoreError> {
        if keep.is_empty() {
            return Err(QcoreError::EmptySubset);
        }
        let n = self.num_wires;
        for (i, &w) in keep.iter().enumerate() {
            if w >= n {
                return Err(QcoreError::WireOutOfRange {
                    wire: w,
                    num_wires: n,
                });
            }
            if keep[..i].contains(&w) {
                return Err(QcoreError::DuplicateWire(w));
            }
        }
        let rest: Vec<usize> = (0..n).filter(|w| !keep.contains(w)).collect();
        let spread = |local: usize, wires: &[usize]| -> usize {
            let len = wires.len();
            wires
                .iter()
                .enumerate()
                .filter(|(j, _)| local & (1 << (len - 1 - j)) != 0)
                .map(|(_, &w)| bit_of(n, w))
                .sum()
        };
        let kd = 1usize << keep.len();
        let keep_off: Vec<usize> = (0..kd).map(|i| spread(i, keep)).collect();
        let rest_off: Vec<usize> = (0..1usize << rest.len())
            .map(|i| spread(i, &rest))
            .collect();
        let mut out = Matrix::zeros(kd);
        for (i, ki) in keep_off.iter().enumerate() {
            for (j, kj) in keep_off.iter().enumerate() {
                let v: C64 = rest_off
                    .iter()
                    .map(|r| self.matrix.get(ki + r, kj + r))
                    .sum();
                out.set(i, j, v);
            }
        }
        Ok(DensityMatrix::from_raw(keep.len(), out))
    }

    /// Weighted sum of density matrices on the same number of wires.
    pub fn mixture<'a, I>(num_wires: usize, parts: I) -> DensityMatrix
    where
        I: IntoIterator<Item = (f64, &'a Matrix)>,
    {
        let mut acc = Matrix::zeros(1 << num_wires);
        for (w, m) in parts {
            acc.add_assign_scaled(m, w);
        }
        DensityMatrix::from_raw(num_wires, acc)
    }
}

/// `½‖ρ − σ‖₁`, from the eigenvalues of the Hermitian difference.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, QcoreError> {
    matrix_trace_distance(rho.matrix(), sigma.matrix())
}

pub(crate) fn matrix_trace_distance(a: &Matrix, b: &Matrix) -> Result<f64, QcoreError> {
    if a.dim() != b.dim() {
        return Err(QcoreError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(0.5 * a.sub(b).hermitian_trace_norm())
}
