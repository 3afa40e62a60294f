//! The fixed gate alphabet and its exact matrices.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::fmt;
use std::str::FromStr;

use super::matrix::{Matrix, C64, I, ONE, ZERO};
use super::{QcoreError, ALGEBRAIC_TOL};

/// Named gates. `P = diag(1, i)` and `R = diag(1, e^{iπ/4})`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gate {
    I,
    X,
    Z,
    H,
    P,
    R,
    Cnot,
}

impl Gate {
    pub const ALL: [Gate; 7] = [
        Gate::I,
        Gate::X,
        Gate::Z,
        Gate::H,
        Gate::P,
        Gate::R,
        Gate::Cnot,
    ];

    pub fn arity(self) -> usize {
        match self {
            Gate::Cnot => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Gate::I => "I",
            Gate::X => "X",
            Gate::Z => "Z",
            Gate::H => "H",
            Gate::P => "P",
            Gate::R => "R",
            Gate::Cnot => "CNOT",
        }
    }

    pub fn matrix(self) -> GateMatrix {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let m = match self {
            Gate::I => Matrix::identity(2),
            Gate::X => Matrix::from_raw(2, vec![ZERO, ONE, ONE, ZERO]),
            Gate::Z => Matrix::diagonal(&[ONE, -ONE]),
            Gate::H => Matrix::from_raw(2, vec![h, h, h, -h]),
            Gate::P => Matrix::diagonal(&[ONE, I]),
            Gate::R => Matrix::diagonal(&[ONE, C64::from_polar(1.0, FRAC_PI_4)]),
            Gate::Cnot => {
                let mut m = Matrix::zeros(4);
                m.set(0, 0, ONE);
                m.set(1, 1, ONE);
                m.set(2, 3, ONE);
                m.set(3, 2, ONE);
                m
            }
        };
        GateMatrix {
            arity: self.arity(),
            matrix: m,
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Gate {
    type Err = QcoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Gate::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| QcoreError::UnknownGate(s.to_string()))
    }
}

/// A unitary on one or two wires.
#[derive(Clone, Debug, PartialEq)]
pub struct GateMatrix {
    arity: usize,
    matrix: Matrix,
}

impl GateMatrix {
    /// Wraps an arbitrary matrix, checking shape and unitarity.
    pub fn new(matrix: Matrix) -> Result<Self, QcoreError> {
        let arity = match matrix.dim() {
            2 => 1,
            4 => 2,
            other => {
                return Err(QcoreError::DimensionMismatch {
                    expected: 4,
                    found: other,
                })
            }
        };
        if !matrix.is_unitary(ALGEBRAIC_TOL) {
            return Err(QcoreError::NotUnitary);
        }
        Ok(Self { arity, matrix })
    }

    /// Wraps a matrix without the unitarity check; used for deliberately perturbed fixtures.
    pub fn new_unchecked(matrix: Matrix) -> Self {
        let arity = if matrix.dim() == 4 { 2 } else { 1 };
        Self { arity, matrix }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }
}

/// Looks a gate up by (case-insensitive) name.
pub fn standard_gate(name: &str) -> Result<GateMatrix, QcoreError> {
    name.parse::<Gate>().map(Gate::matrix)
}

/// `X^x Z^z` as a 2×2 matrix, with exponents reduced mod 2.
pub fn pauli(x: bool, z: bool) -> Matrix {
    let mut m = Matrix::identity(2);
    if z {
        m = Gate::Z.matrix().into_matrix();
    }
    if x {
        m = Gate::X.matrix().into_matrix().mul(&m);
    }
    m
}

/// `P^k` with the exponent reduced mod 4.
pub fn p_power(k: u32) -> Matrix {
    Gate::P.matrix().into_matrix().pow(k % 4)
}
