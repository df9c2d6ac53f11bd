//! Finite-dimensional quantum states and channels.
//!
//! Everything here works on dense complex matrices and reports information
//! quantities in bits. States are validated on construction, so any
//! [`DensityMatrix`] in hand is Hermitian, unit-trace and positive
//! semidefinite up to [`VALIDATION_TOL`].

mod channel;
mod info;
mod state;

pub use channel::{apply_kraus, isometric_extension, Isometry, KrausChannel};
pub use info::{
    coherent_information, mutual_information, private_information, symmetric_cq_capacity,
    BinaryCqChannel, CapacityReport,
};
pub use state::{shannon_entropy_bits, trace_out, von_neumann_entropy, DensityMatrix};

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Tolerance for state and channel validation.
pub const VALIDATION_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("trace {0:.12} differs from 1")]
    BadTrace(f64),
    #[error("negative eigenvalue {0:.3e}")]
    NegativeEigenvalue(f64),
    #[error("Kraus set is not complete (max deviation of sum K^dag K from I is {0:.3e})")]
    Incomplete(f64),
    #[error("empty Kraus set")]
    EmptyKraus,
    #[error("Kraus operators have inconsistent shapes")]
    ShapeMismatch,
    #[error("isometry check failed: {0}")]
    NotIsometry(String),
    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystem(String),
    #[error("parameter {name} = {value} outside {range}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionOverflow { dim: usize, cap: usize },
}

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Kronecker product of two complex matrices.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Row-major `[re, im]` JSON encoding used for debugging output.
pub fn matrix_to_json(m: &CMatrix) -> serde_json::Value {
    let rows: Vec<serde_json::Value> = (0..m.nrows())
        .map(|i| {
            serde_json::Value::Array(
                (0..m.ncols())
                    .map(|j| serde_json::json!([m[(i, j)].re, m[(i, j)].im]))
                    .collect(),
            )
        })
        .collect();
    serde_json::Value::Array(rows)
}

/// Inverse of [`matrix_to_json`].
pub fn matrix_from_json(v: &serde_json::Value) -> Option<CMatrix> {
    let rows = v.as_array()?;
    let nrows = rows.len();
    let ncols = rows.first()?.as_array()?.len();
    let mut m = CMatrix::zeros(nrows, ncols);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array()?;
        if row.len() != ncols {
            return None;
        }
        for (j, entry) in row.iter().enumerate() {
            let pair = entry.as_array()?;
            m[(i, j)] = C64::new(pair.first()?.as_f64()?, pair.get(1)?.as_f64()?);
        }
    }
    Some(m)
}
