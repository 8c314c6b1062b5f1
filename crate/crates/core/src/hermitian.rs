//! One discrete time step `U = exp(-i theta H)` from a Hermitian generator.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

use crate::gate::{GateDef, GateError};

pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
pub const MAX_GENERATOR_QUBITS: usize = 4;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum HermitianError {
    #[error("generator is {rows}x{cols}, not square")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension {0} is not a power of two up to 2^4")]
    Dimension(usize),
    #[error("generator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("generator has non-finite entries")]
    NonFinite,
    #[error(transparent)]
    Gate(#[from] GateError),
}

/// `exp(-i theta hm)` by eigendecomposition. `theta = 0` gives the exact
/// identity.
pub fn unitary_from_hermitian(hm: &DMatrix<Complex64>, theta: f64) -> Result<DMatrix<Complex64>, HermitianError> {
    let (r, c) = hm.shape();
    if r != c {
        return Err(HermitianError::NotSquare { rows: r, cols: c });
    }
    if !r.is_power_of_two() || r > 1 << MAX_GENERATOR_QUBITS {
        return Err(HermitianError::Dimension(r));
    }
    if hm.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) || !theta.is_finite() {
        return Err(HermitianError::NonFinite);
    }
    let mut dev = 0.0f64;
    for i in 0..r {
        for j in 0..r {
            dev = dev.max((hm[(i, j)] - hm[(j, i)].conj()).norm());
        }
    }
    if dev > HERMITIAN_TOLERANCE {
        return Err(HermitianError::NotHermitian(dev));
    }
    if theta == 0.0 {
        return Ok(DMatrix::identity(r, r));
    }
    let eig = SymmetricEigen::new(hm.clone());
    let v = &eig.eigenvectors;
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -theta * l)));
    Ok(v * phases * v.adjoint())
}

/// The step as a matrix gate (outputs then inputs).
pub fn hermitian_gate(name: impl Into<String>, hm: &DMatrix<Complex64>, theta: f64) -> Result<GateDef, HermitianError> {
    let u = unitary_from_hermitian(hm, theta)?;
    let k = u.nrows().trailing_zeros() as usize;
    let rows: Vec<Vec<Complex64>> = (0..u.nrows()).map(|i| u.row(i).iter().copied().collect()).collect();
    Ok(GateDef::from_matrix(name, k, &rows, 0)?)
}
