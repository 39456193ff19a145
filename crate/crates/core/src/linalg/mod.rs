//! Dense and sparse complex linear algebra: Hermitian eigensolvers, unitary exponentials
//! and the structured Hamiltonian type shared by the rest of the crate.

mod dense;
mod hamiltonian;
mod jacobi;
mod lanczos;
mod sparse;
mod state;
mod tridiag;

use thiserror::Error;

pub use dense::DenseMatrix;
pub use hamiltonian::{Direction, Hamiltonian, RankOne};
pub use jacobi::hermitian_eig;
pub use lanczos::{lanczos_lowest, LinearOperator};
pub use sparse::SparseHermitian;
pub use state::StateVector;

pub type C64 = num_complex::Complex64;

/// Environment variable overriding [`EigenSettings::dense_max`].
pub const DENSE_MAX_ENV: &str = "AEQS_DENSE_MAX";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not Hermitian (max asymmetry {max_asymmetry:.3e})")]
    NotHermitian { max_asymmetry: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("Lanczos did not converge after {iterations} iterations (best residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("dimension {dim} exceeds the dense limit {limit}")]
    CapacityExceeded { dim: usize, limit: usize },
    #[error("requested {requested} eigenpairs from a {dim}-dimensional operator")]
    TooManyEigenpairs { requested: usize, dim: usize },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
}

/// Tolerances and limits for the eigensolvers.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSettings {
    /// Largest dimension handled by dense Jacobi.
    pub dense_max: usize,
    /// Largest `|A - A^dagger|` entry accepted as Hermitian.
    pub hermitian_tol: f64,
    /// Jacobi stops once the off-diagonal Frobenius mass is below this times `||H||_F`.
    pub jacobi_rel_tol: f64,
    pub jacobi_max_sweeps: usize,
    pub lanczos_max_iter: usize,
    pub lanczos_seed: u64,
    /// Accepted Lanczos residual, relative to `max(1, ||H||)`.
    pub lanczos_residual_tol: f64,
    /// Eigenvalues closer than this belong to one cluster.
    pub degeneracy_tol: f64,
}

impl Default for EigenSettings {
    fn default() -> Self {
        Self {
            dense_max: 2048,
            hermitian_tol: 1e-10,
            jacobi_rel_tol: 1e-12,
            jacobi_max_sweeps: 60,
            lanczos_max_iter: 800,
            lanczos_seed: 0x5EED,
            lanczos_residual_tol: 1e-7,
            degeneracy_tol: 1e-9,
        }
    }
}

impl EigenSettings {
    /// Defaults with the dense limit taken from `AEQS_DENSE_MAX` when set and valid.
    pub fn from_env() -> Self {
        let mut s = Self::default();
        if let Some(v) = std::env::var(DENSE_MAX_ENV).ok().and_then(|v| v.trim().parse().ok()) {
            s.dense_max = v;
        }
        s
    }
}

/// Eigenvalues in ascending order with one unit eigenvector each.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: Vec<StateVector>,
}

impl Eigenpairs {
    /// Number of leading eigenvalues within `tol` of the lowest one.
    pub fn ground_multiplicity(&self, tol: f64) -> usize {
        match self.values.first() {
            None => 0,
            Some(&g) => self.values.iter().take_while(|&&v| v - g <= tol).count(),
        }
    }

    /// Eigenvectors as the columns of a matrix.
    pub fn vector_matrix(&self) -> DenseMatrix {
        let n = self.vectors.first().map_or(0, StateVector::dim);
        DenseMatrix::from_fn(n, self.vectors.len(), |r, c| self.vectors[c].amplitudes()[r])
    }
}

/// `exp(-i theta H)` through the spectral decomposition of `H`.
pub fn unitary_exp(h: &DenseMatrix, theta: f64, settings: &EigenSettings) -> Result<DenseMatrix, LinalgError> {
    if theta == 0.0 {
        if !h.is_square() {
            return Err(LinalgError::NotSquare { rows: h.rows(), cols: h.cols() });
        }
        return Ok(DenseMatrix::identity(h.rows()));
    }
    let eig = hermitian_eig(h, settings)?;
    Ok(spectral_function(&eig, |lambda| C64::from_polar(1.0, -theta * lambda)))
}

/// `sum_k f(lambda_k) |v_k><v_k|`.
pub fn spectral_function(eig: &Eigenpairs, f: impl Fn(f64) -> C64) -> DenseMatrix {
    let n = eig.vectors.first().map_or(0, StateVector::dim);
    let p = eig.vector_matrix();
    let scaled = DenseMatrix::from_fn(n, eig.values.len(), |r, c| p[(r, c)] * f(eig.values[c]));
    scaled.matmul(&p.adjoint()).expect("shapes agree")
}

/// Largest singular value, `sqrt(lambda_max(A^dagger A))`.
pub fn spectral_norm(a: &DenseMatrix, settings: &EigenSettings) -> Result<f64, LinalgError> {
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(0.0);
    }
    let gram = a.adjoint().matmul(a)?;
    let sym = DenseMatrix::from_fn(gram.rows(), gram.cols(), |r, c| (gram[(r, c)] + gram[(c, r)].conj()) * 0.5);
    let eig = hermitian_eig(&sym, settings)?;
    Ok(eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

/// Kronecker product `A (x) B`.
pub fn tensor(a: &DenseMatrix, b: &DenseMatrix, settings: &EigenSettings) -> Result<DenseMatrix, LinalgError> {
    let rows = a.rows() * b.rows();
    let cols = a.cols() * b.cols();
    if rows > settings.dense_max || cols > settings.dense_max {
        return Err(LinalgError::CapacityExceeded { dim: rows.max(cols), limit: settings.dense_max });
    }
    Ok(DenseMatrix::from_fn(rows, cols, |r, c| {
        a[(r / b.rows(), c / b.cols())] * b[(r % b.rows(), c % b.cols())]
    }))
}

/// `W^{(x) k}` with `W` the normalised 2x2 Hadamard matrix.
pub fn hadamard_power(k: u32, settings: &EigenSettings) -> Result<DenseMatrix, LinalgError> {
    let n = 1usize.checked_shl(k).unwrap_or(usize::MAX);
    if k >= usize::BITS || n > settings.dense_max {
        return Err(LinalgError::CapacityExceeded { dim: n, limit: settings.dense_max });
    }
    let s = 1.0 / (n as f64).sqrt();
    Ok(DenseMatrix::from_fn(n, n, |r, c| {
        let sign = if (r & c).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        C64::new(sign * s, 0.0)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hadamard_is_an_involution() {
        let s = EigenSettings::default();
        let w = hadamard_power(3, &s).unwrap();
        assert!(w.matmul(&w).unwrap().max_diff(&DenseMatrix::identity(8)) < 1e-14);
    }

    #[test]
    fn hadamard_over_limit_is_an_error() {
        let s = EigenSettings { dense_max: 4, ..EigenSettings::default() };
        assert!(hadamard_power(3, &s).is_err());
    }

    #[test]
    fn exp_of_zero_angle_is_identity() {
        let h = DenseMatrix::from_real_diagonal(&[1.0, 2.0, 3.0]);
        let u = unitary_exp(&h, 0.0, &EigenSettings::default()).unwrap();
        assert_eq!(u, DenseMatrix::identity(3));
    }

    #[test]
    fn exp_of_pauli_x() {
        // exp(-i t X) = cos t I - i sin t X.
        let x = DenseMatrix::from_rows(vec![
            vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        ])
        .unwrap();
        let t = 0.7f64;
        let u = unitary_exp(&x, t, &EigenSettings::default()).unwrap();
        assert!((u[(0, 0)] - C64::new(t.cos(), 0.0)).norm() < 1e-12);
        assert!((u[(0, 1)] - C64::new(0.0, -t.sin())).norm() < 1e-12);
    }

    #[test]
    fn spectral_norm_of_rank_one() {
        let a = DenseMatrix::from_fn(3, 3, |_, _| C64::new(1.0, 0.0));
        assert!((spectral_norm(&a, &EigenSettings::default()).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_shape_and_entries() {
        let a = DenseMatrix::from_real_diagonal(&[1.0, 2.0]);
        let b = DenseMatrix::from_fn(2, 2, |r, c| C64::new((r * 2 + c) as f64, 0.0));
        let t = tensor(&a, &b, &EigenSettings::default()).unwrap();
        assert_eq!(t[(3, 2)], C64::new(4.0, 0.0));
        assert_eq!(t[(0, 3)], C64::new(0.0, 0.0));
    }
}
