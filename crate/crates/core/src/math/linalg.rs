use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;

/// Eigenvalues of a symmetric positive semidefinite matrix, sorted descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return domain("spectrum entries must be finite and nonnegative");
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Dense real symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(DMatrix<f64>);

impl SymmetricMatrix {
    /// Wraps `m`, checking squareness, finiteness and symmetry (relative `1e-12`).
    /// The stored matrix is the exact symmetric part of `m`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return domain("symmetric matrix must be square and non-empty");
        }
        if m.iter().any(|v| !v.is_finite()) {
            return domain("symmetric matrix has non-finite entries");
        }
        let scale = m.amax().max(f64::MIN_POSITIVE);
        let asym = (&m - m.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return domain(format!("matrix is not symmetric (max asymmetry {asym:e})"));
        }
        Ok(Self(symmetrize(&m)))
    }

    /// Wraps the symmetric part of `m` without a tolerance check.
    pub fn symmetric_part(m: &DMatrix<f64>) -> Self {
        Self(symmetrize(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigendecomposition `M = Eᵗ diag(λ) E` with eigenvalues descending.
///
/// Rows of the returned `E` are orthonormal eigenvectors. Each row is signed so
/// that its first component with magnitude above `1e-12` is positive, which
/// makes the factorization deterministic. Slightly negative eigenvalues from
/// roundoff (above `-1e-12‖M‖`) are clamped to zero so the result is a
/// [`Spectrum`]; anything more negative is a domain error.
pub fn sym_eig(m: &SymmetricMatrix) -> Result<(Spectrum, DMatrix<f64>)> {
    let (values, e) = sym_eig_signed(m);
    let scale = m.as_matrix().amax().max(f64::MIN_POSITIVE);
    if values.iter().any(|&v| v < -1e-12 * scale) {
        return domain("matrix is not positive semidefinite");
    }
    let spectrum = Spectrum(values.into_iter().map(|v| v.max(0.0)).collect());
    Ok((spectrum, e))
}

/// Like [`sym_eig`] but allows negative eigenvalues (returned unclamped).
pub(crate) fn sym_eig_signed(m: &SymmetricMatrix) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.dim();
    let eig = m.as_matrix().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut e = DMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (row, &k) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        let sign = v
            .iter()
            .find(|x| x.abs() > 1e-12)
            .map_or(1.0, |x| x.signum());
        for j in 0..n {
            e[(row, j)] = sign * v[j];
        }
        values.push(eig.eigenvalues[k]);
    }
    (values, e)
}

/// Moore-Penrose pseudo-inverse of a symmetric matrix; eigenvalues below
/// `rel_tol · max|λ|` are treated as zero.
pub fn pseudo_inverse_sym(m: &SymmetricMatrix, rel_tol: f64) -> DMatrix<f64> {
    let (values, e) = sym_eig_signed(m);
    let cutoff = rel_tol * values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let inv = DVector::from_iterator(
        values.len(),
        values
            .iter()
            .map(|&v| if v.abs() > cutoff && v != 0.0 { 1.0 / v } else { 0.0 }),
    );
    e.transpose() * DMatrix::from_diagonal(&inv) * e
}

/// Spectral radius of a general square matrix.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    if !m.is_square() {
        return domain("spectral radius needs a square matrix");
    }
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite matrix entries".into()));
    }
    let radius = m
        .complex_eigenvalues()
        .iter()
        .fold(0.0f64, |acc, z| acc.max(z.norm()));
    Ok(radius)
}

/// Solves the discrete Lyapunov equation `P = A P Aᵗ + W` by vectorization.
///
/// Requires `ρ(A) < 1`. Dimensions here are small (≤ 8), so the dense
/// `n² × n²` Kronecker system is cheap.
pub fn lyapunov_discrete(a: &DMatrix<f64>, w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if !a.is_square() || w.shape() != (n, n) {
        return domain("lyapunov: dimension mismatch");
    }
    if spectral_radius(a)? >= 1.0 {
        return Err(Error::Numeric("lyapunov: A is not Schur stable".into()));
    }
    let kron = a.kronecker(a);
    let lhs = DMatrix::<f64>::identity(n * n, n * n) - kron;
    // column-major vec, consistent with nalgebra storage and vec(AXB) = (Bᵗ⊗A)vec(X)
    let rhs = DVector::from_column_slice(w.as_slice());
    let sol = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numeric("lyapunov: singular system".into()))?;
    let p = DMatrix::from_column_slice(n, n, sol.as_slice());
    Ok(symmetrize(&p))
}
