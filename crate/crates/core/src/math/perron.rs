use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Error, Result};

const MAX_ITER: usize = 1_000_000;
const REL_TOL: f64 = 1e-12;

/// True when the directed graph of positive entries is strongly connected.
pub fn is_irreducible(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    if n == 0 || !m.is_square() {
        return false;
    }
    let reach_from = |start: usize, forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let w = if forward { m[(j, i)] } else { m[(i, j)] };
                if w > 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach_from(0, true) && reach_from(0, false)
}

/// Perron-Frobenius eigenvalue (spectral radius) of a nonnegative irreducible matrix.
///
/// Power iteration runs on `M + sI` with `s > 0`, which is primitive even when
/// `M` is periodic; convergence is declared when the Collatz-Wielandt bounds
/// `min (Mx)_i/x_i ≤ ρ ≤ max (Mx)_i/x_i` agree to relative `1e-12`.
pub fn perron_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    perron_pair(m).map(|(rho, _)| rho)
}

/// Perron root together with its positive right eigenvector (unit sum).
pub fn perron_pair(m: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    if !m.is_square() || m.nrows() == 0 {
        return domain("perron eigenvalue needs a non-empty square matrix");
    }
    if m.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return domain("perron eigenvalue needs finite nonnegative entries");
    }
    if !is_irreducible(m) {
        return domain("matrix is reducible");
    }
    let n = m.nrows();
    let shift = 0.5 * m.row_sum().max().max(m.column_sum().max());
    let shifted = m + DMatrix::<f64>::identity(n, n) * shift;
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut gap = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let y = &shifted * &x;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let ratio = y[i] / x[i];
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        gap = (hi - lo) / hi;
        let norm = y.sum();
        x = y / norm;
        if gap <= REL_TOL {
            return Ok((0.5 * (lo + hi) - shift, x));
        }
        if x.iter().any(|v| *v <= 0.0 || !v.is_finite()) {
            return Err(Error::Numeric("perron iterate lost positivity".into()));
        }
    }
    Err(Error::NonConvergence { iterations: MAX_ITER, residual: gap })
}
