use nalgebra::DMatrix;

use crate::bsms::{BsmsDesign, JointChain};
use crate::error::{domain, Error, Result};
use crate::math::{sym_eig_signed, SymmetricMatrix};

const DETAILED_BALANCE_TOL: f64 = 1e-10;

/// `λ = min{p, 1−p} · min{α, β, 1−α, 1−β}`, the mixing constant of the
/// Hoeffding bound for BSMS joint chains.
pub fn hoeffding_lambda(design: &BsmsDesign) -> f64 {
    let (p, a, b) = (design.p, design.alpha, design.beta);
    p.min(1.0 - p) * a.min(b).min(1.0 - a).min(1.0 - b)
}

/// Smallest `n` (exclusive) for which the Hoeffding bound is defined:
/// `2‖f‖m/(λγ)` with `m = 1`.
pub fn hoeffding_threshold(chain: &JointChain, gamma: f64) -> Result<f64> {
    let design = chain
        .design
        .as_ref()
        .ok_or_else(|| Error::Domain("hoeffding bound needs a BSMS joint chain".into()))?;
    if !(gamma > 0.0) {
        return domain(format!("gamma must be positive, got {gamma}"));
    }
    Ok(2.0 * chain.f_norm() / (hoeffding_lambda(design) * gamma))
}

/// `exp(−λ²(nγ − 2‖f‖m/λ)² / (2n‖f‖²m²))` with `m = 1`.
///
/// Bounds `P{S_n/n − E f ≥ γ}`; only defined above [`hoeffding_threshold`].
pub fn hoeffding_bound(chain: &JointChain, n: usize, gamma: f64) -> Result<f64> {
    let threshold = hoeffding_threshold(chain, gamma)?;
    let nf = n as f64;
    if nf <= threshold {
        return Err(Error::Validity(format!("hoeffding bound needs n > {threshold:.3}, got {n}")));
    }
    let lam = hoeffding_lambda(chain.design.as_ref().expect("checked"));
    let norm = chain.f_norm();
    let gap = nf * gamma - 2.0 * norm / lam;
    Ok((-(lam * lam) * gap * gap / (2.0 * nf * norm * norm)).exp())
}

/// Detailed balance `π_j Π(i,j) = π_i Π(j,i)` for all pairs, within `1e-10`.
pub fn is_reversible(chain: &JointChain) -> bool {
    let (pi, t) = (&chain.stationary, &chain.transition);
    let n = chain.len();
    (0..n).all(|i| (0..n).all(|j| (pi[j] * t[(i, j)] - pi[i] * t[(j, i)]).abs() <= DETAILED_BALANCE_TOL))
}

/// Second-largest eigenvalue of a reversible chain, from the symmetric matrix
/// `D_π^{−1/2} Π D_π^{1/2}` (similar to `Π`).
pub fn second_eigenvalue(chain: &JointChain) -> Result<f64> {
    if !is_reversible(chain) {
        return domain("chain is not reversible");
    }
    let n = chain.len();
    if n < 2 {
        return Ok(0.0);
    }
    let sqrt_pi: Vec<f64> = chain.stationary.iter().map(|v| v.sqrt()).collect();
    let s = DMatrix::from_fn(n, n, |i, j| chain.transition[(i, j)] * sqrt_pi[j] / sqrt_pi[i]);
    let (values, _) = sym_eig_signed(&SymmetricMatrix::symmetric_part(&s));
    Ok(values[1])
}

/// Second-largest real part in the spectrum of `Π`, for any chain.
pub fn second_eigenvalue_general(chain: &JointChain) -> Result<f64> {
    let mut re: Vec<f64> = chain.transition.complex_eigenvalues().iter().map(|z| z.re).collect();
    if re.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("eigenvalues of the transition matrix are not finite".into()));
    }
    re.sort_by(|a, b| b.total_cmp(a));
    Ok(re.get(1).copied().unwrap_or(0.0))
}

fn spectral_form(l2: f64, n: usize, gamma: f64) -> Result<f64> {
    if n == 0 || !(gamma > 0.0) {
        return domain("reversible bound needs n >= 1 and gamma > 0");
    }
    let l0 = l2.max(0.0);
    Ok((-2.0 * (1.0 - l0) / (1.0 + l0) * n as f64 * gamma * gamma).exp())
}

/// `exp(−2 (1−λ₀)/(1+λ₀) n γ²)` with `λ₀ = max(0, λ₂)`, for reversible chains.
pub fn reversible_bound(chain: &JointChain, n: usize, gamma: f64) -> Result<f64> {
    spectral_form(second_eigenvalue(chain)?, n, gamma)
}

/// The same expression evaluated with `λ₂` from the general spectrum,
/// without the reversibility check.
///
/// Only a proven bound when [`is_reversible`] holds. BSMS joint chains with
/// `p ≠ ½` fail detailed balance, so for them this is a reference curve, not
/// a guarantee.
pub fn spectral_bound_unchecked(chain: &JointChain, n: usize, gamma: f64) -> Result<f64> {
    spectral_form(second_eigenvalue_general(chain)?, n, gamma)
}
