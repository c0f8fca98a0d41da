//! Binary symmetric Markov source BSMS(p) with single-letter Hamming distortion.
//!
//! The source flips its state with probability `p` per step. Its
//! nonanticipative RDF is `H(m) − H(D)` with `m = 1 − p − D + 2pD` for
//! `D ≤ 1/2`, achieved by a reproduction kernel `Q*(y | y', x)` that depends
//! on the previous reproduction `y'` and the current source symbol `x` only.

mod bounds;
mod chain;

pub use bounds::{
    classical_gray, exact_rate_loss, gray_critical_distortion, max_rate_loss, max_rate_loss_at_d,
    max_rate_loss_at_p, rate_loss_bound, GrayBound, RateLossPeak,
};
pub use chain::{directed_info_rate, joint_chain, verify_tilted_form, JointChain, TiltedFormCheck};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::math::binary_entropy_unchecked as h;

/// Largest Hamming distortion with positive rate.
pub const DMAX: f64 = 0.5;

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("BSMS transition probability must lie in (0, 1), got {p}"));
    }
    Ok(())
}

/// `m = 1 − p − D + 2pD`.
#[inline]
pub fn m_param(p: f64, d: f64) -> f64 {
    1.0 - p - d + 2.0 * p * d
}

/// Nonanticipative RDF of BSMS(p) in bits/sample.
///
/// `D = 0` returns the limit value `H(p)` (the entropy rate); `D > 1/2` gives 0.
pub fn rna_bsms(p: f64, d: f64) -> Result<f64> {
    check_p(p)?;
    if !(d >= 0.0) {
        return domain(format!("distortion must be nonnegative, got {d}"));
    }
    if d > DMAX {
        return Ok(0.0);
    }
    Ok((h(m_param(p, d)) - h(d)).max(0.0))
}

/// `D_max` for BSMS(p): rate is zero for all `D ≥ 1/2`.
pub fn dmax_bsms(p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(DMAX)
}

/// Optimal stationary design at `(p, D)`: kernel parameters `α`, `β` and rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BsmsDesign {
    pub p: f64,
    pub d: f64,
    pub m: f64,
    pub alpha: f64,
    pub beta: f64,
    pub rate: f64,
}

impl BsmsDesign {
    /// `Q*(y | y_prev, x)`.
    ///
    /// Columns `(y_prev, x) = (0,0), (0,1), (1,0), (1,1)` reproduce `0` with
    /// probabilities `α, 1 − β, β, 1 − α`.
    pub fn kernel(&self, y: u8, y_prev: u8, x: u8) -> f64 {
        let p_zero = match (y_prev, x) {
            (0, 0) => self.alpha,
            (0, _) => 1.0 - self.beta,
            (_, 0) => self.beta,
            _ => 1.0 - self.alpha,
        };
        if y == 0 {
            p_zero
        } else {
            1.0 - p_zero
        }
    }

    /// Marginal reproduction kernel `P*(y | y_prev)`: the source kernel.
    pub fn marginal_kernel(&self, y: u8, y_prev: u8) -> f64 {
        source_kernel(self.p, y, y_prev)
    }
}

/// `P(x | x_prev)` of BSMS(p).
#[inline]
pub fn source_kernel(p: f64, x: u8, x_prev: u8) -> f64 {
    if x == x_prev {
        1.0 - p
    } else {
        p
    }
}

/// Builds the optimal reproduction design for `0 < p < 1`, `0 < D < 1/2`.
pub fn optimal_reproduction(p: f64, d: f64) -> Result<BsmsDesign> {
    check_p(p)?;
    if !(d > 0.0 && d < DMAX) {
        return Err(Error::DegenerateDesign(format!(
            "optimal kernel needs 0 < D < 1/2, got {d}"
        )));
    }
    let m = m_param(p, d);
    let alpha = (1.0 - p) * (1.0 - d) / m;
    let beta = p * (1.0 - d) / (p + d - 2.0 * p * d);
    Ok(BsmsDesign { p, d, m, alpha, beta, rate: rna_bsms(p, d)? })
}
