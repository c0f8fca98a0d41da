//! Matched zero-delay joint source-channel coding over AWGN channels.
//!
//! A design is *matched* when the channel capacity at the chosen power equals
//! `R^na(D)` and the symbol-by-symbol encoder/decoder achieve `D` exactly.
//! The scalar designs ([`design_feedback_scalar`],
//! [`design_nofeedback_scalar`], [`design_iid`]) and the vector realization
//! driven by a [`RealizationSolution`](crate::gauss::RealizationSolution) are
//! verified here by Monte Carlo.

mod scalar;
mod sk;
mod vector;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::gauss::RealizationSolution;
use crate::math::bisect_monotone;

pub use crate::math::Estimate;
pub use scalar::{
    design_feedback_scalar, design_iid, design_nofeedback_scalar, scalar_trace, simulate_scalar,
    JsccMode, JsccScalarDesign, ScalarTrace, SimulationReport,
};
pub use sk::{schalkwijk_kailath, SkReport};
pub use vector::{simulate_vector, VectorReport};
pub(crate) use vector::{RealizationLoop, VecStep};

/// Shards for time-series simulations; each shard runs its own burn-in.
pub(crate) const STEPS_PER_SHARD: usize = 1 << 17;

/// `C = ½ log₂(1 + P/σ²)` of a scalar AWGN channel.
pub fn awgn_capacity(power: f64, noise_var: f64) -> f64 {
    0.5 * (1.0 + power / noise_var).log2()
}

/// Capacity-achieving power split over parallel Gaussian channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityAllocation {
    /// Bits per channel use.
    pub capacity: f64,
    /// Water level `ν`.
    pub nu: f64,
    pub allocation: Vec<f64>,
}

/// Water-filling `P*_i = max(0, ν − q_i)` with `Σ P*_i = P`.
pub fn capacity_waterfill(q: &[f64], power: f64) -> Result<CapacityAllocation> {
    if q.is_empty() || q.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return domain("noise variances must be positive and finite");
    }
    if !(power >= 0.0) || !power.is_finite() {
        return domain(format!("power must be nonnegative, got {power}"));
    }
    let qmin = q.iter().copied().fold(f64::INFINITY, f64::min);
    if power == 0.0 {
        return Ok(CapacityAllocation { capacity: 0.0, nu: qmin, allocation: vec![0.0; q.len()] });
    }
    let used = |nu: f64| q.iter().map(|&qi| (nu - qi).max(0.0)).sum::<f64>() - power;
    let hi = 2.0 * (q.iter().copied().fold(0.0, f64::max) + power);
    let nu = bisect_monotone(used, qmin, hi, 1e-15 * hi)?;
    // closed-form level on the active set
    let active: Vec<&f64> = q.iter().filter(|&&qi| qi < nu).collect();
    let nu = (power + active.iter().copied().sum::<f64>()) / active.len().max(1) as f64;
    let allocation: Vec<f64> = q.iter().map(|&qi| (nu - qi).max(0.0)).collect();
    let capacity = q.iter().zip(&allocation).map(|(&qi, &pi)| awgn_capacity(pi, qi)).sum();
    Ok(CapacityAllocation { capacity, nu, allocation })
}

/// Channel power that realizes a Gaussian solution over its channel noise `Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerMatch {
    pub total: f64,
    /// `P*_i = q_i (λ_i/δ_i − 1)`.
    pub per_channel: Vec<f64>,
    /// `½ Σ log₂(1 + P*_i/q_i)`; equals the solution's rate identically.
    pub matched_capacity: f64,
    /// Capacity of the same channels when `total` is water-filled.
    pub waterfill_capacity: f64,
    /// Whether the matched split is itself the water-filling split, i.e. the
    /// channel is used at capacity.
    pub is_waterfilling: bool,
}

/// Power allocation induced by a realization's encoder gains.
///
/// The split follows the distortion allocation, so over an arbitrary `Q` it
/// is in general *not* the water-filling split and `waterfill_capacity`
/// exceeds the rate. Choosing `Q` from [`matched_channel_noise`] makes the two
/// coincide.
pub fn match_power(solution: &RealizationSolution) -> Result<PowerMatch> {
    let per_channel = solution.channel_powers();
    let total: f64 = per_channel.iter().sum();
    let matched_capacity = per_channel
        .iter()
        .zip(&solution.q)
        .map(|(&pi, &qi)| awgn_capacity(pi, qi))
        .sum();
    let wf = capacity_waterfill(&solution.q, total)?;
    let scale = total.max(1e-300);
    let is_waterfilling = wf
        .allocation
        .iter()
        .zip(&per_channel)
        .all(|(a, b)| (a - b).abs() <= 1e-9 * scale);
    Ok(PowerMatch {
        total,
        per_channel,
        matched_capacity,
        waterfill_capacity: wf.capacity,
        is_waterfilling,
    })
}

/// Channel-noise diagonal `q_i = δ_i/λ_i` under which the matched power split
/// is exactly water-filling (level 1).
pub fn matched_channel_noise(solution: &RealizationSolution) -> Vec<f64> {
    solution
        .spectrum
        .values()
        .iter()
        .zip(&solution.delta)
        .map(|(&l, &d)| if l > 0.0 { (d / l).clamp(f64::MIN_POSITIVE, 1.0) } else { 1.0 })
        .collect()
}
