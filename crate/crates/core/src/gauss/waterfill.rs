use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::math::{bisect_monotone, Spectrum};

/// Reverse water-filling allocation `δ_i = min(ξ, λ_i)` with `Σ δ_i = D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterFill {
    pub xi: f64,
    pub delta: Vec<f64>,
    /// `D ≥ Σλ`: every coordinate saturated (`δ = λ`), rate zero.
    pub saturated: bool,
}

impl WaterFill {
    /// `½ Σ log₂(λ_i / δ_i)` over coordinates with `δ_i < λ_i`.
    pub fn rate(&self, spectrum: &Spectrum) -> f64 {
        spectrum
            .values()
            .iter()
            .zip(&self.delta)
            .filter(|(l, d)| *d < *l)
            .map(|(l, d)| 0.5 * (l / d).log2())
            .sum()
    }
}

/// Distributes distortion `D > 0` over the spectrum by reverse water-filling.
///
/// The active set is located by bisection on the water level; the level is
/// then recomputed in closed form from that set so `Σ δ_i = D` holds to
/// roundoff. Ties `ξ = λ_i` count as saturated.
pub fn reverse_waterfill(spectrum: &Spectrum, d: f64) -> Result<WaterFill> {
    if !(d > 0.0) || !d.is_finite() {
        return domain(format!("distortion must be positive and finite, got {d}"));
    }
    let lambda = spectrum.values();
    let total = spectrum.total();
    if d >= total {
        return Ok(WaterFill {
            xi: lambda.first().copied().unwrap_or(0.0),
            delta: lambda.to_vec(),
            saturated: true,
        });
    }
    let filled = |xi: f64| lambda.iter().map(|&l| xi.min(l)).sum::<f64>() - d;
    let level = bisect_monotone(filled, 0.0, lambda[0], 1e-15 * total)?;
    // closed-form level from the active set {λ_i > ξ}
    let mut active: Vec<bool> = lambda.iter().map(|&l| l > level).collect();
    let xi = loop {
        let inactive_sum: f64 = lambda.iter().zip(&active).filter(|(_, a)| !**a).map(|(l, _)| l).sum();
        let count = active.iter().filter(|a| **a).count().max(1);
        let xi = (d - inactive_sum) / count as f64;
        // shrink the active set if the level crossed an eigenvalue
        let mut changed = false;
        for (l, a) in lambda.iter().zip(active.iter_mut()) {
            if *a && *l <= xi {
                *a = false;
                changed = true;
            }
        }
        if !changed {
            break xi;
        }
    };
    let delta = lambda
        .iter()
        .zip(&active)
        .map(|(&l, &a)| if a { xi } else { l })
        .collect();
    Ok(WaterFill { xi, delta, saturated: false })
}
