use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{m_param, rna_bsms};
use crate::error::{domain, Result};
use crate::math::binary_entropy_unchecked as h;

/// Classical RDF reference for BSMS(p): `H(p) − H(D)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrayBound {
    /// `max(H(p) − H(D), 0)` in bits.
    pub rate: f64,
    /// True for `D ≤ D_c`, where the value equals the classical RDF;
    /// otherwise it is only a lower bound.
    pub is_exact: bool,
    pub critical_distortion: f64,
}

/// `D_c = ½(1 − √(1 − (p/(1−p))²))`, for `0 < p ≤ 1/2`.
pub fn gray_critical_distortion(p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 0.5) {
        return domain(format!("Gray bound needs 0 < p <= 1/2, got {p}"));
    }
    let ratio = p / (1.0 - p);
    Ok(0.5 * (1.0 - (1.0 - ratio * ratio).max(0.0).sqrt()))
}

pub fn classical_gray(p: f64, d: f64) -> Result<GrayBound> {
    let critical_distortion = gray_critical_distortion(p)?;
    if !(d >= 0.0) {
        return domain(format!("distortion must be nonnegative, got {d}"));
    }
    let rate = if d >= 0.5 { 0.0 } else { (h(p) - h(d)).max(0.0) };
    Ok(GrayBound { rate, is_exact: d <= critical_distortion, critical_distortion })
}

/// Upper bound on `R^na(D) − R(D)` for BSMS(p), `0 ≤ p, D ≤ 1/2`.
pub fn rate_loss_bound(p: f64, d: f64) -> f64 {
    let m = m_param(p, d);
    if d <= p {
        h(m) - h(p)
    } else {
        h(m) - h(d)
    }
}

/// Location and value of a rate-loss maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateLossPeak {
    pub p: f64,
    pub d: f64,
    pub rate_loss: f64,
}

const GRID_STEP: f64 = 1e-3;
const REFINE_TOL: f64 = 1e-9;

fn grid(n: usize) -> impl Iterator<Item = f64> + Clone {
    (0..=n).map(|i| (i as f64 * GRID_STEP).min(0.5))
}

fn better(a: RateLossPeak, b: RateLossPeak) -> RateLossPeak {
    // larger value wins; ties go to the lexicographically smaller (p, D)
    if b.rate_loss > a.rate_loss
        || (b.rate_loss == a.rate_loss && (b.p, b.d) < (a.p, a.d))
    {
        b
    } else {
        a
    }
}

/// Compass search from `start`, moving along `dirs` within `[0, 1/2]²`.
fn pattern_search(start: RateLossPeak, dirs: &[(f64, f64)]) -> RateLossPeak {
    let mut best = start;
    let mut step = GRID_STEP;
    while step > REFINE_TOL {
        let mut moved = false;
        for &(dp, dd) in dirs {
            for sign in [1.0, -1.0] {
                let p = best.p + sign * step * dp;
                let d = best.d + sign * step * dd;
                if !(0.0..=0.5).contains(&p) || !(0.0..=0.5).contains(&d) {
                    continue;
                }
                let cand = RateLossPeak { p, d, rate_loss: rate_loss_bound(p, d) };
                if cand.rate_loss > best.rate_loss {
                    best = cand;
                    moved = true;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    best
}

/// Global maximum of [`rate_loss_bound`] over `p, D ∈ [0, 1/2]`.
///
/// A `1e-3` grid (rows evaluated in parallel, deterministic reduction) seeds a
/// compass search that includes the diagonal directions, since the maximum
/// sits on the kink `D = p`.
pub fn max_rate_loss() -> RateLossPeak {
    let n = (0.5 / GRID_STEP).round() as usize;
    let seed = (0..=n)
        .into_par_iter()
        .map(|i| {
            let p = (i as f64 * GRID_STEP).min(0.5);
            grid(n)
                .map(|d| RateLossPeak { p, d, rate_loss: rate_loss_bound(p, d) })
                .reduce(better)
                .expect("grid is non-empty")
        })
        .collect::<Vec<_>>()
        .into_iter()
        .reduce(better)
        .expect("grid is non-empty");
    pattern_search(seed, &[(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, -1.0)])
}

/// Maximum over `D ∈ [0, 1/2]` at fixed `p`.
pub fn max_rate_loss_at_p(p: f64) -> RateLossPeak {
    let n = (0.5 / GRID_STEP).round() as usize;
    let seed = grid(n)
        .map(|d| RateLossPeak { p, d, rate_loss: rate_loss_bound(p, d) })
        .reduce(better)
        .expect("grid is non-empty");
    pattern_search(seed, &[(0.0, 1.0)])
}

/// Maximum over `p ∈ [0, 1/2]` at fixed `D`.
pub fn max_rate_loss_at_d(d: f64) -> RateLossPeak {
    let n = (0.5 / GRID_STEP).round() as usize;
    let seed = grid(n)
        .map(|p| RateLossPeak { p, d, rate_loss: rate_loss_bound(p, d) })
        .reduce(better)
        .expect("grid is non-empty");
    pattern_search(seed, &[(1.0, 0.0)])
}

/// Convenience: `R^na(D) − H(p) + H(D)` is the exact rate loss where Gray's
/// formula is exact.
pub fn exact_rate_loss(p: f64, d: f64) -> Result<Option<f64>> {
    let gray = classical_gray(p, d)?;
    gray.is_exact.then(|| rna_bsms(p, d).map(|r| r - gray.rate)).transpose()
}
