use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bsms::JointChain;
use crate::error::{domain, Error, Result};
use crate::math::{maximize_concave_1d, perron_pair};

/// Tilts searched for the supremum in the rate function.
pub const LAMBDA_RANGE: (f64, f64) = (-50.0, 50.0);
const LAMBDA_TOL: f64 = 1e-9;

/// `I(θ)` in nats with its maximizing tilt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub theta: f64,
    pub value: f64,
    pub lambda_star: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFunctionCurve {
    pub thetas: Vec<f64>,
    pub values: Vec<f64>,
    pub lambda_star: Vec<f64>,
}

/// Row-tilted matrix `Π_λ(j, i) = Π(j, i) e^{λ(f(j) − c)}` with `c` the label
/// extreme on the side of `λ`, so entries stay bounded; returns it with `c`.
pub(crate) fn tilted(chain: &JointChain, lambda: f64) -> (DMatrix<f64>, f64) {
    let shift = if lambda >= 0.0 {
        chain.f.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    } else {
        chain.f.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let mut m = chain.transition.clone();
    for (j, mut row) in m.row_iter_mut().enumerate() {
        row *= (lambda * (chain.f[j] - shift)).exp();
    }
    (m, shift)
}

/// `log ρ(Π_λ)`, the scaled cumulant generating function of the label sum.
pub fn log_tilted_radius(chain: &JointChain, lambda: f64) -> Result<f64> {
    let (m, shift) = tilted(chain, lambda);
    let (rho, _) = perron_pair(&m)?;
    Ok(lambda * shift + rho.ln())
}

/// `I(θ) = sup_λ {λθ − log ρ(Π_λ)}` over `λ ∈ [−50, 50]`.
///
/// At the extremes of the label range the supremum is approached as
/// `λ → ±∞`; the value at the search boundary is then returned, which agrees
/// with the limit to far below double precision.
pub fn rate_function(chain: &JointChain, theta: f64) -> Result<RatePoint> {
    let lo = chain.f.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = chain.f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(theta >= lo && theta <= hi) {
        return domain(format!("theta must lie in [{lo}, {hi}], got {theta}"));
    }
    let mut failure = None;
    let g = |l: f64| match log_tilted_radius(chain, l) {
        Ok(v) => l * theta - v,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let (lambda_star, value) = maximize_concave_1d(g, LAMBDA_RANGE.0, LAMBDA_RANGE.1, LAMBDA_TOL)?;
    if let Some(e) = failure {
        return Err(e);
    }
    if !value.is_finite() {
        return Err(Error::Numeric(format!("rate function not finite at theta = {theta}")));
    }
    Ok(RatePoint { theta, value: value.max(0.0), lambda_star })
}

pub fn rate_function_curve(chain: &JointChain, thetas: &[f64]) -> Result<RateFunctionCurve> {
    let points = thetas.iter().map(|&t| rate_function(chain, t)).collect::<Result<Vec<_>>>()?;
    Ok(RateFunctionCurve {
        thetas: thetas.to_vec(),
        values: points.iter().map(|p| p.value).collect(),
        lambda_star: points.iter().map(|p| p.lambda_star).collect(),
    })
}

/// `inf_{θ ≥ d} I(θ)`: zero below the stationary mean, `I(d)` above it.
pub fn exceedance_exponent(chain: &JointChain, d: f64) -> Result<f64> {
    if d <= chain.mean_f() {
        return Ok(0.0);
    }
    Ok(rate_function(chain, d)?.value)
}
