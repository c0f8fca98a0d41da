use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::math::cubic_positive_root;

/// Scalar nonanticipative rate together with the steady-state quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarRate {
    pub rate: f64,
    /// Filter error variance `Σ∞`.
    pub sigma: f64,
    /// Innovation variance `λ∞ = c²Σ∞ + σ_V²`.
    pub lambda: f64,
    /// `D ≥ λ∞`: zero rate.
    pub saturated: bool,
}

/// `R^na(D) = ½ log₂(α² + σ_W²/D)` for `Z' = αZ + σ_W W` observed exactly.
///
/// Returns 0 once `D ≥ α²D + σ_W²` (the stationary variance is already
/// within budget). Requires `|α| ≤ 1`.
pub fn rna_scalar_fully_observed(alpha: f64, sigma_w: f64, d: f64) -> Result<f64> {
    if !(alpha.abs() <= 1.0) {
        return domain(format!("need |alpha| <= 1, got {alpha}"));
    }
    if !(sigma_w > 0.0) || !sigma_w.is_finite() {
        return domain(format!("sigma_W must be positive, got {sigma_w}"));
    }
    if !(d > 0.0) || !d.is_finite() {
        return domain(format!("distortion must be positive and finite, got {d}"));
    }
    Ok((0.5 * (alpha * alpha + sigma_w * sigma_w / d).log2()).max(0.0))
}

/// Coefficients `[c₃, c₂, c₁, c₀]` of the cubic whose largest root is `Σ∞`
/// for the scalar partially observed source at distortion `D` (unsaturated).
///
/// Obtained by clearing denominators in
/// `Σ = α²Σ − α²c²Σ²(λ−D)/λ² + σ_W²`, `λ = c²Σ + σ_V²`.
pub fn partially_observed_cubic(alpha: f64, c: f64, sigma_w: f64, sigma_v: f64, d: f64) -> [f64; 4] {
    let (a2, c2, w2, v2) = (alpha * alpha, c * c, sigma_w * sigma_w, sigma_v * sigma_v);
    [
        c2 * c2,
        2.0 * c2 * v2 - a2 * c2 * v2 - a2 * c2 * d - c2 * c2 * w2,
        (1.0 - a2) * v2 * v2 - 2.0 * c2 * v2 * w2,
        -v2 * v2 * w2,
    ]
}

/// Rate for `Z' = αZ + σ_W W`, `X = cZ + σ_V V`, `|α| < 1`.
///
/// `Σ∞` is the largest real root of [`partially_observed_cubic`]; the rate is
/// `½ log₂((c²Σ∞ + σ_V²)/D)`. When `D` reaches the open-loop innovation
/// variance `c²σ_W²/(1−α²) + σ_V²` the result is zero and flagged saturated.
pub fn rna_scalar_partially_observed(
    alpha: f64,
    c: f64,
    sigma_w: f64,
    sigma_v: f64,
    d: f64,
) -> Result<ScalarRate> {
    if !(alpha.abs() < 1.0) {
        return domain(format!("need |alpha| < 1, got {alpha}"));
    }
    if !(c != 0.0 && c.is_finite()) || !(sigma_w > 0.0) || !(sigma_v >= 0.0) || !sigma_v.is_finite() {
        return domain("need c != 0, sigma_W > 0, sigma_V >= 0");
    }
    if !(d > 0.0) || !d.is_finite() {
        return domain(format!("distortion must be positive and finite, got {d}"));
    }
    let open_sigma = sigma_w * sigma_w / (1.0 - alpha * alpha);
    let open_lambda = c * c * open_sigma + sigma_v * sigma_v;
    if d >= open_lambda {
        return Ok(ScalarRate { rate: 0.0, sigma: open_sigma, lambda: open_lambda, saturated: true });
    }
    let [c3, c2, c1, c0] = partially_observed_cubic(alpha, c, sigma_w, sigma_v, d);
    let sigma = cubic_positive_root(c3, c2, c1, c0)?;
    if !(sigma > 0.0) {
        return Err(Error::Numeric(format!("cubic has no positive root (largest {sigma})")));
    }
    let lambda = c * c * sigma + sigma_v * sigma_v;
    Ok(ScalarRate { rate: 0.5 * (lambda / d).log2(), sigma, lambda, saturated: false })
}

fn check_alpha1_region(sigma_w: f64, d: f64) -> Result<()> {
    if !(sigma_w > 0.0) || !sigma_w.is_finite() {
        return domain(format!("sigma_W must be positive, got {sigma_w}"));
    }
    if !(d > 0.0) {
        return domain(format!("distortion must be positive, got {d}"));
    }
    if d > sigma_w * sigma_w / 4.0 {
        return Err(Error::OutOfRegion(format!(
            "no closed form for D = {d} > sigma_W^2/4 = {}",
            sigma_w * sigma_w / 4.0
        )));
    }
    Ok(())
}

/// Classical `R(D) = ½ log₂(σ_W²/D)` of the unit-root source `Z' = Z + σ_W W`,
/// valid for `D ≤ σ_W²/4`.
pub fn classical_alpha1(sigma_w: f64, d: f64) -> Result<f64> {
    check_alpha1_region(sigma_w, d)?;
    Ok(0.5 * (sigma_w * sigma_w / d).log2())
}

/// `R^na(D) − R(D) = ½ log₂(1 + D/σ_W²)` for the unit-root source.
pub fn rate_loss_alpha1(sigma_w: f64, d: f64) -> Result<f64> {
    check_alpha1_region(sigma_w, d)?;
    Ok(0.5 * (1.0 + d / (sigma_w * sigma_w)).log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::{solve_realization, GaussModel, SolverOptions};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn fully_observed_examples() {
        assert_abs_diff_eq!(rna_scalar_fully_observed(0.5, 1.0, 0.5).unwrap(), 0.584962500721156, epsilon = 1e-12);
        // IID: ½log₂(σ²/D)
        assert_abs_diff_eq!(rna_scalar_fully_observed(0.0, 2.0, 1.0).unwrap(), 1.0, epsilon = 1e-12);
        let d = 1.0 / (1.0 - 0.81);
        assert_abs_diff_eq!(rna_scalar_fully_observed(0.9, 1.0, d).unwrap(), 0.0, epsilon = 1e-12);
        assert_eq!(rna_scalar_fully_observed(0.5, 1.0, 10.0).unwrap(), 0.0);
        assert!(rna_scalar_fully_observed(0.5, 1.0, 0.0).is_err());
        assert!(rna_scalar_fully_observed(1.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn partially_observed_matches_fixed_point() {
        let r = rna_scalar_partially_observed(0.5, 1.0, 1.0, 0.5, 0.4).unwrap();
        let m = GaussModel::scalar(0.5, 1.0, 1.0, 0.5).unwrap();
        let s = solve_realization(&m, 0.4, None, &SolverOptions::default()).unwrap();
        assert_abs_diff_eq!(r.sigma, 1.117864, epsilon = 1e-6);
        assert_abs_diff_eq!(r.sigma, s.sigma[(0, 0)], epsilon = 1e-8);
        assert_abs_diff_eq!(r.rate, s.rate, epsilon = 1e-8);
        assert_abs_diff_eq!(r.rate, 0.5 * ((r.sigma + 0.25) / 0.4).log2(), epsilon = 1e-12);
    }

    #[test]
    fn partially_observed_iid_case() {
        // α = 0: λ = Σ + 1 and Σ solves the cubic with α = 0
        let r = rna_scalar_partially_observed(0.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let [c3, c2, c1, c0] = partially_observed_cubic(0.0, 1.0, 1.0, 1.0, 1.0);
        let res = c3 * r.sigma.powi(3) + c2 * r.sigma.powi(2) + c1 * r.sigma + c0;
        assert!(res.abs() < 1e-12);
        // with α = 0 there is no memory, so Σ = σ_W²
        assert_abs_diff_eq!(r.sigma, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.rate, 0.5 * 2f64.log2(), epsilon = 1e-12);
    }

    #[test]
    fn partially_observed_saturation() {
        let r = rna_scalar_partially_observed(0.5, 1.0, 1.0, 0.5, 10.0).unwrap();
        assert!(r.saturated);
        assert_eq!(r.rate, 0.0);
    }

    #[test]
    fn noiseless_observation_reduces_to_fully_observed() {
        for &(a, d) in &[(0.5, 0.5), (0.9, 0.3), (-0.3, 0.7)] {
            let exact = rna_scalar_fully_observed(a, 1.0, d).unwrap();
            let zero = rna_scalar_partially_observed(a, 1.0, 1.0, 0.0, d).unwrap();
            assert_abs_diff_eq!(zero.rate, exact, epsilon = 1e-12);
            let tiny = rna_scalar_partially_observed(a, 1.0, 1.0, 1e-6, d).unwrap();
            assert_abs_diff_eq!(tiny.rate, exact, epsilon = 1e-3);
        }
    }

    #[test]
    fn alpha1_references() {
        assert_abs_diff_eq!(classical_alpha1(1.0, 0.25).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(classical_alpha1(2.0, 1.0).unwrap(), 1.0, epsilon = 1e-12);
        assert!(matches!(classical_alpha1(1.0, 0.3), Err(Error::OutOfRegion(_))));
        assert_abs_diff_eq!(rate_loss_alpha1(1.0, 0.25).unwrap(), 0.160964047443681, epsilon = 1e-12);
        assert!(rate_loss_alpha1(1.0, 1e-12).unwrap() < 1e-11);
        for &d in &[0.01, 0.1, 0.25] {
            let rna = rna_scalar_fully_observed(1.0, 1.0, d).unwrap();
            let rl = rna - classical_alpha1(1.0, d).unwrap();
            assert_abs_diff_eq!(rl, rate_loss_alpha1(1.0, d).unwrap(), epsilon = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn cubic_root_is_fixed_point(alpha in -0.9f64..0.9, c in 0.3f64..2.0, sw in 0.3f64..2.0, sv in 0.05f64..1.5, frac in 0.05f64..0.9) {
            let open = c * c * sw * sw / (1.0 - alpha * alpha) + sv * sv;
            let d = frac * open;
            let r = rna_scalar_partially_observed(alpha, c, sw, sv, d).unwrap();
            prop_assume!(!r.saturated);
            let lam = c * c * r.sigma + sv * sv;
            let eta = (1.0 - d / lam).max(0.0);
            let mapped = alpha * alpha * r.sigma - alpha * alpha * c * c * r.sigma * r.sigma * eta / lam + sw * sw;
            prop_assert!((mapped - r.sigma).abs() <= 1e-9 * r.sigma.max(1.0));
        }

        #[test]
        fn fully_observed_nonincreasing_convex(alpha in -1.0f64..1.0, sw in 0.2f64..3.0, d in 0.01f64..2.0, h in 0.001f64..0.5) {
            let f = |x| rna_scalar_fully_observed(alpha, sw, x).unwrap();
            prop_assert!(f(d + h) <= f(d) + 1e-12);
            prop_assert!(f(d) + f(d + 2.0 * h) >= 2.0 * f(d + h) - 1e-12);
        }
    }
}
