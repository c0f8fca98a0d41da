use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::awgn_capacity;
use crate::error::{domain, Result};
use crate::math::{run_sharded, BatchMeans, Estimate, RngStream};

const TRIALS_PER_SHARD: usize = 1 << 14;

/// Per-step mean squared error of the Schalkwijk–Kailath scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkReport {
    /// `λ_t = σ_X² (σ²/(P+σ²))^t` for `t = 0..=steps`.
    pub analytic_mse: Vec<f64>,
    pub empirical_mse: Vec<Estimate>,
    /// `½ log₂(λ_t/λ_{t+1})` for each of the `steps` channel uses.
    pub rate_per_use: Vec<f64>,
    pub capacity: f64,
    pub trials: usize,
    pub stream: RngStream,
}

/// Sends one `N(0, σ_X²)` value over `steps` uses of an AWGN channel with
/// noiseless feedback: each use transmits the scaled current estimation error
/// `√(P/λ_t)(X − X̂_t)` and the receiver updates its MMSE estimate.
pub fn schalkwijk_kailath(
    sigma_x: f64,
    sigma_vc: f64,
    power: f64,
    steps: usize,
    trials: usize,
    stream: RngStream,
) -> Result<SkReport> {
    if !(sigma_x > 0.0 && sigma_vc > 0.0 && power > 0.0) || ![sigma_x, sigma_vc, power].iter().all(|v| v.is_finite()) {
        return domain("sigma_X, sigma_Vc and power must be positive");
    }
    if steps == 0 || trials == 0 {
        return domain("need at least one step and one trial");
    }
    let v2 = sigma_vc * sigma_vc;
    let ratio = v2 / (power + v2);
    let analytic_mse: Vec<f64> = (0..=steps).map(|t| sigma_x * sigma_x * ratio.powi(t as i32)).collect();
    let rate_per_use = analytic_mse.windows(2).map(|w| 0.5 * (w[0] / w[1]).log2()).collect();

    let parts = run_sharded(&stream, trials, TRIALS_PER_SHARD, |_, len, s| {
        let mut rng = s.rng();
        let mut acc: Vec<BatchMeans> = (0..=steps).map(|_| BatchMeans::new(1)).collect();
        for _ in 0..len {
            let x = sigma_x * rng.sample::<f64, _>(StandardNormal);
            let mut est = 0.0;
            acc[0].push(x * x);
            for (t, lam) in analytic_mse[..steps].iter().enumerate() {
                let b = (power / lam).sqrt() * (x - est) + sigma_vc * rng.sample::<f64, _>(StandardNormal);
                est += (power * lam).sqrt() / (power + v2) * b;
                acc[t + 1].push((x - est) * (x - est));
            }
        }
        acc
    });
    let empirical_mse = (0..=steps)
        .map(|t| Estimate::combine(&parts.iter().map(|p| p[t].clone()).collect::<Vec<_>>()))
        .collect();
    Ok(SkReport {
        analytic_mse,
        empirical_mse,
        rate_per_use,
        capacity: awgn_capacity(power, v2),
        trials,
        stream,
    })
}
