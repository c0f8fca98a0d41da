use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ratefn::{rate_function, tilted};
use crate::bsms::{joint_chain, optimal_reproduction, JointChain};
use crate::error::{domain, Result};
use crate::math::{pairwise_sum, perron_pair, run_sharded, Estimate, RngStream};

const TRIALS_PER_SHARD: usize = 4096;

/// How trajectories are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    /// Plain simulation of the chain.
    Direct,
    /// Importance sampling from the exponentially tilted chain with tilt
    /// `λ` (the rate-function maximizer at `d` when `d` exceeds the mean),
    /// reweighted by the exact likelihood ratio.
    Tilted,
}

/// Estimated `P{S_n ≥ n d}` with the chain started from its stationary law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcessEstimate {
    pub n: usize,
    pub d: f64,
    pub trials: usize,
    pub sampling: Sampling,
    pub lambda: f64,
    /// Trials whose path exceeded the threshold (under the sampling law).
    pub hits: usize,
    /// May underflow to zero for very rare events; see `log_probability`.
    pub probability: Estimate,
    /// Natural log of the estimate; `−∞` when nothing was observed.
    pub log_probability: f64,
    /// Standard error relative to the estimate.
    pub relative_se: f64,
}

impl ExcessEstimate {
    /// `(1/n) log P̂`.
    pub fn exponent_per_step(&self) -> f64 {
        self.log_probability / self.n as f64
    }
}

fn cumulative(weights: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out: Vec<f64> = weights.map(|w| {
        acc += w;
        acc
    }).collect();
    if let Some(last) = out.last_mut() {
        *last = f64::INFINITY;
    }
    out
}

#[inline]
fn draw<R: Rng>(cum: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    cum.iter().position(|&c| u < c).unwrap_or(cum.len() - 1)
}

/// Counts trajectories `X_1..X_n` of the chain with `Σ f(X_i) ≥ n d`.
pub fn simulate_excess(
    chain: &JointChain,
    n: usize,
    d: f64,
    trials: usize,
    sampling: Sampling,
    stream: RngStream,
) -> Result<ExcessEstimate> {
    if n == 0 || trials == 0 {
        return domain("need n >= 1 and trials >= 1");
    }
    if !d.is_finite() {
        return domain("threshold must be finite");
    }
    let k = chain.len();
    let threshold = n as f64 * d;
    let init = cumulative(chain.stationary.iter().copied());

    // Tilted kernel P̃(i|j) = Π(i,j) e^{λ f(i)} r(i) / (ρ r(j)) with r the
    // Perron vector of Π_λᵗ; the start stays stationary.
    let (lambda, log_rho, log_r, sampler) = match sampling {
        Sampling::Direct => (0.0, 0.0, vec![0.0; k], chain.transition.clone()),
        Sampling::Tilted => {
            let lambda = if d > chain.mean_f() {
                let fmax = chain.f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                rate_function(chain, d.min(fmax))?.lambda_star
            } else {
                0.0
            };
            let (m, shift) = tilted(chain, lambda);
            let (rho, r) = perron_pair(&m.transpose())?;
            let mut t = chain.transition.clone();
            for i in 0..k {
                for j in 0..k {
                    t[(i, j)] = m[(i, j)] * r[i] / (rho * r[j]);
                }
            }
            (lambda, lambda * shift + rho.ln(), r.iter().map(|v| v.ln()).collect(), t)
        }
    };
    let columns: Vec<Vec<f64>> = (0..k).map(|j| cumulative(sampler.column(j).iter().copied())).collect();
    // log of the typical weight, factored out so rare-event weights stay representable
    let reference = (n as f64) * (log_rho - lambda * d);

    let parts = run_sharded(&stream, trials, TRIALS_PER_SHARD, |_, len, s| {
        let mut rng = s.rng();
        let mut weights = Vec::with_capacity(len);
        let mut hits = 0usize;
        for _ in 0..len {
            let first = draw(&init, &mut rng);
            let mut state = first;
            let mut sum = chain.f[state];
            for _ in 1..n {
                state = draw(&columns[state], &mut rng);
                sum += chain.f[state];
            }
            if sum >= threshold {
                hits += 1;
                let w = match sampling {
                    Sampling::Direct => 1.0,
                    Sampling::Tilted => {
                        let log_lr = (n as f64 - 1.0) * log_rho - lambda * (sum - chain.f[first]) + log_r[first]
                            - log_r[state];
                        (log_lr - reference).exp()
                    }
                };
                weights.push(w);
            } else {
                weights.push(0.0);
            }
        }
        (hits, pairwise_sum(&weights), pairwise_sum(&weights.iter().map(|w| w * w).collect::<Vec<_>>()))
    });
    let hits = parts.iter().map(|p| p.0).sum();
    let s1 = pairwise_sum(&parts.iter().map(|p| p.1).collect::<Vec<_>>());
    let s2 = pairwise_sum(&parts.iter().map(|p| p.2).collect::<Vec<_>>());
    let t = trials as f64;
    let mean = s1 / t;
    let var = if trials > 1 { ((s2 - t * mean * mean) / (t - 1.0)).max(0.0) } else { f64::NAN };
    let se = (var / t).sqrt();
    let reference = if sampling == Sampling::Direct { 0.0 } else { reference };
    let scale = reference.exp();
    Ok(ExcessEstimate {
        n,
        d,
        trials,
        sampling,
        lambda,
        hits,
        probability: Estimate { mean: mean * scale, std_error: se * scale },
        log_probability: if mean > 0.0 { mean.ln() + reference } else { f64::NEG_INFINITY },
        relative_se: se / mean,
    })
}

/// Exceedance of the Hamming distortion of BSMS(p) sent uncoded through the
/// optimal reproduction kernel at distortion `D`.
pub fn simulate_excess_bsms(
    p: f64,
    big_d: f64,
    n: usize,
    d: f64,
    trials: usize,
    sampling: Sampling,
    stream: RngStream,
) -> Result<ExcessEstimate> {
    let chain = joint_chain(&optimal_reproduction(p, big_d)?)?;
    simulate_excess(&chain, n, d, trials, sampling, stream)
}
