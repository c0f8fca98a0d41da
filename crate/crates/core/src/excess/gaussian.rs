use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::gauss::{GaussModel, RealizationSolution};
use crate::jscc::{RealizationLoop, VecStep};
use crate::math::{lyapunov_discrete, pairwise_sum, run_sharded, spectral_radius, Estimate, RngStream};

const COV_TOL: f64 = 1e-8;

/// `ē_{t+1} = Ã ē_t + B̃₁ W_t + B̃₂ V_t + B̃₃ V^c_t` for the one-step prediction
/// error `ē_t = Z_t − Ẑ_{t|t−1}` of the realization, with `V^c ~ N(0, Q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianErrorRecursion {
    pub a_tilde: DMatrix<f64>,
    pub b1: DMatrix<f64>,
    pub b2: DMatrix<f64>,
    pub b3: DMatrix<f64>,
    pub q: Vec<f64>,
    /// Stationary `Cov(ē)` from the discrete Lyapunov equation.
    pub cov: DMatrix<f64>,
    pub spectral_radius: f64,
    /// `max |Cov(ē) − Σ∞|`.
    pub sigma_mismatch: f64,
}

impl GaussianErrorRecursion {
    /// `B̃₁B̃₁ᵗ + B̃₂B̃₂ᵗ + B̃₃ Q B̃₃ᵗ`.
    pub fn noise_cov(&self) -> DMatrix<f64> {
        let q = DMatrix::from_diagonal(&DVector::from_column_slice(&self.q));
        &self.b1 * self.b1.transpose() + &self.b2 * self.b2.transpose() + &self.b3 * q * self.b3.transpose()
    }
}

/// Builds `Ã = A − K G C`, `B̃₁ = B`, `B̃₂ = −K G N`, `B̃₃ = −K E∞ᵗ B∞` and checks
/// that the stationary error covariance reproduces `Σ∞`.
pub fn gaussian_error_recursion(model: &GaussModel, solution: &RealizationSolution) -> Result<GaussianErrorRecursion> {
    let k = &solution.filter_gain;
    let g = solution.g_matrix();
    let a_tilde = &model.a - k * &g * &model.c;
    let radius = spectral_radius(&a_tilde)?;
    if !(radius < 1.0) {
        return Err(Error::Numeric(format!("error dynamics unstable: spectral radius {radius}")));
    }
    let b_inf = DMatrix::from_diagonal(&DVector::from_column_slice(&solution.b_gain));
    let mut rec = GaussianErrorRecursion {
        b1: model.b.clone(),
        b2: -(k * &g * &model.n),
        b3: -(k * solution.e.transpose() * b_inf),
        q: solution.q.clone(),
        cov: DMatrix::zeros(0, 0),
        spectral_radius: radius,
        sigma_mismatch: f64::NAN,
        a_tilde,
    };
    rec.cov = lyapunov_discrete(&rec.a_tilde, &rec.noise_cov())?;
    rec.sigma_mismatch = (&rec.cov - &solution.sigma).amax();
    if rec.sigma_mismatch > COV_TOL * solution.sigma.amax().max(1.0) {
        return Err(Error::Consistency(format!(
            "error covariance differs from the fixed point by {:e}",
            rec.sigma_mismatch
        )));
    }
    Ok(rec)
}

/// Monte Carlo Chernoff exponent of `P{Σ_{i<n} ‖X_i − Y_i‖² ≥ n d}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChernoffEstimate {
    pub d: f64,
    pub n: usize,
    pub trials: usize,
    /// `sup_λ {λd − Λ̂_n(λ)}` over the usable grid (nats per step).
    pub exponent: f64,
    pub std_error: f64,
    /// `exponent ± 3·std_error`.
    pub band: (f64, f64),
    pub lambda_star: f64,
    /// Grid points that passed the effective-sample-size guard.
    pub lambdas: Vec<f64>,
    /// `Λ̂_n(λ) = (1/n) log mean e^{λ S_n}` on `lambdas`.
    pub log_mgf: Vec<f64>,
    pub log_mgf_se: Vec<f64>,
    /// Effective sample size of the weights `e^{λ S_n}`.
    pub ess: Vec<f64>,
    /// Direct estimate of `P{S_n ≥ n d}` from the same trajectories.
    pub exceedance: Estimate,
}

/// Smallest effective sample size, as a fraction of the trials, at which an
/// MGF estimate is trusted.
pub const ESS_MIN_FRACTION: f64 = 0.01;
const ESS_MIN: f64 = 30.0;
const TRIALS_PER_SHARD: usize = 2048;

/// Estimates the Chernoff exponent by simulating `trials` blocks of `n` steps
/// of the realization.
///
/// Blocks are separated by a burn-in-length gap within each shard so they are
/// effectively independent. The grid is scanned in increasing `λ > 0`; the
/// first point whose weights have effective sample size below
/// `max(30, 1% of trials)` ends the scan (heavier tilts only get less
/// reliable). Exponents are in nats; the supremum includes `λ = 0`, so the
/// result is never negative.
pub fn gaussian_chernoff_exponent(
    model: &GaussModel,
    solution: &RealizationSolution,
    d: f64,
    n: usize,
    trials: usize,
    lambda_grid: &[f64],
    stream: RngStream,
) -> Result<ChernoffEstimate> {
    if !(d > 0.0) || n == 0 || trials < 2 {
        return domain("need d > 0, n >= 1 and trials >= 2");
    }
    let mut grid: Vec<f64> = lambda_grid.iter().copied().filter(|l| *l > 0.0 && l.is_finite()).collect();
    grid.sort_by(f64::total_cmp);
    if grid.is_empty() {
        return domain("lambda grid needs positive entries");
    }
    let gap = RealizationLoop::new(model, solution)?.burn_in;
    let sums: Vec<f64> = run_sharded(&stream, trials, TRIALS_PER_SHARD, |_, len, s| {
        let mut rng = s.rng();
        let mut sim = RealizationLoop::new(model, solution).expect("validated above");
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            for _ in 0..gap {
                sim.step(&mut rng);
            }
            let mut block = 0.0;
            for _ in 0..n {
                let VecStep { err, .. } = sim.step(&mut rng);
                block += err.norm_squared();
            }
            out.push(block);
        }
        out
    })
    .into_iter()
    .flatten()
    .collect();

    let t = trials as f64;
    let nf = n as f64;
    let hits: Vec<f64> = sums.iter().map(|&s| if s >= nf * d { 1.0 } else { 0.0 }).collect();
    let p_hat = pairwise_sum(&hits) / t;
    let exceedance = Estimate { mean: p_hat, std_error: (p_hat * (1.0 - p_hat) / (t - 1.0)).sqrt() };

    let (mut lambdas, mut log_mgf, mut log_mgf_se, mut ess) = (vec![], vec![], vec![], vec![]);
    let s_max = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ess_min = ESS_MIN.max(ESS_MIN_FRACTION * t);
    for &l in &grid {
        // weights relative to the largest for stability
        let w: Vec<f64> = sums.iter().map(|&s| (l * (s - s_max)).exp()).collect();
        let s1 = pairwise_sum(&w);
        let s2 = pairwise_sum(&w.iter().map(|x| x * x).collect::<Vec<_>>());
        let e = s1 * s1 / s2;
        if e < ess_min {
            break;
        }
        let m1 = s1 / t;
        let rel_var = ((s2 / t) / (m1 * m1) - 1.0).max(0.0) / t;
        lambdas.push(l);
        log_mgf.push((m1.ln() + l * s_max) / nf);
        log_mgf_se.push(rel_var.sqrt() / nf);
        ess.push(e);
    }
    if lambdas.is_empty() {
        return Err(Error::Estimation(format!(
            "no tilt in the grid passes the effective-sample-size guard (smallest λ = {})",
            grid[0]
        )));
    }
    let (mut exponent, mut lambda_star, mut std_error) = (0.0, 0.0, 0.0);
    for i in 0..lambdas.len() {
        let v = lambdas[i] * d - log_mgf[i];
        if v > exponent {
            exponent = v;
            lambda_star = lambdas[i];
            std_error = log_mgf_se[i];
        }
    }
    Ok(ChernoffEstimate {
        d,
        n,
        trials,
        exponent,
        std_error,
        band: (exponent - 3.0 * std_error, exponent + 3.0 * std_error),
        lambda_star,
        lambdas,
        log_mgf,
        log_mgf_se,
        ess,
        exceedance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::{solve_realization, SolverOptions};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn solve(m: &GaussModel, d: f64) -> RealizationSolution {
        solve_realization(m, d, None, &SolverOptions::default()).unwrap()
    }

    #[test]
    fn scalar_fully_observed_recursion() {
        let m = GaussModel::scalar(0.5, 1.0, 1.0, 0.0).unwrap();
        let s = solve(&m, 0.5);
        let r = gaussian_error_recursion(&m, &s).unwrap();
        assert_abs_diff_eq!(r.cov[(0, 0)], 1.125, epsilon = 1e-10);
        assert_eq!(r.b2.amax(), 0.0);
    }

    #[test]
    fn lyapunov_matches_time_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let a = DMatrix::from_fn(2, 2, |_, _| rng.gen_range(-0.6..0.6));
        let b = DMatrix::from_fn(2, 2, |_, _| rng.gen_range(-1.0..1.0));
        let c = DMatrix::from_fn(2, 2, |_, _| rng.gen_range(-1.0..1.0));
        let n = DMatrix::from_fn(2, 2, |_, _| rng.gen_range(-0.3..0.3));
        let m = GaussModel::new(a, b, c, n).unwrap();
        let s = solve(&m, 0.3 * s_trace(&m));
        let r = gaussian_error_recursion(&m, &s).unwrap();
        assert!(r.sigma_mismatch <= 1e-8);
        let w = r.noise_cov();
        let mut p = DMatrix::zeros(2, 2);
        for _ in 0..10_000 {
            p = &r.a_tilde * p * r.a_tilde.transpose() + &w;
        }
        assert!((p - &r.cov).amax() <= 1e-6);
    }

    fn s_trace(m: &GaussModel) -> f64 {
        let open = lyapunov_discrete(&m.a, &(&m.b * m.b.transpose())).unwrap();
        (&m.c * open * m.c.transpose() + &m.n * m.n.transpose()).trace()
    }

    fn grid() -> Vec<f64> {
        (1..=200).map(|i| i as f64 * 0.005).collect()
    }

    #[test]
    fn memoryless_source_matches_chi_square_exponent() {
        // α = 0: errors are i.i.d. N(0, D), so Λ(λ) = −½ log(1 − 2λD) and
        // I(d) = (x − 1 − ln x)/2 with x = d/D.
        let m = GaussModel::scalar(0.0, 1.0, 1.0, 0.0).unwrap();
        let s = solve(&m, 0.5);
        let c = gaussian_chernoff_exponent(&m, &s, 0.75, 20, 100_000, &grid(), RngStream::new(6, 0)).unwrap();
        let x: f64 = 1.5;
        let exact = (x - 1.0 - x.ln()) / 2.0;
        assert!((c.exponent - exact).abs() <= 3.0 * c.std_error + 2e-3, "{} vs {exact} ± {}", c.exponent, c.std_error);
        for (l, v) in c.lambdas.iter().zip(&c.log_mgf) {
            let ana = -0.5 * (1.0 - 2.0 * l * 0.5).ln();
            assert!((v - ana).abs() <= 5.0 * c.log_mgf_se[0].max(1e-3) + 1e-2);
        }
        // Chernoff: P{S ≥ nd} ≤ e^{−n I}
        assert!(c.exceedance.mean <= (-(20.0) * (c.exponent - 3.0 * c.std_error)).exp());
    }

    #[test]
    fn vanishes_at_the_target_and_grows_with_d() {
        let m = GaussModel::scalar(0.5, 1.0, 1.0, 0.0).unwrap();
        let s = solve(&m, 0.5);
        let at_mean = gaussian_chernoff_exponent(&m, &s, 0.5, 20, 20_000, &grid(), RngStream::new(7, 0)).unwrap();
        assert!(at_mean.exponent <= at_mean.band.1 - at_mean.exponent + 1e-3, "{at_mean:?}");
        let mut last = 0.0;
        for d in [0.6, 0.7, 0.8, 1.0] {
            let c = gaussian_chernoff_exponent(&m, &s, d, 20, 20_000, &grid(), RngStream::new(7, 0)).unwrap();
            assert!(c.exponent > last);
            assert!(c.exceedance.mean <= (-(20.0) * c.band.0).exp() + 3.0 * c.exceedance.std_error);
            last = c.exponent;
        }
    }

    #[test]
    fn guard_rejects_hopeless_grid() {
        let m = GaussModel::scalar(0.0, 1.0, 1.0, 0.0).unwrap();
        let s = solve(&m, 0.5);
        let err = gaussian_chernoff_exponent(&m, &s, 1.0, 50, 1000, &[50.0], RngStream::new(0, 0)).unwrap_err();
        assert!(matches!(err, Error::Estimation(_)));
    }
}
