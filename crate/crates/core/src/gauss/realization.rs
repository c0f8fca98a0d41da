use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::model::GaussModel;
use super::waterfill::{reverse_waterfill, WaterFill};
use crate::error::{domain, Error, Result};
use crate::math::symmetrize;
use crate::math::{pseudo_inverse_sym, spectral_radius, sym_eig, Spectrum, SymmetricMatrix};

/// Iteration controls for [`solve_realization`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Weight on the new iterate: `Σ ← (1−w)Σ + w F(Σ)`.
    pub damping: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-11, max_iter: 100_000, damping: 0.5 }
    }
}

/// Steady-state realization of the optimal test channel for a Gaussian model.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationSolution {
    pub distortion: f64,
    /// Filter error covariance `Σ∞`.
    pub sigma: DMatrix<f64>,
    /// Innovation covariance `Λ∞ = C Σ∞ Cᵗ + N Nᵗ`.
    pub lambda_cov: DMatrix<f64>,
    /// Rows are the eigenvectors of `Λ∞`, ordered like `spectrum`.
    pub e: DMatrix<f64>,
    pub spectrum: Spectrum,
    pub xi: f64,
    pub delta: Vec<f64>,
    /// Diagonal of `H∞`: `η_i = 1 − δ_i/λ_i` (exactly 0 on saturated modes).
    pub eta: Vec<f64>,
    /// Channel-noise variances (diagonal of `Q`).
    pub q: Vec<f64>,
    /// Diagonal of the decoder scaling `B∞ = √(H∞Δ∞Q⁻¹)`.
    pub b_gain: Vec<f64>,
    /// `M∞` as assembled from its defining sum.
    pub m_cov: DMatrix<f64>,
    /// Filter gain multiplying the channel output in the state estimate.
    pub filter_gain: DMatrix<f64>,
    /// Spectral radius of the error dynamics `A − K G C`.
    pub closed_loop_radius: f64,
    pub rate: f64,
    pub iterations: usize,
    /// `max|F(Σ∞) − Σ∞|` at the returned point.
    pub residual: f64,
    /// `D ≥ trace Λ∞`: every mode saturated, rate zero.
    pub saturated: bool,
}

impl RealizationSolution {
    pub fn state_dim(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn obs_dim(&self) -> usize {
        self.lambda_cov.nrows()
    }

    /// `G = Eᵗ H E`.
    pub fn g_matrix(&self) -> DMatrix<f64> {
        let h = DMatrix::from_diagonal(&DVector::from_column_slice(&self.eta));
        self.e.transpose() * h * &self.e
    }

    /// Encoder gains `√(q_i η_i / δ_i)` on the eigen-coordinates of the
    /// innovation; zero on saturated modes.
    pub fn encoder_gains(&self) -> Vec<f64> {
        self.eta
            .iter()
            .zip(&self.delta)
            .zip(&self.q)
            .map(|((&eta, &d), &q)| if eta > 0.0 { (q * eta / d).sqrt() } else { 0.0 })
            .collect()
    }

    /// Per-channel transmit power `q_i (λ_i/δ_i − 1)` used by the matched
    /// encoder.
    pub fn channel_powers(&self) -> Vec<f64> {
        self.spectrum
            .values()
            .iter()
            .zip(&self.delta)
            .zip(&self.q)
            .map(|((&l, &d), &q)| if d < l { q * (l / d - 1.0) } else { 0.0 })
            .collect()
    }

    /// `Ã = A − K G C`, the dynamics of the estimation error.
    pub fn error_dynamics(&self, model: &GaussModel) -> DMatrix<f64> {
        &model.a - &self.filter_gain * self.g_matrix() * &model.c
    }

    /// `max |Λ∞ − (C Σ∞ Cᵗ + N Nᵗ)|`.
    pub fn innovation_residual(&self, model: &GaussModel) -> f64 {
        let lam = innovation_cov(model, &self.sigma);
        (&self.lambda_cov - lam).amax()
    }
}

fn innovation_cov(model: &GaussModel, sigma: &DMatrix<f64>) -> DMatrix<f64> {
    symmetrize(&(&model.c * sigma * model.c.transpose() + &model.n * model.n.transpose()))
}

/// Everything derived from one `Σ` in a single pass of the coupled map.
struct Step {
    next: DMatrix<f64>,
    lambda_cov: DMatrix<f64>,
    e: DMatrix<f64>,
    spectrum: Spectrum,
    fill: WaterFill,
    eta: Vec<f64>,
    b_gain: Vec<f64>,
    m_cov: DMatrix<f64>,
    gain: DMatrix<f64>,
}

fn step(model: &GaussModel, sigma: &DMatrix<f64>, d: f64, q: &[f64]) -> Result<Step> {
    let (a, c) = (&model.a, &model.c);
    let nn = &model.n * model.n.transpose();
    let lambda_cov = innovation_cov(model, sigma);
    let (spectrum, e) = sym_eig(&SymmetricMatrix::symmetric_part(&lambda_cov))?;
    let fill = reverse_waterfill(&spectrum, d)?;
    let lam = spectrum.values();
    let eta: Vec<f64> = lam
        .iter()
        .zip(&fill.delta)
        .map(|(&l, &dl)| if dl < l { 1.0 - dl / l } else { 0.0 })
        .collect();
    let b_gain: Vec<f64> = eta
        .iter()
        .zip(&fill.delta)
        .zip(q)
        .map(|((&h, &dl), &qi)| (h * dl / qi).sqrt())
        .collect();
    let et = e.transpose();
    let g = &et * DMatrix::from_diagonal(&DVector::from_column_slice(&eta)) * &e;
    let gc = &g * c;
    let bqb = DMatrix::from_diagonal(&DVector::from_iterator(
        q.len(),
        b_gain.iter().zip(q).map(|(b, qi)| b * b * qi),
    ));
    let m_cov = symmetrize(&(&gc * sigma * gc.transpose() + &g * &nn * g.transpose() + &et * bqb * &e));
    // M∞ is diagonal in the eigenbasis of Λ∞ (entries η_i λ_i); invert it there
    // so modes with tiny but nonzero η are not cut off by a generic threshold.
    let m_eig = &e * &m_cov * &et;
    let m_inv_diag = DVector::from_iterator(
        eta.len(),
        eta.iter().enumerate().map(|(i, &h)| {
            let v = m_eig[(i, i)];
            if h > 0.0 && v > 0.0 {
                1.0 / v
            } else {
                0.0
            }
        }),
    );
    let m_pinv = &et * DMatrix::from_diagonal(&m_inv_diag) * &e;
    let gain = a * sigma * gc.transpose() * m_pinv;
    let next = symmetrize(
        &(a * sigma * a.transpose() - &gain * &gc * sigma * a.transpose() + &model.b * model.b.transpose()),
    );
    Ok(Step { next, lambda_cov, e, spectrum, fill, eta, b_gain, m_cov, gain })
}

/// Standard Kalman–Riccati iteration (no water-filling), used as the start.
fn initial_guess(model: &GaussModel) -> DMatrix<f64> {
    let (a, c) = (&model.a, &model.c);
    let bb = &model.b * model.b.transpose();
    let nn = &model.n * model.n.transpose();
    let mut sigma = bb.clone();
    for _ in 0..10_000 {
        let s = SymmetricMatrix::symmetric_part(&(c * &sigma * c.transpose() + &nn));
        let k = a * &sigma * c.transpose() * pseudo_inverse_sym(&s, 1e-13);
        let next = symmetrize(&(a * &sigma * a.transpose() - k * c * &sigma * a.transpose() + &bb));
        if !next.iter().all(|v| v.is_finite()) || next.amax() > 1e12 {
            return bb;
        }
        let change = (&next - &sigma).amax();
        sigma = next;
        if change <= 1e-13 * sigma.amax().max(1.0) {
            break;
        }
    }
    sigma
}

/// Solves the coupled modified-Riccati / water-filling fixed point at
/// distortion `D`.
///
/// `q` is the channel-noise diagonal (identity if `None`); it changes the
/// realization's gains but not `Σ∞` or the rate. Iteration is damped Picard
/// on `Σ`, started from the ordinary Kalman steady state, and stops when
/// `max|F(Σ) − Σ| ≤ tol · max(1, max|Σ|)`.
///
/// A blow-up of `Σ` is reported as a detectability error, running out of
/// iterations as non-convergence.
pub fn solve_realization(
    model: &GaussModel,
    d: f64,
    q: Option<&[f64]>,
    opts: &SolverOptions,
) -> Result<RealizationSolution> {
    if !(d > 0.0) || !d.is_finite() {
        return domain(format!("distortion must be positive and finite, got {d}"));
    }
    if !(opts.damping > 0.0 && opts.damping <= 1.0) || !(opts.tol > 0.0) || opts.max_iter == 0 {
        return domain("solver options: need 0 < damping ≤ 1, tol > 0, max_iter ≥ 1");
    }
    let p = model.obs_dim();
    let q: Vec<f64> = match q {
        Some(q) if q.len() != p => return domain(format!("Q must have {p} entries, has {}", q.len())),
        Some(q) if q.iter().any(|v| !(*v > 0.0) || !v.is_finite()) => {
            return domain("Q entries must be positive and finite")
        }
        Some(q) => q.to_vec(),
        None => vec![1.0; p],
    };

    let mut sigma = initial_guess(model);
    let mut residual = f64::INFINITY;
    for iter in 1..=opts.max_iter {
        let s = step(model, &sigma, d, &q)?;
        residual = (&s.next - &sigma).amax();
        if !residual.is_finite() || s.next.amax() > 1e12 {
            return Err(Error::Detectability(format!(
                "filter error covariance diverges after {iter} iterations; (C, A) may not be detectable at D = {d}"
            )));
        }
        if residual <= opts.tol * sigma.amax().max(1.0) {
            return finish(model, d, q, sigma, s, iter, residual);
        }
        sigma = symmetrize(&(&sigma * (1.0 - opts.damping) + &s.next * opts.damping));
    }
    Err(Error::NonConvergence { iterations: opts.max_iter, residual })
}

fn finish(
    model: &GaussModel,
    d: f64,
    q: Vec<f64>,
    sigma: DMatrix<f64>,
    s: Step,
    iterations: usize,
    residual: f64,
) -> Result<RealizationSolution> {
    let rate = s.fill.rate(&s.spectrum);
    let mut sol = RealizationSolution {
        distortion: d,
        sigma,
        lambda_cov: s.lambda_cov,
        e: s.e,
        spectrum: s.spectrum,
        xi: s.fill.xi,
        delta: s.fill.delta,
        eta: s.eta,
        q,
        b_gain: s.b_gain,
        m_cov: s.m_cov,
        filter_gain: s.gain,
        closed_loop_radius: f64::NAN,
        rate,
        iterations,
        residual,
        saturated: s.fill.saturated,
    };
    sol.closed_loop_radius = spectral_radius(&sol.error_dynamics(model))?;
    Ok(sol)
}
