use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::scalar::burn_in_for;
use super::STEPS_PER_SHARD;
use crate::error::{domain, Error, Result};
use crate::gauss::{GaussModel, RealizationSolution};
use crate::math::{run_sharded, spectral_radius, BatchMeans, Estimate, RngStream};

/// Monte Carlo summary of the vector realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorReport {
    pub samples: usize,
    pub burn_in: usize,
    /// `E‖X_t − Y_t‖²`; matches `D`.
    pub distortion: Estimate,
    /// Error variance along each eigen-coordinate; matches `δ_i`.
    pub coordinate_distortion: Vec<Estimate>,
    /// Mean squared input on each channel; matches `P*_i`.
    pub channel_power: Vec<Estimate>,
    pub total_power: Estimate,
    /// Entrywise `E[K_t K_tᵗ]` of the encoder input; matches `Λ∞`.
    pub innovation_cov: Vec<Vec<Estimate>>,
    pub stream: RngStream,
}

fn normals<R: Rng>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

struct Accum {
    dist: BatchMeans,
    coord: Vec<BatchMeans>,
    power: Vec<BatchMeans>,
    total_power: BatchMeans,
    cov: Vec<BatchMeans>,
}

/// One copy of encoder, channel, decoder and the shared filter.
pub(crate) struct RealizationLoop<'a> {
    model: &'a GaussModel,
    gain: &'a DMatrix<f64>,
    e: DMatrix<f64>,
    et: DMatrix<f64>,
    enc: DVector<f64>,
    dec: DVector<f64>,
    q_sd: DVector<f64>,
    z: DVector<f64>,
    zhat: DVector<f64>,
    pub burn_in: usize,
}

pub(crate) struct VecStep {
    /// Encoder input `K_t`.
    pub k: DVector<f64>,
    /// Channel inputs, one per eigen-coordinate.
    pub input: DVector<f64>,
    /// Reconstruction error `X_t − Y_t`.
    pub err: DVector<f64>,
}

impl<'a> RealizationLoop<'a> {
    pub fn new(model: &'a GaussModel, solution: &'a RealizationSolution) -> Result<Self> {
        if solution.state_dim() != model.state_dim() || solution.obs_dim() != model.obs_dim() {
            return domain("solution does not belong to this model");
        }
        if !(solution.closed_loop_radius < 1.0) {
            return Err(Error::Numeric(format!(
                "filter diverges: closed-loop spectral radius {}",
                solution.closed_loop_radius
            )));
        }
        let rho_a = spectral_radius(&model.a)?;
        if !(rho_a < 1.0) {
            return domain(format!("simulation needs a stable source, spectral radius {rho_a}"));
        }
        let p = model.obs_dim();
        Ok(Self {
            model,
            gain: &solution.filter_gain,
            e: solution.e.clone(),
            et: solution.e.transpose(),
            enc: DVector::from_vec(solution.encoder_gains()),
            dec: DVector::from_column_slice(&solution.b_gain),
            q_sd: DVector::from_iterator(p, solution.q.iter().map(|q| q.sqrt())),
            z: DVector::zeros(model.state_dim()),
            zhat: DVector::zeros(model.state_dim()),
            burn_in: burn_in_for(rho_a.max(solution.closed_loop_radius)),
        })
    }

    pub fn step<R: Rng>(&mut self, rng: &mut R) -> VecStep {
        let m = self.model;
        let x = &m.c * &self.z + &m.n * normals(rng, m.obs_noise_dim());
        let pred = &m.c * &self.zhat;
        let k = &x - &pred;
        let input = (&self.e * &k).component_mul(&self.enc);
        let output = &input + normals(rng, input.len()).component_mul(&self.q_sd);
        let ktilde = &self.et * output.component_mul(&self.dec);
        let err = &k - &ktilde;
        self.zhat = &m.a * &self.zhat + self.gain * &ktilde;
        self.z = &m.a * &self.z + &m.b * normals(rng, m.process_noise_dim());
        VecStep { k, input, err }
    }

    /// Eigen-coordinates of a vector.
    pub fn rotate(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.e * v
    }
}

/// Runs the full realization: shared predictor `C Ẑ_{t|t−1}` from the
/// modified Kalman filter, innovation `K_t`, pre-transform `E∞`, encoder gains
/// `√(q_i η_i/δ_i)`, channel noise `N(0, Q)`, decoder scaling `B∞`,
/// post-transform `E∞ᵗ` and reconstruction `Y_t = K̃_t + C Ẑ_{t|t−1}`.
///
/// Encoder and decoder run the same filter on the channel outputs, so one
/// copy is simulated. Requires a stable source and stable error dynamics.
pub fn simulate_vector(
    model: &GaussModel,
    solution: &RealizationSolution,
    n: usize,
    stream: RngStream,
) -> Result<VectorReport> {
    if n == 0 {
        return domain("need at least one step");
    }
    let burn_in = RealizationLoop::new(model, solution)?.burn_in;
    let p = model.obs_dim();
    let parts = run_sharded(&stream, n, STEPS_PER_SHARD, |_, len, s| {
        let mut rng = s.rng();
        let mut sim = RealizationLoop::new(model, solution).expect("validated above");
        let mut acc = Accum {
            dist: BatchMeans::for_len(len),
            coord: (0..p).map(|_| BatchMeans::for_len(len)).collect(),
            power: (0..p).map(|_| BatchMeans::for_len(len)).collect(),
            total_power: BatchMeans::for_len(len),
            cov: (0..p * p).map(|_| BatchMeans::for_len(len)).collect(),
        };
        for _ in 0..burn_in {
            sim.step(&mut rng);
        }
        for _ in 0..len {
            let VecStep { k, input, err } = sim.step(&mut rng);
            acc.dist.push(err.norm_squared());
            let ecoord = sim.rotate(&err);
            for i in 0..p {
                acc.coord[i].push(ecoord[i] * ecoord[i]);
                acc.power[i].push(input[i] * input[i]);
                for j in 0..p {
                    acc.cov[i * p + j].push(k[i] * k[j]);
                }
            }
            acc.total_power.push(input.norm_squared());
        }
        acc
    });

    let pick = |f: &dyn Fn(&Accum) -> BatchMeans| Estimate::combine(&parts.iter().map(f).collect::<Vec<_>>());
    Ok(VectorReport {
        samples: n,
        burn_in,
        distortion: pick(&|a| a.dist.clone()),
        coordinate_distortion: (0..p).map(|i| pick(&|a| a.coord[i].clone())).collect(),
        channel_power: (0..p).map(|i| pick(&|a| a.power[i].clone())).collect(),
        total_power: pick(&|a| a.total_power.clone()),
        innovation_cov: (0..p)
            .map(|i| (0..p).map(|j| pick(&|a| a.cov[i * p + j].clone())).collect())
            .collect(),
        stream,
    })
}

impl VectorReport {
    /// Empirical `E[K Kᵗ]` as a matrix of means.
    pub fn innovation_cov_matrix(&self) -> DMatrix<f64> {
        let p = self.innovation_cov.len();
        DMatrix::from_fn(p, p, |i, j| self.innovation_cov[i][j].mean)
    }
}
