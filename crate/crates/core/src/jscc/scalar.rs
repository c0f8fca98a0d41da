use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{awgn_capacity, STEPS_PER_SHARD};
use crate::error::{domain, Result};
use crate::gauss::rna_scalar_fully_observed;
use crate::math::{run_sharded, BatchMeans, Estimate, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JsccMode {
    /// Encoder sees past channel outputs and sends the innovation.
    Feedback,
    /// Encoder scales the raw source sample.
    NoFeedback,
    /// Memoryless source (α = 0), no feedback.
    Iid,
}

/// Matched scalar design for `X' = αX + σ_W W` over `B = A + σ_Vc V^c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JsccScalarDesign {
    pub mode: JsccMode,
    pub alpha: f64,
    pub sigma_w: f64,
    pub sigma_vc: f64,
    pub power: f64,
    pub encoder_gain: f64,
    pub decoder_gain: f64,
    pub d_min: f64,
    /// Bits per channel use at `power`.
    pub capacity: f64,
    /// Variance of what the encoder scales (innovation or raw sample).
    pub encoder_input_var: f64,
}

impl JsccScalarDesign {
    /// Stationary source variance `σ_W²/(1−α²)`.
    pub fn source_var(&self) -> f64 {
        self.sigma_w * self.sigma_w / (1.0 - self.alpha * self.alpha)
    }

    /// Rate the design is matched to, evaluated at `d_min`: the Markov
    /// nonanticipative RDF with feedback, the memoryless Gaussian RDF of the
    /// marginal `½ log₂(σ_X²/D)` without.
    pub fn matched_rate(&self) -> Result<f64> {
        match self.mode {
            JsccMode::Feedback => rna_scalar_fully_observed(self.alpha, self.sigma_w, self.d_min),
            JsccMode::NoFeedback | JsccMode::Iid => Ok((0.5 * (self.source_var() / self.d_min).log2()).max(0.0)),
        }
    }

    /// Spectral radius of the error dynamics driving the burn-in length.
    fn memory(&self) -> f64 {
        match self.mode {
            JsccMode::Feedback => self.alpha.abs() * (1.0 - self.encoder_gain * self.decoder_gain),
            _ => self.alpha.abs(),
        }
    }
}

fn check(alpha: f64, sigma_w: f64, sigma_vc: f64, power: f64) -> Result<()> {
    if !(alpha.abs() < 1.0) {
        return domain(format!("need |alpha| < 1, got {alpha}"));
    }
    if !(sigma_w > 0.0 && sigma_vc > 0.0) || !sigma_w.is_finite() || !sigma_vc.is_finite() {
        return domain("sigma_W and sigma_Vc must be positive");
    }
    if !(power >= 0.0) || !power.is_finite() {
        return domain(format!("power must be nonnegative, got {power}"));
    }
    Ok(())
}

/// Feedback design: the encoder transmits the scaled innovation
/// `√(P/λ)(X_t − E{X_t|B^{t−1}})` and the decoder adds `B∞ B_t` to the
/// prediction.
pub fn design_feedback_scalar(alpha: f64, sigma_w: f64, sigma_vc: f64, power: f64) -> Result<JsccScalarDesign> {
    check(alpha, sigma_w, sigma_vc, power)?;
    let (a2, w2, v2) = (alpha * alpha, sigma_w * sigma_w, sigma_vc * sigma_vc);
    let d_min = w2 * v2 / ((1.0 - a2) * v2 + power);
    let innovation = a2 * d_min + w2;
    Ok(JsccScalarDesign {
        mode: JsccMode::Feedback,
        alpha,
        sigma_w,
        sigma_vc,
        power,
        encoder_gain: (power / innovation).sqrt(),
        decoder_gain: (w2 * power / (((1.0 - a2) * v2 + power) * (v2 + power))).sqrt(),
        d_min,
        capacity: awgn_capacity(power, v2),
        encoder_input_var: innovation,
    })
}

/// No-feedback design: `A_t = √((1−α²)P/σ_W²) X_t`, `Y_t = B∞ B_t`.
pub fn design_nofeedback_scalar(alpha: f64, sigma_w: f64, sigma_vc: f64, power: f64) -> Result<JsccScalarDesign> {
    check(alpha, sigma_w, sigma_vc, power)?;
    let (a2, w2, v2) = (alpha * alpha, sigma_w * sigma_w, sigma_vc * sigma_vc);
    let decoder_gain = if power > 0.0 {
        (w2 / ((1.0 - a2) * power)).sqrt() * power / (power + v2)
    } else {
        0.0
    };
    Ok(JsccScalarDesign {
        mode: JsccMode::NoFeedback,
        alpha,
        sigma_w,
        sigma_vc,
        power,
        encoder_gain: ((1.0 - a2) * power / w2).sqrt(),
        decoder_gain,
        d_min: w2 * v2 / ((1.0 - a2) * (power + v2)),
        capacity: awgn_capacity(power, v2),
        encoder_input_var: w2 / (1.0 - a2),
    })
}

/// Memoryless Gaussian source `N(0, σ_X²)` sent uncoded.
pub fn design_iid(sigma_x: f64, sigma_vc: f64, power: f64) -> Result<JsccScalarDesign> {
    let mut d = design_nofeedback_scalar(0.0, sigma_x, sigma_vc, power)?;
    d.mode = JsccMode::Iid;
    Ok(d)
}

/// Monte Carlo summary of a simulated design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    /// Samples entering the statistics (after burn-in).
    pub samples: usize,
    pub burn_in: usize,
    /// Mean squared reconstruction error per time step.
    pub distortion: Estimate,
    /// Mean squared channel input per use.
    pub power: Estimate,
    pub stream: RngStream,
}

pub(crate) fn burn_in_for(memory: f64) -> usize {
    let tau = if memory > 0.0 && memory < 1.0 { -1.0 / memory.ln() } else if memory >= 1.0 { f64::INFINITY } else { 0.0 };
    ((10.0 * tau).ceil() as usize).clamp(100, 1_000_000)
}

/// One step of the scalar encoder/channel/decoder loop.
struct ScalarLoop<'a> {
    design: &'a JsccScalarDesign,
    x: f64,
    prediction: f64,
}

struct StepOut {
    innovation: f64,
    input: f64,
    output: f64,
    error: f64,
}

impl<'a> ScalarLoop<'a> {
    fn new<R: Rng>(design: &'a JsccScalarDesign, rng: &mut R) -> Self {
        let x0: f64 = rng.sample(StandardNormal);
        Self { design, x: x0 * design.source_var().sqrt(), prediction: 0.0 }
    }

    fn step<R: Rng>(&mut self, rng: &mut R) -> StepOut {
        let d = self.design;
        let innovation = self.x - self.prediction;
        let input = match d.mode {
            JsccMode::Feedback => d.encoder_gain * innovation,
            _ => d.encoder_gain * self.x,
        };
        let vc: f64 = rng.sample(StandardNormal);
        let output = input + d.sigma_vc * vc;
        let y = self.prediction + d.decoder_gain * output;
        let error = self.x - y;
        if d.mode == JsccMode::Feedback {
            self.prediction = d.alpha * y;
        }
        let w: f64 = rng.sample(StandardNormal);
        self.x = d.alpha * self.x + d.sigma_w * w;
        StepOut { innovation, input, output, error }
    }
}

/// Simulates `n` time steps of a scalar design and reports empirical
/// distortion and power.
///
/// Steps are split into shards on forked streams; every shard starts from the
/// stationary source law with an empty predictor and discards a burn-in of
/// ten time constants (at least 100 steps). Standard errors are batch means.
pub fn simulate_scalar(design: &JsccScalarDesign, n: usize, stream: RngStream) -> Result<SimulationReport> {
    if n == 0 {
        return domain("need at least one step");
    }
    let burn_in = burn_in_for(design.memory());
    let parts = run_sharded(&stream, n, STEPS_PER_SHARD, |_, len, s| {
        let mut rng = s.rng();
        let mut sim = ScalarLoop::new(design, &mut rng);
        for _ in 0..burn_in {
            sim.step(&mut rng);
        }
        let mut dist = BatchMeans::for_len(len);
        let mut pow = BatchMeans::for_len(len);
        for _ in 0..len {
            let o = sim.step(&mut rng);
            dist.push(o.error * o.error);
            pow.push(o.input * o.input);
        }
        (dist, pow)
    });
    let (dist, pow): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
    Ok(SimulationReport {
        samples: n,
        burn_in,
        distortion: Estimate::combine(&dist),
        power: Estimate::combine(&pow),
        stream,
    })
}

/// Post-burn-in time series of one scalar run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarTrace {
    /// Encoder input `K_t = X_t − E{X_t|B^{t−1}}`.
    pub innovation: Vec<f64>,
    /// Channel outputs `B_t`.
    pub output: Vec<f64>,
    pub error: Vec<f64>,
}

impl ScalarTrace {
    /// Sample correlation between `K_t` and `B_{t−lag}`.
    pub fn innovation_output_corr(&self, lag: usize) -> f64 {
        let n = self.innovation.len().saturating_sub(lag);
        let k = &self.innovation[lag..];
        let b = &self.output[..n];
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (mk, mb) = (mean(k), mean(b));
        let (mut skb, mut skk, mut sbb) = (0.0, 0.0, 0.0);
        for (x, y) in k.iter().zip(b) {
            skb += (x - mk) * (y - mb);
            skk += (x - mk) * (x - mk);
            sbb += (y - mb) * (y - mb);
        }
        skb / (skk * sbb).sqrt()
    }
}

/// Single-stream run of `n` steps (after burn-in) keeping the full series.
pub fn scalar_trace(design: &JsccScalarDesign, n: usize, stream: RngStream) -> ScalarTrace {
    let mut rng = stream.rng();
    let mut sim = ScalarLoop::new(design, &mut rng);
    for _ in 0..burn_in_for(design.memory()) {
        sim.step(&mut rng);
    }
    let mut t = ScalarTrace {
        innovation: Vec::with_capacity(n),
        output: Vec::with_capacity(n),
        error: Vec::with_capacity(n),
    };
    for _ in 0..n {
        let o = sim.step(&mut rng);
        t.innovation.push(o.innovation);
        t.output.push(o.output);
        t.error.push(o.error);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn feedback_example() {
        let d = design_feedback_scalar(0.5, 1.0, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(d.d_min, 1.0 / 1.75, epsilon = 1e-15);
        assert_abs_diff_eq!(d.capacity, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.matched_rate().unwrap(), d.capacity, epsilon = 1e-12);
        assert_abs_diff_eq!(d.encoder_gain.powi(2) * d.encoder_input_var, d.power, epsilon = 1e-12);
        // decoder is the MMSE coefficient Cov(K, B)/Var(B)
        let mmse = d.encoder_gain * d.encoder_input_var / (d.power + 1.0);
        assert_abs_diff_eq!(d.decoder_gain, mmse, epsilon = 1e-15);
    }

    #[test]
    fn nofeedback_example() {
        let d = design_nofeedback_scalar(0.5, 1.0, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(d.d_min, 1.0 / 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.matched_rate().unwrap(), d.capacity, epsilon = 1e-12);
        assert_abs_diff_eq!(d.encoder_gain.powi(2) * d.encoder_input_var, d.power, epsilon = 1e-12);
        let fb = design_feedback_scalar(0.5, 1.0, 1.0, 1.0).unwrap();
        assert!(fb.d_min < d.d_min);
    }

    #[test]
    fn designs_coincide_without_memory() {
        let fb = design_feedback_scalar(0.0, 1.3, 0.7, 2.0).unwrap();
        let nfb = design_nofeedback_scalar(0.0, 1.3, 0.7, 2.0).unwrap();
        let iid = design_iid(1.3, 0.7, 2.0).unwrap();
        assert_abs_diff_eq!(fb.d_min, nfb.d_min, epsilon = 1e-15);
        assert_abs_diff_eq!(iid.d_min, 1.69 * 0.49 / (0.49 + 2.0), epsilon = 1e-15);
        assert_eq!(iid.mode, JsccMode::Iid);
    }

    #[test]
    fn zero_power_sends_nothing() {
        for d in [design_feedback_scalar(0.5, 1.0, 1.0, 0.0).unwrap(), design_nofeedback_scalar(0.5, 1.0, 1.0, 0.0).unwrap()] {
            assert_eq!((d.encoder_gain, d.decoder_gain, d.capacity), (0.0, 0.0, 0.0));
            assert_abs_diff_eq!(d.d_min, 4.0 / 3.0, epsilon = 1e-15);
            let r = simulate_scalar(&d, 50_000, RngStream::new(3, 0)).unwrap();
            assert_eq!(r.power.mean, 0.0);
            assert!(r.distortion.within(4.0 / 3.0, 0.03, 4.0), "{r:?}");
        }
    }

    #[test]
    fn simulation_is_deterministic() {
        let d = design_feedback_scalar(0.5, 1.0, 1.0, 1.0).unwrap();
        let a = simulate_scalar(&d, 300_000, RngStream::new(9, 1)).unwrap();
        let b = simulate_scalar(&d, 300_000, RngStream::new(9, 1)).unwrap();
        assert_eq!(a, b);
        let c = simulate_scalar(&d, 300_000, RngStream::new(10, 1)).unwrap();
        assert_ne!(a.distortion.mean, c.distortion.mean);
    }

    #[test]
    fn simulated_distortion_matches_design() {
        for d in [
            design_feedback_scalar(0.8, 1.0, 0.5, 2.0).unwrap(),
            design_nofeedback_scalar(-0.6, 1.0, 1.0, 1.0).unwrap(),
            design_iid(2.0, 1.0, 3.0).unwrap(),
        ] {
            let r = simulate_scalar(&d, 200_000, RngStream::new(5, 0)).unwrap();
            assert!(r.distortion.within(d.d_min, 0.0, 5.0), "{:?} {r:?}", d.mode);
            assert!(r.power.within(d.power, 0.0, 5.0), "{:?} {r:?}", d.mode);
        }
    }

    #[test]
    fn feedback_innovations_are_uncorrelated_with_past_outputs() {
        let d = design_feedback_scalar(0.9, 1.0, 1.0, 1.0).unwrap();
        let n = 100_000;
        let t = scalar_trace(&d, n, RngStream::new(21, 0));
        let bound = 4.0 / (n as f64).sqrt();
        for lag in 1..=5 {
            assert!(t.innovation_output_corr(lag).abs() <= bound, "lag {lag}");
        }
        // without feedback the raw source is strongly correlated with the past
        let nfb = design_nofeedback_scalar(0.9, 1.0, 1.0, 1.0).unwrap();
        let t = scalar_trace(&nfb, n, RngStream::new(21, 0));
        assert!(t.innovation_output_corr(1) > 0.5);
    }

    proptest! {
        #[test]
        fn matching_identity(alpha in -0.99f64..0.99, sw in 0.1f64..5.0, sv in 0.1f64..5.0, p in 0.01f64..50.0) {
            let fb = design_feedback_scalar(alpha, sw, sv, p).unwrap();
            let nfb = design_nofeedback_scalar(alpha, sw, sv, p).unwrap();
            for d in [fb, nfb] {
                prop_assert!(d.d_min > 0.0);
                prop_assert!((d.matched_rate().unwrap() - d.capacity).abs() <= 1e-12 * d.capacity.max(1.0));
                prop_assert!((d.encoder_gain.powi(2) * d.encoder_input_var - p).abs() <= 1e-12 * p.max(1.0));
            }
            prop_assert!(fb.d_min <= nfb.d_min * (1.0 + 1e-12));
            if alpha.abs() > 1e-3 { prop_assert!(fb.d_min < nfb.d_min); }
        }
    }
}
