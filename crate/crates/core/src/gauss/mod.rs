//! Partially observed Gauss-Markov sources with square-error distortion.
//!
//! The source is `Z_{t+1} = A Z_t + B W_t`, `X_t = C Z_t + N V_t` with unit
//! white Gaussian `W`, `V`. Its nonanticipative RDF is
//! `½ Σ log₂(λ_i / δ_i)` where `λ` is the spectrum of the steady-state
//! innovation covariance `Λ = C Σ Cᵗ + N Nᵗ`, `δ` is the reverse water-filling
//! allocation of `D` over `λ`, and `Σ` solves a Riccati equation whose gain
//! itself depends on `λ` and `δ`. [`solve_realization`] finds that joint
//! fixed point.

mod model;
mod realization;
mod scalar;
mod waterfill;

pub use model::GaussModel;
pub use realization::{solve_realization, RealizationSolution, SolverOptions};
pub use scalar::{
    classical_alpha1, partially_observed_cubic, rate_loss_alpha1, rna_scalar_fully_observed,
    rna_scalar_partially_observed, ScalarRate,
};
pub use waterfill::{reverse_waterfill, WaterFill};
