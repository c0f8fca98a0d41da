//! Nonanticipative (causal) rate-distortion toolkit.
//!
//! The crate computes the nonanticipative rate-distortion function `R^na(D)`
//! in closed form for two source families:
//!
//! * the binary symmetric Markov source with Hamming distortion ([`bsms`]);
//! * the multidimensional partially observed Gauss-Markov source with
//!   square-error distortion ([`gauss`]).
//!
//! On top of these it builds the matched zero-delay joint source-channel
//! coding designs over AWGN channels ([`jscc`]) and the excess-distortion
//! probability analysis ([`excess`]). Shared numerical kernels live in
//! [`math`]. All rates are in bits unless a name says otherwise.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bsms;
pub mod error;
pub mod excess;
pub mod gauss;
pub mod jscc;
pub mod math;

pub use bsms::{BsmsDesign, GrayBound, JointChain, RateLossPeak, TiltedFormCheck};
pub use error::{Error, Result};
pub use excess::{
    ChernoffEstimate, ExcessEstimate, GaussianErrorRecursion, RateFunctionCurve, RatePoint,
};
pub use gauss::{GaussModel, RealizationSolution, SolverOptions, WaterFill};
pub use jscc::{
    CapacityAllocation, Estimate, JsccMode, JsccScalarDesign, PowerMatch, SimulationReport,
    SkReport, VectorReport,
};
pub use math::{RngStream, Spectrum, SymmetricMatrix, NATS_PER_BIT};
