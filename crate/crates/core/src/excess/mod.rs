//! Excess-distortion probabilities `P{S_n/n ≥ d}` for the realized
//! reproduction processes.
//!
//! For the BSMS the distortion sequence is the label process `f(X_i, Y_i)` of
//! the joint Markov chain; concentration bounds ([`hoeffding_bound`],
//! [`reversible_bound`]) and the large-deviations rate function
//! ([`rate_function`]) follow from its transition matrix. For Gaussian
//! sources the error recursion of the realization is assembled
//! ([`gaussian_error_recursion`]) and the Chernoff exponent is estimated by
//! Monte Carlo ([`gaussian_chernoff_exponent`]).
//!
//! Exceedance is `S_n ≥ n d` throughout, and exponents are in nats.

mod bounds;
mod gaussian;
mod ratefn;
mod sim;

pub use bounds::{
    hoeffding_bound, hoeffding_lambda, hoeffding_threshold, is_reversible, reversible_bound,
    second_eigenvalue, second_eigenvalue_general, spectral_bound_unchecked,
};
pub use gaussian::{
    gaussian_chernoff_exponent, gaussian_error_recursion, ChernoffEstimate, GaussianErrorRecursion,
};
pub use ratefn::{
    exceedance_exponent, log_tilted_radius, rate_function, rate_function_curve, RateFunctionCurve,
    RatePoint,
};
pub use sim::{simulate_excess, simulate_excess_bsms, ExcessEstimate, Sampling};
