//! Numerical kernels shared by the source, channel and large-deviation modules.

mod entropy;
mod linalg;
mod optimize;
mod perron;
mod rng;
mod roots;
mod stats;

pub use entropy::{binary_entropy, binary_entropy_unchecked, log2, NATS_PER_BIT};
pub(crate) use linalg::{sym_eig_signed, symmetrize};
pub use linalg::{
    lyapunov_discrete, pseudo_inverse_sym, spectral_radius, sym_eig, Spectrum, SymmetricMatrix,
};
pub use optimize::maximize_concave_1d;
pub use perron::{is_irreducible, perron_eigenvalue, perron_pair};
pub use rng::RngStream;
pub use roots::{bisect_monotone, cubic_positive_root, cubic_real_roots};
pub use stats::{pairwise_sum, run_sharded, BatchMeans, Estimate};
