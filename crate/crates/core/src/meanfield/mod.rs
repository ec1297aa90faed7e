//! Interacting particle systems and their mean-field limit.
//!
//! An N-particle system z_i = (x_i, c_i) with pairwise interaction F and
//! external field G is coupled synchronously (same initial data, same noise)
//! to N independent "fictive" particles driven by the convolution F * f_t
//! with the limit law f_t. For affine F and G the limit law stays Gaussian and
//! its moments obey closed ODEs, which gives an exact reference.

mod experiment;
mod law;
mod spec;
mod system;
mod wasserstein;

pub use experiment::{chaos_convergence_experiment, ChaosConfig, ChaosRow, ChaosTable};
pub use law::{evolve_gaussian_law, GaussianLaw};
pub use spec::{ExternalFieldSpec, KernelSpec};
pub use system::MeanFieldSystem;
pub use wasserstein::{
    optimal_assignment, wasserstein2_1d, wasserstein2_exact, wasserstein2_exact_small,
    EXACT_SMALL_CAP,
};
