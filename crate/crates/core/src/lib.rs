//! Particle clouds in synthetic turbulence, mean-field limits and two-way
//! coupled Burgers flows.
//!
//! Modules, bottom-up:
//! - [`rng`]: seedable, splittable random streams
//! - [`stats`]: variances, rank correlation, log-log regression
//! - [`turbulence`]: random Fourier-mode velocity fields
//! - [`lagrangian`]: Stokes-drag particle tracking and dispersion statistics
//! - [`sine1d`]: the single-sine one-dimensional drag system
//! - [`meanfield`]: interacting vs. mean-field particle systems and
//!   Wasserstein estimators
//! - [`burgers`]: 1D Burgers gas coupled to particles or to moment fields

// Parameter checks are written `!(x > 0.0)` on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod burgers;
pub mod error;
pub mod lagrangian;
pub mod meanfield;
pub mod parallel;
pub mod quad;
pub mod rng;
pub mod sine1d;
pub mod stats;
pub mod trig;
pub mod turbulence;

pub use error::{Error, ErrorKind, Result};
pub use rng::RngStream;
