//! Synthetic spectral turbulence in one, two or three dimensions.
//!
//! Mode wavenumbers split the model spectrum into `n_modes` bands of equal
//! cumulative energy; amplitudes, directions, phases and frequencies are
//! random. See [`sample_field`] for the draw order.

mod field;
mod spectrum;

pub use field::{sample_field, SpectralMode, SyntheticField, Vec3};
pub use spectrum::{
    calibrate_eta, cumulative_energy, invert_mode_wavenumber, pope_energy, SpectrumConfig,
    SpectrumParams, SpectrumTable, INVERT_REL_TOL, QUAD_REL_TOL,
};
