//! Seedable random streams.
//!
//! Every stochastic component draws from an [`RngStream`], a ChaCha8 generator
//! keyed by `(seed, stream_id)`. ChaCha exposes 2^64 independent streams per
//! seed, each 2^68 bytes long, so distinct stream ids never overlap. Parallel
//! work derives one stream per unit of work (realization, particle block) with
//! [`RngStream::derive`], which makes results independent of scheduling.
//!
//! Gaussian variates use Box–Muller with exactly two uniforms per variate, so
//! the number of raw draws per event is fixed.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};

/// Default master seed.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

// splitmix64 finalizer
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh stream (positioned at its start) whose id is a hash of this
    /// stream's id and `key`. Does not advance `self`.
    pub fn derive(&self, key: u64) -> RngStream {
        let id = mix64(self.stream_id ^ mix64(key.wrapping_add(0x9e37_79b9_7f4a_7c15)));
        RngStream::new(self.seed, id)
    }

    /// Uniform variate in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform variate in `[lo, hi)`.
    #[inline]
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal variate (Box–Muller, cosine branch).
    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn normal(&mut self, mean: f64, std: f64) -> Result<f64> {
        if !(std >= 0.0) {
            return Err(Error::invalid("std", format!("must be >= 0, got {std}")));
        }
        // Consume the draws even when std = 0 so stream alignment is unchanged.
        let z = self.standard_normal();
        if std == 0.0 {
            return Ok(mean);
        }
        Ok(mean + std * z)
    }

    /// Isotropic direction on the (d-1)-sphere. In 1D this is ±1.
    pub fn uniform_unit_vector(&mut self, dim: usize) -> Result<Vec<f64>> {
        match dim {
            1 => Ok(vec![if self.uniform() < 0.5 { -1.0 } else { 1.0 }]),
            2 => {
                let theta = std::f64::consts::TAU * self.uniform();
                Ok(vec![theta.cos(), theta.sin()])
            }
            3 => {
                // Archimedes: z uniform on [-1, 1] gives uniform area on the sphere.
                let z = 2.0 * self.uniform() - 1.0;
                let phi = std::f64::consts::TAU * self.uniform();
                let r = (1.0 - z * z).max(0.0).sqrt();
                Ok(vec![r * phi.cos(), r * phi.sin(), z])
            }
            _ => Err(Error::UnsupportedDimension { dim }),
        }
    }
}
