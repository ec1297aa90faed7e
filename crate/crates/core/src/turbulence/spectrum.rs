//! Model energy spectrum and the equal-energy wavenumber partition.

use crate::error::{Error, Result};
use crate::quad;

/// Relative tolerance of every spectral quadrature.
pub const QUAD_REL_TOL: f64 = 1e-10;
/// Relative tolerance of the wavenumber bisection.
pub const INVERT_REL_TOL: f64 = 1e-10;

const PANELS_PER_DECADE: usize = 20;
const C_L: f64 = 6.78;
const BETA: f64 = 5.2;
const C_ETA: f64 = 0.4;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumParams {
    /// Velocity scale (m/s).
    pub u0: f64,
    /// Wavenumber scale (1/m).
    pub k0: f64,
    /// Dissipation rate (m^2/s^3).
    pub epsilon: f64,
    /// Kolmogorov length (m).
    pub eta: f64,
    /// Frequency spread coefficient of the mode frequencies.
    pub a_hunt: f64,
    pub n_modes: usize,
    pub dim: usize,
    /// Project amplitudes orthogonal to wavevectors (dim >= 2).
    pub divergence_free: bool,
}

impl SpectrumParams {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be finite and > 0, got {v}")))
            }
        };
        pos("u0", self.u0)?;
        pos("k0", self.k0)?;
        pos("epsilon", self.epsilon)?;
        pos("eta", self.eta)?;
        pos("a_hunt", self.a_hunt)?;
        if self.n_modes == 0 {
            return Err(Error::invalid("n_modes", "must be >= 1"));
        }
        if !(1..=3).contains(&self.dim) {
            return Err(Error::UnsupportedDimension { dim: self.dim });
        }
        Ok(())
    }

    /// Non-fatal remarks about the parameter set.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if !(0.4..=0.51).contains(&self.a_hunt) {
            w.push(format!(
                "a_hunt = {} lies outside the usual range [0.4, 0.51]",
                self.a_hunt
            ));
        }
        w
    }

    /// Target cumulative energy of mode `n` (1-based): 3/2 u0^2 (2n-1)/(2N).
    pub fn mode_target(&self, n: usize) -> f64 {
        1.5 * self.u0 * self.u0 * (2 * n - 1) as f64 / (2 * self.n_modes) as f64
    }

    fn k_min(&self) -> f64 {
        self.k0 * 1e-6
    }

    fn k_max(&self) -> f64 {
        10.0 / self.eta
    }
}

/// User-facing spectrum configuration: `epsilon` and `eta` may be left open.
///
/// When `epsilon` is unset it defaults to u0^3 k0. When `eta` is unset it is
/// solved for so that the total spectral energy equals 3/2 u0^2, which is the
/// condition for the last mode of the partition to exist.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumConfig {
    pub u0: f64,
    pub k0: f64,
    pub epsilon: Option<f64>,
    pub eta: Option<f64>,
    pub a_hunt: f64,
    pub n_modes: usize,
    pub dim: usize,
    pub divergence_free: Option<bool>,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            u0: 1.0,
            k0: 1.0,
            epsilon: None,
            eta: None,
            a_hunt: 0.5,
            n_modes: 400,
            dim: 3,
            divergence_free: None,
        }
    }
}

impl SpectrumConfig {
    pub fn resolve(&self) -> Result<SpectrumParams> {
        let epsilon = self.epsilon.unwrap_or(self.u0.powi(3) * self.k0);
        let mut p = SpectrumParams {
            u0: self.u0,
            k0: self.k0,
            epsilon,
            eta: self.eta.unwrap_or(1.0),
            a_hunt: self.a_hunt,
            n_modes: self.n_modes,
            dim: self.dim,
            divergence_free: self.divergence_free.unwrap_or(self.dim >= 2),
        };
        p.validate()?;
        if self.eta.is_none() {
            p.eta = calibrate_eta(&p)?;
        }
        Ok(p)
    }
}

/// Model spectrum E(|k|) in m^3/s^2.
pub fn pope_energy(k_mag: f64, p: &SpectrumParams) -> Result<f64> {
    if !(k_mag > 0.0) {
        return Err(Error::invalid("k_mag", format!("must be > 0, got {k_mag}")));
    }
    Ok(energy_unchecked(k_mag, p))
}

#[inline]
fn energy_unchecked(k: f64, p: &SpectrumParams) -> f64 {
    let x = k / p.k0;
    let f_l = (x / (x * x + C_L).sqrt()).powf(11.0 / 3.0);
    let ke = k * p.eta;
    let f_eta = (-BETA * (((ke * ke) * (ke * ke) + C_ETA.powi(4)).powf(0.25) - C_ETA)).exp();
    2.25 * p.epsilon.powf(2.0 / 3.0) * k.powf(-5.0 / 3.0) * f_l * f_eta
}

/// Integral of E over (0, k_min]: E ~ A k^2 there.
fn small_k_integral(p: &SpectrumParams, k_min: f64) -> f64 {
    // E(k)/k^2 is constant to O(k^2) below k_min = 1e-6 k0.
    let a = energy_unchecked(k_min, p) / (k_min * k_min);
    a * k_min.powi(3) / 3.0
}

/// Log-spaced panel edges from k_min to k_max.
fn panel_edges(p: &SpectrumParams) -> Vec<f64> {
    let lo = p.k_min().log10();
    let hi = p.k_max().log10();
    let n = ((hi - lo) * PANELS_PER_DECADE as f64).ceil().max(1.0) as usize;
    (0..=n)
        .map(|i| {
            if i == n {
                p.k_max()
            } else {
                10f64.powf(lo + (hi - lo) * i as f64 / n as f64)
            }
        })
        .collect()
}

/// Cumulative energy on a fixed panel grid; evaluates the integral of E
/// from 0 to any k by table lookup plus one partial panel.
#[derive(Debug, Clone)]
pub struct SpectrumTable {
    params: SpectrumParams,
    edges: Vec<f64>,
    cumulative: Vec<f64>,
}

impl SpectrumTable {
    pub fn new(params: &SpectrumParams) -> Result<Self> {
        params.validate()?;
        let edges = panel_edges(params);
        let mut cumulative = Vec::with_capacity(edges.len());
        let mut acc = small_k_integral(params, edges[0]);
        cumulative.push(acc);
        for w in edges.windows(2) {
            acc += quad::integrate(&|k| energy_unchecked(k, params), w[0], w[1], QUAD_REL_TOL * 1e-3);
            cumulative.push(acc);
        }
        Ok(Self {
            params: params.clone(),
            edges,
            cumulative,
        })
    }

    pub fn params(&self) -> &SpectrumParams {
        &self.params
    }

    /// Integral of E over (0, infinity); the tail beyond 10/eta is below 1e-20 relative.
    pub fn total(&self) -> f64 {
        *self.cumulative.last().expect("non-empty table")
    }

    pub fn cumulative(&self, k_mag: f64) -> f64 {
        if !(k_mag > 0.0) {
            return 0.0;
        }
        let first = self.edges[0];
        if k_mag <= first {
            return small_k_integral(&self.params, k_mag.min(first));
        }
        if k_mag >= *self.edges.last().unwrap() {
            return self.total();
        }
        let i = self.edges.partition_point(|&e| e <= k_mag) - 1;
        let part = quad::integrate(
            &|k| energy_unchecked(k, &self.params),
            self.edges[i],
            k_mag,
            QUAD_REL_TOL * 1e-3,
        );
        (self.cumulative[i] + part).clamp(self.cumulative[i], self.cumulative[i + 1])
    }

    /// |k|_n of the equal-energy partition, by bisection inside the bracketing panel.
    pub fn invert(&self, n: usize) -> Result<f64> {
        let nm = self.params.n_modes;
        if n == 0 || n > nm {
            return Err(Error::invalid("n", format!("mode index must be in 1..={nm}, got {n}")));
        }
        let target = self.params.mode_target(n);
        self.invert_target(target)
    }

    pub(crate) fn invert_target(&self, target: f64) -> Result<f64> {
        let total = self.total();
        if target >= total {
            return Err(Error::SpectrumNormalization { total, target });
        }
        let (mut lo, mut hi) = if target <= self.cumulative[0] {
            (0.0, self.edges[0])
        } else {
            let i = self.cumulative.partition_point(|&c| c <= target) - 1;
            (self.edges[i], self.edges[i + 1])
        };
        while hi - lo > INVERT_REL_TOL * hi {
            let mid = 0.5 * (lo + hi);
            if self.cumulative(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Integral of E from 0 to `k_mag`.
pub fn cumulative_energy(k_mag: f64, p: &SpectrumParams) -> Result<f64> {
    if k_mag < 0.0 || k_mag.is_nan() {
        return Err(Error::invalid("k_mag", format!("must be >= 0, got {k_mag}")));
    }
    Ok(SpectrumTable::new(p)?.cumulative(k_mag))
}

/// Wavenumber magnitude of mode `n` (1-based) of the equal-energy partition.
pub fn invert_mode_wavenumber(n: usize, p: &SpectrumParams) -> Result<f64> {
    SpectrumTable::new(p)?.invert(n)
}

/// Total energy for a given eta, all other parameters fixed.
fn total_energy_for_eta(p: &SpectrumParams, eta: f64) -> Result<f64> {
    let mut q = p.clone();
    q.eta = eta;
    Ok(SpectrumTable::new(&q)?.total())
}

/// Kolmogorov length giving a total energy of 3/2 u0^2 (bisection in log eta).
pub fn calibrate_eta(p: &SpectrumParams) -> Result<f64> {
    let target = 1.5 * p.u0 * p.u0;
    let mut lo = 1e-12 / p.k0;
    let mut hi = 1e3 / p.k0;
    let t_lo = total_energy_for_eta(p, lo)?;
    if t_lo <= target {
        return Err(Error::SpectrumNormalization {
            total: t_lo,
            target,
        });
    }
    let t_hi = total_energy_for_eta(p, hi)?;
    if t_hi >= target {
        return Err(Error::SpectrumNormalization {
            total: t_hi,
            target,
        });
    }
    // total(eta) is decreasing
    for _ in 0..200 {
        let mid = (lo.ln() + 0.5 * (hi.ln() - lo.ln())).exp();
        if total_energy_for_eta(p, mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-13 {
            break;
        }
    }
    Ok((lo * hi).sqrt())
}
