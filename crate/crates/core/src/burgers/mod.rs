//! Periodic 1D Burgers gas exchanging momentum with a disperse phase.
//!
//! The gas obeys u_t + (u^2 / 2)_x = S / rho_f, where S is the drag exerted by
//! the particles. The disperse phase is either a set of Lagrangian point
//! particles, deposited on the cells they occupy, or the pressureless moment
//! fields (n, u_l) of one random particle draw.

mod ensemble;
mod eulerian;
mod fit;
mod homogeneous;
mod lagrangian;

pub use ensemble::{ensemble_experiment, EnsembleCurve, EnsembleResult, Placement, Scheme};
pub use eulerian::{step_eulerian_empirical, EulerianMomentState, PositivityPolicy, DENSITY_FLOOR};
pub use fit::{fit_effective_tau, TauFit, TauFitRow, TAU_SEARCH_RANGE};
pub use homogeneous::{godunov_flux, homogeneous_solution};
pub use lagrangian::{deposit_drag, step_lagrangian, BurgersState};

use crate::error::{Error, Result};

/// Physical and numerical parameters shared by every scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct BurgersConfig {
    /// Domain length L_x (m).
    pub length: f64,
    pub n_cells: usize,
    /// Gas density (kg/m^3).
    pub rho_f: f64,
    pub tau_p: f64,
    /// Mean mass loading N_p m_p / (rho_f L_x).
    pub kappa_m: f64,
    pub n_particles: usize,
    pub u0_gas: f64,
    pub u0_particles: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Courant number bound for the admissible time step.
    pub cfl: f64,
    /// Gas viscosity (m^2/s), central second difference.
    pub nu_gas: f64,
    /// Spatial means are recorded every this many steps.
    pub record_every: usize,
}

impl Default for BurgersConfig {
    fn default() -> Self {
        Self {
            length: 1.0,
            n_cells: 128,
            rho_f: 1.0,
            tau_p: 0.1,
            kappa_m: 1.0,
            n_particles: 64,
            u0_gas: 1.0,
            u0_particles: 0.0,
            dt: 1e-4,
            t_end: 0.5,
            cfl: 0.5,
            nu_gas: 0.0,
            record_every: 10,
        }
    }
}

impl BurgersConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be finite and > 0, got {v}")))
            }
        };
        pos("length", self.length)?;
        pos("rho_f", self.rho_f)?;
        pos("tau_p", self.tau_p)?;
        pos("dt", self.dt)?;
        pos("cfl", self.cfl)?;
        if self.n_cells < 4 {
            return Err(Error::invalid("n_cells", "must be >= 4"));
        }
        if !(self.kappa_m >= 0.0) {
            return Err(Error::invalid("kappa_m", "must be >= 0"));
        }
        if !(self.nu_gas >= 0.0) {
            return Err(Error::invalid("nu_gas", "must be >= 0"));
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::invalid("t_end", "must be >= 0"));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record_every", "must be >= 1"));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n_cells as f64
    }

    /// Mass of one particle for `n_particles` at the configured loading.
    pub fn particle_mass(&self, n_particles: usize) -> f64 {
        self.kappa_m * self.rho_f * self.length / n_particles as f64
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    /// Largest stable step for the given maximal transport speed.
    pub fn admissible_dt(&self, max_speed: f64) -> f64 {
        let dx = self.dx();
        let mut dt = if max_speed > 0.0 {
            self.cfl * dx / max_speed
        } else {
            f64::INFINITY
        };
        if self.nu_gas > 0.0 {
            dt = dt.min(0.5 * dx * dx / self.nu_gas);
        }
        dt
    }

    pub(crate) fn check_dt(&self, dt: f64, max_speed: f64) -> Result<()> {
        let admissible = self.admissible_dt(max_speed);
        if !(dt > 0.0) || dt > admissible {
            return Err(Error::Stability { dt, admissible });
        }
        Ok(())
    }
}

/// Periodic cell index of position `x` in [0, L).
#[inline]
pub(crate) fn cell_of(x: f64, dx: f64, n: usize) -> usize {
    ((x / dx) as usize).min(n - 1)
}

/// Wraps `x` into [0, L).
#[inline]
pub(crate) fn wrap(x: f64, l: f64) -> f64 {
    let y = x.rem_euclid(l);
    if y >= l {
        0.0
    } else {
        y
    }
}
