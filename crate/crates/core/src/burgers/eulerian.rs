use super::lagrangian::gas_update;
use super::{cell_of, wrap, BurgersConfig};
use crate::error::{Error, Result};

/// Number densities below this are treated as vacuum (first-order fallback,
/// velocity carried over).
pub const DENSITY_FLOOR: f64 = 1e-12;

/// What to do when a step produces a negative density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PositivityPolicy {
    /// Reset to zero and count the event in `clip_count`.
    #[default]
    Clip,
    Error,
}

/// Gas cells plus the number density and velocity of the disperse phase.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerianMomentState {
    /// Number density n_l (1/m) per cell.
    pub n: Vec<f64>,
    /// Disperse velocity u_l per cell.
    pub ul: Vec<f64>,
    pub gas: Vec<f64>,
    pub m_p: f64,
    pub t: f64,
    /// Negative densities reset to zero so far.
    pub clip_count: usize,
    pub policy: PositivityPolicy,
}

impl EulerianMomentState {
    /// Moments of the empirical measure of particles at `positions` with the
    /// uniform initial velocities of `cfg`.
    pub fn from_particles(cfg: &BurgersConfig, positions: &[f64]) -> Result<Self> {
        cfg.validate()?;
        if positions.is_empty() {
            return Err(Error::invalid("n_particles", "must be >= 1"));
        }
        let (dx, nc) = (cfg.dx(), cfg.n_cells);
        let mut n = vec![0.0; nc];
        for &x in positions {
            n[cell_of(wrap(x, cfg.length), dx, nc)] += 1.0 / dx;
        }
        Ok(Self {
            n,
            ul: vec![cfg.u0_particles; nc],
            gas: vec![cfg.u0_gas; nc],
            m_p: cfg.particle_mass(positions.len()),
            t: 0.0,
            clip_count: 0,
            policy: PositivityPolicy::Clip,
        })
    }

    /// Uniform density carrying a total of `n_particles`.
    pub fn uniform(cfg: &BurgersConfig, n_particles: usize) -> Result<Self> {
        cfg.validate()?;
        let nc = cfg.n_cells;
        Ok(Self {
            n: vec![n_particles as f64 / cfg.length; nc],
            ul: vec![cfg.u0_particles; nc],
            gas: vec![cfg.u0_gas; nc],
            m_p: cfg.particle_mass(n_particles),
            t: 0.0,
            clip_count: 0,
            policy: PositivityPolicy::Clip,
        })
    }

    pub fn mean_gas(&self) -> f64 {
        self.gas.iter().sum::<f64>() / self.gas.len() as f64
    }

    /// Mass-weighted mean disperse velocity.
    pub fn mean_particle(&self) -> f64 {
        let m: f64 = self.n.iter().sum();
        if m > 0.0 {
            self.n.iter().zip(&self.ul).map(|(n, u)| n * u).sum::<f64>() / m
        } else {
            0.0
        }
    }

    pub fn momentum(&self, cfg: &BurgersConfig) -> f64 {
        let dx = cfg.dx();
        cfg.rho_f * dx * self.gas.iter().sum::<f64>()
            + self.m_p * dx * self.n.iter().zip(&self.ul).map(|(n, u)| n * u).sum::<f64>()
    }

    fn max_speed(&self) -> f64 {
        let g = self.gas.iter().fold(0.0f64, |m, u| m.max(u.abs()));
        self.n
            .iter()
            .zip(&self.ul)
            .filter(|(n, _)| **n > DENSITY_FLOOR)
            .fold(g, |m, (_, u)| m.max(u.abs()))
    }
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Kinetic upwind flux of the pressureless phase between states a | b:
/// particles cross the face in the direction of their own velocity.
#[inline]
fn kinetic_flux(na: f64, ua: f64, nb: f64, ub: f64) -> (f64, f64) {
    let (pa, mb) = (ua.max(0.0), ub.min(0.0));
    (na * pa + nb * mb, na * ua * pa + nb * ub * mb)
}

/// One explicit, unsplit step of the gas and pressureless moment system.
///
/// The disperse phase uses MUSCL-Hancock with minmod slopes on (n, u_l),
/// dropping to first order next to vacuum; the gas uses the same first-order
/// Godunov update as the particle scheme. Drag is evaluated at the start of
/// the step and cancels exactly in the total momentum.
pub fn step_eulerian_empirical(
    state: &mut EulerianMomentState,
    cfg: &BurgersConfig,
    dt: f64,
) -> Result<()> {
    cfg.check_dt(dt, state.max_speed())?;
    let nc = cfg.n_cells;
    if state.gas.len() != nc || state.n.len() != nc || state.ul.len() != nc {
        return Err(Error::InvalidInput("state does not match n_cells".into()));
    }
    let dx = cfg.dx();
    let (n, ul) = (&state.n, &state.ul);
    let vac = |j: usize| n[j] <= DENSITY_FLOOR;

    // face states (left face, right face) of every cell after the half step
    let mut faces = vec![[(0.0, 0.0); 2]; nc];
    let half = 0.5 * dt / dx;
    for j in 0..nc {
        let (jm, jp) = ((j + nc - 1) % nc, (j + 1) % nc);
        if vac(j) {
            faces[j] = [(n[j], ul[j]); 2];
            continue;
        }
        let dn = minmod(n[j] - n[jm], n[jp] - n[j]);
        let du = if vac(jm) || vac(jp) {
            0.0
        } else {
            minmod(ul[j] - ul[jm], ul[jp] - ul[j])
        };
        // half step of the primitive system n_t + u n_x + n u_x = 0, u_t + u u_x = 0
        let dn_t = -half * (ul[j] * dn + n[j] * du);
        let du_t = -half * ul[j] * du;
        let face = |s: f64| {
            let nn = (n[j] + 0.5 * s * dn + dn_t).max(0.0);
            (nn, ul[j] + 0.5 * s * du + du_t)
        };
        faces[j] = [face(-1.0), face(1.0)];
    }
    // interface fluxes at j + 1/2
    let flux: Vec<(f64, f64)> = (0..nc)
        .map(|j| {
            let (na, ua) = faces[j][1];
            let (nb, ub) = faces[(j + 1) % nc][0];
            kinetic_flux(na, ua, nb, ub)
        })
        .collect();

    // drag at the start of the step
    let coef = state.m_p / (cfg.rho_f * cfg.tau_p);
    let source: Vec<f64> = (0..nc).map(|j| coef * n[j] * (ul[j] - state.gas[j])).collect();
    let new_gas = gas_update(&state.gas, &source, cfg, dt);

    let r = dt / dx;
    let mut new_n = vec![0.0; nc];
    let mut new_ul = vec![0.0; nc];
    for j in 0..nc {
        let jm = (j + nc - 1) % nc;
        let nj = n[j] - r * (flux[j].0 - flux[jm].0);
        let qj = n[j] * ul[j] - r * (flux[j].1 - flux[jm].1)
            + dt * n[j] * (state.gas[j] - ul[j]) / cfg.tau_p;
        if nj < 0.0 {
            match state.policy {
                PositivityPolicy::Error => {
                    return Err(Error::Positivity { cell: j, value: nj });
                }
                PositivityPolicy::Clip => {
                    state.clip_count += 1;
                    new_n[j] = 0.0;
                    new_ul[j] = ul[j];
                    continue;
                }
            }
        }
        new_n[j] = nj;
        new_ul[j] = if nj > DENSITY_FLOOR { qj / nj } else { ul[j] };
    }
    state.n = new_n;
    state.ul = new_ul;
    state.gas = new_gas;
    state.t += dt;
    Ok(())
}
