use super::homogeneous::godunov_flux;
use super::{cell_of, wrap, BurgersConfig};
use crate::error::{Error, Result};

/// Gas cells plus point particles.
#[derive(Debug, Clone, PartialEq)]
pub struct BurgersState {
    /// Cell-averaged gas velocity.
    pub gas: Vec<f64>,
    /// Particle positions in [0, L).
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    /// Mass of each particle.
    pub m_p: f64,
    pub t: f64,
}

impl BurgersState {
    /// Uniform gas and particle velocities with particles at `positions`;
    /// the particle mass follows from the configured loading.
    pub fn new(cfg: &BurgersConfig, positions: Vec<f64>) -> Result<Self> {
        cfg.validate()?;
        if positions.is_empty() {
            return Err(Error::invalid("n_particles", "must be >= 1"));
        }
        let n = positions.len();
        let x: Vec<f64> = positions.into_iter().map(|p| wrap(p, cfg.length)).collect();
        Ok(Self {
            gas: vec![cfg.u0_gas; cfg.n_cells],
            v: vec![cfg.u0_particles; n],
            x,
            m_p: cfg.particle_mass(n),
            t: 0.0,
        })
    }

    /// One particle at each of `n` equispaced positions, offset half a spacing.
    pub fn equispaced(cfg: &BurgersConfig, n: usize) -> Result<Self> {
        let h = cfg.length / n as f64;
        Self::new(cfg, (0..n).map(|i| (i as f64 + 0.5) * h).collect())
    }

    pub fn mean_gas(&self) -> f64 {
        self.gas.iter().sum::<f64>() / self.gas.len() as f64
    }

    pub fn mean_particle(&self) -> f64 {
        self.v.iter().sum::<f64>() / self.v.len() as f64
    }

    /// rho_f int u dx + sum m_p v_i.
    pub fn momentum(&self, cfg: &BurgersConfig) -> f64 {
        cfg.rho_f * cfg.dx() * self.gas.iter().sum::<f64>() + self.m_p * self.v.iter().sum::<f64>()
    }

    fn max_speed(&self) -> f64 {
        self.gas
            .iter()
            .chain(&self.v)
            .fold(0.0f64, |m, u| m.max(u.abs()))
    }
}

/// Drag source on the gas per cell (m/s^2):
/// S_j = sum over particles in cell j of m_p (v_i - u_j) / (rho_f dx tau_p).
pub fn deposit_drag(state: &BurgersState, cfg: &BurgersConfig) -> Vec<f64> {
    let n = cfg.n_cells;
    let dx = cfg.dx();
    let mut s = vec![0.0; n];
    for (&x, &v) in state.x.iter().zip(&state.v) {
        let j = cell_of(x, dx, n);
        s[j] += v - state.gas[j];
    }
    let scale = state.m_p / (cfg.rho_f * dx * cfg.tau_p);
    for sj in s.iter_mut() {
        *sj *= scale;
    }
    s
}

/// Flux difference, viscosity and drag update of the gas, all evaluated on
/// the state at the start of the step.
pub(crate) fn gas_update(gas: &[f64], source: &[f64], cfg: &BurgersConfig, dt: f64) -> Vec<f64> {
    let n = gas.len();
    let dx = cfg.dx();
    let r = dt / dx;
    let visc = cfg.nu_gas * dt / (dx * dx);
    let flux: Vec<f64> = (0..n).map(|j| godunov_flux(gas[j], gas[(j + 1) % n])).collect();
    (0..n)
        .map(|j| {
            let (jm, jp) = ((j + n - 1) % n, (j + 1) % n);
            let mut u = gas[j] - r * (flux[j] - flux[jm]) + dt * source[j];
            if visc > 0.0 {
                u += visc * (gas[jp] - 2.0 * gas[j] + gas[jm]);
            }
            u
        })
        .collect()
}

/// One explicit, unsplit step of the coupled gas/particle system.
///
/// Gas: Godunov finite volumes plus the deposited drag. Particles: explicit
/// Euler drag toward the gas value of their cell, then advection with the
/// old velocity and periodic wrap. The drag exchange cancels exactly in the
/// total momentum.
pub fn step_lagrangian(state: &mut BurgersState, cfg: &BurgersConfig, dt: f64) -> Result<()> {
    cfg.check_dt(dt, state.max_speed())?;
    if state.gas.len() != cfg.n_cells {
        return Err(Error::InvalidInput("gas grid does not match n_cells".into()));
    }
    let source = deposit_drag(state, cfg);
    let new_gas = gas_update(&state.gas, &source, cfg, dt);
    let (dx, n) = (cfg.dx(), cfg.n_cells);
    for (x, v) in state.x.iter_mut().zip(state.v.iter_mut()) {
        let u = state.gas[cell_of(*x, dx, n)];
        let v_old = *v;
        *v += dt * (u - v_old) / cfg.tau_p;
        *x = wrap(*x + dt * v_old, cfg.length);
    }
    state.gas = new_gas;
    state.t += dt;
    Ok(())
}
