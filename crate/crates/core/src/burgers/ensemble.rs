//! Realization-averaged gas velocity curves and their convergence to the
//! homogeneous limit.

use rayon::prelude::*;

use super::eulerian::{step_eulerian_empirical, EulerianMomentState};
use super::homogeneous::homogeneous_solution;
use super::lagrangian::{step_lagrangian, BurgersState};
use super::BurgersConfig;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::stats::{self, RegressionResult};

/// Representation of the disperse phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Lagrangian,
    /// Pressureless moments of the cell histogram of the particle draw.
    EulerianEmpirical,
}

/// Initial particle positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Placement {
    /// i.i.d. uniform on [0, L).
    #[default]
    Random,
    /// Deterministic, at (i + 1/2) L / N_p.
    Equispaced,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleCurve {
    pub np: usize,
    /// Realization mean of the spatially averaged gas velocity.
    pub mean_gas: Vec<f64>,
    pub stderr_gas: Vec<f64>,
    pub mean_particle: Vec<f64>,
    /// Time integral of |mean_gas - homogeneous|.
    pub deviation: f64,
    /// Negative densities clipped over all realizations (Eulerian only).
    pub clip_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub times: Vec<f64>,
    /// Gas velocity of the translation-invariant limit at `times`.
    pub homogeneous: Vec<f64>,
    pub curves: Vec<EnsembleCurve>,
    /// Log-log fit of deviation against N_p; `None` with fewer than three
    /// N_p or a zero deviation.
    pub fit: Option<RegressionResult>,
}

struct Run {
    gas: Vec<f64>,
    particle: Vec<f64>,
    clips: usize,
}

fn positions(cfg: &BurgersConfig, np: usize, placement: Placement, rng: &mut RngStream) -> Vec<f64> {
    let l = cfg.length;
    match placement {
        Placement::Random => (0..np).map(|_| rng.uniform() * l).collect(),
        Placement::Equispaced => (0..np).map(|i| (i as f64 + 0.5) * l / np as f64).collect(),
    }
}

fn run_one(cfg: &BurgersConfig, scheme: Scheme, pos: Vec<f64>) -> Result<Run> {
    let steps = cfg.n_steps();
    let cap = steps / cfg.record_every + 1;
    let mut run = Run {
        gas: Vec::with_capacity(cap),
        particle: Vec::with_capacity(cap),
        clips: 0,
    };
    match scheme {
        Scheme::Lagrangian => {
            let mut s = BurgersState::new(cfg, pos)?;
            for k in 0..=steps {
                if k % cfg.record_every == 0 {
                    run.gas.push(s.mean_gas());
                    run.particle.push(s.mean_particle());
                }
                if k < steps {
                    step_lagrangian(&mut s, cfg, cfg.dt)?;
                }
            }
        }
        Scheme::EulerianEmpirical => {
            let mut s = EulerianMomentState::from_particles(cfg, &pos)?;
            for k in 0..=steps {
                if k % cfg.record_every == 0 {
                    run.gas.push(s.mean_gas());
                    run.particle.push(s.mean_particle());
                }
                if k < steps {
                    step_eulerian_empirical(&mut s, cfg, cfg.dt)?;
                }
            }
            run.clips = s.clip_count;
        }
    }
    Ok(run)
}

/// Runs `reps` realizations for every N_p in `np_list` at fixed mass loading.
///
/// Realization r of N_p draws its positions from `rng.derive(np).derive(r)`,
/// so the output does not depend on the thread count.
pub fn ensemble_experiment(
    cfg: &BurgersConfig,
    np_list: &[usize],
    reps: usize,
    scheme: Scheme,
    placement: Placement,
    rng: &RngStream,
) -> Result<EnsembleResult> {
    cfg.validate()?;
    if np_list.is_empty() || np_list.contains(&0) {
        return Err(Error::invalid("np_list", "must be non-empty with entries >= 1"));
    }
    if reps == 0 {
        return Err(Error::invalid("reps", "must be >= 1"));
    }
    let stride = cfg.record_every as f64 * cfg.dt;
    let n_rec = cfg.n_steps() / cfg.record_every + 1;
    let times: Vec<f64> = (0..n_rec).map(|k| k as f64 * stride).collect();
    let homogeneous = times
        .iter()
        .map(|&t| {
            homogeneous_solution(t, cfg.u0_gas, cfg.u0_particles, cfg.kappa_m, cfg.tau_p).map(|p| p.0)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut curves = Vec::with_capacity(np_list.len());
    for &np in np_list {
        let base = rng.derive(np as u64);
        let runs = (0..reps)
            .into_par_iter()
            .map(|r| {
                let mut g = base.derive(r as u64);
                run_one(cfg, scheme, positions(cfg, np, placement, &mut g))
            })
            .collect::<Result<Vec<_>>>()?;

        let mut mean_gas = vec![0.0; n_rec];
        let mut mean_particle = vec![0.0; n_rec];
        for run in &runs {
            for k in 0..n_rec {
                mean_gas[k] += run.gas[k];
                mean_particle[k] += run.particle[k];
            }
        }
        let inv = 1.0 / reps as f64;
        mean_gas.iter_mut().for_each(|v| *v *= inv);
        mean_particle.iter_mut().for_each(|v| *v *= inv);
        let stderr_gas = (0..n_rec)
            .map(|k| {
                if reps < 2 {
                    return 0.0;
                }
                let ss: f64 = runs.iter().map(|r| (r.gas[k] - mean_gas[k]).powi(2)).sum();
                (ss / (reps - 1) as f64 / reps as f64).sqrt()
            })
            .collect();
        let diff: Vec<f64> = mean_gas.iter().zip(&homogeneous).map(|(a, b)| (a - b).abs()).collect();
        curves.push(EnsembleCurve {
            np,
            deviation: trapezoid(&diff, stride),
            mean_gas,
            stderr_gas,
            mean_particle,
            clip_count: runs.iter().map(|r| r.clips).sum(),
        });
    }

    let fit = convergence_fit(&curves);
    Ok(EnsembleResult {
        times,
        homogeneous,
        curves,
        fit,
    })
}

fn trapezoid(y: &[f64], h: f64) -> f64 {
    match y.len() {
        0 | 1 => 0.0,
        n => h * (y[1..n - 1].iter().sum::<f64>() + 0.5 * (y[0] + y[n - 1])),
    }
}

fn convergence_fit(curves: &[EnsembleCurve]) -> Option<RegressionResult> {
    let (x, y): (Vec<f64>, Vec<f64>) = curves.iter().map(|c| (c.np as f64, c.deviation)).unzip();
    stats::loglog_fit(&x, &y).ok()
}
