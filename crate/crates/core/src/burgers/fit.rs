//! Effective relaxation time closing the averaged gas curves with the
//! homogeneous two-ODE model.

use super::ensemble::EnsembleResult;
use super::homogeneous::homogeneous_solution;
use super::BurgersConfig;
use crate::error::{Error, Result};
use crate::stats;

/// Search interval for tau_eff, in multiples of tau_p.
pub const TAU_SEARCH_RANGE: (f64, f64) = (0.5, 1000.0);
const SCAN_POINTS: usize = 241;
/// Number of largest-N_p rows entering the linear fit.
const FIT_ROWS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct TauFitRow {
    pub np: usize,
    /// Mean inter-particle distance L / N_p.
    pub l_t: f64,
    pub tau_eff: f64,
    /// Root-mean-square mismatch of the fitted model curve.
    pub rms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TauFit {
    /// Sorted by increasing N_p.
    pub rows: Vec<TauFitRow>,
    /// Slope of tau_eff against l_t.
    pub alpha: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Pairs of consecutive rows where tau_eff grows with N_p.
    pub ordering_violations: usize,
}

fn mismatch(times: &[f64], gas: &[f64], cfg: &BurgersConfig, tau: f64) -> f64 {
    times
        .iter()
        .zip(gas)
        .map(|(&t, &g)| {
            let u = homogeneous_solution(t, cfg.u0_gas, cfg.u0_particles, cfg.kappa_m, tau)
                .map(|p| p.0)
                .unwrap_or(f64::NAN);
            (u - g) * (u - g)
        })
        .sum()
}

/// Least-squares tau for one curve: log-grid scan, then golden section on the
/// bracket around the best grid point.
fn fit_one(times: &[f64], gas: &[f64], cfg: &BurgersConfig) -> Result<(f64, f64)> {
    let (lo, hi) = (TAU_SEARCH_RANGE.0 * cfg.tau_p, TAU_SEARCH_RANGE.1 * cfg.tau_p);
    let ratio = (hi / lo).ln() / (SCAN_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..SCAN_POINTS).map(|i| lo * (ratio * i as f64).exp()).collect();
    let vals: Vec<f64> = grid.iter().map(|&t| mismatch(times, gas, cfg, t)).collect();
    let best = (0..SCAN_POINTS)
        .min_by(|&a, &b| vals[a].total_cmp(&vals[b]))
        .expect("non-empty grid");
    if best == 0 || best == SCAN_POINTS - 1 {
        return Err(Error::FitFailure(format!(
            "least-squares tau not bracketed in [{lo:e}, {hi:e}] (minimum at {:e})",
            grid[best]
        )));
    }
    let (mut a, mut b) = (grid[best - 1], grid[best + 1]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let tol = 1e-6 * cfg.tau_p;
    let f = |t: f64| mismatch(times, gas, cfg, t);
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let tau = 0.5 * (a + b);
    Ok((tau, (f(tau) / times.len() as f64).sqrt()))
}

/// Fits tau_eff per N_p and the closure tau_eff = tau_p + alpha l_t over the
/// largest four N_p.
pub fn fit_effective_tau(result: &EnsembleResult, cfg: &BurgersConfig) -> Result<TauFit> {
    cfg.validate()?;
    if result.curves.len() < FIT_ROWS {
        return Err(Error::InsufficientData(format!(
            "need ensemble curves for at least {FIT_ROWS} particle counts, got {}",
            result.curves.len()
        )));
    }
    let mut rows = result
        .curves
        .iter()
        .map(|c| {
            let (tau_eff, rms) = fit_one(&result.times, &c.mean_gas, cfg)?;
            Ok(TauFitRow {
                np: c.np,
                l_t: cfg.length / c.np as f64,
                tau_eff,
                rms,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| r.np);
    let ordering_violations = rows.windows(2).filter(|w| w[1].tau_eff > w[0].tau_eff).count();
    let tail = &rows[rows.len() - FIT_ROWS..];
    let (x, y): (Vec<f64>, Vec<f64>) = tail.iter().map(|r| (r.l_t, r.tau_eff)).unzip();
    let reg = stats::linear_fit(&x, &y)?;
    Ok(TauFit {
        rows,
        alpha: reg.slope,
        intercept: reg.intercept,
        r_squared: reg.r_squared,
        ordering_violations,
    })
}
