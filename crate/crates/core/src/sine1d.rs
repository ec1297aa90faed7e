//! One-dimensional particles driven by a single travelling sine.
//!
//! Full system:    dX = C dt, dC = (a sin(2 pi (omega t + k X) + phi) - C) / tau_p dt
//! Reduced system: dX' = C' dt, dC' = (a' sin(2 pi X') + omega - C') / tau_p dt
//!
//! Note the cycle convention: `omega` and `k` count cycles per unit time and
//! length, unlike the radian convention of [`crate::turbulence`].

use std::f64::consts::{FRAC_PI_2, TAU};

use crate::error::{Error, Result};
use crate::stats;
use crate::turbulence::{SpectralMode, SpectrumParams, SyntheticField};

/// Number of windows used by the boundedness test.
pub const BOUND_WINDOWS: usize = 20;
/// A window variance above this multiple of the median flags growth.
pub const BOUND_RATIO: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineParams {
    pub a: f64,
    /// Temporal frequency in cycles per second.
    pub omega: f64,
    /// Wavenumber in cycles per metre.
    pub k: f64,
    pub phi: f64,
    pub tau_p: f64,
}

impl SineParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_p > 0.0) {
            return Err(Error::invalid("tau_p", format!("must be > 0, got {}", self.tau_p)));
        }
        Ok(())
    }

    /// The same forcing as a one-mode field, for the cloud integrators:
    /// a sin(theta) = a cos(theta - pi/2).
    pub fn as_field(&self) -> SyntheticField {
        let params = SpectrumParams {
            u0: self.a.abs().max(f64::MIN_POSITIVE),
            k0: (TAU * self.k).abs().max(f64::MIN_POSITIVE),
            epsilon: 1.0,
            eta: 1.0,
            a_hunt: 0.5,
            n_modes: 1,
            dim: 1,
            divergence_free: false,
        };
        let mode = SpectralMode {
            amplitude: [self.a, 0.0, 0.0],
            wavevector: [TAU * self.k, 0.0, 0.0],
            omega: TAU * self.omega,
            phase: (self.phi - FRAC_PI_2).rem_euclid(TAU),
        };
        SyntheticField::from_modes(params, vec![mode])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedParams {
    pub a_prime: f64,
    /// Drift forcing (reduced units).
    pub omega: f64,
    pub tau_p: f64,
}

impl ReducedParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_p > 0.0) {
            return Err(Error::invalid("tau_p", format!("must be > 0, got {}", self.tau_p)));
        }
        Ok(())
    }
}

/// Sampled path of one particle. `y` and `v` are only filled for the
/// reduced system, where y = X' - omega t and v = C' - omega.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub c: Vec<f64>,
    pub y: Vec<f64>,
    pub v: Vec<f64>,
    /// Spatial period of the forcing.
    pub wavelength: f64,
}

fn rk4_path<F: Fn(f64, f64, f64) -> f64>(
    accel: F,
    x0: f64,
    c0: f64,
    dt: f64,
    t_end: f64,
) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt", format!("must be finite and > 0, got {dt}")));
    }
    if !(t_end >= 0.0) {
        return Err(Error::invalid("t_end", "must be >= 0"));
    }
    let n = (t_end / dt).round() as usize;
    let mut tr = Trajectory {
        t: Vec::with_capacity(n + 1),
        x: Vec::with_capacity(n + 1),
        c: Vec::with_capacity(n + 1),
        ..Default::default()
    };
    let (mut x, mut c) = (x0, c0);
    tr.t.push(0.0);
    tr.x.push(x);
    tr.c.push(c);
    for s in 0..n {
        let t = s as f64 * dt;
        let h = 0.5 * dt;
        let (k1x, k1c) = (c, accel(t, x, c));
        let (k2x, k2c) = (c + h * k1c, accel(t + h, x + h * k1x, c + h * k1c));
        let (k3x, k3c) = (c + h * k2c, accel(t + h, x + h * k2x, c + h * k2c));
        let (k4x, k4c) = (c + dt * k3c, accel(t + dt, x + dt * k3x, c + dt * k3c));
        x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        c += dt / 6.0 * (k1c + 2.0 * k2c + 2.0 * k3c + k4c);
        tr.t.push((s + 1) as f64 * dt);
        tr.x.push(x);
        tr.c.push(c);
    }
    Ok(tr)
}

/// RK4 path of the full (non-autonomous) system.
pub fn simulate_full(p: &SineParams, x0: f64, c0: f64, dt: f64, t_end: f64) -> Result<Trajectory> {
    p.validate()?;
    let p = *p;
    let mut tr = rk4_path(
        move |t, x, c| (p.a * (TAU * (p.omega * t + p.k * x) + p.phi).sin() - c) / p.tau_p,
        x0,
        c0,
        dt,
        t_end,
    )?;
    tr.wavelength = 1.0 / p.k.abs();
    Ok(tr)
}

/// RK4 path of the reduced (autonomous) system, with the moving-frame
/// variables filled in.
pub fn simulate_reduced(
    p: &ReducedParams,
    x0: f64,
    c0: f64,
    dt: f64,
    t_end: f64,
) -> Result<Trajectory> {
    p.validate()?;
    let p = *p;
    let mut tr = rk4_path(
        move |_, x, c| (p.a_prime * (TAU * x).sin() + p.omega - c) / p.tau_p,
        x0,
        c0,
        dt,
        t_end,
    )?;
    tr.y = tr.t.iter().zip(&tr.x).map(|(t, x)| x - p.omega * t).collect();
    tr.v = tr.c.iter().map(|c| c - p.omega).collect();
    tr.wavelength = 1.0;
    Ok(tr)
}

/// Local extrema of V along a reduced trajectory: `t_plus` are maxima
/// (dV/dt turns from positive to negative), `t_minus` minima. Crossing times
/// are linearly interpolated between samples.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TurningPoints {
    pub t_plus: Vec<f64>,
    pub t_minus: Vec<f64>,
}

impl TurningPoints {
    /// True when the extrema alternate as max, min, max, ... starting with a
    /// maximum.
    pub fn interleaved(&self) -> bool {
        let (p, m) = (&self.t_plus, &self.t_minus);
        if p.is_empty() || m.len() > p.len() || p.len() > m.len() + 1 {
            return false;
        }
        (0..m.len()).all(|n| p[n] < m[n] && p.get(n + 1).is_none_or(|&next| m[n] < next))
    }
}

pub fn turning_points(p: &ReducedParams, tr: &Trajectory) -> TurningPoints {
    let dv: Vec<f64> = tr
        .x
        .iter()
        .zip(&tr.c)
        .map(|(x, c)| (p.a_prime * (TAU * x).sin() + p.omega - c) / p.tau_p)
        .collect();
    let mut out = TurningPoints::default();
    for i in 1..dv.len() {
        let (d0, d1) = (dv[i - 1], dv[i]);
        if (d0 > 0.0 && d1 <= 0.0) || (d0 < 0.0 && d1 >= 0.0) {
            let s = d0 / (d0 - d1);
            let t = tr.t[i - 1] + s * (tr.t[i] - tr.t[i - 1]);
            if d0 > 0.0 {
                out.t_plus.push(t);
            } else if !out.t_plus.is_empty() {
                out.t_minus.push(t);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftStats {
    /// Least-squares slope of X(t).
    pub slope: f64,
    pub intercept: f64,
    /// Half the peak-to-peak spread of the detrended path.
    pub oscillation_amplitude: f64,
    /// Detrended variance in each of the equal-length windows.
    pub window_variances: Vec<f64>,
    /// No window variance exceeds twice the median.
    pub bounded: bool,
}

/// Drift and detrended oscillation of a path sampled at times `t`.
///
/// Requires the particle to have travelled at least ten forcing wavelengths
/// and enough samples for the window test.
pub fn drift_and_oscillation_stats(t: &[f64], x: &[f64], wavelength: f64) -> Result<DriftStats> {
    if t.len() != x.len() {
        return Err(Error::InvalidInput("time and position lengths differ".into()));
    }
    if t.len() < 2 * BOUND_WINDOWS {
        return Err(Error::InsufficientData(format!(
            "need at least {} samples, got {}",
            2 * BOUND_WINDOWS,
            t.len()
        )));
    }
    let fit = stats::linear_fit(t, x)?;
    let span = t[t.len() - 1] - t[0];
    if fit.slope.abs() * span < 10.0 * wavelength {
        return Err(Error::InsufficientData(format!(
            "drift covers {:.3} wavelengths, at least 10 drift periods are needed",
            fit.slope.abs() * span / wavelength
        )));
    }
    let resid: Vec<f64> = t
        .iter()
        .zip(x)
        .map(|(ti, xi)| xi - (fit.intercept + fit.slope * ti))
        .collect();
    let (lo, hi) = resid
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), r| (l.min(*r), h.max(*r)));
    let w = resid.len() / BOUND_WINDOWS;
    let window_variances: Vec<f64> = (0..BOUND_WINDOWS)
        .map(|j| {
            let end = if j + 1 == BOUND_WINDOWS { resid.len() } else { (j + 1) * w };
            stats::sample_variance(&resid[j * w..end]).unwrap_or(0.0)
        })
        .collect();
    let mut sorted = window_variances.clone();
    sorted.sort_by(f64::total_cmp);
    let median = 0.5 * (sorted[BOUND_WINDOWS / 2 - 1] + sorted[BOUND_WINDOWS / 2]);
    let max = sorted[BOUND_WINDOWS - 1];
    // residuals at rounding level count as bounded
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = (1e-12 * scale.max(1.0)).powi(2);
    Ok(DriftStats {
        slope: fit.slope,
        intercept: fit.intercept,
        oscillation_amplitude: 0.5 * (hi - lo),
        window_variances,
        bounded: max <= BOUND_RATIO * median || max <= floor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unforced_full_system_relaxes() {
        let p = SineParams {
            a: 0.0,
            omega: 2.0,
            k: 1.0,
            phi: 0.3,
            tau_p: 0.5,
        };
        let tr = simulate_full(&p, 0.2, 1.5, 1e-3, 3.0).unwrap();
        let t = 3.0;
        let e = (-t / p.tau_p).exp();
        assert!((tr.c.last().unwrap() - 1.5 * e).abs() < 1e-10);
        assert!((tr.x.last().unwrap() - (0.2 + 1.5 * p.tau_p * (1.0 - e))).abs() < 1e-10);
    }

    #[test]
    fn speed_stays_in_comparison_band() {
        let p = SineParams {
            a: 0.8,
            omega: 1.3,
            k: 0.7,
            phi: 0.0,
            tau_p: 1.0,
        };
        let c0 = -2.0;
        let tr = simulate_full(&p, 0.0, c0, 1e-3, 30.0).unwrap();
        let bound = p.a.abs() + c0.abs();
        assert!(tr.c.iter().all(|c| c.abs() <= bound));
    }

    #[test]
    fn field_form_matches_sine() {
        let p = SineParams {
            a: 0.9,
            omega: 0.4,
            k: 1.7,
            phi: 2.2,
            tau_p: 1.0,
        };
        let f = p.as_field();
        for i in 0..50 {
            let (t, x) = (0.37 * i as f64, 0.11 * i as f64 - 2.0);
            let direct = p.a * (TAU * (p.omega * t + p.k * x) + p.phi).sin();
            assert!((f.eval_velocity(t, &[x])[0] - direct).abs() < 1e-13);
        }
    }

    #[test]
    fn unforced_reduced_system_drifts_at_omega() {
        let p = ReducedParams {
            a_prime: 0.0,
            omega: 2.0,
            tau_p: 1.0,
        };
        let tr = simulate_reduced(&p, 0.0, p.omega, 1e-2, 50.0).unwrap();
        let s = drift_and_oscillation_stats(&tr.t, &tr.x, tr.wavelength).unwrap();
        assert!((s.slope - 2.0).abs() < 1e-12);
        assert!(s.oscillation_amplitude < 1e-10);
        assert!(s.bounded);
        // and from rest the velocity approaches omega exponentially
        let tr = simulate_reduced(&p, 0.0, 0.0, 1e-3, 10.0).unwrap();
        assert!((tr.c.last().unwrap() - 2.0 * (1.0 - (-10.0f64).exp())).abs() < 1e-9);
    }

    #[test]
    fn reduced_band_and_extrema() {
        let p = ReducedParams {
            a_prime: 1.0,
            omega: 2.0,
            tau_p: 1.0,
        };
        let tr = simulate_reduced(&p, 0.0, 0.0, 1e-3, 60.0).unwrap();
        let start = tr.t.iter().position(|&t| t >= 20.0).unwrap();
        for c in &tr.c[start..] {
            assert!(*c >= p.omega - p.a_prime - 1e-6 && *c <= p.omega + p.a_prime + 1e-6);
        }
        let tp = turning_points(&p, &tr);
        assert!(tp.t_plus.len() > 5);
        assert!(tp.interleaved());
        let s = drift_and_oscillation_stats(&tr.t[start..], &tr.x[start..], 1.0).unwrap();
        assert!((s.slope / p.omega - 1.0).abs() < 0.05, "{s:?}");
        assert!(s.bounded);
    }

    #[test]
    fn short_trajectories_are_rejected() {
        let p = ReducedParams {
            a_prime: 0.5,
            omega: 1.0,
            tau_p: 1.0,
        };
        let tr = simulate_reduced(&p, 0.0, 1.0, 1e-2, 2.0).unwrap();
        assert!(matches!(
            drift_and_oscillation_stats(&tr.t, &tr.x, 1.0),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn autonomous_under_time_shift() {
        let p = ReducedParams {
            a_prime: 0.7,
            omega: 1.1,
            tau_p: 0.8,
        };
        let a = simulate_reduced(&p, 0.3, -0.2, 1e-3, 5.0).unwrap();
        // restart from the state reached at t = 2 and compare the remainder
        let i = 2000;
        let b = simulate_reduced(&p, a.x[i], a.c[i], 1e-3, 3.0).unwrap();
        for j in 0..b.x.len() {
            assert!((a.x[i + j] - b.x[j]).abs() < 1e-12);
        }
    }
}
