use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;
use turbcloud_core::sine1d::{
    drift_and_oscillation_stats, simulate_full, simulate_reduced, turning_points, ReducedParams,
    SineParams, Trajectory,
};

use super::{claim, require_out, write_sidecar};
use crate::config::{resolve, Resolved};
use crate::criteria::{SPEED_BAND_SLACK, TRANSIENT_TAUS};
use crate::error::{CliError, CliResult, InModule};
use crate::output::{Cell, Table};
use crate::Common;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    /// Travelling sine a sin(2 pi (omega t + k X) + phi).
    Full,
    /// Moving-frame form a' sin(2 pi X') + omega.
    Reduced,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Sine1dArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub system: Option<System>,
    #[arg(long)]
    pub a: Option<f64>,
    /// Frequency in cycles per second.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Wavenumber in cycles per metre (full system).
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub phi: Option<f64>,
    #[arg(long)]
    pub tau_p: Option<f64>,
    /// Reduced amplitude; defaults to `a`.
    #[arg(long)]
    pub a_prime: Option<f64>,
    #[arg(long)]
    pub x0: Option<f64>,
    #[arg(long)]
    pub c0: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Write every n-th integration step.
    #[arg(long)]
    pub every: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sine1dConfig {
    pub system: System,
    pub a: f64,
    pub omega: f64,
    pub k: f64,
    pub phi: f64,
    pub tau_p: f64,
    pub a_prime: Option<f64>,
    pub x0: f64,
    pub c0: f64,
    pub dt: f64,
    pub t_end: f64,
    pub every: usize,
    pub out: Option<PathBuf>,
}

impl Default for Sine1dConfig {
    fn default() -> Self {
        Self {
            system: System::Reduced,
            a: 1.0,
            omega: 2.0,
            k: 1.0,
            phi: 0.0,
            tau_p: 1.0,
            a_prime: None,
            x0: 0.0,
            c0: 0.0,
            dt: 1e-3,
            t_end: 200.0,
            every: 100,
            out: None,
        }
    }
}

/// Smallest and largest speed after the transient.
fn late_speed_range(tr: &Trajectory, t0: f64) -> (f64, f64) {
    tr.t.iter()
        .zip(&tr.c)
        .filter(|(t, _)| **t >= t0)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, c)| (lo.min(*c), hi.max(*c)))
}

pub fn run(args: Sine1dArgs) -> CliResult<()> {
    let r: Resolved<Sine1dConfig> = resolve("sine1d", args.common.config.as_deref(), &args)?;
    let c = &r.config;
    let out = require_out(&c.out)?;
    if c.every == 0 {
        return Err(CliError::config("key `every`: must be >= 1"));
    }
    let t0 = TRANSIENT_TAUS * c.tau_p;
    let mut claims = Vec::new();
    let (tr, band, extra) = match c.system {
        System::Reduced => {
            let p = ReducedParams {
                a_prime: c.a_prime.unwrap_or(c.a),
                omega: c.omega,
                tau_p: c.tau_p,
            };
            let tr = simulate_reduced(&p, c.x0, c.c0, c.dt, c.t_end).in_module("sine1d")?;
            let band = (p.omega - p.a_prime.abs(), p.omega + p.a_prime.abs());
            let tp = turning_points(&p, &tr);
            let extra = json!({
                "turning_points_max": tp.t_plus.len(),
                "turning_points_min": tp.t_minus.len(),
                "turning_points_interleaved": tp.interleaved(),
            });
            (tr, band, extra)
        }
        System::Full => {
            let p = SineParams {
                a: c.a,
                omega: c.omega,
                k: c.k,
                phi: c.phi,
                tau_p: c.tau_p,
            };
            let tr = simulate_full(&p, c.x0, c.c0, c.dt, c.t_end).in_module("sine1d")?;
            (tr, (-c.a.abs(), c.a.abs()), json!({}))
        }
    };
    let (lo, hi) = late_speed_range(&tr, t0);
    let in_band = lo >= band.0 - SPEED_BAND_SLACK && hi <= band.1 + SPEED_BAND_SLACK;
    if lo.is_finite() {
        claims.push(claim(
            "speed stays in the absorbing band after the transient",
            "late_speed_excess",
            (band.0 - lo).max(hi - band.1),
            Some(in_band),
        ));
    }
    let start = tr.t.partition_point(|&t| t < t0);
    let drift = drift_and_oscillation_stats(&tr.t[start..], &tr.x[start..], tr.wavelength).ok();

    let reduced = c.system == System::Reduced;
    let mut header = vec!["t", "x", "c"];
    if reduced {
        header.extend(["y", "v"]);
    }
    let mut t = Table::new(header);
    for i in (0..tr.t.len()).step_by(c.every) {
        let mut row = vec![Cell::F(tr.t[i]), Cell::F(tr.x[i]), Cell::F(tr.c[i])];
        if reduced {
            row.extend([Cell::F(tr.y[i]), Cell::F(tr.v[i])]);
        }
        t.push(row);
    }
    t.write(&out, args.common.format)?;

    let summary = json!({
        "speed_band": [band.0, band.1],
        "late_speed_range": [lo, hi],
        "transient": t0,
        "drift_slope": drift.as_ref().map(|d| d.slope),
        "oscillation_amplitude": drift.as_ref().map(|d| d.oscillation_amplitude),
        "detrended_bounded": drift.as_ref().map(|d| d.bounded),
        "reduced": extra,
    });
    write_sidecar("sine1d", &r, &out, std::slice::from_ref(&out), summary, claims)
}
