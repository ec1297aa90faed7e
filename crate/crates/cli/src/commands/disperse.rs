use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;
use turbcloud_core::lagrangian::{simulate_dispersion, DispersionConfig, DispersionSeries, InitVelocity};
use turbcloud_core::turbulence::SpectrumConfig;
use turbcloud_core::RngStream;

use super::{claim, late_spearman, pooled, require_out, write_sidecar};
use crate::config::{resolve, Resolved};
use crate::criteria::{BOUNDED_RATIO_MAX, LATE_WINDOW_START, SPEARMAN_3D_MIN};
use crate::error::{CliResult, InModule};
use crate::output::{Cell, Table};
use crate::Common;

/// Mode count of the dispersion experiments: the largest that keeps the
/// 10^4-particle, 10^5-step runs within desk-scale time.
pub const DISPERSION_MODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitVelocityArg {
    Zero,
    Fluid,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DisperseArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub particles: Option<usize>,
    #[arg(long)]
    pub tau_p: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub output_every: Option<f64>,
    #[arg(long)]
    pub box_len: Option<f64>,
    #[arg(long, value_enum)]
    pub init_velocity: Option<InitVelocityArg>,
    #[arg(long)]
    pub n_modes: Option<usize>,
    #[arg(long)]
    pub u0: Option<f64>,
    #[arg(long)]
    pub k0: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub a_hunt: Option<f64>,
    #[arg(long)]
    pub divergence_free: Option<bool>,
    /// Record the paths of the first N (<= 10) particles.
    #[arg(long)]
    pub tracks: Option<usize>,
    #[arg(long)]
    pub tracks_out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DisperseConfig {
    pub dim: usize,
    pub particles: usize,
    pub tau_p: f64,
    pub dt: f64,
    pub t_end: f64,
    pub output_every: f64,
    pub box_len: Option<f64>,
    pub init_velocity: InitVelocityArg,
    pub n_modes: usize,
    pub u0: f64,
    pub k0: f64,
    pub epsilon: Option<f64>,
    pub eta: Option<f64>,
    pub a_hunt: f64,
    pub divergence_free: Option<bool>,
    pub tracks: usize,
    pub tracks_out: Option<PathBuf>,
    pub seed: u64,
    pub threads: usize,
    pub out: Option<PathBuf>,
}

impl Default for DisperseConfig {
    fn default() -> Self {
        let d = DispersionConfig::default();
        let s = SpectrumConfig::default();
        Self {
            dim: 1,
            particles: d.n_particles,
            tau_p: d.tau_p,
            dt: d.dt,
            t_end: d.t_end,
            output_every: d.output_every,
            box_len: d.box_len,
            init_velocity: InitVelocityArg::Zero,
            n_modes: DISPERSION_MODES,
            u0: s.u0,
            k0: s.k0,
            epsilon: s.epsilon,
            eta: s.eta,
            a_hunt: s.a_hunt,
            divergence_free: s.divergence_free,
            tracks: 0,
            tracks_out: None,
            seed: turbcloud_core::rng::DEFAULT_SEED,
            threads: 0,
            out: None,
        }
    }
}

/// Shape statistics of a variance history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceShape {
    /// Spearman rank correlation of (t, variance) for t >= 10 s.
    pub late_spearman: f64,
    /// max variance / variance at t = 1 s.
    pub max_over_t1: f64,
    /// Strict decreases between consecutive samples for t > 10 s.
    pub late_decreases: usize,
}

pub fn variance_shape(times: &[f64], var: &[f64]) -> VarianceShape {
    let i1 = times
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - 1.0).abs().total_cmp(&(b.1 - 1.0).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let max = var.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let late_decreases = (1..var.len())
        .filter(|&j| times[j - 1] > LATE_WINDOW_START && var[j] < var[j - 1])
        .count();
    VarianceShape {
        late_spearman: late_spearman(times, var, LATE_WINDOW_START),
        max_over_t1: max / var[i1],
        late_decreases,
    }
}

const AXES: [&str; 3] = ["x", "y", "z"];

fn series_table(s: &DispersionSeries, dim: usize) -> Table {
    let mut header = vec!["t".to_string()];
    header.extend(AXES[..dim].iter().map(|a| format!("var_{a}")));
    header.push("var_total".into());
    let mut t = Table::new(header);
    for (j, &time) in s.times.iter().enumerate() {
        let mut row = vec![Cell::F(time)];
        row.extend(s.variance_per_axis[j].iter().map(|&v| Cell::F(v)));
        row.push(Cell::F(s.variance_total[j]));
        t.push(row);
    }
    t
}

fn tracks_table(s: &DispersionSeries, dim: usize, n: usize) -> Table {
    let mut header = vec!["t".to_string()];
    for p in 0..n {
        header.extend(AXES[..dim].iter().map(|a| format!("{a}{p}")));
    }
    let mut t = Table::new(header);
    for (j, &time) in s.times.iter().enumerate() {
        let mut row = vec![Cell::F(time)];
        for pos in &s.tracks[j] {
            row.extend(pos[..dim].iter().map(|&v| Cell::F(v)));
        }
        t.push(row);
    }
    t
}

pub fn run(args: DisperseArgs) -> CliResult<()> {
    let r: Resolved<DisperseConfig> = resolve("disperse", args.common.config.as_deref(), &args)?;
    let c = &r.config;
    let out = require_out(&c.out)?;
    let spectrum = SpectrumConfig {
        u0: c.u0,
        k0: c.k0,
        epsilon: c.epsilon,
        eta: c.eta,
        a_hunt: c.a_hunt,
        n_modes: c.n_modes,
        dim: c.dim,
        divergence_free: c.divergence_free,
    }
    .resolve()
    .in_module("turbulence")?;
    let cfg = DispersionConfig {
        n_particles: c.particles,
        tau_p: c.tau_p,
        dt: c.dt,
        t_end: c.t_end,
        output_every: c.output_every,
        box_len: c.box_len,
        init_velocity: match c.init_velocity {
            InitVelocityArg::Zero => InitVelocity::Zero,
            InitVelocityArg::Fluid => InitVelocity::Fluid,
        },
        n_tracks: c.tracks,
    };
    let rng = RngStream::new(c.seed, 0);
    let series = pooled(c.threads, || simulate_dispersion(&spectrum, &cfg, &rng)).in_module("lagrangian")?;

    let mut outputs = vec![out.clone()];
    series_table(&series, c.dim).write(&out, args.common.format)?;
    if c.tracks > 0 {
        let path = c.tracks_out.clone().unwrap_or_else(|| out.with_extension("tracks.csv"));
        tracks_table(&series, c.dim, c.tracks).write(&path, args.common.format)?;
        outputs.push(path);
    }

    let shape = variance_shape(&series.times, &series.variance_total);
    let last = series.variance_per_axis.last().cloned().unwrap_or_default();
    let isotropy = if c.dim >= 2 {
        let (lo, hi) = last.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        Some(hi / lo)
    } else {
        None
    };
    let mut claims = Vec::new();
    if c.dim == 1 {
        claims.push(claim(
            "1D cloud variance stays bounded",
            "max_variance_over_t1",
            shape.max_over_t1,
            Some(shape.max_over_t1 < BOUNDED_RATIO_MAX),
        ));
        claims.push(claim(
            "1D cloud variance is non-monotone",
            "late_decreases",
            shape.late_decreases as f64,
            Some(shape.late_decreases > 0),
        ));
    }
    if c.dim == 3 {
        claims.push(claim(
            "3D cloud variance grows quasi-monotonically",
            "late_spearman",
            shape.late_spearman,
            Some(shape.late_spearman > SPEARMAN_3D_MIN),
        ));
    }
    let summary = json!({
        "eta": spectrum.eta,
        "late_spearman": shape.late_spearman,
        "max_variance_over_t1": shape.max_over_t1,
        "late_decreases": shape.late_decreases,
        "final_variance_per_axis": last,
        "axis_variance_ratio": isotropy,
    });
    write_sidecar("disperse", &r, &out, &outputs, summary, claims)
}
