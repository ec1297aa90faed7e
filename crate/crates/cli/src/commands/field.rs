use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;
use turbcloud_core::stats;
use turbcloud_core::turbulence::{sample_field, SpectrumConfig, SpectrumParams, SyntheticField};
use turbcloud_core::RngStream;

use super::{claim, require_out, write_sidecar};
use crate::config::{resolve, Resolved};
use crate::criteria::{in_band, INERTIAL_RANGE, INERTIAL_SHELLS, SPECTRUM_SLOPE_BAND};
use crate::error::{CliResult, InModule};
use crate::output::{Cell, Table};
use crate::Common;

#[derive(Debug, Clone, Args, Serialize)]
pub struct FieldArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
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
    pub n_modes: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub divergence_free: Option<bool>,
    /// Evaluation times (eval only), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    /// Grid points per axis (eval only).
    #[arg(long)]
    pub points: Option<usize>,
    /// Side of the evaluation box; defaults to 2 pi / k0 (eval only).
    #[arg(long)]
    pub extent: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldConfig {
    pub u0: f64,
    pub k0: f64,
    pub epsilon: Option<f64>,
    pub eta: Option<f64>,
    pub a_hunt: f64,
    pub n_modes: usize,
    pub dim: usize,
    pub divergence_free: Option<bool>,
    pub times: Vec<f64>,
    pub points: usize,
    pub extent: Option<f64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for FieldConfig {
    fn default() -> Self {
        let s = SpectrumConfig::default();
        Self {
            u0: s.u0,
            k0: s.k0,
            epsilon: s.epsilon,
            eta: s.eta,
            a_hunt: s.a_hunt,
            n_modes: s.n_modes,
            dim: s.dim,
            divergence_free: s.divergence_free,
            times: vec![0.0],
            points: 16,
            extent: None,
            seed: turbcloud_core::rng::DEFAULT_SEED,
            out: None,
        }
    }
}

impl FieldConfig {
    pub fn spectrum(&self) -> SpectrumConfig {
        SpectrumConfig {
            u0: self.u0,
            k0: self.k0,
            epsilon: self.epsilon,
            eta: self.eta,
            a_hunt: self.a_hunt,
            n_modes: self.n_modes,
            dim: self.dim,
            divergence_free: self.divergence_free,
        }
    }
}

/// The field realization of `seed`: the same draw `disperse` uses.
pub fn realization(p: &SpectrumParams, seed: u64) -> turbcloud_core::Result<SyntheticField> {
    sample_field(p, &mut RngStream::new(seed, 0).derive(0))
}

/// Log-log slope of the shell spectrum over the inertial range.
pub fn inertial_slope(f: &SyntheticField) -> Option<f64> {
    let k0 = f.params().k0;
    let shells = f
        .shell_spectrum(INERTIAL_RANGE.0 * k0, INERTIAL_RANGE.1 * k0, INERTIAL_SHELLS)
        .ok()?;
    let (k, e): (Vec<f64>, Vec<f64>) = shells.into_iter().unzip();
    stats::loglog_fit(&k, &e).ok().map(|r| r.slope)
}

const AXES: [&str; 3] = ["x", "y", "z"];

fn setup(args: &FieldArgs, command: &str) -> CliResult<(Resolved<FieldConfig>, SyntheticField, PathBuf)> {
    let r: Resolved<FieldConfig> = resolve(command, args.common.config.as_deref(), args)?;
    let out = require_out(&r.config.out)?;
    let p = r.config.spectrum().resolve().in_module("turbulence")?;
    let f = realization(&p, r.config.seed).in_module("turbulence")?;
    Ok((r, f, out))
}

fn summary(f: &SyntheticField) -> (serde_json::Value, Vec<serde_json::Value>) {
    let p = f.params();
    let slope = inertial_slope(f);
    let mut claims = Vec::new();
    if let Some(s) = slope {
        claims.push(claim(
            "mode energies follow the inertial-range power law",
            "shell_spectrum_slope",
            s,
            Some(in_band(s, SPECTRUM_SLOPE_BAND)),
        ));
    }
    let summary = json!({
        "eta": p.eta,
        "epsilon": p.epsilon,
        "n_modes": p.n_modes,
        "speed_bound": f.speed_bound(),
        "shell_spectrum_slope": slope,
        "warnings": p.warnings(),
    });
    (summary, claims)
}

pub fn sample(args: FieldArgs) -> CliResult<()> {
    let (r, f, out) = setup(&args, "field-sample")?;
    let d = f.dim();
    let mut header = vec!["mode".to_string()];
    header.extend(AXES[..d].iter().map(|a| format!("a_{a}")));
    header.extend(AXES[..d].iter().map(|a| format!("k_{a}")));
    header.extend(["omega".to_string(), "phase".to_string()]);
    let mut t = Table::new(header);
    for (i, m) in f.modes().iter().enumerate() {
        let mut row: Vec<Cell> = vec![(i + 1).into()];
        row.extend(m.amplitude[..d].iter().map(|&v| Cell::F(v)));
        row.extend(m.wavevector[..d].iter().map(|&v| Cell::F(v)));
        row.extend([Cell::F(m.omega), Cell::F(m.phase)]);
        t.push(row);
    }
    t.write(&out, args.common.format)?;
    let (s, c) = summary(&f);
    write_sidecar("field sample", &r, &out, std::slice::from_ref(&out), s, c)
}

pub fn eval(args: FieldArgs) -> CliResult<()> {
    let (r, f, out) = setup(&args, "field-eval")?;
    let cfg = &r.config;
    let d = f.dim();
    if cfg.points == 0 {
        return Err(crate::CliError::config("key `points`: must be >= 1"));
    }
    let extent = cfg.extent.unwrap_or(std::f64::consts::TAU / cfg.k0);
    let h = extent / cfg.points as f64;
    let mut header = vec!["t".to_string()];
    header.extend(AXES[..d].iter().map(|a| a.to_string()));
    header.extend(AXES[..d].iter().map(|a| format!("u_{a}")));
    let mut table = Table::new(header);
    let total = cfg.points.pow(d as u32);
    for &t in &cfg.times {
        for idx in 0..total {
            let mut x = [0.0; 3];
            let mut rem = idx;
            for xa in x.iter_mut().take(d) {
                *xa = (rem % cfg.points) as f64 * h;
                rem /= cfg.points;
            }
            let u = f.eval_velocity(t, &x[..d]);
            let mut row = vec![Cell::F(t)];
            row.extend(x[..d].iter().map(|&v| Cell::F(v)));
            row.extend(u[..d].iter().map(|&v| Cell::F(v)));
            table.push(row);
        }
    }
    table.write(&out, args.common.format)?;
    let (s, c) = summary(&f);
    write_sidecar("field eval", &r, &out, std::slice::from_ref(&out), s, c)
}
