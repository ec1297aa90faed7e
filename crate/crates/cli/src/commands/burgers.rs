use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use turbcloud_core::burgers::{
    ensemble_experiment, fit_effective_tau, BurgersConfig, EnsembleResult, Placement, Scheme, TauFit,
};
use turbcloud_core::RngStream;

use super::{claim, pooled, require_out, write_sidecar};
use crate::config::{resolve, Resolved};
use crate::criteria::{in_band, RATE_BAND, TAU_FIT_R2_MIN, TAU_INTERCEPT_REL};
use crate::error::{CliError, CliResult, InModule};
use crate::output::{Cell, Table};
use crate::Common;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Point particles deposited on their cells.
    Lagrangian,
    /// Pressureless moments of the particle histogram.
    Eulerian,
    /// One particle per cell at the centres, against the closed-form limit.
    Homogeneous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlacementArg {
    Random,
    Equispaced,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BurgersArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Particle counts, comma separated; more than one runs a sweep.
    #[arg(long, value_delimiter = ',')]
    pub np: Option<Vec<usize>>,
    #[arg(long)]
    pub cells: Option<usize>,
    #[arg(long)]
    pub length: Option<f64>,
    #[arg(long)]
    pub rho_f: Option<f64>,
    #[arg(long)]
    pub kappa_m: Option<f64>,
    #[arg(long)]
    pub tau_p: Option<f64>,
    #[arg(long)]
    pub u0_gas: Option<f64>,
    #[arg(long)]
    pub u0_particles: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub cfl: Option<f64>,
    #[arg(long)]
    pub nu_gas: Option<f64>,
    /// Record the spatial means every n steps.
    #[arg(long)]
    pub record_every: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long, value_enum)]
    pub placement: Option<PlacementArg>,
    /// Write the effective relaxation time fit here (sweeps only).
    #[arg(long)]
    pub fit_out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BurgersCliConfig {
    pub mode: Mode,
    /// Defaults to `[cells]` in homogeneous mode and `[64]` otherwise.
    pub np: Option<Vec<usize>>,
    pub cells: usize,
    pub length: f64,
    pub rho_f: f64,
    pub kappa_m: f64,
    pub tau_p: f64,
    pub u0_gas: f64,
    pub u0_particles: f64,
    pub dt: f64,
    pub t_end: f64,
    pub cfl: f64,
    pub nu_gas: f64,
    pub record_every: usize,
    pub reps: usize,
    pub placement: PlacementArg,
    pub fit_out: Option<PathBuf>,
    pub seed: u64,
    pub threads: usize,
    pub out: Option<PathBuf>,
}

impl Default for BurgersCliConfig {
    fn default() -> Self {
        let b = BurgersConfig::default();
        Self {
            mode: Mode::Lagrangian,
            np: None,
            cells: b.n_cells,
            length: b.length,
            rho_f: b.rho_f,
            kappa_m: b.kappa_m,
            tau_p: b.tau_p,
            u0_gas: b.u0_gas,
            u0_particles: b.u0_particles,
            dt: b.dt,
            t_end: b.t_end,
            cfl: b.cfl,
            nu_gas: b.nu_gas,
            record_every: b.record_every,
            reps: 200,
            placement: PlacementArg::Random,
            fit_out: None,
            seed: turbcloud_core::rng::DEFAULT_SEED,
            threads: 0,
            out: None,
        }
    }
}

impl BurgersCliConfig {
    pub fn physics(&self) -> BurgersConfig {
        BurgersConfig {
            length: self.length,
            n_cells: self.cells,
            rho_f: self.rho_f,
            tau_p: self.tau_p,
            kappa_m: self.kappa_m,
            n_particles: self.np_list().first().copied().unwrap_or(1),
            u0_gas: self.u0_gas,
            u0_particles: self.u0_particles,
            dt: self.dt,
            t_end: self.t_end,
            cfl: self.cfl,
            nu_gas: self.nu_gas,
            record_every: self.record_every,
        }
    }

    pub fn np_list(&self) -> Vec<usize> {
        match (&self.np, self.mode) {
            (Some(v), _) => v.clone(),
            (None, Mode::Homogeneous) => vec![self.cells],
            (None, _) => vec![64],
        }
    }
}

fn single_table(res: &EnsembleResult) -> Table {
    let c = &res.curves[0];
    let mut t = Table::new([
        "t",
        "mean_gas_velocity",
        "mean_particle_velocity",
        "stderr_gas_velocity",
        "homogeneous_gas_velocity",
    ]);
    for (k, &time) in res.times.iter().enumerate() {
        t.push(vec![
            Cell::F(time),
            Cell::F(c.mean_gas[k]),
            Cell::F(c.mean_particle[k]),
            Cell::F(c.stderr_gas[k]),
            Cell::F(res.homogeneous[k]),
        ]);
    }
    t
}

fn sweep_table(res: &EnsembleResult) -> Table {
    let mut header = vec!["t".to_string(), "homogeneous".to_string()];
    for c in &res.curves {
        header.push(format!("gas_np{}", c.np));
        header.push(format!("particle_np{}", c.np));
    }
    let mut t = Table::new(header);
    for (k, &time) in res.times.iter().enumerate() {
        let mut row = vec![Cell::F(time), Cell::F(res.homogeneous[k])];
        for c in &res.curves {
            row.push(Cell::F(c.mean_gas[k]));
            row.push(Cell::F(c.mean_particle[k]));
        }
        t.push(row);
    }
    for c in &res.curves {
        t.footer.push(vec![Cell::S(format!("deviation_np{}", c.np)), Cell::F(c.deviation)]);
    }
    let (slope, se) = res.fit.map_or((f64::NAN, f64::NAN), |f| (f.slope, f.slope_stderr));
    t.footer.push(vec!["slope_deviation".into(), Cell::F(slope)]);
    t.footer.push(vec!["slope_deviation_stderr".into(), Cell::F(se)]);
    t
}

fn fit_table(fit: &TauFit) -> Table {
    let mut t = Table::new(["np", "l_t", "tau_eff", "rms"]);
    for r in &fit.rows {
        t.push(vec![r.np.into(), Cell::F(r.l_t), Cell::F(r.tau_eff), Cell::F(r.rms)]);
    }
    t.footer.push(vec!["alpha".into(), Cell::F(fit.alpha)]);
    t.footer.push(vec!["intercept".into(), Cell::F(fit.intercept)]);
    t.footer.push(vec!["r_squared".into(), Cell::F(fit.r_squared)]);
    t.footer.push(vec!["ordering_violations".into(), fit.ordering_violations.into()]);
    t
}

fn homogeneous_summary(res: &EnsembleResult, cfg: &BurgersConfig, claims: &mut Vec<Value>) -> Value {
    let c = &res.curves[0];
    let linf = c
        .mean_gas
        .iter()
        .zip(&res.homogeneous)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let eq = (cfg.kappa_m * cfg.u0_particles + cfg.u0_gas) / (1.0 + cfg.kappa_m);
    let t_eq = 5.0 * cfg.tau_p;
    let at_eq = res
        .times
        .iter()
        .position(|&t| t >= t_eq - 1e-12)
        .map(|k| (c.mean_gas[k] - eq).abs());
    claims.push(claim(
        "uniform loading follows the homogeneous two-ODE solution",
        "linf_gas_error",
        linf,
        Some(linf < 1e-3),
    ));
    if let Some(e) = at_eq {
        claims.push(claim(
            "gas reaches the momentum-weighted equilibrium by five relaxation times",
            "equilibrium_error",
            e,
            Some(e < 1e-3),
        ));
    }
    json!({ "linf_gas_error": linf, "equilibrium": eq, "equilibrium_error": at_eq })
}

fn fit_summary(fit: &TauFit, tau_p: f64, claims: &mut Vec<Value>) -> Value {
    let rel = (fit.intercept - tau_p).abs() / tau_p;
    claims.push(claim(
        "effective relaxation time is linear in the inter-particle distance",
        "r_squared",
        fit.r_squared,
        Some(fit.r_squared > TAU_FIT_R2_MIN),
    ));
    claims.push(claim(
        "fitted intercept recovers the particle relaxation time",
        "intercept_rel_error",
        rel,
        Some(rel <= TAU_INTERCEPT_REL),
    ));
    json!({
        "alpha": fit.alpha,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "intercept_rel_error": rel,
        "ordering_violations": fit.ordering_violations,
    })
}

pub fn run(args: BurgersArgs) -> CliResult<()> {
    let r: Resolved<BurgersCliConfig> = resolve("burgers", args.common.config.as_deref(), &args)?;
    let c = &r.config;
    let out = require_out(&c.out)?;
    let cfg = c.physics();
    let np = c.np_list();
    let (scheme, placement, reps) = match c.mode {
        Mode::Lagrangian => (Scheme::Lagrangian, c.placement, c.reps),
        Mode::Eulerian => (Scheme::EulerianEmpirical, c.placement, c.reps),
        Mode::Homogeneous => (Scheme::Lagrangian, PlacementArg::Equispaced, 1),
    };
    if c.mode == Mode::Homogeneous && np != [c.cells] {
        return Err(CliError::config("key `np`: homogeneous mode places one particle per cell"));
    }
    if c.fit_out.is_some() && scheme != Scheme::Lagrangian {
        return Err(CliError::config("key `fit_out`: the relaxation-time fit needs lagrangian mode"));
    }
    let placement = match placement {
        PlacementArg::Random => Placement::Random,
        PlacementArg::Equispaced => Placement::Equispaced,
    };
    let rng = RngStream::new(c.seed, 0);
    let res = pooled(c.threads, || ensemble_experiment(&cfg, &np, reps, scheme, placement, &rng))
        .in_module("burgers")?;

    let mut outputs = vec![out.clone()];
    let mut claims = Vec::new();
    let mut summary = serde_json::Map::new();
    if np.len() == 1 {
        single_table(&res).write(&out, args.common.format)?;
    } else {
        sweep_table(&res).write(&out, args.common.format)?;
    }
    summary.insert(
        "deviation".into(),
        json!(res.curves.iter().map(|c| json!({ "np": c.np, "value": c.deviation })).collect::<Vec<_>>()),
    );
    summary.insert(
        "clip_count".into(),
        json!(res.curves.iter().map(|c| c.clip_count).sum::<usize>()),
    );
    if c.mode == Mode::Homogeneous {
        summary.insert("homogeneous".into(), homogeneous_summary(&res, &cfg, &mut claims));
    }
    if let Some(f) = res.fit {
        summary.insert("slope_deviation".into(), json!(f.slope));
        if scheme == Scheme::Lagrangian && placement == Placement::Random {
            claims.push(claim(
                "ensemble-mean gas converges to the homogeneous limit at rate 1/Np",
                "slope_deviation",
                f.slope,
                Some(in_band(f.slope, RATE_BAND)),
            ));
        }
    }
    if let Some(path) = &c.fit_out {
        let fit = fit_effective_tau(&res, &cfg).in_module("burgers")?;
        fit_table(&fit).write(path, args.common.format)?;
        outputs.push(path.clone());
        summary.insert("tau_fit".into(), fit_summary(&fit, cfg.tau_p, &mut claims));
    }
    write_sidecar("burgers", &r, &out, &outputs, Value::Object(summary), claims)
}
