use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;
use turbcloud_core::meanfield::{
    chaos_convergence_experiment, ChaosConfig, ChaosTable, ExternalFieldSpec, GaussianLaw, KernelSpec,
};
use turbcloud_core::stats::{self, RegressionResult};
use turbcloud_core::RngStream;

use super::{claim, pooled, require_out, write_sidecar};
use crate::config::{resolve, Resolved};
use crate::criteria::{in_band, RATE_BAND};
use crate::error::{CliError, CliResult, InModule};
use crate::output::{Cell, Table};
use crate::Common;

#[derive(Debug, Clone, Args, Serialize)]
pub struct ChaosArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    /// System sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<usize>>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Velocity alignment strength: F(x, c) = -alpha x - lambda c.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Uniform drag towards `drag_u` with this relaxation time; off if unset.
    #[arg(long)]
    pub drag_tau: Option<f64>,
    #[arg(long)]
    pub drag_u: Option<f64>,
    #[arg(long)]
    pub x_mean: Option<f64>,
    #[arg(long)]
    pub x_std: Option<f64>,
    #[arg(long)]
    pub c_mean: Option<f64>,
    #[arg(long)]
    pub c_std: Option<f64>,
    /// Compute the assignment-based one-point distances (cubic in N).
    #[arg(long)]
    pub onepoint: Option<bool>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChaosCliConfig {
    pub ns: Vec<usize>,
    pub reps: usize,
    pub lambda: f64,
    pub alpha: f64,
    pub sigma: f64,
    pub t_end: f64,
    pub dt: f64,
    pub dim: usize,
    pub drag_tau: Option<f64>,
    pub drag_u: f64,
    pub x_mean: f64,
    pub x_std: f64,
    pub c_mean: f64,
    pub c_std: f64,
    pub onepoint: bool,
    pub seed: u64,
    pub threads: usize,
    pub out: Option<PathBuf>,
}

impl Default for ChaosCliConfig {
    fn default() -> Self {
        let c = ChaosConfig::default();
        Self {
            ns: c.ns,
            reps: c.reps,
            lambda: c.kernel.lambda,
            alpha: c.kernel.alpha,
            sigma: c.sigma,
            t_end: c.t_end,
            dt: c.dt,
            dim: 1,
            drag_tau: None,
            drag_u: 0.0,
            x_mean: 0.0,
            x_std: 1.0,
            c_mean: 0.0,
            c_std: 1.0,
            onepoint: c.with_onepoint,
            seed: turbcloud_core::rng::DEFAULT_SEED,
            threads: 0,
            out: None,
        }
    }
}

impl ChaosCliConfig {
    pub fn experiment(&self) -> CliResult<ChaosConfig> {
        let field = match self.drag_tau {
            None => ExternalFieldSpec::None,
            Some(tau) => ExternalFieldSpec::UniformDragTo {
                u: vec![self.drag_u; self.dim],
                tau,
            },
        };
        let kernel = KernelSpec {
            alpha: self.alpha,
            lambda: self.lambda,
        };
        kernel.validate().in_module("meanfield")?;
        Ok(ChaosConfig {
            ns: self.ns.clone(),
            reps: self.reps,
            kernel,
            field,
            sigma: self.sigma,
            t_end: self.t_end,
            dt: self.dt,
            initial: GaussianLaw::isotropic(self.dim, self.x_mean, self.x_std, self.c_mean, self.c_std)
                .in_module("meanfield")?,
            with_onepoint: self.onepoint,
        })
    }
}

fn footer(t: &mut Table, name: &str, fit: Option<RegressionResult>) {
    let (slope, se) = fit.map_or((f64::NAN, f64::NAN), |f| (f.slope, f.slope_stderr));
    t.footer.push(vec![Cell::S(format!("slope_{name}")), Cell::F(slope)]);
    t.footer.push(vec![Cell::S(format!("slope_{name}_stderr")), Cell::F(se)]);
}

pub fn table(res: &ChaosTable, onepoint_fit: Option<RegressionResult>) -> Table {
    let mut t = Table::new(
        [
            "N",
            "mean_sq_coupling_dist",
            "mean_sq_stderr",
            "w2sq_onepoint",
            "w2sq_pairs",
            "w2sq_selfbias",
        ]
        .map(String::from)
        .to_vec(),
    );
    for r in &res.rows {
        t.push(vec![
            r.n.into(),
            Cell::F(r.mean_sq_coupling_dist),
            Cell::F(r.mean_sq_stderr),
            Cell::F(r.w2sq_onepoint),
            Cell::F(r.w2sq_pairs),
            Cell::F(r.w2sq_selfbias),
        ]);
    }
    footer(&mut t, "mean_sq_coupling_dist", res.coupling_fit);
    footer(&mut t, "w2sq_pairs", res.pairs_fit);
    footer(&mut t, "w2sq_onepoint", onepoint_fit);
    t
}

pub fn run(args: ChaosArgs) -> CliResult<()> {
    let r: Resolved<ChaosCliConfig> = resolve("chaos", args.common.config.as_deref(), &args)?;
    let c = &r.config;
    let out = require_out(&c.out)?;
    if c.onepoint && c.ns.iter().any(|&n| n > 2048) {
        return Err(CliError::config("key `onepoint`: exact assignment is limited to N <= 2048"));
    }
    let cfg = c.experiment()?;
    let rng = RngStream::new(c.seed, 0);
    let res = pooled(c.threads, || chaos_convergence_experiment(&cfg, &rng)).in_module("meanfield")?;
    let onepoint_fit = if c.onepoint {
        let ns: Vec<f64> = res.rows.iter().map(|r| r.n as f64).collect();
        let w: Vec<f64> = res.rows.iter().map(|r| r.w2sq_onepoint).collect();
        stats::loglog_fit(&ns, &w).ok()
    } else {
        None
    };
    table(&res, onepoint_fit).write(&out, args.common.format)?;

    let slope = |f: Option<RegressionResult>| f.map(|f| f.slope);
    let mut claims = Vec::new();
    for (text, metric, fit) in [
        ("single-particle coupling error decays like 1/N", "slope_mean_sq_coupling_dist", res.coupling_fit),
        ("pair law factorizes at rate 1/N", "slope_w2sq_pairs", res.pairs_fit),
    ] {
        if let Some(f) = fit {
            claims.push(claim(text, metric, f.slope, Some(in_band(f.slope, RATE_BAND))));
        }
    }
    let summary = json!({
        "slope_mean_sq_coupling_dist": slope(res.coupling_fit),
        "slope_w2sq_pairs": slope(res.pairs_fit),
        "slope_w2sq_onepoint": slope(onepoint_fit),
    });
    write_sidecar("chaos", &r, &out, std::slice::from_ref(&out), summary, claims)
}
