//! Finite-N error of the interacting system against its mean-field limit.

use rayon::prelude::*;

use super::law::{evolve_gaussian_law, GaussianLaw};
use super::spec::{ExternalFieldSpec, KernelSpec};
use super::system::MeanFieldSystem;
use super::wasserstein::wasserstein2_exact;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::stats::{self, RegressionResult};

#[derive(Debug, Clone)]
pub struct ChaosConfig {
    pub ns: Vec<usize>,
    pub reps: usize,
    pub kernel: KernelSpec,
    pub field: ExternalFieldSpec,
    pub sigma: f64,
    pub t_end: f64,
    pub dt: f64,
    /// Law of the i.i.d. initial data.
    pub initial: GaussianLaw,
    /// Also compute the assignment-based one-point distances (cubic in N).
    pub with_onepoint: bool,
}

impl Default for ChaosConfig {
    fn default() -> Self {
        Self {
            ns: vec![8, 16, 32, 64, 128, 256, 512],
            reps: 200,
            kernel: KernelSpec::alignment(1.0),
            field: ExternalFieldSpec::None,
            sigma: 0.5,
            t_end: 2.0,
            dt: 1e-3,
            initial: GaussianLaw::isotropic(1, 0.0, 1.0, 0.0, 1.0).expect("valid law"),
            with_onepoint: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChaosRow {
    pub n: usize,
    /// E|z_1 - zbar_1|^2 over repetitions.
    pub mean_sq_coupling_dist: f64,
    /// Standard error of the above.
    pub mean_sq_stderr: f64,
    /// W2^2 between the empirical measure and N fresh draws of f_t.
    pub w2sq_onepoint: f64,
    /// Coupling bound on W2^2 between the law of a particle pair and
    /// f_t x f_t: mean over disjoint pairs of |(z_i, z_j) - (zbar_i, zbar_j)|^2.
    pub w2sq_pairs: f64,
    /// W2^2 between two independent N-samples of f_t (estimator bias floor).
    pub w2sq_selfbias: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChaosTable {
    pub rows: Vec<ChaosRow>,
    /// Log-log fit of `mean_sq_coupling_dist` against N; `None` when every
    /// distance is zero (decoupled systems).
    pub coupling_fit: Option<RegressionResult>,
    pub pairs_fit: Option<RegressionResult>,
}

struct RepResult {
    d1: f64,
    pairs: f64,
    onepoint: f64,
    selfbias: f64,
}

fn rows_of(z: &[f64], w: usize) -> Vec<Vec<f64>> {
    z.chunks(w).map(|r| r.to_vec()).collect()
}

/// Runs the coupled interacting/fictive pair for every N and repetition.
///
/// Repetition `r` at size `N` draws from `rng.derive(N).derive(r)`, so the
/// table does not depend on the number of worker threads.
pub fn chaos_convergence_experiment(cfg: &ChaosConfig, rng: &RngStream) -> Result<ChaosTable> {
    if cfg.ns.len() < 2 || cfg.ns.iter().any(|&n| n < 2) {
        return Err(Error::invalid("ns", "need at least two sizes, each >= 2"));
    }
    if cfg.reps < 2 {
        return Err(Error::invalid("reps", "must be >= 2"));
    }
    if !(cfg.dt > 0.0) || !(cfg.t_end > 0.0) {
        return Err(Error::invalid("dt", "dt and t_end must be > 0"));
    }
    let dim = cfg.initial.dim();
    cfg.field.validate(dim)?;
    let n_steps = (cfg.t_end / cfg.dt).round() as usize;
    // the limit law does not depend on N: tabulate it once
    let mut laws = Vec::with_capacity(n_steps + 1);
    laws.push(cfg.initial.clone());
    for s in 0..n_steps {
        laws.push(evolve_gaussian_law(&laws[s], &cfg.field, &cfg.kernel, cfg.sigma, cfg.dt)?);
    }
    let w = 2 * dim;

    let mut rows = Vec::with_capacity(cfg.ns.len());
    for &n in &cfg.ns {
        let base = rng.derive(n as u64);
        let reps: Vec<RepResult> = (0..cfg.reps)
            .into_par_iter()
            .map(|r| -> Result<RepResult> {
                let mut s = base.derive(r as u64);
                let init = cfg.initial.sample(n, &mut s);
                let mut sys =
                    MeanFieldSystem::new(dim, init, cfg.sigma, cfg.kernel, cfg.field.clone())?;
                for (k, law) in laws.iter().take(n_steps).enumerate() {
                    let t = k as f64 * cfg.dt;
                    sys.em_step_interacting(t, cfg.dt, &mut s)?;
                    sys.em_step_fictive(law, t, cfg.dt)?;
                }
                let pairs = (0..n / 2)
                    .map(|m| sys.coupling_dist_sq(2 * m) + sys.coupling_dist_sq(2 * m + 1))
                    .sum::<f64>()
                    / (n / 2) as f64;
                let (onepoint, selfbias) = if cfg.with_onepoint {
                    let law = &laws[n_steps];
                    let fresh_a = rows_of(&law.sample(n, &mut s), w);
                    let fresh_b = rows_of(&law.sample(n, &mut s), w);
                    let emp = rows_of(sys.interacting(), w);
                    (
                        wasserstein2_exact(&emp, &fresh_a)?.powi(2),
                        wasserstein2_exact(&fresh_a, &fresh_b)?.powi(2),
                    )
                } else {
                    (f64::NAN, f64::NAN)
                };
                Ok(RepResult {
                    d1: sys.coupling_dist_sq(0),
                    pairs,
                    onepoint,
                    selfbias,
                })
            })
            .collect::<Result<_>>()?;
        let d1: Vec<f64> = reps.iter().map(|r| r.d1).collect();
        let m = stats::mean(&d1);
        let se = (stats::sample_variance(&d1)? / d1.len() as f64).sqrt();
        let avg = |f: fn(&RepResult) -> f64| reps.iter().map(f).sum::<f64>() / reps.len() as f64;
        rows.push(ChaosRow {
            n,
            mean_sq_coupling_dist: m,
            mean_sq_stderr: se,
            w2sq_onepoint: avg(|r| r.onepoint),
            w2sq_pairs: avg(|r| r.pairs),
            w2sq_selfbias: avg(|r| r.selfbias),
        });
    }

    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let fit = |ys: Vec<f64>| -> Result<Option<RegressionResult>> {
        if ys.iter().all(|&y| y == 0.0) {
            Ok(None)
        } else {
            stats::loglog_fit(&ns, &ys).map(Some)
        }
    };
    Ok(ChaosTable {
        coupling_fit: fit(rows.iter().map(|r| r.mean_sq_coupling_dist).collect())?,
        pairs_fit: fit(rows.iter().map(|r| r.w2sq_pairs).collect())?,
        rows,
    })
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoupled_case_is_degenerate() {
        let cfg = ChaosConfig {
            ns: vec![4, 8, 16],
            reps: 4,
            kernel: KernelSpec::alignment(0.0),
            t_end: 0.1,
            dt: 0.01,
            with_onepoint: false,
            ..Default::default()
        };
        let t = chaos_convergence_experiment(&cfg, &RngStream::new(1, 0)).unwrap();
        assert!(t
            .rows
            .iter()
            .all(|r| r.mean_sq_coupling_dist == 0.0 && r.w2sq_pairs == 0.0));
        assert!(t.coupling_fit.is_none() && t.pairs_fit.is_none());
    }

    #[test]
    fn rejects_bad_configs() {
        let cfg = ChaosConfig {
            ns: vec![8],
            ..Default::default()
        };
        assert!(chaos_convergence_experiment(&cfg, &RngStream::new(1, 0)).is_err());
    }

    #[test]
    fn small_run_shows_decay() {
        let cfg = ChaosConfig {
            ns: vec![8, 32, 128],
            reps: 100,
            t_end: 1.0,
            dt: 0.01,
            ..Default::default()
        };
        let t = chaos_convergence_experiment(&cfg, &RngStream::new(3, 0)).unwrap();
        let f = t.coupling_fit.unwrap();
        assert!(f.slope < -0.5, "{t:?}");
        for r in &t.rows {
            assert!(r.w2sq_onepoint > 0.0 && r.w2sq_selfbias > 0.0);
        }
    }
}
