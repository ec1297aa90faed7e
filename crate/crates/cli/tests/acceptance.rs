//! Runs every reproduction criterion through the documented command lines
//! and prints one PASS/FAIL line per criterion.
//!
//! Failures are reported, not hidden: the process exits non-zero when a
//! command errors, and also on any FAIL when TURBCLOUD_ACCEPTANCE_STRICT is
//! set.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::Value;
use turbcloud_cli::commands::report::{read_columns, relative_l2};
use turbcloud_cli::criteria::*;
use turbcloud_core::lagrangian::{rk4_step, ParticleCloud};
use turbcloud_core::meanfield::{wasserstein2_1d, wasserstein2_exact, wasserstein2_exact_small};
use turbcloud_core::turbulence::{sample_field, SpectralMode, SpectrumConfig, SyntheticField};
use turbcloud_core::RngStream;

/// Analytic divergence relative to sum |a_n| |k_n|.
const DIVERGENCE_REL: f64 = 1e-10;
/// Analytic against central differences with step FD_STEP.
const DIVERGENCE_FD_ABS: f64 = 1e-6;
const FD_STEP: f64 = 1e-5;
/// Exponential relaxation of the zero-mode field.
const RELAXATION_ABS: f64 = 1e-8;
const RK4_ORDER_MIN: f64 = 3.8;
/// Closed-form homogeneous limit and its equilibrium.
const HOMOGENEOUS_ABS: f64 = 1e-3;
const W1D_REL: f64 = 1e-12;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

struct Runner {
    dir: PathBuf,
    results: Vec<(usize, &'static str, Outcome)>,
}

impl Runner {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn cli(&self, args: &[&str]) {
        let argv = std::iter::once("turbcloud").chain(args.iter().copied());
        if let Err(e) = turbcloud_cli::run(argv) {
            panic!("`turbcloud {}` failed: {e}", args.join(" "));
        }
    }

    fn out(&self, name: &str) -> String {
        self.path(name).display().to_string()
    }

    fn check(&mut self, n: usize, name: &'static str, f: impl FnOnce(&Runner) -> Outcome) {
        let start = Instant::now();
        let o = f(self);
        println!(
            "criterion {n:>2} {}: {name} ({}; {:.1} s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
        self.results.push((n, name, o));
    }
}

fn sidecar(path: &Path) -> Value {
    let p = turbcloud_cli::output::sidecar_path(path);
    serde_json::from_str(&fs::read_to_string(&p).expect("sidecar exists")).expect("sidecar is JSON")
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn relaxation() -> Outcome {
    let p = SpectrumConfig { dim: 1, ..SpectrumConfig::default() }.resolve().unwrap();
    let f = SyntheticField::from_modes(p, vec![]);
    let mut cloud = ParticleCloud::new(vec![vec![0.0]], vec![vec![1.0]], 1.0).unwrap();
    for s in 0..5000 {
        rk4_step(&mut cloud, &f, s as f64 * 1e-3, 1e-3).unwrap();
    }
    let err = (cloud.velocity(0)[0] - (-5.0f64).exp()).abs();
    Outcome::new(err < RELAXATION_ABS, format!("|c(5) - exp(-5)| = {err:.2e}"))
}

fn rk4_order() -> Outcome {
    let p = SpectrumConfig::default().resolve().unwrap();
    let mode = |a, k, omega, phase| SpectralMode { amplitude: a, wavevector: k, omega, phase };
    let f = SyntheticField::from_modes(
        p,
        vec![
            mode([0.0, 0.8, 0.3], [1.0, 0.0, 0.0], 0.7, 0.1),
            mode([0.5, 0.0, -0.4], [0.0, 1.3, 0.0], -0.4, 1.9),
            mode([0.3, -0.6, 0.0], [0.0, 0.0, 0.9], 1.1, 4.0),
        ],
    );
    let endpoint = |dt: f64| {
        let mut cloud =
            ParticleCloud::new(vec![vec![0.2], vec![-0.3], vec![0.5]], vec![vec![0.1], vec![0.0], vec![-0.2]], 0.5)
                .unwrap();
        let steps = (1.0 / dt).round() as usize;
        for s in 0..steps {
            rk4_step(&mut cloud, &f, s as f64 * dt, dt).unwrap();
        }
        let (x, c) = (cloud.position(0), cloud.velocity(0));
        [x[0], x[1], x[2], c[0], c[1], c[2]]
    };
    let reference = endpoint(0.1 / 64.0);
    let err = |dt| {
        endpoint(dt)
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };
    let order = (err(0.1) / err(0.05)).log2();
    Outcome::new(order >= RK4_ORDER_MIN, format!("observed order {order:.3}"))
}

fn divergence() -> Outcome {
    let mut rng = RngStream::new(DEFAULT_SEED, 3);
    let field = |n_modes| {
        let p = SpectrumConfig { n_modes, dim: 3, divergence_free: Some(true), ..SpectrumConfig::default() }
            .resolve()
            .unwrap();
        sample_field(&p, &mut RngStream::new(DEFAULT_SEED, 0).derive(0)).unwrap()
    };
    let full = field(400);
    let bound: f64 = full
        .modes()
        .iter()
        .map(|m| {
            let na = m.amplitude.iter().map(|a| a * a).sum::<f64>().sqrt();
            let nk = m.wavevector.iter().map(|k| k * k).sum::<f64>().sqrt();
            na * nk
        })
        .sum();
    // central differences resolve only modes with k h << 1: a 4-mode draw
    let few = field(4);
    let (mut worst_rel, mut worst_fd) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let t = rng.uniform_range(0.0, 100.0);
        let x = [rng.uniform(), rng.uniform(), rng.uniform()];
        worst_rel = worst_rel.max(full.eval_divergence(t, &x).unwrap().abs() / bound);
        let fd: f64 = (0..3)
            .map(|ax| {
                let (mut xp, mut xm) = (x, x);
                xp[ax] += FD_STEP;
                xm[ax] -= FD_STEP;
                (few.eval_velocity(t, &xp)[ax] - few.eval_velocity(t, &xm)[ax]) / (2.0 * FD_STEP)
            })
            .sum();
        worst_fd = worst_fd.max((few.eval_divergence(t, &x).unwrap() - fd).abs());
    }
    Outcome::new(
        worst_rel < DIVERGENCE_REL && worst_fd < DIVERGENCE_FD_ABS,
        format!("max |div| / sum|a||k| = {worst_rel:.2e}, max |div - FD| = {worst_fd:.2e}"),
    )
}

const DEFAULT_SEED: u64 = turbcloud_core::rng::DEFAULT_SEED;

fn brute_force_w2(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    fn go(k: usize, perm: &mut Vec<usize>, a: &[Vec<f64>], b: &[Vec<f64>], best: &mut f64) {
        if k == perm.len() {
            let total: f64 = (0..perm.len())
                .map(|i| a[i].iter().zip(&b[perm[i]]).map(|(x, y)| (x - y) * (x - y)).sum::<f64>())
                .sum();
            *best = best.min(total);
            return;
        }
        for j in k..perm.len() {
            perm.swap(k, j);
            go(k + 1, perm, a, b, best);
            perm.swap(k, j);
        }
    }
    let mut perm: Vec<usize> = (0..a.len()).collect();
    let mut best = f64::INFINITY;
    go(0, &mut perm, a, b, &mut best);
    (best / a.len() as f64).sqrt()
}

fn wasserstein() -> Outcome {
    let mut rng = RngStream::new(DEFAULT_SEED, 8);
    let mut mismatches = 0;
    for case in 0..100 {
        let d = 1 + case % 3;
        let mut pts = || -> Vec<Vec<f64>> {
            (0..8).map(|_| (0..d).map(|_| rng.standard_normal()).collect()).collect()
        };
        let (a, b) = (pts(), pts());
        if wasserstein2_exact_small(&a, &b).unwrap() != brute_force_w2(&a, &b) {
            mismatches += 1;
        }
    }
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let a: Vec<f64> = (0..40).map(|_| rng.standard_normal()).collect();
        let b: Vec<f64> = (0..40).map(|_| 2.0 * rng.uniform()).collect();
        let w1 = wasserstein2_1d(&a, &b).unwrap();
        let col = |v: &[f64]| v.iter().map(|&x| vec![x]).collect::<Vec<_>>();
        let we = wasserstein2_exact(&col(&a), &col(&b)).unwrap();
        worst = worst.max((w1 - we).abs() / we.max(1.0));
    }
    Outcome::new(
        mismatches == 0 && worst < W1D_REL,
        format!("{mismatches}/100 brute-force mismatches, 1D vs assignment rel. error {worst:.1e}"),
    )
}

const POWERS_OF_TWO: &str = "1,2,4,8,16,32,64,128,256";

fn main() {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let mut r = Runner { dir: tmp.path().to_path_buf(), results: Vec::new() };
    let total = Instant::now();

    r.check(1, "integrator exactness", |_| relaxation());
    r.check(2, "RK4 order", |_| rk4_order());
    r.check(3, "divergence-free field", |_| divergence());
    r.check(4, "spectrum slope", |r| {
        let out = r.out("modes.csv");
        r.cli(&["field", "sample", "--n-modes", "400", "--dim", "3", "--out", &out]);
        let s = num(&sidecar(Path::new(&out))["summary"]["shell_spectrum_slope"]);
        Outcome::new(in_band(s, SPECTRUM_SLOPE_BAND), format!("slope {s:.3}"))
    });

    let disperse = |r: &Runner, dim: &str| {
        let out = r.out(&format!("series{dim}d.csv"));
        r.cli(&[
            "disperse", "--dim", dim, "--particles", "10000", "--tau-p", "1.0", "--dt", "0.001", "--t-end", "100",
            "--out", &out,
        ]);
        sidecar(Path::new(&out))["summary"].clone()
    };
    let mut spearman_1d = f64::NAN;
    r.check(5, "1D non-diffusive dispersion", |r| {
        let s = disperse(r, "1");
        spearman_1d = num(&s["late_spearman"]);
        let ratio = num(&s["max_variance_over_t1"]);
        let decreases = s["late_decreases"].as_u64().unwrap_or(0);
        let out = r.out("sine.csv");
        r.cli(&["sine1d", "--a", "1", "--omega", "2", "--k", "1", "--tau-p", "1", "--t-end", "200", "--dt", "0.001", "--out", &out]);
        let sine = sidecar(Path::new(&out))["summary"].clone();
        let (lo, hi) = (num(&sine["late_speed_range"][0]), num(&sine["late_speed_range"][1]));
        let (blo, bhi) = (num(&sine["speed_band"][0]), num(&sine["speed_band"][1]));
        let in_band = lo >= blo - SPEED_BAND_SLACK && hi <= bhi + SPEED_BAND_SLACK;
        Outcome::new(
            decreases > 0 && ratio < BOUNDED_RATIO_MAX && in_band,
            format!(
                "{decreases} late decreases, max/var(1) = {ratio:.2}, one-sine speed in [{lo:.4}, {hi:.4}] vs band [{blo}, {bhi}]"
            ),
        )
    });
    r.check(6, "dimensionality contrast", |r| {
        let s3 = num(&disperse(r, "3")["late_spearman"]);
        Outcome::new(
            s3 > SPEARMAN_3D_MIN && s3 - spearman_1d >= SPEARMAN_GAP_MIN,
            format!("Spearman 3D {s3:.3}, 1D {spearman_1d:.3}"),
        )
    });
    r.check(7, "propagation-of-chaos rate", |r| {
        let out = r.out("chaos.csv");
        r.cli(&[
            "chaos", "--ns", "8,16,32,64,128,256,512", "--reps", "200", "--lambda", "1.0", "--sigma", "0.5",
            "--t-end", "2", "--dt", "0.001", "--onepoint", "false", "--out", &out,
        ]);
        let s = sidecar(Path::new(&out))["summary"].clone();
        let (a, b) = (num(&s["slope_mean_sq_coupling_dist"]), num(&s["slope_w2sq_pairs"]));
        Outcome::new(
            in_band(a, RATE_BAND) && in_band(b, RATE_BAND),
            format!("single-particle slope {a:.3}, pair slope {b:.3}"),
        )
    });
    r.check(8, "Wasserstein oracles", |_| wasserstein());
    r.check(9, "Burgers homogeneous limit", |r| {
        let out = r.out("homogeneous.csv");
        r.cli(&[
            "burgers", "--mode", "homogeneous", "--cells", "128", "--u0-gas", "1", "--u0-particles", "0",
            "--kappa-m", "1", "--tau-p", "0.1", "--dt", "0.0001", "--t-end", "0.5", "--out", &out,
        ]);
        let h = sidecar(Path::new(&out))["summary"]["homogeneous"].clone();
        let (linf, eq) = (num(&h["linf_gas_error"]), num(&h["equilibrium_error"]));
        Outcome::new(
            linf < HOMOGENEOUS_ABS && eq < HOMOGENEOUS_ABS,
            format!("L-inf error {linf:.2e}, equilibrium error at 5 tau_p {eq:.2e}"),
        )
    });
    let sweep = r.out("burgers_sweep.csv");
    let fit = r.out("tau_fit.csv");
    r.check(10, "Lagrangian ensemble convergence", |r| {
        r.cli(&["burgers", "--mode", "lagrangian", "--np", POWERS_OF_TWO, "--reps", "200", "--fit-out", &fit, "--out", &sweep]);
        let s = num(&sidecar(Path::new(&sweep))["summary"]["slope_deviation"]);
        Outcome::new(in_band(s, RATE_BAND), format!("deviation slope {s:.3}"))
    });
    r.check(11, "effective relaxation time", |_| {
        let f = sidecar(Path::new(&sweep))["summary"]["tau_fit"].clone();
        let (r2, rel) = (num(&f["r_squared"]), num(&f["intercept_rel_error"]));
        Outcome::new(
            r2 > TAU_FIT_R2_MIN && rel <= TAU_INTERCEPT_REL,
            format!("R^2 {r2:.4}, intercept {:.5} ({:.1}% from tau_p)", num(&f["intercept"]), 100.0 * rel),
        )
    });
    r.check(12, "empirical Eulerian consistency", |r| {
        let out = r.out("burgers_eulerian.csv");
        r.cli(&["burgers", "--mode", "eulerian", "--np", "4,16,64", "--reps", "200", "--out", &out]);
        let mut worst = 0.0f64;
        let mut parts = Vec::new();
        for np in ["4", "16", "64"] {
            let col = format!("gas_np{np}");
            let e = read_columns(Path::new(&out), &[&col]).unwrap().remove(0);
            let l = read_columns(Path::new(&sweep), &[&col]).unwrap().remove(0);
            let rel = relative_l2(&e, &l);
            worst = worst.max(rel);
            parts.push(format!("Np {np}: {:.2}%", 100.0 * rel));
        }
        Outcome::new(worst < EULER_LAGRANGE_REL_L2, format!("relative L2 {}", parts.join(", ")))
    });
    r.check(13, "reproducibility", |r| {
        // every documented command, at reduced scale, on 1 and 4 workers
        let runs: Vec<(&str, Vec<&str>)> = vec![
            ("modes", vec!["field", "sample", "--n-modes", "400", "--dim", "3"]),
            ("grid", vec!["field", "eval", "--n-modes", "50", "--dim", "2", "--points", "8", "--times", "0,1"]),
            ("disperse1", vec!["disperse", "--dim", "1", "--particles", "1000", "--t-end", "5", "--tracks", "3"]),
            ("disperse3", vec!["disperse", "--dim", "3", "--particles", "1000", "--t-end", "5"]),
            ("chaos", vec!["chaos", "--ns", "8,16,32", "--reps", "40", "--t-end", "0.5"]),
            ("sine", vec!["sine1d", "--t-end", "50"]),
            ("homogeneous", vec!["burgers", "--mode", "homogeneous"]),
            ("sweep", vec!["burgers", "--np", "8,16,32,64", "--reps", "40"]),
            ("eulerian", vec!["burgers", "--mode", "eulerian", "--np", "4,16", "--reps", "40"]),
        ];
        let mut differing = Vec::new();
        for (name, args) in &runs {
            let mut bytes = Vec::new();
            for threads in ["1", "4"] {
                let out = r.out(&format!("repro_{name}_{threads}.csv"));
                let mut a = args.clone();
                if !matches!(a[0], "field" | "sine1d") {
                    a.extend(["--threads", threads]);
                }
                a.extend(["--out", &out]);
                r.cli(&a);
                let mut b = fs::read(&out).unwrap();
                let tracks = Path::new(&out).with_extension("tracks.csv");
                if tracks.exists() {
                    b.extend(fs::read(tracks).unwrap());
                }
                bytes.push(b);
            }
            if bytes[0] != bytes[1] {
                differing.push(*name);
            }
        }
        Outcome::new(
            differing.is_empty(),
            if differing.is_empty() {
                format!("{} command lines byte-identical across 1 and 4 workers", runs.len())
            } else {
                format!("differing: {}", differing.join(", "))
            },
        )
    });

    let passed = r.results.iter().filter(|(_, _, o)| o.pass).count();
    println!("{passed}/{} criteria passed in {:.0} s", r.results.len(), total.elapsed().as_secs_f64());
    for (n, name, _) in r.results.iter().filter(|(_, _, o)| !o.pass) {
        println!("  failing: criterion {n} ({name})");
    }
    let strict = std::env::var_os("TURBCLOUD_ACCEPTANCE_STRICT").is_some();
    if strict && passed < r.results.len() {
        std::process::exit(1);
    }
}
