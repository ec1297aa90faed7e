//! Inertial particles in a synthetic field under linear Stokes drag.
//!
//! Each particle obeys dX = C dt, dC = (u(t, X) - C) / tau_p dt, integrated
//! with classical RK4. Particles never interact and never act on the field.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::turbulence::{sample_field, SpectrumParams, SyntheticField, Vec3};

/// Particles advanced together by one worker; also the unit of the
/// statistics reduction, so it must not depend on the thread count.
const CHUNK: usize = 512;

/// Particle positions and velocities, stored one vector per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleCloud {
    positions: Vec<Vec<f64>>,
    velocities: Vec<Vec<f64>>,
    tau_p: f64,
}

impl ParticleCloud {
    /// `positions[ax][i]` is coordinate `ax` of particle `i`.
    pub fn new(positions: Vec<Vec<f64>>, velocities: Vec<Vec<f64>>, tau_p: f64) -> Result<Self> {
        if !(tau_p > 0.0) {
            return Err(Error::invalid("tau_p", format!("must be > 0, got {tau_p}")));
        }
        if !(1..=3).contains(&positions.len()) {
            return Err(Error::UnsupportedDimension {
                dim: positions.len(),
            });
        }
        let n = positions[0].len();
        if velocities.len() != positions.len()
            || positions.iter().chain(&velocities).any(|v| v.len() != n)
        {
            return Err(Error::InvalidInput(
                "positions and velocities must have identical shape".into(),
            ));
        }
        Ok(Self {
            positions,
            velocities,
            tau_p,
        })
    }

    pub fn count(&self) -> usize {
        self.positions[0].len()
    }

    pub fn dim(&self) -> usize {
        self.positions.len()
    }

    pub fn tau_p(&self) -> f64 {
        self.tau_p
    }

    pub fn positions(&self) -> &[Vec<f64>] {
        &self.positions
    }

    pub fn velocities(&self) -> &[Vec<f64>] {
        &self.velocities
    }

    pub fn position(&self, i: usize) -> Vec3 {
        let mut p = [0.0; 3];
        for (ax, v) in self.positions.iter().enumerate() {
            p[ax] = v[i];
        }
        p
    }

    pub fn velocity(&self, i: usize) -> Vec3 {
        let mut p = [0.0; 3];
        for (ax, v) in self.velocities.iter().enumerate() {
            p[ax] = v[i];
        }
        p
    }
}

/// Right-hand side of the drag system at one particle: (dx/dt, dc/dt).
pub fn drag_rhs(t: f64, x: &[f64], c: &[f64], f: &SyntheticField, tau_p: f64) -> (Vec3, Vec3) {
    let u = f.eval_velocity(t, x);
    let mut dx = [0.0; 3];
    let mut dc = [0.0; 3];
    for ax in 0..c.len() {
        dx[ax] = c[ax];
        dc[ax] = (u[ax] - c[ax]) / tau_p;
    }
    (dx, dc)
}

/// Scratch space for RK4 on one chunk of particles.
struct Rk4Scratch {
    xs: Vec<Vec<f64>>,
    cs: Vec<Vec<f64>>,
    u: Vec<Vec<f64>>,
    sum_x: Vec<Vec<f64>>,
    sum_c: Vec<Vec<f64>>,
}

impl Rk4Scratch {
    fn new(dim: usize, n: usize) -> Self {
        let buf = || vec![vec![0.0; n]; dim];
        Self {
            xs: buf(),
            cs: buf(),
            u: buf(),
            sum_x: buf(),
            sum_c: buf(),
        }
    }

    /// Fluid velocity at the stage positions into `u`.
    fn eval_fluid(&mut self, f: &SyntheticField, t: f64) {
        for v in self.u.iter_mut() {
            v.fill(0.0);
        }
        let xs: Vec<&[f64]> = self.xs.iter().map(|v| v.as_slice()).collect();
        let mut u: Vec<&mut [f64]> = self.u.iter_mut().map(|v| v.as_mut_slice()).collect();
        f.accumulate_velocity(t, &xs, &mut u);
    }
}

/// One classical RK4 step for a chunk given as per-axis slices.
fn rk4_chunk(
    f: &SyntheticField,
    tau_p: f64,
    t: f64,
    dt: f64,
    x: &mut [&mut [f64]],
    c: &mut [&mut [f64]],
    s: &mut Rk4Scratch,
) {
    let n = x[0].len();
    let dim = x.len();
    let half = 0.5 * dt;
    // stage 1 at the current state
    for (sx, xa) in s.xs.iter_mut().zip(x.iter()) {
        sx[..n].copy_from_slice(xa);
    }
    s.eval_fluid(f, t);
    for ax in 0..dim {
        for i in 0..n {
            let k_x = c[ax][i];
            let k_c = (s.u[ax][i] - c[ax][i]) / tau_p;
            s.sum_x[ax][i] = k_x;
            s.sum_c[ax][i] = k_c;
            s.xs[ax][i] = x[ax][i] + half * k_x;
            s.cs[ax][i] = c[ax][i] + half * k_c;
        }
    }
    // stages 2 and 3 at the midpoint
    for (w, h) in [(2.0, half), (2.0, dt)] {
        s.eval_fluid(f, t + half);
        for ax in 0..dim {
            for i in 0..n {
                let k_x = s.cs[ax][i];
                let k_c = (s.u[ax][i] - s.cs[ax][i]) / tau_p;
                s.sum_x[ax][i] += w * k_x;
                s.sum_c[ax][i] += w * k_c;
                s.xs[ax][i] = x[ax][i] + h * k_x;
                s.cs[ax][i] = c[ax][i] + h * k_c;
            }
        }
    }
    // stage 4 at the end point
    s.eval_fluid(f, t + dt);
    let sixth = dt / 6.0;
    for ax in 0..dim {
        for i in 0..n {
            let k_x = s.cs[ax][i];
            let k_c = (s.u[ax][i] - s.cs[ax][i]) / tau_p;
            x[ax][i] += sixth * (s.sum_x[ax][i] + k_x);
            c[ax][i] += sixth * (s.sum_c[ax][i] + k_c);
        }
    }
}

/// Splits per-axis vectors into chunks of per-axis slices.
fn split_axes(axes: &mut [Vec<f64>], chunk: usize) -> Vec<Vec<&mut [f64]>> {
    let n = axes[0].len();
    let n_chunks = n.div_ceil(chunk);
    let mut iters: Vec<_> = axes.iter_mut().map(|v| v.chunks_mut(chunk)).collect();
    (0..n_chunks)
        .map(|_| iters.iter_mut().map(|it| it.next().unwrap()).collect())
        .collect()
}

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("dt", format!("must be finite and > 0, got {dt}")))
    }
}

/// Advances every particle of `cloud` by one RK4 step from time `t`.
pub fn rk4_step(cloud: &mut ParticleCloud, f: &SyntheticField, t: f64, dt: f64) -> Result<()> {
    check_dt(dt)?;
    if cloud.dim() != f.dim() {
        return Err(Error::InvalidInput(format!(
            "cloud dimension {} differs from field dimension {}",
            cloud.dim(),
            f.dim()
        )));
    }
    let tau_p = cloud.tau_p;
    let dim = cloud.dim();
    let xs = split_axes(&mut cloud.positions, CHUNK);
    let cs = split_axes(&mut cloud.velocities, CHUNK);
    xs.into_par_iter()
        .zip(cs)
        .for_each(|(mut x, mut c)| {
            let mut s = Rk4Scratch::new(dim, x[0].len());
            rk4_chunk(f, tau_p, t, dt, &mut x, &mut c, &mut s);
        });
    Ok(())
}

/// Initial particle velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitVelocity {
    /// Particles start at rest.
    #[default]
    Zero,
    /// Particles start with the fluid velocity at their release point.
    Fluid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionConfig {
    pub n_particles: usize,
    pub tau_p: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Interval between recorded samples (s).
    pub output_every: f64,
    /// Side of the release box [0, L)^d; `None` means 2 pi / k0.
    pub box_len: Option<f64>,
    pub init_velocity: InitVelocity,
    /// Number of leading particles whose positions are recorded.
    pub n_tracks: usize,
}

impl Default for DispersionConfig {
    fn default() -> Self {
        Self {
            n_particles: 10_000,
            tau_p: 1.0,
            dt: 1e-3,
            t_end: 100.0,
            output_every: 0.1,
            box_len: None,
            init_velocity: InitVelocity::Zero,
            n_tracks: 0,
        }
    }
}

/// Maximum number of particle tracks a run records.
pub const MAX_TRACKS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionSeries {
    pub times: Vec<f64>,
    /// `variance_per_axis[j][ax]` at `times[j]`.
    pub variance_per_axis: Vec<Vec<f64>>,
    pub variance_total: Vec<f64>,
    /// `tracks[j][p]` is the position of particle `p` at `times[j]`.
    pub tracks: Vec<Vec<Vec3>>,
}

/// Running (count, mean, sum of squared deviations) per axis.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let m2 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
        Self { n, mean, m2 }
    }

    fn merge(self, o: Self) -> Self {
        if self.n == 0.0 {
            return o;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Self {
            n,
            mean: self.mean + d * o.n / n,
            m2: self.m2 + o.m2 + d * d * self.n * o.n / n,
        }
    }
}

fn steps_for(span: f64, dt: f64, name: &'static str) -> Result<usize> {
    let r = span / dt;
    let n = r.round();
    if !(n >= 1.0) || (r - n).abs() > 1e-6 * n.max(1.0) {
        return Err(Error::invalid(
            name,
            format!("{span} is not a positive integer multiple of dt = {dt}"),
        ));
    }
    Ok(n as usize)
}

/// Samples one field realization from `rng` and tracks a cloud through it.
///
/// The field is drawn from substream 0 of `rng` and the release positions
/// from substream 1.
pub fn simulate_dispersion(
    p: &SpectrumParams,
    cfg: &DispersionConfig,
    rng: &RngStream,
) -> Result<DispersionSeries> {
    let field = sample_field(p, &mut rng.derive(0))?;
    simulate_dispersion_in(&field, cfg, &mut rng.derive(1))
}

/// Tracks a cloud released uniformly in the configured box through `field`.
pub fn simulate_dispersion_in(
    field: &SyntheticField,
    cfg: &DispersionConfig,
    rng: &mut RngStream,
) -> Result<DispersionSeries> {
    if cfg.n_particles < 2 {
        return Err(Error::invalid("n_particles", "must be >= 2"));
    }
    if cfg.n_tracks > MAX_TRACKS.min(cfg.n_particles) {
        return Err(Error::invalid(
            "n_tracks",
            format!("at most {} tracks can be recorded", MAX_TRACKS.min(cfg.n_particles)),
        ));
    }
    check_dt(cfg.dt)?;
    let dim = field.dim();
    let box_len = cfg
        .box_len
        .unwrap_or(std::f64::consts::TAU / field.params().k0);
    if !(box_len > 0.0) {
        return Err(Error::invalid("box_len", "must be > 0"));
    }
    let n = cfg.n_particles;
    let mut pos = vec![vec![0.0; n]; dim];
    for i in 0..n {
        for axis in pos.iter_mut() {
            axis[i] = rng.uniform_range(0.0, box_len);
        }
    }
    let mut vel = vec![vec![0.0; n]; dim];
    if cfg.init_velocity == InitVelocity::Fluid {
        let mut x = [0.0; 3];
        for i in 0..n {
            for ax in 0..dim {
                x[ax] = pos[ax][i];
            }
            let u = field.eval_velocity(0.0, &x[..dim]);
            for ax in 0..dim {
                vel[ax][i] = u[ax];
            }
        }
    }
    let cloud = ParticleCloud::new(pos, vel, cfg.tau_p)?;
    run_cloud(field, cloud, cfg)
}

/// Integrates `cloud` to `cfg.t_end`, recording statistics every
/// `cfg.output_every`.
pub fn run_cloud(
    field: &SyntheticField,
    mut cloud: ParticleCloud,
    cfg: &DispersionConfig,
) -> Result<DispersionSeries> {
    check_dt(cfg.dt)?;
    if cloud.dim() != field.dim() {
        return Err(Error::InvalidInput(format!(
            "cloud dimension {} differs from field dimension {}",
            cloud.dim(),
            field.dim()
        )));
    }
    if cloud.count() < 2 {
        return Err(Error::InsufficientData("dispersion needs >= 2 particles".into()));
    }
    let n_steps = steps_for(cfg.t_end, cfg.dt, "t_end")?;
    let every = steps_for(cfg.output_every, cfg.dt, "output_every")?;
    let n_out = n_steps / every + 1;
    let dim = cloud.dim();
    let tau_p = cloud.tau_p;
    let (dt, n_tracks) = (cfg.dt, cfg.n_tracks.min(cloud.count()));

    // Each chunk is advanced over the whole horizon independently; the
    // per-chunk moments are merged afterwards in chunk order.
    let xs = split_axes(&mut cloud.positions, CHUNK);
    let cs = split_axes(&mut cloud.velocities, CHUNK);
    type ChunkRecord = (Vec<Vec<Moments>>, Vec<Vec<Vec3>>);
    let per_chunk: Vec<ChunkRecord> = xs
        .into_par_iter()
        .zip(cs)
        .enumerate()
        .map(|(ci, (mut x, mut c))| {
            let tracked = if ci == 0 { n_tracks } else { 0 };
            let mut s = Rk4Scratch::new(dim, x[0].len());
            let mut moments = Vec::with_capacity(n_out);
            let mut tracks = Vec::with_capacity(if tracked > 0 { n_out } else { 0 });
            let mut record = |x: &[&mut [f64]]| {
                moments.push(x.iter().map(|a| Moments::of(a)).collect::<Vec<_>>());
                if tracked > 0 {
                    tracks.push(
                        (0..tracked)
                            .map(|i| {
                                let mut p = [0.0; 3];
                                for ax in 0..dim {
                                    p[ax] = x[ax][i];
                                }
                                p
                            })
                            .collect::<Vec<Vec3>>(),
                    );
                }
            };
            record(&x);
            for step in 0..n_steps {
                rk4_chunk(field, tau_p, step as f64 * dt, dt, &mut x, &mut c, &mut s);
                if (step + 1) % every == 0 {
                    record(&x);
                }
            }
            (moments, tracks)
        })
        .collect();

    let denom = (cloud.count() - 1) as f64;
    let mut series = DispersionSeries {
        times: Vec::with_capacity(n_out),
        variance_per_axis: Vec::with_capacity(n_out),
        variance_total: Vec::with_capacity(n_out),
        tracks: Vec::new(),
    };
    for j in 0..n_out {
        let per_axis: Vec<f64> = (0..dim)
            .map(|ax| {
                per_chunk
                    .iter()
                    .fold(Moments::default(), |acc, (m, _)| acc.merge(m[j][ax]))
                    .m2
                    / denom
            })
            .collect();
        series.times.push((j * every) as f64 * dt);
        series.variance_total.push(per_axis.iter().sum());
        series.variance_per_axis.push(per_axis);
    }
    if let Some((_, tracks)) = per_chunk.into_iter().next() {
        series.tracks = tracks;
    }
    Ok(series)
}

/// Records the first `n_tracks` (at most 10) particle paths of a dispersion
/// run at the output cadence.
pub fn trajectory_dump(
    p: &SpectrumParams,
    cfg: &DispersionConfig,
    n_tracks: usize,
    rng: &RngStream,
) -> Result<DispersionSeries> {
    let cfg = DispersionConfig {
        n_tracks,
        ..cfg.clone()
    };
    simulate_dispersion(p, &cfg, rng)
}
