//! Random Fourier-mode velocity field and its evaluation kernels.

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::trig;

use super::spectrum::{SpectrumParams, SpectrumTable};

/// Spatial vector padded to three components; entries past `dim` are zero.
pub type Vec3 = [f64; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMode {
    pub amplitude: Vec3,
    pub wavevector: Vec3,
    /// Angular frequency (rad/s).
    pub omega: f64,
    /// Phase in [0, 2pi).
    pub phase: f64,
}

/// Frozen realization of the mode sum
/// u(t, x) = sum_n a_n cos(omega_n t + k_n . x + phi_n).
///
/// Immutable after construction, so any number of integrators may share it.
#[derive(Debug, Clone)]
pub struct SyntheticField {
    params: SpectrumParams,
    modes: Vec<SpectralMode>,
    soa: ModeArrays,
}

/// Structure-of-arrays copy of the modes for the batch kernels.
#[derive(Debug, Clone, Default)]
struct ModeArrays {
    k: [Vec<f64>; 3],
    a: [Vec<f64>; 3],
    omega: Vec<f64>,
    phase: Vec<f64>,
}

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

fn pad(v: &[f64]) -> Vec3 {
    let mut out = [0.0; 3];
    out[..v.len()].copy_from_slice(v);
    out
}

impl SyntheticField {
    /// Builds a field from explicit modes. `params.n_modes` is overwritten
    /// with the mode count.
    pub fn from_modes(mut params: SpectrumParams, modes: Vec<SpectralMode>) -> Self {
        params.n_modes = modes.len();
        let mut soa = ModeArrays::default();
        for m in &modes {
            for ax in 0..3 {
                soa.k[ax].push(m.wavevector[ax]);
                soa.a[ax].push(m.amplitude[ax]);
            }
            soa.omega.push(m.omega);
            soa.phase.push(m.phase);
        }
        Self { params, modes, soa }
    }

    pub fn params(&self) -> &SpectrumParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.params.dim
    }

    pub fn modes(&self) -> &[SpectralMode] {
        &self.modes
    }

    /// Upper bound on |u| over all (t, x).
    pub fn speed_bound(&self) -> f64 {
        self.modes.iter().map(|m| norm(&m.amplitude)).sum()
    }

    /// Mode energies |a_n|^2 / 2 summed over `n_bins` log-spaced shells of
    /// [k_lo, k_hi) and divided by the shell width. Returns
    /// (geometric shell centre, energy density) for the non-empty shells.
    pub fn shell_spectrum(&self, k_lo: f64, k_hi: f64, n_bins: usize) -> Result<Vec<(f64, f64)>> {
        if !(k_lo > 0.0 && k_hi > k_lo && k_hi.is_finite()) || n_bins == 0 {
            return Err(Error::InvalidInput(format!(
                "need 0 < k_lo < k_hi and n_bins >= 1, got [{k_lo}, {k_hi}), {n_bins}"
            )));
        }
        let step = (k_hi / k_lo).ln() / n_bins as f64;
        let mut energy = vec![0.0; n_bins];
        let mut hits = vec![0usize; n_bins];
        for m in &self.modes {
            let k = norm(&m.wavevector);
            if k < k_lo || k >= k_hi {
                continue;
            }
            let b = (((k / k_lo).ln() / step) as usize).min(n_bins - 1);
            energy[b] += 0.5 * dot(&m.amplitude, &m.amplitude);
            hits[b] += 1;
        }
        Ok((0..n_bins)
            .filter(|&b| hits[b] > 0)
            .map(|b| {
                let (lo, hi) = (k_lo * (step * b as f64).exp(), k_lo * (step * (b + 1) as f64).exp());
                ((lo * hi).sqrt(), energy[b] / (hi - lo))
            })
            .collect())
    }

    #[inline]
    fn time_phase(&self, m: usize, t: f64) -> f64 {
        self.soa.omega[m] * t + self.soa.phase[m]
    }

    #[inline]
    fn argument(&self, m: usize, t: f64, x: &[f64]) -> f64 {
        let mut kx = 0.0;
        for (ax, xa) in x.iter().enumerate().take(self.dim()) {
            kx += self.soa.k[ax][m] * xa;
        }
        kx + self.time_phase(m, t)
    }

    /// Velocity at one point; `x` holds `dim` coordinates.
    pub fn eval_velocity(&self, t: f64, x: &[f64]) -> Vec3 {
        let mut u = [0.0; 3];
        for m in 0..self.modes.len() {
            let c = trig::cos(self.argument(m, t, x));
            for (ax, ua) in u.iter_mut().enumerate().take(self.dim()) {
                *ua += self.soa.a[ax][m] * c;
            }
        }
        u
    }

    /// Analytic divergence, sum_n -(a_n . k_n) sin(arg_n). Requires dim >= 2.
    pub fn eval_divergence(&self, t: f64, x: &[f64]) -> Result<f64> {
        if self.dim() < 2 {
            return Err(Error::UnsupportedDimension { dim: self.dim() });
        }
        Ok(self
            .modes
            .iter()
            .enumerate()
            .map(|(m, mode)| {
                -dot(&mode.amplitude, &mode.wavevector) * trig::sin(self.argument(m, t, x))
            })
            .sum())
    }

    /// Adds the velocity at the points `(x[0][i], .., x[dim-1][i])` to `out`.
    /// Bit-identical to [`eval_velocity`](Self::eval_velocity) point by point.
    ///
    /// `x` and `out` hold one slice per axis; all slices have equal length.
    pub fn accumulate_velocity(&self, t: f64, x: &[&[f64]], out: &mut [&mut [f64]]) {
        assert!(
            x.len() == self.dim() && out.len() == self.dim(),
            "kernel dimension mismatch"
        );
        let n = out[0].len();
        assert!(x.iter().all(|s| s.len() >= n) && out.iter().all(|s| s.len() == n));
        kernel::accumulate(&self.soa, t, x, out);
    }
}

mod kernel {
    use super::ModeArrays;
    use crate::trig;

    #[inline(always)]
    fn accumulate_generic(modes: &ModeArrays, t: f64, x: &[&[f64]], out: &mut [&mut [f64]]) {
        let n = out[0].len();
        for m in 0..modes.omega.len() {
            let th = modes.omega[m] * t + modes.phase[m];
            let k = [modes.k[0][m], modes.k[1][m], modes.k[2][m]];
            let a = [modes.a[0][m], modes.a[1][m], modes.a[2][m]];
            match out {
                [o0] => {
                    let (x0, o0) = (&x[0][..n], &mut o0[..n]);
                    for i in 0..n {
                        let arg = (0.0 + k[0] * x0[i]) + th;
                        o0[i] += a[0] * trig::cos(arg);
                    }
                }
                [o0, o1] => {
                    let (x0, x1) = (&x[0][..n], &x[1][..n]);
                    let (o0, o1) = (&mut o0[..n], &mut o1[..n]);
                    for i in 0..n {
                        let arg = ((0.0 + k[0] * x0[i]) + k[1] * x1[i]) + th;
                        let c = trig::cos(arg);
                        o0[i] += a[0] * c;
                        o1[i] += a[1] * c;
                    }
                }
                [o0, o1, o2] => {
                    let (x0, x1, x2) = (&x[0][..n], &x[1][..n], &x[2][..n]);
                    let (o0, o1, o2) = (&mut o0[..n], &mut o1[..n], &mut o2[..n]);
                    for i in 0..n {
                        let arg = (((0.0 + k[0] * x0[i]) + k[1] * x1[i]) + k[2] * x2[i]) + th;
                        let c = trig::cos(arg);
                        o0[i] += a[0] * c;
                        o1[i] += a[1] * c;
                        o2[i] += a[2] * c;
                    }
                }
                _ => unreachable!("dimension checked by caller"),
            }
        }
    }

    #[cfg(target_arch = "x86_64")]
    #[target_feature(enable = "avx512f,avx512dq,avx512vl")]
    unsafe fn accumulate_avx512(modes: &ModeArrays, t: f64, x: &[&[f64]], out: &mut [&mut [f64]]) {
        accumulate_generic(modes, t, x, out)
    }

    #[cfg(target_arch = "x86_64")]
    #[target_feature(enable = "avx2")]
    unsafe fn accumulate_avx2(modes: &ModeArrays, t: f64, x: &[&[f64]], out: &mut [&mut [f64]]) {
        accumulate_generic(modes, t, x, out)
    }

    /// Dispatches on CPU features. No path uses FMA, so all paths agree bitwise.
    pub(super) fn accumulate(modes: &ModeArrays, t: f64, x: &[&[f64]], out: &mut [&mut [f64]]) {
        #[cfg(target_arch = "x86_64")]
        {
            if std::is_x86_feature_detected!("avx512f")
                && std::is_x86_feature_detected!("avx512dq")
                && std::is_x86_feature_detected!("avx512vl")
            {
                // SAFETY: the required features were detected at runtime.
                return unsafe { accumulate_avx512(modes, t, x, out) };
            }
            if std::is_x86_feature_detected!("avx2") {
                // SAFETY: as above.
                return unsafe { accumulate_avx2(modes, t, x, out) };
            }
        }
        accumulate_generic(modes, t, x, out)
    }
}

/// Draws one field realization.
///
/// Per mode, in this order: wavevector direction, amplitude magnitude
/// |N(0, 2 u0^2 / N)| (variance reading), amplitude direction (projected
/// orthogonal to the wavevector when `divergence_free` and dim >= 2), phase
/// U[0, 2pi), frequency N(0, (a_hunt |k| u0)^2).
pub fn sample_field(p: &SpectrumParams, rng: &mut RngStream) -> Result<SyntheticField> {
    let table = SpectrumTable::new(p)?;
    let n = p.n_modes;
    let amp_std = (2.0 * p.u0 * p.u0 / n as f64).sqrt();
    let mut modes = Vec::with_capacity(n);
    for idx in 1..=n {
        let k_mag = table.invert(idx)?;
        let k_dir = pad(&rng.uniform_unit_vector(p.dim)?);
        let wavevector = k_dir.map(|c| c * k_mag);
        let magnitude = rng.normal(0.0, amp_std)?.abs();
        let mut a_dir = pad(&rng.uniform_unit_vector(p.dim)?);
        if p.dim >= 2 && p.divergence_free {
            a_dir = orthogonal_direction(&a_dir, &k_dir);
        }
        let amplitude = a_dir.map(|c| c * magnitude);
        let phase = std::f64::consts::TAU * rng.uniform();
        let omega = rng.normal(0.0, p.a_hunt * k_mag * p.u0)?;
        modes.push(SpectralMode {
            amplitude,
            wavevector,
            omega,
            phase,
        });
    }
    Ok(SyntheticField::from_modes(p.clone(), modes))
}

/// Unit vector along the component of `v` orthogonal to the unit vector `k`.
/// Falls back to a fixed orthogonal direction if `v` is (nearly) parallel.
fn orthogonal_direction(v: &Vec3, k: &Vec3) -> Vec3 {
    let mut w = *v;
    let vk = dot(v, k);
    for ax in 0..3 {
        w[ax] -= vk * k[ax];
    }
    let mut nw = norm(&w);
    if nw < 1e-8 {
        // any vector not parallel to k; pick the axis least aligned with it
        let ax = (0..3)
            .min_by(|&i, &j| k[i].abs().total_cmp(&k[j].abs()))
            .unwrap();
        let mut e = [0.0; 3];
        e[ax] = 1.0;
        let ek = dot(&e, k);
        w = std::array::from_fn(|i| e[i] - ek * k[i]);
        nw = norm(&w);
    }
    // second pass removes the residual left by rounding
    let mut u = w.map(|c| c / nw);
    let uk = dot(&u, k);
    for ax in 0..3 {
        u[ax] -= uk * k[ax];
    }
    let nu = norm(&u);
    u.map(|c| c / nu)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(dim: usize) -> SpectrumParams {
        SpectrumParams {
            u0: 1.0,
            k0: 1.0,
            epsilon: 1.0,
            eta: 1e-6,
            a_hunt: 0.5,
            n_modes: 0,
            dim,
            divergence_free: dim >= 2,
        }
    }

    #[test]
    fn empty_field_is_zero() {
        let f = SyntheticField::from_modes(params(3), vec![]);
        assert_eq!(f.eval_velocity(1.3, &[0.1, 0.2, 0.3]), [0.0; 3]);
    }

    #[test]
    fn single_mode_node() {
        // k.x + phi = pi/2 at t = 0
        let mode = SpectralMode {
            amplitude: [0.0, 2.0, 0.0],
            wavevector: [1.0, 0.0, 0.0],
            omega: 0.0,
            phase: 0.0,
        };
        let f = SyntheticField::from_modes(params(2), vec![mode]);
        let u = f.eval_velocity(0.0, &[std::f64::consts::FRAC_PI_2, 5.0]);
        assert!(u.iter().all(|c| c.abs() < 1e-15));
    }

    #[test]
    fn divergence_of_parallel_mode() {
        let mode = SpectralMode {
            amplitude: [0.6, 0.8, 0.0],
            wavevector: [1.5, 2.0, 0.0],
            omega: 0.3,
            phase: 0.1,
        };
        let f = SyntheticField::from_modes(params(2), vec![mode]);
        let (t, x) = (0.7, [0.2, -0.4]);
        let arg: f64 = 0.3 * t + 0.1 + 1.5 * x[0] + 2.0 * x[1];
        let expected = -(1.0 * 2.5) * arg.sin();
        assert!((f.eval_divergence(t, &x).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn divergence_requires_two_dimensions() {
        let f = SyntheticField::from_modes(params(1), vec![]);
        assert!(matches!(
            f.eval_divergence(0.0, &[0.0]),
            Err(Error::UnsupportedDimension { dim: 1 })
        ));
    }

    #[test]
    fn one_mode_one_dimension() {
        let mut p = params(1);
        p.n_modes = 1;
        let mut rng = RngStream::new(3, 0);
        let f = sample_field(&p, &mut rng).unwrap();
        assert_eq!(f.modes().len(), 1);
        let m = &f.modes()[0];
        assert_eq!(m.amplitude[1], 0.0);
        assert_eq!(m.wavevector[2], 0.0);
        assert!(m.wavevector[0].abs() > 0.0);
    }

    #[test]
    fn projected_amplitudes_are_orthogonal() {
        let mut p = params(3);
        p.n_modes = 64;
        let mut rng = RngStream::new(9, 1);
        let f = sample_field(&p, &mut rng).unwrap();
        for m in f.modes() {
            let rel = dot(&m.amplitude, &m.wavevector).abs()
                / (norm(&m.amplitude) * norm(&m.wavevector)).max(f64::MIN_POSITIVE);
            assert!(rel < 1e-12, "a.k relative {rel:e}");
            assert!((0.0..std::f64::consts::TAU).contains(&m.phase));
        }
    }

    #[test]
    fn batch_kernel_matches_pointwise() {
        let mut p = params(3);
        p.n_modes = 20;
        let mut rng = RngStream::new(1, 2);
        let f = sample_field(&p, &mut rng).unwrap();
        let n = 37;
        let xs: [Vec<f64>; 3] =
            std::array::from_fn(|ax| (0..n).map(|i| (i as f64) * 0.37 - ax as f64).collect());
        let mut out: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; n]);
        {
            let [o0, o1, o2] = &mut out;
            f.accumulate_velocity(2.5, &[&xs[0], &xs[1], &xs[2]], &mut [o0, o1, o2]);
        }
        for i in 0..n {
            let u = f.eval_velocity(2.5, &[xs[0][i], xs[1][i], xs[2][i]]);
            for ax in 0..3 {
                assert_eq!(u[ax].to_bits(), out[ax][i].to_bits());
            }
        }
    }

    #[test]
    fn orthogonal_fallback_for_parallel_vectors() {
        let k = [0.0, 0.0, 1.0];
        let u = orthogonal_direction(&[0.0, 0.0, -1.0], &k);
        assert!(dot(&u, &k).abs() < 1e-15);
        assert!((norm(&u) - 1.0).abs() < 1e-15);
    }
}
