use super::law::GaussianLaw;
use super::spec::{ExternalFieldSpec, KernelSpec};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Interacting particles z_i and their fictive mean-field twins, advanced in
/// lockstep with shared Brownian increments.
///
/// States are stored particle-major: particle `i` occupies
/// `z[i * 2d .. (i + 1) * 2d]` as (x_1..x_d, c_1..c_d).
#[derive(Debug, Clone)]
pub struct MeanFieldSystem {
    dim: usize,
    interacting: Vec<f64>,
    fictive: Vec<f64>,
    sigma: f64,
    kernel: KernelSpec,
    field: ExternalFieldSpec,
    /// Standard normals of the last interacting step, awaiting the fictive step.
    pending_noise: Option<Vec<f64>>,
}

impl MeanFieldSystem {
    /// Both systems start from `initial` (flattened rows of length 2d).
    pub fn new(
        dim: usize,
        initial: Vec<f64>,
        sigma: f64,
        kernel: KernelSpec,
        field: ExternalFieldSpec,
    ) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension { dim });
        }
        if initial.is_empty() || !initial.len().is_multiple_of(2 * dim) {
            return Err(Error::InvalidInput(format!(
                "initial state length {} is not a positive multiple of {}",
                initial.len(),
                2 * dim
            )));
        }
        if !(sigma >= 0.0) {
            return Err(Error::invalid("sigma", "must be >= 0"));
        }
        kernel.validate()?;
        field.validate(dim)?;
        Ok(Self {
            dim,
            fictive: initial.clone(),
            interacting: initial,
            sigma,
            kernel,
            field,
            pending_noise: None,
        })
    }

    pub fn count(&self) -> usize {
        self.interacting.len() / (2 * self.dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn interacting(&self) -> &[f64] {
        &self.interacting
    }

    pub fn fictive(&self) -> &[f64] {
        &self.fictive
    }

    /// |z_i - zbar_i|^2 for particle `i`.
    pub fn coupling_dist_sq(&self, i: usize) -> f64 {
        let w = 2 * self.dim;
        self.interacting[i * w..(i + 1) * w]
            .iter()
            .zip(&self.fictive[i * w..(i + 1) * w])
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// Euler-Maruyama step of the interacting system with fresh noise from
    /// `rng`. The noise is kept for the matching fictive step.
    pub fn em_step_interacting(&mut self, t: f64, dt: f64, rng: &mut RngStream) -> Result<()> {
        let xi: Vec<f64> = (0..self.count() * self.dim)
            .map(|_| rng.standard_normal())
            .collect();
        self.em_step_interacting_with_noise(t, dt, xi)
    }

    /// As [`em_step_interacting`](Self::em_step_interacting) with given
    /// standard normals, `xi[i * d + a]` for particle `i`, axis `a`.
    pub fn em_step_interacting_with_noise(&mut self, t: f64, dt: f64, xi: Vec<f64>) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::invalid("dt", "must be > 0"));
        }
        if xi.len() != self.count() * self.dim {
            return Err(Error::InvalidInput("noise length mismatch".into()));
        }
        if self.pending_noise.is_some() {
            return Err(Error::CouplingOrder);
        }
        let d = self.dim;
        let w = 2 * d;
        let n = self.count();
        // (1/N) sum_j F(z_i - z_j) = F(z_i - mean) for the linear kernel
        let mut mean = vec![0.0; w];
        for z in self.interacting.chunks(w) {
            for (m, v) in mean.iter_mut().zip(z) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= n as f64;
        }
        let amp = (2.0 * dt).sqrt() * self.sigma;
        let mut g = vec![0.0; d];
        for (i, z) in self.interacting.chunks_mut(w).enumerate() {
            self.field.eval_z(t, z, &mut g);
            for a in 0..d {
                let f = self.kernel.eval(z[a] - mean[a], z[d + a] - mean[d + a]);
                let c = z[d + a];
                z[a] += c * dt;
                z[d + a] = c + (g[a] + f) * dt + amp * xi[i * d + a];
            }
        }
        self.pending_noise = Some(xi);
        Ok(())
    }

    /// Euler-Maruyama step of the fictive system in the field of `law`
    /// (the limit law at time `t`), reusing the noise of the last
    /// interacting step.
    pub fn em_step_fictive(&mut self, law: &GaussianLaw, t: f64, dt: f64) -> Result<()> {
        let xi = self.pending_noise.take().ok_or(Error::CouplingOrder)?;
        if law.dim() != self.dim {
            return Err(Error::InvalidInput("law dimension mismatch".into()));
        }
        let d = self.dim;
        let amp = (2.0 * dt).sqrt() * self.sigma;
        let mut g = vec![0.0; d];
        for (i, z) in self.fictive.chunks_mut(2 * d).enumerate() {
            self.field.eval_z(t, z, &mut g);
            for a in 0..d {
                let f = law.convolve(&self.kernel, z, a);
                let c = z[d + a];
                z[a] += c * dt;
                z[d + a] = c + (g[a] + f) * dt + amp * xi[i * d + a];
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meanfield::evolve_gaussian_law;

    fn init(n: usize, dim: usize, seed: u64) -> Vec<f64> {
        GaussianLaw::isotropic(dim, 0.0, 1.0, 0.0, 1.0)
            .unwrap()
            .sample(n, &mut RngStream::new(seed, 0))
    }

    #[test]
    fn free_streaming() {
        let z0 = init(10, 2, 1);
        let mut s =
            MeanFieldSystem::new(2, z0.clone(), 0.0, KernelSpec::alignment(0.0), ExternalFieldSpec::None)
                .unwrap();
        let mut rng = RngStream::new(0, 0);
        let dt = 0.125;
        for k in 0..8 {
            s.em_step_interacting(k as f64 * dt, dt, &mut rng).unwrap();
            s.em_step_fictive(&GaussianLaw::isotropic(2, 0.0, 1.0, 0.0, 1.0).unwrap(), 0.0, dt)
                .unwrap();
        }
        for (z, z0) in s.interacting().chunks(4).zip(z0.chunks(4)) {
            for a in 0..2 {
                assert!((z[a] - (z0[a] + z0[2 + a] * 1.0)).abs() < 1e-14);
                assert_eq!(z[2 + a], z0[2 + a]);
            }
        }
    }

    #[test]
    fn single_particle_feels_no_interaction() {
        let z0 = vec![0.5, -1.0];
        let mut a = MeanFieldSystem::new(1, z0.clone(), 0.3, KernelSpec::alignment(5.0), ExternalFieldSpec::None)
            .unwrap();
        let mut b =
            MeanFieldSystem::new(1, z0, 0.3, KernelSpec::alignment(0.0), ExternalFieldSpec::None).unwrap();
        let (mut ra, mut rb) = (RngStream::new(2, 0), RngStream::new(2, 0));
        for k in 0..100 {
            a.em_step_interacting(k as f64 * 0.01, 0.01, &mut ra).unwrap();
            b.em_step_interacting(k as f64 * 0.01, 0.01, &mut rb).unwrap();
            a.pending_noise = None;
            b.pending_noise = None;
        }
        assert_eq!(a.interacting(), b.interacting());
    }

    #[test]
    fn alignment_conserves_mean_velocity() {
        let z0 = init(64, 1, 3);
        let m0: f64 = z0.chunks(2).map(|z| z[1]).sum::<f64>() / 64.0;
        let mut s =
            MeanFieldSystem::new(1, z0, 0.0, KernelSpec::alignment(2.0), ExternalFieldSpec::None).unwrap();
        let mut rng = RngStream::new(0, 0);
        for k in 0..500 {
            s.em_step_interacting(k as f64 * 0.01, 0.01, &mut rng).unwrap();
            s.pending_noise = None;
        }
        let m: f64 = s.interacting().chunks(2).map(|z| z[1]).sum::<f64>() / 64.0;
        assert!((m - m0).abs() < 1e-13);
    }

    #[test]
    fn coupling_order_is_enforced() {
        let mut s = MeanFieldSystem::new(1, vec![0.0, 0.0], 1.0, KernelSpec::alignment(1.0), ExternalFieldSpec::None)
            .unwrap();
        let law = GaussianLaw::isotropic(1, 0.0, 0.0, 0.0, 0.0).unwrap();
        assert!(matches!(s.em_step_fictive(&law, 0.0, 0.1), Err(Error::CouplingOrder)));
        let mut rng = RngStream::new(0, 0);
        s.em_step_interacting(0.0, 0.1, &mut rng).unwrap();
        assert!(matches!(s.em_step_interacting(0.1, 0.1, &mut rng), Err(Error::CouplingOrder)));
        s.em_step_fictive(&law, 0.0, 0.1).unwrap();
    }

    #[test]
    fn dirac_law_convolution() {
        let law = GaussianLaw::isotropic(1, 0.4, 0.0, -0.3, 0.0).unwrap();
        let k = KernelSpec::alignment(1.5);
        assert_eq!(law.convolve(&k, &[2.0, 0.7], 0), -1.5 * (0.7 + 0.3));
    }

    #[test]
    fn decoupled_systems_coincide_bitwise() {
        let law0 = GaussianLaw::isotropic(1, 0.0, 1.0, 0.0, 1.0).unwrap();
        let field = ExternalFieldSpec::UniformDragTo {
            u: vec![0.2],
            tau: 1.0,
        };
        let k = KernelSpec::alignment(0.0);
        let mut s = MeanFieldSystem::new(1, init(32, 1, 5), 0.5, k, field.clone()).unwrap();
        let mut law = law0;
        let mut rng = RngStream::new(9, 0);
        for step in 0..200 {
            let t = step as f64 * 0.01;
            s.em_step_interacting(t, 0.01, &mut rng).unwrap();
            s.em_step_fictive(&law, t, 0.01).unwrap();
            law = evolve_gaussian_law(&law, &field, &k, 0.5, 0.01).unwrap();
            assert_eq!(s.interacting(), s.fictive());
        }
    }

    #[test]
    fn exchangeable_under_index_permutation() {
        let n = 16;
        let z0 = init(n, 1, 6);
        let noise: Vec<Vec<f64>> = {
            let mut r = RngStream::new(7, 0);
            (0..50).map(|_| (0..n).map(|_| r.standard_normal()).collect()).collect()
        };
        let perm: Vec<usize> = (0..n).rev().collect();
        let permute = |v: &[f64], w: usize| -> Vec<f64> {
            perm.iter().flat_map(|&p| v[p * w..(p + 1) * w].to_vec()).collect()
        };
        let k = KernelSpec::alignment(1.0);
        let law = GaussianLaw::isotropic(1, 0.0, 1.0, 0.0, 1.0).unwrap();
        let mut a = MeanFieldSystem::new(1, z0.clone(), 0.5, k, ExternalFieldSpec::None).unwrap();
        let mut b = MeanFieldSystem::new(1, permute(&z0, 2), 0.5, k, ExternalFieldSpec::None).unwrap();
        for (step, xi) in noise.iter().enumerate() {
            let t = step as f64 * 0.01;
            a.em_step_interacting_with_noise(t, 0.01, xi.clone()).unwrap();
            b.em_step_interacting_with_noise(t, 0.01, permute(xi, 1)).unwrap();
            a.em_step_fictive(&law, t, 0.01).unwrap();
            b.em_step_fictive(&law, t, 0.01).unwrap();
        }
        let pa = permute(a.interacting(), 2);
        for (x, y) in pa.iter().zip(b.interacting()) {
            assert!((x - y).abs() < 1e-12);
        }
        assert_eq!(permute(a.fictive(), 2), b.fictive());
    }

    #[test]
    fn fictive_ensemble_tracks_gaussian_law() {
        let n = 100_000;
        let (sigma, dt) = (0.5, 1e-3);
        let k = KernelSpec::alignment(1.0);
        let field = ExternalFieldSpec::UniformDragTo {
            u: vec![0.5],
            tau: 2.0,
        };
        let mut law = GaussianLaw::isotropic(1, 0.0, 1.0, 0.0, 1.0).unwrap();
        let mut s = MeanFieldSystem::new(1, law.sample(n, &mut RngStream::new(1, 0)), sigma, k, field.clone())
            .unwrap();
        let mut rng = RngStream::new(1, 1);
        for step in 0..500 {
            let t = step as f64 * dt;
            s.em_step_interacting(t, dt, &mut rng).unwrap();
            s.em_step_fictive(&law, t, dt).unwrap();
            law = evolve_gaussian_law(&law, &field, &k, sigma, dt).unwrap();
            if (step + 1) % 100 == 0 {
                let z = s.fictive();
                for comp in 0..2 {
                    let xs: Vec<f64> = z.chunks(2).map(|r| r[comp]).collect();
                    let m = crate::stats::mean(&xs);
                    let v = crate::stats::sample_variance(&xs).unwrap();
                    let lv = law.covariance[(comp, comp)];
                    // standard errors of the sample mean and variance
                    let se_m = (lv / n as f64).sqrt();
                    let se_v = lv * (2.0 / n as f64).sqrt();
                    assert!((m - law.mean[comp]).abs() < 5.0 * se_m, "step {step} comp {comp} mean");
                    // Euler-Maruyama bias O(dt) is below 5 se here
                    assert!((v - lv).abs() < 5.0 * se_v, "step {step} comp {comp} var {v} vs {lv}");
                }
            }
        }
    }
}
