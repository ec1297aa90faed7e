use nalgebra::{DMatrix, DVector};

use super::spec::{ExternalFieldSpec, KernelSpec};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Gaussian law on phase space z = (x, c) in R^{2d}.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianLaw {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

const PSD_TOL: f64 = 1e-12;

impl GaussianLaw {
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let n = mean.len();
        if n == 0 || !n.is_multiple_of(2) || n > 6 {
            return Err(Error::InvalidInput(format!(
                "phase-space dimension must be 2, 4 or 6, got {n}"
            )));
        }
        if covariance.nrows() != n || covariance.ncols() != n {
            return Err(Error::InvalidInput("covariance shape mismatch".into()));
        }
        let scale = covariance.amax().max(1.0);
        if (&covariance - covariance.transpose()).amax() > PSD_TOL * scale {
            return Err(Error::InvalidInput("covariance is not symmetric".into()));
        }
        let law = Self { mean, covariance };
        if law.min_eigenvalue() < -PSD_TOL * scale {
            return Err(Error::InvalidInput(
                "covariance is not positive semidefinite".into(),
            ));
        }
        Ok(law)
    }

    /// Independent components: x ~ N(mx, sx^2), c ~ N(mc, sc^2) on each axis.
    pub fn isotropic(dim: usize, mx: f64, sx: f64, mc: f64, sc: f64) -> Result<Self> {
        let n = 2 * dim;
        let mean = DVector::from_fn(n, |i, _| if i < dim { mx } else { mc });
        let cov = DMatrix::from_fn(n, n, |i, j| match (i == j, i < dim) {
            (true, true) => sx * sx,
            (true, false) => sc * sc,
            _ => 0.0,
        });
        Self::new(mean, cov)
    }

    /// Number of spatial dimensions d.
    pub fn dim(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.covariance
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// Mean velocity (last d components of the mean).
    pub fn mean_velocity(&self) -> &[f64] {
        &self.mean.as_slice()[self.dim()..]
    }

    pub fn mean_position(&self) -> &[f64] {
        &self.mean.as_slice()[..self.dim()]
    }

    /// Square-root factor S with S S^T = covariance (clipped eigen-decomposition).
    pub fn sqrt_factor(&self) -> DMatrix<f64> {
        let e = self.covariance.clone().symmetric_eigen();
        let mut v = e.eigenvectors;
        for (j, lam) in e.eigenvalues.iter().enumerate() {
            let s = lam.max(0.0).sqrt();
            for i in 0..v.nrows() {
                v[(i, j)] *= s;
            }
        }
        v
    }

    /// `n` independent draws, returned as rows of length 2d (flattened).
    pub fn sample(&self, n: usize, rng: &mut RngStream) -> Vec<f64> {
        let m = self.mean.len();
        let s = self.sqrt_factor();
        let mut out = vec![0.0; n * m];
        let mut xi = vec![0.0; m];
        for row in out.chunks_mut(m) {
            for v in xi.iter_mut() {
                *v = rng.standard_normal();
            }
            for i in 0..m {
                let mut acc = self.mean[i];
                for j in 0..m {
                    acc += s[(i, j)] * xi[j];
                }
                row[i] = acc;
            }
        }
        out
    }

    /// Mean-field force F * f at phase-space point z, for one axis.
    #[inline]
    pub fn convolve(&self, kernel: &KernelSpec, z: &[f64], axis: usize) -> f64 {
        let d = self.dim();
        kernel.eval(z[axis] - self.mean[axis], z[d + axis] - self.mean[d + axis])
    }
}

/// (A_m, b, A, Q) of the mean and covariance ODEs.
type MomentSystem = (DMatrix<f64>, DVector<f64>, DMatrix<f64>, DMatrix<f64>);

/// Drift matrices of the moment equations: m' = A_m m + b and
/// P' = A P + P A^T + Q.
fn moment_system(
    dim: usize,
    kernel: &KernelSpec,
    field: &ExternalFieldSpec,
    sigma: f64,
) -> Result<MomentSystem> {
    let (g, b_g) = field.affine(dim).ok_or_else(|| {
        Error::UnsupportedConfiguration(
            "closed-form law evolution needs an affine external field".into(),
        )
    })?;
    let n = 2 * dim;
    let mut a_mean = DMatrix::zeros(n, n);
    let mut a_dev = DMatrix::zeros(n, n);
    let mut b = DVector::zeros(n);
    let mut q = DMatrix::zeros(n, n);
    for (ax, &bg) in b_g.iter().enumerate().take(dim) {
        let (ix, ic) = (ax, dim + ax);
        a_mean[(ix, ic)] = 1.0;
        a_mean[(ic, ic)] = -g;
        a_dev[(ix, ic)] = 1.0;
        a_dev[(ic, ix)] = -kernel.alpha;
        a_dev[(ic, ic)] = -g - kernel.lambda;
        b[ic] = bg;
        q[(ic, ic)] = 2.0 * sigma * sigma;
    }
    Ok((a_mean, b, a_dev, q))
}

/// Advances the Gaussian limit law by `dt` with one RK4 step of its moment
/// equations. Only affine fields are supported.
pub fn evolve_gaussian_law(
    law: &GaussianLaw,
    field: &ExternalFieldSpec,
    kernel: &KernelSpec,
    sigma: f64,
    dt: f64,
) -> Result<GaussianLaw> {
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", "must be > 0"));
    }
    let (a_mean, b, a_dev, q) = moment_system(law.dim(), kernel, field, sigma)?;
    let fm = |m: &DVector<f64>| &a_mean * m + &b;
    let fp = |p: &DMatrix<f64>| {
        let ap = &a_dev * p;
        &ap + ap.transpose() + &q
    };
    let (m, p) = (&law.mean, &law.covariance);
    let k1m = fm(m);
    let k1p = fp(p);
    let k2m = fm(&(m + &k1m * (0.5 * dt)));
    let k2p = fp(&(p + &k1p * (0.5 * dt)));
    let k3m = fm(&(m + &k2m * (0.5 * dt)));
    let k3p = fp(&(p + &k2p * (0.5 * dt)));
    let k4m = fm(&(m + &k3m * dt));
    let k4p = fp(&(p + &k3p * dt));
    let mean = m + (k1m + k2m * 2.0 + k3m * 2.0 + k4m) * (dt / 6.0);
    let mut cov = p + (k1p + k2p * 2.0 + k3p * 2.0 + k4p) * (dt / 6.0);
    // keep exact symmetry against rounding drift
    cov = (&cov + cov.transpose()) * 0.5;
    Ok(GaussianLaw {
        mean,
        covariance: cov,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_stays_put_without_noise() {
        let law = GaussianLaw::isotropic(1, 0.3, 0.0, 0.0, 0.0).unwrap();
        let mut l = law.clone();
        for _ in 0..100 {
            l = evolve_gaussian_law(&l, &ExternalFieldSpec::None, &KernelSpec::alignment(1.0), 0.0, 0.01)
                .unwrap();
        }
        assert_eq!(l, law);
    }

    #[test]
    fn ou_stationary_variance() {
        let tau = 0.5;
        let sigma = 0.7;
        let field = ExternalFieldSpec::UniformDragTo {
            u: vec![0.0],
            tau,
        };
        let mut l = GaussianLaw::isotropic(1, 0.0, 1.0, 2.0, 0.1).unwrap();
        for _ in 0..5000 {
            l = evolve_gaussian_law(&l, &field, &KernelSpec::alignment(0.0), sigma, 0.01).unwrap();
        }
        assert!((l.covariance[(1, 1)] - sigma * sigma * tau).abs() < 1e-10);
        assert!(l.mean[1].abs() < 1e-10);
    }

    #[test]
    fn alignment_keeps_mean_velocity() {
        let mut l = GaussianLaw::isotropic(2, 0.0, 1.0, 0.4, 1.0).unwrap();
        for _ in 0..200 {
            l = evolve_gaussian_law(&l, &ExternalFieldSpec::None, &KernelSpec::alignment(2.0), 0.5, 0.01)
                .unwrap();
        }
        assert_eq!(l.mean_velocity(), &[0.4, 0.4]);
        assert!(l.min_eigenvalue() > 0.0);
    }

    #[test]
    fn unsupported_field_is_reported() {
        let f = crate::turbulence::SyntheticField::from_modes(
            crate::turbulence::SpectrumParams {
                u0: 1.0,
                k0: 1.0,
                epsilon: 1.0,
                eta: 0.01,
                a_hunt: 0.5,
                n_modes: 0,
                dim: 1,
                divergence_free: false,
            },
            vec![],
        );
        let g = ExternalFieldSpec::SyntheticFieldDrag {
            field: std::sync::Arc::new(f),
            tau_p: 1.0,
        };
        let l = GaussianLaw::isotropic(1, 0.0, 1.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            evolve_gaussian_law(&l, &g, &KernelSpec::alignment(1.0), 0.1, 0.01),
            Err(Error::UnsupportedConfiguration(_))
        ));
    }

    #[test]
    fn rejects_invalid_covariance() {
        let m = DVector::zeros(2);
        assert!(GaussianLaw::new(m.clone(), DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0])).is_err());
        assert!(GaussianLaw::new(m, DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])).is_err());
    }

    #[test]
    fn convolution_matches_monte_carlo() {
        let kernel = KernelSpec {
            alpha: 0.5,
            lambda: 1.0,
        };
        let law = GaussianLaw::new(
            DVector::from_vec(vec![0.3, -0.2]),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 0.5]),
        )
        .unwrap();
        let z = [1.1, 0.7];
        let samples = law.sample(1_000_000, &mut RngStream::new(3, 0));
        let mc = samples
            .chunks(2)
            .map(|s| kernel.eval(z[0] - s[0], z[1] - s[1]))
            .sum::<f64>()
            / 1e6;
        let exact = law.convolve(&kernel, &z, 0);
        // sd of the estimate: sqrt(0.25 + 0.3 + 0.5) / 1000 ~ 1e-3
        assert!((mc - exact).abs() < 5e-3, "{mc} vs {exact}");
    }
}
