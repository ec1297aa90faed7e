use std::sync::Arc;

use crate::error::{Error, Result};
use crate::turbulence::SyntheticField;

/// Pairwise interaction F(x, c) = -alpha x - lambda c, acting on the
/// difference z_i - z_j. Odd by construction, so F(0) = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    /// Position coupling (1/s^2).
    pub alpha: f64,
    /// Velocity alignment strength (1/s).
    pub lambda: f64,
}

impl KernelSpec {
    /// Pure velocity alignment F(x, c) = -lambda c.
    pub fn alignment(lambda: f64) -> Self {
        Self { alpha: 0.0, lambda }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || !self.lambda.is_finite() {
            return Err(Error::invalid("kernel", "coefficients must be finite"));
        }
        Ok(())
    }

    /// F(x, c) for one spatial component.
    #[inline]
    pub fn eval(&self, x: f64, c: f64) -> f64 {
        -self.alpha * x - self.lambda * c
    }

    pub fn is_zero(&self) -> bool {
        self.alpha == 0.0 && self.lambda == 0.0
    }

    pub fn lipschitz(&self) -> f64 {
        self.alpha.abs().max(self.lambda.abs())
    }
}

/// External acceleration G(t, x, c).
#[derive(Debug, Clone)]
pub enum ExternalFieldSpec {
    None,
    /// G = (u - c) / tau.
    UniformDragTo { u: Vec<f64>, tau: f64 },
    /// G = (u_f(t, x) - c) / tau_p with a synthetic field u_f.
    SyntheticFieldDrag {
        field: Arc<SyntheticField>,
        tau_p: f64,
    },
}

impl ExternalFieldSpec {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Self::None => Ok(()),
            Self::UniformDragTo { u, tau } => {
                if !(*tau > 0.0) {
                    return Err(Error::invalid("tau", "must be > 0"));
                }
                if u.len() != dim {
                    return Err(Error::InvalidInput(format!(
                        "drag target has {} components, expected {dim}",
                        u.len()
                    )));
                }
                Ok(())
            }
            Self::SyntheticFieldDrag { field, tau_p } => {
                if !(*tau_p > 0.0) {
                    return Err(Error::invalid("tau_p", "must be > 0"));
                }
                if field.dim() != dim {
                    return Err(Error::InvalidInput(format!(
                        "field dimension {} differs from {dim}",
                        field.dim()
                    )));
                }
                Ok(())
            }
        }
    }

    /// Writes G(t, x, c) into `out`.
    pub fn eval(&self, t: f64, x: &[f64], c: &[f64], out: &mut [f64]) {
        match self {
            Self::None => out.fill(0.0),
            Self::UniformDragTo { u, tau } => {
                for a in 0..out.len() {
                    out[a] = (u[a] - c[a]) / tau;
                }
            }
            Self::SyntheticFieldDrag { field, tau_p } => {
                let uf = field.eval_velocity(t, x);
                for a in 0..out.len() {
                    out[a] = (uf[a] - c[a]) / tau_p;
                }
            }
        }
    }

    /// Writes G for one particle stored as z = (x, c).
    #[inline]
    pub(crate) fn eval_z(&self, t: f64, z: &[f64], out: &mut [f64]) {
        let d = out.len();
        self.eval(t, &z[..d], &z[d..], out)
    }

    /// (g, b) with G = -g c + b when G is affine and autonomous.
    pub fn affine(&self, dim: usize) -> Option<(f64, Vec<f64>)> {
        match self {
            Self::None => Some((0.0, vec![0.0; dim])),
            Self::UniformDragTo { u, tau } => Some((1.0 / tau, u.iter().map(|v| v / tau).collect())),
            Self::SyntheticFieldDrag { .. } => None,
        }
    }

    /// A Lipschitz constant of G in (x, c).
    pub fn lipschitz(&self) -> f64 {
        match self {
            Self::None => 0.0,
            Self::UniformDragTo { tau, .. } => 1.0 / tau,
            Self::SyntheticFieldDrag { field, tau_p } => {
                let grad: f64 = field
                    .modes()
                    .iter()
                    .map(|m| {
                        let a = m.amplitude.iter().map(|v| v * v).sum::<f64>().sqrt();
                        let k = m.wavevector.iter().map(|v| v * v).sum::<f64>().sqrt();
                        a * k
                    })
                    .sum();
                grad.max(1.0) / tau_p
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn kernel_is_odd() {
        let k = KernelSpec {
            alpha: 0.3,
            lambda: 1.7,
        };
        let mut r = RngStream::new(1, 0);
        for _ in 0..10_000 {
            let (x, c) = (r.uniform_range(-5.0, 5.0), r.uniform_range(-5.0, 5.0));
            assert!((k.eval(x, c) + k.eval(-x, -c)).abs() <= 1e-12);
        }
        assert_eq!(k.eval(0.0, 0.0), 0.0);
    }

    #[test]
    fn drag_field() {
        let g = ExternalFieldSpec::UniformDragTo {
            u: vec![1.0],
            tau: 0.5,
        };
        let mut out = [0.0];
        g.eval(0.0, &[3.0], &[0.0], &mut out);
        assert_eq!(out[0], 2.0);
        assert_eq!(g.affine(1), Some((2.0, vec![2.0])));
        assert!(g.validate(2).is_err());
    }
}
