//! Small statistics toolkit: sample variances, rank correlation and
//! log-log regression with bootstrap slope errors.

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Number of bootstrap resamples behind every slope standard error.
pub const BOOTSTRAP_RESAMPLES: usize = 500;
const BOOTSTRAP_SEED: u64 = 0x5eed_b007;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Bootstrap standard error of the slope (NaN when not computed).
    pub slope_stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxisVariance {
    pub per_axis: Vec<f64>,
    pub total: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (n - 1 denominator), two-pass.
pub fn sample_variance(xs: &[f64]) -> Result<f64> {
    if xs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "variance needs at least 2 samples, got {}",
            xs.len()
        )));
    }
    let m = mean(xs);
    Ok(xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64)
}

/// Per-axis unbiased variances of a point cloud given as one slice per axis.
pub fn variance(axes: &[&[f64]]) -> Result<AxisVariance> {
    let per_axis = axes
        .iter()
        .map(|a| sample_variance(a))
        .collect::<Result<Vec<_>>>()?;
    let total = per_axis.iter().sum();
    Ok(AxisVariance { per_axis, total })
}

/// Ordinary least squares y = intercept + slope x.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<RegressionResult> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData("regression needs >= 2 points".into()));
    }
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all abscissae are equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(RegressionResult {
        slope,
        intercept,
        r_squared,
        slope_stderr: f64::NAN,
    })
}

/// Least squares on (ln x, ln y) with a pairs-bootstrap slope error drawn from
/// a fixed stream, so repeated calls agree exactly.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> Result<RegressionResult> {
    loglog_fit_with(x, y, &mut RngStream::new(BOOTSTRAP_SEED, 0))
}

pub fn loglog_fit_with(x: &[f64], y: &[f64], rng: &mut RngStream) -> Result<RegressionResult> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "log-log fit needs >= 3 points, got {}",
            x.len()
        )));
    }
    if let Some(v) = x.iter().chain(y).find(|v| !(**v > 0.0)) {
        return Err(Error::Domain(format!("log-log fit needs positive data, got {v}")));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mut fit = linear_fit(&lx, &ly)?;
    fit.slope_stderr = bootstrap_slope_stderr(&lx, &ly, rng);
    Ok(fit)
}

fn bootstrap_slope_stderr(x: &[f64], y: &[f64], rng: &mut RngStream) -> f64 {
    let n = x.len();
    let mut slopes = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut bx = vec![0.0; n];
    let mut by = vec![0.0; n];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        for j in 0..n {
            let i = ((rng.uniform() * n as f64) as usize).min(n - 1);
            bx[j] = x[i];
            by[j] = y[i];
        }
        // resamples with a single distinct abscissa carry no slope information
        if let Ok(f) = linear_fit(&bx, &by) {
            slopes.push(f.slope);
        }
    }
    sample_variance(&slopes).map(f64::sqrt).unwrap_or(f64::NAN)
}

/// Midranks (1-based), ties share the average of their positions.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let mx = mean(x);
    let my = mean(y);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::InsufficientData(
            "correlation undefined for constant input".into(),
        ));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation (Pearson correlation of midranks).
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "spearman needs >= 3 points, got {}",
            x.len()
        )));
    }
    pearson(&ranks(x), &ranks(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn variance_cases() {
        assert_eq!(sample_variance(&[3.0; 5]).unwrap(), 0.0);
        assert_eq!(sample_variance(&[0.0, 2.0]).unwrap(), 2.0);
        assert!(sample_variance(&[1.0]).is_err());
        let v = variance(&[&[0.0, 2.0], &[1.0, 1.0]]).unwrap();
        assert_eq!(v.per_axis, vec![2.0, 0.0]);
        assert_eq!(v.total, 2.0);
    }

    #[test]
    fn variance_of_standard_normals() {
        let mut s = RngStream::new(8, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| s.standard_normal()).collect();
        let v = sample_variance(&xs).unwrap();
        // chi-square 99.9% interval half-width ~ 3.3 * sqrt(2/n) = 0.015
        assert!((0.985..=1.015).contains(&v), "{v}");
    }

    #[test]
    fn exact_power_law() {
        let x: Vec<f64> = (1..=8).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 / v).collect();
        let f = loglog_fit(&x, &y).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(f.slope_stderr < 1e-10);
    }

    #[test]
    fn constant_series_has_zero_slope() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let f = loglog_fit(&x, &[5.0; 4]).unwrap();
        assert!(f.slope.abs() < 1e-15);
    }

    #[test]
    fn noisy_power_law() {
        let mut s = RngStream::new(21, 0);
        let x: Vec<f64> = (0..8).map(|i| 2f64.powi(i)).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|v| (1.0 + 0.05 * s.standard_normal()) / v)
            .collect();
        let f = loglog_fit(&x, &y).unwrap();
        assert!((-1.2..=-0.8).contains(&f.slope), "{f:?}");
        // noise of 5% in ln y over ln x spanning 4.85 gives sd(slope) ~ 0.05/sqrt(sxx) ~ 0.01
        assert!(f.slope_stderr > 1e-3 && f.slope_stderr < 0.05, "{f:?}");
    }

    #[test]
    fn loglog_rejects_nonpositive() {
        assert!(matches!(
            loglog_fit(&[1.0, 2.0, 0.0], &[1.0, 1.0, 1.0]),
            Err(Error::Domain(_))
        ));
        assert!(loglog_fit(&[1.0, 2.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn spearman_cases() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert!((spearman(&x, &[2.0, 3.0, 10.0, 11.0, 50.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((spearman(&x, &[5.0, 4.0, 3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        // y ranks with ties: [1, 2.5, 2.5, 4, 5]; by hand r = 9.5 / sqrt(10 * 9.5)
        let r = spearman(&x, &[1.0, 2.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((r - 9.5 / (10.0f64 * 9.5).sqrt()).abs() < 1e-15, "{r}");
        assert!(spearman(&x, &[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn loglog_scale_equivariant(c in 0.01f64..100.0, p in -3.0f64..3.0, noise in proptest::collection::vec(-0.2f64..0.2, 5)) {
            let x: Vec<f64> = (1..=5).map(|i| i as f64 * 1.7).collect();
            let y: Vec<f64> = x.iter().zip(&noise).map(|(v, e)| v.powf(p) * e.exp()).collect();
            let yc: Vec<f64> = y.iter().map(|v| v * c).collect();
            let a = loglog_fit(&x, &y).unwrap();
            let b = loglog_fit(&x, &yc).unwrap();
            prop_assert!((a.slope - b.slope).abs() < 1e-12);
            prop_assert!((b.intercept - a.intercept - c.ln()).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&a.r_squared));
        }

        #[test]
        fn spearman_monotone_invariant(v in proptest::collection::vec(-10.0f64..10.0, 3..40)) {
            let x: Vec<f64> = (0..v.len()).map(|i| i as f64).collect();
            if let Ok(r) = spearman(&x, &v) {
                let w: Vec<f64> = v.iter().map(|a| a.exp() * 3.0 + 1.0).collect();
                let r2 = spearman(&x, &w).unwrap();
                prop_assert!((r - r2).abs() < 1e-12);
                prop_assert!((-1.0..=1.0).contains(&r));
            }
        }
    }
}
