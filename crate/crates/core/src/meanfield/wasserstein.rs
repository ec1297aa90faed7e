//! Quadratic Wasserstein distances between equal-weight empirical measures.

use crate::error::{Error, Result};

/// Largest sample count accepted by [`wasserstein2_exact_small`].
pub const EXACT_SMALL_CAP: usize = 256;

/// Exact W2 between two equal-size samples on the line: sort both and match
/// in order.
pub fn wasserstein2_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "sample counts differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::InsufficientData("empty samples".into()));
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    let ss: f64 = sa.iter().zip(&sb).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((ss / a.len() as f64).sqrt())
}

/// Minimum-cost perfect matching for a square cost matrix given row-major.
/// Returns `col[i]`, the column assigned to row `i`. O(n^3) shortest
/// augmenting paths with dual potentials.
pub fn optimal_assignment(cost: &[f64], n: usize) -> Vec<usize> {
    assert_eq!(cost.len(), n * n, "cost matrix must be n x n");
    let inf = f64::INFINITY;
    // 1-based rows/columns; index 0 is the virtual root
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![inf; n + 1];
    let mut used = vec![false; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        minv.fill(inf);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let row = &cost[(i0 - 1) * n..i0 * n];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = row[j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col = vec![0; n];
    for j in 1..=n {
        col[p[j] - 1] = j - 1;
    }
    col
}

fn check_points(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "sample counts differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::InsufficientData("empty samples".into()));
    }
    let d = a[0].len();
    if a.iter().chain(b).any(|p| p.len() != d) {
        return Err(Error::InvalidInput("points have mixed dimensions".into()));
    }
    Ok(())
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Exact W2 between two equal-size point sets by optimal assignment on the
/// squared-distance costs. Cubic time.
pub fn wasserstein2_exact(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    check_points(a, b)?;
    let n = a.len();
    let cost: Vec<f64> = a
        .iter()
        .flat_map(|p| b.iter().map(move |q| sq_dist(p, q)))
        .collect();
    let col = optimal_assignment(&cost, n);
    let total: f64 = (0..n).map(|i| cost[i * n + col[i]]).sum();
    Ok((total / n as f64).sqrt())
}

/// [`wasserstein2_exact`] restricted to at most 256 points per sample.
pub fn wasserstein2_exact_small(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    if a.len() > EXACT_SMALL_CAP || b.len() > EXACT_SMALL_CAP {
        return Err(Error::Size {
            n: a.len().max(b.len()),
            cap: EXACT_SMALL_CAP,
        });
    }
    wasserstein2_exact(a, b)
}
