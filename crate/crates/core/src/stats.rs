//! Least-squares and rank statistics used by the verification reports.

use crate::scalar::Scalar;

/// Ordinary least-squares fit of `y ≈ intercept + slope·x`.
#[derive(Debug, Clone, Copy)]
pub struct LineFit<T> {
    pub slope: T,
    pub intercept: T,
    /// Coefficient of determination of the fit.
    pub r2: T,
    /// Standard error of the slope estimate (residual-based; zero when the
    /// fit is exact or has no residual degrees of freedom).
    pub slope_se: T,
    pub n: usize,
}

impl<T: Scalar> LineFit<T> {
    /// 95% normal-approximation confidence interval for the slope.
    pub fn slope_ci(&self) -> (T, T) {
        let half = T::real(1.96) * self.slope_se;
        (self.slope - half, self.slope + half)
    }
}

/// Fits a line through `(x_i, y_i)` by least squares.
///
/// Returns `None` on fewer than two points or when all `x_i` coincide.
pub fn fit_line<T: Scalar>(x: &[T], y: &[T]) -> Option<LineFit<T>> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = T::real(x.len() as f64);
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut syy = T::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= T::zero() {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res = (syy - slope * sxy).max(T::zero());
    let r2 = if syy > T::zero() {
        T::one() - ss_res / syy
    } else {
        T::one()
    };
    let dof = x.len() as isize - 2;
    let slope_se = if dof > 0 {
        (ss_res / (T::real(dof as f64) * sxx)).sqrt()
    } else {
        T::zero()
    };
    Some(LineFit {
        slope,
        intercept,
        r2,
        slope_se,
        n: x.len(),
    })
}

/// Spearman rank correlation between two samples.
///
/// Ties receive mid-ranks. Returns `None` when either sample is constant or
/// the lengths differ or are below 2.
pub fn spearman<T: Scalar>(x: &[T], y: &[T]) -> Option<T> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let rx = mid_ranks(x);
    let ry = mid_ranks(y);
    let fit = fit_line(&rx, &ry)?;
    let r2 = fit.r2.max(T::zero());
    Some(r2.sqrt() * fit.slope.signum())
}

fn mid_ranks<T: Scalar>(v: &[T]) -> Vec<T> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).expect("rankable values"));
    let mut ranks = vec![T::zero(); v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        // mid-rank for the tie block [i, j]
        let r = T::real((i + j) as f64 / 2.0 + 1.0);
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_line_is_recovered() {
        let x: Vec<f64> = (0..7).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| 3.0 - 2.0 * v).collect();
        let fit = fit_line(&x, &y).unwrap();
        assert_relative_eq!(fit.slope, -2.0, max_relative = 1e-14);
        assert_relative_eq!(fit.intercept, 3.0, max_relative = 1e-14);
        assert_relative_eq!(fit.r2, 1.0, max_relative = 1e-14);
        assert!(fit.slope_se.abs() < 1e-13);
    }

    #[test]
    fn r2_penalizes_scatter() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [0.0, 1.2, 1.7, 3.3];
        let fit = fit_line(&x, &y).unwrap();
        assert!(fit.r2 > 0.9 && fit.r2 < 1.0);
        assert!(fit.slope_se > 0.0);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert!(fit_line::<f64>(&[1.0], &[2.0]).is_none());
        assert!(fit_line(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).is_none());
    }

    #[test]
    fn spearman_detects_monotone_nonlinear_association() {
        let x: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| v.exp()).collect();
        assert_relative_eq!(spearman(&x, &y).unwrap(), 1.0, max_relative = 1e-12);
        let yneg: Vec<f64> = x.iter().map(|&v| -v.ln()).collect();
        assert_relative_eq!(spearman(&x, &yneg).unwrap(), -1.0, max_relative = 1e-12);
    }

    #[test]
    fn spearman_handles_ties_with_mid_ranks() {
        let x = [1.0, 1.0, 2.0, 3.0];
        let y = [0.5, 0.5, 1.0, 2.0];
        let r = spearman(&x, &y).unwrap();
        assert!(r > 0.9);
    }
}
