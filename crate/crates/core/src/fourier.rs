//! Real trigonometric analysis on uniform periodic samples.
//!
//! Boundary fields (couple components, traces) live on uniform arc-length
//! samplings of a closed curve; this module provides the mode analysis used
//! for the weak-norm surrogate and the spectral arc derivative. Sample
//! counts stay in the low thousands, so the quadratic-cost direct transform
//! is deliberate — no FFT dependency for a few million flops per experiment.

use crate::scalar::Scalar;

/// Cosine/sine coefficients of a real periodic sample sequence.
///
/// With `n` samples `f_j`, the representation is
/// `f_j = a[0] + Σ_{k≥1} (a[k]·cos(2πkj/n) + b[k]·sin(2πkj/n))`,
/// with modes `k = 0 ..= n/2`.
#[derive(Debug, Clone)]
pub struct RealSpectrum<T> {
    pub a: Vec<T>,
    pub b: Vec<T>,
    n: usize,
}

impl<T: Scalar> RealSpectrum<T> {
    /// Analyzes `samples` (one period, uniform spacing).
    pub fn analyze(samples: &[T]) -> Self {
        let n = samples.len();
        assert!(n >= 2, "need at least two samples");
        let kmax = n / 2;
        let mut a = vec![T::zero(); kmax + 1];
        let mut b = vec![T::zero(); kmax + 1];
        let two_pi = T::real(std::f64::consts::TAU);
        let nt = T::real(n as f64);
        for k in 0..=kmax {
            let wk = two_pi * T::real(k as f64) / nt;
            let mut ca = T::zero();
            let mut cb = T::zero();
            for (j, &f) in samples.iter().enumerate() {
                let ph = wk * T::real(j as f64);
                ca += f * ph.cos();
                cb += f * ph.sin();
            }
            let scale = if k == 0 || (n % 2 == 0 && k == kmax) {
                T::one() / nt
            } else {
                T::real(2.0) / nt
            };
            a[k] = ca * scale;
            b[k] = cb * scale;
        }
        b[0] = T::zero();
        if n % 2 == 0 {
            b[kmax] = T::zero();
        }
        RealSpectrum { a, b, n }
    }

    /// Number of retained modes (`n/2 + 1`).
    pub fn n_modes(&self) -> usize {
        self.a.len()
    }

    /// Mean-square contribution of mode `k`, so that
    /// `Σ_k mode_power(k) = mean(f²)` (Parseval).
    pub fn mode_power(&self, k: usize) -> T {
        let edge = k == 0 || (self.n % 2 == 0 && k == self.n / 2);
        let p = self.a[k] * self.a[k] + self.b[k] * self.b[k];
        if edge {
            p
        } else {
            p * T::real(0.5)
        }
    }

    /// Synthesizes the derivative with respect to arc length at the original
    /// sample points, for a curve of total length `period`.
    pub fn derivative(&self, period: T) -> Vec<T> {
        let n = self.n;
        let two_pi = T::real(std::f64::consts::TAU);
        let nt = T::real(n as f64);
        let mut out = vec![T::zero(); n];
        for k in 1..self.n_modes() {
            if self.n % 2 == 0 && k == n / 2 {
                // Nyquist mode: its sampled sine derivative aliases to zero.
                continue;
            }
            let omega = two_pi * T::real(k as f64) / period;
            let wk = two_pi * T::real(k as f64) / nt;
            for (j, o) in out.iter_mut().enumerate() {
                let ph = wk * T::real(j as f64);
                *o += omega * (self.b[k] * ph.cos() - self.a[k] * ph.sin());
            }
        }
        out
    }
}

/// Spectral arc-length derivative of one period of uniform samples.
pub fn periodic_derivative<T: Scalar>(samples: &[T], period: T) -> Vec<T> {
    RealSpectrum::analyze(samples).derivative(period)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample<T: Scalar>(n: usize, f: impl Fn(f64) -> f64) -> Vec<T> {
        (0..n)
            .map(|j| T::real(f(j as f64 / n as f64)))
            .collect()
    }

    #[test]
    fn analysis_recovers_a_known_combination() {
        let n = 64;
        let s: Vec<f64> = sample(n, |t| {
            1.5 + 2.0 * (std::f64::consts::TAU * t).cos() - 0.5 * (3.0 * std::f64::consts::TAU * t).sin()
        });
        let sp = RealSpectrum::analyze(&s);
        assert_relative_eq!(sp.a[0], 1.5, epsilon = 1e-12);
        assert_relative_eq!(sp.a[1], 2.0, epsilon = 1e-12);
        assert_relative_eq!(sp.b[3], -0.5, epsilon = 1e-12);
        for k in 0..sp.n_modes() {
            if ![0, 1, 3].contains(&k) {
                assert!(sp.mode_power(k).abs() < 1e-24);
            }
        }
    }

    #[test]
    fn parseval_holds() {
        let n = 100;
        let s: Vec<f64> = sample(n, |t| (std::f64::consts::TAU * t).cos().exp());
        let sp = RealSpectrum::analyze(&s);
        let mean_sq = s.iter().map(|v| v * v).sum::<f64>() / n as f64;
        let total: f64 = (0..sp.n_modes()).map(|k| sp.mode_power(k)).sum();
        assert_relative_eq!(total, mean_sq, max_relative = 1e-12);
    }

    #[test]
    fn derivative_of_low_modes_is_spectrally_exact() {
        let n = 128;
        let period = 3.0;
        let s: Vec<f64> = (0..n)
            .map(|j| {
                let arc = period * j as f64 / n as f64;
                (std::f64::consts::TAU * 2.0 * arc / period).sin()
            })
            .collect();
        let d = periodic_derivative(&s, period);
        for (j, &dj) in d.iter().enumerate() {
            let arc = period * j as f64 / n as f64;
            let exact =
                (std::f64::consts::TAU * 2.0 / period) * (std::f64::consts::TAU * 2.0 * arc / period).cos();
            assert_relative_eq!(dj, exact, epsilon = 1e-10);
        }
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        // zero up to roundoff accumulated over all synthesized modes
        let d = periodic_derivative(&vec![7.0f64; 40], 2.0);
        assert!(d.iter().all(|v| v.abs() < 1e-10));
    }
}
