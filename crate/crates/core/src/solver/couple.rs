//! Couple fields applied on the outer boundary.
//!
//! A couple field is the pair `(M̂_n, M̂_τ)` of normal and tangential couple
//! densities, sampled at the midpoints of `n` equal arcs of `∂Ω`. Midpoint
//! sampling doubles as the quadrature rule for boundary integrals, so the
//! same object drives load assembly, measurement extraction, and norms.

use crate::error::{PlateError, Result};
use crate::fourier::{periodic_derivative, RealSpectrum};
use crate::geometry::{PlanarDomain, Region2, Vec2};
use crate::scalar::Scalar;

/// Default bound on the oscillation ratio `‖M̂‖_{L²} / ‖M̂‖_{-1/2}`.
pub const DEFAULT_FREQUENCY_BOUND: f64 = 10.0;

/// Relative tolerance on the couple resultant in `validate`.
const COMPATIBILITY_TOL: f64 = 1e-6;

/// Boundary couple density sampled at arc midpoints.
#[derive(Debug, Clone)]
pub struct CoupleField<T: Scalar> {
    pub m_n: Vec<T>,
    pub m_tau: Vec<T>,
    positions: Vec<Vec2<T>>,
    normals: Vec<Vec2<T>>,
    tangents: Vec<Vec2<T>>,
    fracs: Vec<T>,
    ds: T,
    perimeter: T,
    sigma: (T, T),
}

impl<T: Scalar> CoupleField<T> {
    /// Samples the profiles `m_n(frac)`, `m_tau(frac)` (arguments are arc
    /// fractions of the full boundary) at the midpoints of `n` equal arcs.
    pub fn from_profiles(
        domain: &PlanarDomain<T>,
        n: usize,
        m_n: impl Fn(T) -> T,
        m_tau: impl Fn(T) -> T,
    ) -> Result<Self> {
        if n < 16 || n % 2 != 0 {
            return Err(PlateError::InvalidInput(format!(
                "couple sample count must be even and at least 16, got {n}"
            )));
        }
        let curve = domain.boundary();
        let perimeter = curve.length();
        let nn = T::real(n as f64);
        let mut field = CoupleField {
            m_n: Vec::with_capacity(n),
            m_tau: Vec::with_capacity(n),
            positions: Vec::with_capacity(n),
            normals: Vec::with_capacity(n),
            tangents: Vec::with_capacity(n),
            fracs: Vec::with_capacity(n),
            ds: perimeter / nn,
            perimeter,
            sigma: domain.sigma(),
        };
        for j in 0..n {
            let frac = (T::real(j as f64) + T::real(0.5)) / nn;
            let s = frac * perimeter;
            field.fracs.push(frac);
            field.positions.push(curve.point_at_arc(s));
            field.tangents.push(curve.tangent_at_arc(s));
            field.normals.push(curve.outward_normal_at_arc(s));
            field.m_n.push(m_n(frac));
            field.m_tau.push(m_tau(frac));
        }
        Ok(field)
    }

    /// The built-in excitation: a raised-cosine bump of `M̂_n` over the middle
    /// third of the accessible arc (`M̂_τ ≡ 0`), plus two smaller windows near
    /// the ends of the arc whose amplitudes are solved so the couple
    /// resultant vanishes.
    pub fn default_bump(domain: &PlanarDomain<T>, n: usize) -> Result<Self> {
        let (s0, s1) = domain.sigma();
        let w = s1 - s0;
        let window = |lo: T, hi: T, frac: T| -> T {
            if frac <= lo || frac >= hi {
                return T::zero();
            }
            let u = (frac - lo) / (hi - lo);
            let s = (T::real(std::f64::consts::PI) * u).sin();
            s * s
        };
        let third = w / T::real(3.0);
        let bump_lo = s0 + third;
        let bump_hi = s1 - third;
        let mut field =
            Self::from_profiles(domain, n, |f| window(bump_lo, bump_hi, f), |_| T::zero())?;

        // balance windows in the outer thirds
        let w1 = (s0 + w * T::real(0.05), s0 + w * T::real(0.30));
        let w2 = (s1 - w * T::real(0.30), s1 - w * T::real(0.05));
        let mut v1: Vec2<T> = Vec2::zero();
        let mut v2: Vec2<T> = Vec2::zero();
        for j in 0..field.m_n.len() {
            let f = field.fracs[j];
            let nrm = field.normals[j];
            let a1 = window(w1.0, w1.1, f) * field.ds;
            let a2 = window(w2.0, w2.1, f) * field.ds;
            v1 = Vec2::new(v1.x + nrm.x * a1, v1.y + nrm.y * a1);
            v2 = Vec2::new(v2.x + nrm.x * a2, v2.y + nrm.y * a2);
        }
        let r = field.resultant();
        let det = v1.x * v2.y - v1.y * v2.x;
        let scale = (v1.norm() * v2.norm()).max(T::real(1e-300));
        if (det / scale).abs() < T::real(1e-9) {
            return Err(PlateError::InvalidInput(
                "accessible arc is too short to balance the default couple field".into(),
            ));
        }
        let alpha1 = (-r.x * v2.y + r.y * v2.x) / det;
        let alpha2 = (-v1.x * r.y + v1.y * r.x) / det;
        for j in 0..field.m_n.len() {
            let f = field.fracs[j];
            field.m_n[j] += alpha1 * window(w1.0, w1.1, f) + alpha2 * window(w2.0, w2.1, f);
        }
        Ok(field)
    }

    pub fn sample_count(&self) -> usize {
        self.m_n.len()
    }

    pub fn positions(&self) -> &[Vec2<T>] {
        &self.positions
    }

    pub fn normals(&self) -> &[Vec2<T>] {
        &self.normals
    }

    pub fn tangents(&self) -> &[Vec2<T>] {
        &self.tangents
    }

    pub fn arc_fracs(&self) -> &[T] {
        &self.fracs
    }

    /// Arc-length weight of every sample.
    pub fn ds(&self) -> T {
        self.ds
    }

    pub fn perimeter(&self) -> T {
        self.perimeter
    }

    pub fn sigma(&self) -> (T, T) {
        self.sigma
    }

    /// Cartesian components of the couple vector `M̂_τ τ + M̂_n n`.
    pub fn cartesian(&self) -> (Vec<T>, Vec<T>) {
        let n = self.sample_count();
        let mut mx = Vec::with_capacity(n);
        let mut my = Vec::with_capacity(n);
        for j in 0..n {
            mx.push(self.m_tau[j] * self.tangents[j].x + self.m_n[j] * self.normals[j].x);
            my.push(self.m_tau[j] * self.tangents[j].y + self.m_n[j] * self.normals[j].y);
        }
        (mx, my)
    }

    /// `∮ (M̂_τ τ + M̂_n n) ds` — must vanish for the couples to do no work
    /// on rigid displacements.
    pub fn resultant(&self) -> Vec2<T> {
        let (mx, my) = self.cartesian();
        let mut r = Vec2::zero();
        for j in 0..mx.len() {
            r = Vec2::new(r.x + mx[j] * self.ds, r.y + my[j] * self.ds);
        }
        r
    }

    /// `‖M̂‖_{L²(∂Ω)}`.
    pub fn l2_norm(&self) -> T {
        let mut s = T::zero();
        for j in 0..self.sample_count() {
            s += (self.m_n[j] * self.m_n[j] + self.m_tau[j] * self.m_tau[j]) * self.ds;
        }
        s.sqrt()
    }

    /// Spectral surrogate of the `H^{-1/2}(∂Ω)` norm: mode powers of the
    /// Cartesian components weighted by `(1+k²)^{-1/2}`.
    pub fn h_minus_half_surrogate(&self) -> T {
        let (mx, my) = self.cartesian();
        let sx = RealSpectrum::analyze(&mx);
        let sy = RealSpectrum::analyze(&my);
        let mut s = T::zero();
        for k in 0..sx.n_modes() {
            let w = T::one() / (T::one() + T::real((k * k) as f64)).sqrt();
            s += w * (sx.mode_power(k) + sy.mode_power(k));
        }
        (self.perimeter * s).sqrt()
    }

    /// Arc-length derivative `(M̂_τ)'` by spectral differentiation.
    pub fn tangential_derivative(&self) -> Vec<T> {
        periodic_derivative(&self.m_tau, self.perimeter)
    }

    /// Admissibility of the excitation: supported inside the accessible arc,
    /// vanishing resultant, not identically zero, and oscillation ratio
    /// `‖M̂‖_{L²}/‖M̂‖_{-1/2}` at most `frequency_bound`.
    pub fn validate(&self, frequency_bound: T) -> Result<()> {
        let l2 = self.l2_norm();
        if l2 == T::zero() {
            return Err(PlateError::InvalidInput(
                "couple field is identically zero".into(),
            ));
        }
        let (s0, s1) = self.sigma;
        let full = s0 == T::zero() && s1 == T::one();
        if !full {
            for j in 0..self.sample_count() {
                if (self.m_n[j] != T::zero() || self.m_tau[j] != T::zero())
                    && (self.fracs[j] <= s0 || self.fracs[j] >= s1)
                {
                    return Err(PlateError::InvalidInput(format!(
                        "couple field is nonzero at arc fraction {} outside the \
                         accessible arc ({}, {})",
                        self.fracs[j], s0, s1
                    )));
                }
            }
        }
        let r = self.resultant();
        let rel = r.norm() / (l2 * self.perimeter.sqrt());
        if rel > T::real(COMPATIBILITY_TOL) {
            return Err(PlateError::InvalidInput(format!(
                "couple resultant {} exceeds the compatibility tolerance \
                 (relative {})",
                r.norm(),
                rel
            )));
        }
        let ratio = l2 / self.h_minus_half_surrogate();
        if ratio > frequency_bound {
            return Err(PlateError::InvalidInput(format!(
                "couple field oscillates too fast: L2/H^(-1/2) ratio {} exceeds \
                 the bound {}",
                ratio, frequency_bound
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    fn disc(radius: f64, sigma: (f64, f64)) -> PlanarDomain<f64> {
        PlanarDomain::disc(Vec2::zero(), radius, sigma).unwrap()
    }

    #[test]
    fn default_bump_is_admissible() {
        for sigma in [(0.0, 1.0), (0.1, 0.45), (0.3, 0.9)] {
            let dom = disc(2.0, sigma);
            let field = CoupleField::default_bump(&dom, 256).unwrap();
            field.validate(DEFAULT_FREQUENCY_BOUND).unwrap();
            assert!(field.m_tau.iter().all(|&v| v == 0.0));
            let rel = field.resultant().norm()
                / (field.l2_norm() * field.perimeter().sqrt());
            assert!(rel < 1e-12, "resultant not balanced: {rel}");
        }
    }

    #[test]
    fn constant_profile_norms() {
        // constant normal density on a circle: the Cartesian components
        // rotate with the normal, so all power sits in mode 1 and the
        // surrogate is the L² norm scaled by 2^(-1/4)
        let dom = disc(1.5, (0.0, 1.0));
        let field = CoupleField::from_profiles(&dom, 128, |_| 2.0, |_| 0.0).unwrap();
        let l2 = 6.139960247678931; // 2·sqrt(3π)
        assert_relative_eq!(field.l2_norm(), l2, max_relative = 1e-6);
        assert_relative_eq!(
            field.h_minus_half_surrogate(),
            5.163070546254389, // 2·sqrt(3π)/2^(1/4)
            max_relative = 1e-4
        );
    }

    #[test]
    fn single_mode_surrogate_value() {
        // unit-L² pure mode k: surrogate = (1+k²)^(-1/4)
        let dom = disc(1.0, (0.0, 1.0));
        let p = dom.perimeter();
        let amp = (2.0 / p).sqrt();
        let k = 3.0;
        let field =
            CoupleField::from_profiles(&dom, 256, |f| amp * (TAU * k * f).cos(), |_| 0.0)
                .unwrap();
        assert_relative_eq!(field.l2_norm(), 1.0, max_relative = 1e-3);
        // the couple vector m_n·n mixes boundary mode k with the normal's
        // mode 1, splitting power between Cartesian modes k−1 and k+1
        let lo = (1.0 + 16.0f64).powf(-0.25); // k+1 = 4
        let hi = (1.0 + 4.0f64).powf(-0.25); // k−1 = 2
        let surr = field.h_minus_half_surrogate();
        assert!(
            surr > 0.95 * lo && surr < 1.05 * hi,
            "surrogate {surr} outside [{lo}, {hi}]"
        );
    }

    #[test]
    fn unbalanced_field_fails_validation() {
        let dom = disc(2.0, (0.0, 1.0));
        // one-sided pressure: resultant points along +x
        let field = CoupleField::from_profiles(
            &dom,
            128,
            |f| if f < 0.25 || f > 0.75 { 1.0 } else { 0.0 },
            |_| 0.0,
        )
        .unwrap();
        assert!(field.validate(DEFAULT_FREQUENCY_BOUND).is_err());
    }

    #[test]
    fn oscillation_bound_is_enforced() {
        let dom = disc(1.0, (0.0, 1.0));
        let fast =
            CoupleField::from_profiles(&dom, 512, |f| (TAU * 120.0 * f).cos(), |_| 0.0).unwrap();
        assert!(fast.validate(10.0).is_err());
        assert!(fast.validate(30.0).is_ok());
    }

    #[test]
    fn support_outside_sigma_is_rejected() {
        let dom = disc(2.0, (0.4, 0.6));
        let field = CoupleField::from_profiles(&dom, 128, |_| 1.0, |_| 0.0).unwrap();
        assert!(matches!(
            field.validate(DEFAULT_FREQUENCY_BOUND),
            Err(PlateError::InvalidInput(_))
        ));
    }

    #[test]
    fn zero_field_is_rejected() {
        let dom = disc(2.0, (0.0, 1.0));
        let field = CoupleField::from_profiles(&dom, 64, |_| 0.0, |_| 0.0).unwrap();
        assert!(field.validate(DEFAULT_FREQUENCY_BOUND).is_err());
    }

    #[test]
    fn tangential_derivative_matches_analytic() {
        let dom = disc(1.0, (0.0, 1.0));
        let k = 2.0;
        let field =
            CoupleField::from_profiles(&dom, 128, |_| 0.0, |f| (TAU * k * f).sin()).unwrap();
        let ds = field.tangential_derivative();
        let p = field.perimeter();
        for (j, &f) in field.arc_fracs().iter().enumerate() {
            let expect = (TAU * k / p) * (TAU * k * f).cos();
            assert_relative_eq!(ds[j], expect, epsilon = 1e-8, max_relative = 1e-8);
        }
    }
}
