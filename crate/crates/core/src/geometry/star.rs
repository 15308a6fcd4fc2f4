//! Star-shaped regions with trigonometric-polynomial radius.

use super::curve::SampledCurve;
use super::{Region2, Vec2};
use crate::error::{PlateError, Result};
use crate::scalar::Scalar;

/// Maximum harmonic index accepted for inclusion boundaries.
pub const MAX_HARMONIC: usize = 8;

/// Region star-shaped about `center` with radius
/// `r(θ) = a0 + Σ_k (a_k cos kθ + b_k sin kθ)`.
///
/// `coeffs` stores `[a0, a1, b1, a2, b2, …]`; a circle is the single
/// coefficient `[a0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StarShape<T> {
    pub center: Vec2<T>,
    pub coeffs: Vec<T>,
}

impl<T: Scalar> StarShape<T> {
    pub fn circle(center: Vec2<T>, radius: T) -> Self {
        StarShape {
            center,
            coeffs: vec![radius],
        }
    }

    /// Highest harmonic index present (0 for a circle).
    pub fn max_harmonic(&self) -> usize {
        self.coeffs.len() / 2
    }

    pub fn radius(&self, theta: T) -> T {
        let mut r = self.coeffs[0];
        for k in 1..=self.max_harmonic() {
            let kt = theta * T::real(k as f64);
            r += self.coeffs[2 * k - 1] * kt.cos();
            if 2 * k < self.coeffs.len() {
                r += self.coeffs[2 * k] * kt.sin();
            }
        }
        r
    }

    /// dr/dθ.
    pub fn radius_d(&self, theta: T) -> T {
        let mut r = T::zero();
        for k in 1..=self.max_harmonic() {
            let kf = T::real(k as f64);
            let kt = theta * kf;
            r -= self.coeffs[2 * k - 1] * kf * kt.sin();
            if 2 * k < self.coeffs.len() {
                r += self.coeffs[2 * k] * kf * kt.cos();
            }
        }
        r
    }

    /// d²r/dθ².
    pub fn radius_dd(&self, theta: T) -> T {
        let mut r = T::zero();
        for k in 1..=self.max_harmonic() {
            let kf = T::real(k as f64);
            let k2 = kf * kf;
            let kt = theta * kf;
            r -= self.coeffs[2 * k - 1] * k2 * kt.cos();
            if 2 * k < self.coeffs.len() {
                r -= self.coeffs[2 * k] * k2 * kt.sin();
            }
        }
        r
    }

    pub fn point(&self, theta: T) -> Vec2<T> {
        let u = Vec2::new(theta.cos(), theta.sin());
        self.center + u.scaled(self.radius(theta))
    }

    /// dP/dθ (not normalized).
    pub fn velocity(&self, theta: T) -> Vec2<T> {
        let u = Vec2::new(theta.cos(), theta.sin());
        u.scaled(self.radius_d(theta)) + u.perp().scaled(self.radius(theta))
    }

    /// Signed curvature of the boundary at polar angle `theta`.
    pub fn curvature(&self, theta: T) -> T {
        let r = self.radius(theta);
        let rd = self.radius_d(theta);
        let rdd = self.radius_dd(theta);
        let denom = (r * r + rd * rd).sqrt();
        (r * r + T::real(2.0) * rd * rd - r * rdd) / (denom * denom * denom)
    }

    /// Closed containment: `|p − center| ≤ r(θ(p))`.
    pub fn contains(&self, p: Vec2<T>) -> bool {
        let v = p - self.center;
        let rho = v.norm();
        if rho == T::zero() {
            return self.coeffs[0] > T::zero();
        }
        rho <= self.radius(v.angle())
    }

    /// Minimum of `r(θ)` over a dense angular sampling.
    pub fn min_radius(&self) -> T {
        let mut m = T::infinity();
        for j in 0..720 {
            let th = T::real(std::f64::consts::TAU * j as f64 / 720.0);
            m = m.min(self.radius(th));
        }
        m
    }

    pub fn max_radius(&self) -> T {
        let mut m = T::neg_infinity();
        for j in 0..720 {
            let th = T::real(std::f64::consts::TAU * j as f64 / 720.0);
            m = m.max(self.radius(th));
        }
        m
    }

    pub fn to_curve(&self, n: usize) -> Result<SampledCurve<T>> {
        let two_pi = T::real(std::f64::consts::TAU);
        SampledCurve::from_parametric(
            |t: T| self.point(t * two_pi),
            Some(&|t: T| self.velocity(t * two_pi)),
            n,
        )
    }
}

/// Boundary sampling density for inclusions (per curve, uniform arc length).
pub const INCLUSION_SAMPLES: usize = 1024;

/// A validated star-shaped rigid inclusion.
///
/// Construction enforces strictly positive radius and the harmonic cap
/// [`MAX_HARMONIC`]; clearance from the outer boundary is checked separately
/// by the a-priori report, since it involves the domain.
#[derive(Debug, Clone)]
pub struct StarInclusion<T> {
    shape: StarShape<T>,
    curve: SampledCurve<T>,
}

impl<T: Scalar> StarInclusion<T> {
    pub fn new(center: Vec2<T>, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(PlateError::InvalidGeometry(
                "inclusion needs at least the constant radius coefficient".into(),
            ));
        }
        let shape = StarShape { center, coeffs };
        if shape.max_harmonic() > MAX_HARMONIC {
            return Err(PlateError::InvalidGeometry(format!(
                "harmonic index {} exceeds the supported maximum {}",
                shape.max_harmonic(),
                MAX_HARMONIC
            )));
        }
        let min_r = shape.min_radius();
        if !(min_r > T::zero()) {
            return Err(PlateError::InvalidGeometry(format!(
                "star radius must stay positive (min sampled radius {min_r})"
            )));
        }
        let curve = shape.to_curve(INCLUSION_SAMPLES)?;
        Ok(StarInclusion { shape, curve })
    }

    pub fn disc(center: Vec2<T>, radius: T) -> Result<Self> {
        Self::new(center, vec![radius])
    }

    pub fn shape(&self) -> &StarShape<T> {
        &self.shape
    }

    pub fn center(&self) -> Vec2<T> {
        self.shape.center
    }

    /// Flat parameter vector `[cx, cy, a0, a1, b1, …]` used by the
    /// derivative-free search.
    pub fn params(&self) -> Vec<T> {
        let mut p = vec![self.shape.center.x, self.shape.center.y];
        p.extend_from_slice(&self.shape.coeffs);
        p
    }

    /// Inverse of [`params`](Self::params). Fails on non-positive radius.
    pub fn from_params(p: &[T]) -> Result<Self> {
        if p.len() < 3 {
            return Err(PlateError::InvalidInput(
                "parameter vector needs [cx, cy, a0, …]".into(),
            ));
        }
        Self::new(Vec2::new(p[0], p[1]), p[2..].to_vec())
    }

    /// Dilation about the center: every radius scaled by `1 + s`.
    pub fn dilated(&self, s: T) -> Result<Self> {
        let coeffs = self
            .shape
            .coeffs
            .iter()
            .map(|&c| c * (T::one() + s))
            .collect();
        Self::new(self.shape.center, coeffs)
    }

    pub fn translated(&self, v: Vec2<T>) -> Result<Self> {
        Self::new(self.shape.center + v, self.shape.coeffs.clone())
    }

    /// Same shape with one harmonic coefficient perturbed by `amount`
    /// (`coeff_index` into the flat coefficient vector).
    pub fn perturbed(&self, coeff_index: usize, amount: T) -> Result<Self> {
        let mut coeffs = self.shape.coeffs.clone();
        while coeffs.len() <= coeff_index {
            coeffs.push(T::zero());
        }
        coeffs[coeff_index] += amount;
        Self::new(self.shape.center, coeffs)
    }
}

impl<T: Scalar> Region2<T> for StarInclusion<T> {
    fn contains(&self, p: Vec2<T>) -> bool {
        self.shape.contains(p)
    }

    fn boundary(&self) -> &SampledCurve<T> {
        &self.curve
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn circle_radius_and_curvature() {
        let s = StarShape::circle(Vec2::new(1.0, -2.0), 0.75);
        for j in 0..16 {
            let th = std::f64::consts::TAU * j as f64 / 16.0;
            assert_relative_eq!(s.radius(th), 0.75);
            assert_relative_eq!(s.curvature(th), 1.0 / 0.75, max_relative = 1e-12);
            assert_relative_eq!((s.point(th) - s.center).norm(), 0.75, max_relative = 1e-12);
        }
        assert!(s.contains(Vec2::new(1.0, -1.3)));
        assert!(!s.contains(Vec2::new(1.0, -1.2)));
    }

    #[test]
    fn harmonic_radius_derivatives_match_finite_differences() {
        let s = StarShape {
            center: Vec2::zero(),
            coeffs: vec![1.0, 0.1, -0.05, 0.02, 0.03],
        };
        let h = 1e-6;
        for j in 0..12 {
            let th = 0.37 + j as f64 * 0.5;
            let fd1 = (s.radius(th + h) - s.radius(th - h)) / (2.0 * h);
            let fd2 = (s.radius(th + h) - 2.0 * s.radius(th) + s.radius(th - h)) / (h * h);
            assert_relative_eq!(s.radius_d(th), fd1, epsilon = 1e-6);
            assert_relative_eq!(s.radius_dd(th), fd2, epsilon = 1e-3);
        }
    }

    #[test]
    fn inclusion_rejects_nonpositive_radius_and_high_harmonics() {
        assert!(StarInclusion::new(Vec2::zero(), vec![0.5, 0.6]).is_err());
        assert!(StarInclusion::new(Vec2::zero(), vec![-0.1]).is_err());
        let mut coeffs = vec![1.0];
        coeffs.extend(std::iter::repeat(0.0).take(2 * (MAX_HARMONIC + 1)));
        assert!(StarInclusion::new(Vec2::zero(), coeffs).is_err());
        assert!(StarInclusion::disc(Vec2::zero(), 0.8).is_ok());
    }

    #[test]
    fn params_round_trip() {
        let inc = StarInclusion::new(Vec2::new(0.2, -0.1), vec![0.9, 0.05, 0.02]).unwrap();
        let p = inc.params();
        assert_eq!(p, vec![0.2, -0.1, 0.9, 0.05, 0.02]);
        let back = StarInclusion::from_params(&p).unwrap();
        assert_eq!(back.shape(), inc.shape());
    }

    #[test]
    fn dilation_scales_distances_from_center() {
        let inc = StarInclusion::new(Vec2::zero(), vec![1.0, 0.1, 0.0]).unwrap();
        let big = inc.dilated(0.25).unwrap();
        for j in 0..8 {
            let th = std::f64::consts::TAU * j as f64 / 8.0;
            assert_relative_eq!(big.shape().radius(th), 1.25 * inc.shape().radius(th), max_relative = 1e-12);
        }
    }

    #[test]
    fn boundary_curve_is_counterclockwise_with_outward_normals() {
        let inc = StarInclusion::new(Vec2::new(0.5, 0.5), vec![0.7, 0.0, 0.0, 0.08]).unwrap();
        let c = inc.boundary();
        for i in (0..c.n()).step_by(37) {
            let p = c.point_at_index(i);
            let outward = c.outward_normal_at_index(i);
            // stepping slightly outward must leave the region
            assert!(!inc.contains(p + outward.scaled(0.02)));
            assert!(inc.contains(p - outward.scaled(0.02)));
        }
    }
}
