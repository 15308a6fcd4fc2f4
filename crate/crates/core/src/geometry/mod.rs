//! Planar geometry: domains, star-shaped inclusions, sampled curves, grid
//! regions, and the set distances the stability analysis is phrased in.
//!
//! Conventions used throughout:
//!
//! * closed curves are oriented counterclockwise;
//! * the outer unit normal `n` and unit tangent `τ` satisfy `τ = e3 × n`,
//!   i.e. `τ` is `n` rotated by +π/2;
//! * arc positions are either absolute lengths or fractions of the total
//!   perimeter (named `*_frac`);
//! * every length is in units of the geometric scale `r0`.

mod curve;
mod distance;
mod domain;
mod region;
mod star;

pub use curve::{smoothed_polygon, SampledCurve};
pub use distance::{complement_distances, hausdorff_distance, ComplementDistances};
pub use domain::{check_apriori, AprioriCheck, AprioriConstants, AprioriReport, BoundaryShape, PlanarDomain};
pub use region::{connected_component_touching, squared_edt, GridRegion};
pub use star::{StarInclusion, StarShape};

use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// Point or vector in the plate mid-plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Vec2<T> {
    pub fn new(x: T, y: T) -> Self {
        Vec2 { x, y }
    }

    pub fn zero() -> Self {
        Vec2 {
            x: T::zero(),
            y: T::zero(),
        }
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    pub fn norm(self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn dist(self, o: Self) -> T {
        (self - o).norm()
    }

    /// Rotation by +π/2 (counterclockwise).
    pub fn perp(self) -> Self {
        Vec2 {
            x: -self.y,
            y: self.x,
        }
    }

    pub fn scaled(self, s: T) -> Self {
        Vec2 {
            x: self.x * s,
            y: self.y * s,
        }
    }

    pub fn normalized(self) -> Self {
        let n = self.norm();
        if n == T::zero() {
            self
        } else {
            self.scaled(T::one() / n)
        }
    }

    pub fn angle(self) -> T {
        self.y.atan2(self.x)
    }
}

impl<T: Scalar> std::ops::Add for Vec2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Scalar> std::ops::Sub for Vec2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Scalar> std::ops::Neg for Vec2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Vec2::new(-self.x, -self.y)
    }
}

/// Closed planar region described by a containment test plus a boundary
/// sampling. Implemented by [`PlanarDomain`] and [`StarInclusion`].
pub trait Region2<T: Scalar> {
    /// Closed containment (boundary points count as inside, up to the
    /// sampling tolerance of the concrete shape).
    fn contains(&self, p: Vec2<T>) -> bool;

    /// Uniform arc-length sampling of the boundary.
    fn boundary(&self) -> &SampledCurve<T>;
}

/// Membership in a truncated open cone: apex `vertex`, symmetry direction
/// `axis`, half-aperture `π/2 − arctan(m0)`, intersected with the closed
/// ball of the given `radius` around the apex.
///
/// The apex itself is a member. Slope parameter `m0 > 0`: larger `m0` means
/// a narrower cone (`m0 = 1` gives a 45° half-aperture).
pub fn truncated_cone_contains<T: Scalar>(
    vertex: Vec2<T>,
    axis: Vec2<T>,
    m0: T,
    radius: T,
    query: Vec2<T>,
) -> bool {
    let v = query - vertex;
    let len = v.norm();
    if len > radius {
        return false;
    }
    if len == T::zero() {
        return true;
    }
    let a = axis.normalized();
    let cos_angle = v.dot(a) / len;
    let half_aperture = T::real(std::f64::consts::FRAC_PI_2) - m0.atan();
    cos_angle >= half_aperture.cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn vec2_algebra() {
        let a = Vec2::new(3.0, 4.0);
        assert_relative_eq!(a.norm(), 5.0);
        assert_relative_eq!(a.perp().dot(a), 0.0);
        assert_relative_eq!((a - a).norm(), 0.0);
        assert_relative_eq!(a.normalized().norm(), 1.0);
    }

    #[test]
    fn cone_accepts_points_near_the_axis() {
        let v = Vec2::new(0.0, 0.0);
        let axis = Vec2::new(1.0, 0.0);
        // m0 = 1 → half-aperture 45°
        assert!(truncated_cone_contains(v, axis, 1.0, 1.0, Vec2::new(0.5, 0.2)));
        assert!(truncated_cone_contains(v, axis, 1.0, 1.0, Vec2::new(0.5, 0.49)));
        assert!(!truncated_cone_contains(v, axis, 1.0, 1.0, Vec2::new(0.5, 0.51)));
    }

    #[test]
    fn cone_rejects_points_behind_the_vertex_and_outside_the_ball() {
        let v = Vec2::new(1.0, 1.0);
        let axis = Vec2::new(0.0, 1.0);
        assert!(!truncated_cone_contains(v, axis, 1.0, 2.0, Vec2::new(1.0, 0.9)));
        assert!(!truncated_cone_contains(v, axis, 1.0, 2.0, Vec2::new(1.0, 3.5)));
        assert!(truncated_cone_contains(v, axis, 1.0, 2.0, v));
    }

    #[test]
    fn narrower_slope_means_narrower_cone() {
        let v = Vec2::zero();
        let axis = Vec2::new(1.0, 0.0);
        let q = Vec2::new(0.5, 0.3);
        assert!(truncated_cone_contains(v, axis, 1.0, 1.0, q));
        assert!(!truncated_cone_contains(v, axis, 3.0, 1.0, q));
    }
}
