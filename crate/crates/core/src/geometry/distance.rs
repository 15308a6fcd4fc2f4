//! Set distances between inclusions: Hausdorff distance of the closures,
//! Hausdorff distance of the complements, and the boundary-to-complement
//! modified distance.

use super::region::GridRegion;
use super::star::StarInclusion;
use super::{Region2, Vec2};
use crate::scalar::Scalar;

/// Hausdorff distance between the closures of two bounded regions.
///
/// The supremum of the distance from one closed region to the other is
/// attained on the boundary, so it is evaluated on the boundary samples:
/// points contained in the other region contribute zero, the rest contribute
/// their distance to the other boundary.
pub fn hausdorff_distance<T: Scalar>(a: &impl Region2<T>, b: &impl Region2<T>) -> T {
    one_sided(a, b).max(one_sided(b, a))
}

fn one_sided<T: Scalar>(from: &impl Region2<T>, to: &impl Region2<T>) -> T {
    let mut worst = T::zero();
    for &p in from.boundary().points() {
        if !to.contains(p) {
            worst = worst.max(to.boundary().distance_to(p));
        }
    }
    worst
}

/// Distances between two inclusions measured through their complements.
#[derive(Debug, Clone, Copy)]
pub struct ComplementDistances<T> {
    /// Hausdorff distance between the complements of the two inclusions:
    /// `max( sup_{D2∖D1} dist(·, ∂D2), sup_{D1∖D2} dist(·, ∂D1) )`.
    pub d: T,
    /// Modified distance: the same suprema restricted to the boundaries,
    /// `max( max_{∂D1 ∩ D2} dist(·, ∂D2), max_{∂D2 ∩ D1} dist(·, ∂D1) )`.
    /// Always `≤ d`.
    pub d_m: T,
    /// Grid step used for the complement transform.
    pub step: T,
}

/// Computes the complement Hausdorff distance `d` and the modified distance
/// `d_m` between two inclusions assumed well inside the same domain (so the
/// outer boundary never realizes the distances).
///
/// `d` is evaluated on a shared raster of the given `step` (default
/// `r0/200`) with an exact Euclidean distance transform; `d_m` is evaluated
/// directly on the boundary samples.
pub fn complement_distances<T: Scalar>(
    d1: &StarInclusion<T>,
    d2: &StarInclusion<T>,
    step: Option<T>,
) -> ComplementDistances<T> {
    let step = step.unwrap_or_else(|| T::real(crate::R0 / 200.0));

    // shared raster over the union bounding box
    let (lo1, hi1) = d1.boundary().bbox();
    let (lo2, hi2) = d2.boundary().bbox();
    let lo = Vec2::new(lo1.x.min(lo2.x), lo1.y.min(lo2.y));
    let hi = Vec2::new(hi1.x.max(hi2.x), hi1.y.max(hi2.y));
    let r1 = GridRegion::from_fn(lo, hi, step, 2, |p| d1.shape().contains(p));
    let r2 = GridRegion::from_fn(lo, hi, step, 2, |p| d2.shape().contains(p));
    let dist1 = r1.distance_to_complement();
    let dist2 = r2.distance_to_complement();

    let mut d = T::zero();
    for i in 0..r1.nx {
        for j in 0..r1.ny {
            let k = r1.idx(i, j);
            if r2.get(i, j) && !r1.get(i, j) {
                d = d.max(dist2[k]);
            }
            if r1.get(i, j) && !r2.get(i, j) {
                d = d.max(dist1[k]);
            }
        }
    }

    let mut d_m = T::zero();
    for &p in d1.boundary().points() {
        if d2.shape().contains(p) {
            d_m = d_m.max(d2.boundary().distance_to(p));
        }
    }
    for &p in d2.boundary().points() {
        if d1.shape().contains(p) {
            d_m = d_m.max(d1.boundary().distance_to(p));
        }
    }

    ComplementDistances { d, d_m, step }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn offset_equal_discs_all_three_distances_agree() {
        // equal discs with centers 0.3 apart: Hausdorff, complement, and
        // modified distances all equal the offset
        let a = StarInclusion::disc(Vec2::new(0.0, 0.0), 0.5).unwrap();
        let b = StarInclusion::disc(Vec2::new(0.3, 0.0), 0.5).unwrap();
        assert_relative_eq!(hausdorff_distance(&a, &b), 0.3, epsilon = 5e-3);
        let cd = complement_distances(&a, &b, None);
        assert_relative_eq!(cd.d, 0.3, epsilon = 2.5 * cd.step.as_f64());
        assert_relative_eq!(cd.d_m, 0.3, epsilon = 5e-3);
    }

    #[test]
    fn concentric_dilation_gives_s_rho() {
        let rho = 0.6;
        let s = 0.1;
        let a = StarInclusion::disc(Vec2::new(0.2, -0.1), rho).unwrap();
        let b = a.dilated(s).unwrap();
        let expect = s * rho;
        assert_relative_eq!(hausdorff_distance(&a, &b), expect, epsilon = 5e-3);
        let cd = complement_distances(&a, &b, None);
        assert_relative_eq!(cd.d, expect, epsilon = 2.5 * cd.step.as_f64());
        assert_relative_eq!(cd.d_m, expect, epsilon = 5e-3);
    }

    #[test]
    fn nested_concentric_discs() {
        let a = StarInclusion::disc(Vec2::zero(), 1.0).unwrap();
        let b = StarInclusion::disc(Vec2::zero(), 0.5).unwrap();
        assert_relative_eq!(hausdorff_distance(&a, &b), 0.5, epsilon = 5e-3);
        let cd = complement_distances(&a, &b, None);
        assert_relative_eq!(cd.d, 0.5, epsilon = 2.5 * cd.step.as_f64());
        assert_relative_eq!(cd.d_m, 0.5, epsilon = 5e-3);
    }

    #[test]
    fn disjoint_discs_have_zero_modified_distance() {
        // no boundary point of either disc lies inside the other, so d_m
        // vanishes while d picks up the larger inradius
        let a = StarInclusion::disc(Vec2::new(-1.0, 0.0), 0.3).unwrap();
        let b = StarInclusion::disc(Vec2::new(1.0, 0.0), 0.4).unwrap();
        let cd = complement_distances(&a, &b, Some(0.01));
        assert_eq!(cd.d_m, 0.0);
        assert_relative_eq!(cd.d, 0.4, epsilon = 0.025);
        // Hausdorff distance is the center gap plus nothing fancy:
        // sup over ∂a of dist to b̄ = 2 − 0.3 − 0.4 + 2·0.3 = 1.9; check ≥ gap
        assert!(hausdorff_distance(&a, &b) > 1.0);
    }

    #[test]
    fn identical_shapes_are_at_zero_distance() {
        let a =
            StarInclusion::new(Vec2::new(0.1, 0.2), vec![0.7, 0.05, -0.03, 0.02, 0.0]).unwrap();
        let b = a.clone();
        assert_eq!(hausdorff_distance(&a, &b), 0.0);
        let cd = complement_distances(&a, &b, Some(0.01));
        assert_eq!(cd.d_m, 0.0);
        assert!(cd.d <= 1.5 * cd.step);
    }

    #[test]
    fn modified_distance_never_exceeds_complement_distance() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..8 {
            let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
                let cx: f64 = rng.gen_range(-0.3..0.3);
                let cy: f64 = rng.gen_range(-0.3..0.3);
                let r0: f64 = rng.gen_range(0.5..0.9);
                let a2: f64 = rng.gen_range(-0.08..0.08);
                let b3: f64 = rng.gen_range(-0.05..0.05);
                StarInclusion::new(Vec2::new(cx, cy), vec![r0, 0.0, 0.0, a2, 0.0, 0.0, b3])
                    .unwrap()
            };
            let a = mk(&mut rng);
            let b = mk(&mut rng);
            let cd = complement_distances(&a, &b, Some(0.01));
            assert!(
                cd.d_m <= cd.d + 1.5 * cd.step,
                "d_m = {} > d = {}",
                cd.d_m,
                cd.d
            );
        }
    }
}
