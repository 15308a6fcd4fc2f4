//! Closed curves as uniform arc-length samplings.

use super::Vec2;
use crate::error::{PlateError, Result};
use crate::scalar::Scalar;

/// A closed curve stored as `n` uniform arc-length samples with unit
/// tangents, oriented counterclockwise.
///
/// Queries between samples interpolate linearly; the sampling density is
/// chosen by the constructor caller and bounds every geometric tolerance
/// derived from the curve.
#[derive(Debug, Clone)]
pub struct SampledCurve<T> {
    pts: Vec<Vec2<T>>,
    tangents: Vec<Vec2<T>>,
    length: T,
}

impl<T: Scalar> SampledCurve<T> {
    /// Samples a parametric closed curve `point(t)`, `t ∈ [0, 1)`, and
    /// resamples it to `n` uniform arc-length positions. `velocity` (dP/dt),
    /// when supplied, is used for exact tangents at the resampled parameters;
    /// otherwise tangents come from central differences of neighbors.
    pub fn from_parametric(
        point: impl Fn(T) -> Vec2<T>,
        velocity: Option<&dyn Fn(T) -> Vec2<T>>,
        n: usize,
    ) -> Result<Self> {
        assert!(n >= 8, "curve sampling too coarse");
        let dense = 8 * n;
        let mut dpts = Vec::with_capacity(dense + 1);
        for k in 0..=dense {
            dpts.push(point(T::real(k as f64 / dense as f64)));
        }
        // cumulative chord length over the dense polyline
        let mut cum = Vec::with_capacity(dense + 1);
        let mut acc = T::zero();
        cum.push(acc);
        for k in 1..=dense {
            acc += dpts[k].dist(dpts[k - 1]);
            cum.push(acc);
        }
        let length = acc;
        if !(length > T::zero()) {
            return Err(PlateError::InvalidGeometry("curve has zero length".into()));
        }

        // invert s(t) at uniform arc positions
        let mut params = Vec::with_capacity(n);
        let mut seg = 0usize;
        for j in 0..n {
            let target = length * T::real(j as f64 / n as f64);
            while seg + 1 < cum.len() && cum[seg + 1] < target {
                seg += 1;
            }
            let denom = cum[seg + 1] - cum[seg];
            let frac = if denom > T::zero() {
                (target - cum[seg]) / denom
            } else {
                T::zero()
            };
            params.push(T::real(1.0 / dense as f64) * (T::real(seg as f64) + frac));
        }

        let pts: Vec<Vec2<T>> = params.iter().map(|&t| point(t)).collect();
        let tangents: Vec<Vec2<T>> = match velocity {
            Some(v) => params.iter().map(|&t| v(t).normalized()).collect(),
            None => (0..n)
                .map(|j| (pts[(j + 1) % n] - pts[(j + n - 1) % n]).normalized())
                .collect(),
        };
        Self::from_samples(pts, tangents, length)
    }

    /// Resamples a closed polyline (given by its vertices, in order) to `n`
    /// uniform arc-length samples. Tangents come from central differences.
    pub fn from_polyline(vertices: &[Vec2<T>], n: usize) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(PlateError::InvalidGeometry(
                "closed polyline needs at least 3 vertices".into(),
            ));
        }
        let m = vertices.len();
        let point = |t: T| -> Vec2<T> {
            let total = T::real(m as f64);
            let pos = t * total;
            let i = pos.floor().as_f64() as usize % m;
            let frac = pos - pos.floor();
            let a = vertices[i];
            let b = vertices[(i + 1) % m];
            a + (b - a).scaled(frac)
        };
        Self::from_parametric(point, None, n)
    }

    fn from_samples(pts: Vec<Vec2<T>>, mut tangents: Vec<Vec2<T>>, length: T) -> Result<Self> {
        // enforce counterclockwise orientation (shoelace)
        let n = pts.len();
        let mut area2 = T::zero();
        for i in 0..n {
            let a = pts[i];
            let b = pts[(i + 1) % n];
            area2 += a.x * b.y - b.x * a.y;
        }
        if area2 == T::zero() {
            return Err(PlateError::InvalidGeometry("degenerate closed curve".into()));
        }
        if area2 < T::zero() {
            let mut rp: Vec<Vec2<T>> = pts.into_iter().rev().collect();
            rp.rotate_right(1); // keep sample 0 at the same location
            tangents = tangents.into_iter().rev().map(|t| -t).collect();
            tangents.rotate_right(1);
            return Ok(SampledCurve {
                pts: rp,
                tangents,
                length,
            });
        }
        Ok(SampledCurve {
            pts,
            tangents,
            length,
        })
    }

    pub fn n(&self) -> usize {
        self.pts.len()
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn points(&self) -> &[Vec2<T>] {
        &self.pts
    }

    /// Arc length of sample `i`.
    pub fn arc_of(&self, i: usize) -> T {
        self.length * T::real(i as f64 / self.n() as f64)
    }

    pub fn point_at_index(&self, i: usize) -> Vec2<T> {
        self.pts[i % self.n()]
    }

    pub fn tangent_at_index(&self, i: usize) -> Vec2<T> {
        self.tangents[i % self.n()]
    }

    /// Outward unit normal at sample `i` (curve is counterclockwise, so the
    /// outward normal is the tangent rotated by −π/2).
    pub fn outward_normal_at_index(&self, i: usize) -> Vec2<T> {
        -self.tangents[i % self.n()].perp()
    }

    /// Position at arc length `s` (wrapped into `[0, length)`).
    pub fn point_at_arc(&self, s: T) -> Vec2<T> {
        let (i, frac) = self.locate(s);
        let a = self.pts[i];
        let b = self.pts[(i + 1) % self.n()];
        a + (b - a).scaled(frac)
    }

    pub fn tangent_at_arc(&self, s: T) -> Vec2<T> {
        let (i, frac) = self.locate(s);
        let a = self.tangents[i];
        let b = self.tangents[(i + 1) % self.n()];
        (a + (b - a).scaled(frac)).normalized()
    }

    pub fn outward_normal_at_arc(&self, s: T) -> Vec2<T> {
        -self.tangent_at_arc(s).perp()
    }

    fn locate(&self, s: T) -> (usize, T) {
        let n = self.n();
        let step = self.length / T::real(n as f64);
        let mut u = s / step;
        let nt = T::real(n as f64);
        u = u - (u / nt).floor() * nt;
        let mut i = u.floor().as_f64() as usize;
        if i >= n {
            i = n - 1;
        }
        (i, u - T::real(i as f64))
    }

    /// Even-odd containment test against the sample polyline.
    pub fn encloses(&self, p: Vec2<T>) -> bool {
        let n = self.n();
        let mut inside = false;
        for i in 0..n {
            let a = self.pts[i];
            let b = self.pts[(i + 1) % n];
            if (a.y > p.y) != (b.y > p.y) {
                let t = (p.y - a.y) / (b.y - a.y);
                let xi = a.x + t * (b.x - a.x);
                if xi > p.x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Minimum distance from `p` to the sample polyline (segment-exact).
    pub fn distance_to(&self, p: Vec2<T>) -> T {
        let n = self.n();
        let mut best = T::infinity();
        for i in 0..n {
            let a = self.pts[i];
            let b = self.pts[(i + 1) % n];
            best = best.min(segment_distance(p, a, b));
        }
        best
    }

    /// Arc length of the point on the polyline closest to `p`.
    pub fn arc_near(&self, p: Vec2<T>) -> T {
        let n = self.n();
        let step = self.length / T::real(n as f64);
        let mut best = T::infinity();
        let mut arc = T::zero();
        for i in 0..n {
            let a = self.pts[i];
            let b = self.pts[(i + 1) % n];
            let ab = b - a;
            let len_sq = ab.norm_sq();
            let t = if len_sq > T::zero() {
                ((p - a).dot(ab) / len_sq).max(T::zero()).min(T::one())
            } else {
                T::zero()
            };
            let d = p.dist(a + ab.scaled(t));
            if d < best {
                best = d;
                arc = step * (T::real(i as f64) + t);
            }
        }
        arc
    }

    pub fn bbox(&self) -> (Vec2<T>, Vec2<T>) {
        let mut lo = self.pts[0];
        let mut hi = self.pts[0];
        for p in &self.pts {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    /// Diameter of the sample set (decimated to bound the quadratic cost;
    /// exact for convex shapes up to the sampling step).
    pub fn diameter(&self) -> T {
        let n = self.n();
        let stride = (n / 512).max(1);
        let mut d = T::zero();
        let idx: Vec<usize> = (0..n).step_by(stride).collect();
        for (k, &i) in idx.iter().enumerate() {
            for &j in &idx[k + 1..] {
                d = d.max(self.pts[i].dist(self.pts[j]));
            }
        }
        d
    }

    /// True if any two non-adjacent sample segments intersect.
    pub fn self_intersects(&self) -> bool {
        let n = self.n();
        for i in 0..n {
            let a1 = self.pts[i];
            let a2 = self.pts[(i + 1) % n];
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue; // shares the wrap-around vertex
                }
                let b1 = self.pts[j];
                let b2 = self.pts[(j + 1) % n];
                if segments_intersect(a1, a2, b1, b2) {
                    return true;
                }
            }
        }
        false
    }

    /// Crossings of the polyline with the horizontal line `y`, sorted by x.
    /// Used by the scanline rasterizer.
    pub fn row_crossings(&self, y: T) -> Vec<T> {
        let n = self.n();
        let mut xs = Vec::new();
        for i in 0..n {
            let a = self.pts[i];
            let b = self.pts[(i + 1) % n];
            if (a.y > y) != (b.y > y) {
                let t = (y - a.y) / (b.y - a.y);
                xs.push(a.x + t * (b.x - a.x));
            }
        }
        xs.sort_by(|p, q| p.partial_cmp(q).expect("finite crossing"));
        xs
    }
}

fn segment_distance<T: Scalar>(p: Vec2<T>, a: Vec2<T>, b: Vec2<T>) -> T {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == T::zero() {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len_sq).max(T::zero()).min(T::one());
    p.dist(a + ab.scaled(t))
}

fn orient<T: Scalar>(a: Vec2<T>, b: Vec2<T>, c: Vec2<T>) -> T {
    (b - a).perp().dot(c - a)
}

fn segments_intersect<T: Scalar>(a1: Vec2<T>, a2: Vec2<T>, b1: Vec2<T>, b2: Vec2<T>) -> bool {
    let d1 = orient(b1, b2, a1);
    let d2 = orient(b1, b2, a2);
    let d3 = orient(a1, a2, b1);
    let d4 = orient(a1, a2, b2);
    ((d1 > T::zero() && d2 < T::zero()) || (d1 < T::zero() && d2 > T::zero()))
        && ((d3 > T::zero() && d4 < T::zero()) || (d3 < T::zero() && d4 > T::zero()))
}

/// One round of Chaikin corner cutting on a closed polygon.
fn chaikin_round<T: Scalar>(pts: &[Vec2<T>]) -> Vec<Vec2<T>> {
    let n = pts.len();
    let mut out = Vec::with_capacity(2 * n);
    let q = T::real(0.25);
    let r = T::real(0.75);
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        out.push(a.scaled(r) + b.scaled(q));
        out.push(a.scaled(q) + b.scaled(r));
    }
    out
}

/// Closed polygon smoothed by repeated corner cutting, then resampled.
pub fn smoothed_polygon<T: Scalar>(
    vertices: &[Vec2<T>],
    rounds: usize,
    n: usize,
) -> Result<SampledCurve<T>> {
    if vertices.len() < 3 {
        return Err(PlateError::InvalidGeometry(
            "polygon needs at least 3 vertices".into(),
        ));
    }
    let mut pts = vertices.to_vec();
    for _ in 0..rounds {
        pts = chaikin_round(&pts);
    }
    let curve = SampledCurve::from_polyline(&pts, n)?;
    if curve.self_intersects() {
        return Err(PlateError::InvalidGeometry(
            "polygon boundary self-intersects".into(),
        ));
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_circle(n: usize) -> SampledCurve<f64> {
        SampledCurve::from_parametric(
            |t: f64| {
                let th = std::f64::consts::TAU * t;
                Vec2::new(th.cos(), th.sin())
            },
            Some(&|t: f64| {
                let th = std::f64::consts::TAU * t;
                Vec2::new(-th.sin(), th.cos())
            }),
            n,
        )
        .unwrap()
    }

    #[test]
    fn circle_length_and_normals() {
        let c = unit_circle(256);
        assert_relative_eq!(c.length(), std::f64::consts::TAU, max_relative = 1e-3);
        for i in (0..c.n()).step_by(17) {
            let p = c.point_at_index(i);
            let nrm = c.outward_normal_at_index(i);
            // outward normal of the unit circle is the position itself
            assert_relative_eq!(nrm.x, p.x, epsilon = 1e-6);
            assert_relative_eq!(nrm.y, p.y, epsilon = 1e-6);
            // τ = e3 × n
            let tau = c.tangent_at_index(i);
            assert_relative_eq!(tau.x, -nrm.y, epsilon = 1e-12);
            assert_relative_eq!(tau.y, nrm.x, epsilon = 1e-12);
        }
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let cw = SampledCurve::from_parametric(
            |t: f64| {
                let th = -std::f64::consts::TAU * t;
                Vec2::new(th.cos(), th.sin())
            },
            None,
            128,
        )
        .unwrap();
        let nrm = cw.outward_normal_at_index(0);
        let p = cw.point_at_index(0);
        assert!(nrm.dot(p) > 0.9);
    }

    #[test]
    fn containment_and_distance() {
        let c = unit_circle(256);
        assert!(c.encloses(Vec2::new(0.3, -0.2)));
        assert!(!c.encloses(Vec2::new(1.2, 0.0)));
        assert_relative_eq!(c.distance_to(Vec2::new(2.0, 0.0)), 1.0, epsilon = 1e-3);
        assert_relative_eq!(c.distance_to(Vec2::zero()), 1.0, epsilon = 1e-3);
    }

    #[test]
    fn arc_queries_wrap() {
        let c = unit_circle(256);
        let l = c.length();
        let p1 = c.point_at_arc(0.25 * l);
        let p2 = c.point_at_arc(1.25 * l);
        assert_relative_eq!(p1.x, p2.x, epsilon = 1e-12);
        assert_relative_eq!(p1.y, p2.y, epsilon = 1e-12);
    }

    #[test]
    fn diameter_of_circle_is_two() {
        let c = unit_circle(256);
        assert_relative_eq!(c.diameter(), 2.0, max_relative = 1e-2);
    }

    #[test]
    fn square_polygon_smoothing_keeps_area_reasonable_and_smooths_corners() {
        let sq = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let c = smoothed_polygon(&sq, 3, 256).unwrap();
        // corner cutting shortens the perimeter toward the B-spline limit ≈3.25
        assert!(c.length() < 4.0 && c.length() > 3.2, "length {}", c.length());
        assert!(c.encloses(Vec2::new(0.5, 0.5)));
        assert!(!c.encloses(Vec2::new(0.02, 0.02))); // corner got cut
    }

    #[test]
    fn bowtie_polygon_is_rejected() {
        let bow = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ];
        assert!(smoothed_polygon(&bow, 0, 64).is_err());
    }

    #[test]
    fn row_crossings_pair_up() {
        let c = unit_circle(256);
        let xs = c.row_crossings(0.0);
        assert_eq!(xs.len(), 2);
        assert_relative_eq!(xs[0], -1.0, epsilon = 1e-3);
        assert_relative_eq!(xs[1], 1.0, epsilon = 1e-3);
        assert!(c.row_crossings(1.5).is_empty());
    }

    #[test]
    fn arc_near_inverts_point_at_arc() {
        let c = unit_circle(2048);
        for k in 0..17 {
            let s = c.length() * k as f64 / 17.0;
            let p = c.point_at_arc(s);
            assert_relative_eq!(c.arc_near(p), s, epsilon = 1e-3);
        }
        // off-curve points project to the nearest boundary point
        let s = c.arc_near(Vec2::new(0.0, 2.0));
        assert_relative_eq!(s, c.length() * 0.25, epsilon = 1e-3);
    }
}
