//! The plate domain, its accessible boundary arc, and the a-priori checks
//! the stability theory is conditioned on.

use super::curve::{smoothed_polygon, SampledCurve};
use super::region::GridRegion;
use super::star::{StarInclusion, StarShape};
use super::{Region2, Vec2};
use crate::error::{PlateError, Result};
use crate::scalar::Scalar;

/// Outer boundary description.
#[derive(Debug, Clone)]
pub enum BoundaryShape<T> {
    /// Trigonometric-polynomial star boundary (a circle when only the
    /// constant coefficient is present).
    Star(StarShape<T>),
    /// Closed polygon smoothed by `rounds` of corner cutting.
    SmoothedPolygon { vertices: Vec<Vec2<T>>, rounds: usize },
}

/// Dimensionless a-priori constants (all lengths in units of `r0`).
#[derive(Debug, Clone, Copy)]
pub struct AprioriConstants<T> {
    /// Lipschitz slope bound of the boundary graph representation; also the
    /// cone-opening parameter.
    pub m0: T,
    /// Diameter bound: `diam(Ω) ≤ m1`.
    pub m1: T,
    /// Accessible-arc smallness: `|Σ| ≤ (1 − delta0)·|∂Ω|`.
    pub delta0: T,
    /// Cap on sampled boundary curvature and its first four arc-length
    /// divided differences (smoothness proxy).
    pub reg_bound: T,
}

impl<T: Scalar> Default for AprioriConstants<T> {
    fn default() -> Self {
        AprioriConstants {
            m0: T::one(),
            m1: T::real(10.0),
            delta0: T::real(0.3),
            reg_bound: T::real(100.0),
        }
    }
}

/// Bounded plate domain with a distinguished accessible sub-arc `Σ ⊂ ∂Ω`.
#[derive(Debug, Clone)]
pub struct PlanarDomain<T> {
    shape: BoundaryShape<T>,
    curve: SampledCurve<T>,
    /// Arc-length fractions `0 ≤ start < end ≤ 1` delimiting `Σ`.
    sigma: (T, T),
    /// Arc-length fraction of the distinguished point `P0 ∈ Σ`.
    p0_frac: T,
    pub constants: AprioriConstants<T>,
}

/// Boundary sampling density for domains.
pub const DOMAIN_SAMPLES: usize = 2048;

impl<T: Scalar> PlanarDomain<T> {
    /// Builds a domain; `p0_frac` defaults to the midpoint of `Σ`.
    pub fn new(
        shape: BoundaryShape<T>,
        sigma: (T, T),
        p0_frac: Option<T>,
        constants: AprioriConstants<T>,
    ) -> Result<Self> {
        if !(sigma.0 >= T::zero() && sigma.0 < sigma.1 && sigma.1 <= T::one()) {
            return Err(PlateError::InvalidGeometry(format!(
                "accessible arc fractions must satisfy 0 <= start < end <= 1, got ({}, {})",
                sigma.0, sigma.1
            )));
        }
        let curve = match &shape {
            BoundaryShape::Star(s) => {
                if !(s.min_radius() > T::zero()) {
                    return Err(PlateError::InvalidGeometry(
                        "outer boundary radius must stay positive".into(),
                    ));
                }
                s.to_curve(DOMAIN_SAMPLES)?
            }
            BoundaryShape::SmoothedPolygon { vertices, rounds } => {
                smoothed_polygon(vertices, *rounds, DOMAIN_SAMPLES)?
            }
        };
        let p0 = p0_frac.unwrap_or_else(|| (sigma.0 + sigma.1) * T::real(0.5));
        if p0 < sigma.0 || p0 > sigma.1 {
            return Err(PlateError::InvalidGeometry(
                "distinguished point must lie on the accessible arc".into(),
            ));
        }
        Ok(PlanarDomain {
            shape,
            curve,
            sigma,
            p0_frac: p0,
            constants,
        })
    }

    /// Disc of the given radius centered at `center`, with the accessible
    /// arc on the given fraction interval.
    pub fn disc(center: Vec2<T>, radius: T, sigma: (T, T)) -> Result<Self> {
        Self::new(
            BoundaryShape::Star(StarShape::circle(center, radius)),
            sigma,
            None,
            AprioriConstants::default(),
        )
    }

    pub fn shape(&self) -> &BoundaryShape<T> {
        &self.shape
    }

    pub fn sigma(&self) -> (T, T) {
        self.sigma
    }

    pub fn p0_frac(&self) -> T {
        self.p0_frac
    }

    pub fn perimeter(&self) -> T {
        self.curve.length()
    }

    pub fn sigma_length(&self) -> T {
        (self.sigma.1 - self.sigma.0) * self.perimeter()
    }

    pub fn arc_frac_in_sigma(&self, frac: T) -> bool {
        frac >= self.sigma.0 && frac <= self.sigma.1
    }

    pub fn diameter(&self) -> T {
        self.curve.diameter()
    }

    pub fn bbox(&self) -> (Vec2<T>, Vec2<T>) {
        self.curve.bbox()
    }

    /// Rasterizes `Ω` to a cell mask with the given spacing and padding.
    /// Polyline boundaries use a scanline fill; star boundaries use the
    /// analytic containment test per cell.
    pub fn rasterize(&self, h: T, pad: usize) -> GridRegion<T> {
        let (lo, hi) = self.bbox();
        match &self.shape {
            BoundaryShape::Star(s) => GridRegion::from_fn(lo, hi, h, pad, |p| {
                let v = p - s.center;
                let rho = v.norm();
                rho < s.radius(v.angle())
            }),
            BoundaryShape::SmoothedPolygon { .. } => {
                let mut region = GridRegion::from_fn(lo, hi, h, pad, |_| false);
                for j in 0..region.ny {
                    let y = region.cell_center(0, j).y;
                    let xs = self.curve.row_crossings(y);
                    let mut k = 0;
                    for i in 0..region.nx {
                        let x = region.cell_center(i, j).x;
                        while k < xs.len() && xs[k] <= x {
                            k += 1;
                        }
                        // odd number of crossings to the left → inside
                        if k % 2 == 1 {
                            region.set(i, j, true);
                        }
                    }
                }
                region
            }
        }
    }
}

impl<T: Scalar> Region2<T> for PlanarDomain<T> {
    fn contains(&self, p: Vec2<T>) -> bool {
        match &self.shape {
            BoundaryShape::Star(s) => s.contains(p),
            BoundaryShape::SmoothedPolygon { .. } => self.curve.encloses(p),
        }
    }

    fn boundary(&self) -> &SampledCurve<T> {
        &self.curve
    }
}

/// One a-priori condition: the measured quantity, its admissible bound, and
/// whether the comparison passed.
#[derive(Debug, Clone, Copy)]
pub struct AprioriCheck<T> {
    pub ok: bool,
    pub measured: T,
    pub bound: T,
}

impl<T: Scalar> AprioriCheck<T> {
    fn at_most(measured: T, bound: T) -> Self {
        AprioriCheck {
            ok: measured <= bound,
            measured,
            bound,
        }
    }

    fn at_least(measured: T, bound: T) -> Self {
        AprioriCheck {
            ok: measured >= bound,
            measured,
            bound,
        }
    }

    /// Signed slack of the condition (positive when satisfied).
    pub fn margin(&self) -> T {
        if self.ok {
            (self.measured - self.bound).abs()
        } else {
            -(self.measured - self.bound).abs()
        }
    }
}

/// Outcome of [`check_apriori`]: every admissibility condition with its
/// measured margin.
#[derive(Debug, Clone)]
pub struct AprioriReport<T> {
    /// `diam(Ω) ≤ m1` (unit: `r0`).
    pub diameter: AprioriCheck<T>,
    /// `dist(D, ∂Ω) ≥ 1` (compactness of the inclusion in `Ω`).
    pub clearance: Option<AprioriCheck<T>>,
    /// Sampled curvature of `∂Ω` plus divided differences ≤ `reg_bound`.
    pub outer_regularity: AprioriCheck<T>,
    /// Sampled curvature of `∂D` plus divided differences ≤ `reg_bound`.
    pub inclusion_regularity: Option<AprioriCheck<T>>,
    /// Minimum sampled star radius of the inclusion (must be positive).
    pub inclusion_radius: Option<AprioriCheck<T>>,
    /// The boundary window of width 1 and depth `2·m0` around `P0` must cut
    /// `∂Ω` only inside `Σ` (measured: fraction of window samples in `Σ`).
    pub accessible_window: AprioriCheck<T>,
    /// `|Σ| ≤ (1 − delta0)·|∂Ω|`.
    pub sigma_fraction: AprioriCheck<T>,
}

impl<T: Scalar> AprioriReport<T> {
    pub fn all_ok(&self) -> bool {
        self.diameter.ok
            && self.clearance.map_or(true, |c| c.ok)
            && self.outer_regularity.ok
            && self.inclusion_regularity.map_or(true, |c| c.ok)
            && self.inclusion_radius.map_or(true, |c| c.ok)
            && self.accessible_window.ok
            && self.sigma_fraction.ok
    }

    /// Human-readable list of failed conditions.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut push = |name: &str, c: &AprioriCheck<T>| {
            if !c.ok {
                out.push(format!("{name}: measured {} vs bound {}", c.measured, c.bound));
            }
        };
        push("diameter", &self.diameter);
        if let Some(c) = &self.clearance {
            push("clearance", c);
        }
        push("outer-regularity", &self.outer_regularity);
        if let Some(c) = &self.inclusion_regularity {
            push("inclusion-regularity", c);
        }
        if let Some(c) = &self.inclusion_radius {
            push("inclusion-radius", c);
        }
        push("accessible-window", &self.accessible_window);
        push("sigma-fraction", &self.sigma_fraction);
        out
    }
}

fn curvature_regularity<T: Scalar>(shape: &StarShape<T>, curve_len: T) -> T {
    // curvature sampled at uniform angles; divided differences approximate
    // arc-length derivatives of κ up to order four
    let n = 256usize;
    let mut kappa: Vec<T> = (0..n)
        .map(|j| shape.curvature(T::real(std::f64::consts::TAU * j as f64 / n as f64)))
        .collect();
    let ds = curve_len / T::real(n as f64);
    let mut worst = kappa.iter().fold(T::zero(), |m, &k| m.max(k.abs()));
    for _order in 0..4 {
        let next: Vec<T> = (0..n)
            .map(|j| (kappa[(j + 1) % n] - kappa[j]) / ds)
            .collect();
        kappa = next;
        worst = worst.max(kappa.iter().fold(T::zero(), |m, &k| m.max(k.abs())));
    }
    worst
}

fn polyline_regularity<T: Scalar>(curve: &SampledCurve<T>) -> T {
    // turning-angle curvature estimate on the resampled polyline
    let n = curve.n();
    let ds = curve.length() / T::real(n as f64);
    let mut kappa: Vec<T> = (0..n)
        .map(|j| {
            let t0 = curve.tangent_at_index(j);
            let t1 = curve.tangent_at_index(j + 1);
            let cross = t0.x * t1.y - t0.y * t1.x;
            cross.asin() / ds
        })
        .collect();
    let mut worst = kappa.iter().fold(T::zero(), |m, &k| m.max(k.abs()));
    // polyline curvature is noisy at the sampling scale; only two divided
    // differences are meaningful here
    for _order in 0..2 {
        let next: Vec<T> = (0..n)
            .map(|j| (kappa[(j + 1) % n] - kappa[j]) / ds)
            .collect();
        kappa = next;
        worst = worst.max(kappa.iter().fold(T::zero(), |m, &k| m.max(k.abs())));
    }
    worst
}

/// Measures every a-priori admissibility condition for a domain and an
/// optional inclusion. All quantities are in units of `r0`.
pub fn check_apriori<T: Scalar>(
    domain: &PlanarDomain<T>,
    inclusion: Option<&StarInclusion<T>>,
) -> AprioriReport<T> {
    let c = domain.constants;
    let diameter = AprioriCheck::at_most(domain.diameter(), c.m1);

    let outer_reg = match &domain.shape {
        BoundaryShape::Star(s) => curvature_regularity(s, domain.perimeter()),
        BoundaryShape::SmoothedPolygon { .. } => polyline_regularity(domain.boundary()),
    };
    let outer_regularity = AprioriCheck::at_most(outer_reg, c.reg_bound);

    let (clearance, inclusion_regularity, inclusion_radius) = match inclusion {
        None => (None, None, None),
        Some(inc) => {
            let mut min_d = T::infinity();
            for p in inc.boundary().points() {
                min_d = min_d.min(domain.boundary().distance_to(*p));
            }
            let clear = AprioriCheck::at_least(min_d, T::one());
            let reg = AprioriCheck::at_most(
                curvature_regularity(inc.shape(), inc.boundary().length()),
                c.reg_bound,
            );
            let rad = AprioriCheck::at_least(inc.shape().min_radius(), T::zero());
            (Some(clear), Some(reg), Some(rad))
        }
    };

    // accessible window: boundary points inside the rectangle of half-width 1
    // (tangential) and half-depth 2·m0 (normal) at P0 must belong to Σ
    let p0_arc = domain.p0_frac * domain.perimeter();
    let p0 = domain.boundary().point_at_arc(p0_arc);
    let tau = domain.boundary().tangent_at_arc(p0_arc);
    let nrm = -tau.perp(); // outward
    let mut in_window = 0usize;
    let mut in_window_and_sigma = 0usize;
    let nb = domain.boundary().n();
    for i in 0..nb {
        let q = domain.boundary().point_at_index(i) - p0;
        let xt = q.dot(tau);
        let xn = q.dot(nrm);
        if xt.abs() < T::one() && xn.abs() < T::real(2.0) * c.m0 {
            in_window += 1;
            let frac = T::real(i as f64 / nb as f64);
            if domain.arc_frac_in_sigma(frac) {
                in_window_and_sigma += 1;
            }
        }
    }
    let frac_in = if in_window == 0 {
        T::zero()
    } else {
        T::real(in_window_and_sigma as f64 / in_window as f64)
    };
    let accessible_window = AprioriCheck::at_least(frac_in, T::one());

    let sigma_fraction = AprioriCheck::at_most(
        domain.sigma.1 - domain.sigma.0,
        T::one() - c.delta0,
    );

    AprioriReport {
        diameter,
        clearance,
        outer_regularity,
        inclusion_regularity,
        inclusion_radius,
        accessible_window,
        sigma_fraction,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn disc_domain() -> PlanarDomain<f64> {
        PlanarDomain::disc(Vec2::zero(), 3.0, (0.1, 0.45)).unwrap()
    }

    #[test]
    fn disc_domain_basics() {
        let d = disc_domain();
        assert_relative_eq!(d.perimeter(), std::f64::consts::TAU * 3.0, max_relative = 1e-4);
        assert_relative_eq!(d.diameter(), 6.0, max_relative = 1e-2);
        assert!(d.contains(Vec2::new(2.9, 0.0)));
        assert!(!d.contains(Vec2::new(3.1, 0.0)));
        assert_relative_eq!(d.sigma_length(), 0.35 * d.perimeter(), max_relative = 1e-12);
    }

    #[test]
    fn sigma_validation() {
        assert!(PlanarDomain::disc(Vec2::zero(), 3.0, (0.5, 0.5)).is_err());
        assert!(PlanarDomain::disc(Vec2::zero(), 3.0, (0.2, 1.1)).is_err());
        let bad_p0 = PlanarDomain::new(
            BoundaryShape::Star(StarShape::circle(Vec2::zero(), 3.0)),
            (0.1, 0.3),
            Some(0.8),
            AprioriConstants::default(),
        );
        assert!(bad_p0.is_err());
    }

    #[test]
    fn rasterization_area_matches_disc() {
        let d = disc_domain();
        let r = d.rasterize(0.05, 3);
        assert_relative_eq!(r.area(), std::f64::consts::PI * 9.0, max_relative = 0.01);
    }

    #[test]
    fn polygon_rasterization_matches_pointwise_containment() {
        let square = BoundaryShape::SmoothedPolygon {
            vertices: vec![
                Vec2::new(-1.0, -1.0),
                Vec2::new(1.0, -1.0),
                Vec2::new(1.0, 1.0),
                Vec2::new(-1.0, 1.0),
            ],
            rounds: 2,
        };
        let d = PlanarDomain::new(square, (0.0, 0.25), None, AprioriConstants::default()).unwrap();
        let r = d.rasterize(0.04, 3);
        for i in (0..r.nx).step_by(3) {
            for j in (0..r.ny).step_by(3) {
                let c = r.cell_center(i, j);
                if d.boundary().distance_to(c) > 0.08 {
                    assert_eq!(r.get(i, j), d.contains(c), "at {c:?}");
                }
            }
        }
    }

    #[test]
    fn apriori_on_a_well_posed_instance_passes() {
        let d = disc_domain();
        let inc = StarInclusion::disc(Vec2::new(0.3, 0.2), 0.8).unwrap();
        let rep = check_apriori(&d, Some(&inc));
        assert!(rep.all_ok(), "failures: {:?}", rep.failures());
        let clr = rep.clearance.unwrap();
        // distance from the inclusion boundary to ∂Ω: 3 − |c| − 0.8
        let expect = 3.0 - (0.3f64.hypot(0.2)) - 0.8;
        assert_relative_eq!(clr.measured, expect, max_relative = 1e-2);
    }

    #[test]
    fn apriori_flags_an_inclusion_hugging_the_boundary() {
        let d = disc_domain();
        let inc = StarInclusion::disc(Vec2::new(1.8, 0.0), 0.5).unwrap();
        let rep = check_apriori(&d, Some(&inc));
        assert!(!rep.all_ok());
        let clr = rep.clearance.unwrap();
        assert!(!clr.ok);
        assert!(clr.margin() < 0.0);
        assert_relative_eq!(clr.measured, 0.7, max_relative = 1e-2);
    }

    #[test]
    fn apriori_flags_an_oversized_accessible_arc() {
        let d = PlanarDomain::disc(Vec2::zero(), 3.0, (0.05, 0.9)).unwrap();
        let rep = check_apriori(&d, None);
        assert!(!rep.sigma_fraction.ok);
    }

    #[test]
    fn apriori_window_fails_when_p0_sits_near_the_arc_edge() {
        // P0 at the very start of Σ: the window around it sticks out of Σ
        let d = PlanarDomain::new(
            BoundaryShape::Star(StarShape::circle(Vec2::zero(), 3.0)),
            (0.1, 0.45),
            Some(0.105),
            AprioriConstants::default(),
        )
        .unwrap();
        let rep = check_apriori(&d, None);
        assert!(!rep.accessible_window.ok);
        assert!(rep.accessible_window.measured < 1.0);
    }
}
