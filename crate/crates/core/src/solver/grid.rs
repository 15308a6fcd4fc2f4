//! Node classification and quadrature weights on the uniform solver grid.

use crate::error::{PlateError, Result};
use crate::geometry::{BoundaryShape, PlanarDomain, Region2, StarInclusion, Vec2};
use crate::scalar::Scalar;
use std::collections::HashMap;

/// Role of a grid node in the discrete system.
///
/// The clamped condition on `∂D` is not imposed at nodes: the node layer of
/// `D̄` bordering the plate stays free (the "collar", letting boundary
/// stencils see a smooth extension of the field), and the constraint is
/// applied on the true curve by penalty functionals at assembly time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    /// Outside the plate (beyond `∂Ω`); carries no value.
    Outside,
    /// Unknown nodal displacement; payload is the dof index.
    Free(usize),
    /// Deep inside the inclusion; carries no value and no equation.
    Dropped,
}

/// One quadrature site of the energy: a node whose full 3×3 stencil is
/// defined, weighted by the area of its cell inside `Ω∖D̄` (plus any
/// boundary-band area reassigned to it).
#[derive(Debug, Clone, Copy)]
pub struct EvalPoint<T> {
    pub node: usize,
    pub area: T,
}

/// Uniform Cartesian grid over `Ω` with inclusion-aware node classification.
///
/// Node `(i, j)` sits at `origin + (i·h, j·h)` and is indexed `i·ny + j`.
#[derive(Debug, Clone)]
pub struct PlateGrid<T: Scalar> {
    domain: PlanarDomain<T>,
    inclusion: Option<StarInclusion<T>>,
    pub origin: Vec2<T>,
    pub h: T,
    pub nx: usize,
    pub ny: usize,
    pub resolution: usize,
    class: Vec<NodeClass>,
    dofs: Vec<usize>,
    collar: Vec<usize>,
    evals: Vec<EvalPoint<T>>,
    lost_area: T,
    pruned: usize,
}

/// Node and quadrature counts, reported after classification.
#[derive(Debug, Clone, Copy)]
pub struct GridCounts {
    pub free: usize,
    /// Free nodes inside `D̄` (the extension collar along `∂D`).
    pub collar: usize,
    pub dropped: usize,
    pub evals: usize,
    /// Free nodes discarded because no quadrature stencil reaches them.
    pub pruned: usize,
}

/// Minimum clearance between `∂D` and `∂Ω`, in cells.
pub const MIN_CLEARANCE_CELLS: usize = 8;

/// Subsamples per axis when measuring the area of a boundary-cut cell.
const CUT_SUBSAMPLES: usize = 8;

impl<T: Scalar> PlateGrid<T> {
    pub fn domain(&self) -> &PlanarDomain<T> {
        &self.domain
    }

    pub fn inclusion(&self) -> Option<&StarInclusion<T>> {
        self.inclusion.as_ref()
    }

    pub fn node_index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    pub fn node_point(&self, i: usize, j: usize) -> Vec2<T> {
        Vec2::new(
            self.origin.x + self.h * T::real(i as f64),
            self.origin.y + self.h * T::real(j as f64),
        )
    }

    pub fn point_of(&self, node: usize) -> Vec2<T> {
        self.node_point(node / self.ny, node % self.ny)
    }

    pub fn class(&self, i: usize, j: usize) -> NodeClass {
        self.class[self.node_index(i, j)]
    }

    pub fn class_of(&self, node: usize) -> NodeClass {
        self.class[node]
    }

    /// True when the node carries a value.
    pub fn is_defined(&self, i: isize, j: isize) -> bool {
        if i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny {
            return false;
        }
        matches!(
            self.class[i as usize * self.ny + j as usize],
            NodeClass::Free(_)
        )
    }

    /// Dof index → node index.
    pub fn dof_nodes(&self) -> &[usize] {
        &self.dofs
    }

    pub fn dof_count(&self) -> usize {
        self.dofs.len()
    }

    pub fn eval_points(&self) -> &[EvalPoint<T>] {
        &self.evals
    }

    /// Total quadrature area (equals the raster area of `Ω∖D̄` up to the
    /// sliver area that could not be reassigned).
    pub fn quadrature_area(&self) -> T {
        self.evals.iter().fold(T::zero(), |s, e| s + e.area)
    }

    /// Boundary-sliver area that found no nearby eval point.
    pub fn lost_area(&self) -> T {
        self.lost_area
    }

    pub fn counts(&self) -> GridCounts {
        let mut free = 0;
        let mut dropped = 0;
        for c in &self.class {
            match c {
                NodeClass::Free(_) => free += 1,
                NodeClass::Dropped => dropped += 1,
                NodeClass::Outside => {}
            }
        }
        GridCounts {
            free,
            collar: self.collar.len(),
            dropped,
            evals: self.evals.len(),
            pruned: self.pruned,
        }
    }

    /// Free nodes inside `D̄` (the extension collar along `∂D`).
    pub fn collar_nodes(&self) -> &[usize] {
        &self.collar
    }

    /// True when `p` lies in the plate region `Ω∖D̄`.
    pub fn in_plate(&self, p: Vec2<T>) -> bool {
        self.domain.contains(p)
            && self
                .inclusion
                .as_ref()
                .map_or(true, |inc| !inc.shape().contains(p))
    }
}

/// Containment queries against the outer boundary, batched per horizontal
/// line so polygon boundaries stay affordable on large grids.
struct DomainRaster<'a, T: Scalar> {
    domain: &'a PlanarDomain<T>,
    analytic: bool,
    rows: HashMap<i64, Vec<T>>,
    scale: T,
}

impl<'a, T: Scalar> DomainRaster<'a, T> {
    fn new(domain: &'a PlanarDomain<T>, h: T) -> Self {
        let analytic = matches!(domain.shape(), BoundaryShape::Star(_));
        DomainRaster {
            domain,
            analytic,
            rows: HashMap::new(),
            // quantization fine enough to separate subsample rows
            scale: T::real(64.0) / h,
        }
    }

    fn contains(&mut self, p: Vec2<T>) -> bool {
        if self.analytic {
            return self.domain.contains(p);
        }
        let key = (p.y * self.scale).round().as_f64() as i64;
        let curve = self.domain.boundary();
        let xs = self
            .rows
            .entry(key)
            .or_insert_with(|| curve.row_crossings(p.y));
        // odd number of crossings strictly left of p ⇒ inside
        let mut cnt = 0;
        for x in xs.iter() {
            if *x <= p.x {
                cnt += 1;
            } else {
                break;
            }
        }
        cnt % 2 == 1
    }
}

/// Builds the classified grid. `resolution` is cells per unit length
/// (per `r0`).
pub fn build_grid<T: Scalar>(
    domain: &PlanarDomain<T>,
    inclusion: Option<&StarInclusion<T>>,
    resolution: usize,
) -> Result<PlateGrid<T>> {
    if resolution < 8 {
        return Err(PlateError::Resolution(format!(
            "resolution {resolution}/r0 is below the minimum of 8"
        )));
    }
    let h = T::one() / T::real(resolution as f64);

    if let Some(inc) = inclusion {
        // compactness: the inclusion boundary must clear ∂Ω by at least
        // MIN_CLEARANCE_CELLS cells
        let mut clear = T::infinity();
        for p in inc.boundary().points() {
            if !domain.contains(*p) {
                return Err(PlateError::InvalidGeometry(
                    "inclusion is not contained in the domain".into(),
                ));
            }
            clear = clear.min(domain.boundary().distance_to(*p));
        }
        let min_clear = T::real(MIN_CLEARANCE_CELLS as f64) * h;
        if clear < min_clear {
            return Err(PlateError::Resolution(format!(
                "only {:.1} cells of clearance between the inclusion and the outer \
                 boundary (need {MIN_CLEARANCE_CELLS}); raise the resolution or shrink \
                 the inclusion",
                (clear / h).as_f64()
            )));
        }
    }

    // nodes sit on the absolute lattice Z²·h (snapped, not bbox-anchored): a
    // boundary at a half-integer multiple of h then falls midway between
    // nodes at every resolution, and grids of different resolutions nest
    let (lo, hi) = domain.bbox();
    let origin = Vec2::new(
        ((lo.x / h).floor() - T::real(2.0)) * h,
        ((lo.y / h).floor() - T::real(2.0)) * h,
    );
    let nx = ((hi.x - origin.x) / h).ceil().as_f64() as usize + 3;
    let ny = ((hi.y - origin.y) / h).ceil().as_f64() as usize + 3;

    let mut raster = DomainRaster::new(domain, h);
    let node_pt = |i: usize, j: usize| {
        Vec2::new(
            origin.x + h * T::real(i as f64),
            origin.y + h * T::real(j as f64),
        )
    };

    // first pass: inside/outside and inclusion membership
    #[derive(Clone, Copy, PartialEq)]
    enum Raw {
        Out,
        Plate,
        InclusionBody,
    }
    let mut raw = vec![Raw::Out; nx * ny];
    for i in 0..nx {
        for j in 0..ny {
            let p = node_pt(i, j);
            if !raster.contains(p) {
                continue;
            }
            raw[i * ny + j] = match inclusion {
                Some(inc) if inc.shape().contains(p) => Raw::InclusionBody,
                _ => Raw::Plate,
            };
        }
    }

    // the inclusion body keeps one free node layer along ∂D (the collar, so
    // boundary stencils see a smooth extension of the plate field); deeper
    // nodes are dropped
    let neighbors8 = |i: usize, j: usize| {
        let mut out = [(0usize, 0usize); 8];
        let mut n = 0;
        for di in -1i64..=1 {
            for dj in -1i64..=1 {
                if di == 0 && dj == 0 {
                    continue;
                }
                let a = i as i64 + di;
                let b = j as i64 + dj;
                if a >= 0 && b >= 0 && (a as usize) < nx && (b as usize) < ny {
                    out[n] = (a as usize, b as usize);
                    n += 1;
                }
            }
        }
        (out, n)
    };

    let mut class = vec![NodeClass::Outside; nx * ny];
    let mut has_collar = false;
    for i in 0..nx {
        for j in 0..ny {
            let k = i * ny + j;
            if raw[k] != Raw::InclusionBody {
                continue;
            }
            let (nbrs, n) = neighbors8(i, j);
            let mut touches_plate = false;
            for &(a, b) in &nbrs[..n] {
                match raw[a * ny + b] {
                    Raw::Plate => touches_plate = true,
                    Raw::Out => {
                        return Err(PlateError::InvalidGeometry(
                            "inclusion node adjacent to the outer boundary; \
                             compactness violated"
                                .into(),
                        ))
                    }
                    Raw::InclusionBody => {}
                }
            }
            class[k] = if touches_plate {
                has_collar = true;
                NodeClass::Free(0)
            } else {
                NodeClass::Dropped
            };
        }
    }
    for k in 0..nx * ny {
        if raw[k] == Raw::Plate {
            class[k] = NodeClass::Free(0);
        }
    }
    if inclusion.is_some() && !has_collar {
        return Err(PlateError::Resolution(
            "inclusion contains no grid node; raise the resolution".into(),
        ));
    }

    // quadrature: area of every cell inside Ω∖D̄, attached to the cell's own
    // node when that node is an eval point, otherwise reassigned to the
    // nearest eval point; eval points live on plate nodes only
    let defined = |i: isize, j: isize| {
        if i < 0 || j < 0 || i as usize >= nx || j as usize >= ny {
            return false;
        }
        matches!(
            class[i as usize * ny + j as usize],
            NodeClass::Free(_)
        )
    };
    let mut is_eval = vec![false; nx * ny];
    let mut covered = vec![false; nx * ny];
    for i in 0..nx {
        for j in 0..ny {
            if raw[i * ny + j] != Raw::Plate || !defined(i as isize, j as isize) {
                continue;
            }
            let mut full = true;
            'st: for di in -1isize..=1 {
                for dj in -1isize..=1 {
                    if !defined(i as isize + di, j as isize + dj) {
                        full = false;
                        break 'st;
                    }
                }
            }
            if full {
                is_eval[i * ny + j] = true;
                for di in -1isize..=1 {
                    for dj in -1isize..=1 {
                        covered[(i as isize + di) as usize * ny + (j as isize + dj) as usize] =
                            true;
                    }
                }
            }
        }
    }

    // prune free nodes that no quadrature stencil reaches: they would carry
    // an equation of zeros (plate evals sit in their own stencil, so they are
    // never pruned and the selection above stays valid)
    let mut pruned = 0usize;
    for k in 0..nx * ny {
        if matches!(class[k], NodeClass::Free(_)) && !covered[k] {
            class[k] = match raw[k] {
                Raw::InclusionBody => NodeClass::Dropped,
                _ => NodeClass::Outside,
            };
            pruned += 1;
        }
    }
    let mut dofs = Vec::new();
    let mut collar = Vec::new();
    for k in 0..nx * ny {
        if matches!(class[k], NodeClass::Free(_)) {
            class[k] = NodeClass::Free(dofs.len());
            dofs.push(k);
            if raw[k] == Raw::InclusionBody {
                collar.push(k);
            }
        }
    }
    if dofs.is_empty() {
        return Err(PlateError::InvalidGeometry(
            "domain contains no usable grid node".into(),
        ));
    }

    let half = h * T::real(0.5);
    let cell_area = h * h;
    let mut in_plate_q = |p: Vec2<T>| -> bool {
        raster.contains(p) && inclusion.map_or(true, |inc| !inc.shape().contains(p))
    };

    let mut areas = vec![T::zero(); nx * ny];
    let mut lost_area = T::zero();
    let mut band: Vec<(usize, usize, T)> = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            let c = node_pt(i, j);
            let corners = [
                Vec2::new(c.x - half, c.y - half),
                Vec2::new(c.x + half, c.y - half),
                Vec2::new(c.x - half, c.y + half),
                Vec2::new(c.x + half, c.y + half),
            ];
            let inside = corners.iter().filter(|&&q| in_plate_q(q)).count();
            let area = if inside == 4 {
                cell_area
            } else if inside == 0 {
                // cheap reject: corners all out and center out → empty
                if !in_plate_q(c) {
                    continue;
                }
                subsample_area(c, h, &mut in_plate_q)
            } else {
                subsample_area(c, h, &mut in_plate_q)
            };
            if area <= T::zero() {
                continue;
            }
            if is_eval[i * ny + j] {
                areas[i * ny + j] += area;
            } else {
                band.push((i, j, area));
            }
        }
    }
    for (i, j, area) in band {
        // nearest eval node in growing rings
        let mut best: Option<(T, usize)> = None;
        'ring: for r in 1..=4isize {
            for di in -r..=r {
                for dj in -r..=r {
                    if di.abs() != r && dj.abs() != r {
                        continue;
                    }
                    let a = i as isize + di;
                    let b = j as isize + dj;
                    if a < 0 || b < 0 || a as usize >= nx || b as usize >= ny {
                        continue;
                    }
                    let k = a as usize * ny + b as usize;
                    if is_eval[k] {
                        let d2 = T::real((di * di + dj * dj) as f64);
                        if best.map_or(true, |(bd, _)| d2 < bd) {
                            best = Some((d2, k));
                        }
                    }
                }
            }
            if best.is_some() {
                break 'ring;
            }
        }
        match best {
            Some((_, k)) => areas[k] += area,
            None => lost_area += area,
        }
    }

    let evals: Vec<EvalPoint<T>> = (0..nx * ny)
        .filter(|&k| is_eval[k] && areas[k] > T::zero())
        .map(|k| EvalPoint {
            node: k,
            area: areas[k],
        })
        .collect();
    if evals.is_empty() {
        return Err(PlateError::Resolution(
            "no quadrature point has a fully defined stencil; domain too thin \
             for this resolution"
                .into(),
        ));
    }

    Ok(PlateGrid {
        domain: domain.clone(),
        inclusion: inclusion.cloned(),
        origin,
        h,
        nx,
        ny,
        resolution,
        class,
        dofs,
        collar,
        evals,
        lost_area,
        pruned,
    })
}

fn subsample_area<T: Scalar>(
    center: Vec2<T>,
    h: T,
    in_plate: &mut impl FnMut(Vec2<T>) -> bool,
) -> T {
    let n = CUT_SUBSAMPLES;
    let step = h / T::real(n as f64);
    let start = Vec2::new(
        center.x - h * T::real(0.5) + step * T::real(0.5),
        center.y - h * T::real(0.5) + step * T::real(0.5),
    );
    let mut count = 0usize;
    for a in 0..n {
        for b in 0..n {
            let q = Vec2::new(
                start.x + step * T::real(a as f64),
                start.y + step * T::real(b as f64),
            );
            if in_plate(q) {
                count += 1;
            }
        }
    }
    h * h * T::real(count as f64 / (n * n) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{AprioriConstants, BoundaryShape};
    use approx::assert_relative_eq;

    fn disc_domain(radius: f64) -> PlanarDomain<f64> {
        PlanarDomain::disc(Vec2::zero(), radius, (0.1, 0.45)).unwrap()
    }

    #[test]
    fn disc_in_disc_clearance_and_counts() {
        let dom = disc_domain(3.0);
        let inc = StarInclusion::disc(Vec2::new(0.3, 0.2), 0.8).unwrap();
        let g = build_grid(&dom, Some(&inc), 64).unwrap();
        let counts = g.counts();
        assert!(counts.collar > 0);
        assert!(counts.dropped > 0);
        assert!(counts.free > counts.collar);
        // clearance between boundaries ≈ 3 − |center| − 0.8 ≈ 1.84 ≥ r0,
        // i.e. at least `resolution` cells
        let mut clear = f64::INFINITY;
        for p in inc.boundary().points() {
            clear = clear.min(dom.boundary().distance_to(*p));
        }
        assert!(clear / g.h >= 64.0);
        // quadrature area ≈ |Ω| − |D|
        let expect = std::f64::consts::PI * (3.0 * 3.0 - 0.8 * 0.8);
        assert_relative_eq!(g.quadrature_area(), expect, max_relative = 2e-3);
        assert!(g.lost_area() < 1e-3);
    }

    #[test]
    fn no_inclusion_means_no_collar_or_dropped_nodes() {
        let g = build_grid(&disc_domain(2.0), None, 32).unwrap();
        let counts = g.counts();
        assert_eq!(counts.collar, 0);
        assert_eq!(counts.dropped, 0);
        assert_relative_eq!(
            g.quadrature_area(),
            std::f64::consts::PI * 4.0,
            max_relative = 2e-3
        );
    }

    #[test]
    fn compactness_violation_is_an_error() {
        let dom = disc_domain(2.0);
        // inclusion boundary 0.1 from ∂Ω: below 8 cells at 32/r0 (0.25)
        let inc = StarInclusion::disc(Vec2::zero(), 1.9).unwrap();
        match build_grid(&dom, Some(&inc), 32) {
            Err(PlateError::Resolution(_)) => {}
            other => panic!("expected resolution error, got {other:?}"),
        }
        // inclusion sticking outside is invalid geometry
        let out = StarInclusion::disc(Vec2::new(1.5, 0.0), 0.8).unwrap();
        assert!(build_grid(&dom, Some(&out), 32).is_err());
    }

    #[test]
    fn eval_stencils_are_fully_defined() {
        let dom = disc_domain(2.0);
        let inc = StarInclusion::disc(Vec2::new(0.2, -0.1), 0.6).unwrap();
        let g = build_grid(&dom, Some(&inc), 24).unwrap();
        for e in g.eval_points() {
            let i = (e.node / g.ny) as isize;
            let j = (e.node % g.ny) as isize;
            for di in -1..=1 {
                for dj in -1..=1 {
                    assert!(g.is_defined(i + di, j + dj));
                }
            }
            assert!(e.area > 0.0);
        }
    }

    #[test]
    fn collar_hugs_the_inclusion_boundary() {
        let dom = disc_domain(2.5);
        let inc = StarInclusion::disc(Vec2::zero(), 0.7).unwrap();
        let g = build_grid(&dom, Some(&inc), 32).unwrap();
        let curve = inc.boundary();
        assert!(!g.collar_nodes().is_empty());
        for &k in g.collar_nodes() {
            let p = g.point_of(k);
            assert!(inc.shape().contains(p), "collar node outside D̄");
            // one diagonal layer of ∂D
            assert!(curve.distance_to(p) <= 2.0 * g.h);
            assert!(matches!(g.class_of(k), NodeClass::Free(_)));
            // borders the plate proper
            let (i, j) = (k / g.ny, k % g.ny);
            let touches_plate = (-1..=1).any(|di: isize| {
                (-1..=1).any(|dj: isize| {
                    let q = g.node_point(
                        (i as isize + di) as usize,
                        (j as isize + dj) as usize,
                    );
                    g.is_defined(i as isize + di, j as isize + dj)
                        && !inc.shape().contains(q)
                })
            });
            assert!(touches_plate, "collar node isolated from the plate");
        }
        // dropped nodes never appear in a quadrature stencil
        for e in g.eval_points() {
            let i = (e.node / g.ny) as isize;
            let j = (e.node % g.ny) as isize;
            for di in -1..=1 {
                for dj in -1..=1 {
                    assert!(g.is_defined(i + di, j + dj));
                }
            }
        }
    }

    #[test]
    fn aligned_square_has_exact_quadrature() {
        // square with sides midway between node lines: every cell is fully in
        // or fully out, so the quadrature area is exact
        let res = 16usize;
        let h = 1.0 / res as f64;
        let half = 1.0 + 0.5 * h;
        let sq = BoundaryShape::SmoothedPolygon {
            vertices: vec![
                Vec2::new(-half, -half),
                Vec2::new(half, -half),
                Vec2::new(half, half),
                Vec2::new(-half, half),
            ],
            rounds: 0,
        };
        let dom = PlanarDomain::new(sq, (0.0, 1.0), None, AprioriConstants::default()).unwrap();
        let g = build_grid(&dom, None, res).unwrap();
        let expect = (2.0 * half).powi(2);
        assert_relative_eq!(g.quadrature_area(), expect, max_relative = 1e-12);
        assert_relative_eq!(g.lost_area(), 0.0, epsilon = 1e-12);
    }
}
