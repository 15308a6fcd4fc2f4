//! Forward solver: discrete bending energy, boundary couples, and the
//! clamped-inclusion plate solve.
//!
//! The equilibrium displacement minimizes `½a(w,w) − f(w)` where `a` is the
//! bending energy of [`assemble`] and `f` is the work of the boundary
//! couples, built from the same trace functionals later used to extract
//! measurements. With an inclusion the band of nodes along `∂D` is clamped;
//! without one the three rigid displacements are pinned at interior nodes
//! and the solution is re-gauged to zero mean and zero first moments.

pub mod assemble;
pub mod couple;
pub mod grid;
pub mod interp;
pub mod linsolve;

pub use assemble::{
    assemble, bilinear_form, clamp_penalties, reduced_to_nodes, stabilization_penalties,
    AssembledSystem, PenaltyTerm,
};
pub use couple::{CoupleField, DEFAULT_FREQUENCY_BOUND};
pub use grid::{build_grid, EvalPoint, GridCounts, NodeClass, PlateGrid};
pub use interp::{
    band_functionals, bicubic_weights, interpolate, trace_functionals, TraceFunctional,
};
pub use linsolve::{solve_spd, FactorScalar, LinearSolveReport};

use crate::error::{PlateError, Result};
use crate::geometry::{PlanarDomain, Region2, StarInclusion, Vec2};
use crate::material::IsotropicPlate;
use crate::scalar::Scalar;
use std::sync::Arc;

/// Forward solve controls.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions<T> {
    /// Relative residual demanded of the linear solve.
    pub rel_tol: T,
    /// Oscillation bound handed to [`CoupleField::validate`].
    pub frequency_bound: T,
    /// Skip couple validation (used by diagnostics that drive the solver
    /// with deliberately inadmissible data, e.g. the zero field).
    pub validate_couple: bool,
}

impl<T: Scalar> Default for SolveOptions<T> {
    fn default() -> Self {
        SolveOptions {
            rel_tol: T::real(1e-10),
            frequency_bound: T::real(DEFAULT_FREQUENCY_BOUND),
            validate_couple: true,
        }
    }
}

/// A solved displacement field on its grid.
#[derive(Debug, Clone)]
pub struct DiscreteSolution<T: Scalar> {
    grid: Arc<PlateGrid<T>>,
    /// Nodal displacements (zeros at undefined nodes).
    pub field: Vec<T>,
    /// Affine part `[a, b, c]` (for `a + b·x1 + c·x2`) absorbed into the
    /// field: the inclusion displacement in the rigid form, or the
    /// zero-moment re-gauge of a pinned solve. Zero in the Dirichlet form.
    pub gauge: [T; 3],
    /// Stored bending energy `½ a(w, w)`.
    pub energy: T,
    /// The load functional over nodes: `f(v) = Σ load_nodes[n]·v[n]`.
    pub load_nodes: Vec<T>,
    pub solve_report: LinearSolveReport<T>,
}

fn affine_at<T: Scalar>(g: &[T; 3], p: Vec2<T>) -> T {
    g[0] + g[1] * p.x + g[2] * p.y
}

impl<T: Scalar> DiscreteSolution<T> {
    pub fn grid(&self) -> &PlateGrid<T> {
        &self.grid
    }

    pub fn grid_arc(&self) -> Arc<PlateGrid<T>> {
        Arc::clone(&self.grid)
    }

    /// Displacement at an interior point.
    pub fn value_at(&self, p: Vec2<T>) -> Result<T> {
        interpolate(&self.grid, &self.field, p)
    }

    /// The trace pair `(w, ∂w/∂n)` at a boundary point of the plate region.
    pub fn trace_at(&self, point: Vec2<T>, outward_normal: Vec2<T>) -> Result<(T, T)> {
        let tr = trace_functionals(&self.grid, point, outward_normal)?;
        Ok((
            tr.value_of(&self.field),
            tr.normal_derivative_of(&self.field),
        ))
    }

    /// Work done by the boundary couples on the solution. Equals `a(w, w)`
    /// (twice the stored energy) up to the linear-solve residual.
    pub fn boundary_work(&self) -> T {
        self.field
            .iter()
            .zip(&self.load_nodes)
            .fold(T::zero(), |s, (&w, &f)| s + w * f)
    }

    /// `‖∇²w‖_{L²}` over the quadrature cells whose node satisfies `pred`,
    /// with the Frobenius weight counting the mixed derivative twice.
    pub fn hessian_l2_where(&self, mut pred: impl FnMut(Vec2<T>) -> bool) -> T {
        let two = T::real(2.0);
        let mut acc = T::zero();
        for e in self.grid.eval_points() {
            if !pred(self.grid.point_of(e.node)) {
                continue;
            }
            let h = assemble::hessian_at(&self.grid, &self.field, e.node);
            acc += (h[0] * h[0] + h[1] * h[1] + two * h[2] * h[2]) * e.area;
        }
        acc.sqrt()
    }

    pub fn hessian_l2(&self) -> T {
        self.hessian_l2_where(|_| true)
    }

    /// `‖∇²w‖_{L²(B_ρ(c) ∩ plate)}`, with cells straddling `∂B_ρ` weighted by
    /// the subsampled fraction of the cell inside the ball.
    pub fn hessian_l2_disc(&self, center: Vec2<T>, radius: T) -> T {
        let two = T::real(2.0);
        let mut acc = T::zero();
        for e in self.grid.eval_points() {
            let p = self.grid.point_of(e.node);
            let w = disc_cell_weight(p, self.grid.h, center, radius);
            if w == T::zero() {
                continue;
            }
            let h = assemble::hessian_at(&self.grid, &self.field, e.node);
            acc += (h[0] * h[0] + h[1] * h[1] + two * h[2] * h[2]) * e.area * w;
        }
        acc.sqrt()
    }

    /// Full `H²` norm `(∫ w² + |∇w|² + |∇²w|²)^{1/2}` over the plate.
    pub fn h2_norm(&self) -> T {
        let two = T::real(2.0);
        let half = T::one() / two;
        let mut acc = T::zero();
        for e in self.grid.eval_points() {
            let p = e.node;
            let w = self.field[p];
            let gx = (self.field[p + self.grid.ny] - self.field[p - self.grid.ny])
                / self.grid.h
                * half;
            let gy = (self.field[p + 1] - self.field[p - 1]) / self.grid.h * half;
            let h = assemble::hessian_at(&self.grid, &self.field, p);
            acc += (w * w
                + gx * gx
                + gy * gy
                + h[0] * h[0]
                + h[1] * h[1]
                + two * h[2] * h[2])
                * e.area;
        }
        acc.sqrt()
    }
}

/// Fraction of the cell centred at `p` lying inside the ball, by 8×8
/// subsampling when the cell straddles the ball boundary.
fn disc_cell_weight<T: Scalar>(p: Vec2<T>, h: T, center: Vec2<T>, radius: T) -> T {
    let half = h * T::real(0.5);
    let dist = p.dist(center);
    // conservative: cell fully inside/outside when the centre clears the
    // boundary by the cell half-diagonal
    let diag = half * T::real(std::f64::consts::SQRT_2);
    if dist + diag <= radius {
        return T::one();
    }
    if dist - diag >= radius {
        return T::zero();
    }
    let n = 8usize;
    let step = h / T::real(n as f64);
    let start = Vec2::new(p.x - half + step * T::real(0.5), p.y - half + step * T::real(0.5));
    let mut count = 0usize;
    for a in 0..n {
        for b in 0..n {
            let q = Vec2::new(
                start.x + step * T::real(a as f64),
                start.y + step * T::real(b as f64),
            );
            if q.dist(center) <= radius {
                count += 1;
            }
        }
    }
    T::real(count as f64 / (n * n) as f64)
}

/// Periodic linear interpolation of midpoint samples `vals[j] = g((j+½)/n)`
/// at the arc fraction `frac`.
fn lerp_periodic<T: Scalar>(vals: &[T], frac: T) -> T {
    let n = vals.len() as isize;
    let u = frac * T::real(n as f64) - T::real(0.5);
    let base = u.floor();
    let w = u - base;
    let i0 = ((base.as_f64() as isize % n + n) % n) as usize;
    let i1 = (i0 + 1) % n as usize;
    vals[i0] * (T::one() - w) + vals[i1] * w
}

/// Value and axis-derivative weights of the cubic interpolant on a fully
/// defined 4×4 block near `c`, for reads at `c` (sliding the block inward
/// where the boundary cuts the lattice). `axis = 0` differentiates in x.
fn block_weights<T: Scalar>(
    grid: &PlateGrid<T>,
    c: Vec2<T>,
    axis: usize,
) -> Option<(Vec<(usize, T)>, Vec<(usize, T)>)> {
    let fx = (c.x - grid.origin.x) / grid.h;
    let fy = (c.y - grid.origin.y) / grid.h;
    let (fi, fj) = (fx.floor().as_f64() as isize, fy.floor().as_f64() as isize);
    let mut best: Option<(isize, isize, f64)> = None;
    for bi in fi - 3..=fi {
        for bj in fj - 3..=fj {
            let ok = (0..4).all(|a| (0..4).all(|b| grid.is_defined(bi + a, bj + b)));
            if !ok {
                continue;
            }
            let badness = (fx.as_f64() - (bi as f64 + 1.5)).abs()
                + (fy.as_f64() - (bj as f64 + 1.5)).abs();
            if best.map_or(true, |(_, _, b)| badness < b) {
                best = Some((bi, bj, badness));
            }
        }
    }
    let (bi, bj, _) = best?;
    let xs = |lo: isize, f: T| {
        [
            T::real(lo as f64) - f,
            T::real((lo + 1) as f64) - f,
            T::real((lo + 2) as f64) - f,
            T::real((lo + 3) as f64) - f,
        ]
    };
    let (vx, dx) = assemble::one_sided_weights(xs(bi, fx));
    let (vy, dy) = assemble::one_sided_weights(xs(bj, fy));
    let mut value = Vec::with_capacity(16);
    let mut deriv = Vec::with_capacity(16);
    for a in 0..4 {
        for b in 0..4 {
            let node = grid.node_index((bi + a as isize) as usize, (bj + b as isize) as usize);
            value.push((node, vx[a] * vy[b]));
            let d = if axis == 0 { dx[a] * vy[b] } else { vx[a] * dy[b] };
            deriv.push((node, d / grid.h));
        }
    }
    Some((value, deriv))
}

/// Builds the load vector over nodes from the couple field.
///
/// The work functional `f(v) = ∮ [(M̂_τ)'·v − M̂_n·∂v/∂n] ds` is applied at
/// the crossings of `∂Ω` with the grid lines. Splitting `∂n` into axis
/// components pairs each crossing family with its own factor of the normal:
/// a segment along axis `a` cut by the boundary carries the arc measure
/// `h/|n_a|`, and the integrand component `n_a ∂_a v` cancels that factor
/// exactly, so every crossing contributes bounded weights. Both reads come
/// from a one-sided cubic window of the four plate-side nodes along the
/// crossing line — the discretization the inclusion clamp uses — and fall
/// back to a fully defined 4×4 block where that window leaves the plate
/// (near tangency of the boundary to the line family).
fn load_vector<T: Scalar>(grid: &PlateGrid<T>, couple: &CoupleField<T>) -> Result<Vec<T>> {
    let domain = grid.domain();
    let curve = domain.boundary();
    let perimeter = curve.length();
    let dtau = couple.tangential_derivative();
    let h = grid.h;
    let mut f = vec![T::zero(); grid.nx * grid.ny];
    // smooth ring loads used to project out the affine residuals below
    let mut ring = vec![vec![T::zero(); grid.nx * grid.ny]; 3];
    let mut crossings = 0usize;
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            let k = i * grid.ny + j;
            if !matches!(grid.class_of(k), NodeClass::Free(_)) {
                continue;
            }
            let pb = grid.node_point(i, j);
            for (di, dj) in [(1isize, 0isize), (-1, 0), (0, 1), (0, -1)] {
                let (ni, nj) = (i as isize + di, j as isize + dj);
                if ni < 0 || nj < 0 || ni >= grid.nx as isize || nj >= grid.ny as isize {
                    continue;
                }
                let kn = ni as usize * grid.ny + nj as usize;
                if !matches!(grid.class_of(kn), NodeClass::Outside) {
                    continue;
                }
                let pa = grid.node_point(ni as usize, nj as usize);
                if domain.contains(pa) {
                    continue; // pruned sliver, not a boundary crossing
                }
                let (mut lo, mut hi) = (T::zero(), T::one());
                for _ in 0..50 {
                    let mid = (lo + hi) * T::real(0.5);
                    let q = Vec2::new(pb.x + (pa.x - pb.x) * mid, pb.y + (pa.y - pb.y) * mid);
                    if domain.contains(q) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let t = (lo + hi) * T::real(0.5);
                let c = Vec2::new(pb.x + (pa.x - pb.x) * t, pb.y + (pa.y - pb.y) * t);
                crossings += 1;

                let s = curve.arc_near(c);
                let frac = s / perimeter;
                let mn = lerp_periodic(&couple.m_n, frac);
                let dt = lerp_periodic(&dtau, frac);
                let nrm = curve.outward_normal_at_arc(s);
                let na = if dj == 0 { nrm.x } else { nrm.y };
                let axis = if dj == 0 { 0 } else { 1 };
                // signed axis direction of the segment, inside → outside
                let sig = T::real((di + dj) as f64);

                // preferred read: the four plate-side nodes along the line
                let window_ok = (1..4).all(|r| grid.is_defined(i as isize - di * r, j as isize - dj * r));
                if window_ok {
                    let (val, der) = assemble::one_sided_weights([
                        t,
                        t + T::one(),
                        t + T::real(2.0),
                        t + T::real(3.0),
                    ]);
                    for r in 0..4isize {
                        let node = grid
                            .node_index((i as isize - di * r) as usize, (j as isize - dj * r) as usize);
                        // dψ/dξ is h·(inward ∂_a), and the measure h/|n_a|
                        // times −M̂_n n_a turns both into mn·der exactly
                        f[node] += mn * der[r as usize];
                        let wv = na.abs() * h * val[r as usize];
                        f[node] += dt * wv;
                        ring[0][node] += wv;
                        ring[1][node] += wv * c.x;
                        ring[2][node] += wv * c.y;
                    }
                } else {
                    let Some((value, deriv)) = block_weights(grid, c, axis) else {
                        return Err(PlateError::Resolution(format!(
                            "no interior read block for the boundary crossing at ({:.4}, {:.4}); raise the resolution",
                            c.x, c.y
                        )));
                    };
                    for (node, w) in deriv {
                        f[node] -= mn * sig * h * w;
                    }
                    for (node, w) in value {
                        let wv = na.abs() * h * w;
                        f[node] += dt * wv;
                        ring[0][node] += wv;
                        ring[1][node] += wv * c.x;
                        ring[2][node] += wv * c.y;
                    }
                }
            }
        }
    }
    if crossings == 0 {
        return Err(PlateError::Resolution(
            "the outer boundary crosses no grid line; raise the resolution".into(),
        ));
    }

    // The continuum couple does no work on rigid displacements, but the
    // crossing quadrature balances it only to its own order. Project that
    // defect out with the smooth ring loads: their Gram matrix against the
    // nodal affines is the (SPD) quadrature Gram of {1, x, y} on ∂Ω.
    let mut m = [[T::zero(); 3]; 3];
    let mut r = [T::zero(); 3];
    for k in 0..grid.nx * grid.ny {
        if f[k] == T::zero() && ring[0][k] == T::zero() {
            continue;
        }
        let p = grid.point_of(k);
        let phi = [T::one(), p.x, p.y];
        for a in 0..3 {
            r[a] += f[k] * phi[a];
            for b in 0..3 {
                m[a][b] += ring[b][k] * phi[a];
            }
        }
    }
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let cof = |a: usize, b: usize| -> T {
        let (a1, a2) = ((a + 1) % 3, (a + 2) % 3);
        let (b1, b2) = ((b + 1) % 3, (b + 2) % 3);
        m[a1][b1] * m[a2][b2] - m[a1][b2] * m[a2][b1]
    };
    // c = M⁻¹ r via the adjugate (cyclic cofactors carry the sign)
    let c: Vec<T> = (0..3)
        .map(|a| (cof(0, a) * r[0] + cof(1, a) * r[1] + cof(2, a) * r[2]) / det)
        .collect();
    for k in 0..grid.nx * grid.ny {
        if ring[0][k] == T::zero() {
            continue;
        }
        for a in 0..3 {
            f[k] -= c[a] * ring[a][k];
        }
    }
    Ok(f)
}

/// Weighted least-squares affine fit of a nodal field over the quadrature
/// cells; subtracting it gives the zero-mean, zero-first-moment gauge.
fn affine_fit<T: Scalar>(grid: &PlateGrid<T>, field: &[T]) -> [T; 3] {
    let mut area = T::zero();
    let mut cx = T::zero();
    let mut cy = T::zero();
    for e in grid.eval_points() {
        let p = grid.point_of(e.node);
        area += e.area;
        cx += p.x * e.area;
        cy += p.y * e.area;
    }
    cx /= area;
    cy /= area;
    let (mut suu, mut suv, mut svv) = (T::zero(), T::zero(), T::zero());
    let (mut rw, mut ru, mut rv) = (T::zero(), T::zero(), T::zero());
    for e in grid.eval_points() {
        let p = grid.point_of(e.node);
        let (u, v) = (p.x - cx, p.y - cy);
        let w = field[e.node];
        suu += u * u * e.area;
        suv += u * v * e.area;
        svv += v * v * e.area;
        rw += w * e.area;
        ru += w * u * e.area;
        rv += w * v * e.area;
    }
    // centred coordinates make the normal equations block-diagonal
    let a0 = rw / area;
    let det = suu * svv - suv * suv;
    let b = (ru * svv - rv * suv) / det;
    let c = (rv * suu - ru * suv) / det;
    [a0 - b * cx - c * cy, b, c]
}

/// Picks three pin nodes for a solve without inclusion: the area centroid
/// and two offsets along the axes, each snapped to the nearest free node.
fn pick_pins<T: Scalar>(grid: &PlateGrid<T>) -> Result<Vec<usize>> {
    let (lo, hi) = grid.domain().bbox();
    let mut area = T::zero();
    let mut cx = T::zero();
    let mut cy = T::zero();
    for e in grid.eval_points() {
        let p = grid.point_of(e.node);
        area += e.area;
        cx += p.x * e.area;
        cy += p.y * e.area;
    }
    let centroid = Vec2::new(cx / area, cy / area);
    let off = T::real(0.3);
    let targets = [
        centroid,
        Vec2::new(centroid.x + off * (hi.x - lo.x), centroid.y),
        Vec2::new(centroid.x, centroid.y + off * (hi.y - lo.y)),
    ];
    let mut pins = Vec::with_capacity(3);
    for t in targets {
        let dof = snap_to_free(grid, t).ok_or_else(|| {
            PlateError::Resolution("no free node near a pin target".into())
        })?;
        if pins.contains(&dof) {
            return Err(PlateError::Resolution(
                "pin targets collapse onto the same node; domain too small".into(),
            ));
        }
        pins.push(dof);
    }
    Ok(pins)
}

fn snap_to_free<T: Scalar>(grid: &PlateGrid<T>, target: Vec2<T>) -> Option<usize> {
    let fi = ((target.x - grid.origin.x) / grid.h).round().as_f64() as isize;
    let fj = ((target.y - grid.origin.y) / grid.h).round().as_f64() as isize;
    for r in 0..=10isize {
        for di in -r..=r {
            for dj in -r..=r {
                if di.abs().max(dj.abs()) != r {
                    continue;
                }
                let (i, j) = (fi + di, fj + dj);
                if i < 0 || j < 0 || i as usize >= grid.nx || j as usize >= grid.ny {
                    continue;
                }
                if let NodeClass::Free(d) = grid.class(i as usize, j as usize) {
                    return Some(d);
                }
            }
        }
    }
    None
}

fn solve_impl<T: FactorScalar>(
    grid: Arc<PlateGrid<T>>,
    plate: &IsotropicPlate,
    couple: &CoupleField<T>,
    options: &SolveOptions<T>,
    rigid: bool,
) -> Result<DiscreteSolution<T>> {
    if options.validate_couple {
        couple.validate(options.frequency_bound)?;
    }
    if rigid && grid.inclusion().is_none() {
        return Err(PlateError::InvalidInput(
            "rigid form requires an inclusion".into(),
        ));
    }
    let pinned = if grid.inclusion().is_none() {
        pick_pins(&grid)?
    } else {
        // the clamp penalties remove the affine null space
        Vec::new()
    };
    let mut penalties = assemble::clamp_penalties(&grid, plate)?;
    penalties.extend(assemble::stabilization_penalties(&grid, plate));
    let sys = assemble(&grid, plate, &pinned, &penalties)?;
    let load_nodes = load_vector(&grid, couple)?;
    let rhs: Vec<T> = sys
        .kept
        .iter()
        .map(|&d| load_nodes[grid.dof_nodes()[d]])
        .collect();
    let (x, solve_report) = solve_spd(&sys, &rhs, options.rel_tol)?;
    // the stored energy is half the full quadratic form (penalties included),
    // which the minimiser makes equal to half the boundary work
    let energy = {
        let ax = sys.matvec(&x);
        x.iter().zip(&ax).fold(T::zero(), |s, (&a, &b)| s + a * b) * T::real(0.5)
    };
    let mut field = assemble::reduced_to_nodes(&grid, &sys, &x);

    let mut gauge = [T::zero(); 3];
    if !pinned.is_empty() {
        // pinning selected an arbitrary representative: shift to the
        // zero-moment one
        let fit = affine_fit(&grid, &field);
        for k in 0..grid.nx * grid.ny {
            if grid.is_defined((k / grid.ny) as isize, (k % grid.ny) as isize) {
                field[k] -= affine_at(&fit, grid.point_of(k));
            }
        }
        gauge = [-fit[0], -fit[1], -fit[2]];
    } else if rigid {
        // free the inclusion: add the affine field that zeroes the moments
        // of the displacement; the band then carries exactly that affine
        let fit = affine_fit(&grid, &field);
        gauge = [-fit[0], -fit[1], -fit[2]];
        for k in 0..grid.nx * grid.ny {
            let defined =
                grid.is_defined((k / grid.ny) as isize, (k % grid.ny) as isize);
            if defined || matches!(grid.class_of(k), NodeClass::Dropped) {
                field[k] += affine_at(&gauge, grid.point_of(k));
            }
        }
    }

    Ok(DiscreteSolution {
        grid,
        field,
        gauge,
        energy,
        load_nodes,
        solve_report,
    })
}

/// Solves the clamped form: `w = 0` on the inclusion band (or, without an
/// inclusion, the pure traction problem re-gauged to zero moments).
pub fn solve_dirichlet_form<T: FactorScalar>(
    domain: &PlanarDomain<T>,
    inclusion: Option<&StarInclusion<T>>,
    plate: &IsotropicPlate,
    couple: &CoupleField<T>,
    resolution: usize,
    options: &SolveOptions<T>,
) -> Result<DiscreteSolution<T>> {
    let grid = Arc::new(build_grid(domain, inclusion, resolution)?);
    solve_impl(grid, plate, couple, options, false)
}

/// Solves with a freely floating rigid inclusion: the clamped solve plus the
/// affine displacement that zeroes the mean and first moments, so the field
/// equals that affine on `D̄`.
pub fn solve_rigid_form<T: FactorScalar>(
    domain: &PlanarDomain<T>,
    inclusion: &StarInclusion<T>,
    plate: &IsotropicPlate,
    couple: &CoupleField<T>,
    resolution: usize,
    options: &SolveOptions<T>,
) -> Result<DiscreteSolution<T>> {
    let grid = Arc::new(build_grid(domain, Some(inclusion), resolution)?);
    solve_impl(grid, plate, couple, options, true)
}

/// Dirichlet-form solve on a prebuilt grid (shared across sweep members).
pub fn solve_dirichlet_on<T: FactorScalar>(
    grid: Arc<PlateGrid<T>>,
    plate: &IsotropicPlate,
    couple: &CoupleField<T>,
    options: &SolveOptions<T>,
) -> Result<DiscreteSolution<T>> {
    solve_impl(grid, plate, couple, options, false)
}

/// Rigid-form solve on a prebuilt grid.
pub fn solve_rigid_on<T: FactorScalar>(
    grid: Arc<PlateGrid<T>>,
    plate: &IsotropicPlate,
    couple: &CoupleField<T>,
    options: &SolveOptions<T>,
) -> Result<DiscreteSolution<T>> {
    solve_impl(grid, plate, couple, options, true)
}

/// Normalized equilibrium residuals of the inclusion: the virtual work of
/// the solution against a rigid motion of the inclusion neighbourhood, one
/// entry per mode `{1, x1 − c1, x2 − c2}`, each divided by the energy norms
/// of the two fields.
pub fn equilibrium_residuals<T: Scalar>(
    sol: &DiscreteSolution<T>,
    plate: &IsotropicPlate,
) -> Result<[T; 3]> {
    let grid = sol.grid();
    let inc = grid.inclusion().ok_or_else(|| {
        PlateError::InvalidInput("equilibrium residuals need an inclusion".into())
    })?;
    let center = inc.center();
    let curve = inc.boundary().clone();
    let domain_curve = grid.domain().boundary();
    let mut clearance = T::infinity();
    for p in curve.points() {
        clearance = clearance.min(domain_curve.distance_to(*p));
    }
    // the inner plateau must cover the clamp-penalty windows (4 cells out
    // of ∂D) so the test field is exactly affine where the penalties read it
    let d0 = (clearance * T::real(0.25)).max(grid.h * T::real(5.0));
    let d1 = clearance * T::real(0.75);
    let (blo, bhi) = curve.bbox();
    let margin = d1 + grid.h;

    let plateau_of = |p: Vec2<T>| -> T {
        if p.x < blo.x - margin
            || p.x > bhi.x + margin
            || p.y < blo.y - margin
            || p.y > bhi.y + margin
        {
            return T::zero();
        }
        if inc.shape().contains(p) {
            return T::one();
        }
        let d = curve.distance_to(p);
        if d <= d0 {
            T::one()
        } else if d >= d1 {
            T::zero()
        } else {
            let u = (d - d0) / (d1 - d0) * T::real(std::f64::consts::FRAC_PI_2);
            let c = u.cos();
            c * c
        }
    };

    let n_nodes = grid.nx * grid.ny;
    let mut plateau = vec![T::zero(); n_nodes];
    for k in 0..n_nodes {
        let defined = grid.is_defined((k / grid.ny) as isize, (k % grid.ny) as isize);
        if defined {
            plateau[k] = plateau_of(grid.point_of(k));
        }
    }

    let denom_w = bilinear_form(grid, plate, &sol.field, &sol.field).sqrt();
    let mut out = [T::zero(); 3];
    for (m, mode) in [(0usize, 0), (1, 1), (2, 2)].map(|(a, b)| (a, b)) {
        let mut psi = vec![T::zero(); n_nodes];
        for k in 0..n_nodes {
            if plateau[k] == T::zero() {
                continue;
            }
            let p = grid.point_of(k);
            let g = match mode {
                0 => T::one(),
                1 => p.x - center.x,
                _ => p.y - center.y,
            };
            psi[k] = plateau[k] * g;
        }
        let a_wpsi = bilinear_form(grid, plate, &sol.field, &psi);
        let f_psi = psi
            .iter()
            .zip(&sol.load_nodes)
            .fold(T::zero(), |s, (&v, &f)| s + v * f);
        let denom_psi = bilinear_form(grid, plate, &psi, &psi).sqrt();
        out[m] = (a_wpsi - f_psi) / (denom_w * denom_psi);
    }
    Ok(out)
}

/// How well the discrete solution honours the clamp: extrapolated traces of
/// `w − g` and `∂(w − g)/∂n` on `∂D`, relative to the solution scale.
#[derive(Debug, Clone, Copy)]
pub struct ClampedTraceReport<T> {
    pub max_value: T,
    pub max_normal_derivative: T,
    pub samples: usize,
}

/// Samples the inclusion boundary and extrapolates the solution traces from
/// the plate side; in either form they should vanish up to discretization
/// error after removing the gauge affine.
pub fn clamped_trace_report<T: Scalar>(
    sol: &DiscreteSolution<T>,
    samples: usize,
) -> Result<ClampedTraceReport<T>> {
    let grid = sol.grid();
    let inc = grid.inclusion().ok_or_else(|| {
        PlateError::InvalidInput("clamped traces need an inclusion".into())
    })?;
    let curve = inc.boundary();
    let mut max_v = T::zero();
    let mut max_d = T::zero();
    let step = curve.n() / samples.max(1);
    let mut count = 0usize;
    for i in (0..curve.n()).step_by(step.max(1)) {
        let p = curve.point_at_index(i);
        // plate-side outward normal at ∂D points into the inclusion
        let n_out = inc.boundary().outward_normal_at_index(i);
        let tr = trace_functionals(grid, p, Vec2::new(-n_out.x, -n_out.y))?;
        let v = tr.value_of(&sol.field) - affine_at(&sol.gauge, p);
        let gauge_dn = -(sol.gauge[1] * n_out.x + sol.gauge[2] * n_out.y);
        let d = tr.normal_derivative_of(&sol.field) - gauge_dn;
        max_v = max_v.max(v.abs());
        max_d = max_d.max(d.abs());
        count += 1;
    }
    Ok(ClampedTraceReport {
        max_value: max_v,
        max_normal_derivative: max_d,
        samples: count,
    })
}

/// Continuity of the data-to-solution map: the `H²` norm of the solution
/// against the couple-norm surrogate, flagged when the ratio blows past the
/// a-priori constant.
#[derive(Debug, Clone, Copy)]
pub struct EnergyEstimateReport<T> {
    pub h2_norm: T,
    pub couple_surrogate: T,
    pub ratio: T,
    pub ok: bool,
}

pub fn verify_energy_estimate<T: Scalar>(
    sol: &DiscreteSolution<T>,
    couple: &CoupleField<T>,
) -> Result<EnergyEstimateReport<T>> {
    let surrogate = couple.h_minus_half_surrogate();
    if surrogate == T::zero() {
        return Err(PlateError::InvalidInput(
            "cannot form the estimate ratio for a zero couple field".into(),
        ));
    }
    let r0 = T::real(crate::R0);
    let h2 = sol.h2_norm();
    let ratio = h2 / (r0 * r0 * surrogate);
    Ok(EnergyEstimateReport {
        h2_norm: h2,
        couple_surrogate: surrogate,
        ratio,
        ok: ratio <= T::real(1e4),
    })
}
