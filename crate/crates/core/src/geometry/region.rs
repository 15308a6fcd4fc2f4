//! Axis-aligned cell masks and the exact Euclidean distance transform.

use super::{PlanarDomain, StarInclusion, Vec2};
use crate::scalar::Scalar;

const INF: f64 = 1e30;

/// Region represented as a boolean mask over uniform grid cells.
///
/// Cell `(i, j)` has center `origin + (i·h, j·h)`; the mask is stored row
/// major in `i`. Builders pad the grid so that a masked cell never touches
/// the grid edge, which lets the distance transform treat out-of-grid space
/// as complement.
#[derive(Debug, Clone)]
pub struct GridRegion<T> {
    pub origin: Vec2<T>,
    pub h: T,
    pub nx: usize,
    pub ny: usize,
    mask: Vec<bool>,
}

impl<T: Scalar> GridRegion<T> {
    /// Builds a mask over the box `[lo, hi]` (plus `pad` cells of margin)
    /// from a containment predicate evaluated at cell centers.
    pub fn from_fn(lo: Vec2<T>, hi: Vec2<T>, h: T, pad: usize, f: impl Fn(Vec2<T>) -> bool) -> Self {
        let padt = T::real(pad as f64) * h;
        let origin = Vec2::new(lo.x - padt, lo.y - padt);
        let nx = ((hi.x - lo.x) / h).ceil().as_f64() as usize + 2 * pad + 1;
        let ny = ((hi.y - lo.y) / h).ceil().as_f64() as usize + 2 * pad + 1;
        let mut mask = vec![false; nx * ny];
        for i in 0..nx {
            for j in 0..ny {
                let c = Vec2::new(
                    origin.x + h * T::real(i as f64),
                    origin.y + h * T::real(j as f64),
                );
                mask[i * ny + j] = f(c);
            }
        }
        GridRegion {
            origin,
            h,
            nx,
            ny,
            mask,
        }
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.mask[self.idx(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        let k = self.idx(i, j);
        self.mask[k] = v;
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Vec2<T> {
        Vec2::new(
            self.origin.x + self.h * T::real(i as f64),
            self.origin.y + self.h * T::real(j as f64),
        )
    }

    pub fn cell_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn area(&self) -> T {
        T::real(self.cell_count() as f64) * self.h * self.h
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&m| m)
    }

    /// Nearest-cell containment query (false outside the grid).
    pub fn contains_point(&self, p: Vec2<T>) -> bool {
        let fi = ((p.x - self.origin.x) / self.h).round().as_f64();
        let fj = ((p.y - self.origin.y) / self.h).round().as_f64();
        if fi < 0.0 || fj < 0.0 || fi >= self.nx as f64 || fj >= self.ny as f64 {
            return false;
        }
        self.get(fi as usize, fj as usize)
    }

    /// Centers of all masked cells.
    pub fn cell_centers(&self) -> Vec<Vec2<T>> {
        let mut out = Vec::with_capacity(self.cell_count());
        for i in 0..self.nx {
            for j in 0..self.ny {
                if self.get(i, j) {
                    out.push(self.cell_center(i, j));
                }
            }
        }
        out
    }

    /// Distance from each cell center to the nearest complement cell center,
    /// in length units (exact Euclidean transform over cell centers).
    pub fn distance_to_complement(&self) -> Vec<T> {
        let d2 = squared_edt(self.nx, self.ny, |k| !self.mask[k]);
        d2.into_iter()
            .map(|v| T::real(v.sqrt()) * self.h)
            .collect()
    }

    /// Cells whose distance to the complement exceeds `rho`.
    ///
    /// Accurate to the cell size: the reported region is within one cell of
    /// the continuum erosion of the mask.
    pub fn erode(&self, rho: T) -> GridRegion<T> {
        let dist = self.distance_to_complement();
        let mut out = self.clone();
        for (k, d) in dist.into_iter().enumerate() {
            out.mask[k] = self.mask[k] && d > rho;
        }
        out
    }

    /// 4-connected component of the mask grown from `seeds` (cell indices).
    pub fn component_from(&self, seeds: impl IntoIterator<Item = (usize, usize)>) -> GridRegion<T> {
        let mut out = self.clone();
        out.mask.iter_mut().for_each(|m| *m = false);
        let mut queue: Vec<(usize, usize)> = seeds
            .into_iter()
            .filter(|&(i, j)| self.get(i, j))
            .collect();
        for &(i, j) in &queue {
            out.set(i, j, true);
        }
        while let Some((i, j)) = queue.pop() {
            let neighbors = [
                (i.wrapping_sub(1), j),
                (i + 1, j),
                (i, j.wrapping_sub(1)),
                (i, j + 1),
            ];
            for (a, b) in neighbors {
                if a < self.nx && b < self.ny && self.get(a, b) && !out.get(a, b) {
                    out.set(a, b, true);
                    queue.push((a, b));
                }
            }
        }
        out
    }

    /// True when every masked cell of `self` is masked in `other`, allowing
    /// a slack of `tol_cells` cells (measured by erosion of the complement).
    pub fn subset_of_within(&self, other: &GridRegion<T>, tol_cells: usize) -> bool {
        let tol = self.h * T::real(tol_cells as f64 + 0.5);
        for i in 0..self.nx {
            for j in 0..self.ny {
                if !self.get(i, j) {
                    continue;
                }
                let c = self.cell_center(i, j);
                if !other.contains_point(c) {
                    // allow slack: accept if some cell within tol is masked
                    let mut ok = false;
                    'scan: for di in -(tol_cells as isize + 1)..=(tol_cells as isize + 1) {
                        for dj in -(tol_cells as isize + 1)..=(tol_cells as isize + 1) {
                            let q = Vec2::new(
                                c.x + T::real(di as f64) * self.h,
                                c.y + T::real(dj as f64) * self.h,
                            );
                            if (q - c).norm() <= tol && other.contains_point(q) {
                                ok = true;
                                break 'scan;
                            }
                        }
                    }
                    if !ok {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Connected component of `Ω ∖ (D̄1 ∪ D̄2)` touching the outer boundary,
/// rasterized at `resolution` cells per unit length.
///
/// Seeds are the cells of the set with a 4-neighbor outside `Ω`, so the
/// returned component is the one whose closure meets `∂Ω`.
pub fn connected_component_touching<T: Scalar>(
    domain: &PlanarDomain<T>,
    d1: &StarInclusion<T>,
    d2: &StarInclusion<T>,
    resolution: usize,
) -> GridRegion<T> {
    let h = T::one() / T::real(resolution as f64);
    let omega = domain.rasterize(h, 3);
    let mut set = omega.clone();
    for i in 0..set.nx {
        for j in 0..set.ny {
            if set.get(i, j) {
                let c = set.cell_center(i, j);
                if d1.shape().contains(c) || d2.shape().contains(c) {
                    set.set(i, j, false);
                }
            }
        }
    }
    let mut seeds = Vec::new();
    for i in 0..set.nx {
        for j in 0..set.ny {
            if !set.get(i, j) {
                continue;
            }
            let outside_omega = [
                (i.wrapping_sub(1), j),
                (i + 1, j),
                (i, j.wrapping_sub(1)),
                (i, j + 1),
            ]
            .into_iter()
            .any(|(a, b)| a >= set.nx || b >= set.ny || !omega.get(a, b));
            if outside_omega {
                seeds.push((i, j));
            }
        }
    }
    set.component_from(seeds)
}

/// Exact squared Euclidean distance transform over an `nx × ny` grid, in
/// cell units; `is_seed(k)` marks zero-distance cells. Out-of-grid space is
/// treated as seed (distance grows from the grid border too).
pub fn squared_edt(nx: usize, ny: usize, is_seed: impl Fn(usize) -> bool) -> Vec<f64> {
    let mut g = vec![0f64; nx * ny];
    // pass 1: 1D transform along j within each row i
    let mut line = vec![0f64; ny.max(nx)];
    let mut out_line = vec![0f64; ny.max(nx)];
    for i in 0..nx {
        for j in 0..ny {
            line[j] = if is_seed(i * ny + j) { 0.0 } else { INF };
        }
        dt_1d_with_border(&line[..ny], &mut out_line[..ny]);
        g[i * ny..(i + 1) * ny].copy_from_slice(&out_line[..ny]);
    }
    // pass 2: along i within each column j
    let mut col = vec![0f64; nx];
    for j in 0..ny {
        for i in 0..nx {
            col[i] = g[i * ny + j];
        }
        dt_1d_with_border(&col, &mut out_line[..nx]);
        for i in 0..nx {
            g[i * ny + j] = out_line[i];
        }
    }
    g
}

/// 1D squared distance transform (lower envelope of parabolas), with
/// virtual seeds one cell beyond both ends of the line.
fn dt_1d_with_border(f: &[f64], out: &mut [f64]) {
    let n = f.len();
    // augment with border seeds at positions -1 and n
    let fa = |q: isize| -> f64 {
        if q < 0 || q >= n as isize {
            0.0
        } else {
            f[q as usize]
        }
    };
    let m = n + 2; // positions -1..=n shifted by +1
    let mut v = vec![0isize; m];
    let mut z = vec![0f64; m + 1];
    let mut k = 0usize;
    v[0] = -1;
    z[0] = -INF;
    z[1] = INF;
    for qs in 0..=n as isize {
        let q = qs; // actual position (seeds at -1 and n included via loop bounds)
        let fq = fa(q);
        if fq >= INF && q < n as isize {
            continue;
        }
        loop {
            let p = v[k];
            let fp = fa(p);
            let denom = 2.0 * (q - p) as f64;
            let s = ((fq + (q * q) as f64) - (fp + (p * p) as f64)) / denom;
            if s <= z[k] {
                if k == 0 {
                    // replace the root parabola
                    v[0] = q;
                    z[0] = -INF;
                    z[1] = INF;
                    break;
                }
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = INF;
                break;
            }
        }
    }
    let mut kk = 0usize;
    for q in 0..n {
        while z[kk + 1] < q as f64 {
            kk += 1;
        }
        let p = v[kk];
        let d = q as isize - p;
        out[q] = (d * d) as f64 + fa(p);
    }
}
