//! Isotropic thin-plate material law.
//!
//! The Lamé moduli may vary over the mid-plane (given as formulas in `x1`,
//! `x2`); the thickness is uniform. All stiffness quantities reduce to the
//! plane-stress pair `(E, ν)` and the bending stiffness
//! `B = h³E / (12(1−ν²))`, and the bending tensor acts on symmetric 2×2
//! matrices as `P A = B((1−ν)A + ν·tr(A)·I)`.

mod expr;

pub use expr::{Expr, Var};

use crate::error::{PlateError, Result};
use crate::geometry::{AprioriCheck, Vec2};
use crate::scalar::Scalar;

/// Young's modulus and Poisson's ratio from the Lamé moduli (plane stress):
/// `E = μ(2μ+3λ)/(μ+λ)`, `ν = λ/(2(μ+λ))`.
pub fn young_poisson<T: Scalar>(lambda: T, mu: T) -> (T, T) {
    let e = mu * (T::real(2.0) * mu + T::real(3.0) * lambda) / (mu + lambda);
    let nu = lambda / (T::real(2.0) * (mu + lambda));
    (e, nu)
}

/// Bending stiffness `B = h³/12 · E/(1−ν²)`.
pub fn bending_stiffness<T: Scalar>(e: T, nu: T, h: T) -> T {
    h * h * h / T::real(12.0) * e / (T::one() - nu * nu)
}

/// Applies the bending tensor: `P A = B((1−ν)A + ν·tr(A)·I)`.
pub fn plate_tensor_apply<T: Scalar>(b: T, nu: T, a: [[T; 2]; 2]) -> [[T; 2]; 2] {
    let tr = a[0][0] + a[1][1];
    let f = T::one() - nu;
    [
        [b * (f * a[0][0] + nu * tr), b * f * a[0][1]],
        [b * f * a[1][0], b * (f * a[1][1] + nu * tr)],
    ]
}

/// Quadratic form `P A : A` of the bending tensor on a symmetric matrix.
pub fn tensor_quadratic_form<T: Scalar>(b: T, nu: T, a: [[T; 2]; 2]) -> T {
    let pa = plate_tensor_apply(b, nu, a);
    pa[0][0] * a[0][0] + pa[0][1] * a[0][1] + pa[1][0] * a[1][0] + pa[1][1] * a[1][1]
}

/// The same quadratic form as a 3×3 matrix on the reduced Hessian vector
/// `(w_11, w_22, w_12)`: `B·[[1, ν, 0], [ν, 1, 0], [0, 0, 2(1−ν)]]`.
pub fn hessian_form_matrix<T: Scalar>(b: T, nu: T) -> [[T; 3]; 3] {
    let z = T::zero();
    [
        [b, b * nu, z],
        [b * nu, b, z],
        [z, z, b * T::real(2.0) * (T::one() - nu)],
    ]
}

/// Pointwise bending coefficients consumed by the discretization.
#[derive(Debug, Clone, Copy)]
pub struct PlateCoefficients<T> {
    pub stiffness: T,
    pub poisson: T,
}

/// Isotropic plate: Lamé moduli fields plus a uniform thickness.
#[derive(Debug, Clone)]
pub struct IsotropicPlate {
    lambda: Expr,
    mu: Expr,
    thickness: f64,
    lambda_src: String,
    mu_src: String,
}

impl IsotropicPlate {
    pub fn from_formulas(lambda: &str, mu: &str, thickness: f64) -> Result<Self> {
        if !(thickness > 0.0) {
            return Err(PlateError::InvalidInput(format!(
                "thickness must be positive, got {thickness}"
            )));
        }
        Ok(IsotropicPlate {
            lambda: Expr::parse(lambda)?,
            mu: Expr::parse(mu)?,
            thickness,
            lambda_src: lambda.to_string(),
            mu_src: mu.to_string(),
        })
    }

    pub fn constant(lambda: f64, mu: f64, thickness: f64) -> Result<Self> {
        Self::from_formulas(&format!("{lambda}"), &format!("{mu}"), thickness)
    }

    pub fn thickness(&self) -> f64 {
        self.thickness
    }

    pub fn lambda_source(&self) -> &str {
        &self.lambda_src
    }

    pub fn mu_source(&self) -> &str {
        &self.mu_src
    }

    pub fn is_homogeneous(&self) -> bool {
        self.lambda.is_constant() && self.mu.is_constant()
    }

    pub fn lame_at<T: Scalar>(&self, p: Vec2<T>) -> (T, T) {
        (self.lambda.eval(p), self.mu.eval(p))
    }

    pub fn young_poisson_at<T: Scalar>(&self, p: Vec2<T>) -> (T, T) {
        let (l, m) = self.lame_at(p);
        young_poisson(l, m)
    }

    /// Bending stiffness and Poisson ratio at a point.
    pub fn bending_at<T: Scalar>(&self, p: Vec2<T>) -> PlateCoefficients<T> {
        let (e, nu) = self.young_poisson_at(p);
        PlateCoefficients {
            stiffness: bending_stiffness(e, nu, T::real(self.thickness)),
            poisson: nu,
        }
    }
}

/// Admissibility thresholds for [`check_material`].
#[derive(Debug, Clone, Copy)]
pub struct MaterialBounds {
    /// Lower bound for both `μ` and the bulk combination `2μ + 3λ`.
    pub min_modulus: f64,
    /// Upper bound for every partial derivative of `λ` and `μ` up to order
    /// four (smoothness required by the unique-continuation machinery).
    pub max_c4: f64,
}

impl Default for MaterialBounds {
    fn default() -> Self {
        MaterialBounds {
            min_modulus: 1e-6,
            max_c4: 1e4,
        }
    }
}

/// Sampled material admissibility over a bounding box.
#[derive(Debug, Clone)]
pub struct MaterialReport {
    /// `min μ ≥ min_modulus` (shear positivity).
    pub shear: AprioriCheck<f64>,
    /// `min (2μ + 3λ) ≥ min_modulus` (strong convexity of the stored
    /// energy, equivalently `E > 0` and `−1 < ν < 1`).
    pub bulk: AprioriCheck<f64>,
    /// `max |∂^α λ|, |∂^α μ| ≤ max_c4` over all `|α| ≤ 4`.
    pub smoothness: AprioriCheck<f64>,
}

impl MaterialReport {
    pub fn all_ok(&self) -> bool {
        self.shear.ok && self.bulk.ok && self.smoothness.ok
    }
}

/// Samples the moduli and their symbolic partials up to order four on an
/// `n × n` grid over `[lo, hi]` and compares against `bounds`.
pub fn check_material(
    plate: &IsotropicPlate,
    lo: Vec2<f64>,
    hi: Vec2<f64>,
    n: usize,
    bounds: MaterialBounds,
) -> MaterialReport {
    let mut partials_l = Vec::new();
    let mut partials_m = Vec::new();
    for i in 0..=4usize {
        for j in 0..=(4 - i) {
            if i + j >= 1 {
                partials_l.push(plate.lambda.partial(i, j));
                partials_m.push(plate.mu.partial(i, j));
            }
        }
    }

    let mut mu_min = f64::INFINITY;
    let mut bulk_min = f64::INFINITY;
    let mut c4 = 0.0f64;
    let steps = n.max(2);
    for a in 0..steps {
        for b in 0..steps {
            let t = |k: usize| k as f64 / (steps - 1) as f64;
            let p = Vec2::new(
                lo.x + (hi.x - lo.x) * t(a),
                lo.y + (hi.y - lo.y) * t(b),
            );
            let (l, m) = plate.lame_at(p);
            mu_min = mu_min.min(m);
            bulk_min = bulk_min.min(2.0 * m + 3.0 * l);
            c4 = c4.max(l.abs()).max(m.abs());
            for e in partials_l.iter().chain(&partials_m) {
                c4 = c4.max(e.eval(p).abs());
            }
        }
    }

    let at_least = |measured: f64, bound: f64| AprioriCheck {
        ok: measured >= bound,
        measured,
        bound,
    };
    let at_most = |measured: f64, bound: f64| AprioriCheck {
        ok: measured <= bound,
        measured,
        bound,
    };
    MaterialReport {
        shear: at_least(mu_min, bounds.min_modulus),
        bulk: at_least(bulk_min, bounds.min_modulus),
        smoothness: at_most(c4, bounds.max_c4),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn young_poisson_reference_values() {
        let (e, nu) = young_poisson(1.0, 1.0);
        assert_relative_eq!(e, 2.5);
        assert_relative_eq!(nu, 0.25);
        let (e, nu) = young_poisson(2.0, 1.0);
        assert_relative_eq!(e, 8.0 / 3.0);
        assert_relative_eq!(nu, 1.0 / 3.0);
    }

    #[test]
    fn shear_modulus_round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let lambda: f64 = rng.gen_range(-0.4..5.0);
            let mu: f64 = rng.gen_range(0.2..5.0);
            if 2.0 * mu + 3.0 * lambda <= 0.1 {
                continue;
            }
            let (e, nu) = young_poisson(lambda, mu);
            assert_relative_eq!(e / (2.0 * (1.0 + nu)), mu, max_relative = 1e-12);
        }
    }

    #[test]
    fn bending_stiffness_reference_values() {
        assert_relative_eq!(bending_stiffness(12.0, 0.0, 1.0), 1.0);
        assert_relative_eq!(bending_stiffness(12.0, 0.0, 2.0), 8.0);
    }

    #[test]
    fn tensor_on_identity() {
        let id = [[1.0, 0.0], [0.0, 1.0]];
        let pa = plate_tensor_apply(1.0, 0.25, id);
        assert_relative_eq!(pa[0][0], 1.25);
        assert_relative_eq!(pa[1][1], 1.25);
        assert_relative_eq!(pa[0][1], 0.0);
        assert_relative_eq!(tensor_quadratic_form(1.0, 0.0, id), 2.0);
        assert_relative_eq!(tensor_quadratic_form(1.0, 0.25, id), 2.5);
    }

    #[test]
    fn tensor_is_symmetric_and_coercive() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let b: f64 = rng.gen_range(0.1..3.0);
            let nu: f64 = rng.gen_range(-0.9..0.49);
            let sym = |rng: &mut rand_chacha::ChaCha8Rng| {
                let d: f64 = rng.gen_range(-1.0..1.0);
                let e: f64 = rng.gen_range(-1.0..1.0);
                let f: f64 = rng.gen_range(-1.0..1.0);
                [[d, f], [f, e]]
            };
            let a = sym(&mut rng);
            let c = sym(&mut rng);
            let dot = |x: [[f64; 2]; 2], y: [[f64; 2]; 2]| {
                x[0][0] * y[0][0] + x[0][1] * y[0][1] + x[1][0] * y[1][0] + x[1][1] * y[1][1]
            };
            assert_relative_eq!(
                dot(plate_tensor_apply(b, nu, a), c),
                dot(plate_tensor_apply(b, nu, c), a),
                epsilon = 1e-12
            );
            // spectral bounds: eigenvalues of the tensor are B(1−ν)
            // (deviatoric, twice) and B(1+ν) (spherical)
            let norm_sq = dot(a, a);
            let q = tensor_quadratic_form(b, nu, a);
            assert!(q >= b * (1.0 - nu.abs()) * norm_sq - 1e-12);
            assert!(q <= b * (1.0 + nu.abs()) * norm_sq + 1e-12);
        }
    }

    #[test]
    fn reduced_form_matrix_matches_tensor_form() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let b: f64 = rng.gen_range(0.1..3.0);
            let nu: f64 = rng.gen_range(-0.5..0.49);
            let v = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            let q = hessian_form_matrix(b, nu);
            let mut quad = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    quad += v[i] * q[i][j] * v[j];
                }
            }
            let a = [[v[0], v[2]], [v[2], v[1]]];
            assert_relative_eq!(quad, tensor_quadratic_form(b, nu, a), epsilon = 1e-12);
        }
    }

    #[test]
    fn plate_evaluates_variable_fields() {
        let plate =
            IsotropicPlate::from_formulas("2 + sin(x1)", "1 + 0.5*cos(x2)", 0.5).unwrap();
        assert!(!plate.is_homogeneous());
        let p = Vec2::new(0.7, -0.3);
        let (l, m) = plate.lame_at(p);
        assert_relative_eq!(l, 2.0 + 0.7f64.sin(), epsilon = 1e-14);
        assert_relative_eq!(m, 1.0 + 0.5 * 0.3f64.cos(), epsilon = 1e-14);
        let coeffs = plate.bending_at(p);
        let (e, nu) = young_poisson(l, m);
        assert_relative_eq!(
            coeffs.stiffness,
            bending_stiffness(e, nu, 0.5),
            epsilon = 1e-14
        );
        assert_relative_eq!(coeffs.poisson, nu, epsilon = 1e-14);
    }

    #[test]
    fn homogeneous_plate_round_trip() {
        let plate = IsotropicPlate::constant(1.0, 1.0, 1.0).unwrap();
        assert!(plate.is_homogeneous());
        let c = plate.bending_at(Vec2::<f64>::new(3.0, -2.0));
        assert_relative_eq!(c.stiffness, bending_stiffness(2.5, 0.25, 1.0));
        assert_relative_eq!(c.poisson, 0.25);
        assert!(IsotropicPlate::constant(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn material_check_flags_bad_moduli() {
        let lo = Vec2::new(-1.0, -1.0);
        let hi = Vec2::new(1.0, 1.0);
        let good = IsotropicPlate::constant(1.0, 1.0, 1.0).unwrap();
        assert!(check_material(&good, lo, hi, 8, MaterialBounds::default()).all_ok());

        let bad_bulk = IsotropicPlate::constant(-5.0, 1.0, 1.0).unwrap();
        let rep = check_material(&bad_bulk, lo, hi, 8, MaterialBounds::default());
        assert!(!rep.bulk.ok);
        assert_relative_eq!(rep.bulk.measured, -13.0);

        let rough = IsotropicPlate::from_formulas("1 + sin(10*x1)", "1", 1.0).unwrap();
        let rep = check_material(
            &rough,
            lo,
            hi,
            32,
            MaterialBounds {
                min_modulus: 1e-6,
                max_c4: 100.0,
            },
        );
        // fourth derivative carries 10^4
        assert!(!rep.smoothness.ok);
        assert!(rep.smoothness.measured > 5e3);
    }
}
