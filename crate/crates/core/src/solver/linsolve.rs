//! Sparse SPD factorization behind a scalar-type bridge.
//!
//! The energy matrices are symmetric positive definite once the rigid
//! displacements are constrained, so they are solved by a sparse Cholesky
//! factorization with a few steps of iterative refinement. The backend is
//! reached only through [`FactorScalar`], which keeps the rest of the crate
//! generic over the scalar type.

use crate::error::{PlateError, Result};
use crate::scalar::Scalar;
use crate::solver::assemble::AssembledSystem;
use faer::prelude::Solve;
use std::sync::Once;

static PARALLELISM: Once = Once::new();

fn init_parallelism() {
    PARALLELISM.call_once(|| {
        faer::set_global_parallelism(faer::Par::rayon(0));
    });
}

/// Scalar types with a sparse Cholesky backend.
pub trait FactorScalar: Scalar {
    /// Factors the SPD matrix given in CSC form and returns a solver for
    /// arbitrary right-hand sides.
    #[allow(clippy::type_complexity)]
    fn factor_spd(
        n: usize,
        col_ptr: &[usize],
        row_idx: &[usize],
        values: &[Self],
    ) -> Result<Box<dyn Fn(&[Self]) -> Vec<Self> + Send + Sync>>;
}

macro_rules! impl_factor_scalar {
    ($t:ty) => {
        impl FactorScalar for $t {
            fn factor_spd(
                n: usize,
                col_ptr: &[usize],
                row_idx: &[usize],
                values: &[Self],
            ) -> Result<Box<dyn Fn(&[Self]) -> Vec<Self> + Send + Sync>> {
                init_parallelism();
                let symbolic = faer::sparse::SymbolicSparseColMat::new_checked(
                    n,
                    n,
                    col_ptr.to_vec(),
                    None,
                    row_idx.to_vec(),
                );
                let mat = faer::sparse::SparseColMat::new(symbolic, values.to_vec());
                let llt = mat
                    .sp_cholesky(faer::Side::Lower)
                    .map_err(|e| PlateError::Solver(format!("sparse Cholesky failed: {e:?}")))?;
                Ok(Box::new(move |rhs: &[Self]| {
                    let b = faer::Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
                    let x = llt.solve(&b);
                    (0..rhs.len()).map(|i| x[(i, 0)]).collect()
                }))
            }
        }
    };
}

impl_factor_scalar!(f64);
impl_factor_scalar!(f32);

/// Outcome of a linear solve: final relative residual and refinement steps.
#[derive(Debug, Clone, Copy)]
pub struct LinearSolveReport<T> {
    pub rel_residual: T,
    pub refinement_steps: usize,
}

const MAX_REFINEMENTS: usize = 3;

fn norm2<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |s, &x| s + x * x).sqrt()
}

/// Solves `A x = rhs` for the assembled SPD system, refining until the
/// relative residual drops below `rel_tol`.
pub fn solve_spd<T: FactorScalar>(
    sys: &AssembledSystem<T>,
    rhs: &[T],
    rel_tol: T,
) -> Result<(Vec<T>, LinearSolveReport<T>)> {
    if rhs.len() != sys.n {
        return Err(PlateError::InvalidInput(format!(
            "right-hand side length {} does not match system size {}",
            rhs.len(),
            sys.n
        )));
    }
    let rhs_norm = norm2(rhs);
    if rhs_norm == T::zero() {
        return Ok((
            vec![T::zero(); sys.n],
            LinearSolveReport {
                rel_residual: T::zero(),
                refinement_steps: 0,
            },
        ));
    }
    let solve = T::factor_spd(sys.n, &sys.col_ptr, &sys.row_idx, &sys.values)?;
    let mut x = solve(rhs);
    let mut steps = 0;
    let mut rel = T::infinity();
    for _ in 0..=MAX_REFINEMENTS {
        let ax = sys.matvec(&x);
        let r: Vec<T> = rhs.iter().zip(&ax).map(|(&b, &a)| b - a).collect();
        rel = norm2(&r) / rhs_norm;
        if !rel.is_finite() {
            return Err(PlateError::Solver(
                "linear solve produced non-finite values".into(),
            ));
        }
        if rel <= rel_tol {
            break;
        }
        if steps == MAX_REFINEMENTS {
            return Err(PlateError::Solver(format!(
                "relative residual {} above tolerance {} after {} refinement steps",
                rel.as_f64(),
                rel_tol.as_f64(),
                MAX_REFINEMENTS
            )));
        }
        let dx = solve(&r);
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += *di;
        }
        steps += 1;
    }
    Ok((
        x,
        LinearSolveReport {
            rel_residual: rel,
            refinement_steps: steps,
        },
    ))
}
