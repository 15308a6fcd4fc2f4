//! Bounded Nelder–Mead simplex search.
//!
//! Derivative-free minimizer used both by the inclusion reconstruction and
//! by the affine-gauge polish inside the trace misfit. Box bounds are
//! enforced by clamping every trial point, which keeps the objective total
//! (the caller never sees an out-of-box argument).

use crate::scalar::Scalar;

/// Tuning knobs for [`nelder_mead_bounded`].
#[derive(Debug, Clone)]
pub struct NelderMeadOptions<T> {
    /// Hard cap on objective evaluations.
    pub max_evals: usize,
    /// Relative spread of simplex values below which the search stops.
    pub ftol_rel: T,
    /// Relative simplex diameter below which the search stops.
    pub xtol_rel: T,
    /// Initial step per coordinate (simplex edge from the start point).
    pub init_step: Vec<T>,
    pub reflection: T,
    pub expansion: T,
    pub contraction: T,
    pub shrink: T,
}

impl<T: Scalar> NelderMeadOptions<T> {
    /// Standard coefficients with a per-coordinate initial step.
    pub fn with_steps(max_evals: usize, init_step: Vec<T>) -> Self {
        NelderMeadOptions {
            max_evals,
            ftol_rel: T::real(1e-10),
            xtol_rel: T::real(1e-10),
            init_step,
            reflection: T::one(),
            expansion: T::real(2.0),
            contraction: T::real(0.5),
            shrink: T::real(0.5),
        }
    }
}

/// Search outcome. `converged` reports whether a tolerance (rather than the
/// evaluation budget) ended the search.
#[derive(Debug, Clone)]
pub struct NelderMeadResult<T> {
    pub x: Vec<T>,
    pub value: T,
    pub evals: usize,
    pub converged: bool,
}

fn clamp_to<T: Scalar>(x: &mut [T], lo: &[T], hi: &[T]) {
    for i in 0..x.len() {
        x[i] = x[i].max(lo[i]).min(hi[i]);
    }
}

/// Minimizes `f` over the box `[lo, hi]` starting from `x0`.
///
/// # Arguments
///
/// * `f` — objective; must return a finite value for every in-box argument.
/// * `x0` — start point (clamped into the box if needed).
/// * `lo`, `hi` — per-coordinate bounds, `lo[i] <= hi[i]`.
///
/// Deterministic: no internal randomness, so identical inputs give identical
/// evaluation sequences.
pub fn nelder_mead_bounded<T: Scalar>(
    mut f: impl FnMut(&[T]) -> T,
    x0: &[T],
    lo: &[T],
    hi: &[T],
    opts: &NelderMeadOptions<T>,
) -> NelderMeadResult<T> {
    let dim = x0.len();
    assert!(dim > 0 && lo.len() == dim && hi.len() == dim && opts.init_step.len() == dim);

    let mut evals = 0usize;
    let mut eval = |x: &[T], evals: &mut usize| -> T {
        *evals += 1;
        f(x)
    };

    // initial simplex: x0 plus one perturbed vertex per coordinate
    let mut simplex: Vec<Vec<T>> = Vec::with_capacity(dim + 1);
    let mut base = x0.to_vec();
    clamp_to(&mut base, lo, hi);
    simplex.push(base.clone());
    for i in 0..dim {
        let mut v = base.clone();
        let step = opts.init_step[i];
        v[i] = if v[i] + step <= hi[i] { v[i] + step } else { v[i] - step };
        clamp_to(&mut v, lo, hi);
        simplex.push(v);
    }
    let mut values: Vec<T> = simplex.iter().map(|v| eval(v, &mut evals)).collect();

    let mut converged = false;
    while evals < opts.max_evals {
        // order vertices by value
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite objective"));
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];

        let fbest = values[best];
        let fworst = values[worst];
        let spread = (fworst - fbest).abs();
        let scale = fbest.abs().max(fworst.abs()).max(T::real(1e-300));
        let mut diam = T::zero();
        for v in &simplex {
            for i in 0..dim {
                diam = diam.max((v[i] - simplex[best][i]).abs());
            }
        }
        let xscale = simplex[best]
            .iter()
            .fold(T::one(), |m, &c| m.max(c.abs()));
        if spread <= opts.ftol_rel * scale || diam <= opts.xtol_rel * xscale {
            converged = true;
            break;
        }

        // centroid of all but the worst vertex
        let mut centroid = vec![T::zero(); dim];
        for (vi, v) in simplex.iter().enumerate() {
            if vi == worst {
                continue;
            }
            for i in 0..dim {
                centroid[i] += v[i];
            }
        }
        let inv = T::one() / T::real(dim as f64);
        for c in centroid.iter_mut() {
            *c *= inv;
        }

        let blend = |a: &[T], b: &[T], t: T| -> Vec<T> {
            let mut out = vec![T::zero(); dim];
            for i in 0..dim {
                out[i] = a[i] + t * (a[i] - b[i]);
            }
            clamp_to(&mut out, lo, hi);
            out
        };

        let reflected = blend(&centroid, &simplex[worst], opts.reflection);
        let fr = eval(&reflected, &mut evals);

        if fr < values[order[0]] {
            let expanded = blend(&centroid, &simplex[worst], opts.reflection * opts.expansion);
            let fe = eval(&expanded, &mut evals);
            if fe < fr {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
        } else if fr < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = fr;
        } else {
            // contract toward the better of (worst, reflected)
            let (anchor, fanchor) = if fr < values[worst] {
                (reflected.clone(), fr)
            } else {
                (simplex[worst].clone(), values[worst])
            };
            let mut contracted = vec![T::zero(); dim];
            for i in 0..dim {
                contracted[i] = centroid[i] + opts.contraction * (anchor[i] - centroid[i]);
            }
            clamp_to(&mut contracted, lo, hi);
            let fc = eval(&contracted, &mut evals);
            if fc < fanchor {
                simplex[worst] = contracted;
                values[worst] = fc;
            } else {
                // shrink toward the best vertex
                let best_v = simplex[best].clone();
                for vi in 0..=dim {
                    if vi == best {
                        continue;
                    }
                    for i in 0..dim {
                        simplex[vi][i] =
                            best_v[i] + opts.shrink * (simplex[vi][i] - best_v[i]);
                    }
                    let v = simplex[vi].clone();
                    values[vi] = eval(&v, &mut evals);
                    if evals >= opts.max_evals {
                        break;
                    }
                }
            }
        }
    }

    let mut besti = 0;
    for i in 1..values.len() {
        if values[i] < values[besti] {
            besti = i;
        }
    }
    NelderMeadResult {
        x: simplex[besti].clone(),
        value: values[besti],
        evals,
        converged,
    }
}
