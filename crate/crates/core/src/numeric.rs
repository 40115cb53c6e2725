//! Small scalar root finders and minimisers shared by the geometry,
//! equilibrium and criteria layers.

use std::f64::consts::PI;

/// Shortest decimal that parses back to the same `f64`, switching to
/// exponent notation for very small or large magnitudes.
pub fn fmt_float(x: f64) -> String {
    format!("{x:?}")
}

/// Real roots of the monic cubic `x^3 + b2 x^2 + b1 x + b0`, ascending.
///
/// When the discriminant is within rounding of zero the repeated root is
/// returned twice, so a cubic with three real roots (counted with
/// multiplicity) always yields three values. Every root is Newton-polished.
pub fn cubic_real_roots(b2: f64, b1: f64, b0: f64) -> Vec<f64> {
    let shift = b2 / 3.0;
    let p = b1 - b2 * shift;
    let q = 2.0 * shift * shift * shift - shift * b1 + b0;

    let mut roots = if p < 0.0 {
        let r = (-p / 3.0).sqrt();
        let arg = -q / (2.0 * r * r * r);
        if arg.abs() <= 1.0 + 1e-9 {
            let theta = arg.clamp(-1.0, 1.0).acos() / 3.0;
            (0..3)
                .map(|k| 2.0 * r * (theta - 2.0 * PI * k as f64 / 3.0).cos() - shift)
                .collect::<Vec<_>>()
        } else {
            // one real root, hyperbolic form
            let t = if arg > 0.0 {
                2.0 * r * (arg.acosh() / 3.0).cosh()
            } else {
                -2.0 * r * ((-arg).acosh() / 3.0).cosh()
            };
            vec![t - shift]
        }
    } else if p == 0.0 {
        vec![(-q).cbrt() - shift]
    } else {
        let r = (p / 3.0).sqrt();
        let arg = q / (2.0 * r * r * r);
        vec![-2.0 * r * (arg.asinh() / 3.0).sinh() - shift]
    };

    for x in roots.iter_mut() {
        *x = polish_cubic_root(b2, b1, b0, *x);
    }
    roots.sort_by(f64::total_cmp);
    roots
}

fn polish_cubic_root(b2: f64, b1: f64, b0: f64, mut x: f64) -> f64 {
    let eval = |x: f64| ((x + b2) * x + b1) * x + b0;
    let mut fx = eval(x);
    for _ in 0..4 {
        let dfx = (3.0 * x + 2.0 * b2) * x + b1;
        if dfx == 0.0 || fx == 0.0 {
            break;
        }
        let next = x - fx / dfx;
        let fnext = eval(next);
        if fnext.abs() >= fx.abs() {
            break;
        }
        x = next;
        fx = fnext;
    }
    x
}

/// Bisection on a bracketing interval, run until the midpoint no longer
/// separates the endpoints. The endpoint signs must differ (zero counts as
/// either sign).
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    let fhi = f(hi);
    if fhi == 0.0 {
        return hi;
    }
    debug_assert!(flo.signum() != fhi.signum(), "bisect: no sign change");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return mid;
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section search for a minimum of a unimodal function on `[lo, hi]`.
pub fn golden_min<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
        if x1 >= x2 {
            break;
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Global minimum of `f` on `[lo, hi]`: sample `samples + 1` equispaced
/// points, then refine around the best sample by golden section.
pub fn grid_min<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, samples: usize) -> (f64, f64) {
    let h = (hi - lo) / samples as f64;
    let mut best = (lo, f(lo));
    let mut best_i = 0;
    for i in 1..=samples {
        let x = if i == samples { hi } else { lo + h * i as f64 };
        let fx = f(x);
        if fx < best.1 {
            best = (x, fx);
            best_i = i;
        }
    }
    let left = if best_i == 0 {
        lo
    } else {
        lo + h * (best_i - 1) as f64
    };
    let right = if best_i == samples {
        hi
    } else {
        lo + h * (best_i + 1) as f64
    };
    let refined = golden_min(&mut f, left, right, 1e-15 * (1.0 + hi.abs()));
    if refined.1 < best.1 {
        refined
    } else {
        best
    }
}

/// Solves a tridiagonal system in place (Thomas algorithm).
///
/// `lower[i]` couples row `i` to `i - 1` (`lower[0]` unused), `upper[i]`
/// couples row `i` to `i + 1` (last entry unused). Returns `None` on a zero
/// pivot.
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
) -> Option<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot == 0.0 {
        return None;
    }
    c[0] = upper[0] / pivot;
    x[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return None;
        }
        c[i] = if i + 1 < n { upper[i] / pivot } else { 0.0 };
        x[i] = (rhs[i] - lower[i] * x[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Some(x)
}
