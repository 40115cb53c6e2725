//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn g(u: f64, a: f64) -> f64 {
    u * (1.0 - u) * (u - a)
}

fn dg(u: f64, a: f64) -> f64 {
    -3.0 * u * u + 2.0 * (1.0 + a) * u - a
}

fn system(u: f64, v: f64, a: f64, d: f64) -> (f64, f64) {
    (2.0 * d * (v - u) + g(u, a), 2.0 * d * (u - v) + g(v, a))
}

/// Newton's method on the two-site system from `(u, v)`.
pub fn newton(mut u: f64, mut v: f64, a: f64, d: f64) -> Option<(f64, f64)> {
    for _ in 0..60 {
        let (f1, f2) = system(u, v, a, d);
        if f1.abs().max(f2.abs()) < 1e-15 {
            return Some((u, v));
        }
        let (j11, j12) = (dg(u, a) - 2.0 * d, 2.0 * d);
        let (j21, j22) = (2.0 * d, dg(v, a) - 2.0 * d);
        let det = j11 * j22 - j12 * j21;
        if det.abs() < 1e-300 {
            return None;
        }
        u -= (j22 * f1 - j12 * f2) / det;
        v -= (j11 * f2 - j21 * f1) / det;
        if !(u.abs() < 10.0 && v.abs() < 10.0) {
            return None;
        }
    }
    let (f1, f2) = system(u, v, a, d);
    (f1.abs().max(f2.abs()) < 1e-13).then_some((u, v))
}

/// Every root of the two-site system in `[0, 1]^2`: Newton from each node
/// of a `res x res` grid, deduplicated at `1e-9`.
pub fn grid_newton_roots(a: f64, d: f64, res: usize) -> Vec<(f64, f64)> {
    let mut roots: Vec<(f64, f64)> = Vec::new();
    for i in 0..res {
        for k in 0..res {
            let u0 = (i as f64 + 0.5) / res as f64;
            let v0 = (k as f64 + 0.5) / res as f64;
            let Some((u, v)) = newton(u0, v0, a, d) else {
                continue;
            };
            let inside = |x: f64| (-1e-12..=1.0 + 1e-12).contains(&x);
            if inside(u)
                && inside(v)
                && !roots
                    .iter()
                    .any(|r| (r.0 - u).abs().max((r.1 - v).abs()) < 1e-9)
            {
                roots.push((u, v));
            }
        }
    }
    roots.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    roots
}

/// Whether two root sets match one-to-one within `tol`.
pub fn same_root_set(lhs: &[(f64, f64)], rhs: &[(f64, f64)], tol: f64) -> bool {
    lhs.len() == rhs.len()
        && lhs.iter().all(|p| {
            rhs.iter()
                .any(|q| (p.0 - q.0).abs().max((p.1 - q.1).abs()) < tol)
        })
        && rhs.iter().all(|p| {
            lhs.iter()
                .any(|q| (p.0 - q.0).abs().max((p.1 - q.1).abs()) < tol)
        })
}

/// Fold value of `d` from a dense scan of the saddle-node condition: the
/// largest `d` on a fine grid where the oracle still finds more than five
/// roots. Only used away from the cusp.
pub fn brute_d_minus(a: f64) -> f64 {
    let (mut lo, mut hi) = (1e-6, a * (1.0 - a) / 4.0);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if grid_newton_roots(a, mid, 60).len() > 5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// A random interior point whose distance to both bifurcation curves,
/// measured in `d`, is at least `margin`.
pub fn random_interior(
    rng: &mut ChaCha8Rng,
    margin: f64,
    d_minus: impl Fn(f64) -> f64,
) -> (f64, f64) {
    loop {
        let a: f64 = rng.gen_range(0.05..0.95);
        let d: f64 = rng.gen_range(0.002..0.07);
        let d_plus = a * (1.0 - a) / 4.0;
        if (d - d_plus).abs() > margin && (d - d_minus(a)).abs() > margin {
            return (a, d);
        }
    }
}
