//! Roots of the two-site balance system
//!
//! ```text
//! G1 = 2d (v - u) + g(u; a)
//! G2 = 2d (u - v) + g(v; a)
//! ```
//!
//! whose zeros are the spatially 2-periodic equilibria of the lattice
//! equation. Bichromatic roots with `v > u` are found as intersections of
//! the balance curves `v_-`, `v_+` with the graph of the m-map on `[0, a]`
//! (for `a <= 1/2`; larger `a` goes through the mirror symmetry
//! `(u, v) -> (1 - v, 1 - u)`, `a -> 1 - a`).

use serde::Serialize;

use crate::cubic::{dg, g, v_branches_unchecked, Params};
use crate::error::{Error, Result};
use crate::numeric::{bisect, grid_min};

/// Distance from `d_-(a)` or `d_+(a)` inside which root counts are refused.
pub const BOUNDARY_TOL: f64 = 1e-7;
/// Sup-norm radius under which two roots are considered the same.
pub const DEDUP_RADIUS: f64 = 1e-7;
/// Slack for membership of the closed regions at `d = d_-(a)`; covers the
/// accuracy of the computed fold value.
pub const CLOSURE_TOL: f64 = 1e-9;

const GAP_SAMPLES: usize = 2000;
const DET_DEGENERATE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Branch {
    Zero,
    MonoA,
    One,
    A,
    B,
    C,
    D,
    SwappedA,
    SwappedB,
    SwappedC,
    SwappedD,
}

impl Branch {
    pub fn swapped(self) -> Self {
        use Branch::*;
        match self {
            A => SwappedA,
            B => SwappedB,
            C => SwappedC,
            D => SwappedD,
            SwappedA => A,
            SwappedB => B,
            SwappedC => C,
            SwappedD => D,
            other => other,
        }
    }

    /// Label of the same root after the mirror map `a -> 1 - a`.
    fn mirrored(self) -> Self {
        use Branch::*;
        match self {
            A => C,
            C => A,
            SwappedA => SwappedC,
            SwappedC => SwappedA,
            Zero => One,
            One => Zero,
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stability {
    StableNode,
    Saddle,
    UnstableNode,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equilibrium {
    pub u: f64,
    pub v: f64,
    pub branch: Branch,
    pub stability: Stability,
}

/// `D_{1,2} G`, a symmetric 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jacobian(pub [[f64; 2]; 2]);

impl Jacobian {
    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Eigenvalues in ascending order (real, the matrix is symmetric).
    pub fn eigenvalues(&self) -> (f64, f64) {
        let half_tr = 0.5 * self.trace();
        let diff = 0.5 * (self.0[0][0] - self.0[1][1]);
        let r = diff.hypot(self.0[0][1]);
        (half_tr - r, half_tr + r)
    }

    pub fn stability(&self) -> Stability {
        let det = self.det();
        if det.abs() <= DET_DEGENERATE {
            Stability::Degenerate
        } else if det < 0.0 {
            Stability::Saddle
        } else if self.trace() < 0.0 {
            Stability::StableNode
        } else {
            Stability::UnstableNode
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BifurcationCurves {
    pub a: f64,
    pub d_minus: f64,
    pub d_plus: f64,
}

pub fn bifurcation_curves(a: f64) -> BifurcationCurves {
    BifurcationCurves {
        a,
        d_minus: d_minus(a),
        d_plus: d_plus(a),
    }
}

pub fn g_system(u: f64, v: f64, params: Params) -> [f64; 2] {
    let Params { a, d } = params;
    [2.0 * d * (v - u) + g(u, a), 2.0 * d * (u - v) + g(v, a)]
}

pub fn jacobian_g(u: f64, v: f64, params: Params) -> Jacobian {
    let Params { a, d } = params;
    Jacobian([[dg(u, a) - 2.0 * d, 2.0 * d], [2.0 * d, dg(v, a) - 2.0 * d]])
}

pub fn d_plus(a: f64) -> f64 {
    a * (1.0 - a) / 4.0
}

/// `v_+(u) - m(u)` on `[0, a]`, `a <= 1/2`.
fn plus_gap(u: f64, p: Params) -> f64 {
    v_branches_unchecked(u, p.a).1 - p.m(u)
}

/// Global minimum of `v_+ - m` over `[0, a]`, as `(u, value)`.
fn plus_gap_min(p: Params) -> (f64, f64) {
    grid_min(|u| plus_gap(u, p), 0.0, p.a, GAP_SAMPLES)
}

/// Fold of the B/C pair for `a <= 1/2`: `(d_-(a), u_B = u_C)`.
pub(crate) fn fold(a: f64) -> (f64, f64) {
    debug_assert!(a <= 0.5);
    if a <= 0.0 {
        return (0.0, 0.0);
    }
    let mut lo = 0.0;
    let mut hi = d_plus(a);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if plus_gap_min(Params { a, d: mid }).1 > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let d = 0.5 * (lo + hi);
    (d, plus_gap_min(Params { a, d }).0)
}

/// The curve `d_-(a)` bounding the nine-root region, by bisection on the
/// sign of `min (v_+ - m)`. Uses `d_-(a) = d_-(1 - a)` for `a > 1/2`.
pub fn d_minus(a: f64) -> f64 {
    let r = a.min(1.0 - a);
    if r <= 0.0 {
        return 0.0;
    }
    fold(r).0
}

/// Inverse of `d_-` on `[0, 1/2]`.
pub fn a_minus(d: f64) -> f64 {
    if d <= 0.0 {
        return 0.0;
    }
    if d >= 1.0 / 24.0 {
        return 0.5;
    }
    let delta = 1.0 / 24.0 - d;
    let guess = 0.5 - (1152.0 * delta.powi(3)).sqrt();
    let mut lo = (guess - (10.0 * delta).max(1e-3)).max(0.0);
    if d_minus(lo) > d {
        lo = 0.0;
    }
    bisect(|a| d_minus(a) - d, lo, 0.5)
}

/// Root of `v_- = m` in `[0, a)`, valid for `0 < d < d_+(a)`, `a <= 1/2`.
///
/// Dividing out the trivial root at `u = a` leaves a function with a
/// single sign change on `[0, a]`.
fn minus_root(p: Params) -> f64 {
    let a = p.a;
    let at_a = 2.0 - dg(a, a) / (2.0 * p.d);
    bisect(
        |u| {
            if u >= a {
                at_a
            } else {
                (v_branches_unchecked(u, a).0 - p.m(u)) / (a - u)
            }
        },
        0.0,
        a,
    )
}

/// Newton polish of a root of G, accepting only residual-decreasing steps.
fn polish(mut u: f64, mut v: f64, p: Params) -> (f64, f64) {
    let norm = |r: [f64; 2]| r[0].abs().max(r[1].abs());
    let mut res = g_system(u, v, p);
    for _ in 0..8 {
        let j = jacobian_g(u, v, p);
        let det = j.det();
        if norm(res) == 0.0 || det.abs() < 1e-14 {
            break;
        }
        let m = &j.0;
        let du = (m[1][1] * res[0] - m[0][1] * res[1]) / det;
        let dv = (m[0][0] * res[1] - m[1][0] * res[0]) / det;
        let (nu, nv) = (u - du, v - dv);
        let nres = g_system(nu, nv, p);
        if norm(nres) >= norm(res) {
            break;
        }
        (u, v, res) = (nu, nv, nres);
    }
    (u, v)
}

fn reduce(p: Params) -> (Params, bool) {
    if p.a > 0.5 {
        (p.mirrored(), true)
    } else {
        (p, false)
    }
}

fn unmirror((u, v): (f64, f64), mirrored: bool) -> (f64, f64) {
    if mirrored {
        (1.0 - v, 1.0 - u)
    } else {
        (u, v)
    }
}

fn classify_point(u: f64, v: f64, branch: Branch, p: Params) -> Equilibrium {
    Equilibrium {
        u,
        v,
        branch,
        stability: jacobian_g(u, v, p).stability(),
    }
}

/// All roots of `G = 0` in `[0, 1]^2`: nine in `0 < d < d_-(a)`, five in
/// `d_-(a) < d < d_+(a)`, three for `d > d_+(a)`.
///
/// Parameter points within [`BOUNDARY_TOL`] of either bifurcation curve
/// are refused with [`Error::BoundaryDegenerate`].
pub fn solve_equilibria(params: Params) -> Result<Vec<Equilibrium>> {
    let Params { a, d } = params;
    if !(a > 0.0 && a < 1.0) || !(d > 0.0) {
        return Err(Error::InvalidParams(format!(
            "need 0 < a < 1 and d > 0, got ({a}, {d})"
        )));
    }
    let (rp, mirrored) = reduce(params);
    let ra = rp.a;
    let dp = d_plus(ra);
    if (d - dp).abs() <= BOUNDARY_TOL {
        return Err(Error::BoundaryDegenerate {
            a,
            d,
            curve: "d_plus",
            tol: BOUNDARY_TOL,
        });
    }

    if d > dp {
        return Ok(vec![
            classify_point(0.0, 0.0, Branch::Zero, params),
            classify_point(a, a, Branch::MonoA, params),
            classify_point(1.0, 1.0, Branch::One, params),
        ]);
    }

    let (u_star, gap) = plus_gap_min(rp);
    // first-order estimate of d - d_-(a) from the gap and its d-derivative
    let slope = -g(u_star, ra) / (2.0 * d * d);
    if slope <= 0.0 || (gap / slope).abs() < 1e-4 {
        let dm = fold(ra).0;
        if (d - dm).abs() <= BOUNDARY_TOL {
            return Err(Error::BoundaryDegenerate {
                a,
                d,
                curve: "d_minus",
                tol: BOUNDARY_TOL,
            });
        }
    }

    let mut bichromatic: Vec<(f64, f64)> = Vec::with_capacity(3);
    let u = minus_root(rp);
    bichromatic.push((u, v_branches_unchecked(u, ra).0));
    if gap < 0.0 {
        for u in [
            bisect(|u| plus_gap(u, rp), 0.0, u_star),
            bisect(|u| plus_gap(u, rp), u_star, ra),
        ] {
            bichromatic.push((u, v_branches_unchecked(u, ra).1));
        }
    }
    let mut bichromatic: Vec<(f64, f64)> = bichromatic
        .into_iter()
        .map(|(u, v)| unmirror(polish(u, v, rp), mirrored))
        .collect();
    bichromatic.sort_by(|x, y| x.0.total_cmp(&y.0));

    let labels: &[Branch] = match bichromatic.len() {
        0 => &[],
        1 => &[Branch::D],
        3 => &[Branch::A, Branch::B, Branch::C],
        n => {
            return Err(Error::BoundaryDegenerate {
                a,
                d,
                curve: if n == 2 { "d_minus" } else { "unknown" },
                tol: BOUNDARY_TOL,
            })
        }
    };

    let mut roots = vec![
        classify_point(0.0, 0.0, Branch::Zero, params),
        classify_point(a, a, Branch::MonoA, params),
        classify_point(1.0, 1.0, Branch::One, params),
    ];
    for (&(u, v), &label) in bichromatic.iter().zip(labels) {
        roots.push(classify_point(u, v, label, params));
        roots.push(classify_point(v, u, label.swapped(), params));
    }
    for (i, x) in roots.iter().enumerate() {
        for y in &roots[i + 1..] {
            if (x.u - y.u).abs().max((x.v - y.v).abs()) < DEDUP_RADIUS {
                return Err(Error::BoundaryDegenerate {
                    a,
                    d,
                    curve: "collision",
                    tol: DEDUP_RADIUS,
                });
            }
        }
    }
    Ok(roots)
}

/// A point on one of the labelled branches, including the closure of the
/// branch's region (`d = 0` and `d = d_-(a)` for A/B/C, `d_-(a) <= d <=
/// d_+(a)` for D).
pub fn branch_point(branch: Branch, params: Params) -> Result<(f64, f64)> {
    branch_point_with(branch, params, None)
}

/// As [`branch_point`], reusing an already computed `d_-(a)`.
pub fn branch_point_with(
    branch: Branch,
    params: Params,
    d_minus_a: Option<f64>,
) -> Result<(f64, f64)> {
    use Branch::*;
    let Params { a, d } = params;
    match branch {
        Zero => return Ok((0.0, 0.0)),
        MonoA => return Ok((a, a)),
        One => return Ok((1.0, 1.0)),
        SwappedA | SwappedB | SwappedC | SwappedD => {
            let (u, v) = branch_point_with(branch.swapped(), params, d_minus_a)?;
            return Ok((v, u));
        }
        _ => {}
    }
    if !(a > 0.0 && a < 1.0) || !(d >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "need 0 < a < 1 and d >= 0, got ({a}, {d})"
        )));
    }
    let outside = |what: &str| {
        Error::OutOfDomain(format!(
            "branch {branch:?} undefined at (a, d) = ({a}, {d}): {what}"
        ))
    };

    if d == 0.0 {
        return match branch {
            A => Ok((0.0, a)),
            B => Ok((0.0, 1.0)),
            C => Ok((a, 1.0)),
            _ => Err(outside(
                "d = 0 lies outside the closure of the five-root region",
            )),
        };
    }

    let (rp, mirrored) = reduce(params);
    let ra = rp.a;
    let target = if mirrored { branch.mirrored() } else { branch };
    let dm = d_minus_a.unwrap_or_else(|| fold(ra).0);
    let dp = d_plus(ra);
    match target {
        A | B | C if d > dm + CLOSURE_TOL => return Err(outside("d exceeds d_-(a)")),
        D if d < dm - CLOSURE_TOL || d > dp + CLOSURE_TOL => {
            return Err(outside("d outside [d_-(a), d_+(a)]"))
        }
        _ => {}
    }

    let point = if ra == 0.5 && matches!(target, B | D) {
        // on the symmetry line u + v = 1 the pair solves u^2 - u + 4d = 0
        let s = (1.0 - 16.0 * d).max(0.0).sqrt();
        let u = 8.0 * d / (1.0 + s);
        (u, 1.0 - u)
    } else {
        match target {
            B | C => {
                let (u_star, gap) = plus_gap_min(rp);
                let u = if gap < 0.0 {
                    if target == B {
                        bisect(|u| plus_gap(u, rp), 0.0, u_star)
                    } else {
                        bisect(|u| plus_gap(u, rp), u_star, ra)
                    }
                } else {
                    u_star
                };
                polish(u, v_branches_unchecked(u, ra).1, rp)
            }
            A | D => {
                if d >= dp {
                    (ra, ra)
                } else {
                    let u = minus_root(rp);
                    polish(u, v_branches_unchecked(u, ra).0, rp)
                }
            }
            _ => unreachable!(),
        }
    };
    Ok(unmirror(point, mirrored))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Asymptotic {
    /// `d_-(a) ~ a^2/8 + a^4/32` as `a -> 0`; samples are values of `a`.
    CornerA0,
    /// `a_-(d) ~ 1/2 - sqrt(1152 delta^3)` with `delta = 1/24 - d`;
    /// samples are values of `delta`.
    Cusp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticRow {
    pub sample: f64,
    pub computed: f64,
    pub expansion: f64,
    pub error: f64,
    /// `error / a^5` (corner) or `error / delta^2` (cusp); `None` at the
    /// singular point itself.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticReport {
    pub which: Asymptotic,
    pub rows: Vec<AsymptoticRow>,
    /// Ratio at the sample farthest from the singular point.
    pub reference_ratio: f64,
    pub max_ratio: f64,
    pub pass: bool,
}

/// Growth factor allowed between the reference ratio and any other ratio.
pub const ASYMPTOTIC_GROWTH_BOUND: f64 = 3.0;

pub fn verify_asymptotics(which: Asymptotic, samples: &[f64]) -> AsymptoticReport {
    let rows: Vec<AsymptoticRow> = samples
        .iter()
        .map(|&s| {
            let (computed, expansion, scale) = match which {
                Asymptotic::CornerA0 => (d_minus(s), s * s / 8.0 + s.powi(4) / 32.0, s.powi(5)),
                Asymptotic::Cusp => (
                    a_minus(1.0 / 24.0 - s),
                    0.5 - (1152.0 * s.powi(3)).sqrt(),
                    s * s,
                ),
            };
            let error = (computed - expansion).abs();
            let ratio = (scale > 0.0).then(|| error / scale);
            AsymptoticRow {
                sample: s,
                computed,
                expansion,
                error,
                ratio,
            }
        })
        .collect();
    let reference_ratio = rows
        .iter()
        .filter(|r| r.ratio.is_some())
        .max_by(|x, y| x.sample.total_cmp(&y.sample))
        .and_then(|r| r.ratio)
        .unwrap_or(0.0);
    let max_ratio = rows.iter().filter_map(|r| r.ratio).fold(0.0, f64::max);
    let pass = rows.iter().all(|r| r.ratio.is_none_or(f64::is_finite))
        && max_ratio <= ASYMPTOTIC_GROWTH_BOUND * reference_ratio;
    AsymptoticReport {
        which,
        rows,
        reference_ratio,
        max_ratio,
        pass,
    }
}
