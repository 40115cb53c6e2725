//! The bistable cubic `g(u; a) = u (1 - u) (u - a)` and the curves built on
//! it: critical points, the balance curves `v_-`/`v_+` solving
//! `g(v) = -g(u)`, and the m-map `x - g(x)/(2d)` with its critical points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::cubic_real_roots;

/// A point `(a, d)` in parameter space: detuning `a` and coupling `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub a: f64,
    pub d: f64,
}

impl Params {
    pub fn new(a: f64, d: f64) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidParams(format!("a = {a} must lie in (0, 1)")));
        }
        if !(d >= 0.0 && d.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "d = {d} must be finite and >= 0"
            )));
        }
        Ok(Self { a, d })
    }

    /// The parameter point related by the symmetry `g(1 - u; 1 - a) = -g(u; a)`.
    pub fn mirrored(self) -> Self {
        Self {
            a: 1.0 - self.a,
            d: self.d,
        }
    }

    pub fn g(&self, u: f64) -> f64 {
        g(u, self.a)
    }

    /// `x - g(x)/(2d)`; callers guarantee `d > 0`.
    pub fn m(&self, x: f64) -> f64 {
        x - g(x, self.a) / (2.0 * self.d)
    }

    pub fn dm(&self, x: f64) -> f64 {
        1.0 - dg(x, self.a) / (2.0 * self.d)
    }
}

#[inline]
pub fn g(u: f64, a: f64) -> f64 {
    u * (1.0 - u) * (u - a)
}

#[inline]
pub fn dg(u: f64, a: f64) -> f64 {
    (-3.0 * u + 2.0 * (1.0 + a)) * u - a
}

#[inline]
pub fn d2g(u: f64, a: f64) -> f64 {
    -6.0 * u + 2.0 * (1.0 + a)
}

/// `g` or one of its derivatives. Orders above three vanish identically.
pub fn eval_g(u: f64, a: f64, order: u32) -> f64 {
    match order {
        0 => g(u, a),
        1 => dg(u, a),
        2 => d2g(u, a),
        3 => -6.0,
        _ => 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CubicCriticalPoints {
    pub u_min: f64,
    pub u_infl: f64,
    pub u_max: f64,
}

pub fn critical_points(a: f64) -> CubicCriticalPoints {
    let u_infl = (a + 1.0) / 3.0;
    let half_width = (1.0 - a * (1.0 - a)).sqrt() / 3.0;
    CubicCriticalPoints {
        u_min: u_infl - half_width,
        u_infl,
        u_max: u_infl + half_width,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    Minus,
    Plus,
}

fn check_branch_domain(u: f64, a: f64) -> Result<()> {
    if !(a > 0.0 && a <= 0.5) {
        return Err(Error::OutOfDomain(format!(
            "v_branches needs 0 < a <= 1/2, got a = {a}"
        )));
    }
    if !(0.0..=a).contains(&u) {
        return Err(Error::OutOfDomain(format!("u = {u} outside [0, a = {a}]")));
    }
    Ok(())
}

/// Both solutions `v` in `[a, 1]` of `g(v; a) = -g(u; a)` for `u in [0, a]`,
/// `a <= 1/2`, as `(v_minus, v_plus)`.
pub fn v_branches(u: f64, a: f64) -> Result<(f64, f64)> {
    check_branch_domain(u, a)?;
    Ok(v_branches_unchecked(u, a))
}

pub(crate) fn v_branches_unchecked(u: f64, a: f64) -> (f64, f64) {
    // g(v) = c  <=>  v^3 - (1 + a) v^2 + a v + c = 0
    let c = -g(u, a);
    let roots = cubic_real_roots(-(1.0 + a), a, c);
    // For u in [0, a] and a <= 1/2 there are always three real roots
    // (one in (-inf, 0]); the solver returns repeated roots twice.
    let (lo, hi) = match roots.as_slice() {
        [_, m, h] => (*m, *h),
        // unreachable in exact arithmetic: rounding has collapsed the pair
        [r] => (*r, *r),
        _ => (a, 1.0),
    };
    (lo.clamp(a, 1.0), hi.clamp(a, 1.0))
}

/// Derivative of `v_-` or `v_+` at `u`, from `v' = -g'(u) / g'(v(u))`.
pub fn v_branch_deriv(u: f64, a: f64, which: Which) -> Result<f64> {
    check_branch_domain(u, a)?;
    let (vm, vp) = v_branches_unchecked(u, a);
    let v = match which {
        Which::Minus => vm,
        Which::Plus => vp,
    };
    // the identity v_-(a) = a makes the quotient exactly -1 there
    if which == Which::Minus && u == a {
        return Ok(-1.0);
    }
    let denom = dg(v, a);
    if denom.abs() < 1e-14 {
        return Err(Error::Singular(format!(
            "g'(v) = {denom:e} at v = {v} (u = {u}, a = {a})"
        )));
    }
    Ok(-dg(u, a) / denom)
}

/// The m-map `x - g(x; a)/(2d)`.
pub fn m_map(x: f64, params: Params) -> Result<f64> {
    if params.d <= 0.0 {
        return Err(Error::InvalidParams("m-map needs d > 0".into()));
    }
    Ok(params.m(x))
}

/// Critical points `(gamma_minus, gamma_plus)` of the m-map.
pub fn gamma_crit(params: Params) -> Result<(f64, f64)> {
    let Params { a, d } = params;
    let disc = a * a - a + 1.0 - 6.0 * d;
    if disc < 0.0 {
        return Err(Error::NegativeDiscriminant(disc));
    }
    let centre = (a + 1.0) / 3.0;
    let half = disc.sqrt() / 3.0;
    Ok((centre - half, centre + half))
}
