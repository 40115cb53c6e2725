//! Analytic pinning and propagation tests for the lower bichromatic front
//! (homogeneous 0 on the left, the stable pattern B on the right).
//!
//! Pinning is certified by `d <= (1 - a)^2 / 8`. Propagation is certified by
//! `u_bot < u_top`, where both constants come from reflecting through the
//! graph of the m-map. The cheaper sufficient test
//! `reflect_v(u_top) > v_bot` is evaluated and recorded as well.

use serde::Serialize;

use crate::cubic::{gamma_crit, Params};
use crate::equilibria::{branch_point_with, d_minus, solve_equilibria, Branch};
use crate::error::{Error, Result};
use crate::numeric::bisect;

/// Sample count of the scan for the right-most crossing defining `u_bot`.
pub const U_BOT_SCAN: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    ProvenPinned,
    ProvenTravelling,
    Undetermined,
    OutsideDomain,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::ProvenPinned => "ProvenPinned",
            Verdict::ProvenTravelling => "ProvenTravelling",
            Verdict::Undetermined => "Undetermined",
            Verdict::OutsideDomain => "OutsideDomain",
        }
    }
}

impl std::str::FromStr for Verdict {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "ProvenPinned" => Verdict::ProvenPinned,
            "ProvenTravelling" => Verdict::ProvenTravelling,
            "Undetermined" => Verdict::Undetermined,
            "OutsideDomain" => Verdict::OutsideDomain,
            other => return Err(format!("unknown verdict {other:?}")),
        })
    }
}

/// The rectangle construction at one parameter point with `d > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rectangle {
    pub params: Params,
    pub u_b: f64,
    pub v_b: f64,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub v_bot: f64,
    pub v_top: f64,
    pub u_top: f64,
}

impl Rectangle {
    /// Builds the rectangle from branch B, which must exist at `params`
    /// (closure of the nine-root region).
    pub fn new(params: Params) -> Result<Self> {
        Self::with_d_minus(params, None)
    }

    fn with_d_minus(params: Params, d_minus_a: Option<f64>) -> Result<Self> {
        if !(params.d > 0.0) {
            return Err(Error::OutOfDomain(
                "the reflection construction needs d > 0".into(),
            ));
        }
        let (u_b, v_b) = branch_point_with(Branch::B, params, d_minus_a)?;
        Self::from_b(params, u_b, v_b)
    }

    /// Builds the rectangle from a known B root.
    pub fn from_b(params: Params, u_b: f64, v_b: f64) -> Result<Self> {
        let (gamma_minus, gamma_plus) = gamma_crit(params)?;
        let m = |x: f64| params.m(x);
        let bad = |what: &str| {
            Error::OutOfDomain(format!(
                "rectangle ordering fails at (a, d) = ({}, {}): {what}",
                params.a, params.d
            ))
        };
        if !(m(gamma_minus) > u_b) {
            return Err(bad("m(gamma_minus) <= u_B"));
        }
        if !(m(gamma_plus) < u_b) {
            return Err(bad("m(gamma_plus) >= u_B"));
        }
        let v_bot = bisect(|v| m(v) - u_b, 0.0, gamma_minus);
        let v_top = bisect(|v| m(v) - u_b, gamma_minus, gamma_plus);
        let u_top = 2.0 * m(gamma_plus) - u_b;
        Ok(Rectangle {
            params,
            u_b,
            v_b,
            gamma_minus,
            gamma_plus,
            v_bot,
            v_top,
            u_top,
        })
    }

    /// Vertical reflection of the line `v = v_B` through the m-map graph.
    pub fn reflect_v(&self, u: f64) -> f64 {
        2.0 * self.params.m(u) - self.v_b
    }

    /// Inverse of the m-map on `[0, v_bot]`, defined for `u` in `[0, u_B]`.
    pub fn u_inv(&self, u: f64) -> Result<f64> {
        if !(0.0..=self.u_b).contains(&u) {
            return Err(Error::OutOfDomain(format!(
                "u_inv needs u in [0, {}], got {u}",
                self.u_b
            )));
        }
        Ok(self.u_inv_unchecked(u))
    }

    fn u_inv_unchecked(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= self.u_b {
            return self.v_bot;
        }
        // safeguarded Newton; m is increasing on [0, v_bot]
        let p = self.params;
        let (mut lo, mut hi) = (0.0, self.v_bot);
        let mut x = self.v_bot * u / self.u_b;
        for _ in 0..100 {
            let fx = p.m(x) - u;
            if fx == 0.0 {
                return x;
            }
            if fx < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let step = fx / p.dm(x);
            let next = x - step;
            x = if next > lo && next < hi {
                next
            } else {
                0.5 * (lo + hi)
            };
            if step.abs() <= 1e-16 * (1.0 + x.abs()) || hi - lo <= 1e-16 {
                break;
            }
        }
        x
    }

    /// Largest `u` in `[0, u_B]` with `reflect_v(u) = u_inv(u)`.
    pub fn u_bot(&self) -> f64 {
        let f = |u: f64| self.reflect_v(u) - self.u_inv_unchecked(u);
        let h = self.u_b / U_BOT_SCAN as f64;
        let mut hi = self.u_b;
        let mut f_hi = f(hi);
        for i in (0..U_BOT_SCAN).rev() {
            let lo = h * i as f64;
            let f_lo = f(lo);
            if f_lo == 0.0 {
                return lo;
            }
            if f_lo.signum() != f_hi.signum() {
                return bisect(f, lo, hi);
            }
            hi = lo;
            f_hi = f_lo;
        }
        0.0
    }

    /// `reflect_v(u_top) > v_bot`, sufficient for `u_bot < u_top`.
    pub fn simplified_test(&self) -> bool {
        self.reflect_v(self.u_top) > self.v_bot
    }
}

pub fn v_bot_top(params: Params) -> Result<(f64, f64)> {
    let r = Rectangle::new(params)?;
    Ok((r.v_bot, r.v_top))
}

pub fn u_top(params: Params) -> Result<f64> {
    Ok(Rectangle::new(params)?.u_top)
}

pub fn reflect_v(u: f64, params: Params) -> Result<f64> {
    Ok(Rectangle::new(params)?.reflect_v(u))
}

pub fn u_inv(u: f64, params: Params) -> Result<f64> {
    Rectangle::new(params)?.u_inv(u)
}

pub fn u_bot(params: Params) -> Result<f64> {
    Ok(Rectangle::new(params)?.u_bot())
}

/// The pinning bound `d <= (1 - a)^2 / 8` for the lower front.
pub fn pinning_bound(a: f64) -> f64 {
    (1.0 - a) * (1.0 - a) / 8.0
}

/// `u_top - u_bot` on the boundary `d = d_-(a)`.
pub fn gamma_fn(a: f64) -> Result<f64> {
    let dm = d_minus(a);
    let params = Params::new(a, dm)?;
    let r = Rectangle::with_d_minus(params, Some(dm))?;
    Ok(r.u_top - r.u_bot())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub params: Params,
    pub root_count: Option<usize>,
    pub in_omega_minus: bool,
    pub v_bot: Option<f64>,
    pub v_top: Option<f64>,
    pub u_top: Option<f64>,
    pub u_bot: Option<f64>,
    pub gamma_at_dminus: Option<f64>,
    /// `d <= (1 - a)^2 / 8`.
    pub pinning_bound_holds: bool,
    /// `u_bot < u_top`.
    pub travelling_test: Option<bool>,
    /// `reflect_v(u_top) > v_bot`.
    pub simplified_test: Option<bool>,
    pub verdict: Verdict,
}

/// Runs both criteria at `params`, including `Gamma(a)`.
pub fn classify(params: Params) -> CriterionReport {
    let gamma = gamma_fn(params.a).ok();
    classify_with_gamma(params, gamma)
}

/// As [`classify`], with a precomputed (or omitted) `Gamma(a)`.
pub fn classify_with_gamma(params: Params, gamma: Option<f64>) -> CriterionReport {
    let mut report = CriterionReport {
        params,
        root_count: None,
        in_omega_minus: false,
        v_bot: None,
        v_top: None,
        u_top: None,
        u_bot: None,
        gamma_at_dminus: gamma,
        pinning_bound_holds: params.d <= pinning_bound(params.a),
        travelling_test: None,
        simplified_test: None,
        verdict: Verdict::OutsideDomain,
    };
    let Ok(roots) = solve_equilibria(params) else {
        return report;
    };
    report.root_count = Some(roots.len());
    if roots.len() != 9 {
        return report;
    }
    report.in_omega_minus = true;
    let b = roots
        .iter()
        .find(|e| e.branch == Branch::B)
        .expect("nine roots include B");
    let rect = Rectangle::from_b(params, b.u, b.v);
    if let Ok(rect) = &rect {
        let u_bot = rect.u_bot();
        report.v_bot = Some(rect.v_bot);
        report.v_top = Some(rect.v_top);
        report.u_top = Some(rect.u_top);
        report.u_bot = Some(u_bot);
        report.travelling_test = Some(u_bot < rect.u_top);
        report.simplified_test = Some(rect.simplified_test());
    }
    report.verdict = if report.pinning_bound_holds {
        Verdict::ProvenPinned
    } else if report.travelling_test == Some(true) {
        Verdict::ProvenTravelling
    } else {
        Verdict::Undetermined
    };
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: f64, d: f64) -> Params {
        Params::new(a, d).unwrap()
    }

    fn cusp() -> Params {
        p(0.5, 1.0 / 24.0)
    }

    #[test]
    fn v_bot_top_solve_m_equal_u_b() {
        let r = Rectangle::new(cusp()).unwrap();
        let u_b = 0.5 - 3f64.sqrt() / 6.0;
        assert!((cusp().m(r.v_bot) - u_b).abs() < 1e-11);
        assert!((cusp().m(r.v_top) - u_b).abs() < 1e-11);
        assert!(r.v_bot < 0.5 - 2f64.sqrt() / 6.0);
    }

    #[test]
    fn small_coupling_limits() {
        let (v_bot, v_top) = v_bot_top(p(0.45, 1e-4)).unwrap();
        assert!(v_bot < 1e-3, "{v_bot}");
        assert!((v_top - 0.45).abs() < 1e-2, "{v_top}");
    }

    #[test]
    fn u_top_matches_direct_formula() {
        let params = p(0.45, 1e-4);
        let (u_b, _) = branch_point_with(Branch::B, params, None).unwrap();
        let (_, gp) = gamma_crit(params).unwrap();
        let direct = 2.0 * (gp - crate::cubic::g(gp, 0.45) / (2.0 * 1e-4)) - u_b;
        assert!((u_top(params).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn reflect_v_endpoints() {
        let r = Rectangle::new(p(0.45, 0.02)).unwrap();
        assert!((r.reflect_v(r.u_b) - r.v_b).abs() < 1e-12);
        assert!((r.reflect_v(0.0) + r.v_b).abs() < 1e-15);
    }

    #[test]
    fn u_inv_inverts_m() {
        let r = Rectangle::new(cusp()).unwrap();
        assert_eq!(r.u_inv(0.0).unwrap(), 0.0);
        assert_eq!(r.u_inv(r.u_b).unwrap(), r.v_bot);
        let x = r.u_inv(r.u_b / 2.0).unwrap();
        assert!((cusp().m(x) - r.u_b / 2.0).abs() < 1e-11);
        assert!(r.u_inv(r.u_b + 1e-3).is_err());
    }

    #[test]
    fn u_bot_solves_its_defining_equation() {
        for params in [cusp(), p(0.45, 0.02), p(0.6, 0.01)] {
            let r = Rectangle::new(params).unwrap();
            let u = r.u_bot();
            assert!((0.0..=r.u_b).contains(&u));
            assert!((r.reflect_v(u) - r.u_inv(u).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn cusp_and_near_one_are_travelling() {
        let r = Rectangle::new(cusp()).unwrap();
        assert!(r.u_bot() < r.u_top);
        let dm = d_minus(0.95);
        let r = Rectangle::new(p(0.95, dm)).unwrap();
        assert!(r.u_bot() < r.u_top);
    }

    #[test]
    fn u_top_expansion_near_one() {
        for a in [0.97, 0.98, 0.99] {
            let u = u_top(p(a, d_minus(a))).unwrap();
            let lead = (1.0 - a) * (1.0 - a) / 4.0;
            assert!(
                (u - lead).abs() < 2.0 * (1.0 - a).powi(3),
                "a = {a}: {u} vs {lead}"
            );
        }
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(p(0.45, 0.02)).verdict, Verdict::ProvenPinned);
        assert_eq!(classify(p(0.5, 0.0415)).verdict, Verdict::ProvenTravelling);
        let r = classify(p(0.5, 0.05));
        assert_eq!(r.verdict, Verdict::OutsideDomain);
        assert_eq!(r.root_count, Some(5));
    }

    #[test]
    fn gamma_positive_at_cusp_and_near_one() {
        assert!(gamma_fn(0.5).unwrap() > 0.0);
        assert!(gamma_fn(0.95).unwrap() > 0.0);
    }

    #[test]
    fn verdict_round_trips_through_text() {
        for v in [
            Verdict::ProvenPinned,
            Verdict::ProvenTravelling,
            Verdict::Undetermined,
            Verdict::OutsideDomain,
        ] {
            assert_eq!(v.as_str().parse::<Verdict>().unwrap(), v);
        }
    }
}
