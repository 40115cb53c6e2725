//! Self-checks against known closed forms and asymptotics, grouped into
//! suites for the command line.

use serde::Serialize;

use crate::criteria::{gamma_fn, Rectangle};
use crate::cubic::Params;
use crate::equilibria::{branch_point, verify_asymptotics, Asymptotic, Branch};

pub const CORNER_SAMPLES: [f64; 4] = [0.04, 0.06, 0.08, 0.10];
pub const CUSP_SAMPLES: [f64; 3] = [4e-4, 1e-3, 2e-3];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: String) -> Self {
        Check {
            name: name.to_string(),
            pass,
            detail,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Suite {
    Corner,
    Cusp,
    Gamma,
    All,
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "corner" => Ok(Suite::Corner),
            "cusp" => Ok(Suite::Cusp),
            "gamma" => Ok(Suite::Gamma),
            "all" => Ok(Suite::All),
            other => Err(format!(
                "unknown suite {other:?}, expected corner|cusp|gamma|all"
            )),
        }
    }
}

pub fn run_suite(suite: Suite) -> Vec<Check> {
    match suite {
        Suite::Corner => corner_checks(),
        Suite::Cusp => cusp_checks(),
        Suite::Gamma => gamma_checks(),
        Suite::All => [corner_checks(), cusp_checks(), gamma_checks()].concat(),
    }
}

pub fn corner_checks() -> Vec<Check> {
    let r = verify_asymptotics(Asymptotic::CornerA0, &CORNER_SAMPLES);
    vec![Check::new(
        "corner expansion of d_minus",
        r.pass,
        format!(
            "max err/a^5 = {:e}, at a = 0.1: {:e}",
            r.max_ratio, r.reference_ratio
        ),
    )]
}

/// Closed forms at `(a, d) = (1/2, 1/24)`.
pub fn cusp_closed_forms() -> Vec<Check> {
    let cusp = Params {
        a: 0.5,
        d: 1.0 / 24.0,
    };
    let (s2, s3) = (2f64.sqrt(), 3f64.sqrt());
    let mut out = Vec::new();
    match branch_point(Branch::B, cusp) {
        Ok((u, v)) => {
            let err = (u - (0.5 - s3 / 6.0))
                .abs()
                .max((v - (0.5 + s3 / 6.0)).abs());
            out.push(Check::new(
                "branch B at the cusp",
                err < 1e-8,
                format!("({u}, {v}), error {err:e}"),
            ));
        }
        Err(e) => out.push(Check::new("branch B at the cusp", false, e.to_string())),
    }
    match Rectangle::new(cusp) {
        Ok(rect) => {
            let expected = 0.5 - 4.0 / 9.0 * s2 + s3 / 6.0;
            let err = (rect.u_top - expected).abs();
            out.push(Check::new(
                "u_top at the cusp",
                err < 1e-8,
                format!("{} vs {expected}, error {err:e}", rect.u_top),
            ));
            let r = rect.reflect_v(rect.u_top);
            out.push(Check::new(
                "reflect_v(u_top) at the cusp",
                (r - 0.6286).abs() < 5e-4,
                format!("{r} vs 0.6286"),
            ));
        }
        Err(e) => out.push(Check::new("rectangle at the cusp", false, e.to_string())),
    }
    out
}

pub fn cusp_checks() -> Vec<Check> {
    let r = verify_asymptotics(Asymptotic::Cusp, &CUSP_SAMPLES);
    let mut out = vec![Check::new(
        "cusp expansion of a_minus",
        r.pass,
        format!(
            "max err/delta^2 = {:e}, at delta = 2e-3: {:e}",
            r.max_ratio, r.reference_ratio
        ),
    )];
    out.extend(cusp_closed_forms());
    out
}

/// `Gamma(a)` on `0.50, 0.51, ..., 0.99`.
pub fn gamma_grid() -> Vec<(f64, Option<f64>)> {
    use rayon::prelude::*;
    (50..100)
        .into_par_iter()
        .map(|k| {
            let a = k as f64 / 100.0;
            (a, gamma_fn(a).ok())
        })
        .collect()
}

pub fn gamma_checks() -> Vec<Check> {
    let grid = gamma_grid();
    let bad: Vec<String> = grid
        .iter()
        .filter(|(_, g)| !g.is_some_and(|g| g > 0.0))
        .map(|(a, g)| format!("a = {a}: {g:?}"))
        .collect();
    let min = grid
        .iter()
        .filter_map(|(_, g)| *g)
        .fold(f64::INFINITY, f64::min);
    vec![Check::new(
        "Gamma positive on 0.50..0.99",
        bad.is_empty(),
        if bad.is_empty() {
            format!("min Gamma = {min:e}")
        } else {
            bad.join("; ")
        },
    )]
}
