//! Standing bichromatic fronts: the two-reflection recurrence on
//! `(u_i, v_i) = (u_{2i}, u_{2i+1})` and a Newton solve of the stationary
//! lattice system between the homogeneous state 0 and the pattern B.

use std::path::Path;

use serde::Serialize;

use crate::cubic::{dg, g, Params};
use crate::equilibria::{solve_equilibria, Branch};
use crate::error::{Error, Result};
use crate::numeric::{fmt_float, solve_tridiagonal};

pub const RESIDUAL_TOL: f64 = 1e-10;
pub const MAX_NEWTON_STEPS: usize = 100;
pub const MAX_DAMPING_HALVINGS: usize = 10;
/// Profiles with a larger stationary residual are not turned into orbits.
pub const ORBIT_RESIDUAL_TOL: f64 = 1e-8;
/// Decrease tolerated by the monotonicity checks, to absorb rounding on
/// plateaus.
pub const MONOTONE_TOL: f64 = 1e-12;

/// One application of the two reflections: first horizontally through
/// `u = m(v)`, then vertically through `v = m(u)`.
pub fn reflection_step((u, v): (f64, f64), params: Params) -> (f64, f64) {
    let u_next = 2.0 * params.m(v) - u;
    let v_next = 2.0 * params.m(u_next) - v;
    (u_next, v_next)
}

/// Inverse of [`reflection_step`].
pub fn reflection_step_inverse((u_next, v_next): (f64, f64), params: Params) -> (f64, f64) {
    let v = 2.0 * params.m(u_next) - v_next;
    let u = 2.0 * params.m(v) - u_next;
    (u, v)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanarOrbit {
    pub points: Vec<(f64, f64)>,
    pub params: Params,
}

impl PlanarOrbit {
    /// Largest deviation of consecutive points from the recurrence.
    pub fn recurrence_residual(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| {
                let (u, v) = reflection_step(w[0], self.params);
                (u - w[1].0).abs().max((v - w[1].1).abs())
            })
            .fold(0.0, f64::max)
    }

    pub fn is_monotone(&self) -> bool {
        self.points
            .windows(2)
            .all(|w| w[1].0 >= w[0].0 - MONOTONE_TOL && w[1].1 >= w[0].1 - MONOTONE_TOL)
    }

    /// Indices `i` with `v_i <= v_bot` and `v_{i+1} >= v_top`.
    pub fn jump_indices(&self, v_bot: f64, v_top: f64) -> Vec<usize> {
        self.points
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[0].1 <= v_bot && w[1].1 >= v_top)
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StandingProfile {
    pub u: Vec<f64>,
    pub params: Params,
    /// Sup-norm of the stationary residual on sites with both neighbours
    /// inside the lattice.
    pub residual_norm: f64,
    pub newton_steps: usize,
}

impl StandingProfile {
    pub fn from_values(u: Vec<f64>, params: Params) -> Self {
        let residual_norm = interior_residual(&u, params);
        StandingProfile {
            u,
            params,
            residual_norm,
            newton_steps: 0,
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
        w.write_record(["j", "u_j"])
            .map_err(|e| csv_error(path, e))?;
        for (j, u) in self.u.iter().enumerate() {
            w.write_record([j.to_string(), fmt_float(*u)])
                .map_err(|e| csv_error(path, e))?;
        }
        w.flush().map_err(io)
    }
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::Parse {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

fn interior_residual(u: &[f64], params: Params) -> f64 {
    u.windows(3)
        .map(|w| (params.d * (w[0] - 2.0 * w[1] + w[2]) + g(w[1], params.a)).abs())
        .fold(0.0, f64::max)
}

fn stationary_residual(u: &[f64], params: Params, left: f64, right: f64, out: &mut [f64]) {
    let n = u.len();
    for j in 0..n {
        let l = if j == 0 { left } else { u[j - 1] };
        let r = if j + 1 == n { right } else { u[j + 1] };
        out[j] = params.d * (l - 2.0 * u[j] + r) + g(u[j], params.a);
    }
}

fn sup(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Newton solve for a standing front between 0 (left) and the pattern B
/// (right), seeded by a step at site `seed_step`.
///
/// Returns [`Error::NotFound`] when Newton fails or converges to something
/// that is not non-decreasing on both sublattices. Absence of a standing
/// front here is numerical evidence for propagation, not a proof.
pub fn find_standing_front(params: Params, n: usize) -> Result<StandingProfile> {
    find_standing_front_seeded(params, n, n / 2)
}

pub fn find_standing_front_seeded(
    params: Params,
    n: usize,
    seed_step: usize,
) -> Result<StandingProfile> {
    if n < 64 || !n.is_multiple_of(2) {
        return Err(Error::InvalidParams(format!(
            "lattice size must be even and >= 64, got {n}"
        )));
    }
    let roots = solve_equilibria(params)?;
    let Some(b) = roots.iter().find(|e| e.branch == Branch::B) else {
        return Err(Error::OutOfDomain(format!(
            "no stable bichromatic pattern at (a, d) = ({}, {})",
            params.a, params.d
        )));
    };
    let pattern = |j: usize| if j.is_multiple_of(2) { b.u } else { b.v };
    let (left, right) = (0.0, pattern(n));

    let mut u: Vec<f64> = (0..n)
        .map(|j| if j < seed_step { 0.0 } else { pattern(j) })
        .collect();
    let mut res = vec![0.0; n];
    let mut trial_res = vec![0.0; n];
    stationary_residual(&u, params, left, right, &mut res);
    let mut norm = sup(&res);
    let lower = vec![params.d; n];
    let upper = vec![params.d; n];
    let mut diag = vec![0.0; n];
    let mut steps = 0;

    while norm > 1e-13 * (1.0 + params.d) {
        if steps == MAX_NEWTON_STEPS {
            return Err(Error::NotFound(format!(
                "Newton did not converge in {MAX_NEWTON_STEPS} steps"
            )));
        }
        steps += 1;
        for j in 0..n {
            diag[j] = -2.0 * params.d + dg(u[j], params.a);
        }
        let rhs: Vec<f64> = res.iter().map(|r| -r).collect();
        let delta = solve_tridiagonal(&lower, &diag, &upper, &rhs)
            .ok_or_else(|| Error::NotFound("singular Newton matrix".into()))?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_DAMPING_HALVINGS {
            let trial: Vec<f64> = u
                .iter()
                .zip(&delta)
                .map(|(x, dx)| x + lambda * dx)
                .collect();
            stationary_residual(&trial, params, left, right, &mut trial_res);
            let trial_norm = sup(&trial_res);
            if trial_norm < norm {
                u = trial;
                std::mem::swap(&mut res, &mut trial_res);
                norm = trial_norm;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            if norm < RESIDUAL_TOL {
                break;
            }
            return Err(Error::NotFound(format!(
                "damped Newton stalled at residual {norm:e}"
            )));
        }
    }
    if norm >= RESIDUAL_TOL {
        return Err(Error::NotFound(format!(
            "residual {norm:e} above {RESIDUAL_TOL:e}"
        )));
    }
    let monotone = |start: usize| {
        u[start..]
            .iter()
            .step_by(2)
            .zip(u[start + 2..].iter().step_by(2))
            .all(|(x, y)| *y >= x - MONOTONE_TOL)
    };
    if !monotone(0) || !monotone(1) {
        return Err(Error::NotFound(
            "Newton converged to a non-monotone stationary state".into(),
        ));
    }
    Ok(StandingProfile {
        u,
        params,
        residual_norm: norm,
        newton_steps: steps,
    })
}

/// Reads off `(u_i, v_i) = (u_{2i}, u_{2i+1})`.
pub fn orbit_from_profile(profile: &StandingProfile) -> Result<PlanarOrbit> {
    if !(profile.residual_norm < ORBIT_RESIDUAL_TOL) {
        return Err(Error::InvalidParams(format!(
            "profile residual {:e} exceeds {ORBIT_RESIDUAL_TOL:e}",
            profile.residual_norm
        )));
    }
    let points = profile.u.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    Ok(PlanarOrbit {
        points,
        params: profile.params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::Rectangle;

    fn p(a: f64, d: f64) -> Params {
        Params::new(a, d).unwrap()
    }

    #[test]
    fn reflection_fixed_points() {
        let params = p(0.45, 0.02);
        let roots = solve_equilibria(params).unwrap();
        let b = roots.iter().find(|e| e.branch == Branch::B).unwrap();
        let (u, v) = reflection_step((b.u, b.v), params);
        assert!((u - b.u).abs() < 1e-12 && (v - b.v).abs() < 1e-12);
        assert_eq!(reflection_step((0.0, 0.0), params), (0.0, 0.0));
    }

    #[test]
    fn reflection_inverse_round_trip() {
        let params = p(0.5, 1.0 / 24.0);
        let x = (0.01, 0.01);
        let back = reflection_step_inverse(reflection_step(x, params), params);
        assert!((back.0 - x.0).abs() < 1e-13 && (back.1 - x.1).abs() < 1e-13);
    }

    #[test]
    fn pinned_front_is_found_and_monotone() {
        let params = p(0.45, 0.02);
        let front = find_standing_front(params, 128).unwrap();
        assert!(front.residual_norm < RESIDUAL_TOL);
        let orbit = orbit_from_profile(&front).unwrap();
        assert!(orbit.is_monotone());
        assert!(orbit.recurrence_residual() < 1e-8);
        let rect = Rectangle::new(params).unwrap();
        assert_eq!(orbit.jump_indices(rect.v_bot, rect.v_top).len(), 1);
    }

    #[test]
    fn travelling_parameters_have_no_standing_front() {
        assert!(matches!(
            find_standing_front(p(0.5, 0.0415), 128),
            Err(Error::NotFound(_))
        ));
    }

    #[test]
    fn constant_zero_profile_gives_zero_orbit() {
        let prof = StandingProfile::from_values(vec![0.0; 64], p(0.45, 0.02));
        assert_eq!(prof.residual_norm, 0.0);
        let orbit = orbit_from_profile(&prof).unwrap();
        assert!(orbit.points.iter().all(|&x| x == (0.0, 0.0)));
    }

    #[test]
    fn rough_profiles_are_rejected() {
        let prof =
            StandingProfile::from_values((0..64).map(|j| j as f64 / 64.0).collect(), p(0.45, 0.02));
        assert!(orbit_from_profile(&prof).is_err());
    }

    #[test]
    fn lattice_size_is_validated() {
        assert!(matches!(
            find_standing_front(p(0.45, 0.02), 63),
            Err(Error::InvalidParams(_))
        ));
        assert!(matches!(
            find_standing_front(p(0.45, 0.02), 32),
            Err(Error::InvalidParams(_))
        ));
    }
}
