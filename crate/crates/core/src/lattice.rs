//! Fixed-step RK4 integration of
//!
//! ```text
//! du_j/dt = d (u_{j-1} - 2 u_j + u_{j+1}) + g(u_j; a)
//! ```
//!
//! on `j = 0..N` with ghost sites clamped to the limit states, plus the
//! front initial conditions, speed estimation and the colliding-front run.

use std::path::Path;

use serde::Serialize;

use crate::cubic::{g, Params};
use crate::equilibria::{branch_point, Branch};
use crate::error::{Error, Result};
use crate::numeric::fmt_float;
use crate::standing::csv_error;

pub const PIN_THRESHOLD: f64 = 1e-4;
pub const TRAVEL_THRESHOLD: f64 = 10.0 * PIN_THRESHOLD;
pub const MIN_R_SQUARED: f64 = 0.99;
pub const BLOW_UP_BOUND: f64 = 2.0;
/// Fraction of a trajectory discarded as transient before fitting a speed.
pub const TRANSIENT_FRACTION: f64 = 0.25;
pub const MIN_FIT_SAMPLES: usize = 20;

/// Largest time step accepted for coupling `d`.
pub fn max_dt(d: f64) -> f64 {
    0.2 / (4.0 * d + 1.0)
}

pub fn default_dt(d: f64) -> f64 {
    0.1f64.min(max_dt(d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Boundary {
    /// Ghost sites `-1` and `N` hold the values of the limit states they
    /// stand in for, taken from the initial data and frozen.
    ClampedToLimits,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub boundary: Boundary,
    pub record_stride: usize,
}

impl SimConfig {
    /// Default step for `d`, recording roughly once per unit time.
    pub fn new(n: usize, d: f64, t_end: f64) -> Self {
        let dt = default_dt(d);
        SimConfig {
            n,
            dt,
            t_end,
            boundary: Boundary::ClampedToLimits,
            record_stride: ((1.0 / dt).round() as usize).max(1),
        }
    }

    pub fn validate(&self, d: f64) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.n < 128 || !self.n.is_multiple_of(2) {
            return bad(format!(
                "lattice size must be even and >= 128, got {}",
                self.n
            ));
        }
        if !(self.dt > 0.0) || self.dt > max_dt(d) * (1.0 + 1e-12) {
            return bad(format!("dt = {} outside (0, {}]", self.dt, max_dt(d)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return bad(format!(
                "t_end = {} must be finite and non-negative",
                self.t_end
            ));
        }
        if self.record_stride == 0 {
            return bad("record_stride must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeState {
    pub t: f64,
    pub u: Vec<f64>,
}

/// Ghost values at sites `-1` and `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ghosts {
    pub left: f64,
    pub right: f64,
}

impl Ghosts {
    /// Continues the 2-periodic limit at each edge: `u_{-1} = u_1`,
    /// `u_N = u_{N-2}`.
    pub fn from_limits(u: &[f64]) -> Self {
        let n = u.len();
        Ghosts {
            left: u[1.min(n - 1)],
            right: u[n.saturating_sub(2)],
        }
    }
}

fn rhs_into(u: &[f64], params: Params, ghosts: Ghosts, out: &mut [f64]) {
    let n = u.len();
    let Params { a, d } = params;
    for j in 0..n {
        let l = if j == 0 { ghosts.left } else { u[j - 1] };
        let r = if j + 1 == n { ghosts.right } else { u[j + 1] };
        out[j] = d * (l - 2.0 * u[j] + r) + g(u[j], a);
    }
}

/// Right-hand side with ghosts continuing the limit states of `state`.
pub fn rhs(state: &LatticeState, params: Params) -> Vec<f64> {
    rhs_with(&state.u, params, Ghosts::from_limits(&state.u))
}

pub fn rhs_with(u: &[f64], params: Params, ghosts: Ghosts) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    rhs_into(u, params, ghosts, &mut out);
    out
}

/// RK4 with fixed step; records the initial state and every
/// `record_stride` steps after it, plus the final state.
pub fn integrate(
    state: &LatticeState,
    params: Params,
    config: &SimConfig,
) -> Result<Vec<LatticeState>> {
    config.validate(params.d)?;
    if state.u.len() != config.n {
        return Err(Error::InvalidParams(format!(
            "state has {} sites, config {}",
            state.u.len(),
            config.n
        )));
    }
    let ghosts = match config.boundary {
        Boundary::ClampedToLimits => Ghosts::from_limits(&state.u),
    };
    let n = config.n;
    let dt = config.dt;
    let steps = (config.t_end / dt).ceil() as usize;
    let mut u = state.u.clone();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let mut out = vec![state.clone()];
    for step in 1..=steps {
        rhs_into(&u, params, ghosts, &mut k1);
        for j in 0..n {
            tmp[j] = u[j] + 0.5 * dt * k1[j];
        }
        rhs_into(&tmp, params, ghosts, &mut k2);
        for j in 0..n {
            tmp[j] = u[j] + 0.5 * dt * k2[j];
        }
        rhs_into(&tmp, params, ghosts, &mut k3);
        for j in 0..n {
            tmp[j] = u[j] + dt * k3[j];
        }
        rhs_into(&tmp, params, ghosts, &mut k4);
        for j in 0..n {
            u[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        let t = state.t + step as f64 * dt;
        if let Some((site, &value)) = u
            .iter()
            .enumerate()
            .find(|(_, x)| !(x.abs() <= BLOW_UP_BOUND))
        {
            return Err(Error::BlowUp { t, site, value });
        }
        if step % config.record_stride == 0 || step == steps {
            out.push(LatticeState { t, u: u.clone() });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IcKind {
    /// 0 on the left, the pattern B on the right.
    BichromaticFront,
    /// The pattern B on the left, 1 on the right.
    UpperBichromaticFront,
    /// 0 on the left, 1 on the right.
    MonochromaticFront,
    /// 0, then the pattern B, then 1.
    Plateau,
}

fn step_profile(j: usize, center: f64, width: f64) -> f64 {
    0.5 * (1.0 + ((j as f64 - center) / width).tanh())
}

/// Initial data with tanh ramps of the given width. For `Plateau` the
/// ramps sit at `center` and `N - center`.
pub fn build_ic(
    kind: IcKind,
    params: Params,
    config: &SimConfig,
    center: f64,
    width: f64,
) -> Result<LatticeState> {
    if !(width > 0.0) {
        return Err(Error::InvalidParams(format!(
            "ramp width must be positive, got {width}"
        )));
    }
    let n = config.n;
    let pattern = || -> Result<[f64; 2]> {
        let (u, v) = branch_point(Branch::B, params)?;
        Ok([u, v])
    };
    let u = match kind {
        IcKind::MonochromaticFront => (0..n).map(|j| step_profile(j, center, width)).collect(),
        IcKind::BichromaticFront => {
            let p = pattern()?;
            (0..n)
                .map(|j| p[j % 2] * step_profile(j, center, width))
                .collect()
        }
        IcKind::UpperBichromaticFront => {
            let p = pattern()?;
            (0..n)
                .map(|j| p[j % 2] + (1.0 - p[j % 2]) * step_profile(j, center, width))
                .collect()
        }
        IcKind::Plateau => {
            let p = pattern()?;
            let right = n as f64 - center;
            (0..n)
                .map(|j| {
                    let to_one = step_profile(j, right, width);
                    step_profile(j, center, width) * (p[j % 2] + (1.0 - p[j % 2]) * to_one)
                })
                .collect()
        }
    };
    Ok(LatticeState { t: 0.0, u })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpeedClass {
    Travelling,
    Pinned,
    Inconclusive,
}

impl SpeedClass {
    pub fn as_str(self) -> &'static str {
        match self {
            SpeedClass::Travelling => "Travelling",
            SpeedClass::Pinned => "Pinned",
            SpeedClass::Inconclusive => "Inconclusive",
        }
    }
}

impl std::str::FromStr for SpeedClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "Travelling" => SpeedClass::Travelling,
            "Pinned" => SpeedClass::Pinned,
            "Inconclusive" => SpeedClass::Inconclusive,
            other => return Err(format!("unknown speed class {other:?}")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedEstimate {
    pub c: f64,
    pub r_squared: f64,
    /// Standard error of the fitted slope.
    pub std_error: f64,
    /// Interface displacement across the fitted window.
    pub displacement: f64,
    pub classification: SpeedClass,
    pub samples: Vec<(f64, f64)>,
}

/// Position where the even sublattice first rises through `level`,
/// linearly interpolated, in site units.
pub fn interface_position(u: &[f64], level: f64) -> Option<f64> {
    let even: Vec<f64> = u.iter().step_by(2).copied().collect();
    if even.first().is_none_or(|&x| x >= level) {
        return None;
    }
    even.windows(2)
        .enumerate()
        .find(|(_, w)| w[1] >= level)
        .map(|(k, w)| {
            let frac = (level - w[0]) / (w[1] - w[0]);
            2.0 * (k as f64 + frac)
        })
}

/// Least-squares fit of `(t, x)`: slope, r^2, slope standard error.
fn linear_fit(samples: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = samples.len() as f64;
    let mt = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let mx = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let stt: f64 = samples.iter().map(|s| (s.0 - mt).powi(2)).sum();
    let sxx: f64 = samples.iter().map(|s| (s.1 - mx).powi(2)).sum();
    let stx: f64 = samples.iter().map(|s| (s.0 - mt) * (s.1 - mx)).sum();
    let slope = if stt > 0.0 { stx / stt } else { 0.0 };
    let ss_res: f64 = samples
        .iter()
        .map(|s| (s.1 - mx - slope * (s.0 - mt)).powi(2))
        .sum();
    let r_squared = if sxx > 0.0 { 1.0 - ss_res / sxx } else { 1.0 };
    let std_error = if stt > 0.0 && n > 2.0 {
        (ss_res / (n - 2.0) / stt).sqrt()
    } else {
        0.0
    };
    (slope, r_squared, std_error)
}

/// Speed of a lower front (0 on the left, pattern B on the right), tracked
/// at half the low pattern value on the even sublattice.
pub fn estimate_speed(trajectory: &[LatticeState], params: Params) -> Result<SpeedEstimate> {
    let (u_b, _) = branch_point(Branch::B, params)?;
    let level = 0.5 * u_b;
    let skip = (trajectory.len() as f64 * TRANSIENT_FRACTION).floor() as usize;
    let window = &trajectory[skip..];
    if window.len() < MIN_FIT_SAMPLES {
        return Err(Error::InvalidParams(format!(
            "{} samples after the transient, need {MIN_FIT_SAMPLES}",
            window.len()
        )));
    }
    let samples = window
        .iter()
        .map(|s| {
            interface_position(&s.u, level)
                .map(|x| (s.t, x))
                .ok_or(Error::NoInterface { level, t: s.t })
        })
        .collect::<Result<Vec<_>>>()?;
    let (c, r_squared, std_error) = linear_fit(&samples);
    let displacement = samples[samples.len() - 1].1 - samples[0].1;
    let classification = if c.abs() < PIN_THRESHOLD && displacement.abs() < 1.0 {
        SpeedClass::Pinned
    } else if c.abs() > TRAVEL_THRESHOLD && r_squared > MIN_R_SQUARED {
        SpeedClass::Travelling
    } else {
        SpeedClass::Inconclusive
    };
    Ok(SpeedEstimate {
        c,
        r_squared,
        std_error,
        displacement,
        classification,
        samples,
    })
}

/// Maps an upper front (pattern on the left, 1 on the right) at `a` onto a
/// lower front at `1 - a` via `w_j = 1 - u_{N-1-j}`.
pub fn mirror_state(state: &LatticeState) -> LatticeState {
    LatticeState {
        t: state.t,
        u: state.u.iter().rev().map(|x| 1.0 - x).collect(),
    }
}

/// Speed of an upper front at `params`, measured on the mirrored
/// trajectory; positive values mean the pattern invades the 1 state.
pub fn estimate_upper_speed(trajectory: &[LatticeState], params: Params) -> Result<SpeedEstimate> {
    let mirrored: Vec<LatticeState> = trajectory.iter().map(mirror_state).collect();
    let mut est = estimate_speed(&mirrored, params.mirrored())?;
    est.c = -est.c;
    est.displacement = -est.displacement;
    let n = trajectory.first().map_or(0, |s| s.u.len()) as f64;
    for s in &mut est.samples {
        s.1 = n - 1.0 - s.1;
    }
    Ok(est)
}

/// Longest run of sites where `|u_{j+2} - u_j| < 1e-3` and
/// `|u_{j+1} - u_j| > 0.1`, i.e. where the 2-periodic pattern is visible.
pub fn buffer_width(u: &[f64]) -> usize {
    let mut best = 0;
    let mut run = 0;
    for j in 0..u.len().saturating_sub(2) {
        if (u[j + 2] - u[j]).abs() < 1e-3 && (u[j + 1] - u[j]).abs() > 0.1 {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    best
}

pub const MONOTONE_SLACK: f64 = 1e-4;

/// Monotone from (near) 0 to (near) 1 up to [`MONOTONE_SLACK`].
pub fn is_monotone_front(u: &[f64]) -> bool {
    u.first().is_some_and(|&x| x < MONOTONE_SLACK)
        && u.last().is_some_and(|&x| x > 1.0 - MONOTONE_SLACK)
        && u.windows(2).all(|w| w[1] >= w[0] - MONOTONE_SLACK)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollisionReport {
    /// `(t, buffer width)` per recorded sample.
    pub widths: Vec<(f64, usize)>,
    pub final_residual: f64,
    pub monochromatic_outcome: bool,
    pub final_state: LatticeState,
}

impl CollisionReport {
    /// Whether the width never grows after the given fraction of samples.
    pub fn width_non_increasing_after(&self, fraction: f64) -> bool {
        let skip = (self.widths.len() as f64 * fraction).ceil() as usize;
        self.widths[skip.min(self.widths.len())..]
            .windows(2)
            .all(|w| w[1].1 <= w[0].1)
    }
}

/// Runs 0 | pattern | 1 initial data with ramps at `N/4` and `3N/4`.
pub fn run_collision(params: Params, config: &SimConfig) -> Result<CollisionReport> {
    config.validate(params.d)?;
    let ic = build_ic(IcKind::Plateau, params, config, config.n as f64 / 4.0, 2.0)?;
    let trajectory = integrate(&ic, params, config)?;
    Ok(collision_report(&ic, &trajectory, params))
}

/// Buffer widths and final-state diagnostics of a plateau trajectory.
pub fn collision_report(
    ic: &LatticeState,
    trajectory: &[LatticeState],
    params: Params,
) -> CollisionReport {
    let widths = trajectory
        .iter()
        .map(|s| (s.t, buffer_width(&s.u)))
        .collect();
    let final_state = trajectory.last().unwrap_or(ic).clone();
    let ghosts = Ghosts::from_limits(&ic.u);
    let final_residual = rhs_with(&final_state.u, params, ghosts)
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    let monochromatic_outcome = is_monotone_front(&final_state.u);
    CollisionReport {
        widths,
        final_residual,
        monochromatic_outcome,
        final_state,
    }
}

/// Long-format trajectory export: `t,j,u`.
pub fn write_trajectory_csv(trajectory: &[LatticeState], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["t", "j", "u"])
        .map_err(|e| csv_error(path, e))?;
    for s in trajectory {
        for (j, u) in s.u.iter().enumerate() {
            w.write_record([fmt_float(s.t), j.to_string(), fmt_float(*u)])
                .map_err(|e| csv_error(path, e))?;
        }
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Interface track export: `t,interface_pos`.
pub fn write_speed_csv(estimate: &SpeedEstimate, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["t", "interface_pos"])
        .map_err(|e| csv_error(path, e))?;
    for (t, x) in &estimate.samples {
        w.write_record([fmt_float(*t), fmt_float(*x)])
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: f64, d: f64) -> Params {
        Params::new(a, d).unwrap()
    }

    fn tiled(params: Params, n: usize) -> LatticeState {
        let (u, v) = branch_point(Branch::B, params).unwrap();
        LatticeState {
            t: 0.0,
            u: (0..n).map(|j| if j % 2 == 0 { u } else { v }).collect(),
        }
    }

    #[test]
    fn rhs_vanishes_on_equilibria() {
        let params = p(0.45, 0.02);
        assert!(rhs(
            &LatticeState {
                t: 0.0,
                u: vec![0.0; 128]
            },
            params
        )
        .iter()
        .all(|&x| x == 0.0));
        let r = rhs(&tiled(params, 128), params);
        assert!(r.iter().all(|x| x.abs() < 1e-10));
        let half = LatticeState {
            t: 0.0,
            u: vec![0.5; 128],
        };
        assert!(rhs(&half, p(0.5, 0.3)).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn equilibria_are_preserved() {
        let params = p(0.45, 0.02);
        let config = SimConfig::new(128, params.d, 100.0);
        for state in [
            tiled(params, 128),
            LatticeState {
                t: 0.0,
                u: vec![0.0; 128],
            },
            LatticeState {
                t: 0.0,
                u: vec![0.45; 128],
            },
            LatticeState {
                t: 0.0,
                u: vec![1.0; 128],
            },
        ] {
            let traj = integrate(&state, params, &config).unwrap();
            let last = traj.last().unwrap();
            assert!(last.t >= 100.0 - config.dt);
            for (x, y) in last.u.iter().zip(&state.u) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn halving_dt_barely_changes_the_result() {
        let params = p(0.3, 0.1);
        let config = SimConfig::new(128, params.d, 20.0);
        let ic = build_ic(IcKind::MonochromaticFront, params, &config, 64.0, 2.0).unwrap();
        let coarse = integrate(&ic, params, &config).unwrap();
        let fine = integrate(
            &ic,
            params,
            &SimConfig {
                dt: config.dt / 2.0,
                record_stride: 2 * config.record_stride,
                ..config
            },
        )
        .unwrap();
        let (a, b) = (&coarse.last().unwrap().u, &fine.last().unwrap().u);
        let diff = a
            .iter()
            .zip(b)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(diff < 1e-6, "{diff}");
    }

    #[test]
    fn config_is_validated() {
        let params = p(0.45, 0.02);
        let state = LatticeState {
            t: 0.0,
            u: vec![0.0; 64],
        };
        assert!(integrate(&state, params, &SimConfig::new(64, params.d, 1.0)).is_err());
        let big_dt = SimConfig {
            dt: 0.5,
            ..SimConfig::new(128, params.d, 1.0)
        };
        assert!(big_dt.validate(params.d).is_err());
    }

    #[test]
    fn blow_up_is_reported() {
        let params = p(0.45, 0.02);
        let mut s = LatticeState {
            t: 0.0,
            u: vec![0.0; 128],
        };
        s.u[5] = 50.0;
        let r = integrate(&s, params, &SimConfig::new(128, params.d, 50.0));
        assert!(matches!(r, Err(Error::BlowUp { .. })));
    }

    #[test]
    fn bichromatic_ic_limits() {
        let params = p(0.45, 0.02);
        let config = SimConfig::new(256, params.d, 1.0);
        let (ub, vb) = branch_point(Branch::B, params).unwrap();
        let ic = build_ic(IcKind::BichromaticFront, params, &config, 128.0, 2.0).unwrap();
        assert!(ic.u[0] < 1e-6);
        assert!((ic.u[254] - ub).abs() < 1e-6 && (ic.u[255] - vb).abs() < 1e-6);
        assert!((ic.u[128] - ub / 2.0).abs() < 1e-15);
        assert!(matches!(
            build_ic(IcKind::BichromaticFront, p(0.5, 0.05), &config, 128.0, 2.0),
            Err(Error::OutOfDomain(_))
        ));
    }

    #[test]
    fn stationary_trajectory_is_pinned() {
        let params = p(0.45, 0.02);
        let front = crate::standing::find_standing_front(params, 128).unwrap();
        let traj: Vec<LatticeState> = (0..40)
            .map(|k| LatticeState {
                t: k as f64,
                u: front.u.clone(),
            })
            .collect();
        let est = estimate_speed(&traj, params).unwrap();
        assert!(est.c.abs() < 1e-12);
        assert_eq!(est.classification, SpeedClass::Pinned);
    }

    #[test]
    fn missing_interface_is_an_error() {
        let params = p(0.45, 0.02);
        let traj: Vec<LatticeState> = (0..40)
            .map(|k| LatticeState {
                t: k as f64,
                u: vec![0.0; 128],
            })
            .collect();
        assert!(matches!(
            estimate_speed(&traj, params),
            Err(Error::NoInterface { .. })
        ));
    }

    #[test]
    fn buffer_detector_on_simple_data() {
        let mono: Vec<f64> = (0..128).map(|j| step_profile(j, 64.0, 2.0)).collect();
        assert_eq!(buffer_width(&mono), 0);
        assert!(is_monotone_front(&mono));
        let params = p(0.45, 0.02);
        assert!(buffer_width(&tiled(params, 128).u) >= 120);
    }

    #[test]
    fn speed_class_round_trips_through_text() {
        for c in [
            SpeedClass::Travelling,
            SpeedClass::Pinned,
            SpeedClass::Inconclusive,
        ] {
            assert_eq!(c.as_str().parse::<SpeedClass>().unwrap(), c);
        }
    }
}
