//! Equilibria, wave criteria and lattice simulation for the Nagumo lattice
//! equation with cubic nonlinearity `g(u; a) = u (1 - u) (u - a)`.

// `!(x > 0.0)` guards deliberately reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod criteria;
pub mod cubic;
pub mod equilibria;
mod error;
pub mod lattice;
pub mod numeric;
pub mod scan;
pub mod standing;
pub mod verify;

pub use criteria::{
    classify, classify_with_gamma, gamma_fn, pinning_bound, reflect_v, u_bot, u_inv, u_top,
    v_bot_top, CriterionReport, Rectangle, Verdict,
};
pub use cubic::{
    critical_points, eval_g, gamma_crit, m_map, v_branch_deriv, v_branches, CubicCriticalPoints,
    Params, Which,
};
pub use equilibria::{
    a_minus, bifurcation_curves, branch_point, d_minus, d_plus, jacobian_g, solve_equilibria,
    verify_asymptotics, Asymptotic, AsymptoticReport, BifurcationCurves, Branch, Equilibrium,
    Jacobian, Stability,
};
pub use error::{Error, Result};
pub use lattice::{
    buffer_width, build_ic, estimate_speed, estimate_upper_speed, integrate, rhs, run_collision,
    Boundary, CollisionReport, IcKind, LatticeState, SimConfig, SpeedClass, SpeedEstimate,
};
pub use scan::{read_csv, scan, write_csv, CellRecord, RegionGrid, ScanOptions, SimulatePolicy};
pub use standing::{
    find_standing_front, find_standing_front_seeded, orbit_from_profile, reflection_step,
    reflection_step_inverse, PlanarOrbit, StandingProfile,
};
