mod common;

use nagumo_core::equilibria::Branch;
use nagumo_core::{d_minus, d_plus, jacobian_g, solve_equilibria, Params, Stability};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn roots(a: f64, d: f64) -> Vec<(f64, f64)> {
    solve_equilibria(Params::new(a, d).unwrap())
        .unwrap()
        .iter()
        .map(|e| (e.u, e.v))
        .collect()
}

/// A point strictly inside the nine-root region.
fn random_omega_minus(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let a: f64 = rng.gen_range(0.05..0.95);
    (a, d_minus(a) * rng.gen_range(0.05..0.95))
}

#[test]
fn matches_grid_newton_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..10 {
        let (a, d) = common::random_interior(&mut rng, 1e-3, d_minus);
        let oracle = common::grid_newton_roots(a, d, 400);
        let ours = roots(a, d);
        assert!(
            common::same_root_set(&ours, &oracle, 1e-7),
            "({a}, {d}): {ours:?} vs {oracle:?}"
        );
    }
}

#[test]
fn d_minus_matches_root_count_bisection() {
    for a in [0.2, 0.35, 0.65] {
        let brute = common::brute_d_minus(a);
        assert!(
            (d_minus(a) - brute).abs() < 1e-6,
            "a = {a}: {} vs {brute}",
            d_minus(a)
        );
    }
}

#[test]
fn closed_under_swap() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let (a, d) = common::random_interior(&mut rng, 1e-4, d_minus);
        let eqs = solve_equilibria(Params::new(a, d).unwrap()).unwrap();
        for e in &eqs {
            let twin = eqs
                .iter()
                .find(|f| (f.u - e.v).abs() < 1e-10 && (f.v - e.u).abs() < 1e-10);
            let twin = twin.unwrap_or_else(|| panic!("({a}, {d}): swap of {e:?} missing"));
            assert_eq!(twin.branch, e.branch.swapped());
            assert_eq!(twin.stability, e.stability);
        }
    }
}

#[test]
fn reflection_symmetry() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let (a, d) = common::random_interior(&mut rng, 1e-4, d_minus);
        let here = roots(a, d);
        let there: Vec<(f64, f64)> = roots(1.0 - a, d)
            .iter()
            .map(|&(u, v)| (1.0 - v, 1.0 - u))
            .collect();
        assert!(common::same_root_set(&here, &there, 1e-10), "({a}, {d})");
    }
}

#[test]
fn branch_b_is_stable_and_a_c_are_saddles() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let (a, d) = random_omega_minus(&mut rng);
        let params = Params::new(a, d).unwrap();
        let eqs = solve_equilibria(params).unwrap();
        assert_eq!(eqs.len(), 9, "({a}, {d})");
        for e in &eqs {
            let (lo, hi) = jacobian_g(e.u, e.v, params).eigenvalues();
            match e.branch {
                Branch::B | Branch::SwappedB => {
                    assert!(hi < 0.0 && lo < 0.0, "({a}, {d}) B: {lo}, {hi}")
                }
                Branch::A | Branch::C | Branch::SwappedA | Branch::SwappedC => {
                    assert!(
                        lo < 0.0 && hi > 0.0,
                        "({a}, {d}) {:?}: {lo}, {hi}",
                        e.branch
                    );
                    assert_eq!(e.stability, Stability::Saddle);
                }
                _ => {}
            }
        }
        let b = eqs.iter().find(|e| e.branch == Branch::B).unwrap();
        let (a_root, c_root) = (
            eqs.iter().find(|e| e.branch == Branch::A).unwrap(),
            eqs.iter().find(|e| e.branch == Branch::C).unwrap(),
        );
        if a <= 0.5 {
            assert!(
                a_root.u < b.u && b.u < c_root.u && c_root.u < a,
                "({a}, {d})"
            );
            assert!(
                a < a_root.v && a_root.v < b.v && b.v < c_root.v,
                "({a}, {d})"
            );
        }
    }
}

#[test]
fn root_count_non_increasing_in_d() {
    for k in 1..20 {
        let a = k as f64 / 20.0;
        let (dm, dp) = (d_minus(a), d_plus(a));
        let counts: Vec<usize> = (1..=70)
            .map(|j| j as f64 * 0.001)
            .filter(|d| (d - dm).abs() > 1e-5 && (d - dp).abs() > 1e-5)
            .map(|d| roots(a, d).len())
            .collect();
        assert!(
            counts.windows(2).all(|w| w[1] <= w[0]),
            "a = {a}: {counts:?}"
        );
        assert_eq!(*counts.last().unwrap(), 3);
    }
}
