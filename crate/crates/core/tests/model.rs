use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use welander_core::welander::*;
use welander_core::*;

#[test]
fn build_nonsmooth_examples() {
    let p = Params::with_epsilon(-1.0 / 15.0);
    let up = branch_equilibrium(Side::Upper, &p).location;
    assert_eq!(up.x, 0.5);
    assert!(up.y.abs() < 1e-16);
    let p = Params::with_epsilon(0.1);
    let lo = branch_equilibrium(Side::Lower, &p).location;
    assert!(lo.distance(State::new(1.0, 0.1)) < 1e-15);
    let s = build_nonsmooth(&p);
    assert_eq!(s.h(State::new(0.3, -0.2)), -0.2);
    assert!(s.is_affine());
}

#[test]
fn branch_equilibria_are_exact_zeros() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    for _ in 0..100 {
        let eps: f64 = rng.gen_range(-0.5..0.5);
        let p = Params::with_epsilon(eps);
        let s = build_nonsmooth(&p);
        let up = branch_equilibrium(Side::Upper, &p).location;
        let lo = branch_equilibrium(Side::Lower, &p).location;
        assert!(s.upper(up).norm() < 1e-15, "{eps}");
        assert!(s.lower(lo).norm() < 1e-15, "{eps}");
    }
}

#[test]
fn virtual_flags_flip_at_the_collisions() {
    let (e_lo, e_up) = border_collision_epsilons(0.8, 0.5);
    let up = |e: f64| branch_equilibrium(Side::Upper, &Params::with_epsilon(e)).is_virtual;
    let lo = |e: f64| branch_equilibrium(Side::Lower, &Params::with_epsilon(e)).is_virtual;
    assert!(!up(e_up - 1e-12) && up(e_up + 1e-12));
    assert!(lo(e_lo - 1e-12) && !lo(e_lo + 1e-12));
    let e = branch_equilibrium(Side::Upper, &Params::with_epsilon(-0.02));
    assert!(e.is_virtual);
    assert!((e.location.y - (-1.0 / 15.0 + 0.02)).abs() < 1e-16);
    let e = branch_equilibrium(Side::Lower, &Params::with_epsilon(0.3));
    assert!(!e.is_virtual);
    assert!(e.location.distance(State::new(1.0, -0.1)) < 1e-15);
}

#[test]
fn eigen_data() {
    let p = Params::with_epsilon(-0.1);
    let e = branch_equilibrium(Side::Upper, &p);
    assert_eq!(e.eigenvalues, (-2.0, -1.5));
    assert_eq!(e.eigenvectors.1, State::new(0.0, 1.0));
    // upper Jacobian [[-2, 0], [0.4, -1.5]] applied to (0, 1)
    let s = build_nonsmooth(&p);
    let c = e.location;
    let jv = s.upper(c + State::new(0.0, 1.0)) - s.upper(c);
    assert!(jv.distance(State::new(0.0, -1.5)) < 1e-14);
    assert_eq!(branch_equilibrium(Side::Lower, &p).eigenvalues, (-1.0, -0.5));
}

#[test]
fn collision_epsilons() {
    let (a, b) = border_collision_epsilons(0.8, 0.5);
    assert!((a - 0.2).abs() < 1e-16);
    assert!((b + 1.0 / 15.0).abs() < 1e-16);
    assert!(branch_equilibrium(Side::Lower, &Params::with_epsilon(a)).location.y.abs() < 1e-16);
    assert!(branch_equilibrium(Side::Upper, &Params::with_epsilon(b)).location.y.abs() < 1e-16);
}

#[test]
fn coordinate_examples() {
    let p = Params::with_epsilon(0.13);
    let s = coordinate_change(OriginalState::new(1.0, 0.8 + 0.13, 0.8), &p);
    assert!(s.distance(State::new(1.0, 0.0)) < 1e-15);
    let p = Params::with_epsilon(0.2);
    let s = coordinate_change(OriginalState::new(0.5, 0.6, 0.8), &p);
    assert!(s.distance(State::new(0.5, 0.0)) < 1e-15);
}

#[test]
fn smooth_k_limits() {
    let p = Params::with_epsilon(-0.05);
    let m = build_smooth(&p, SmoothingParam::new(1e-6).unwrap());
    assert!((m.k(0.1) - 1.0).abs() < 1e-5);
    for a in [1e-1, 1e-3, 1e-6] {
        assert_eq!(build_smooth(&p, SmoothingParam::new(a).unwrap()).k(0.0), 0.5);
    }
}

/// Central differences of the smooth field.
fn fd_jacobian(m: &SmoothWelander, s: State) -> [[f64; 2]; 2] {
    let hx = 1e-6 * s.x.abs().max(1e-3);
    let hy = 1e-4 * (s.y.abs() + m.a);
    let dx = (m.field(s + State::new(hx, 0.0)) - m.field(s - State::new(hx, 0.0))) * (0.5 / hx);
    let dy = (m.field(s + State::new(0.0, hy)) - m.field(s - State::new(0.0, hy))) * (0.5 / hy);
    [[dx.x, dy.x], [dx.y, dy.y]]
}

#[test]
fn smooth_jacobian_layer_entry() {
    let p = Params::with_epsilon(-0.05);
    let m = build_smooth(&p, SmoothingParam::new(1e-3).unwrap());
    let s = State::new(0.6, 0.0);
    let j = m.jacobian(s);
    let fd = fd_jacobian(&m, s);
    assert!((j[1][1] - fd[1][1]).abs() <= 1e-6 * j[1][1].abs());
    let want = -(0.5 + 0.5) - (-0.05) * (1e-3 / (std::f64::consts::PI * 1e-6));
    assert!((j[1][1] - want).abs() < 1e-12);
}

#[test]
fn smooth_field_approaches_branches_outside_the_layer() {
    let p = Params::with_epsilon(-0.05);
    for a in [1e-3, 1e-4] {
        let m = build_smooth(&p, SmoothingParam::new(a).unwrap());
        let ns = build_nonsmooth(&p);
        for x in [0.4, 0.7, 1.0] {
            let up = State::new(x, 10.0 * a);
            let lo = State::new(x, -10.0 * a);
            // measured against the jump, since the lower field nearly vanishes at x = 1
            let jump = |s: State| (ns.upper(s) - ns.lower(s)).norm();
            let du = (m.field(up) - ns.upper(up)).norm() / jump(up);
            let dl = (m.field(lo) - ns.lower(lo)).norm() / jump(lo);
            assert!(du < 0.1 && dl < 0.1, "{a} {x}: {du} {dl}");
        }
    }
}

proptest! {
    #[test]
    fn coordinate_round_trip(t in -3.0f64..3.0, s in -3.0f64..3.0, eps in -0.5f64..0.5) {
        let p = Params::with_epsilon(eps);
        let os = OriginalState::new(t, s, p.alpha);
        let back = inverse_coordinate_change(coordinate_change(os, &p), &p);
        prop_assert!((back.t - t).abs() <= 1e-15 * (1.0 + t.abs()));
        prop_assert!((back.s - s).abs() <= 4e-15 * (1.0 + s.abs() + t.abs()));
        prop_assert!((back.rho - (-p.alpha * back.t + back.s)).abs() == 0.0);
    }

    #[test]
    fn smooth_jacobian_matches_differences(
        x in 0.2f64..1.4,
        yf in -20.0f64..20.0,
        eps in -0.1f64..0.2,
        la in 3.0f64..5.0,
    ) {
        let a = 10f64.powf(-la);
        let m = build_smooth(&Params::with_epsilon(eps), SmoothingParam::new(a).unwrap());
        let s = State::new(x, yf * a);
        let j = m.jacobian(s);
        let fd = fd_jacobian(&m, s);
        for r in 0..2 {
            for c in 0..2 {
                let scale = j[r][c].abs().max(1e-8);
                prop_assert!((j[r][c] - fd[r][c]).abs() <= 1e-6 * scale, "{r}{c}: {} vs {}", j[r][c], fd[r][c]);
            }
        }
    }
}
