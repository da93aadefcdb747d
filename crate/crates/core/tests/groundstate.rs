use std::sync::OnceLock;

use proptest::prelude::*;
use spikeloc::dual::{self, direct_energy};
use spikeloc::groundstate::*;
use spikeloc::model::validate_params;
use spikeloc::newton::NewtonOptions;
use spikeloc::radial::{RadialField, RadialGrid};

fn cubic() -> &'static GroundStateRecord {
    static REC: OnceLock<GroundStateRecord> = OnceLock::new();
    REC.get_or_init(|| {
        let pr = validate_params(1, 3.0, 3.0).unwrap();
        solve_canonical(&pr, &RadialGrid::default_for(1), &SolveOptions::default()).unwrap()
    })
}

/// Shooting for `u'' + (2/r) u' - u + u^3 = 0`, `u'(0) = 0`, decaying at
/// infinity. Overshoot (u crosses zero) means `a` is too large.
fn shooting_peak_3d() -> f64 {
    let rhs = |r: f64, y: [f64; 2]| [y[1], -2.0 / r * y[1] + y[0] - y[0].powi(3)];
    let shoot = |a: f64| -> bool {
        let h = 1e-3;
        let mut r = 1e-4;
        let mut y = [a + (a - a.powi(3)) * r * r / 6.0, (a - a.powi(3)) * r / 3.0];
        while r < 30.0 {
            let k1 = rhs(r, y);
            let k2 = rhs(r + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
            let k3 = rhs(r + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
            let k4 = rhs(r + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
            for i in 0..2 {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            r += h;
            if y[0] < 0.0 {
                return true;
            }
            if y[1] > 0.0 {
                return false;
            }
        }
        false
    };
    let (mut lo, mut hi) = (2.0, 6.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if shoot(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn cubic_pair_matches_soliton() {
    let rec = cubic();
    assert!((rec.peak_u - 2f64.sqrt()).abs() <= 1e-5);
    assert!((rec.peak_v - 2f64.sqrt()).abs() <= 1e-5);
    assert!((rec.gamma - 8.0 / 3.0).abs() <= 1e-5);
    assert!(rec.newton_residual <= 1e-10);
    let err = rec
        .profile
        .grid
        .nodes()
        .zip(rec.profile.u.iter())
        .fold(0.0_f64, |m, (r, u)| m.max((u - 2f64.sqrt() / r.cosh()).abs()));
    assert!(err <= 1e-5, "{err}");
}

#[test]
fn three_dimensional_peak_agrees_with_shooting() {
    let oracle = shooting_peak_3d();
    assert!((oracle - 4.3373).abs() < 1e-3, "{oracle}");
    let pr = validate_params(3, 3.0, 3.0).unwrap();
    let rec = solve_canonical(&pr, &RadialGrid::default_for(3), &SolveOptions::default()).unwrap();
    assert!((rec.peak_u - oracle).abs() / oracle < 1e-3, "{} vs {oracle}", rec.peak_u);
    let u = &rec.profile.u.0;
    assert!(u.windows(2).all(|w| w[1] <= w[0]));
    assert!(u.iter().all(|&x| x > 0.0));
}

#[test]
fn unequal_pair_energy_matches_dual() {
    let pr = validate_params(1, 3.0, 2.0).unwrap();
    let rec = solve_canonical(&pr, &RadialGrid::default_for(1), &SolveOptions::default()).unwrap();
    assert!(rec.profile.check_shape().is_ok());
    let eta = dual::dual_transform(&rec.profile, Coefficients::UNIT, &pr);
    let nehari = dual::nehari_energy(&eta, Coefficients::UNIT, &pr).unwrap();
    assert!((nehari - rec.gamma).abs() <= 1e-8 * rec.gamma);
}

#[test]
fn swapping_exponents_swaps_components() {
    let grid = RadialGrid::default_for(1);
    let a = solve_canonical(&validate_params(1, 3.0, 2.0).unwrap(), &grid, &SolveOptions::default()).unwrap();
    let b = solve_canonical(&validate_params(1, 2.0, 3.0).unwrap(), &grid, &SolveOptions::default()).unwrap();
    assert!((a.gamma - b.gamma).abs() < 1e-9 * a.gamma);
    assert!((a.peak_u - b.peak_v).abs() < 1e-8);
    assert!((a.peak_v - b.peak_u).abs() < 1e-8);
}

#[test]
fn exponent_continuation_in_five_steps() {
    let rec = continue_in_exponents(cubic(), (3.0, 2.0), 5, &NewtonOptions::default()).unwrap();
    assert!(rec.newton_residual <= 1e-10);
    assert_eq!((rec.params.p(), rec.params.q()), (3.0, 2.0));
}

#[test]
fn rescaled_cubic_solves_frozen_system() {
    let rec = cubic();
    let pr = rec.params;
    let (w1, w2, mu) = rescaling_factors(&pr, Coefficients::new(2.0, 0.5, 1.0));
    assert!((w1 - 0.5f64.powf(-3.0 / 8.0) * 2f64.powf(-1.0 / 8.0)).abs() < 1e-14);
    assert!((w2 - 0.5f64.powf(-1.0 / 8.0) * 2f64.powf(-3.0 / 8.0)).abs() < 1e-14);
    assert_eq!(mu, 1.0);
    let local = rescale_to_local(rec, 2.0, 0.5, 1.0).unwrap();
    assert!(local_residual(&local, Coefficients::new(2.0, 0.5, 1.0), &pr) <= 1e-6);
    let e = direct_energy(&local, Coefficients::new(2.0, 0.5, 1.0), &pr);
    assert!((e - 8.0 / 3.0).abs() <= 1e-5);
}

#[test]
fn compressed_profile_for_larger_v() {
    let rec = cubic();
    let c = Coefficients::new(1.0, 1.0, 4.0);
    let (_, _, mu) = rescaling_factors(&rec.params, c);
    assert_eq!(mu, 2.0);
    let exact = rescale_on_scaled_grid(rec, c).unwrap();
    assert_eq!(exact.grid.radius(), rec.profile.grid.radius() / 2.0);
    assert!(local_residual(&exact, c, &rec.params) <= 1e-6);
    // interpolated onto the canonical grid the residual picks up O(h^4) noise
    let sampled = rescale_to_local(rec, 1.0, 1.0, 4.0).unwrap();
    assert!(local_residual(&sampled, c, &rec.params) <= 1e-4);
    assert!((sampled.u[0] - exact.u[0]).abs() < 1e-12);
}

#[test]
fn decay_rate_of_cubic_soliton() {
    let theta = estimate_decay_rate(&cubic().profile, (10.0, 15.0)).unwrap();
    assert!((0.95..=1.0).contains(&theta), "{theta}");
    let grid = cubic().profile.grid;
    let fast = RadialField::from_fn(&grid, |r| (-2.0 * r).exp());
    let pair = RadialProfilePair::new(fast.clone(), fast, grid);
    assert!((estimate_decay_rate(&pair, (2.0, 8.0)).unwrap() - 2.0).abs() < 1e-3);
    assert!(matches!(
        estimate_decay_rate(&pair, (16.0, 19.0)),
        Err(GroundStateError::WindowTooNoisy { .. })
    ));
}

#[test]
fn mesh_refinement_is_second_order() {
    let pr = validate_params(1, 3.0, 3.0).unwrap();
    let err = |m: usize| {
        let g = RadialGrid::new(1, 20.0, m).unwrap();
        (solve_canonical(&pr, &g, &SolveOptions::default()).unwrap().gamma - 8.0 / 3.0).abs()
    };
    let ratio = err(1001) / err(2001);
    assert!((ratio - 4.0).abs() <= 0.8, "{ratio}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scaling_law_for_frozen_energy(k in 0.3f64..3.0, q in 0.3f64..3.0, v in 0.3f64..3.0) {
        let rec = cubic();
        let pr = rec.params;
        let c = Coefficients::new(k, q, v);
        let local = rescale_on_scaled_grid(rec, c).unwrap();
        prop_assert!(local_residual(&local, c, &pr) <= 1e-6 * (1.0 + v * local.u.max_abs()));
        let energy = direct_energy(&local, c, &pr);
        let predicted = rec.gamma * v.powf(pr.theta_v()) / (q.powf(pr.theta_q()) * k.powf(pr.theta_k()));
        prop_assert!((energy - predicted).abs() <= 1e-9 * predicted);
    }

    #[test]
    fn rescaling_factors_compose(a in 0.3f64..3.0, b in 0.3f64..3.0) {
        let pr = cubic().params;
        let (x1, x2, _) = rescaling_factors(&pr, Coefficients::new(a, 1.0, 1.0));
        let (y1, y2, _) = rescaling_factors(&pr, Coefficients::new(b, 1.0, 1.0));
        let (z1, z2, _) = rescaling_factors(&pr, Coefficients::new(a * b, 1.0, 1.0));
        prop_assert!((x1 * y1 - z1).abs() <= 1e-12 * z1);
        prop_assert!((x2 * y2 - z2).abs() <= 1e-12 * z2);
    }
}
