use std::sync::OnceLock;

use proptest::prelude::*;
use spikeloc::groundstate::*;
use spikeloc::landscape::*;
use spikeloc::model::{validate_params, PotentialTriple, SearchBox};
use spikeloc::newton::NewtonOptions;
use spikeloc::radial::RadialGrid;

const BUMP: &str = "1 + 0.5*exp(-x1^2)";
const TWO_BUMP: &str = "1 + 0.5*exp(-(x1-2)^2) + 0.5*exp(-(x1+2)^2)";

fn cubic() -> &'static GroundStateRecord {
    static REC: OnceLock<GroundStateRecord> = OnceLock::new();
    REC.get_or_init(|| {
        let pr = validate_params(1, 3.0, 3.0).unwrap();
        solve_canonical(&pr, &RadialGrid::default_for(1), &SolveOptions::default()).unwrap()
    })
}

fn bump() -> PotentialTriple {
    PotentialTriple::parse(BUMP, "1", None, 1).unwrap()
}

fn constant(k: f64, q: f64, v: f64) -> PotentialTriple {
    PotentialTriple::parse(&format!("{k:?}"), &format!("{q:?}"), Some(&format!("{v:?}")), 1).unwrap()
}

/// Roots of `K'` for the two-bump potential, by bisection on sign changes.
fn two_bump_critical_points() -> Vec<f64> {
    let dk = |x: f64| -(x - 2.0) * (-(x - 2.0).powi(2)).exp() - (x + 2.0) * (-(x + 2.0).powi(2)).exp();
    let mut roots = Vec::new();
    let xs: Vec<f64> = (0..=800).map(|i| -4.0 + 0.01 * i as f64 + 0.003).collect();
    for w in xs.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        if dk(a).signum() == dk(b).signum() {
            continue;
        }
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if dk(a).signum() == dk(m).signum() {
                a = m;
            } else {
                b = m;
            }
        }
        roots.push(0.5 * (a + b));
    }
    roots
}

#[test]
fn constant_potentials_reproduce_gamma() {
    let rec = cubic();
    let s = sigma_at(&[0.7], &PotentialTriple::unit(1), rec).unwrap();
    assert_eq!(s.sigma, rec.gamma);
    assert_eq!(s.grad_sigma, vec![0.0]);
    let d = sigma_direct(&[0.7], &PotentialTriple::unit(1), rec, &NewtonOptions::default()).unwrap();
    assert!((d.sigma - rec.gamma).abs() <= 1e-8 * rec.gamma);
}

#[test]
fn bump_sigma_and_gradient_at_known_points() {
    let rec = cubic();
    let pot = bump();
    let s0 = sigma_at(&[0.0], &pot, rec).unwrap();
    assert!((s0.sigma - rec.gamma * 1.5f64.powf(-0.5)).abs() <= 1e-14);
    let s1 = sigma_at(&[1.0], &pot, rec).unwrap();
    let k1 = 1.0 + 0.5 * (-1.0f64).exp();
    let dk1 = -(-1.0f64).exp();
    let expected = -(rec.gamma / 2.0) * k1.powf(-1.5) * dk1;
    assert!(expected > 0.0);
    assert!((s1.grad_sigma[0] - expected).abs() <= 1e-12 * expected);
}

#[test]
fn scaling_agrees_with_direct_solve() {
    let rec = cubic();
    for (k, q, v) in [(2.0, 0.5, 1.0), (3.0, 3.0, 1.0), (3.0, 3.0, 4.0), (0.7, 1.9, 2.5), (1.5, 1.0, 0.5)] {
        let pot = constant(k, q, v);
        let a = sigma_at(&[0.0], &pot, rec).unwrap();
        let d = sigma_direct(&[0.0], &pot, rec, &NewtonOptions::default()).unwrap();
        assert!((a.sigma - d.sigma).abs() <= 1e-6 * a.sigma, "({k},{q},{v})");
        assert_eq!(d.method, SigmaMethod::Direct);
    }
}

#[test]
fn scaling_agrees_with_direct_over_bump_grid() {
    let rec = cubic();
    let pot = bump();
    for i in 0..21 {
        let z = [-3.0 + 0.3 * i as f64];
        let a = sigma_at(&z, &pot, rec).unwrap();
        let d = sigma_direct(&z, &pot, rec, &NewtonOptions::default()).unwrap();
        assert!((a.sigma - d.sigma).abs() <= 1e-5 * a.sigma, "z={}", z[0]);
    }
}

#[test]
fn branch_derivative_matches_finite_differences() {
    let rec = cubic();
    let pot = bump();
    for i in 0..10 {
        let z = -2.25 + 0.5 * i as f64;
        let (local, _) = local_solution(&[z], &pot, rec, &NewtonOptions::default()).unwrap();
        let formula = grad_sigma_formula(&[z], &local, &pot, &rec.params).unwrap();
        let h = 1e-4;
        let fd = (sigma_at(&[z + h], &pot, rec).unwrap().sigma - sigma_at(&[z - h], &pot, rec).unwrap().sigma)
            / (2.0 * h);
        let log = sigma_at(&[z], &pot, rec).unwrap().grad_sigma[0];
        assert!((formula.from_left[0] - fd).abs() <= 1e-4 * fd.abs(), "z={z}");
        assert!((formula.from_left[0] - log).abs() <= 1e-6 * log.abs(), "z={z}");
        assert!(formula.singleton_branch);
    }
}

#[test]
fn constant_potentials_have_zero_branch_derivative() {
    let rec = cubic();
    let pot = constant(2.0, 0.5, 1.0);
    let (local, _) = local_solution(&[0.3], &pot, rec, &NewtonOptions::default()).unwrap();
    let d = grad_sigma_formula(&[0.3], &local, &pot, &rec.params).unwrap();
    assert_eq!(d.norm(), 0.0);
}

#[test]
fn singleton_brackets_are_directional_derivative_and_its_negative() {
    let rec = cubic();
    let pot = bump();
    let z = [0.8];
    let (local, _) = local_solution(&z, &pot, rec, &NewtonOptions::default()).unwrap();
    let m = sigma_at(&z, &pot, rec).unwrap().sigma;
    let grad = grad_sigma_formula(&z, &local, &pot, &rec.params).unwrap().from_left[0];
    for w in [1.0, -1.0, 0.25] {
        let (minus, plus) = gamma_pm(&z, m, std::slice::from_ref(&local), &[w], &pot, &rec.params).unwrap();
        assert!((minus - grad * w).abs() <= 1e-12 * grad.abs());
        assert!((plus + grad * w).abs() <= 1e-12 * grad.abs());
    }
    assert_eq!(gamma_pm(&z, m, &[local], &[0.0], &pot, &rec.params).unwrap(), (0.0, 0.0));
}

#[test]
fn constant_potentials_give_zero_brackets() {
    let rec = cubic();
    let pot = PotentialTriple::unit(1);
    for w in [1.0, -2.0] {
        let r = gamma_pm(&[0.0], rec.gamma, std::slice::from_ref(&rec.profile), &[w], &pot, &rec.params).unwrap();
        assert_eq!(r, (0.0, 0.0));
    }
    assert!(in_critical_set(&[0.0], rec.gamma, std::slice::from_ref(&rec.profile), &pot, &rec.params, 1e-12).unwrap());
}

#[test]
fn critical_set_membership_for_bump() {
    let rec = cubic();
    let pot = bump();
    let member = |z: f64| {
        let (local, _) = local_solution(&[z], &pot, rec, &NewtonOptions::default()).unwrap();
        let m = sigma_at(&[z], &pot, rec).unwrap().sigma;
        in_critical_set(&[z], m, &[local], &pot, &rec.params, 1e-8).unwrap()
    };
    assert!(member(0.0));
    assert!(!member(1.0));
}

#[test]
fn bump_has_single_minimum_at_origin() {
    let pr = cubic().params;
    let report = find_spike_candidates(&bump(), &SearchBox::cube(1, 3.0), &pr, &CandidateOptions::default()).unwrap();
    assert_eq!(report.candidates.len(), 1);
    assert!(report.candidates[0].z[0].abs() < 1e-6);
    assert_eq!(report.candidates[0].kind, CriticalKind::MinimumOfSigma);
    assert!(!report.degenerate);
}

#[test]
fn constant_landscape_is_degenerate() {
    let pr = cubic().params;
    let report =
        find_spike_candidates(&PotentialTriple::unit(1), &SearchBox::cube(1, 3.0), &pr, &CandidateOptions::default())
            .unwrap();
    assert!(report.degenerate);
    assert_eq!(report.converged, report.starts);
}

#[test]
fn two_bump_candidates_match_bisection_oracle() {
    let oracle = two_bump_critical_points();
    assert_eq!(oracle.len(), 3);
    let pr = cubic().params;
    let pot = PotentialTriple::parse(TWO_BUMP, "1", None, 1).unwrap();
    let report = find_spike_candidates(&pot, &SearchBox::cube(1, 4.0), &pr, &CandidateOptions::default()).unwrap();
    let mut found: Vec<(f64, CriticalKind)> = report.candidates.iter().map(|c| (c.z[0], c.kind)).collect();
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    assert_eq!(found.len(), 3, "{found:?}");
    for ((z, kind), root) in found.iter().zip(&oracle) {
        assert!((z - root).abs() < 1e-6, "{z} vs {root}");
        let expected = if root.abs() < 0.5 {
            CriticalKind::MaximumOfSigma
        } else {
            CriticalKind::MinimumOfSigma
        };
        assert_eq!(*kind, expected);
    }
}

#[test]
fn multistart_is_deterministic() {
    let pr = cubic().params;
    let pot = PotentialTriple::parse(TWO_BUMP, "1", None, 1).unwrap();
    let opts = CandidateOptions::default();
    let a = find_spike_candidates(&pot, &SearchBox::cube(1, 4.0), &pr, &opts).unwrap();
    let b = find_spike_candidates(&pot, &SearchBox::cube(1, 4.0), &pr, &opts).unwrap();
    assert_eq!(a, b);
}

#[test]
fn landscape_map_carries_exponents() {
    let rec = cubic();
    let points = SearchBox::cube(1, 3.0).lattice(31);
    let map = SigmaLandscape::build(&points, &bump(), rec).unwrap();
    assert_eq!(map.samples.len(), 31);
    assert!(map.exponents_consistent());
    assert_eq!(map.theta_k, 0.5);
}

#[test]
fn clarke_hull_on_kinks_and_smooth_curves() {
    let grid: Vec<f64> = (-200..=200).map(|i| i as f64 * 0.005).collect();
    let abs: Vec<(f64, f64)> = grid.iter().map(|&z| (z, z.abs())).collect();
    assert!(clarke_hull_1d(0.0, &abs, 0.1).unwrap().covers(-0.9, 0.9));
    let kink: Vec<(f64, f64)> = grid.iter().map(|&z| (z, z.max(2.0 * z))).collect();
    let h = clarke_hull_1d(0.0, &kink, 0.1).unwrap();
    assert!((h.lo - 1.0).abs() < 1e-9 && (h.hi - 2.0).abs() < 1e-9);

    let rec = cubic();
    let pot = bump();
    let samples: Vec<(f64, f64)> = grid
        .iter()
        .map(|&z| (z + 1.0, sigma_at(&[z + 1.0], &pot, rec).unwrap().sigma))
        .collect();
    let exact = sigma_at(&[1.0], &pot, rec).unwrap().grad_sigma[0];
    for window in [0.1, 0.05] {
        let h = clarke_hull_1d(1.0, &samples, window).unwrap();
        assert!(h.lo <= exact + 1e-12 && exact <= h.hi + 1e-12);
        assert!(h.hi - h.lo <= 0.5 * window, "width {} at window {window}", h.hi - h.lo);
    }
}

#[test]
fn lipschitz_quotients_respect_analytic_bound() {
    let zs: Vec<f64> = (0..=600).map(|i| -3.0 + 0.01 * i as f64).collect();
    let ev = lipschitz_evidence(&zs, &bump(), cubic()).unwrap();
    assert_eq!(ev.cells, 600);
    assert!(ev.worst_ratio <= 1.05, "{ev:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sigma_is_homogeneous_in_coefficients(k in 0.2f64..5.0, q in 0.2f64..5.0, v in 0.2f64..5.0, lambda in 0.2f64..5.0) {
        let rec = cubic();
        let pr = rec.params;
        let base = sigma_at(&[0.0], &constant(k, q, v), rec).unwrap().sigma;
        let k_scaled = sigma_at(&[0.0], &constant(lambda * k, q, v), rec).unwrap().sigma;
        let v_scaled = sigma_at(&[0.0], &constant(k, q, lambda * v), rec).unwrap().sigma;
        prop_assert!((k_scaled - base * lambda.powf(-pr.theta_k())).abs() <= 1e-12 * base.max(k_scaled));
        prop_assert!((v_scaled - base * lambda.powf(pr.theta_v())).abs() <= 1e-12 * base.max(v_scaled));
        prop_assert!(base > 0.0);
    }

    #[test]
    fn log_locator_and_sigma_are_reciprocal(z in -3.0f64..3.0) {
        let rec = cubic();
        let pot = bump();
        let sigma = sigma_at(&[z], &pot, rec).unwrap().sigma;
        let g = log_locator(&[z], &pot, &rec.params).unwrap();
        prop_assert!((g + (sigma / rec.gamma).ln()).abs() <= 1e-12);
    }
}
