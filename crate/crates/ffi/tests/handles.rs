use std::ffi::{c_char, CStr, CString};
use std::ptr;

use spikeloc_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as c_char; 512];
    unsafe {
        spikeloc_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn problem(n: usize, p: f64, q: f64, k: &str) -> *mut SpikelocProblem {
    let k = CString::new(k).unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { spikeloc_problem_new(n, p, q, k.as_ptr(), ptr::null(), ptr::null(), &mut out) };
    assert_eq!(status, SpikelocStatus::Ok, "{}", last_error());
    out
}

#[test]
fn cubic_ground_state_round_trip() {
    let pb = problem(1, 3.0, 3.0, "1");
    let mut gs = ptr::null_mut();
    unsafe {
        assert_eq!(spikeloc_ground_state_solve(pb, 0.0, 0, &mut gs), SpikelocStatus::Ok);
        let (mut gamma, mut pu) = (0.0, 0.0);
        spikeloc_ground_state_summary(gs, &mut gamma, &mut pu, ptr::null_mut(), ptr::null_mut());
        assert!((gamma - 8.0 / 3.0).abs() < 1e-5);
        assert!((pu - 2f64.sqrt()).abs() < 1e-5);

        let m = spikeloc_ground_state_len(gs);
        let mut r = vec![0.0; m];
        let mut u = vec![0.0; m];
        assert_eq!(
            spikeloc_ground_state_profile(gs, r.as_mut_ptr(), u.as_mut_ptr(), ptr::null_mut(), m),
            SpikelocStatus::Ok
        );
        let err = r
            .iter()
            .zip(&u)
            .map(|(r, u)| (u - 2f64.sqrt() / r.cosh()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "{err}");
        assert_eq!(
            spikeloc_ground_state_profile(gs, r.as_mut_ptr(), ptr::null_mut(), ptr::null_mut(), m - 1),
            SpikelocStatus::DimensionMismatch
        );

        let z = [0.0];
        let (mut sigma, mut grad) = (0.0, [1.0]);
        assert_eq!(spikeloc_sigma_at(pb, gs, z.as_ptr(), 1, &mut sigma, grad.as_mut_ptr()), SpikelocStatus::Ok);
        assert!((sigma - gamma).abs() < 1e-14);
        assert_eq!(grad[0], 0.0);
        assert_eq!(
            spikeloc_sigma_at(pb, gs, z.as_ptr(), 2, &mut sigma, ptr::null_mut()),
            SpikelocStatus::DimensionMismatch
        );
        spikeloc_ground_state_free(gs);
        spikeloc_problem_free(pb);
    }
}

#[test]
fn validation_errors_carry_messages() {
    let mut out = ptr::null_mut();
    let status = unsafe { spikeloc_problem_new(1, 1.0, 3.0, ptr::null(), ptr::null(), ptr::null(), &mut out) };
    assert_eq!(status, SpikelocStatus::Validation);
    assert!(out.is_null());
    assert!(last_error().contains("p > 1"), "{}", last_error());

    let k = CString::new("1 + foo").unwrap();
    let status = unsafe { spikeloc_problem_new(1, 3.0, 3.0, k.as_ptr(), ptr::null(), ptr::null(), &mut out) };
    assert_eq!(status, SpikelocStatus::Validation);
    assert!(last_error().contains("foo"));

    let status = unsafe { spikeloc_problem_new(1, 3.0, 3.0, ptr::null(), ptr::null(), ptr::null(), ptr::null_mut()) };
    assert_eq!(status, SpikelocStatus::NullPointer);
}

#[test]
fn null_handles_are_tolerated() {
    unsafe {
        spikeloc_problem_free(ptr::null_mut());
        spikeloc_ground_state_free(ptr::null_mut());
        spikeloc_candidates_free(ptr::null_mut());
        assert_eq!(spikeloc_ground_state_len(ptr::null()), 0);
        assert_eq!(spikeloc_candidates_len(ptr::null()), 0);
        assert!(!spikeloc_candidates_degenerate(ptr::null()));
        let mut sigma = 0.0;
        let z = [0.0];
        assert_eq!(
            spikeloc_sigma_at(ptr::null(), ptr::null(), z.as_ptr(), 1, &mut sigma, ptr::null_mut()),
            SpikelocStatus::NullPointer
        );
    }
}

#[test]
fn locate_two_bump_candidates() {
    let pb = problem(1, 3.0, 3.0, "1 + 0.5*exp(-(x-2)^2) + 0.5*exp(-(x+2)^2)");
    let (lo, hi) = ([-4.0], [4.0]);
    let mut c = ptr::null_mut();
    unsafe {
        assert_eq!(spikeloc_locate(pb, lo.as_ptr(), hi.as_ptr(), 1, 3, &mut c), SpikelocStatus::Ok);
        let mut found = Vec::new();
        for i in 0..spikeloc_candidates_len(c) {
            let mut z = [0.0];
            let mut kind = SpikelocKind::Degenerate;
            assert_eq!(
                spikeloc_candidates_get(c, i, z.as_mut_ptr(), 1, &mut kind, ptr::null_mut()),
                SpikelocStatus::Ok
            );
            found.push((z[0], kind));
        }
        let mut z = [0.0];
        assert_eq!(
            spikeloc_candidates_get(c, found.len(), z.as_mut_ptr(), 1, ptr::null_mut(), ptr::null_mut()),
            SpikelocStatus::OutOfRange
        );
        spikeloc_candidates_free(c);
        spikeloc_problem_free(pb);
        assert_eq!(found.len(), 3, "{found:?}");
        assert!(found.iter().any(|&(z, k)| (z - 2.0).abs() < 1e-3 && k == SpikelocKind::MinimumOfSigma));
        assert!(found.iter().any(|&(z, k)| (z + 2.0).abs() < 1e-3 && k == SpikelocKind::MinimumOfSigma));
        assert!(found.iter().any(|&(z, k)| z.abs() < 1e-3 && k == SpikelocKind::MaximumOfSigma));
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(spikeloc_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
