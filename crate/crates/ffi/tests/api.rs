use std::ffi::{CStr, CString};
use std::ptr;

use qtomo_ffi::*;

fn last_error() -> String {
    let p = qtomo_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn channel(spec: &str) -> *mut QtomoChannel {
    let s = CString::new(spec).unwrap();
    let mut ch = ptr::null_mut();
    assert_eq!(
        qtomo_channel_from_spec(s.as_ptr(), 2, &mut ch),
        QtomoStatus::Ok
    );
    ch
}

unsafe fn mixed() -> *mut QtomoState {
    let s = CString::new("maximally-mixed").unwrap();
    let mut st = ptr::null_mut();
    assert_eq!(
        qtomo_state_from_spec(s.as_ptr(), 2, &mut st),
        QtomoStatus::Ok
    );
    st
}

#[test]
fn exact_reconstruction_through_handles() {
    unsafe {
        let ch = channel("phase-damping:0.5");
        let st = mixed();
        let mut rec = ptr::null_mut();
        assert_eq!(qtomo_reconstruct_exact(st, ch, &mut rec), QtomoStatus::Ok);
        assert_eq!(qtomo_reconstruction_size(rec), 3);
        let mut m = [0.0; 9];
        assert_eq!(
            qtomo_reconstruction_m(rec, m.as_mut_ptr(), 9),
            QtomoStatus::Ok
        );
        assert!(
            (m[0] - 0.5).abs() < 1e-12 && (m[4] - 0.5).abs() < 1e-12 && (m[8] - 1.0).abs() < 1e-12
        );
        assert!(qtomo_reconstruction_delta_m(rec) < 1e-10);
        assert!(qtomo_reconstruction_completeness_defect(rec) < 1e-10);

        // reconstructed channel acts like the original
        let mut back = ptr::null_mut();
        assert_eq!(
            qtomo_reconstruction_channel(rec, &mut back),
            QtomoStatus::Ok
        );
        let (re, im) = ([0.7, 0.2, 0.2, 0.3], [0.0, -0.1, 0.1, 0.0]);
        let (mut a_re, mut a_im, mut b_re, mut b_im) = ([0.0; 4], [0.0; 4], [0.0; 4], [0.0; 4]);
        let ok = QtomoStatus::Ok;
        assert_eq!(
            qtomo_channel_apply(
                ch,
                re.as_ptr(),
                im.as_ptr(),
                a_re.as_mut_ptr(),
                a_im.as_mut_ptr()
            ),
            ok
        );
        assert_eq!(
            qtomo_channel_apply(
                back,
                re.as_ptr(),
                im.as_ptr(),
                b_re.as_mut_ptr(),
                b_im.as_mut_ptr()
            ),
            ok
        );
        for i in 0..4 {
            assert!((a_re[i] - b_re[i]).abs() < 1e-9 && (a_im[i] - b_im[i]).abs() < 1e-9);
        }

        let n = qtomo_reconstruction_kraus_count(rec);
        assert!(n >= 1);
        let (mut kr, mut ki) = ([0.0; 4], [0.0; 4]);
        assert_eq!(
            qtomo_reconstruction_kraus_op(rec, 0, kr.as_mut_ptr(), ki.as_mut_ptr(), 4),
            ok
        );
        assert_eq!(
            qtomo_reconstruction_kraus_op(rec, n, kr.as_mut_ptr(), ki.as_mut_ptr(), 4),
            QtomoStatus::InvalidArgument
        );

        qtomo_channel_free(back);
        qtomo_reconstruction_free(rec);
        qtomo_state_free(st);
        qtomo_channel_free(ch);
    }
}

#[test]
fn sampled_reconstruction_is_seeded() {
    unsafe {
        let ch = channel("amplitude-damping:0.3");
        let st = mixed();
        let run = |seed| {
            let mut rec = ptr::null_mut();
            let s = qtomo_reconstruct_sampled(
                st,
                ch,
                4.0 / 9.0,
                20_000,
                seed,
                QtomoScheme::TwoPointer,
                false,
                &mut rec,
            );
            assert_eq!(s, QtomoStatus::Ok, "{}", last_error());
            let mut m = [0.0; 9];
            qtomo_reconstruction_m(rec, m.as_mut_ptr(), 9);
            let d = qtomo_reconstruction_delta_m(rec);
            qtomo_reconstruction_free(rec);
            (m, d)
        };
        let (a, da) = run(7);
        let (b, _) = run(7);
        let (c, _) = run(8);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(da.is_finite() && da < 0.5);
        qtomo_state_free(st);
        qtomo_channel_free(ch);
    }
}

#[test]
fn kraus_and_matrix_constructors() {
    unsafe {
        // bit flip with p = 0.25
        let (a, b) = (0.75f64.sqrt(), 0.25f64.sqrt());
        let re = [a, 0.0, 0.0, a, 0.0, b, b, 0.0];
        let im = [0.0; 8];
        let mut ch = ptr::null_mut();
        assert_eq!(
            qtomo_channel_from_kraus(2, 2, re.as_ptr(), im.as_ptr(), &mut ch),
            QtomoStatus::Ok
        );
        let (rho_re, rho_im) = ([0.6, 0.0, 0.0, 0.4], [0.0; 4]);
        let mut st = ptr::null_mut();
        assert_eq!(
            qtomo_state_from_matrix(2, rho_re.as_ptr(), rho_im.as_ptr(), &mut st),
            QtomoStatus::Ok
        );
        let mut rec = ptr::null_mut();
        assert_eq!(qtomo_reconstruct_exact(st, ch, &mut rec), QtomoStatus::Ok);
        let mut m = [0.0; 9];
        qtomo_reconstruction_m(rec, m.as_mut_ptr(), 9);
        assert!(
            (m[0] - 1.0).abs() < 1e-12 && (m[4] - 0.5).abs() < 1e-12 && (m[8] - 0.5).abs() < 1e-12
        );
        qtomo_reconstruction_free(rec);
        qtomo_state_free(st);

        // not trace preserving
        let half = [0.5, 0.0, 0.0, 0.5];
        let mut bad = ptr::null_mut();
        assert_ne!(
            qtomo_channel_from_kraus(2, 1, half.as_ptr(), [0.0; 4].as_ptr(), &mut bad),
            QtomoStatus::Ok
        );
        assert!(bad.is_null());
        qtomo_channel_free(ch);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut ch = ptr::null_mut();
        assert_eq!(
            qtomo_channel_from_spec(ptr::null(), 2, &mut ch),
            QtomoStatus::NullPointer
        );
        let bogus = CString::new("warp-drive").unwrap();
        assert_eq!(
            qtomo_channel_from_spec(bogus.as_ptr(), 2, &mut ch),
            QtomoStatus::InvalidArgument
        );
        assert!(last_error().contains("warp-drive"));

        let pure = [1.0, 0.0, 0.0, 0.0];
        let mut st = ptr::null_mut();
        assert_eq!(
            qtomo_state_from_matrix(2, pure.as_ptr(), [0.0; 4].as_ptr(), &mut st),
            QtomoStatus::Ok
        );
        let ident = channel("identity");
        let mut rec = ptr::null_mut();
        assert_eq!(
            qtomo_reconstruct_exact(st, ident, &mut rec),
            QtomoStatus::SingularState
        );
        assert!(rec.is_null());

        let mut small = [0.0; 4];
        let good = mixed();
        assert_eq!(
            qtomo_reconstruct_exact(good, ident, &mut rec),
            QtomoStatus::Ok
        );
        assert_eq!(
            qtomo_reconstruction_m(rec, small.as_mut_ptr(), 4),
            QtomoStatus::DimensionMismatch
        );
        assert!(qtomo_reconstruction_delta_m(ptr::null()).is_nan());
        assert_eq!(qtomo_reconstruction_size(ptr::null()), 0);

        qtomo_reconstruction_free(rec);
        qtomo_state_free(good);
        qtomo_state_free(st);
        qtomo_channel_free(ident);
        qtomo_channel_free(ptr::null_mut());
    }
}

#[test]
fn budget_helpers() {
    unsafe {
        let mut n = 0u64;
        assert_eq!(qtomo_required_trials(0.1, 0.5, &mut n), QtomoStatus::Ok);
        assert_eq!(n, 10_000);
        let mut e = 0.0;
        assert_eq!(qtomo_optimal_epsilon(0.1, 0.4, &mut e), QtomoStatus::Ok);
        assert!((e - 0.5).abs() < 1e-12);
        assert_eq!(
            qtomo_required_trials(-1.0, 0.5, &mut n),
            QtomoStatus::InvalidArgument
        );
        assert_eq!(
            qtomo_required_trials(0.1, 0.5, ptr::null_mut()),
            QtomoStatus::NullPointer
        );
    }
    let v = unsafe { CStr::from_ptr(qtomo_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
