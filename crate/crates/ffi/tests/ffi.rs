use std::ffi::{CStr, CString};
use std::ptr;

use mbqt_ffi::*;

fn last_error() -> String {
    let p = mbqt_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn cluster_handle_roundtrip() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(mbqt_cluster_new(2, &mut h), MbqtStatus::Ok);
        assert_eq!(mbqt_mps_n(h), 2);
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(mbqt_mps_amplitude(h, [1u8, 1].as_ptr(), 2, &mut re, &mut im), MbqtStatus::Ok);
        assert!((re + 0.5).abs() < 1e-15 && im == 0.0);

        let (mut xi, mut div) = (f64::NAN, -1);
        assert_eq!(mbqt_mps_correlation_length(h, &mut xi, &mut div), MbqtStatus::Ok);
        assert_eq!((xi, div), (0.0, 0));

        let mut json = ptr::null_mut();
        assert_eq!(mbqt_mps_to_json(h, &mut json), MbqtStatus::Ok);
        let mut h2 = ptr::null_mut();
        assert_eq!(mbqt_mps_from_json(json, &mut h2), MbqtStatus::Ok);
        let (mut re2, mut im2) = (0.0, 0.0);
        mbqt_mps_amplitude(h2, [1u8, 1].as_ptr(), 2, &mut re2, &mut im2);
        assert_eq!((re, im), (re2, im2));
        mbqt_string_free(json);
        mbqt_mps_free(h2);
        mbqt_mps_free(h);
    }
}

#[test]
fn theta_spectrum_is_normalized() {
    unsafe {
        let thetas = [0.3, 0.5, 0.2, 0.7, 0.4, 0.6];
        let left = [0.8, 0.0, 0.6, 0.0];
        let right = [1.0, 0.0, 0.0, 0.0];
        let mut h = ptr::null_mut();
        assert_eq!(mbqt_theta_new(6, thetas.as_ptr(), left.as_ptr(), right.as_ptr(), &mut h), MbqtStatus::Ok);
        let mut values = [0.0; 2];
        let mut len = 0;
        assert_eq!(mbqt_mps_spectrum(h, 3, values.as_mut_ptr(), 2, &mut len), MbqtStatus::Ok);
        assert_eq!(len, 2);
        assert!((values[0] + values[1] - 1.0).abs() < 1e-12);
        assert!(values[0] >= values[1]);
        assert_eq!(mbqt_mps_spectrum(h, 0, values.as_mut_ptr(), 2, &mut len), MbqtStatus::InvalidSpec);
        mbqt_mps_free(h);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(mbqt_cluster_new(1, &mut h), MbqtStatus::InvalidSpec);
        assert!(h.is_null());
        assert!(!last_error().is_empty());

        let bad = CString::new(r#"{"family": "cluster", "n": 4, "m": 1}"#).unwrap();
        assert_eq!(mbqt_family_from_json(bad.as_ptr(), &mut h), MbqtStatus::InvalidSpec);
        assert!(last_error().contains('m'));

        assert_eq!(mbqt_cluster_new(3, ptr::null_mut()), MbqtStatus::NullPointer);
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(mbqt_mps_amplitude(ptr::null(), ptr::null(), 0, &mut re, &mut im), MbqtStatus::NullPointer);

        assert_eq!(mbqt_cluster_new(3, &mut h), MbqtStatus::Ok);
        assert!(mbqt_last_error().is_null());
        assert_eq!(mbqt_mps_amplitude(h, [0u8, 2, 0].as_ptr(), 3, &mut re, &mut im), MbqtStatus::InvalidArgument);
        mbqt_mps_free(h);
        mbqt_mps_free(ptr::null_mut());
    }
}

#[test]
fn cluster_teleport_gate() {
    let spec = CString::new(r#"{"family": "cluster", "n": 4}"#).unwrap();
    let angles = [0.4, 1.1];
    let mut outcomes = [9u8; 2];
    let mut gate = [0.0; 8];
    let status = unsafe {
        mbqt_teleport_run(spec.as_ptr(), angles.as_ptr(), 2, 5, 1, outcomes.as_mut_ptr(), gate.as_mut_ptr())
    };
    assert_eq!(status, MbqtStatus::Ok);
    assert!(outcomes.iter().all(|&m| m <= 1));
    // unitary up to scale: rows orthogonal with equal norms
    let row = |r: usize| [(gate[4 * r], gate[4 * r + 1]), (gate[4 * r + 2], gate[4 * r + 3])];
    let (a, b) = (row(0), row(1));
    let dot_re = a[0].0 * b[0].0 + a[0].1 * b[0].1 + a[1].0 * b[1].0 + a[1].1 * b[1].1;
    let dot_im = a[0].0 * b[0].1 - a[0].1 * b[0].0 + a[1].0 * b[1].1 - a[1].1 * b[1].0;
    assert!(dot_re.abs() < 1e-12 && dot_im.abs() < 1e-12);
}

#[test]
fn header_is_valid_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/mbqt.h");
    let text = std::fs::read_to_string(header).unwrap();
    for sym in ["mbqt_cluster_new", "mbqt_last_error", "MBQT_STATUS_OK", "typedef struct MbqtMps MbqtMps"] {
        assert!(text.contains(sym), "header lacks {sym}");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("check.c");
    std::fs::write(&src, "#include \"mbqt.h\"\nint main(void) { return MBQT_STATUS_OK; }\n").unwrap();
    let status = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .status();
    match status {
        Ok(s) => assert!(s.success()),
        Err(e) => eprintln!("skipping compile check, no C compiler: {e}"),
    }
}
