//! C ABI for `mbqt-core`.
//!
//! States live behind the opaque `MbqtMps` handle. Every fallible call
//! returns an `MbqtStatus`; on failure `mbqt_last_error` gives the message
//! for the calling thread. Strings handed out must be released with
//! `mbqt_string_free`, handles with `mbqt_mps_free`.
//!
//! Complex numbers cross the boundary as interleaved `(re, im)` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mbqt_core::entanglement::{covariance_matrices, es_from_covariance};
use mbqt_core::families::{cluster_mps, theta_family_mps, FamilySpec, ThetaFamilySpec};
use mbqt_core::mps::CorrelationLength;
use mbqt_core::teleport::{run_protocol, OutcomeSource};
use mbqt_core::{Error, MpsState};
use num_complex::Complex64;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MbqtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidSpec = 3,
    TooLarge = 4,
    Numerical = 5,
    Unsupported = 6,
    Panic = 7,
}

/// Opaque MPS handle.
pub struct MbqtMps {
    inner: MpsState,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> MbqtStatus {
    match e {
        Error::InvalidSpec(_) | Error::SingularTheta(_) | Error::NonFinite => MbqtStatus::InvalidSpec,
        Error::DimensionMismatch(_) => MbqtStatus::InvalidArgument,
        Error::InstanceTooLarge(_) => MbqtStatus::TooLarge,
        Error::Unsupported(_) => MbqtStatus::Unsupported,
        Error::ContractViolation(_) | Error::DegenerateInput(_) | Error::NoConvergence(_) => MbqtStatus::Numerical,
    }
}

enum Fail {
    Core(Error),
    Null(&'static str),
    Arg(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Self::Core(e)
    }
}

/// Runs `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> MbqtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            MbqtStatus::Ok
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            MbqtStatus::NullPointer
        }
        Ok(Err(Fail::Arg(msg))) => {
            set_error(msg);
            MbqtStatus::InvalidArgument
        }
        Err(_) => {
            set_error("internal panic");
            MbqtStatus::Panic
        }
    }
}

unsafe fn non_null<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Arg(format!("{what} is not UTF-8")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn boundary(p: *const f64, what: &'static str) -> Result<[Complex64; 2], Fail> {
    let v = slice(p, 4, what)?;
    Ok([Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3])])
}

unsafe fn emit(out: *mut *mut MbqtMps, mps: MpsState) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    *out = Box::into_raw(Box::new(MbqtMps { inner: mps }));
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn mbqt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Cluster state on `n` qubits.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mbqt_cluster_new(n: usize, out: *mut *mut MbqtMps) -> MbqtStatus {
    guard(|| emit(out, cluster_mps(n)?))
}

/// Theta family with per-site angles. `left` and `right` hold
/// `(re a, im a, re b, im b)`.
///
/// # Safety
/// `thetas` must hold `n` doubles, `left` and `right` four each.
#[no_mangle]
pub unsafe extern "C" fn mbqt_theta_new(
    n: usize,
    thetas: *const f64,
    left: *const f64,
    right: *const f64,
    out: *mut *mut MbqtMps,
) -> MbqtStatus {
    guard(|| {
        let thetas = slice(thetas, n, "thetas")?.to_vec();
        let spec = ThetaFamilySpec::new(thetas, boundary(left, "left")?, boundary(right, "right")?)?;
        emit(out, theta_family_mps(&spec)?)
    })
}

/// Any family from its JSON spec (`{"family": "theta", ...}`).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mbqt_family_from_json(json: *const c_char, out: *mut *mut MbqtMps) -> MbqtStatus {
    guard(|| {
        let spec: FamilySpec =
            serde_json::from_str(c_str(json, "json")?).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        emit(out, spec.build_mps()?)
    })
}

/// An MPS from its site-tensor JSON.
///
/// # Safety
/// As for `mbqt_family_from_json`.
#[no_mangle]
pub unsafe extern "C" fn mbqt_mps_from_json(json: *const c_char, out: *mut *mut MbqtMps) -> MbqtStatus {
    guard(|| emit(out, MpsState::from_json(c_str(json, "json")?)?))
}

/// # Safety
/// `mps` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mbqt_mps_free(mps: *mut MbqtMps) {
    if !mps.is_null() {
        drop(Box::from_raw(mps));
    }
}

/// Number of sites, or 0 for NULL.
///
/// # Safety
/// `mps` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mbqt_mps_n(mps: *const MbqtMps) -> usize {
    mps.as_ref().map_or(0, |m| m.inner.n())
}

/// Amplitude of the bit string `bits[0..len]` (`bits[k]` on site `k`).
///
/// # Safety
/// `bits` must hold `len` bytes; `re` and `im` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mbqt_mps_amplitude(
    mps: *const MbqtMps,
    bits: *const u8,
    len: usize,
    re: *mut f64,
    im: *mut f64,
) -> MbqtStatus {
    guard(|| {
        let m = non_null(mps, "mps")?;
        let bits = slice(bits, len, "bits")?;
        if bits.iter().any(|&b| b > 1) {
            return Err(Fail::Arg("bits must be 0 or 1".into()));
        }
        if re.is_null() || im.is_null() {
            return Err(Fail::Null("re/im"));
        }
        let z = m.inner.amplitude(bits)?;
        *re = z.re;
        *im = z.im;
        Ok(())
    })
}

/// Correlation length of a uniform chain. `*diverging` is set to 1 (and
/// `*xi` to infinity) when the gap closes.
///
/// # Safety
/// `xi` and `diverging` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mbqt_mps_correlation_length(
    mps: *const MbqtMps,
    xi: *mut f64,
    diverging: *mut i32,
) -> MbqtStatus {
    guard(|| {
        let m = non_null(mps, "mps")?;
        if xi.is_null() || diverging.is_null() {
            return Err(Fail::Null("xi/diverging"));
        }
        match m.inner.correlation_length()?.xi {
            CorrelationLength::Finite(x) => {
                *xi = x;
                *diverging = 0;
            }
            CorrelationLength::Diverging => {
                *xi = f64::INFINITY;
                *diverging = 1;
            }
        }
        Ok(())
    })
}

/// Site-tensor JSON of the state; free with `mbqt_string_free`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mbqt_mps_to_json(mps: *const MbqtMps, out: *mut *mut c_char) -> MbqtStatus {
    guard(|| {
        let m = non_null(mps, "mps")?;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let s = CString::new(m.inner.to_json()).map_err(|_| Fail::Arg("interior NUL".into()))?;
        *out = s.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn mbqt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Normalized entanglement spectrum for the cut after `cut` sites,
/// descending. Writes up to `cap` values and the total count to `*len`.
///
/// # Safety
/// `values` must have room for `cap` doubles; `len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mbqt_mps_spectrum(
    mps: *const MbqtMps,
    cut: usize,
    values: *mut f64,
    cap: usize,
    len: *mut usize,
) -> MbqtStatus {
    guard(|| {
        let m = non_null(mps, "mps")?;
        if len.is_null() || (cap > 0 && values.is_null()) {
            return Err(Fail::Null("values/len"));
        }
        let es = es_from_covariance(&covariance_matrices(&m.inner, cut)?)?;
        *len = es.normalized.len();
        for (k, v) in es.normalized.iter().take(cap).enumerate() {
            *values.add(k) = *v;
        }
        Ok(())
    })
}

/// Runs a teleportation protocol on a JSON family spec with seeded outcomes.
/// Writes the `k` outcomes and the 2x2 logical gate, row-major as
/// interleaved `(re, im)` (8 doubles).
///
/// # Safety
/// `angles` and `outcomes` must hold `k` entries, `gate` 8 doubles.
#[no_mangle]
pub unsafe extern "C" fn mbqt_teleport_run(
    family_json: *const c_char,
    angles: *const f64,
    k: usize,
    seed: u64,
    feedforward: i32,
    outcomes: *mut u8,
    gate: *mut f64,
) -> MbqtStatus {
    guard(|| {
        let spec: FamilySpec = serde_json::from_str(c_str(family_json, "family_json")?)
            .map_err(|e| Error::InvalidSpec(e.to_string()))?;
        let angles = slice(angles, k, "angles")?;
        if gate.is_null() || (k > 0 && outcomes.is_null()) {
            return Err(Fail::Null("outcomes/gate"));
        }
        let run = run_protocol(&spec, angles, &OutcomeSource::Seeded { seed }, feedforward != 0)?;
        for (i, m) in run.record.outcomes().into_iter().enumerate() {
            *outcomes.add(i) = m;
        }
        let g = run.record.logical_gate();
        for r in 0..2 {
            for c in 0..2 {
                *gate.add(4 * r + 2 * c) = g[(r, c)].re;
                *gate.add(4 * r + 2 * c + 1) = g[(r, c)].im;
            }
        }
        Ok(())
    })
}
