//! C ABI for the exact computer-algebra library.
//!
//! Conventions:
//! - Automorphisms travel as opaque handles ([`NcsysAut`]); everything else
//!   crosses the boundary as JSON in the library's wire formats.
//! - Every function returns an [`NcsysStatus`]; outputs are written through
//!   out-pointers only on `Ok`. The exceptions are `VerifyFailed` and
//!   `Inconclusive`, which still write the report/outcome document.
//! - Returned strings are NUL-terminated, owned by the caller, and must be
//!   released with [`ncsys_string_free`]; handles with [`ncsys_aut_free`].
//! - A thread-local message with the detail of the last error is available
//!   via [`ncsys_last_error`].
//! - Panics never unwind across the boundary; they surface as
//!   `NcsysStatus::Panic`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ncsys::autgroup::{exp_derivation, Automorphism};
use ncsys::error::Error;
use ncsys::ncs::verify::{run_suite_on, Suite, SuiteGrid};
use ncsys::ncs::{separate, SeparateBudget, SeparateOutcome};
use ncsys::nsym::solve_pi;
use ncsys::wire;

/// Result of every FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NcsysStatus {
    Ok = 0,
    NullArgument = 1,
    Utf8 = 2,
    Schema = 3,
    Precondition = 4,
    VerifyFailed = 5,
    Inconclusive = 6,
    Panic = 7,
}

/// Opaque automorphism handle.
pub struct NcsysAut {
    inner: Automorphism,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let cstring = CString::new(msg.replace('\0', " "))
        .unwrap_or_else(|_| CString::new("error message unavailable").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(cstring));
}

fn status_of(err: &Error) -> NcsysStatus {
    match err {
        Error::Schema(_) => NcsysStatus::Schema,
        _ => NcsysStatus::Precondition,
    }
}

fn guarded(body: impl FnOnce() -> NcsysStatus) -> NcsysStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(msg);
            NcsysStatus::Panic
        }
    }
}

/// # Safety
/// `ptr` must be null or a valid NUL-terminated string.
unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, NcsysStatus> {
    if ptr.is_null() {
        set_error("null string argument".into());
        return Err(NcsysStatus::NullArgument);
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8".into());
        NcsysStatus::Utf8
    })
}

fn write_string(out: *mut *mut c_char, s: String) -> NcsysStatus {
    if out.is_null() {
        set_error("null output pointer".into());
        return NcsysStatus::NullArgument;
    }
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            NcsysStatus::Ok
        }
        Err(_) => {
            set_error("output contained an interior NUL byte".into());
            NcsysStatus::Schema
        }
    }
}

fn write_aut(out: *mut *mut NcsysAut, aut: Automorphism) -> NcsysStatus {
    if out.is_null() {
        set_error("null output pointer".into());
        return NcsysStatus::NullArgument;
    }
    unsafe { *out = Box::into_raw(Box::new(NcsysAut { inner: aut })) };
    NcsysStatus::Ok
}

/// # Safety
/// `handle` must be null or a pointer previously returned by this library.
unsafe fn read_aut<'a>(handle: *const NcsysAut) -> Result<&'a Automorphism, NcsysStatus> {
    if handle.is_null() {
        set_error("null automorphism handle".into());
        return Err(NcsysStatus::NullArgument);
    }
    Ok(unsafe { &(*handle).inner })
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn ncsys_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Detail message of the last error on this thread, or null. Free with
/// [`ncsys_string_free`].
#[no_mangle]
pub extern "C" fn ncsys_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        Some(msg) => msg.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a string pointer previously returned by this library,
/// not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ncsys_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Releases an automorphism handle.
///
/// # Safety
/// `handle` must be null or a handle previously returned by this library,
/// not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ncsys_aut_free(handle: *mut NcsysAut) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

/// Parses an automorphism document.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` a valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn ncsys_aut_from_json(
    json: *const c_char,
    out: *mut *mut NcsysAut,
) -> NcsysStatus {
    guarded(|| {
        let json = match unsafe { read_str(json) } {
            Ok(s) => s,
            Err(status) => return status,
        };
        let doc: wire::AutomorphismDoc = match serde_json::from_str(json) {
            Ok(d) => d,
            Err(e) => {
                set_error(e.to_string());
                return NcsysStatus::Schema;
            }
        };
        match wire::doc_to_automorphism(&doc) {
            Ok(aut) => write_aut(out, aut),
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Serializes an automorphism to its JSON document.
///
/// # Safety
/// `handle` must be a valid handle; `out_json` a valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn ncsys_aut_to_json(
    handle: *const NcsysAut,
    out_json: *mut *mut c_char,
) -> NcsysStatus {
    guarded(|| {
        let aut = match unsafe { read_aut(handle) } {
            Ok(a) => a,
            Err(status) => return status,
        };
        let json =
            serde_json::to_string(&wire::automorphism_to_doc(aut)).expect("documents serialize");
        write_string(out_json, json)
    })
}

/// Inverse automorphism.
///
/// # Safety
/// `handle` must be a valid handle; `out` a valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn ncsys_aut_invert(
    handle: *const NcsysAut,
    out: *mut *mut NcsysAut,
) -> NcsysStatus {
    guarded(|| {
        let aut = match unsafe { read_aut(handle) } {
            Ok(a) => a,
            Err(status) => return status,
        };
        write_aut(out, aut.invert())
    })
}

/// Composition `first(second(z))`.
///
/// # Safety
/// Both handles must be valid; `out` a valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn ncsys_aut_compose(
    first: *const NcsysAut,
    second: *const NcsysAut,
    out: *mut *mut NcsysAut,
) -> NcsysStatus {
    guarded(|| {
        let a = match unsafe { read_aut(first) } {
            Ok(a) => a,
            Err(status) => return status,
        };
        let b = match unsafe { read_aut(second) } {
            Ok(b) => b,
            Err(status) => return status,
        };
        match a.compose(b) {
            Ok(c) => write_aut(out, c),
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Derivation logarithm of an automorphism, as a D-Log JSON document.
///
/// # Safety
/// `handle` must be a valid handle; `out_json` a valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn ncsys_aut_dlog(
    handle: *const NcsysAut,
    out_json: *mut *mut c_char,
) -> NcsysStatus {
    guarded(|| {
        let aut = match unsafe { read_aut(handle) } {
            Ok(a) => a,
            Err(status) => return status,
        };
        let json =
            serde_json::to_string(&wire::dlog_to_doc(&aut.dlog())).expect("documents serialize");
        write_string(out_json, json)
    })
}

/// Exponentiates a D-Log JSON document back to an automorphism handle.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` a valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn ncsys_exp_from_json(
    json: *const c_char,
    out: *mut *mut NcsysAut,
) -> NcsysStatus {
    guarded(|| {
        let json = match unsafe { read_str(json) } {
            Ok(s) => s,
            Err(status) => return status,
        };
        let doc: wire::DLogDoc = match serde_json::from_str(json) {
            Ok(d) => d,
            Err(e) => {
                set_error(e.to_string());
                return NcsysStatus::Schema;
            }
        };
        match wire::doc_to_dlog(&doc) {
            Ok(dlog) => write_aut(out, exp_derivation(&dlog)),
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Solved family tables to the given weight bound, as a JSON array of
/// `{family, m, element}` rows. The weight bound is capped at 12.
///
/// # Safety
/// `out_json` must be a valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn ncsys_nsym_table(
    max_weight: u32,
    out_json: *mut *mut c_char,
) -> NcsysStatus {
    guarded(|| {
        if max_weight > 12 {
            set_error(format!("weight bound {max_weight} > 12 makes the tables large"));
            return NcsysStatus::Precondition;
        }
        let pi = solve_pi(max_weight);
        let families: [(&str, fn(&ncsys::nsym::PiSystem, u32) -> ncsys::nsym::NSymElem); 4] = [
            ("S", |pi, m| pi.s_m(m)),
            ("Phi", |pi, m| pi.phi_m(m)),
            ("Psi", |pi, m| pi.psi_m(m)),
            ("Xi", |pi, m| pi.xi_m(m)),
        ];
        let mut rows = Vec::new();
        for (label, pick) in families {
            for m in 1..=max_weight {
                rows.push(serde_json::json!({
                    "family": label,
                    "m": m,
                    "element": wire::nsym_to_doc(&pick(&pi, m)),
                }));
            }
        }
        write_string(out_json, serde_json::to_string(&rows).expect("documents serialize"))
    })
}

/// Runs a verification suite (`"ncs"`, `"correspondence"`, `"group"`,
/// `"graded"`, `"hopf-action"` or `"all"`) on the published grid. Writes the
/// report document even when checks fail; failing checks yield
/// `NcsysStatus::VerifyFailed`.
///
/// # Safety
/// `suite` must be a valid NUL-terminated string; `out_json` a valid
/// out-pointer.
#[no_mangle]
pub unsafe extern "C" fn ncsys_verify(
    suite: *const c_char,
    seed: u64,
    trials: u32,
    out_json: *mut *mut c_char,
) -> NcsysStatus {
    guarded(|| {
        let suite_str = match unsafe { read_str(suite) } {
            Ok(s) => s,
            Err(status) => return status,
        };
        let suite: Suite = match suite_str.parse() {
            Ok(s) => s,
            Err(e) => {
                set_error(Error::to_string(&e));
                return NcsysStatus::Schema;
            }
        };
        let report = run_suite_on(suite, seed, trials, &SuiteGrid::default());
        let doc = wire::report_to_doc(&report);
        let status =
            write_string(out_json, serde_json::to_string(&doc).expect("documents serialize"));
        if status != NcsysStatus::Ok {
            return status;
        }
        if report.pass() {
            NcsysStatus::Ok
        } else {
            set_error("one or more checks failed; see the report".into());
            NcsysStatus::VerifyFailed
        }
    })
}

/// Separation search for a nonzero element document. Writes the outcome
/// document; an exhausted budget yields `NcsysStatus::Inconclusive`.
/// `commutative` is 0 for free variables, nonzero for commutative ones.
///
/// # Safety
/// `element_json` must be a valid NUL-terminated string; `out_json` a valid
/// out-pointer.
#[no_mangle]
pub unsafe extern "C" fn ncsys_separate(
    element_json: *const c_char,
    max_n: u32,
    attempts: u32,
    seed: u64,
    commutative: i32,
    out_json: *mut *mut c_char,
) -> NcsysStatus {
    guarded(|| {
        let json = match unsafe { read_str(element_json) } {
            Ok(s) => s,
            Err(status) => return status,
        };
        let doc: wire::NSymDoc = match serde_json::from_str(json) {
            Ok(d) => d,
            Err(e) => {
                set_error(e.to_string());
                return NcsysStatus::Schema;
            }
        };
        let elem = match wire::doc_to_nsym(&doc) {
            Ok(p) => p,
            Err(e) => {
                set_error(e.to_string());
                return status_of(&e);
            }
        };
        let budget = SeparateBudget { max_n: max_n as usize, attempts, seed };
        let outcome = match separate(&elem, &budget, commutative != 0) {
            Ok(o) => o,
            Err(e) => {
                set_error(e.to_string());
                return status_of(&e);
            }
        };
        let status = write_string(
            out_json,
            serde_json::to_string(&wire::separate_outcome_to_doc(&outcome))
                .expect("documents serialize"),
        );
        if status != NcsysStatus::Ok {
            return status;
        }
        match outcome {
            SeparateOutcome::Witness(_) => NcsysStatus::Ok,
            SeparateOutcome::Exhausted { .. } => {
                set_error("budget exhausted without a witness (not a disproof)".into());
                NcsysStatus::Inconclusive
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    fn cstr(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    unsafe fn take_string(ptr: *mut c_char) -> String {
        assert!(!ptr.is_null());
        let s = CStr::from_ptr(ptr).to_str().unwrap().to_string();
        ncsys_string_free(ptr);
        s
    }

    const CATALAN: &str = r#"{"n":1,"commutative":true,"alpha":2,"N_z":9,"N_t":8,
        "H":[[{"t":1,"exps":[2],"coeff":"1/1"}]]}"#;

    #[test]
    fn invert_round_trip_through_the_boundary() {
        unsafe {
            let mut aut: *mut NcsysAut = ptr::null_mut();
            assert_eq!(ncsys_aut_from_json(cstr(CATALAN).as_ptr(), &mut aut), NcsysStatus::Ok);
            let mut inv: *mut NcsysAut = ptr::null_mut();
            assert_eq!(ncsys_aut_invert(aut, &mut inv), NcsysStatus::Ok);
            let mut json: *mut c_char = ptr::null_mut();
            assert_eq!(ncsys_aut_to_json(inv, &mut json), NcsysStatus::Ok);
            let text = take_string(json);
            assert!(text.contains("-429/1"), "got: {text}");
            // compose F with its inverse: identity (empty H components)
            let mut id: *mut NcsysAut = ptr::null_mut();
            assert_eq!(ncsys_aut_compose(aut, inv, &mut id), NcsysStatus::Ok);
            let mut json: *mut c_char = ptr::null_mut();
            assert_eq!(ncsys_aut_to_json(id, &mut json), NcsysStatus::Ok);
            assert!(take_string(json).contains("\"H\":[[]]"));
            ncsys_aut_free(aut);
            ncsys_aut_free(inv);
            ncsys_aut_free(id);
        }
    }

    #[test]
    fn dlog_exp_round_trip() {
        unsafe {
            let mut aut: *mut NcsysAut = ptr::null_mut();
            assert_eq!(ncsys_aut_from_json(cstr(CATALAN).as_ptr(), &mut aut), NcsysStatus::Ok);
            let mut dlog_json: *mut c_char = ptr::null_mut();
            assert_eq!(ncsys_aut_dlog(aut, &mut dlog_json), NcsysStatus::Ok);
            let dlog = take_string(dlog_json);
            let mut back: *mut NcsysAut = ptr::null_mut();
            assert_eq!(ncsys_exp_from_json(cstr(&dlog).as_ptr(), &mut back), NcsysStatus::Ok);
            let mut a: *mut c_char = ptr::null_mut();
            let mut b: *mut c_char = ptr::null_mut();
            assert_eq!(ncsys_aut_to_json(aut, &mut a), NcsysStatus::Ok);
            assert_eq!(ncsys_aut_to_json(back, &mut b), NcsysStatus::Ok);
            assert_eq!(take_string(a), take_string(b));
            ncsys_aut_free(aut);
            ncsys_aut_free(back);
        }
    }

    #[test]
    fn error_paths_set_messages() {
        unsafe {
            let mut aut: *mut NcsysAut = ptr::null_mut();
            assert_eq!(ncsys_aut_from_json(ptr::null(), &mut aut), NcsysStatus::NullArgument);
            assert_eq!(
                ncsys_aut_from_json(cstr("{not json").as_ptr(), &mut aut),
                NcsysStatus::Schema
            );
            let msg = take_string(ncsys_last_error());
            assert!(!msg.is_empty());
            // invariant violation: nonzero displacement at t = 0
            let bad = r#"{"n":1,"commutative":true,"alpha":2,"N_z":4,"N_t":2,
                "H":[[{"t":0,"exps":[2],"coeff":"1/1"}]]}"#;
            assert_eq!(
                ncsys_aut_from_json(cstr(bad).as_ptr(), &mut aut),
                NcsysStatus::Precondition
            );
        }
    }

    #[test]
    fn verify_and_separate_statuses() {
        unsafe {
            let mut json: *mut c_char = ptr::null_mut();
            assert_eq!(ncsys_verify(cstr("graded").as_ptr(), 5, 1, &mut json), NcsysStatus::Ok);
            let report = take_string(json);
            assert!(report.contains("\"status\":\"pass\"") && !report.contains("\"status\":\"fail\""));
            assert_eq!(
                ncsys_verify(cstr("bogus").as_ptr(), 5, 1, &mut json),
                NcsysStatus::Schema
            );

            let elem = r#"{"max_weight":1,"terms":[{"word":[1],"coeff":"1/1"}]}"#;
            let mut out: *mut c_char = ptr::null_mut();
            assert_eq!(
                ncsys_separate(cstr(elem).as_ptr(), 3, 200, 7, 1, &mut out),
                NcsysStatus::Ok
            );
            assert!(take_string(out).contains("\"status\":\"witness\""));
            // zero element: precondition, no document
            let zero = r#"{"max_weight":1,"terms":[]}"#;
            assert_eq!(
                ncsys_separate(cstr(zero).as_ptr(), 3, 200, 7, 1, &mut out),
                NcsysStatus::Precondition
            );
            // exhausted budget: inconclusive with a document
            assert_eq!(
                ncsys_separate(cstr(elem).as_ptr(), 3, 0, 7, 1, &mut out),
                NcsysStatus::Inconclusive
            );
            assert!(take_string(out).contains("\"status\":\"inconclusive\""));
        }
    }

    #[test]
    fn nsym_table_guard() {
        unsafe {
            let mut json: *mut c_char = ptr::null_mut();
            assert_eq!(ncsys_nsym_table(2, &mut json), NcsysStatus::Ok);
            assert!(take_string(json).contains("\"family\":\"S\""));
            assert_eq!(ncsys_nsym_table(13, &mut json), NcsysStatus::Precondition);
        }
    }

    #[test]
    fn version_is_a_static_string() {
        unsafe {
            let v = CStr::from_ptr(ncsys_version()).to_str().unwrap();
            assert_eq!(v, env!("CARGO_PKG_VERSION"));
        }
    }
}
