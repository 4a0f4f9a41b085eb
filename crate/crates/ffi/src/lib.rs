//! C ABI for the stoclot library.
//!
//! Conventions:
//! - Every fallible function returns a [`StoclotStatus`]. On failure a
//!   message is available from [`stoclot_last_error`] on the same thread.
//! - Instances are opaque handles created by [`stoclot_instance_from_json`]
//!   and released with [`stoclot_instance_free`].
//! - Structured results are returned as NUL-terminated JSON strings owned
//!   by the library; release them with [`stoclot_string_free`].
//! - Panics never cross the boundary; they are reported as
//!   `STOCLOT_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use stoclot::certify::{certify_partial_bound, certify_scc_bound, PartialParams};
use stoclot::cli::{parse_algo as parse_algo_name, prepare_sampler, Algo, SamplerOptions};
use stoclot::io::{parse_instance, DemandsJson, InstanceJson};
use stoclot::lottery::QDistribution;
use stoclot::verify::mc_verify;
use stoclot::{Error, Instance, RandomSource};

/// Result codes. Values 2 to 4 match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoclotStatus {
    Ok = 0,
    /// Solver failure or violated internal invariant.
    Internal = 1,
    /// The demand cannot be met; the message holds the certificate.
    Infeasible = 2,
    /// Malformed argument or input document.
    Input = 3,
    /// A resource limit was hit.
    Resource = 4,
    /// A required pointer argument was null.
    NullArgument = 5,
    /// A panic was caught at the boundary.
    Panic = 6,
}

/// Opaque instance handle.
pub struct StoclotInstance {
    inner: Instance,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(err: &Error) -> StoclotStatus {
    match err {
        Error::Infeasible(_) => StoclotStatus::Infeasible,
        Error::Input(_) | Error::Io(_) | Error::Json(_) => StoclotStatus::Input,
        Error::Resource(_) => StoclotStatus::Resource,
        Error::Solver(_) | Error::Invariant(_) => StoclotStatus::Internal,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (StoclotStatus, String)>) -> StoclotStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            StoclotStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside stoclot");
            StoclotStatus::Panic
        }
    }
}

fn lib(err: Error) -> (StoclotStatus, String) {
    let msg = match &err {
        Error::Infeasible(cert) => serde_json::to_string(cert).unwrap_or_else(|_| err.to_string()),
        _ => err.to_string(),
    };
    (status_of(&err), msg)
}

fn null(name: &str) -> (StoclotStatus, String) {
    (StoclotStatus::NullArgument, format!("{name} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, (StoclotStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (StoclotStatus::Input, format!("{name} is not valid UTF-8")))
}

unsafe fn write_string(out: *mut *mut c_char, text: String) -> Result<(), (StoclotStatus, String)> {
    let c = CString::new(text).map_err(|_| (StoclotStatus::Internal, "output contains NUL".to_string()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn instance_ref<'a>(p: *const StoclotInstance) -> Result<&'a Instance, (StoclotStatus, String)> {
    p.as_ref().map(|h| &h.inner).ok_or_else(|| null("instance"))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn stoclot_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn stoclot_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed before.
#[no_mangle]
pub unsafe extern "C" fn stoclot_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses an instance document and returns a new handle in `*out`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn stoclot_instance_from_json(
    json: *const c_char,
    validate_triangle: bool,
    out: *mut *mut StoclotInstance,
) -> StoclotStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = read_str(json, "json")?;
        let inner = parse_instance(text, validate_triangle).map_err(lib)?;
        *out = Box::into_raw(Box::new(StoclotInstance { inner }));
        Ok(())
    })
}

/// Serializes an instance back to JSON.
///
/// # Safety
/// `inst` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn stoclot_instance_to_json(
    inst: *const StoclotInstance,
    out: *mut *mut c_char,
) -> StoclotStatus {
    guard(|| {
        let inst = instance_ref(inst)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let text = serde_json::to_string(&InstanceJson::from_instance(inst)).map_err(|e| lib(e.into()))?;
        write_string(out, text)
    })
}

/// Releases an instance handle. Null is ignored.
///
/// # Safety
/// `inst` must come from [`stoclot_instance_from_json`] and not have been
/// freed before.
#[no_mangle]
pub unsafe extern "C" fn stoclot_instance_free(inst: *mut StoclotInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Number of clients, or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn stoclot_instance_n_clients(inst: *const StoclotInstance) -> usize {
    inst.as_ref().map_or(0, |h| h.inner.n_clients())
}

/// Number of facilities, or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn stoclot_instance_n_facilities(inst: *const StoclotInstance) -> usize {
    inst.as_ref().map_or(0, |h| h.inner.n_facilities())
}

/// Facility budget `k`, or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn stoclot_instance_k(inst: *const StoclotInstance) -> usize {
    inst.as_ref().map_or(0, |h| h.inner.k())
}

/// Dependent rounding of `y[0..n]`. Writes the selected indices to
/// `out_indices` (capacity `n`) and their count to `*out_len`.
///
/// # Safety
/// `y` must point to `n` doubles and `out_indices` to room for `n` indices.
#[no_mangle]
pub unsafe extern "C" fn stoclot_dep_round(
    y: *const f64,
    n: usize,
    seed: u64,
    out_indices: *mut usize,
    out_len: *mut usize,
) -> StoclotStatus {
    guard(|| {
        if n > 0 && (y.is_null() || out_indices.is_null()) {
            return Err(null("y or out_indices"));
        }
        if out_len.is_null() {
            return Err(null("out_len"));
        }
        let ys = if n == 0 { &[][..] } else { std::slice::from_raw_parts(y, n) };
        let picked = stoclot::dep_round(ys, &mut RandomSource::new(seed)).map_err(lib)?;
        for (slot, &i) in picked.iter().enumerate() {
            *out_indices.add(slot) = i;
        }
        *out_len = picked.len();
        Ok(())
    })
}

unsafe fn sampler_options(inst: &Instance, demand_json: *const c_char) -> Result<SamplerOptions, (StoclotStatus, String)> {
    let mut opts = SamplerOptions::default();
    if !demand_json.is_null() {
        let text = read_str(demand_json, "demand_json")?;
        let doc: DemandsJson =
            serde_json::from_str(text).map_err(|e| (StoclotStatus::Input, format!("demand json: {e}")))?;
        opts.demand = doc.chance_for(inst).map_err(lib)?;
    }
    Ok(opts)
}

unsafe fn parse_algo(algo: *const c_char) -> Result<Algo, (StoclotStatus, String)> {
    let name = read_str(algo, "algo")?;
    parse_algo_name(name).map_err(lib)
}

/// Draws one solution set with the named algorithm (`faithful`, `half-p`,
/// `half-r`, `iterative`, `general`, `scc` or `partial`). `demand_json`
/// holds a demand document with chance entries and may be null for
/// `partial`. The result is `{"set": [facility ids]}`.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn stoclot_sample(
    inst: *const StoclotInstance,
    algo: *const c_char,
    demand_json: *const c_char,
    seed: u64,
    out: *mut *mut c_char,
) -> StoclotStatus {
    guard(|| {
        let inst = instance_ref(inst)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let algo = parse_algo(algo)?;
        let prepared = prepare_sampler(algo, inst, &sampler_options(inst, demand_json)?).map_err(lib)?;
        let set = prepared.sampler.sample(&mut RandomSource::new(seed)).map_err(lib)?;
        let ids: Vec<_> = set.iter().map(|i| inst.facility_ids()[i].clone()).collect();
        write_string(out, serde_json::json!({ "set": ids }).to_string())
    })
}

/// Monte Carlo verification of an algorithm's guarantees over `samples`
/// draws; writes the report JSON to `*out`.
///
/// # Safety
/// As for [`stoclot_sample`].
#[no_mangle]
pub unsafe extern "C" fn stoclot_verify(
    inst: *const StoclotInstance,
    algo: *const c_char,
    demand_json: *const c_char,
    samples: usize,
    seed: u64,
    out: *mut *mut c_char,
) -> StoclotStatus {
    guard(|| {
        let inst = instance_ref(inst)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let algo = parse_algo(algo)?;
        let prepared = prepare_sampler(algo, inst, &sampler_options(inst, demand_json)?).map_err(lib)?;
        let rep = mc_verify(inst, prepared.sampler.as_ref(), &prepared.guarantees, samples, seed, 1).map_err(lib)?;
        write_string(out, serde_json::to_string(&rep).map_err(|e| lib(e.into()))?)
    })
}

/// Certified upper bound for the center-shift lottery with shift `q`,
/// from a grid of `cells` cells.
///
/// # Safety
/// `out_bound` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn stoclot_certify_scc(q: f64, cells: usize, out_bound: *mut f64) -> StoclotStatus {
    guard(|| {
        if out_bound.is_null() {
            return Err(null("out_bound"));
        }
        *out_bound = certify_scc_bound(q, cells).map_err(lib)?.bound;
        Ok(())
    })
}

/// Partial-cluster certification. `qdist_json` may be null for the tuned
/// distribution. The certificate JSON is written to `*out`.
///
/// # Safety
/// `qdist_json` must be null or NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn stoclot_certify_partial(
    levels: usize,
    m_max: usize,
    eps_log2: u32,
    qdist_json: *const c_char,
    sweep_p: bool,
    out: *mut *mut c_char,
) -> StoclotStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let qdist = if qdist_json.is_null() {
            QDistribution::tuned()
        } else {
            serde_json::from_str(read_str(qdist_json, "qdist_json")?)
                .map_err(|e| (StoclotStatus::Input, format!("qdist json: {e}")))?
        };
        let mut params = PartialParams::new(levels, m_max, eps_log2, qdist);
        params.sweep_p = sweep_p;
        let cert = certify_partial_bound(&params).map_err(lib)?;
        write_string(out, serde_json::to_string(&cert).map_err(|e| lib(e.into()))?)
    })
}
