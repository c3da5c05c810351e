//! C ABI for the beamprune decoding library.
//!
//! Handles are opaque and owned by the caller: everything returned through a
//! `bp_*_new`-style out-parameter must be released with the matching
//! `bp_*_free`. Functions report a `BpStatus`; on any non-`Ok` status,
//! `bp_last_error_message` returns a thread-local description valid until
//! the next failing call on the same thread.
//!
//! The generated header lands in `include/beamprune.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use beamprune::config::DecodeConfig;
use beamprune::decoder::{decode, DecodeResult};
use beamprune::model_spec::ModelSpec;
use beamprune::scoring::ScoringModel;

/// Result code for every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    RuntimeError = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(status: BpStatus, message: &str) -> BpStatus {
    set_error(message);
    status
}

/// Opaque scoring model handle.
pub struct BpModel {
    inner: Box<dyn ScoringModel>,
}

/// Opaque decode configuration handle.
pub struct BpConfig {
    inner: DecodeConfig,
}

/// Opaque decode result handle.
pub struct BpResult {
    inner: DecodeResult,
    best_text: CString,
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, BpStatus> {
    if ptr.is_null() {
        return Err(BpStatus::NullPointer);
    }
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| BpStatus::InvalidUtf8)
}

fn guard<T>(body: impl FnOnce() -> Result<T, BpStatus>, out: *mut *mut T) -> BpStatus {
    if out.is_null() {
        return fail(BpStatus::NullPointer, "null out-parameter");
    }
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(value)) => {
            unsafe { *out = Box::into_raw(Box::new(value)) };
            BpStatus::Ok
        }
        Ok(Err(status)) => {
            unsafe { *out = ptr::null_mut() };
            status
        }
        Err(_) => {
            unsafe { *out = ptr::null_mut() };
            fail(BpStatus::RuntimeError, "internal panic")
        }
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bp_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Message for the most recent failure on this thread. Never null; empty
/// before the first failure. Valid until the next failing call here.
#[no_mangle]
pub extern "C" fn bp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Build a scoring model from a spec string
/// (`uniform[:v=N]`, `ngram:train=F,...`, `planted:...`, `table:file=F,vocab=F`).
///
/// # Safety
/// `spec` must point to a NUL-terminated string; `out_model` must be a valid
/// destination pointer.
#[no_mangle]
pub unsafe extern "C" fn bp_model_new(
    spec: *const c_char,
    out_model: *mut *mut BpModel,
) -> BpStatus {
    guard(
        || {
            let spec = unsafe { read_str(spec) }.map_err(|s| fail(s, "bad spec string"))?;
            let model = ModelSpec::parse(spec)
                .and_then(|s| s.build())
                .map_err(|e| fail(BpStatus::InvalidArgument, &e.to_string()))?;
            Ok(BpModel { inner: model })
        },
        out_model,
    )
}

/// # Safety
/// `model` must come from `bp_model_new` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bp_model_free(model: *mut BpModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Vocabulary size of the model, or 0 for a null handle.
///
/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bp_model_vocab_size(model: *const BpModel) -> usize {
    match unsafe { model.as_ref() } {
        Some(m) => m.inner.vocab().size(),
        None => 0,
    }
}

/// Neutral-pruning configuration with the given beam size (`>= 1`).
///
/// # Safety
/// `out_config` must be a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn bp_config_new(
    beam_size: usize,
    out_config: *mut *mut BpConfig,
) -> BpStatus {
    guard(
        || {
            let cfg = DecodeConfig::with_beam(beamprune::config::BeamSize::Bounded(beam_size));
            cfg.validate()
                .map_err(|e| fail(BpStatus::InvalidArgument, &e.to_string()))?;
            Ok(BpConfig { inner: cfg })
        },
        out_config,
    )
}

/// Parse a configuration from its JSON document form (fields `rp`, `ap`,
/// `rpl`, `mc`, `beam_size`, `max_len_factor`, `max_len_offset`,
/// `normalize_by_length`, `unbounded_cap`; `"inf"`, `"unlimited"` and
/// `"unbounded"` encode the unbounded sentinels).
///
/// # Safety
/// `json` must point to a NUL-terminated string; `out_config` must be a
/// valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn bp_config_from_json(
    json: *const c_char,
    out_config: *mut *mut BpConfig,
) -> BpStatus {
    guard(
        || {
            let json = unsafe { read_str(json) }.map_err(|s| fail(s, "bad json string"))?;
            let cfg = DecodeConfig::from_json_str(json)
                .map_err(|e| fail(BpStatus::InvalidArgument, &e.to_string()))?;
            Ok(BpConfig { inner: cfg })
        },
        out_config,
    )
}

/// # Safety
/// `config` must come from a `bp_config_*` constructor and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bp_config_free(config: *mut BpConfig) {
    if !config.is_null() {
        drop(unsafe { Box::from_raw(config) });
    }
}

/// Decode one source sentence (whitespace-separated tokens; may be empty)
/// and return a result handle.
///
/// # Safety
/// `model` and `config` must be live handles; `source` must point to a
/// NUL-terminated string; `out_result` must be a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn bp_decode(
    model: *const BpModel,
    source: *const c_char,
    config: *const BpConfig,
    out_result: *mut *mut BpResult,
) -> BpStatus {
    guard(
        || {
            let model = unsafe { model.as_ref() }
                .ok_or_else(|| fail(BpStatus::NullPointer, "null model"))?;
            let config = unsafe { config.as_ref() }
                .ok_or_else(|| fail(BpStatus::NullPointer, "null config"))?;
            let text = unsafe { read_str(source) }.map_err(|s| fail(s, "bad source string"))?;
            let vocab = model.inner.vocab();
            let tokens = vocab
                .parse_line(text, 0)
                .map_err(|e| fail(BpStatus::InvalidArgument, &e.to_string()))?;
            let result = decode(&tokens, model.inner.as_ref(), &config.inner)
                .map_err(|e| fail(BpStatus::RuntimeError, &e.to_string()))?;
            let best_text =
                CString::new(vocab.format_tokens(&result.best.tokens)).unwrap_or_default();
            Ok(BpResult {
                inner: result,
                best_text,
            })
        },
        out_result,
    )
}

/// # Safety
/// `result` must come from `bp_decode` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bp_result_free(result: *mut BpResult) {
    if !result.is_null() {
        drop(unsafe { Box::from_raw(result) });
    }
}

/// Best decoded sequence as a space-joined token string. Owned by the
/// result handle; valid until `bp_result_free`.
///
/// # Safety
/// `result` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bp_result_best_tokens(result: *const BpResult) -> *const c_char {
    match unsafe { result.as_ref() } {
        Some(r) => r.best_text.as_ptr(),
        None => ptr::null(),
    }
}

/// # Safety
/// `result` must be a live handle or null (returns NaN for null).
#[no_mangle]
pub unsafe extern "C" fn bp_result_total_score(result: *const BpResult) -> f64 {
    match unsafe { result.as_ref() } {
        Some(r) => r.inner.best.total_score,
        None => f64::NAN,
    }
}

/// # Safety
/// `result` must be a live handle or null (returns NaN for null).
#[no_mangle]
pub unsafe extern "C" fn bp_result_normalized_score(result: *const BpResult) -> f64 {
    match unsafe { result.as_ref() } {
        Some(r) => r.inner.best.normalized_score,
        None => f64::NAN,
    }
}

/// Number of decode steps executed.
///
/// # Safety
/// `result` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bp_result_steps(result: *const BpResult) -> usize {
    match unsafe { result.as_ref() } {
        Some(r) => r.inner.steps,
        None => 0,
    }
}

/// Number of completed hypotheses in the final candidate list.
///
/// # Safety
/// `result` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bp_result_num_finals(result: *const BpResult) -> usize {
    match unsafe { result.as_ref() } {
        Some(r) => r.inner.finals.len(),
        None => 0,
    }
}

/// Total fan-out (candidates expanded) across all steps.
///
/// # Safety
/// `result` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bp_result_tot_fan_out(result: *const BpResult) -> u64 {
    match unsafe { result.as_ref() } {
        Some(r) => r.inner.trace.tot_fan_out(),
        None => 0,
    }
}

/// Mean fan-out per step.
///
/// # Safety
/// `result` must be a live handle or null (returns NaN for null).
#[no_mangle]
pub unsafe extern "C" fn bp_result_avg_fan_out(result: *const BpResult) -> f64 {
    match unsafe { result.as_ref() } {
        Some(r) => r.inner.trace.avg_fan_out(),
        None => f64::NAN,
    }
}
