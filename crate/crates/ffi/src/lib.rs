//! C ABI for per-frame feature extraction and trained-model prediction.
//!
//! Every function returns a [`VsStatus`]; on failure a message is kept per
//! thread and can be read with [`vs_last_error_message`]. Panics never
//! cross the boundary: they are caught and reported as `VS_ERR_INTERNAL`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::sync::OnceLock;

use vidsource::classifiers::TrainedModel;
use vidsource::distortion::DistortionConfig;
use vidsource::features::{extract_frame, feature_index, feature_names, FEATURE_COUNT};
use vidsource::imaging::Frame;
use vidsource::Error;

#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    InvalidParameter = 3,
    Format = 4,
    Io = 5,
    SchemaMismatch = 6,
    BufferTooSmall = 7,
    Internal = 8,
}

/// A loaded model. Create with [`vs_model_load`], release with
/// [`vs_model_free`].
pub struct VsModel {
    model: TrainedModel,
    /// Canonical position of each of the model's features.
    columns: Vec<usize>,
    class_names: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> VsStatus {
    match e.kind() {
        "invalid-input" | "selection-failure" => VsStatus::InvalidInput,
        "invalid-parameter" => VsStatus::InvalidParameter,
        "format" | "ingest" | "serialization" | "jpeg" => VsStatus::Format,
        "io" => VsStatus::Io,
        "schema-mismatch" => VsStatus::SchemaMismatch,
        _ => VsStatus::Internal,
    }
}

/// Runs `f`, turning errors and panics into a status plus a stored message.
fn guard(f: impl FnOnce() -> Result<(), (VsStatus, String)>) -> VsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            VsStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("internal error: {msg}"));
            VsStatus::Internal
        }
    }
}

fn lib_err(e: Error) -> (VsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (VsStatus, String) {
    (VsStatus::NullPointer, format!("{what} is null"))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn vs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Length of the full feature vector (88).
#[no_mangle]
pub extern "C" fn vs_feature_count() -> usize {
    FEATURE_COUNT
}

/// Canonical name of feature `i`, or null when out of range. The string is
/// static.
#[no_mangle]
pub extern "C" fn vs_feature_name(i: usize) -> *const c_char {
    static NAMES: OnceLock<Vec<CString>> = OnceLock::new();
    let names = NAMES.get_or_init(|| feature_names().iter().map(|n| CString::new(n.as_str()).expect("ascii name")).collect());
    names.get(i).map_or(ptr::null(), |n| n.as_ptr())
}

/// Extracts the feature vector of an interleaved 8-bit RGB frame using the
/// default distortion parameters. `out` must hold `vs_feature_count()`
/// doubles.
///
/// # Safety
/// `rgb` must point to `width * height * 3` readable bytes and `out` to
/// `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn vs_extract_features(
    rgb: *const u8,
    width: usize,
    height: usize,
    seed: u64,
    out: *mut f64,
    out_len: usize,
) -> VsStatus {
    guard(|| {
        if rgb.is_null() {
            return Err(null("rgb"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        if out_len < FEATURE_COUNT {
            return Err((VsStatus::BufferTooSmall, format!("out holds {out_len} values, {FEATURE_COUNT} needed")));
        }
        let len = width
            .checked_mul(height)
            .and_then(|n| n.checked_mul(3))
            .ok_or_else(|| (VsStatus::InvalidInput, format!("frame size {width}x{height} overflows")))?;
        let samples = std::slice::from_raw_parts(rgb, len).to_vec();
        let frame = Frame::new(width, height, samples).map_err(lib_err)?;
        let v = extract_frame(&frame, &DistortionConfig::default(), seed).map_err(lib_err)?;
        std::slice::from_raw_parts_mut(out, FEATURE_COUNT).copy_from_slice(&v.values);
        Ok(())
    })
}

fn wrap_model(model: TrainedModel) -> Result<VsModel, (VsStatus, String)> {
    let columns = model
        .feature_subset
        .iter()
        .map(|n| feature_index(n).ok_or_else(|| (VsStatus::Format, format!("model uses unknown feature {n}"))))
        .collect::<Result<_, _>>()?;
    let class_names = model
        .class_set
        .iter()
        .map(|c| CString::new(c.as_str()).map_err(|_| (VsStatus::Format, "class name contains NUL".to_string())))
        .collect::<Result<_, _>>()?;
    Ok(VsModel { model, columns, class_names })
}

/// Loads a model file written by the `train` command.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn vs_model_load(path: *const c_char, out: *mut *mut VsModel) -> VsStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let path = CStr::from_ptr(path).to_str().map_err(|_| (VsStatus::InvalidInput, "path is not UTF-8".to_string()))?;
        let model = TrainedModel::load(Path::new(path)).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(wrap_model(model)?));
        Ok(())
    })
}

/// Parses a model from its JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn vs_model_from_json(json: *const c_char, out: *mut *mut VsModel) -> VsStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let text = CStr::from_ptr(json).to_str().map_err(|_| (VsStatus::InvalidInput, "json is not UTF-8".to_string()))?;
        let model = TrainedModel::from_json(text).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(wrap_model(model)?));
        Ok(())
    })
}

/// Releases a model; null is ignored.
///
/// # Safety
/// `model` must come from a load function and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn vs_model_free(model: *mut VsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of classes the model distinguishes, 0 for null.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vs_model_class_count(model: *const VsModel) -> usize {
    model.as_ref().map_or(0, |m| m.class_names.len())
}

/// Name of class `i`, or null when out of range. Valid while the model is.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vs_model_class_name(model: *const VsModel, i: usize) -> *const c_char {
    model.as_ref().and_then(|m| m.class_names.get(i)).map_or(ptr::null(), |c| c.as_ptr())
}

/// Predicts the class index of one frame from its full feature vector in
/// canonical order; the model picks out its own subset by name.
///
/// # Safety
/// `model` must be a live handle, `features` must point to `len` doubles
/// and `class_index` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vs_model_predict(
    model: *const VsModel,
    features: *const f64,
    len: usize,
    class_index: *mut usize,
) -> VsStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if features.is_null() {
            return Err(null("features"));
        }
        if class_index.is_null() {
            return Err(null("class_index"));
        }
        if len != FEATURE_COUNT {
            return Err((VsStatus::InvalidInput, format!("expected {FEATURE_COUNT} features, got {len}")));
        }
        let full = std::slice::from_raw_parts(features, len);
        let row: Vec<f64> = m.columns.iter().map(|&j| full[j]).collect();
        *class_index = m.model.predict_index(&row).map_err(lib_err)?;
        Ok(())
    })
}
