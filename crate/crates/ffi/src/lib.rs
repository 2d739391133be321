//! C ABI over the fuzzseg engine: opaque handles, status codes and
//! UTF-8 JSON strings.
//!
//! Every returned string is NUL-terminated UTF-8. Strings handed out
//! through out-parameters are owned by the caller and must be released
//! with [`fzs_string_free`]; [`fzs_version`] and [`fzs_last_error`]
//! return borrowed pointers that must not be freed. Engines are not
//! internally synchronized, so share one engine across threads only
//! behind an external lock.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use fuzzseg_core::config::ConfigError;
use fuzzseg_core::descriptors::SceneReadError;
use fuzzseg_core::inference::InferenceError;
use fuzzseg_core::pipeline::PipelineError;
use fuzzseg_core::preprocess::PreprocessError;
use fuzzseg_core::rulebase::RuleBaseParseError;
use fuzzseg_core::{
    classify_scene, extract_segments, induct, project_model, read_scene, write_scene, CameraPose,
    Config, FrameOrientation, LabelMask, RuleBase, VehicleModel3D,
};

/// Result code of a call. Anything but `FZS_STATUS_OK` leaves a
/// description in [`fzs_last_error`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FzsStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// An input string was not valid UTF-8.
    InvalidUtf8 = 2,
    /// An input document failed to parse.
    ParseError = 3,
    /// The configuration was rejected.
    InvalidConfig = 4,
    /// The model or camera was rejected.
    InvalidModel = 5,
    /// The rulebase was rejected or conflicts with one already loaded.
    InvalidRule = 6,
    /// A scene descriptor was rejected.
    InvalidScene = 7,
    /// The input held nothing to work on (empty scene or mask, or an
    /// engine with no rulebases).
    EmptyInput = 8,
    /// The engine panicked or could not encode its result.
    Internal = 9,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("NUL bytes replaced above");
    });
}

fn clear_error() {
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::default();
    });
}

fn fail(status: FzsStatus, message: &str) -> FzsStatus {
    set_error(message);
    status
}

/// Runs a closure, translating panics into `Internal`.
fn guarded(body: impl FnOnce() -> FzsStatus) -> FzsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(FzsStatus::Internal, "internal panic"),
    }
}

/// # Safety
/// `ptr` must be null or point to a NUL-terminated string.
unsafe fn required_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, FzsStatus> {
    if ptr.is_null() {
        return Err(fail(
            FzsStatus::NullArgument,
            &format!("{what} must not be null"),
        ));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        fail(
            FzsStatus::InvalidUtf8,
            &format!("{what} is not valid UTF-8"),
        )
    })
}

fn emit_string(out: *mut *mut c_char, value: String) -> FzsStatus {
    match CString::new(value) {
        Ok(s) => {
            // out was null-checked by the caller
            unsafe { *out = s.into_raw() };
            clear_error();
            FzsStatus::Ok
        }
        Err(_) => fail(FzsStatus::Internal, "result contained a NUL byte"),
    }
}

fn config_status(e: &ConfigError) -> FzsStatus {
    match e {
        ConfigError::Parse(_) => FzsStatus::ParseError,
        _ => FzsStatus::InvalidConfig,
    }
}

fn scene_status(e: &SceneReadError) -> FzsStatus {
    match e {
        SceneReadError::Io(_) => FzsStatus::Internal,
        _ => FzsStatus::InvalidScene,
    }
}

fn pipeline_status(e: &PipelineError) -> FzsStatus {
    match e {
        PipelineError::Inference(InferenceError::EmptyScene)
        | PipelineError::Inference(InferenceError::NoRulebases)
        | PipelineError::Preprocess(PreprocessError::EmptyMask) => FzsStatus::EmptyInput,
        PipelineError::Inference(_) => FzsStatus::InvalidRule,
        PipelineError::Preprocess(_) => FzsStatus::InvalidScene,
    }
}

fn preprocess_status(e: &PreprocessError) -> FzsStatus {
    match e {
        PreprocessError::EmptyMask => FzsStatus::EmptyInput,
        _ => FzsStatus::ParseError,
    }
}

/// Recognition engine: a tunable configuration plus the loaded
/// per-class rulebases.
pub struct FzsEngine {
    config: Config,
    rulebases: Vec<RuleBase>,
}

/// Library version as a borrowed static string.
#[no_mangle]
pub extern "C" fn fzs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Description of the most recent failure on the calling thread, or an
/// empty string when the last call succeeded. Borrowed; valid until the
/// next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn fzs_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Releases a string returned through an out-parameter. Null is a no-op.
///
/// # Safety
/// `s` must have come from this library and not have been freed before.
#[no_mangle]
pub unsafe extern "C" fn fzs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Creates an engine with default configuration and no rulebases.
#[no_mangle]
pub extern "C" fn fzs_engine_new() -> *mut FzsEngine {
    clear_error();
    Box::into_raw(Box::new(FzsEngine {
        config: Config::default(),
        rulebases: Vec::new(),
    }))
}

/// Destroys an engine. Null is a no-op.
///
/// # Safety
/// `engine` must have come from [`fzs_engine_new`] and not have been
/// freed before.
#[no_mangle]
pub unsafe extern "C" fn fzs_engine_free(engine: *mut FzsEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Replaces the engine configuration from a JSON document; omitted
/// fields keep their defaults.
///
/// # Safety
/// `engine` must be a live engine; `config_json` must be null or point
/// to a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn fzs_engine_set_config_json(
    engine: *mut FzsEngine,
    config_json: *const c_char,
) -> FzsStatus {
    guarded(|| {
        let Some(engine) = engine.as_mut() else {
            return fail(FzsStatus::NullArgument, "engine must not be null");
        };
        let json = match required_str(config_json, "config_json") {
            Ok(s) => s,
            Err(status) => return status,
        };
        match Config::from_json(json) {
            Ok(config) => {
                engine.config = config;
                clear_error();
                FzsStatus::Ok
            }
            Err(e) => fail(config_status(&e), &e.to_string()),
        }
    })
}

/// Loads one rulebase from its JSON form. Each vehicle class may be
/// loaded once per engine.
///
/// # Safety
/// `engine` must be a live engine; `rulebase_json` must be null or
/// point to a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn fzs_engine_add_rulebase_json(
    engine: *mut FzsEngine,
    rulebase_json: *const c_char,
) -> FzsStatus {
    guarded(|| {
        let Some(engine) = engine.as_mut() else {
            return fail(FzsStatus::NullArgument, "engine must not be null");
        };
        let json = match required_str(rulebase_json, "rulebase_json") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let rb = match RuleBase::from_json(json) {
            Ok(rb) => rb,
            Err(RuleBaseParseError::Json(e)) => return fail(FzsStatus::ParseError, &e.to_string()),
            Err(RuleBaseParseError::Invalid(e)) => {
                return fail(FzsStatus::InvalidRule, &e.to_string())
            }
        };
        if engine.rulebases.iter().any(|r| r.class_id == rb.class_id) {
            return fail(
                FzsStatus::InvalidRule,
                &format!("class '{}' is already loaded", rb.class_id),
            );
        }
        engine.rulebases.push(rb);
        clear_error();
        FzsStatus::Ok
    })
}

/// Number of rulebases loaded; 0 for a null engine.
///
/// # Safety
/// `engine` must be null or a live engine.
#[no_mangle]
pub unsafe extern "C" fn fzs_engine_rulebase_count(engine: *const FzsEngine) -> usize {
    engine.as_ref().map_or(0, |e| e.rulebases.len())
}

/// Classifies a scene of JSON-lines segment descriptors against the
/// loaded rulebases. On success `*out_json` receives the result
/// document (scores, winner, anchor index); release it with
/// [`fzs_string_free`].
///
/// # Safety
/// `engine` must be a live engine; `scene_jsonl` must be null or point
/// to a NUL-terminated string; `out_json` must be null or valid for a
/// pointer write.
#[no_mangle]
pub unsafe extern "C" fn fzs_engine_classify_jsonl(
    engine: *const FzsEngine,
    scene_jsonl: *const c_char,
    out_json: *mut *mut c_char,
) -> FzsStatus {
    guarded(|| {
        let Some(engine) = engine.as_ref() else {
            return fail(FzsStatus::NullArgument, "engine must not be null");
        };
        if out_json.is_null() {
            return fail(FzsStatus::NullArgument, "out_json must not be null");
        }
        let jsonl = match required_str(scene_jsonl, "scene_jsonl") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let scene = match read_scene(jsonl.as_bytes()) {
            Ok(scene) => scene,
            Err(e) => return fail(scene_status(&e), &e.to_string()),
        };
        let outcome = match classify_scene(&scene, &engine.rulebases, &engine.config) {
            Ok(outcome) => outcome,
            Err(e) => return fail(pipeline_status(&e), &e.to_string()),
        };
        let rendered =
            serde_json::to_string_pretty(&outcome.to_json()).expect("result value serializes");
        emit_string(out_json, rendered)
    })
}

/// Builds a rulebase by projecting a 3-D model JSON through a camera
/// JSON and fuzzifying the result. `config_json` may be null for
/// default trapezoid widths. On success `*out_json` receives the
/// rulebase document; release it with [`fzs_string_free`].
///
/// # Safety
/// String arguments must be null or NUL-terminated; `out_json` must be
/// null or valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn fzs_induct(
    model_json: *const c_char,
    camera_json: *const c_char,
    config_json: *const c_char,
    out_json: *mut *mut c_char,
) -> FzsStatus {
    guarded(|| {
        if out_json.is_null() {
            return fail(FzsStatus::NullArgument, "out_json must not be null");
        }
        let model_json = match required_str(model_json, "model_json") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let camera_json = match required_str(camera_json, "camera_json") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let config = if config_json.is_null() {
            Config::default()
        } else {
            let json = match required_str(config_json, "config_json") {
                Ok(s) => s,
                Err(status) => return status,
            };
            match Config::from_json(json) {
                Ok(config) => config,
                Err(e) => return fail(config_status(&e), &e.to_string()),
            }
        };
        let model = match VehicleModel3D::from_json(model_json) {
            Ok(m) => m,
            Err(e) => return fail(FzsStatus::ParseError, &e.to_string()),
        };
        let camera = match CameraPose::from_json(camera_json) {
            Ok(c) => c,
            Err(e) => return fail(FzsStatus::ParseError, &e.to_string()),
        };
        let class_model = match project_model(&model, &camera) {
            Ok(cm) => cm,
            Err(e) => return fail(FzsStatus::InvalidModel, &e.to_string()),
        };
        match induct(&class_model, &config.widths) {
            Ok(rb) => emit_string(out_json, rb.to_json_pretty()),
            Err(e) => fail(FzsStatus::InvalidRule, &e.to_string()),
        }
    })
}

/// Extracts segment descriptors from a text label mask (rows of
/// whitespace-separated integers, 0 = background) rotated by `angle`
/// radians. On success `*out_jsonl` receives one JSON line per label;
/// release it with [`fzs_string_free`].
///
/// # Safety
/// `mask_text` must be null or NUL-terminated; `out_jsonl` must be null
/// or valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn fzs_extract_text_mask(
    mask_text: *const c_char,
    angle: f64,
    out_jsonl: *mut *mut c_char,
) -> FzsStatus {
    guarded(|| {
        if out_jsonl.is_null() {
            return fail(FzsStatus::NullArgument, "out_jsonl must not be null");
        }
        let text = match required_str(mask_text, "mask_text") {
            Ok(s) => s,
            Err(status) => return status,
        };
        if !angle.is_finite() {
            return fail(FzsStatus::InvalidConfig, "angle must be finite");
        }
        let mask = match LabelMask::from_text(text) {
            Ok(mask) => mask,
            Err(e) => return fail(preprocess_status(&e), &e.to_string()),
        };
        let labeled = match extract_segments(&mask, FrameOrientation::new(angle)) {
            Ok(segments) => segments,
            Err(e) => return fail(preprocess_status(&e), &e.to_string()),
        };
        let segments: Vec<_> = labeled.iter().map(|l| l.segment).collect();
        let tags: Vec<String> = labeled.iter().map(|l| l.label.to_string()).collect();
        let mut buf = Vec::new();
        write_scene(&mut buf, &segments, Some(&tags)).expect("vec writes cannot fail");
        let rendered = String::from_utf8(buf).expect("scene lines are UTF-8");
        emit_string(out_jsonl, rendered)
    })
}
