//! C ABI over the lfkit core: chrF++ scoring, weight interpolation,
//! judge-reply parsing and aggregation, builtin language identification,
//! and mix planning.
//!
//! Conventions: functions return [`LfkitStatus`]; out-parameters are only
//! written on `Ok`. Strings returned as `char*` are owned by the caller
//! and must be released with `lfkit_string_free`. Opaque handles have a
//! matching `_free` function. `lfkit_last_error_message` describes the
//! most recent failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use lfkit::chrf::{chrf_pp, ChrfParams};
use lfkit::judge::{
    aggregate_verdicts, build_prompt, parse_verdict, AggregatedVerdict, ConfigName, JudgeVerdict,
};
use lfkit::langid::{identify, IdentifierBackend};
use lfkit::merge::{lerp_tensor, slerp_tensor, Tensor};
use lfkit::mixer::{plan_mix, StageVolume, Strategy};

/// Outcome of an lfkit call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LfkitStatus {
    Ok = 0,
    /// Invalid argument or configuration.
    Usage = 1,
    /// Malformed or inconsistent data.
    Data = 2,
    /// Endpoint or backend unreachable.
    Transport = 3,
    /// A required pointer was null.
    NullPointer = 4,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 5,
    /// Internal invariant failure.
    Panic = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl AsRef<str>) {
    let sanitized = message.as_ref().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(e: &lfkit::Error) -> LfkitStatus {
    set_error(e.to_string());
    match e.exit_code() {
        1 => LfkitStatus::Usage,
        3 => LfkitStatus::Transport,
        _ => LfkitStatus::Data,
    }
}

fn guarded(body: impl FnOnce() -> LfkitStatus) -> LfkitStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            LfkitStatus::Panic
        }
    }
}

/// Message for the most recent failure on this thread. Valid until the
/// next failing lfkit call on the same thread.
#[no_mangle]
pub extern "C" fn lfkit_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn lfkit_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Releases a string returned by lfkit.
///
/// # Safety
/// `s` must come from an lfkit function that transfers ownership, and
/// must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lfkit_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn utf8_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, LfkitStatus> {
    if ptr.is_null() {
        set_error(format!("{name} is null"));
        return Err(LfkitStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error(format!("{name} is not valid UTF-8"));
        LfkitStatus::InvalidUtf8
    })
}

// --- chrF++ ---

/// chrF++ parameters; defaults are character 6-grams, word 2-grams,
/// beta = 2.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LfkitChrfParams {
    pub char_order: usize,
    pub word_order: usize,
    pub beta: f64,
}

#[no_mangle]
pub extern "C" fn lfkit_chrf_params_default() -> LfkitChrfParams {
    let p = ChrfParams::default();
    LfkitChrfParams {
        char_order: p.char_order,
        word_order: p.word_order,
        beta: p.beta,
    }
}

/// Sentence chrF++ of `caption` against `n_references` reference strings.
/// Writes a score in [0, 100] to `out_score`; `out_degenerate` (optional)
/// reports whether the caption was empty.
///
/// # Safety
/// `references` must point to `n_references` valid NUL-terminated strings;
/// out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn lfkit_chrf_sentence(
    caption: *const c_char,
    references: *const *const c_char,
    n_references: usize,
    params: *const LfkitChrfParams,
    out_score: *mut f64,
    out_degenerate: *mut bool,
) -> LfkitStatus {
    guarded(|| {
        let caption = match utf8_arg(caption, "caption") {
            Ok(s) => s,
            Err(status) => return status,
        };
        if references.is_null() || out_score.is_null() {
            set_error("references and out_score must be non-null");
            return LfkitStatus::NullPointer;
        }
        let mut refs = Vec::with_capacity(n_references);
        for i in 0..n_references {
            match utf8_arg(*references.add(i), "reference") {
                Ok(s) => refs.push(s),
                Err(status) => return status,
            }
        }
        let params = if params.is_null() {
            ChrfParams::default()
        } else {
            let p = &*params;
            ChrfParams {
                char_order: p.char_order,
                word_order: p.word_order,
                beta: p.beta,
            }
        };
        match chrf_pp(caption, &refs, &params) {
            Ok(sentence) => {
                *out_score = sentence.score;
                if !out_degenerate.is_null() {
                    *out_degenerate = sentence.degenerate;
                }
                LfkitStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

// --- weight interpolation on raw f32 buffers ---

/// Elementwise (1-alpha)*w1 + alpha*w2 over `len` floats into `out`.
///
/// # Safety
/// `w1`, `w2`, and `out` must each point to `len` readable (writable for
/// `out`) f32 values.
#[no_mangle]
pub unsafe extern "C" fn lfkit_lerp_f32(
    w1: *const f32,
    w2: *const f32,
    len: usize,
    alpha: f64,
    out: *mut f32,
) -> LfkitStatus {
    interpolate(w1, w2, len, out, |a, b| lerp_tensor(a, b, alpha))
}

/// Spherical interpolation over `len` floats into `out`, falling back to
/// lerp when the angle or either norm is below `epsilon`.
///
/// # Safety
/// Same as `lfkit_lerp_f32`.
#[no_mangle]
pub unsafe extern "C" fn lfkit_slerp_f32(
    w1: *const f32,
    w2: *const f32,
    len: usize,
    alpha: f64,
    epsilon: f64,
    out: *mut f32,
) -> LfkitStatus {
    interpolate(w1, w2, len, out, |a, b| slerp_tensor(a, b, alpha, epsilon))
}

unsafe fn interpolate(
    w1: *const f32,
    w2: *const f32,
    len: usize,
    out: *mut f32,
    combine: impl Fn(&Tensor, &Tensor) -> lfkit::Result<Tensor>,
) -> LfkitStatus {
    guarded(AssertUnwindSafe(|| {
        if w1.is_null() || w2.is_null() || out.is_null() {
            set_error("w1, w2, and out must be non-null");
            return LfkitStatus::NullPointer;
        }
        let a = Tensor::from_f32("w1", vec![len], std::slice::from_raw_parts(w1, len));
        let b = Tensor::from_f32("w2", vec![len], std::slice::from_raw_parts(w2, len));
        match combine(&a, &b) {
            Ok(merged) => {
                let values = merged.to_f32_vec();
                std::ptr::copy_nonoverlapping(values.as_ptr(), out, len);
                LfkitStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    }))
}

// --- judge prompt, verdicts, aggregation ---

/// Renders the language-consistency evaluation prompt for a caption.
/// Returns an owned string, or null on invalid input.
///
/// # Safety
/// `caption` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn lfkit_build_prompt(caption: *const c_char) -> *mut c_char {
    let Ok(caption) = utf8_arg(caption, "caption") else {
        return std::ptr::null_mut();
    };
    match CString::new(build_prompt(caption)) {
        Ok(s) => s.into_raw(),
        Err(_) => {
            set_error("caption contains an interior NUL");
            std::ptr::null_mut()
        }
    }
}

/// Opaque per-configuration judge verdict.
pub struct LfkitVerdict(JudgeVerdict);

/// Opaque three-way aggregate.
pub struct LfkitAggregatedVerdict(AggregatedVerdict);

unsafe fn verdict_ref<'a>(ptr: *const LfkitVerdict) -> Option<&'a JudgeVerdict> {
    ptr.as_ref().map(|wrapper| &wrapper.0)
}

/// Parses a raw judge reply produced under generation config `config`
/// ('A', 'B', or 'C'). Malformed fields come back absent, never an error.
///
/// # Safety
/// `raw` must be a valid NUL-terminated string; `out` must be writable.
/// The handle must be released with `lfkit_verdict_free`.
#[no_mangle]
pub unsafe extern "C" fn lfkit_parse_verdict(
    raw: *const c_char,
    config: c_char,
    out: *mut *mut LfkitVerdict,
) -> LfkitStatus {
    guarded(AssertUnwindSafe(|| {
        let raw = match utf8_arg(raw, "raw") {
            Ok(s) => s,
            Err(status) => return status,
        };
        if out.is_null() {
            set_error("out is null");
            return LfkitStatus::NullPointer;
        }
        let name = match (config as u8 as char).to_ascii_uppercase() {
            'A' => ConfigName::A,
            'B' => ConfigName::B,
            'C' => ConfigName::C,
            other => {
                set_error(format!("config {other:?} is not A, B, or C"));
                return LfkitStatus::Usage;
            }
        };
        let verdict = parse_verdict(raw, name);
        *out = Box::into_raw(Box::new(LfkitVerdict(verdict)));
        LfkitStatus::Ok
    }))
}

/// # Safety
/// `v` must come from `lfkit_parse_verdict` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lfkit_verdict_free(v: *mut LfkitVerdict) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// Writes the language score if present; returns whether it was present.
///
/// # Safety
/// `v` must be a live verdict handle; `out_score` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lfkit_verdict_language_score(
    v: *const LfkitVerdict,
    out_score: *mut f64,
) -> bool {
    match (verdict_ref(v), out_score.as_mut()) {
        (Some(verdict), Some(out)) => match verdict.language_score {
            Some(score) => {
                *out = score;
                true
            }
            None => false,
        },
        _ => false,
    }
}

/// Writes the fully-in-language boolean if present; returns presence.
///
/// # Safety
/// `v` must be a live verdict handle; `out_fully` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lfkit_verdict_fully_in_language(
    v: *const LfkitVerdict,
    out_fully: *mut bool,
) -> bool {
    match (verdict_ref(v), out_fully.as_mut()) {
        (Some(verdict), Some(out)) => match verdict.fully_in_language {
            Some(fully) => {
                *out = fully;
                true
            }
            None => false,
        },
        _ => false,
    }
}

/// The judge's language guess, or null when absent. Caller frees.
///
/// # Safety
/// `v` must be a live verdict handle.
#[no_mangle]
pub unsafe extern "C" fn lfkit_verdict_language_guess(v: *const LfkitVerdict) -> *mut c_char {
    verdict_ref(v)
        .and_then(|verdict| verdict.language_guess.as_deref())
        .and_then(|guess| CString::new(guess).ok())
        .map(CString::into_raw)
        .unwrap_or(std::ptr::null_mut())
}

/// The judge's summary, or null when absent. Caller frees.
///
/// # Safety
/// `v` must be a live verdict handle.
#[no_mangle]
pub unsafe extern "C" fn lfkit_verdict_summary(v: *const LfkitVerdict) -> *mut c_char {
    verdict_ref(v)
        .and_then(|verdict| verdict.summary.as_deref())
        .and_then(|summary| CString::new(summary).ok())
        .map(CString::into_raw)
        .unwrap_or(std::ptr::null_mut())
}

/// Aggregates exactly one verdict per config A, B, C (any argument
/// order): numeric scores average over present values, booleans take the
/// majority with ties resolving to false.
///
/// # Safety
/// All three handles must be live; `out` must be writable. The result is
/// released with `lfkit_aggregated_free`.
#[no_mangle]
pub unsafe extern "C" fn lfkit_aggregate_verdicts(
    a: *const LfkitVerdict,
    b: *const LfkitVerdict,
    c: *const LfkitVerdict,
    out: *mut *mut LfkitAggregatedVerdict,
) -> LfkitStatus {
    guarded(AssertUnwindSafe(|| {
        let (Some(a), Some(b), Some(c)) = (verdict_ref(a), verdict_ref(b), verdict_ref(c)) else {
            set_error("verdict handles must be non-null");
            return LfkitStatus::NullPointer;
        };
        if out.is_null() {
            set_error("out is null");
            return LfkitStatus::NullPointer;
        }
        match aggregate_verdicts(&[a.clone(), b.clone(), c.clone()]) {
            Ok(aggregated) => {
                *out = Box::into_raw(Box::new(LfkitAggregatedVerdict(aggregated)));
                LfkitStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    }))
}

unsafe fn aggregated_ref<'a>(ptr: *const LfkitAggregatedVerdict) -> Option<&'a AggregatedVerdict> {
    ptr.as_ref().map(|wrapper| &wrapper.0)
}

/// # Safety
/// `agg` must come from `lfkit_aggregate_verdicts` and not be used after.
#[no_mangle]
pub unsafe extern "C" fn lfkit_aggregated_free(agg: *mut LfkitAggregatedVerdict) {
    if !agg.is_null() {
        drop(Box::from_raw(agg));
    }
}

/// # Safety
/// `agg` must be a live aggregate handle.
#[no_mangle]
pub unsafe extern "C" fn lfkit_aggregated_fully_in_language(
    agg: *const LfkitAggregatedVerdict,
) -> bool {
    aggregated_ref(agg)
        .map(|a| a.fully_in_language)
        .unwrap_or(false)
}

/// # Safety
/// `agg` must be a live aggregate handle.
#[no_mangle]
pub unsafe extern "C" fn lfkit_aggregated_unparseable(agg: *const LfkitAggregatedVerdict) -> bool {
    aggregated_ref(agg).map(|a| a.unparseable).unwrap_or(true)
}

/// Writes the mean language score if any per-config score was present;
/// returns presence.
///
/// # Safety
/// `agg` must be a live aggregate handle; `out_mean` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lfkit_aggregated_mean_score(
    agg: *const LfkitAggregatedVerdict,
    out_mean: *mut f64,
) -> bool {
    match (aggregated_ref(agg), out_mean.as_mut()) {
        (Some(aggregate), Some(out)) => match aggregate.mean_language_score {
            Some(mean) => {
                *out = mean;
                true
            }
            None => false,
        },
        _ => false,
    }
}

// --- builtin language identification ---

/// Identifies `text` with the builtin trigram classifier. Writes the
/// language code (NUL-terminated) into `out_code` and the confidence in
/// [0, 1] into `out_confidence` (optional).
///
/// # Safety
/// `out_code` must hold at least `out_code_len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn lfkit_identify_builtin(
    text: *const c_char,
    out_code: *mut c_char,
    out_code_len: usize,
    out_confidence: *mut f64,
) -> LfkitStatus {
    guarded(AssertUnwindSafe(|| {
        let text = match utf8_arg(text, "text") {
            Ok(s) => s,
            Err(status) => return status,
        };
        if out_code.is_null() {
            set_error("out_code is null");
            return LfkitStatus::NullPointer;
        }
        match identify(text, &IdentifierBackend::builtin()) {
            Ok(identification) => {
                let code = identification.tag.to_string();
                if code.len() + 1 > out_code_len {
                    set_error(format!("out_code needs {} bytes", code.len() + 1));
                    return LfkitStatus::Usage;
                }
                std::ptr::copy_nonoverlapping(code.as_ptr() as *const c_char, out_code, code.len());
                *out_code.add(code.len()) = 0;
                if !out_confidence.is_null() {
                    *out_confidence = identification.confidence;
                }
                LfkitStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    }))
}

// --- mix planning ---

/// Distributes `text_total` across `n_stages` stages proportionally to
/// their visual volumes under the named strategy ("TR-3S", "TR-2S", or
/// "TR-1S"). `stage_ids` are "1", "1.5", "2", "2.5". Allocations land in
/// `out_allocations`, parallel to the inputs; stages the strategy does
/// not use receive 0.
///
/// # Safety
/// The three arrays must each hold `n_stages` elements; `stage_ids`
/// entries must be valid NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn lfkit_plan_mix(
    strategy: *const c_char,
    text_total: u64,
    stage_ids: *const *const c_char,
    visual_counts: *const u64,
    n_stages: usize,
    out_allocations: *mut u64,
) -> LfkitStatus {
    guarded(AssertUnwindSafe(|| {
        let strategy_name = match utf8_arg(strategy, "strategy") {
            Ok(s) => s,
            Err(status) => return status,
        };
        if stage_ids.is_null() || visual_counts.is_null() || out_allocations.is_null() {
            set_error("stage_ids, visual_counts, and out_allocations must be non-null");
            return LfkitStatus::NullPointer;
        }
        let strategy: Strategy = match strategy_name.parse() {
            Ok(s) => s,
            Err(e) => return status_of(&e),
        };
        let mut volumes = Vec::with_capacity(n_stages);
        for i in 0..n_stages {
            let stage = match utf8_arg(*stage_ids.add(i), "stage id") {
                Ok(s) => s,
                Err(status) => return status,
            };
            let stage = match stage.parse() {
                Ok(s) => s,
                Err(e) => return status_of(&e),
            };
            volumes.push(StageVolume {
                stage,
                visual_count: *visual_counts.add(i),
            });
        }
        match plan_mix(strategy, text_total, &volumes) {
            Ok(plan) => {
                for (i, volume) in volumes.iter().enumerate() {
                    *out_allocations.add(i) =
                        plan.allocations.get(&volume.stage).copied().unwrap_or(0);
                }
                LfkitStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    }))
}
