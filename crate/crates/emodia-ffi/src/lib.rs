//! C ABI over the emodia toolkit, for bindings from other languages.
//!
//! Conventions:
//! - Timelines are opaque handles created by `emodia_timeline_*`
//!   constructors and released with `emodia_timeline_free`.
//! - Every fallible function returns an [`EmodiaStatus`]; on failure a
//!   human-readable message is retrievable with [`emodia_last_error`]
//!   until the next failing call on the same thread.
//! - Strings returned as `char*` are owned by the caller and must be
//!   released with [`emodia_string_free`]; `const char*` returns are
//!   borrowed and must not be freed.
//!
//! The matching header is generated into `include/emodia.h` at build
//! time.

use emodia::framing::{classify_transition, timeline_runs};
use emodia::{ParseMode, Timeline, TimelineKind};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

/// Result of an FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmodiaStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Arguments were structurally invalid (bad kind value, zero rows).
    InvalidArgument = 3,
    /// Input was readable but failed validation (overlap, duration
    /// mismatch, too few raters, ...).
    Domain = 4,
    /// Input could not be read or parsed.
    Input = 5,
}

/// Kind of timeline being constructed.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmodiaTimelineKind {
    Reference = 0,
    Hypothesis = 1,
}

/// Per-utterance scoring result. Tick counts are 100 µs units.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmodiaEderBreakdown {
    pub false_alarm_ticks: u64,
    pub missed_emotion_ticks: u64,
    pub confusion_ticks: u64,
    pub overlap_ticks: u64,
    pub correct_ticks: u64,
    pub duration_ticks: u64,
    /// (fa + me + cf + ol) / duration, in [0, 1].
    pub eder: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c =
        CString::new(message.replace('\0', "?")).unwrap_or_else(|_| CString::new("error").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn fail(e: &emodia::Error) -> EmodiaStatus {
    set_last_error(e.to_string());
    match e.exit_class() {
        emodia::ExitClass::Domain => EmodiaStatus::Domain,
        _ => EmodiaStatus::Input,
    }
}

/// Message of the last failing call on this thread, or null. Borrowed;
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn emodia_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Toolkit version as a static string (never freed).
#[no_mangle]
pub extern "C" fn emodia_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Free a string returned by this library.
///
/// # Safety
/// `s` must have been returned by an emodia function documented as
/// caller-owned, and not freed before.
#[no_mangle]
pub unsafe extern "C" fn emodia_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// An opaque timeline handle.
pub struct EmodiaTimeline(Timeline);

unsafe fn cstr_arg<'a>(s: *const c_char) -> Result<&'a str, EmodiaStatus> {
    if s.is_null() {
        set_last_error("null string argument".to_owned());
        return Err(EmodiaStatus::NullPointer);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_last_error("string argument is not valid UTF-8".to_owned());
        EmodiaStatus::InvalidUtf8
    })
}

fn kind_of(kind: EmodiaTimelineKind) -> TimelineKind {
    match kind {
        EmodiaTimelineKind::Reference => TimelineKind::Reference,
        EmodiaTimelineKind::Hypothesis => TimelineKind::Hypothesis,
    }
}

fn mode_of(lenient: bool) -> ParseMode {
    if lenient {
        ParseMode::Lenient
    } else {
        ParseMode::Strict
    }
}

unsafe fn store_timeline(
    result: emodia::Result<Timeline>,
    out: *mut *mut EmodiaTimeline,
) -> EmodiaStatus {
    match result {
        Ok(tl) => {
            *out = Box::into_raw(Box::new(EmodiaTimeline(tl)));
            EmodiaStatus::Ok
        }
        Err(e) => {
            *out = ptr::null_mut();
            fail(&e)
        }
    }
}

/// Read an interval JSON file into a timeline handle.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid
/// pointer; on success the caller owns the handle.
#[no_mangle]
pub unsafe extern "C" fn emodia_timeline_read(
    path: *const c_char,
    kind: EmodiaTimelineKind,
    lenient: bool,
    out: *mut *mut EmodiaTimeline,
) -> EmodiaStatus {
    if out.is_null() {
        set_last_error("null out pointer".to_owned());
        return EmodiaStatus::NullPointer;
    }
    let path = match cstr_arg(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    let result = match kind_of(kind) {
        TimelineKind::Reference => emodia::io::read_reference(Path::new(path), mode_of(lenient)),
        TimelineKind::Hypothesis => emodia::io::read_hypothesis(Path::new(path), mode_of(lenient)),
    };
    store_timeline(result, out)
}

/// Parse interval JSON from a string into a timeline handle.
///
/// # Safety
/// Same contract as [`emodia_timeline_read`].
#[no_mangle]
pub unsafe extern "C" fn emodia_timeline_from_json(
    json: *const c_char,
    kind: EmodiaTimelineKind,
    lenient: bool,
    out: *mut *mut EmodiaTimeline,
) -> EmodiaStatus {
    if out.is_null() {
        set_last_error("null out pointer".to_owned());
        return EmodiaStatus::NullPointer;
    }
    let json = match cstr_arg(json) {
        Ok(j) => j,
        Err(status) => return status,
    };
    let result = emodia::io::parse_utterance_record(json)
        .and_then(|record| record.to_timeline(kind_of(kind), mode_of(lenient)));
    store_timeline(result, out)
}

/// Release a timeline handle.
///
/// # Safety
/// `timeline` must be a handle from this library, not yet freed. Null
/// is a no-op.
#[no_mangle]
pub unsafe extern "C" fn emodia_timeline_free(timeline: *mut EmodiaTimeline) {
    if !timeline.is_null() {
        drop(Box::from_raw(timeline));
    }
}

/// Utterance duration in 100 µs ticks.
///
/// # Safety
/// `timeline` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn emodia_timeline_duration_ticks(
    timeline: *const EmodiaTimeline,
    out: *mut u64,
) -> EmodiaStatus {
    if timeline.is_null() || out.is_null() {
        set_last_error("null pointer".to_owned());
        return EmodiaStatus::NullPointer;
    }
    *out = (*timeline).0.duration().get();
    EmodiaStatus::Ok
}

/// Utterance id as a caller-owned string.
///
/// # Safety
/// `timeline` and `out` must be valid; free the string with
/// [`emodia_string_free`].
#[no_mangle]
pub unsafe extern "C" fn emodia_timeline_utterance_id(
    timeline: *const EmodiaTimeline,
    out: *mut *mut c_char,
) -> EmodiaStatus {
    if timeline.is_null() || out.is_null() {
        set_last_error("null pointer".to_owned());
        return EmodiaStatus::NullPointer;
    }
    let id = (*timeline).0.utterance_id().replace('\0', "?");
    *out = CString::new(id).unwrap().into_raw();
    EmodiaStatus::Ok
}

/// The timeline's transition pattern ("happy", "null-sad-null",
/// "invalid", ...) as a caller-owned string. Only meaningful for
/// non-overlapping timelines.
///
/// # Safety
/// `timeline` and `out` must be valid; free the string with
/// [`emodia_string_free`].
#[no_mangle]
pub unsafe extern "C" fn emodia_timeline_pattern(
    timeline: *const EmodiaTimeline,
    out: *mut *mut c_char,
) -> EmodiaStatus {
    if timeline.is_null() || out.is_null() {
        set_last_error("null pointer".to_owned());
        return EmodiaStatus::NullPointer;
    }
    match timeline_runs(&(*timeline).0) {
        Ok(runs) => {
            let pattern = classify_transition(&runs).to_string();
            *out = CString::new(pattern).unwrap().into_raw();
            EmodiaStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Score a hypothesis against a reference.
///
/// # Safety
/// All pointers must be valid; `reference` must be reference-kind and
/// both timelines must share one duration.
#[no_mangle]
pub unsafe extern "C" fn emodia_eder(
    reference: *const EmodiaTimeline,
    hypothesis: *const EmodiaTimeline,
    out: *mut EmodiaEderBreakdown,
) -> EmodiaStatus {
    if reference.is_null() || hypothesis.is_null() || out.is_null() {
        set_last_error("null pointer".to_owned());
        return EmodiaStatus::NullPointer;
    }
    match emodia::metrics::eder(&(*reference).0, &(*hypothesis).0) {
        Ok(b) => {
            *out = EmodiaEderBreakdown {
                false_alarm_ticks: b.fa.get(),
                missed_emotion_ticks: b.me.get(),
                confusion_ticks: b.cf.get(),
                overlap_ticks: b.ol.get(),
                correct_ticks: b.correct.get(),
                duration_ticks: b.duration.get(),
                eder: b.eder(),
            };
            EmodiaStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Fleiss' kappa over a row-major `n_items x 4` table of category
/// counts (happy, sad, angry, null); every row must sum to `n_raters`.
///
/// # Safety
/// `counts` must point to `n_items * 4` readable u32 values; `out`
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn emodia_fleiss_kappa(
    counts: *const u32,
    n_items: usize,
    n_raters: u32,
    out: *mut f64,
) -> EmodiaStatus {
    if counts.is_null() || out.is_null() {
        set_last_error("null pointer".to_owned());
        return EmodiaStatus::NullPointer;
    }
    if n_items == 0 {
        set_last_error("n_items must be positive".to_owned());
        return EmodiaStatus::InvalidArgument;
    }
    let flat = std::slice::from_raw_parts(counts, n_items * 4);
    let rows: Vec<[u32; 4]> = flat
        .chunks_exact(4)
        .map(|c| [c[0], c[1], c[2], c[3]])
        .collect();
    let result = emodia::agreement::RatingTable::new(n_raters as usize, rows)
        .and_then(|table| emodia::agreement::fleiss_kappa(&table));
    match result {
        Ok(kappa) => {
            *out = kappa;
            EmodiaStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Screen a WAV file for over-long silences. `accepted` is false when
/// some silent run is strictly longer than `max_silence_s`;
/// `longest_silence_s` reports the longest run (0 when none).
///
/// # Safety
/// `path` must be a valid NUL-terminated string; out pointers must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn emodia_validate_wav(
    path: *const c_char,
    max_silence_s: f64,
    floor_dbfs: f64,
    accepted: *mut bool,
    longest_silence_s: *mut f64,
) -> EmodiaStatus {
    if accepted.is_null() || longest_silence_s.is_null() {
        set_last_error("null out pointer".to_owned());
        return EmodiaStatus::NullPointer;
    }
    let path = match cstr_arg(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    let Some(max_silence) = emodia::Tick::from_seconds(max_silence_s) else {
        set_last_error(format!("bad max_silence_s {max_silence_s}"));
        return EmodiaStatus::InvalidArgument;
    };
    let params = emodia::sim::VadParams {
        floor_dbfs,
        ..emodia::sim::VadParams::default()
    };
    let result = emodia::sim::read_wav_mono16(Path::new(path))
        .and_then(|samples| emodia::sim::validate_recording(&samples, max_silence, &params));
    match result {
        Ok(v) => {
            *accepted = v.accepted;
            *longest_silence_s = v
                .longest_run
                .map_or(0.0, |(start, end)| (end - start).to_seconds());
            EmodiaStatus::Ok
        }
        Err(e) => fail(&e),
    }
}
