//! C interface to `semsimp`.
//!
//! Pipelines are opaque handles. Every fallible call returns a
//! [`SemsimpStatus`]; on failure a message for the calling thread is
//! available from [`semsimp_last_error_message`]. Strings handed out by the
//! library must be released with [`semsimp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use semsimp::metrics::{bleu, levenshtein, tokenize};
use semsimp::pipeline::{Pipeline, PipelineConfig, Stages};
use semsimp::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemsimpStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Bad options, such as an unknown stage name.
    Config = 3,
    /// Unreadable models or input that could not be simplified.
    Data = 4,
    /// The library panicked; the handle involved should be discarded.
    Panic = 5,
}

/// Loaded models plus stage selection.
pub struct SemsimpPipeline {
    inner: Pipeline,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(SemsimpStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Config(_) => SemsimpStatus::Config,
            _ => SemsimpStatus::Data,
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SemsimpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SemsimpStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SemsimpStatus::Panic
        }
    }
}

/// # Safety
/// `p` must be null or point to a NUL-terminated string.
unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(SemsimpStatus::NullArgument, format!("`{name}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(SemsimpStatus::InvalidUtf8, format!("`{name}` is not UTF-8")))
}

fn out_arg<T>(p: *mut T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(SemsimpStatus::NullArgument, format!("`{name}` is null")))
    } else {
        Ok(())
    }
}

fn to_c(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(SemsimpStatus::Data, "output contains a NUL byte".into()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn semsimp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null if none.
/// Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn semsimp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Loads a pipeline from a model directory holding `sft.tsv`, `lm.counts`,
/// `rules.tsv` (with `rules.tsv.vectors`) and `relprobs.tsv`.
///
/// `stages` is a comma-separated subset of `lex,split,delete`; null means
/// all three. `min_deleted_tokens` asks compression to remove at least that
/// many tokens (0 for the single-phrase minimum).
///
/// # Safety
/// `models_dir` and a non-null `stages` must be NUL-terminated strings;
/// `out` must be a valid pointer. On success `*out` owns a handle to be
/// released with [`semsimp_pipeline_free`].
#[no_mangle]
pub unsafe extern "C" fn semsimp_pipeline_new(
    models_dir: *const c_char,
    stages: *const c_char,
    min_deleted_tokens: usize,
    out: *mut *mut SemsimpPipeline,
) -> SemsimpStatus {
    guard(|| {
        out_arg(out, "out")?;
        *out = ptr::null_mut();
        let dir = str_arg(models_dir, "models_dir")?;
        let mut cfg = PipelineConfig::in_dir(dir);
        if !stages.is_null() {
            cfg.stages = str_arg(stages, "stages")?.parse::<Stages>()?;
        }
        cfg.compress.min_deleted_tokens = min_deleted_tokens;
        let inner = Pipeline::load(&cfg)?;
        *out = Box::into_raw(Box::new(SemsimpPipeline { inner }));
        Ok(())
    })
}

/// # Safety
/// `pipeline` must be null or a handle from [`semsimp_pipeline_new`] not
/// yet freed.
#[no_mangle]
pub unsafe extern "C" fn semsimp_pipeline_free(pipeline: *mut SemsimpPipeline) {
    if !pipeline.is_null() {
        drop(Box::from_raw(pipeline));
    }
}

/// Simplifies one DRS-JSON record. On success `*out` receives the simplified
/// text, sentences separated by single spaces.
///
/// # Safety
/// `pipeline` must be a live handle, `record` a NUL-terminated string and
/// `out` a valid pointer. Release `*out` with [`semsimp_string_free`].
#[no_mangle]
pub unsafe extern "C" fn semsimp_pipeline_simplify(
    pipeline: *const SemsimpPipeline,
    record: *const c_char,
    out: *mut *mut c_char,
) -> SemsimpStatus {
    guard(|| {
        out_arg(out, "out")?;
        *out = ptr::null_mut();
        let p = pipeline
            .as_ref()
            .ok_or_else(|| Failure(SemsimpStatus::NullArgument, "`pipeline` is null".into()))?;
        let record = str_arg(record, "record")?;
        let trace = p.inner.simplify_line(record, 1)?;
        *out = to_c(trace.output_line())?;
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn semsimp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Token-level edit distance between two whitespace-tokenized strings.
///
/// # Safety
/// `a` and `b` must be NUL-terminated strings and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn semsimp_levenshtein(a: *const c_char, b: *const c_char, out: *mut usize) -> SemsimpStatus {
    guard(|| {
        out_arg(out, "out")?;
        let a = tokenize(str_arg(a, "a")?);
        let b = tokenize(str_arg(b, "b")?);
        *out = levenshtein(&a, &b);
        Ok(())
    })
}

/// Corpus BLEU-4 (0 to 100) of newline-separated candidates against
/// newline-separated references, one reference per candidate.
///
/// # Safety
/// `candidates` and `references` must be NUL-terminated strings and `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn semsimp_bleu(
    candidates: *const c_char,
    references: *const c_char,
    out: *mut f64,
) -> SemsimpStatus {
    guard(|| {
        out_arg(out, "out")?;
        let split = |s: &str| -> Vec<Vec<String>> {
            s.lines().map(tokenize).collect()
        };
        let c = split(str_arg(candidates, "candidates")?);
        let r = split(str_arg(references, "references")?);
        *out = bleu(&c, &r)?;
        Ok(())
    })
}
