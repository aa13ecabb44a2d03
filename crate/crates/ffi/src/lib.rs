//! C interface to the `lggnorm` normalizer.
//!
//! Engines are opaque handles created by `lgg_engine_new*` and released
//! with `lgg_engine_free`. Every other call returns an [`LggStatus`]; on
//! failure `lgg_last_error_message` describes the error for the calling
//! thread. Strings handed out by the library are NUL-terminated UTF-8 and
//! must be released with `lgg_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::ptr;

use lggnorm::apply::Mode;
use lggnorm::assets::{Engine, LoadError};
use lggnorm::tokenizer::{to_tsv, tokenize};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LggStatus {
    Ok = 0,
    NullArgument = 1,
    /// Input text or a path is not valid UTF-8.
    InvalidUtf8 = 2,
    /// Input text is not in Unicode normalization form C.
    NotNfc = 3,
    Io = 4,
    Dictionary = 5,
    Grammar = 6,
    /// A Rust panic was caught at the boundary.
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LggMode {
    Replace = 0,
    Merge = 1,
}

/// Opaque engine handle.
pub struct LggEngine {
    engine: Engine,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(CString::new(msg).expect("NULs removed")));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(LggStatus, String);

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LggStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LggStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal error");
            LggStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(LggStatus::NullArgument, format!("{what} is NULL")));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Failure(LggStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn text_arg<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    let text = str_arg(p, "text")?;
    if !unicode_normalization::is_nfc(text) {
        return Err(Failure(LggStatus::NotNfc, "text is not in NFC".into()));
    }
    Ok(text)
}

unsafe fn engine_arg<'a>(p: *const LggEngine) -> Result<&'a Engine, Failure> {
    p.as_ref().map(|h| &h.engine).ok_or_else(|| Failure(LggStatus::NullArgument, "engine is NULL".into()))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(LggStatus::NullArgument, "output pointer is NULL".into()));
    }
    let c = CString::new(s).map_err(|_| Failure(LggStatus::InvalidUtf8, "result contains NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

fn load_failure(e: LoadError) -> Failure {
    let status = match e {
        LoadError::Io { .. } => LggStatus::Io,
        LoadError::Dictionary { .. } => LggStatus::Dictionary,
        LoadError::Grammar(_) => LggStatus::Grammar,
    };
    Failure(status, e.to_string())
}

unsafe fn write_engine(out: *mut *mut LggEngine, engine: Engine) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(LggStatus::NullArgument, "output pointer is NULL".into()));
    }
    *out = Box::into_raw(Box::new(LggEngine { engine }));
    Ok(())
}

/// Creates an engine from the dictionaries and grammars built into the
/// library.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn lgg_engine_new_bundled(out: *mut *mut LggEngine) -> LggStatus {
    guard(|| write_engine(out, Engine::bundled()))
}

/// Creates an engine from `n_dicts` dictionary files and a grammar
/// directory or file. Relative paths that do not exist are looked up
/// under the asset root.
///
/// # Safety
/// `dict_paths` must point to `n_dicts` NUL-terminated strings,
/// `grammar_path` must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lgg_engine_new(
    dict_paths: *const *const c_char,
    n_dicts: usize,
    grammar_path: *const c_char,
    out: *mut *mut LggEngine,
) -> LggStatus {
    guard(|| {
        if dict_paths.is_null() && n_dicts > 0 {
            return Err(Failure(LggStatus::NullArgument, "dict_paths is NULL".into()));
        }
        let mut dicts = Vec::with_capacity(n_dicts);
        for i in 0..n_dicts {
            dicts.push(PathBuf::from(str_arg(*dict_paths.add(i), "dictionary path")?));
        }
        let grammars = str_arg(grammar_path, "grammar path")?;
        let engine = Engine::load(&dicts, Path::new(grammars)).map_err(load_failure)?;
        write_engine(out, engine)
    })
}

/// Releases an engine. NULL is ignored.
///
/// # Safety
/// `engine` must come from `lgg_engine_new*` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lgg_engine_free(engine: *mut LggEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Rewrites recognized variants in `text`.
///
/// # Safety
/// `engine` must be live, `text` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lgg_normalize(
    engine: *const LggEngine,
    text: *const c_char,
    mode: LggMode,
    out: *mut *mut c_char,
) -> LggStatus {
    guard(|| {
        let engine = engine_arg(engine)?;
        let text = text_arg(text)?;
        let mode = match mode {
            LggMode::Replace => Mode::Replace,
            LggMode::Merge => Mode::Merge,
        };
        write_string(out, lggnorm::apply::transform(text, &engine.find_matches(text), mode))
    })
}

/// Classification of every non-analyzable type of `text` as JSON.
///
/// # Safety
/// As for `lgg_normalize`.
#[no_mangle]
pub unsafe extern "C" fn lgg_classify_json(
    engine: *const LggEngine,
    text: *const c_char,
    out: *mut *mut c_char,
) -> LggStatus {
    guard(|| {
        let engine = engine_arg(engine)?;
        let text = text_arg(text)?;
        write_string(out, engine.classify(text).to_json())
    })
}

/// Corpus statistics of `text` as JSON.
///
/// # Safety
/// As for `lgg_normalize`.
#[no_mangle]
pub unsafe extern "C" fn lgg_stats_json(
    engine: *const LggEngine,
    text: *const c_char,
    out: *mut *mut c_char,
) -> LggStatus {
    guard(|| {
        let engine = engine_arg(engine)?;
        let text = text_arg(text)?;
        write_string(out, engine.stats(text).to_json())
    })
}

/// Tokens of `text` as `start<TAB>end<TAB>class<TAB>surface` lines.
///
/// # Safety
/// `text` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lgg_tokenize_tsv(text: *const c_char, out: *mut *mut c_char) -> LggStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        write_string(out, to_tsv(&tokenize(text)))
    })
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lgg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or NULL. Valid until
/// the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn lgg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn lgg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
