use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use lggnorm_ffi::*;

fn bundled() -> *mut LggEngine {
    let mut e = ptr::null_mut();
    assert_eq!(unsafe { lgg_engine_new_bundled(&mut e) }, LggStatus::Ok);
    assert!(!e.is_null());
    e
}

fn take(p: *mut c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string();
    unsafe { lgg_string_free(p) };
    s
}

fn last_error() -> Option<String> {
    let p = lgg_last_error_message();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

#[test]
fn normalize_both_modes() {
    let e = bundled();
    let text = CString::new("초콜렛향기 넘 좋아요").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { lgg_normalize(e, text.as_ptr(), LggMode::Replace, &mut out) }, LggStatus::Ok);
    assert_eq!(take(out), "초콜릿향기 너무 좋아요");
    assert_eq!(unsafe { lgg_normalize(e, text.as_ptr(), LggMode::Merge, &mut out) }, LggStatus::Ok);
    assert_eq!(take(out), "{초콜렛,초콜릿.LOAN}향기 {넘,너무.ABBR} 좋아요");
    unsafe { lgg_engine_free(e) };
}

#[test]
fn json_reports() {
    let e = bundled();
    let text = CString::new("영화 잼있어요 ㅋㅋㅋ").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { lgg_classify_json(e, text.as_ptr(), &mut out) }, LggStatus::Ok);
    let json = take(out);
    assert!(json.contains("\"schema\": 1"));
    assert!(json.contains("EMOTICON"));
    assert_eq!(unsafe { lgg_stats_json(e, text.as_ptr(), &mut out) }, LggStatus::Ok);
    assert!(take(out).contains("\"corpus_size\": 3"));
    assert_eq!(unsafe { lgg_tokenize_tsv(text.as_ptr(), &mut out) }, LggStatus::Ok);
    assert_eq!(take(out).lines().count(), 3);
    unsafe { lgg_engine_free(e) };
}

#[test]
fn error_codes() {
    let e = bundled();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { lgg_normalize(e, ptr::null(), LggMode::Replace, &mut out) }, LggStatus::NullArgument);
    assert!(last_error().unwrap().contains("text"));
    assert_eq!(
        unsafe { lgg_normalize(ptr::null(), c"x".as_ptr(), LggMode::Replace, &mut out) },
        LggStatus::NullArgument
    );

    let nfd = CString::new("\u{1100}\u{1161}").unwrap();
    assert_eq!(unsafe { lgg_normalize(e, nfd.as_ptr(), LggMode::Replace, &mut out) }, LggStatus::NotNfc);
    let bad = [0xffu8 as c_char, 0];
    assert_eq!(unsafe { lgg_tokenize_tsv(bad.as_ptr(), &mut out) }, LggStatus::InvalidUtf8);

    // a successful call clears the message
    assert_eq!(unsafe { lgg_tokenize_tsv(c"가".as_ptr(), &mut out) }, LggStatus::Ok);
    take(out);
    assert!(last_error().is_none());
    unsafe { lgg_engine_free(e) };
    unsafe { lgg_engine_free(ptr::null_mut()) };
    unsafe { lgg_string_free(ptr::null_mut()) };
}

#[test]
fn engine_from_files() {
    let core = CString::new("dict/core.dic").unwrap();
    let abbr = CString::new("dict/abbr.dic").unwrap();
    let dicts = [core.as_ptr(), abbr.as_ptr()];
    let grammars = CString::new("grammars/abbr.lgg").unwrap();
    let mut e = ptr::null_mut();
    assert_eq!(unsafe { lgg_engine_new(dicts.as_ptr(), 2, grammars.as_ptr(), &mut e) }, LggStatus::Ok);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { lgg_normalize(e, c"강추합니다".as_ptr(), LggMode::Replace, &mut out) }, LggStatus::Ok);
    assert_eq!(take(out), "강력 추천합니다");
    unsafe { lgg_engine_free(e) };

    let missing = CString::new("/nonexistent/x.dic").unwrap();
    let dicts = [missing.as_ptr()];
    assert_eq!(unsafe { lgg_engine_new(dicts.as_ptr(), 1, grammars.as_ptr(), &mut e) }, LggStatus::Io);

    let dir = tempfile_dir();
    let bad = dir.join("bad.dic");
    std::fs::write(&bad, "no separator\n").unwrap();
    let bad = CString::new(bad.to_str().unwrap()).unwrap();
    let dicts = [bad.as_ptr()];
    assert_eq!(unsafe { lgg_engine_new(dicts.as_ptr(), 1, grammars.as_ptr(), &mut e) }, LggStatus::Dictionary);
    let lgg = dir.join("bad.lgg");
    std::fs::write(&lgg, "GRAPH g TAG T\n0 INITIAL -> 2\n1 FINAL\n2 <E> -> 1\n").unwrap();
    let lgg = CString::new(lgg.to_str().unwrap()).unwrap();
    let dicts = [core.as_ptr()];
    assert_eq!(unsafe { lgg_engine_new(dicts.as_ptr(), 1, lgg.as_ptr(), &mut e) }, LggStatus::Grammar);
}

fn tempfile_dir() -> PathBuf {
    let d = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("ffi-tests");
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(lgg_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

/// Compiles the C smoke test against the generated header and the static
/// library of this build.
#[test]
fn c_program_links_and_runs() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("liblggnorm_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let exe = tempfile_dir().join("c_smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c_smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("a C compiler on PATH");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "영화 재미있어요\n");
}
