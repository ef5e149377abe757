use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use semsimp_ffi::*;

fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data").join(rel)
}

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = semsimp_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn load(stages: Option<&str>, min_deleted: usize) -> (SemsimpStatus, *mut SemsimpPipeline) {
    let dir = c(fixture("higgs").to_str().unwrap());
    let stages = stages.map(c);
    let mut handle = ptr::null_mut();
    let status = unsafe {
        semsimp_pipeline_new(
            dir.as_ptr(),
            stages.as_ref().map_or(ptr::null(), |s| s.as_ptr()),
            min_deleted,
            &mut handle,
        )
    };
    (status, handle)
}

fn simplify(p: *const SemsimpPipeline, record: &str) -> Result<String, SemsimpStatus> {
    let record = c(record);
    let mut out: *mut c_char = ptr::null_mut();
    let status = unsafe { semsimp_pipeline_simplify(p, record.as_ptr(), &mut out) };
    if status != SemsimpStatus::Ok {
        assert!(out.is_null());
        return Err(status);
    }
    let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_string();
    unsafe { semsimp_string_free(out) };
    Ok(text)
}

#[test]
fn pipeline_reproduces_the_worked_example() {
    let (status, p) = load(None, 5);
    assert_eq!(status, SemsimpStatus::Ok);
    let record = std::fs::read_to_string(fixture("higgs.jsonl")).unwrap();
    let out = simplify(p, record.trim_end()).unwrap();
    assert_eq!(
        out,
        "In 1964 Peter Higgs wrote his paper explaining Higgs mechanism . \
         Higgs mechanism predicted a new elementary particle ."
    );
    unsafe { semsimp_pipeline_free(p) };
}

#[test]
fn stage_selection_is_honoured() {
    let (status, p) = load(Some("lex"), 0);
    assert_eq!(status, SemsimpStatus::Ok);
    let record = std::fs::read_to_string(fixture("higgs.jsonl")).unwrap();
    let out = simplify(p, record.trim_end()).unwrap();
    assert!(out.contains("wrote his second paper"), "{out}");
    unsafe { semsimp_pipeline_free(p) };
}

#[test]
fn error_codes_and_messages() {
    let (status, p) = load(Some("lex,juggle"), 0);
    assert_eq!(status, SemsimpStatus::Config);
    assert!(p.is_null());
    assert!(last_error().contains("juggle"), "{}", last_error());

    let missing = c("/nonexistent/models");
    let mut handle = ptr::null_mut();
    let status = unsafe { semsimp_pipeline_new(missing.as_ptr(), ptr::null(), 0, &mut handle) };
    assert_eq!(status, SemsimpStatus::Data);

    let status = unsafe { semsimp_pipeline_new(ptr::null(), ptr::null(), 0, &mut handle) };
    assert_eq!(status, SemsimpStatus::NullArgument);
    let status = unsafe { semsimp_pipeline_new(missing.as_ptr(), ptr::null(), 0, ptr::null_mut()) };
    assert_eq!(status, SemsimpStatus::NullArgument);

    let (_, p) = load(None, 0);
    assert_eq!(simplify(p, "{\"id\": 3}"), Err(SemsimpStatus::Data));
    assert!(last_error().contains("line 1"), "{}", last_error());
    assert_eq!(simplify(ptr::null(), "{}"), Err(SemsimpStatus::NullArgument));
    unsafe { semsimp_pipeline_free(p) };
}

#[test]
fn invalid_utf8_is_rejected() {
    let bad = CString::new(vec![0xffu8, 0xfe]).unwrap();
    let ok = c("a b");
    let mut d = 0usize;
    let status = unsafe { semsimp_levenshtein(bad.as_ptr(), ok.as_ptr(), &mut d) };
    assert_eq!(status, SemsimpStatus::InvalidUtf8);
}

#[test]
fn metric_helpers() {
    let a = c("the cat sat on the mat");
    let b = c("the cat sat on a mat");
    let mut d = 99usize;
    assert_eq!(unsafe { semsimp_levenshtein(a.as_ptr(), b.as_ptr(), &mut d) }, SemsimpStatus::Ok);
    assert_eq!(d, 1);

    let corpus = c("the cat sat on the mat\na dog barked at the moon");
    let mut score = 0.0f64;
    assert_eq!(unsafe { semsimp_bleu(corpus.as_ptr(), corpus.as_ptr(), &mut score) }, SemsimpStatus::Ok);
    assert!((score - 100.0).abs() < 1e-9);

    let one = c("only one line");
    assert_eq!(unsafe { semsimp_bleu(one.as_ptr(), corpus.as_ptr(), &mut score) }, SemsimpStatus::Data);
}

#[test]
fn version_matches_the_package() {
    let v = unsafe { CStr::from_ptr(semsimp_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn freeing_null_is_a_no_op() {
    unsafe {
        semsimp_pipeline_free(ptr::null_mut());
        semsimp_string_free(ptr::null_mut());
    }
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let header = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/semsimp.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "semsimp_pipeline_new",
        "semsimp_pipeline_simplify",
        "semsimp_pipeline_free",
        "semsimp_string_free",
        "semsimp_last_error_message",
        "semsimp_levenshtein",
        "semsimp_bleu",
        "SEMSIMP_STATUS_INVALID_UTF8",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let Ok(status) = Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg(&header)
            .status()
        else {
            eprintln!("{compiler} not available; skipping");
            continue;
        };
        assert!(status.success(), "{compiler} rejected the header");
    }
}

#[test]
fn c_program_links_against_the_static_library() {
    // target/<profile>/deps/api-<hash> -> target/<profile>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libsemsimp_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("static library or C compiler missing; skipping");
        return;
    }
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).arg(fixture("higgs")).arg(fixture("higgs.jsonl")).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap().trim_end(),
        "In 1964 Peter Higgs wrote his paper explaining Higgs mechanism . \
         Higgs mechanism predicted a new elementary particle ."
    );
}
