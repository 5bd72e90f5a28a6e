use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use gptscore_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = gs_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn take(p: *mut c_char) -> String {
    let s = CStr::from_ptr(p).to_string_lossy().into_owned();
    gs_string_free(p);
    s
}

#[test]
fn correlations() {
    let x = [1.0, 2.0, 3.0, 4.0, 5.0];
    let y = [5.0, 6.0, 7.0, 8.0, 7.0];
    let mut r = 0.0;
    unsafe {
        assert_eq!(gs_spearman(x.as_ptr(), y.as_ptr(), 5, &mut r), GsStatus::Ok);
        assert!((r - 0.8207826816681233).abs() < 1e-12);
        assert_eq!(gs_pearson(x.as_ptr(), y.as_ptr(), 5, &mut r), GsStatus::Ok);
        assert_eq!(
            gs_pearson(x.as_ptr(), [2.0; 5].as_ptr(), 5, &mut r),
            GsStatus::Degenerate
        );
        assert!(last_error().contains("degenerate"));
        assert_eq!(
            gs_pearson(ptr::null(), y.as_ptr(), 5, &mut r),
            GsStatus::InvalidArgument
        );
        assert_eq!(
            gs_pearson(x.as_ptr(), y.as_ptr(), 5, ptr::null_mut()),
            GsStatus::InvalidArgument
        );
        assert_eq!(gs_spearman(x.as_ptr(), y.as_ptr(), 5, &mut r), GsStatus::Ok);
        assert!(gs_last_error().is_null());
    }
}

#[test]
fn gptscore_and_rouge() {
    let lps = [-1.0, -2.0, -3.0];
    let mut s = 0.0;
    let mut r = GsRouge::default();
    unsafe {
        assert_eq!(gs_gptscore(lps.as_ptr(), 3, &mut s), GsStatus::Ok);
        assert_eq!(s, -2.0);
        assert_eq!(gs_gptscore(lps.as_ptr(), 0, &mut s), GsStatus::Data);
        assert_eq!(
            gs_rouge(c("a c d").as_ptr(), c("a b c d").as_ptr(), 0, &mut r),
            GsStatus::Ok
        );
        assert_eq!((r.precision, r.recall), (1.0, 0.75));
        assert_eq!(
            gs_rouge(c("a b c").as_ptr(), c("a c d").as_ptr(), 1, &mut r),
            GsStatus::Ok
        );
        assert!((r.f1 - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(
            gs_rouge(c("a").as_ptr(), c("a").as_ptr(), 3, &mut r),
            GsStatus::InvalidArgument
        );
    }
}

#[test]
fn composition() {
    unsafe {
        let mut reg = ptr::null_mut();
        assert_eq!(gs_aspects_builtin(&mut reg), GsStatus::Ok);
        let extras = [c("ENG"), c("SPE"), c("COR")];
        let ptrs: Vec<*const c_char> = extras.iter().map(|e| e.as_ptr()).collect();
        let mut out = ptr::null_mut();
        assert_eq!(
            gs_compose_definition(reg, c("INT").as_ptr(), ptrs.as_ptr(), 3, &mut out),
            GsStatus::Ok
        );
        assert_eq!(
            take(out),
            "Is this an interesting response that is engaging, specific, and correct?"
        );
        assert_eq!(
            gs_compose_definition(reg, c("NOPE").as_ptr(), ptr::null(), 0, &mut out),
            GsStatus::NotFound
        );
        assert_eq!(
            gs_compose_definition(reg, c("INT").as_ptr(), ptr::null(), 0, &mut out),
            GsStatus::Ok
        );
        assert_eq!(
            take(out),
            "Is this response interesting to the convsersation?"
        );
        gs_aspects_free(reg);

        let bad = c("{not json");
        assert_eq!(gs_aspects_from_json(bad.as_ptr(), &mut reg), GsStatus::Data);
    }
}

#[test]
fn render_and_score() {
    unsafe {
        let mut t = ptr::null_mut();
        assert_eq!(gs_templates_builtin(&mut t), GsStatus::Ok);
        let (mut prefix, mut target) = (ptr::null_mut(), ptr::null_mut());
        let status = gs_render(
            t,
            c("Summ").as_ptr(),
            c("FLU").as_ptr(),
            c("src->hypo").as_ptr(),
            c("IST").as_ptr(),
            c(r#"{"src": "T.", "hypo": "S."}"#).as_ptr(),
            c(r#"[{"src": "D.", "hypo": "E."}]"#).as_ptr(),
            &mut prefix,
            &mut target,
        );
        assert_eq!(status, GsStatus::InvalidArgument, "{}", last_error());
        let status = gs_render(
            t,
            c("Summ").as_ptr(),
            c("FLU").as_ptr(),
            c("src->hypo").as_ptr(),
            c("IST").as_ptr(),
            c(r#"{"src": "T.", "hypo": "S."}"#).as_ptr(),
            ptr::null(),
            &mut prefix,
            &mut target,
        );
        assert_eq!(status, GsStatus::Ok, "{}", last_error());
        assert_eq!(
            take(prefix),
            "Generate a fluent and grammatical summary for the following text:\n\nT. Tl;dr "
        );
        assert_eq!(take(target), "S.");
        let status = gs_render(
            t,
            c("Summ").as_ptr(),
            c("FLU").as_ptr(),
            c("sideways").as_ptr(),
            c("IST").as_ptr(),
            c("{}").as_ptr(),
            ptr::null(),
            &mut prefix,
            &mut target,
        );
        assert_eq!(status, GsStatus::InvalidArgument);

        let mut b = ptr::null_mut();
        assert_eq!(
            gs_backend_unigram(c("u").as_ptr(), c("a b b c").as_ptr(), &mut b),
            GsStatus::Ok
        );
        let (mut score, mut n) = (0.0, 0usize);
        let status = gs_score(
            b,
            t,
            c("Summ").as_ptr(),
            c("FLU").as_ptr(),
            c("src->hypo").as_ptr(),
            c("VAL").as_ptr(),
            c("a b").as_ptr(),
            ptr::null(),
            c("b c").as_ptr(),
            &mut score,
            &mut n,
        );
        assert_eq!(status, GsStatus::Ok, "{}", last_error());
        assert_eq!(n, 2);
        let want = ((3.0f64 / 7.0).ln() + (2.0f64 / 7.0).ln()) / 2.0;
        assert!((score - want).abs() < 1e-12, "{score} vs {want}");
        gs_backend_free(b);
        gs_templates_free(t);
    }
}

#[test]
fn backend_config_errors() {
    unsafe {
        let mut b = ptr::null_mut();
        let s = gs_backend_from_config(
            c(r#"{"kind": "fixture", "model_id": "m"}"#).as_ptr(),
            &mut b,
        );
        assert_eq!(s, GsStatus::Ok);
        gs_backend_free(b);
        let s = gs_backend_from_config(c(r#"{"kind": "http", "model_id": "m"}"#).as_ptr(), &mut b);
        assert_ne!(s, GsStatus::Ok);
        assert!(!last_error().is_empty());
        let s = gs_backend_from_config(c(r#"{"kind": "warp"}"#).as_ptr(), &mut b);
        assert_eq!(s, GsStatus::InvalidArgument);
    }
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/gptscore.h")
}

#[test]
fn header_declares_every_export() {
    let h = std::fs::read_to_string(header()).unwrap();
    let src =
        std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .split("extern \"C\" fn ")
        .skip(1)
        .map(|s| s.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 18);
    for name in exports {
        assert!(
            h.contains(&format!("{name}(")),
            "{name} missing from header"
        );
    }
    assert!(h.contains("typedef struct GsBackend GsBackend;"));
}

/// Compiles and runs a C program against the header and static library.
#[test]
fn c_program_links_and_runs() {
    let Some(cc) = ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok())
    else {
        eprintln!("no C compiler; skipping");
        return;
    };
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libgptscore_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("gptscore_smoke");
    let source = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/c/smoke.c");
    let status = Command::new(cc)
        .arg(&source)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let run = Command::new(&out).output().unwrap();
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}
