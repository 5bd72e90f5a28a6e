//! C ABI over the `gptscore` library.
//!
//! Every fallible function returns a [`GsStatus`]; on failure a message is
//! available from [`gs_last_error`] on the same thread. Objects are opaque
//! handles released with their matching `*_free` function. Strings returned
//! through `char **` out-parameters are owned by the caller and released with
//! [`gs_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use gptscore::aspects::{builtin_registry, AspectRegistry};
use gptscore::backend::{BackendConfig, LogprobBackend, TokenScore, UnigramBackend};
use gptscore::baselines::RougeVariant;
use gptscore::datasets::{GenSample, SystemOutput};
use gptscore::metaeval::{pearson, spearman};
use gptscore::prompt::{builtin_templates, render_bindings, Demonstration, TemplateRegistry};
use gptscore::scoring::{gptscore, Scorer};
use gptscore::{Direction, Error, ExitCode, Setting, Task};

/// Result of a call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsStatus {
    Ok = 0,
    /// Null pointer, invalid UTF-8, unknown enum name or out-of-range value.
    InvalidArgument = 1,
    /// Unknown aspect or missing template.
    NotFound = 2,
    /// Malformed data or JSON.
    Data = 3,
    /// Transport or logprob failure from a backend.
    Backend = 4,
    /// Correlation of a constant vector.
    Degenerate = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

/// Precision, recall and F1 of a ROUGE comparison.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GsRouge {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub struct GsAspectRegistry(AspectRegistry);

pub struct GsTemplates(TemplateRegistry);

pub struct GsBackend(Arc<dyn LogprobBackend>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> GsStatus {
    match e {
        Error::Usage(_) | Error::OutOfRange { .. } => GsStatus::InvalidArgument,
        Error::UnknownAspect(_) | Error::MissingTemplate { .. } => GsStatus::NotFound,
        Error::Degenerate(_) => GsStatus::Degenerate,
        _ if e.exit_code() == ExitCode::Backend => GsStatus::Backend,
        _ => GsStatus::Data,
    }
}

struct Fail(GsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(GsStatus::InvalidArgument, msg.into())
}

/// Runs `f`, recording any failure or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> GsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GsStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            GsStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(invalid(format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{name} is not valid UTF-8")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, name: &str) -> Result<Option<&'a str>, Fail> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, name).map(Some)
    }
}

unsafe fn slice_arg<'a, T>(p: *const T, n: usize, name: &str) -> Result<&'a [T], Fail> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(invalid(format!("{name} is null")));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| invalid(format!("{name} is null")))
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| invalid(format!("{name} is null")))
}

fn parsed<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T, Fail> {
    s.parse().map_err(|e: Error| invalid(e.to_string()))
}

fn c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail(GsStatus::Data, "string contains a NUL byte".into()))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn gs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn gs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn gs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Pearson correlation of `x` and `y`, both of length `n`.
///
/// # Safety
/// `x` and `y` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_pearson(
    x: *const f64,
    y: *const f64,
    n: usize,
    out: *mut f64,
) -> GsStatus {
    guard(|| {
        *out_arg(out, "out")? = pearson(slice_arg(x, n, "x")?, slice_arg(y, n, "y")?)?;
        Ok(())
    })
}

/// Spearman rank correlation of `x` and `y`, both of length `n`.
///
/// # Safety
/// As for [`gs_pearson`].
#[no_mangle]
pub unsafe extern "C" fn gs_spearman(
    x: *const f64,
    y: *const f64,
    n: usize,
    out: *mut f64,
) -> GsStatus {
    guard(|| {
        *out_arg(out, "out")? = spearman(slice_arg(x, n, "x")?, slice_arg(y, n, "y")?)?;
        Ok(())
    })
}

/// GPTScore of `n` target-token logprobs: their mean.
///
/// # Safety
/// `logprobs` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_gptscore(logprobs: *const f64, n: usize, out: *mut f64) -> GsStatus {
    guard(|| {
        let toks: Vec<TokenScore> = slice_arg(logprobs, n, "logprobs")?
            .iter()
            .enumerate()
            .map(|(i, &l)| TokenScore {
                token: String::new(),
                logprob: l,
                offset: i,
            })
            .collect();
        *out_arg(out, "out")? = gptscore(&toks)?;
        Ok(())
    })
}

/// ROUGE of `hypo` against `reference`. `variant` is 1 or 2 for ROUGE-N and
/// 0 for ROUGE-L.
///
/// # Safety
/// Strings must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_rouge(
    hypo: *const c_char,
    reference: *const c_char,
    variant: c_int,
    out: *mut GsRouge,
) -> GsStatus {
    guard(|| {
        let v = match variant {
            0 => RougeVariant::RougeL,
            1 => RougeVariant::Rouge1,
            2 => RougeVariant::Rouge2,
            other => return Err(invalid(format!("unknown ROUGE variant {other}"))),
        };
        let r = v.score(str_arg(hypo, "hypo")?, str_arg(reference, "reference")?);
        *out_arg(out, "out")? = GsRouge {
            precision: r.precision,
            recall: r.recall,
            f1: r.f1,
        };
        Ok(())
    })
}

/// The built-in aspect registry.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_aspects_builtin(out: *mut *mut GsAspectRegistry) -> GsStatus {
    guard(|| {
        *out_arg(out, "out")? = boxed(GsAspectRegistry(builtin_registry()));
        Ok(())
    })
}

/// An aspect registry parsed from JSON.
///
/// # Safety
/// `json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_aspects_from_json(
    json: *const c_char,
    out: *mut *mut GsAspectRegistry,
) -> GsStatus {
    guard(|| {
        let reg = AspectRegistry::from_json(str_arg(json, "json")?)?;
        *out_arg(out, "out")? = boxed(GsAspectRegistry(reg));
        Ok(())
    })
}

/// # Safety
/// `reg` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gs_aspects_free(reg: *mut GsAspectRegistry) {
    if !reg.is_null() {
        drop(Box::from_raw(reg));
    }
}

/// Definition of `target` with `extras` merged in.
///
/// # Safety
/// `extras` must point to `n_extras` NUL-terminated strings; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn gs_compose_definition(
    reg: *const GsAspectRegistry,
    target: *const c_char,
    extras: *const *const c_char,
    n_extras: usize,
    out: *mut *mut c_char,
) -> GsStatus {
    guard(|| {
        let reg = handle(reg, "reg")?;
        let extras = slice_arg(extras, n_extras, "extras")?
            .iter()
            .map(|&p| str_arg(p, "extra"))
            .collect::<Result<Vec<_>, _>>()?;
        let s = reg
            .0
            .compose_definition(str_arg(target, "target")?, &extras)?;
        *out_arg(out, "out")? = c_string(s)?;
        Ok(())
    })
}

/// The built-in prompt templates.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_templates_builtin(out: *mut *mut GsTemplates) -> GsStatus {
    guard(|| {
        *out_arg(out, "out")? = boxed(GsTemplates(builtin_templates()));
        Ok(())
    })
}

/// Templates parsed from JSON.
///
/// # Safety
/// `json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_templates_from_json(
    json: *const c_char,
    out: *mut *mut GsTemplates,
) -> GsStatus {
    guard(|| {
        let t = TemplateRegistry::from_json(str_arg(json, "json")?)?;
        *out_arg(out, "out")? = boxed(GsTemplates(t));
        Ok(())
    })
}

/// # Safety
/// `t` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gs_templates_free(t: *mut GsTemplates) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Renders a template. `bindings_json` is an object of placeholder values
/// such as `{"src": "...", "hypo": "..."}`; `demos_json` is null or an array
/// of such objects. The scored prompt is `*prefix_out` followed by
/// `*target_out`.
///
/// # Safety
/// Strings must be NUL-terminated; out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_render(
    templates: *const GsTemplates,
    task: *const c_char,
    aspect: *const c_char,
    direction: *const c_char,
    setting: *const c_char,
    bindings_json: *const c_char,
    demos_json: *const c_char,
    prefix_out: *mut *mut c_char,
    target_out: *mut *mut c_char,
) -> GsStatus {
    guard(|| {
        let t = handle(templates, "templates")?;
        let tpl = t.0.get(
            parsed::<Task>(str_arg(task, "task")?)?,
            str_arg(aspect, "aspect")?,
            parsed::<Direction>(str_arg(direction, "direction")?)?,
        )?;
        let setting = parsed::<Setting>(str_arg(setting, "setting")?)?;
        let values =
            serde_json::from_str(str_arg(bindings_json, "bindings_json")?).map_err(Error::from)?;
        let demos: Vec<Demonstration> = match opt_str_arg(demos_json, "demos_json")? {
            Some(j) => serde_json::from_str::<Vec<_>>(j)
                .map_err(Error::from)?
                .into_iter()
                .map(|bindings| Demonstration { bindings })
                .collect(),
            None => Vec::new(),
        };
        let p = render_bindings(tpl, setting, &values, &demos)?;
        let prefix_out = out_arg(prefix_out, "prefix_out")?;
        let target_out = out_arg(target_out, "target_out")?;
        let prefix = c_string(p.prefix)?;
        match c_string(p.target) {
            Ok(target) => {
                *prefix_out = prefix;
                *target_out = target;
                Ok(())
            }
            Err(e) => {
                gs_string_free(prefix);
                Err(e)
            }
        }
    })
}

/// A backend described by a JSON backend config (kind, model_id,
/// endpoint_url, cache_dir, ...).
///
/// # Safety
/// `config_json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_backend_from_config(
    config_json: *const c_char,
    out: *mut *mut GsBackend,
) -> GsStatus {
    guard(|| {
        let cfg: BackendConfig = serde_json::from_str(str_arg(config_json, "config_json")?)
            .map_err(|e| invalid(e.to_string()))?;
        *out_arg(out, "out")? = boxed(GsBackend(cfg.build()?));
        Ok(())
    })
}

/// An add-one smoothed unigram model estimated from `corpus`.
///
/// # Safety
/// Strings must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_backend_unigram(
    model_id: *const c_char,
    corpus: *const c_char,
    out: *mut *mut GsBackend,
) -> GsStatus {
    guard(|| {
        let b =
            UnigramBackend::from_corpus(str_arg(model_id, "model_id")?, str_arg(corpus, "corpus")?);
        *out_arg(out, "out")? = boxed(GsBackend(Arc::new(b)));
        Ok(())
    })
}

/// # Safety
/// `b` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gs_backend_free(b: *mut GsBackend) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// Scores one hypothesis. `source` and `reference` may be null when the
/// template does not use them. Writes the GPTScore and the number of target
/// tokens.
///
/// # Safety
/// Handles must be live; strings NUL-terminated; out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn gs_score(
    backend: *const GsBackend,
    templates: *const GsTemplates,
    task: *const c_char,
    aspect: *const c_char,
    direction: *const c_char,
    setting: *const c_char,
    source: *const c_char,
    reference: *const c_char,
    hypothesis: *const c_char,
    score_out: *mut f64,
    tokens_out: *mut usize,
) -> GsStatus {
    guard(|| {
        let backend = handle(backend, "backend")?;
        let templates = handle(templates, "templates")?;
        let task = parsed::<Task>(str_arg(task, "task")?)?;
        let output = SystemOutput {
            system_id: "ffi".into(),
            text: str_arg(hypothesis, "hypothesis")?.to_string(),
            human_scores: Default::default(),
        };
        let sample = GenSample {
            sample_id: "ffi".into(),
            task,
            source: opt_str_arg(source, "source")?
                .unwrap_or_default()
                .to_string(),
            references: opt_str_arg(reference, "reference")?
                .map(|r| vec![r.to_string()])
                .unwrap_or_default(),
            outputs: vec![output.clone()],
        };
        let rec = Scorer::new(backend.0.as_ref(), &templates.0).score_output(
            &sample,
            &output,
            str_arg(aspect, "aspect")?,
            parsed::<Direction>(str_arg(direction, "direction")?)?,
            parsed::<Setting>(str_arg(setting, "setting")?)?,
            &[],
        )?;
        let score_out = out_arg(score_out, "score_out")?;
        *score_out = rec.value;
        if let Some(t) = tokens_out.as_mut() {
            *t = rec.token_count;
        }
        Ok(())
    })
}
