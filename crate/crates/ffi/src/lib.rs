//! C ABI over the analyzer and the candidate scorer.
//!
//! Handles are opaque pointers owned by the caller and released with the
//! matching `*_free` function. Every fallible call returns a [`KmStatus`];
//! on failure, [`km_last_error`] describes the error for the calling thread.
//! Strings returned through out-parameters are NUL-terminated UTF-8 and must
//! be released with [`km_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kinmorph::analyzer::{Analyzer, StemLexicon};
use kinmorph::constraints::ConstraintSet;
use kinmorph::features::FeatureVector;
use kinmorph::model::{Checkpoint, Mlp};
use kinmorph::morphotactics::Inventory;
use kinmorph::rewrite::RuleSet;
use kinmorph::Error;

/// Length of one candidate feature vector.
pub const KM_FEATURES: usize = 64;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Validation = 5,
    Domain = 6,
    InvalidArgument = 7,
    Panic = 8,
}

/// Opaque analyzer handle.
pub struct KmAnalyzer(Analyzer);

/// Opaque scorer handle.
pub struct KmModel(Mlp);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(KmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io(_) => KmStatus::Io,
            Error::Parse { .. } | Error::RuleSyntax { .. } | Error::Json(_) => KmStatus::Parse,
            Error::Validation(_) => KmStatus::Validation,
            Error::Domain(_) => KmStatus::Domain,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: KmStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> KmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            KmStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            KmStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(KmStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(KmStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn optional_text<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, what).map(Some)
    }
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| fail(KmStatus::Domain, "output contains NUL"))?;
    *out = c.into_raw();
    Ok(())
}

fn check_out<T>(out: *mut T) -> Result<(), Failure> {
    if out.is_null() {
        Err(fail(KmStatus::NullPointer, "output pointer is null"))
    } else {
        Ok(())
    }
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn km_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn km_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds an analyzer. Each source argument holds the text of the
/// corresponding resource file; null selects the built-in resource. With
/// `use_stem_lexicon` zero, stems are not checked against a lexicon.
///
/// # Safety
/// Non-null string arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn km_analyzer_new(
    inventory: *const c_char,
    rules: *const c_char,
    constraints: *const c_char,
    stems: *const c_char,
    use_stem_lexicon: i32,
    out: *mut *mut KmAnalyzer,
) -> KmStatus {
    guard(|| {
        check_out(out)?;
        let inventory = match optional_text(inventory, "inventory")? {
            Some(s) => Inventory::parse(s)?,
            None => Inventory::default_kinyarwanda(),
        };
        let rules = match optional_text(rules, "rules")? {
            Some(s) => RuleSet::parse(s)?,
            None => RuleSet::default_kinyarwanda(),
        };
        let constraints = match optional_text(constraints, "constraints")? {
            Some(s) => ConstraintSet::parse(s)?,
            None => ConstraintSet::default_kinyarwanda(),
        };
        let mut analyzer = Analyzer::new(inventory, rules, constraints);
        if use_stem_lexicon != 0 {
            analyzer = analyzer.with_stem_lexicon(match optional_text(stems, "stems")? {
                Some(s) => StemLexicon::parse(s),
                None => StemLexicon::default_kinyarwanda(),
            });
        }
        *out = Box::into_raw(Box::new(KmAnalyzer(analyzer)));
        Ok(())
    })
}

/// # Safety
/// `a` must come from [`km_analyzer_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn km_analyzer_free(a: *mut KmAnalyzer) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// Analyzes one word. On success `*out` holds one line per analysis:
/// the column serialization, the stem and the comma-separated indicator
/// numbers, tab-separated. `*count` receives the number of analyses.
///
/// # Safety
/// `a` must be a live handle, `word` NUL-terminated, `out` and `count`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn km_analyze(a: *const KmAnalyzer, word: *const c_char, out: *mut *mut c_char, count: *mut usize) -> KmStatus {
    guard(|| {
        check_out(out)?;
        check_out(count)?;
        let a = a.as_ref().ok_or_else(|| fail(KmStatus::NullPointer, "analyzer is null"))?;
        let word = text(word, "word")?;
        let segs = a.0.analyze(word);
        let mut lines = String::new();
        for s in &segs {
            lines.push_str(&format!("{}\t{}\t{}\n", s.serialize(), s.stem(), a.0.indicator_features(s)));
        }
        put_string(out, lines)?;
        *count = segs.len();
        Ok(())
    })
}

/// Renders a deep morpheme sequence (`"ku-som-a"`) to its surface form.
///
/// # Safety
/// As for [`km_analyze`].
#[no_mangle]
pub unsafe extern "C" fn km_surface(a: *const KmAnalyzer, deep: *const c_char, out: *mut *mut c_char) -> KmStatus {
    guard(|| {
        check_out(out)?;
        let a = a.as_ref().ok_or_else(|| fail(KmStatus::NullPointer, "analyzer is null"))?;
        let deep = kinmorph::rewrite::DeepMorpheme::parse_sequence(text(deep, "deep")?)?;
        put_string(out, a.0.rules().to_surface(&deep))
    })
}

/// Loads a scorer from checkpoint JSON text.
///
/// # Safety
/// `json` must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn km_model_from_json(json: *const c_char, out: *mut *mut KmModel) -> KmStatus {
    guard(|| {
        check_out(out)?;
        let model = Checkpoint::from_json(text(json, "json")?)?.model()?;
        *out = Box::into_raw(Box::new(KmModel(model)));
        Ok(())
    })
}

/// # Safety
/// `m` must come from [`km_model_from_json`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn km_model_free(m: *mut KmModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Scores `n` candidates laid out row-major in `features` (`n * 64`
/// finite values, normally in [0, 1]) and writes their softmax probabilities to `probs`.
///
/// # Safety
/// `features` must hold `n * 64` doubles and `probs` room for `n`.
#[no_mangle]
pub unsafe extern "C" fn km_model_predict(m: *const KmModel, features: *const f64, n: usize, probs: *mut f64) -> KmStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| fail(KmStatus::NullPointer, "model is null"))?;
        if features.is_null() || probs.is_null() {
            return Err(fail(KmStatus::NullPointer, "buffer is null"));
        }
        if n == 0 {
            return Err(fail(KmStatus::InvalidArgument, "no candidates"));
        }
        let flat = std::slice::from_raw_parts(features, n * KM_FEATURES);
        if let Some(i) = flat.iter().position(|v| !v.is_finite()) {
            return Err(fail(KmStatus::Validation, format!("feature {i} is not finite")));
        }
        let candidates = flat
            .chunks(KM_FEATURES)
            .map(|c| FeatureVector::new(c.to_vec()))
            .collect::<Result<Vec<_>, _>>()?;
        let p = m.0.predict(&candidates);
        std::slice::from_raw_parts_mut(probs, n).copy_from_slice(&p.probs);
        Ok(())
    })
}

/// The normalizing sigmoid `(1 + exp(-8 (z - min) / (max - min)))^-8`.
#[no_mangle]
pub extern "C" fn km_norm_sigmoid(z: f64, min: f64, max: f64) -> f64 {
    kinmorph::features::norm_sigmoid(z, min, max)
}
