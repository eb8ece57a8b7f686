//! C ABI over the trollspot toolkit.
//!
//! Conventions:
//! - Every fallible function returns a [`TsStatus`]; on failure a message is
//!   available from [`ts_last_error_message`] on the same thread.
//! - Objects are opaque handles created by `*_load`, `*_extract`, `*_train`
//!   or `*_fit` functions and released with the matching `*_free`.
//! - Strings returned to the caller are owned by the caller and must be
//!   released with [`ts_string_free`].
//! - Matrices are passed row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use ndarray::{Array2, ArrayView1};
use trollspot::cocluster::{self, CoclusterConfig, CoclusterModel};
use trollspot::config::PipelineConfig;
use trollspot::data::{self, FeatureMatrix, InputFormat};
use trollspot::features::extract_features;
use trollspot::learn::{self, ForestConfig, ForestModel, Model, TrainingSet};
use trollspot::linguistic::comment_stats;
use trollspot::pipeline::{self, Command};
use trollspot::social::SocialConfig;
use trollspot::temporal::{highly_active_hours, HourProfile};
use trollspot::{Corpus, Error};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument was out of range or not valid UTF-8.
    InvalidArgument = 2,
    /// Input data or configuration failed validation.
    Validation = 3,
    /// The operation failed while running.
    Runtime = 4,
    /// An internal panic was caught at the boundary.
    Panic = 5,
}

/// Loaded comment corpus.
pub struct TsCorpus(Corpus);

/// Users × features matrix.
pub struct TsFeatureMatrix(FeatureMatrix);

/// Trained classifier.
pub struct TsModel(Model);

/// Fitted co-clustering.
pub struct TsCocluster(CoclusterModel);

/// Per-comment text statistics.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TsCommentStats {
    pub words: u32,
    pub sentences: u32,
    pub capital_pct: f64,
    pub flesch_ease: f64,
    pub fk_grade: f64,
    pub ari: f64,
    pub urls: u32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn fail(status: TsStatus, message: impl Into<String>) -> TsStatus {
    set_error(message);
    status
}

fn from_error(e: Error) -> TsStatus {
    let status = if e.is_validation() {
        TsStatus::Validation
    } else {
        TsStatus::Runtime
    };
    fail(status, e.to_string())
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), TsStatus>) -> TsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TsStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(TsStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

trait IntoStatus<T> {
    fn status(self) -> Result<T, TsStatus>;
}

impl<T> IntoStatus<T> for trollspot::Result<T> {
    fn status(self) -> Result<T, TsStatus> {
        self.map_err(from_error)
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, TsStatus> {
    if p.is_null() {
        return Err(fail(TsStatus::NullPointer, format!("`{name}` is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        fail(
            TsStatus::InvalidArgument,
            format!("`{name}` is not valid UTF-8"),
        )
    })
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, TsStatus> {
    p.as_ref()
        .ok_or_else(|| fail(TsStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], TsStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(TsStatus::NullPointer, format!("`{name}` is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_arg<T>(p: *mut T, name: &str) -> Result<(), TsStatus> {
    if p.is_null() {
        return Err(fail(
            TsStatus::NullPointer,
            format!("output `{name}` is null"),
        ));
    }
    Ok(())
}

fn matrix_arg(values: &[f64], rows: usize, cols: usize) -> Result<Array2<f64>, TsStatus> {
    Array2::from_shape_vec((rows, cols), values.to_vec())
        .map_err(|e| fail(TsStatus::InvalidArgument, format!("matrix shape: {e}")))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

/// Library version as a static NUL-terminated string. Do not free.
#[no_mangle]
pub extern "C" fn ts_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Free with
/// [`ts_string_free`].
#[no_mangle]
pub extern "C" fn ts_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map_or(ptr::null_mut(), |s| s.clone().into_raw())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a pointer previously returned by this library and not
/// yet freed.
#[no_mangle]
pub unsafe extern "C" fn ts_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a corpus file. `format` is `"jsonl"` or `"csv"`.
///
/// # Safety
/// `path` and `format` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_corpus_load(
    path: *const c_char,
    format: *const c_char,
    out: *mut *mut TsCorpus,
) -> TsStatus {
    guard(|| {
        out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let format: InputFormat = str_arg(format, "format")?.parse().status()?;
        let corpus = data::ingest_corpus(path, format).status()?;
        *out = Box::into_raw(Box::new(TsCorpus(corpus)));
        Ok(())
    })
}

/// # Safety
/// `corpus` must be null or a live handle from [`ts_corpus_load`].
#[no_mangle]
pub unsafe extern "C" fn ts_corpus_free(corpus: *mut TsCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// Number of comments and distinct users in a corpus.
///
/// # Safety
/// `corpus` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_corpus_size(
    corpus: *const TsCorpus,
    comments: *mut usize,
    users: *mut usize,
) -> TsStatus {
    guard(|| {
        let c = &ref_arg(corpus, "corpus")?.0;
        out_arg(comments, "comments")?;
        out_arg(users, "users")?;
        *comments = c.len();
        *users = c.num_users();
        Ok(())
    })
}

/// Extracts the 73-column feature matrix with the default graph settings.
///
/// # Safety
/// `corpus` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_features_extract(
    corpus: *const TsCorpus,
    out: *mut *mut TsFeatureMatrix,
) -> TsStatus {
    guard(|| {
        let c = &ref_arg(corpus, "corpus")?.0;
        out_arg(out, "out")?;
        let m = extract_features(c, &SocialConfig::default()).status()?;
        *out = Box::into_raw(Box::new(TsFeatureMatrix(m)));
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_features_load(
    path: *const c_char,
    out: *mut *mut TsFeatureMatrix,
) -> TsStatus {
    guard(|| {
        out_arg(out, "out")?;
        let m = data::load_matrix(str_arg(path, "path")?).status()?;
        *out = Box::into_raw(Box::new(TsFeatureMatrix(m)));
        Ok(())
    })
}

/// # Safety
/// `matrix` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ts_features_save(
    matrix: *const TsFeatureMatrix,
    path: *const c_char,
) -> TsStatus {
    guard(|| {
        let m = &ref_arg(matrix, "matrix")?.0;
        data::save_matrix(m, str_arg(path, "path")?).status()
    })
}

/// # Safety
/// `matrix` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_features_shape(
    matrix: *const TsFeatureMatrix,
    rows: *mut usize,
    cols: *mut usize,
) -> TsStatus {
    guard(|| {
        let m = &ref_arg(matrix, "matrix")?.0;
        out_arg(rows, "rows")?;
        out_arg(cols, "cols")?;
        *rows = m.nrows();
        *cols = m.ncols();
        Ok(())
    })
}

/// Copies the values row-major into `out`, which must hold `rows * cols`
/// doubles (`len`).
///
/// # Safety
/// `matrix` must be a live handle; `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ts_features_values(
    matrix: *const TsFeatureMatrix,
    out: *mut f64,
    len: usize,
) -> TsStatus {
    guard(|| {
        let m = &ref_arg(matrix, "matrix")?.0;
        out_arg(out, "out")?;
        if len != m.nrows() * m.ncols() {
            return Err(fail(
                TsStatus::InvalidArgument,
                format!("buffer holds {len}, need {}", m.nrows() * m.ncols()),
            ));
        }
        let dst = std::slice::from_raw_parts_mut(out, len);
        for (d, v) in dst.iter_mut().zip(m.values().iter()) {
            *d = *v;
        }
        Ok(())
    })
}

/// Name of column `col`. Free with [`ts_string_free`].
///
/// # Safety
/// `matrix` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_features_column_name(
    matrix: *const TsFeatureMatrix,
    col: usize,
    out: *mut *mut c_char,
) -> TsStatus {
    guard(|| {
        let m = &ref_arg(matrix, "matrix")?.0;
        out_arg(out, "out")?;
        let name = m.names().get(col).ok_or_else(|| {
            fail(
                TsStatus::InvalidArgument,
                format!("column {col} out of range"),
            )
        })?;
        *out = into_c_string(name.clone());
        Ok(())
    })
}

/// Id of the user in row `row`. Free with [`ts_string_free`].
///
/// # Safety
/// `matrix` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_features_user(
    matrix: *const TsFeatureMatrix,
    row: usize,
    out: *mut *mut c_char,
) -> TsStatus {
    guard(|| {
        let m = &ref_arg(matrix, "matrix")?.0;
        out_arg(out, "out")?;
        let user = m
            .users()
            .get(row)
            .ok_or_else(|| fail(TsStatus::InvalidArgument, format!("row {row} out of range")))?;
        *out = into_c_string(user.clone());
        Ok(())
    })
}

/// # Safety
/// `matrix` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ts_features_free(matrix: *mut TsFeatureMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// Trains a random forest on `rows × cols` values and integer labels in
/// `0..n_classes`.
///
/// # Safety
/// `x` must point to `rows * cols` doubles, `y` to `rows` labels, and `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_forest_train(
    x: *const f64,
    y: *const u32,
    rows: usize,
    cols: usize,
    n_classes: usize,
    n_trees: usize,
    seed: u64,
    out: *mut *mut TsModel,
) -> TsStatus {
    guard(|| {
        out_arg(out, "out")?;
        let values = matrix_arg(slice_arg(x, rows * cols, "x")?, rows, cols)?;
        let labels: Vec<usize> = slice_arg(y, rows, "y")?
            .iter()
            .map(|&v| v as usize)
            .collect();
        let data = TrainingSet::unnamed(values, labels, n_classes).status()?;
        let config = ForestConfig {
            n_trees,
            seed,
            ..ForestConfig::default()
        };
        let model = ForestModel::fit(&data, &config).status()?;
        *out = Box::into_raw(Box::new(TsModel(Model::Forest(model))));
        Ok(())
    })
}

/// Class probabilities for one row of `cols` values, written to `out`
/// (`n_classes` doubles).
///
/// # Safety
/// `model` must be a live handle; `row` must point to `cols` doubles and
/// `out` to `n_classes` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ts_model_predict_proba(
    model: *const TsModel,
    row: *const f64,
    cols: usize,
    out: *mut f64,
    n_classes: usize,
) -> TsStatus {
    guard(|| {
        let m = &ref_arg(model, "model")?.0;
        out_arg(out, "out")?;
        let expected = match m {
            Model::Forest(f) => f.feature_names().len(),
            Model::Svm(_) => cols,
        };
        if cols != expected {
            return Err(fail(
                TsStatus::InvalidArgument,
                format!("row has {cols} values, model expects {expected}"),
            ));
        }
        if n_classes != m.n_classes() {
            return Err(fail(
                TsStatus::InvalidArgument,
                format!("model has {} classes", m.n_classes()),
            ));
        }
        let values = slice_arg(row, cols, "row")?;
        let proba = m.predict_proba(ArrayView1::from(values));
        std::slice::from_raw_parts_mut(out, n_classes).copy_from_slice(&proba);
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ts_model_save(model: *const TsModel, path: *const c_char) -> TsStatus {
    guard(|| {
        let m = &ref_arg(model, "model")?.0;
        m.save(str_arg(path, "path")?).status()
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_model_load(path: *const c_char, out: *mut *mut TsModel) -> TsStatus {
    guard(|| {
        out_arg(out, "out")?;
        let m = Model::load(str_arg(path, "path")?).status()?;
        *out = Box::into_raw(Box::new(TsModel(m)));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ts_model_free(model: *mut TsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Area under the ROC curve; `labels[i]` nonzero marks a positive.
///
/// # Safety
/// `scores` and `labels` must point to `n` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_auc(
    scores: *const f64,
    labels: *const u8,
    n: usize,
    out: *mut f64,
) -> TsStatus {
    guard(|| {
        out_arg(out, "out")?;
        let s = slice_arg(scores, n, "scores")?;
        let l: Vec<bool> = slice_arg(labels, n, "labels")?
            .iter()
            .map(|&v| v != 0)
            .collect();
        *out = learn::auc(s, &l).status()?;
        Ok(())
    })
}

/// Smallest number of hours holding more than half of the 24 hourly counts.
///
/// # Safety
/// `counts` must point to 24 values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_highly_active_hours(counts: *const u64, out: *mut u32) -> TsStatus {
    guard(|| {
        out_arg(out, "out")?;
        let c = slice_arg(counts, 24, "counts")?;
        let mut profile = HourProfile::default();
        profile.counts.copy_from_slice(c);
        *out = highly_active_hours(&profile);
        Ok(())
    })
}

/// # Safety
/// `text` must be a NUL-terminated UTF-8 string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_comment_stats(
    text: *const c_char,
    out: *mut TsCommentStats,
) -> TsStatus {
    guard(|| {
        out_arg(out, "out")?;
        let s = comment_stats(str_arg(text, "text")?);
        *out = TsCommentStats {
            words: s.words,
            sentences: s.sentences,
            capital_pct: s.capital_pct,
            flesch_ease: s.flesch_ease,
            fk_grade: s.fk_grade,
            ari: s.ari,
            urls: s.urls,
        };
        Ok(())
    })
}

/// Fits a sparse nonnegative co-clustering of a `rows × cols` matrix.
///
/// # Safety
/// `x` must point to `rows * cols` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_cocluster_fit(
    x: *const f64,
    rows: usize,
    cols: usize,
    rank: usize,
    lambda: f64,
    seed: u64,
    out: *mut *mut TsCocluster,
) -> TsStatus {
    guard(|| {
        out_arg(out, "out")?;
        let values = matrix_arg(slice_arg(x, rows * cols, "x")?, rows, cols)?;
        let config = CoclusterConfig {
            rank,
            lambda,
            seed,
            ..CoclusterConfig::default()
        };
        let model = cocluster::fit(&values, &config).status()?;
        *out = Box::into_raw(Box::new(TsCocluster(model)));
        Ok(())
    })
}

/// Rank and final objective value.
///
/// # Safety
/// `model` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_cocluster_info(
    model: *const TsCocluster,
    rank: *mut usize,
    objective: *mut f64,
) -> TsStatus {
    guard(|| {
        let m = &ref_arg(model, "model")?.0;
        out_arg(rank, "rank")?;
        out_arg(objective, "objective")?;
        *rank = m.rank();
        *objective = m.final_objective();
        Ok(())
    })
}

/// Copies the membership matrix A (`rows × rank`, row-major) into `out`.
///
/// # Safety
/// `model` must be a live handle; `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ts_cocluster_membership(
    model: *const TsCocluster,
    out: *mut f64,
    len: usize,
) -> TsStatus {
    guard(|| {
        let m = &ref_arg(model, "model")?.0;
        out_arg(out, "out")?;
        if len != m.a.len() {
            return Err(fail(
                TsStatus::InvalidArgument,
                format!("buffer holds {len}, need {}", m.a.len()),
            ));
        }
        let dst = std::slice::from_raw_parts_mut(out, len);
        for (d, v) in dst.iter_mut().zip(m.a.iter()) {
            *d = *v;
        }
        Ok(())
    })
}

/// Whether row `user` is a member of cluster `cluster` under the model's
/// membership threshold.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_cocluster_is_member(
    model: *const TsCocluster,
    user: usize,
    cluster: usize,
    out: *mut bool,
) -> TsStatus {
    guard(|| {
        let m = &ref_arg(model, "model")?.0;
        out_arg(out, "out")?;
        if user >= m.a.nrows() || cluster >= m.rank() {
            return Err(fail(TsStatus::InvalidArgument, "index out of range"));
        }
        *out = m.a[[user, cluster]] > m.user_threshold();
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ts_cocluster_free(model: *mut TsCocluster) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Runs a pipeline command (`ingest`, `features`, `stats`, `experiment`,
/// `cocluster` or `synth`) with a config file, as the CLI does. When
/// `has_seed` is false the config file's seed is used. `out_dir` may be null.
///
/// # Safety
/// `command` and `config_path` must be NUL-terminated strings; `out_dir` must
/// be null or a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ts_run_command(
    command: *const c_char,
    config_path: *const c_char,
    has_seed: bool,
    seed: u64,
    out_dir: *const c_char,
) -> TsStatus {
    guard(|| {
        let command: Command = str_arg(command, "command")?.parse().status()?;
        let mut cfg = PipelineConfig::load(
            str_arg(config_path, "config_path")?,
            has_seed.then_some(seed),
        )
        .status()?;
        if !out_dir.is_null() {
            cfg.out = PathBuf::from(str_arg(out_dir, "out_dir")?);
        }
        pipeline::run(command, &cfg).status().map(|_| ())
    })
}
