//! C ABI for compdist.
//!
//! Every fallible function returns a [`CdStatus`]; on anything other than
//! `CD_STATUS_OK` a description is available from [`cd_last_error`] on the
//! same thread. Objects are handed out as opaque pointers and must be
//! released with the matching `*_free` function. Matrices cross the boundary
//! as row-major `double` arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use compdist::compose::{
    compose_copy_object, compose_copy_subject, compose_frobenius, compose_relational, compose_verb_object,
    FrobeniusMode, Rep,
};
use compdist::eval::spearman_rho;
use compdist::pregroup::{parse_type, reduce};
use compdist::semspace::SemanticSpace;
use compdist::tensors::{
    build_relational, build_separable, entanglement_score, rank1_approx, train_regression, ArgumentPairs,
    RegressionConfig, RegressionExample, VerbMatrix, VerbMethod,
};
use compdist::Error;
use nalgebra::{DMatrix, DVector};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotFound = 4,
    NotReducible = 5,
    Io = 6,
    Parse = 7,
    Numeric = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdVerbMethod {
    Relational = 0,
    Separable = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdModel {
    Relational = 0,
    CopySubject = 1,
    CopyObject = 2,
    FrobAdd = 3,
    FrobMul = 4,
    FrobTensor = 5,
    VerbObject = 6,
}

/// A loaded semantic space.
pub struct CdSpace(SemanticSpace);

/// A square verb matrix.
pub struct CdVerbMatrix(VerbMatrix);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(CdStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::UnknownAtom(_) | Error::MalformedType { .. } | Error::Parse { .. } | Error::Json { .. } => {
                CdStatus::Parse
            }
            Error::NotReducible { .. } => CdStatus::NotReducible,
            Error::DimensionMismatch { .. } | Error::ShapeMismatch(_) | Error::ArityMismatch(_) => {
                CdStatus::DimensionMismatch
            }
            Error::MissingVerb { .. } => CdStatus::NotFound,
            Error::Io { .. } => CdStatus::Io,
            Error::ZeroMatrix
            | Error::DegenerateMatrix
            | Error::SvdFailed(_)
            | Error::Diverged { .. }
            | Error::UndefinedCorrelation(_) => CdStatus::Numeric,
            _ => CdStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn fail<T>(status: CdStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

/// Runs `f`, records any error or panic, and returns its status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CdStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            CdStatus::Panic
        }
    }
}

unsafe fn nonnull<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(CdStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(CdStatus::NullPointer, format!("`{name}` is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(CdStatus::InvalidArgument, format!("`{name}` is not UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return fail(CdStatus::NullPointer, format!("`{name}` is null"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return fail(CdStatus::NullPointer, format!("`{name}` is null"));
    }
    out.write(value);
    Ok(())
}

unsafe fn copy_out(values: &[f64], out: *mut f64, out_len: usize) -> Result<(), Failure> {
    if out_len < values.len() {
        return fail(
            CdStatus::BufferTooSmall,
            format!("need {} doubles, buffer holds {out_len}", values.len()),
        );
    }
    if out.is_null() {
        return fail(CdStatus::NullPointer, "`out` is null");
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

fn vectors(flat: &[f64], dim: usize) -> Vec<DVector<f64>> {
    flat.chunks_exact(dim).map(DVector::from_column_slice).collect()
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Message for the most recent failure on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Loads a space written by `compdist build-space` (or any `word<TAB>v1...`
/// file).
///
/// # Safety
/// `path` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cd_space_load(path: *const c_char, out: *mut *mut CdSpace) -> CdStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let space = SemanticSpace::load(Path::new(path))?;
        write_out(out, boxed(CdSpace(space)), "out")
    })
}

/// # Safety
/// `space` must come from [`cd_space_load`] and not be freed already. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn cd_space_free(space: *mut CdSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Vector dimension, or 0 for a null handle.
///
/// # Safety
/// `space` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cd_space_dim(space: *const CdSpace) -> usize {
    space.as_ref().map_or(0, |s| s.0.dim())
}

/// Copies the vector of `word` into `out`, which must hold `dim` doubles.
///
/// # Safety
/// `space` must be a live handle, `word` nul-terminated and `out` valid for
/// `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cd_space_vector(
    space: *const CdSpace,
    word: *const c_char,
    out: *mut f64,
    out_len: usize,
) -> CdStatus {
    guard(|| {
        let space = nonnull(space, "space")?;
        let word = str_arg(word, "word")?;
        match space.0.get(word) {
            Some(v) => copy_out(v.as_slice(), out, out_len),
            None => fail(CdStatus::NotFound, format!("`{word}` is not in the space")),
        }
    })
}

/// Wraps a row-major `dim × dim` array as a verb matrix.
///
/// # Safety
/// `verb` must be nul-terminated, `data` valid for `dim * dim` doubles and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cd_verb_from_data(
    verb: *const c_char,
    data: *const f64,
    dim: usize,
    out: *mut *mut CdVerbMatrix,
) -> CdStatus {
    guard(|| {
        let verb = str_arg(verb, "verb")?;
        let data = slice_arg(data, dim * dim, "data")?;
        let m = VerbMatrix::new(verb, DMatrix::from_row_slice(dim, dim, data), VerbMethod::Relational)?;
        write_out(out, boxed(CdVerbMatrix(m)), "out")
    })
}

/// Builds a verb matrix from `n_pairs` subject/object vectors stored back to
/// back in `subjects` and `objects`.
///
/// # Safety
/// `subjects` and `objects` must each be valid for `n_pairs * dim` doubles;
/// `verb` nul-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cd_verb_build(
    verb: *const c_char,
    subjects: *const f64,
    objects: *const f64,
    n_pairs: usize,
    dim: usize,
    method: CdVerbMethod,
    out: *mut *mut CdVerbMatrix,
) -> CdStatus {
    guard(|| {
        let verb = str_arg(verb, "verb")?;
        if dim == 0 {
            return fail(CdStatus::InvalidArgument, "`dim` must be positive");
        }
        let subjects = slice_arg(subjects, n_pairs * dim, "subjects")?;
        let objects = slice_arg(objects, n_pairs * dim, "objects")?;
        let pairs = vectors(subjects, dim).into_iter().zip(vectors(objects, dim)).collect();
        let args = ArgumentPairs::from_vectors(verb, pairs);
        let m = match method {
            CdVerbMethod::Relational => build_relational(&args)?,
            CdVerbMethod::Separable => build_separable(&args)?,
        };
        write_out(out, boxed(CdVerbMatrix(m)), "out")
    })
}

/// Trains a verb matrix so that `V · input_i ≈ target_i` by gradient
/// descent. A non-positive `learning_rate` picks the default step size, and a
/// zero `max_epochs` the default epoch budget.
///
/// # Safety
/// `inputs` and `targets` must each be valid for `n * dim` doubles; `verb`
/// nul-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cd_verb_train_regression(
    verb: *const c_char,
    inputs: *const f64,
    targets: *const f64,
    n: usize,
    dim: usize,
    learning_rate: f64,
    max_epochs: usize,
    tolerance: f64,
    out: *mut *mut CdVerbMatrix,
) -> CdStatus {
    guard(|| {
        let verb = str_arg(verb, "verb")?;
        if dim == 0 {
            return fail(CdStatus::InvalidArgument, "`dim` must be positive");
        }
        let inputs = slice_arg(inputs, n * dim, "inputs")?;
        let targets = slice_arg(targets, n * dim, "targets")?;
        let examples: Vec<RegressionExample> = vectors(inputs, dim)
            .into_iter()
            .zip(vectors(targets, dim))
            .map(|(input, target)| RegressionExample { input, target })
            .collect();
        let defaults = RegressionConfig::default();
        let config = RegressionConfig {
            learning_rate: (learning_rate > 0.0).then_some(learning_rate),
            max_epochs: if max_epochs == 0 {
                defaults.max_epochs
            } else {
                max_epochs
            },
            tolerance,
            ..defaults
        };
        let fit = train_regression(verb, &examples, &config)?;
        write_out(out, boxed(CdVerbMatrix(fit.matrix)), "out")
    })
}

/// Best rank-1 approximation of `verb` as a new handle.
///
/// # Safety
/// `verb` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cd_verb_rank1(verb: *const CdVerbMatrix, out: *mut *mut CdVerbMatrix) -> CdStatus {
    guard(|| {
        let verb = nonnull(verb, "verb")?;
        write_out(out, boxed(CdVerbMatrix(rank1_approx(&verb.0)?)), "out")
    })
}

/// Cosine between the matrix and its rank-1 approximation.
///
/// # Safety
/// `verb` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cd_verb_entanglement(verb: *const CdVerbMatrix, out: *mut f64) -> CdStatus {
    guard(|| {
        let verb = nonnull(verb, "verb")?;
        write_out(out, entanglement_score(&verb.0)?, "out")
    })
}

/// Side length of the matrix, or 0 for a null handle.
///
/// # Safety
/// `verb` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cd_verb_dim(verb: *const CdVerbMatrix) -> usize {
    verb.as_ref().map_or(0, |v| v.0.dim())
}

/// Copies the matrix in row-major order into `out` (`dim * dim` doubles).
///
/// # Safety
/// `verb` must be a live handle and `out` valid for `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cd_verb_data(verb: *const CdVerbMatrix, out: *mut f64, out_len: usize) -> CdStatus {
    guard(|| {
        let verb = nonnull(verb, "verb")?;
        copy_out(&row_major(&verb.0.data), out, out_len)
    })
}

/// # Safety
/// `verb` must come from one of the `cd_verb_*` constructors and not be
/// freed already. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cd_verb_free(verb: *mut CdVerbMatrix) {
    if !verb.is_null() {
        drop(Box::from_raw(verb));
    }
}

/// Composes a sentence and writes its representation to `out`. Vector
/// models write `dim` doubles; `CD_MODEL_RELATIONAL` and
/// `CD_MODEL_FROB_TENSOR` write a row-major `dim × dim` matrix.
/// `CD_MODEL_VERB_OBJECT` ignores `subject`, which may be null. The number
/// of doubles written goes to `written` when it is not null.
///
/// # Safety
/// `subject` (unless ignored) and `object` must be valid for `dim` doubles,
/// `verb` a live handle and `out` valid for `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cd_compose(
    model: CdModel,
    subject: *const f64,
    verb: *const CdVerbMatrix,
    object: *const f64,
    dim: usize,
    out: *mut f64,
    out_len: usize,
    written: *mut usize,
) -> CdStatus {
    guard(|| {
        let verb = &nonnull(verb, "verb")?.0;
        let obj = DVector::from_column_slice(slice_arg(object, dim, "object")?);
        let rep = if model == CdModel::VerbObject {
            compose_verb_object(verb, &obj)?
        } else {
            let subj = DVector::from_column_slice(slice_arg(subject, dim, "subject")?);
            match model {
                CdModel::Relational => compose_relational(&subj, verb, &obj)?,
                CdModel::CopySubject => compose_copy_subject(&subj, verb, &obj)?,
                CdModel::CopyObject => compose_copy_object(&subj, verb, &obj)?,
                CdModel::FrobAdd => compose_frobenius(&subj, verb, &obj, FrobeniusMode::Additive)?,
                CdModel::FrobMul => compose_frobenius(&subj, verb, &obj, FrobeniusMode::Multiplicative)?,
                CdModel::FrobTensor => compose_frobenius(&subj, verb, &obj, FrobeniusMode::Tensored)?,
                CdModel::VerbObject => unreachable!(),
            }
        };
        let values = match &rep.value {
            Rep::Vec(v) => v.as_slice().to_vec(),
            Rep::Mat(m) => row_major(m),
        };
        copy_out(&values, out, out_len)?;
        if !written.is_null() {
            written.write(values.len());
        }
        Ok(())
    })
}

/// Cosine of two equal-length arrays (matrices compare flattened).
///
/// # Safety
/// `a` and `b` must be valid for `len` doubles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cd_cosine(a: *const f64, b: *const f64, len: usize, out: *mut f64) -> CdStatus {
    guard(|| {
        let a = DVector::from_column_slice(slice_arg(a, len, "a")?);
        let b = DVector::from_column_slice(slice_arg(b, len, "b")?);
        let (na, nb) = (a.norm(), b.norm());
        if na == 0.0 || nb == 0.0 {
            return fail(CdStatus::Numeric, "cosine of a zero vector is undefined");
        }
        write_out(out, a.dot(&b) / (na * nb), "out")
    })
}

/// Spearman's ρ with tie-averaged ranks.
///
/// # Safety
/// `xs` and `ys` must be valid for `n` doubles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cd_spearman(xs: *const f64, ys: *const f64, n: usize, out: *mut f64) -> CdStatus {
    guard(|| {
        let xs = slice_arg(xs, n, "xs")?;
        let ys = slice_arg(ys, n, "ys")?;
        write_out(out, spearman_rho(xs, ys)?, "out")
    })
}

/// Checks that the word types, e.g. `"n"`, `"n^r·s·n^l"`, reduce to
/// `target`. On success the number of contraction steps goes to `steps`
/// when it is not null; otherwise `CD_STATUS_NOT_REDUCIBLE` is returned.
///
/// # Safety
/// `types` must point to `n` nul-terminated strings and `target` be
/// nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn cd_pregroup_reduce(
    types: *const *const c_char,
    n: usize,
    target: *const c_char,
    steps: *mut usize,
) -> CdStatus {
    guard(|| {
        if n > 0 && types.is_null() {
            return fail(CdStatus::NullPointer, "`types` is null");
        }
        let words = (0..n)
            .map(|i| parse_type(str_arg(*types.add(i), "types[i]")?).map_err(Failure::from))
            .collect::<Result<Vec<_>, _>>()?;
        let target = parse_type(str_arg(target, "target")?)?;
        let reduction = reduce(&words, &target)?;
        if !steps.is_null() {
            steps.write(reduction.steps.len());
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last_error() -> String {
        unsafe { CStr::from_ptr(cd_last_error()) }
            .to_string_lossy()
            .into_owned()
    }

    #[test]
    fn panics_become_status_codes() {
        let status = guard(|| panic!("boom"));
        assert_eq!(status, CdStatus::Panic);
        assert_eq!(last_error(), "panic: boom");
    }

    #[test]
    fn errors_map_to_statuses() {
        assert_eq!(Failure::from(Error::ZeroMatrix).0, CdStatus::Numeric);
        assert_eq!(
            Failure::from(Error::DimensionMismatch { expected: 2, got: 3 }).0,
            CdStatus::DimensionMismatch
        );
        assert_eq!(Failure::from(Error::UnknownAtom("q".into())).0, CdStatus::Parse);
    }

    #[test]
    fn row_major_order() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(row_major(&m), vec![1.0, 2.0, 3.0, 4.0]);
    }
}
