use std::ffi::{CStr, CString};
use std::ptr;

use compdist::compose::{compose_frobenius, FrobeniusMode};
use compdist::tensors::{VerbMatrix, VerbMethod};
use compdist_ffi::*;
use nalgebra::{DMatrix, DVector};

fn last_error() -> String {
    unsafe { CStr::from_ptr(cd_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn verb_from(data: &[f64], dim: usize) -> *mut CdVerbMatrix {
    let mut out = ptr::null_mut();
    let name = c("v");
    assert_eq!(
        unsafe { cd_verb_from_data(name.as_ptr(), data.as_ptr(), dim, &mut out) },
        CdStatus::Ok
    );
    out
}

#[test]
fn space_lookup() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("space.tsv");
    std::fs::write(&path, "dog\t1\t2\t3\ncat\t0.5\t0\t-1\n").unwrap();
    let cpath = c(path.to_str().unwrap());
    let mut space = ptr::null_mut();
    unsafe {
        assert_eq!(cd_space_load(cpath.as_ptr(), &mut space), CdStatus::Ok);
        assert_eq!(cd_space_dim(space), 3);

        let mut buf = [0.0; 3];
        let word = c("cat");
        assert_eq!(cd_space_vector(space, word.as_ptr(), buf.as_mut_ptr(), 3), CdStatus::Ok);
        assert_eq!(buf, [0.5, 0.0, -1.0]);

        let missing = c("emu");
        assert_eq!(
            cd_space_vector(space, missing.as_ptr(), buf.as_mut_ptr(), 3),
            CdStatus::NotFound
        );
        assert!(last_error().contains("emu"));
        assert_eq!(
            cd_space_vector(space, word.as_ptr(), buf.as_mut_ptr(), 2),
            CdStatus::BufferTooSmall
        );
        cd_space_free(space);
    }

    let nowhere = c(dir.path().join("absent.tsv").to_str().unwrap());
    let mut space = ptr::null_mut();
    assert_eq!(unsafe { cd_space_load(nowhere.as_ptr(), &mut space) }, CdStatus::Io);
    assert!(space.is_null());
}

#[test]
fn null_arguments_are_reported() {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { cd_space_load(ptr::null(), &mut out) }, CdStatus::NullPointer);
    assert!(last_error().contains("path"));
    let mut score = 0.0;
    assert_eq!(
        unsafe { cd_verb_entanglement(ptr::null(), &mut score) },
        CdStatus::NullPointer
    );
    assert_eq!(unsafe { cd_verb_dim(ptr::null()) }, 0);
    unsafe {
        cd_verb_free(ptr::null_mut());
        cd_space_free(ptr::null_mut());
    }
}

#[test]
fn entanglement_of_swap_and_its_rank1() {
    let subjects = [1.0, 0.0, 0.0, 1.0];
    let objects = [0.0, 1.0, 1.0, 0.0];
    let name = c("swap");
    let mut verb = ptr::null_mut();
    let mut score = 0.0;
    unsafe {
        let st = cd_verb_build(
            name.as_ptr(),
            subjects.as_ptr(),
            objects.as_ptr(),
            2,
            2,
            CdVerbMethod::Relational,
            &mut verb,
        );
        assert_eq!(st, CdStatus::Ok);
        assert_eq!(cd_verb_entanglement(verb, &mut score), CdStatus::Ok);
        assert!((score - 0.5f64.sqrt()).abs() < 1e-12);

        let mut r1 = ptr::null_mut();
        assert_eq!(cd_verb_rank1(verb, &mut r1), CdStatus::Ok);
        assert_eq!(cd_verb_entanglement(r1, &mut score), CdStatus::Ok);
        assert!((score - 1.0).abs() < 1e-12);
        cd_verb_free(r1);

        let mut sep = ptr::null_mut();
        let st = cd_verb_build(
            name.as_ptr(),
            subjects.as_ptr(),
            objects.as_ptr(),
            2,
            2,
            CdVerbMethod::Separable,
            &mut sep,
        );
        assert_eq!(st, CdStatus::Ok);
        let mut data = [0.0; 4];
        assert_eq!(cd_verb_data(sep, data.as_mut_ptr(), 4), CdStatus::Ok);
        assert_eq!(data, [1.0; 4]);
        cd_verb_free(sep);
        cd_verb_free(verb);
    }

    let zero = verb_from(&[0.0; 4], 2);
    assert_eq!(unsafe { cd_verb_entanglement(zero, &mut score) }, CdStatus::Numeric);
    unsafe { cd_verb_free(zero) };
}

#[test]
fn compose_matches_the_library() {
    let data = [0.2, -1.0, 0.5, 0.3, 0.9, -0.4, 1.5, 0.0, 0.7];
    let verb = verb_from(&data, 3);
    let (s, o) = ([1.0, 2.0, -0.5], [0.3, -0.2, 1.1]);
    let mut out = [0.0; 9];
    let mut written = 0;
    let st = unsafe {
        cd_compose(
            CdModel::FrobAdd,
            s.as_ptr(),
            verb,
            o.as_ptr(),
            3,
            out.as_mut_ptr(),
            9,
            &mut written,
        )
    };
    assert_eq!(st, CdStatus::Ok);
    assert_eq!(written, 3);

    let m = VerbMatrix::new("v", DMatrix::from_row_slice(3, 3, &data), VerbMethod::Relational).unwrap();
    let want = compose_frobenius(
        &DVector::from_column_slice(&s),
        &m,
        &DVector::from_column_slice(&o),
        FrobeniusMode::Additive,
    )
    .unwrap();
    assert_eq!(&out[..3], want.as_vector().unwrap().as_slice());

    let st = unsafe {
        cd_compose(
            CdModel::VerbObject,
            ptr::null(),
            verb,
            o.as_ptr(),
            3,
            out.as_mut_ptr(),
            9,
            &mut written,
        )
    };
    assert_eq!(st, CdStatus::Ok);
    let vo = DMatrix::from_row_slice(3, 3, &data) * DVector::from_column_slice(&o);
    assert_eq!(&out[..3], vo.as_slice());

    let st = unsafe {
        cd_compose(
            CdModel::FrobTensor,
            s.as_ptr(),
            verb,
            o.as_ptr(),
            3,
            out.as_mut_ptr(),
            9,
            &mut written,
        )
    };
    assert_eq!((st, written), (CdStatus::Ok, 9));

    let st = unsafe {
        cd_compose(
            CdModel::Relational,
            s.as_ptr(),
            verb,
            o.as_ptr(),
            2,
            out.as_mut_ptr(),
            9,
            &mut written,
        )
    };
    assert_eq!(st, CdStatus::DimensionMismatch);
    unsafe { cd_verb_free(verb) };
}

#[test]
fn regression_recovers_a_planted_matrix() {
    let truth = DMatrix::from_row_slice(2, 2, &[1.0, -0.5, 0.25, 2.0]);
    let inputs = [1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.5, -1.0];
    let targets: Vec<f64> = inputs
        .chunks(2)
        .flat_map(|x| (&truth * DVector::from_column_slice(x)).as_slice().to_vec())
        .collect();
    let name = c("v");
    let mut verb = ptr::null_mut();
    let st = unsafe {
        cd_verb_train_regression(
            name.as_ptr(),
            inputs.as_ptr(),
            targets.as_ptr(),
            4,
            2,
            0.0,
            0,
            1e-10,
            &mut verb,
        )
    };
    assert_eq!(st, CdStatus::Ok);
    let mut data = [0.0; 4];
    assert_eq!(unsafe { cd_verb_data(verb, data.as_mut_ptr(), 4) }, CdStatus::Ok);
    let got = DMatrix::from_row_slice(2, 2, &data);
    assert!((got - truth).norm() < 1e-6);
    unsafe { cd_verb_free(verb) };
}

#[test]
fn statistics() {
    let (xs, ys) = ([1.0, 2.0, 2.0, 4.0], [10.0, 20.0, 30.0, 40.0]);
    let mut rho = 0.0;
    assert_eq!(
        unsafe { cd_spearman(xs.as_ptr(), ys.as_ptr(), 4, &mut rho) },
        CdStatus::Ok
    );
    assert!((rho - 0.9486832980505138).abs() < 1e-12);
    let flat = [1.0; 4];
    assert_eq!(
        unsafe { cd_spearman(flat.as_ptr(), ys.as_ptr(), 4, &mut rho) },
        CdStatus::Numeric
    );

    let mut cos = 0.0;
    let (a, b) = ([1.0, 0.0], [1.0, 1.0]);
    assert_eq!(unsafe { cd_cosine(a.as_ptr(), b.as_ptr(), 2, &mut cos) }, CdStatus::Ok);
    assert!((cos - 0.5f64.sqrt()).abs() < 1e-15);
}

#[test]
fn pregroup_reduction() {
    let words: Vec<CString> = ["n·n^l", "n", "n^r·s·n^l", "n"].iter().map(|w| c(w)).collect();
    let ptrs: Vec<_> = words.iter().map(|w| w.as_ptr()).collect();
    let target = c("s");
    let mut steps = 0;
    assert_eq!(
        unsafe { cd_pregroup_reduce(ptrs.as_ptr(), 4, target.as_ptr(), &mut steps) },
        CdStatus::Ok
    );
    assert_eq!(steps, 3);
    let bad = c("n^q");
    let ptrs = [bad.as_ptr()];
    assert_eq!(
        unsafe { cd_pregroup_reduce(ptrs.as_ptr(), 1, target.as_ptr(), &mut steps) },
        CdStatus::Parse
    );
}
