use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use compoundkit_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(ck_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

fn matrix(rows: usize, cols: usize, data: &[f64]) -> *mut CkMatrix {
    let mut m = ptr::null_mut();
    let s = unsafe { ck_matrix_new(rows, cols, data.as_ptr(), &mut m) };
    assert_eq!(s, CkStatus::Ok, "{}", last_error());
    m
}

fn data(m: *const CkMatrix) -> (usize, usize, Vec<f64>) {
    unsafe {
        let (r, c) = (ck_matrix_rows(m), ck_matrix_cols(m));
        let mut buf = vec![0.0; r * c];
        assert_eq!(ck_matrix_copy_data(m, buf.as_mut_ptr(), buf.len()), CkStatus::Ok);
        (r, c, buf)
    }
}

fn diag4() -> Vec<f64> {
    let mut d = vec![0.0; 16];
    for i in 0..4 {
        d[i * 5] = (i + 1) as f64;
    }
    d
}

fn diag_of(v: &[f64], n: usize) -> Vec<f64> {
    (0..n).map(|i| v[i * n + i]).collect()
}

#[test]
fn compounds_of_diagonal() {
    let a = matrix(4, 4, &diag4());
    unsafe {
        let mut out = ptr::null_mut();
        for method in [CK_MULT_ORACLE, CK_MULT_KRON] {
            assert_eq!(ck_mult_compound(a, 2, method, 0, &mut out), CkStatus::Ok);
            let (r, c, v) = data(out);
            assert_eq!((r, c), (6, 6));
            assert_eq!(diag_of(&v, 6), vec![2.0, 3.0, 4.0, 6.0, 8.0, 12.0]);
            ck_matrix_free(out);
        }
        for method in [CK_ADD_ENTRYWISE, CK_ADD_KRON, CK_ADD_EPS] {
            assert_eq!(ck_add_compound(a, 2, method, 0, &mut out), CkStatus::Ok);
            let (_, _, v) = data(out);
            let d = diag_of(&v, 6);
            let want = [3.0, 4.0, 5.0, 5.0, 6.0, 7.0];
            assert!(d.iter().zip(&want).all(|(x, y)| (x - y).abs() < 1e-12));
            ck_matrix_free(out);
        }
        assert_eq!(ck_add_compound(a, 2, 9, 0, &mut out), CkStatus::Domain);
        assert!(last_error().contains("unknown method"));
        ck_matrix_free(a);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let a = matrix(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let mut out = ptr::null_mut();
        assert_eq!(ck_add_compound(a, 2, CK_ADD_KRON, 0, &mut out), CkStatus::Domain);
        assert!(!last_error().is_empty());
        assert_eq!(ck_mult_compound(a, 3, CK_MULT_KRON, 0, &mut out), CkStatus::Domain);
        assert_eq!(ck_mult_compound(a, 2, CK_MULT_KRON, 4, &mut out), CkStatus::Resource);
        assert_eq!(ck_mult_compound(a, 2, CK_MULT_KRON, 0, &mut out), CkStatus::Ok);
        assert!(last_error().is_empty());
        assert_eq!(data(out).2, vec![-3.0, -6.0, -3.0]);
        ck_matrix_free(out);
        assert_eq!(
            ck_mult_compound(ptr::null(), 1, CK_MULT_KRON, 0, &mut out),
            CkStatus::NullPointer
        );
        assert_eq!(
            ck_mult_compound(a, 1, CK_MULT_KRON, 0, ptr::null_mut()),
            CkStatus::NullPointer
        );
        let nan = [f64::NAN];
        assert_eq!(ck_matrix_new(1, 1, nan.as_ptr(), &mut out), CkStatus::Domain);
        let mut small = [0.0; 2];
        assert_eq!(ck_matrix_copy_data(a, small.as_mut_ptr(), 2), CkStatus::Domain);
        ck_matrix_free(a);
        ck_matrix_free(ptr::null_mut());
        assert_eq!(ck_matrix_rows(ptr::null()), 0);
    }
}

#[test]
fn product_decomposition() {
    unsafe {
        let w = matrix(3, 2, &[1.0, 0.5, -2.0, 1.0, 0.25, 3.0]);
        let v = matrix(2, 3, &[0.5, 1.0, -1.0, 2.0, 0.0, 1.5]);
        let mut p = ptr::null_mut();
        assert_eq!(ck_product_add_compound(w, v, 2, 0, &mut p), CkStatus::Ok);
        // direct route on the explicit product
        let (_, _, wd) = data(w);
        let (_, _, vd) = data(v);
        let mut ab = vec![0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                ab[i * 3 + j] = (0..2).map(|t| wd[i * 2 + t] * vd[t * 3 + j]).sum();
            }
        }
        let abm = matrix(3, 3, &ab);
        let mut direct = ptr::null_mut();
        assert_eq!(ck_add_compound(abm, 2, CK_ADD_ENTRYWISE, 0, &mut direct), CkStatus::Ok);
        let (_, _, x) = data(p);
        let (_, _, y) = data(direct);
        assert!(x.iter().zip(&y).all(|(a, b)| (a - b).abs() < 1e-12));
        let mut bad = ptr::null_mut();
        assert_eq!(ck_product_add_compound(w, w, 2, 0, &mut bad), CkStatus::Domain);
        for m in [w, v, p, abm, direct] {
            ck_matrix_free(m);
        }
    }
}

#[test]
fn ranking() {
    unsafe {
        let mut p = 0;
        assert_eq!(ck_rank_q(3, [1, 3].as_ptr(), 2, &mut p), CkStatus::Ok);
        assert_eq!(p, 2);
        assert_eq!(ck_rank_r(3, [1, 3].as_ptr(), 2, &mut p), CkStatus::Ok);
        assert_eq!(p, 3);
        let mut seq = [0usize; 3];
        assert_eq!(ck_unrank_q(5, 3, 10, seq.as_mut_ptr()), CkStatus::Ok);
        assert_eq!(seq, [3, 4, 5]);
        assert_eq!(ck_unrank_r(3, 3, 27, seq.as_mut_ptr()), CkStatus::Ok);
        assert_eq!(seq, [3, 3, 3]);
        assert_eq!(ck_rank_q(3, [3, 1].as_ptr(), 2, &mut p), CkStatus::Domain);
        assert_eq!(ck_unrank_q(4, 2, 7, seq.as_mut_ptr()), CkStatus::Domain);
    }
}

#[test]
fn selectors() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(ck_lift(3, 2, CK_LIFT_M, 0, &mut s), CkStatus::Ok);
        assert_eq!((ck_selector_rows(s), ck_selector_cols(s), ck_selector_nnz(s)), (9, 3, 6));
        let (mut r, mut c, mut g) = (vec![0usize; 6], vec![0usize; 6], vec![0i8; 6]);
        assert_eq!(
            ck_selector_triplets(s, r.as_mut_ptr(), c.as_mut_ptr(), g.as_mut_ptr(), 6),
            CkStatus::Ok
        );
        let got: Vec<(usize, usize, i8)> = (0..6).map(|i| (r[i], c[i], g[i])).collect();
        assert_eq!(got, vec![(2, 1, 1), (4, 1, -1), (3, 2, 1), (7, 2, -1), (6, 3, 1), (8, 3, -1)]);
        assert_eq!(
            ck_selector_triplets(s, r.as_mut_ptr(), c.as_mut_ptr(), g.as_mut_ptr(), 5),
            CkStatus::Domain
        );
        ck_selector_free(s);

        assert_eq!(ck_lift(2, 2, CK_LIFT_L, 0, &mut s), CkStatus::Ok);
        assert_eq!(ck_selector_nnz(s), 1);
        ck_selector_free(s);
        assert_eq!(ck_lift(4, 4, CK_LIFT_L, 100, &mut s), CkStatus::Resource);
        assert_eq!(ck_lift(2, 3, CK_LIFT_M, 0, &mut s), CkStatus::Domain);
    }
}

#[test]
fn contraction() {
    unsafe {
        let a = matrix(3, 3, &[1.0, 0.0, 0.0, 0.0, -3.0, 0.0, 0.0, 0.0, -4.0]);
        let (mut c, mut x) = (7, 0.0);
        assert_eq!(ck_k_contraction(a, 2, 0, &mut c, &mut x), CkStatus::Ok);
        assert_eq!(c, 1);
        assert!((x + 2.0).abs() < 1e-12);
        assert_eq!(ck_k_contraction(a, 1, 0, &mut c, &mut x), CkStatus::Ok);
        assert_eq!(c, 0);
        ck_matrix_free(a);
    }
}

#[test]
fn errors_are_per_thread() {
    unsafe {
        let mut p = 0;
        assert_eq!(ck_rank_q(3, [3, 1].as_ptr(), 2, &mut p), CkStatus::Domain);
    }
    let other = std::thread::spawn(last_error).join().unwrap();
    assert!(other.is_empty());
    assert!(!last_error().is_empty());
}

fn header_path() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/compoundkit.h")
}

#[test]
fn header_declares_every_symbol() {
    let header = std::fs::read_to_string(header_path()).expect("header generated by build.rs");
    for sym in [
        "ck_last_error_message",
        "ck_matrix_new",
        "ck_matrix_free",
        "ck_matrix_rows",
        "ck_matrix_cols",
        "ck_matrix_copy_data",
        "ck_mult_compound",
        "ck_add_compound",
        "ck_product_add_compound",
        "ck_rank_q",
        "ck_rank_r",
        "ck_unrank_q",
        "ck_unrank_r",
        "ck_lift",
        "ck_selector_free",
        "ck_selector_rows",
        "ck_selector_cols",
        "ck_selector_nnz",
        "ck_selector_triplets",
        "ck_k_contraction",
    ] {
        assert!(header.contains(&format!("{sym}(")), "missing {sym}");
    }
    assert!(header.contains("typedef struct CkMatrix CkMatrix;"));
    assert!(header.contains("CK_STATUS_RESOURCE = 4"));
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler on PATH; skipping");
        return;
    };
    assert!(cc.status.success());
    let dir = tempfile_dir();
    let src = dir.join("use_header.c");
    std::fs::write(
        &src,
        "#include \"compoundkit.h\"\n\
         int probe(void) {\n\
           CkMatrix *m = 0;\n\
           double d[1] = {2.0};\n\
           CkStatus s = ck_matrix_new(1, 1, d, &m);\n\
           ck_matrix_free(m);\n\
           return s == CK_STATUS_OK ? (int)CK_ADD_EPS : -1;\n\
         }\n",
    )
    .unwrap();
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header_path().parent().unwrap())
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("compoundkit-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
