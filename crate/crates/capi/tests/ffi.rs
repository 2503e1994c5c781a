//! Exercises the C ABI through the exported symbols, exactly as a
//! foreign caller would: raw pointers, status codes, manual frees.

use std::ffi::{CStr, CString};
use std::ptr;

use hypertree_capi::*;

fn parse(text: &str) -> *mut HtComplex {
    let c = CString::new(text).unwrap();
    let mut out: *mut HtComplex = ptr::null_mut();
    let status = unsafe { ht_complex_parse(c.as_ptr(), &mut out) };
    assert_eq!(status, HtStatus::Ok);
    assert!(!out.is_null());
    out
}

const RP2: &str = "6 2\n1 2 3\n1 2 4\n1 3 5\n1 4 6\n1 5 6\n2 3 6\n2 4 5\n2 5 6\n3 4 5\n3 4 6\n";

#[test]
fn parse_query_roundtrip() {
    let k = parse(RP2);
    unsafe {
        assert_eq!(ht_complex_vertex_count(k), 6);
        assert_eq!(ht_complex_dimension(k), 2);
        assert_eq!(ht_complex_face_count(k), 10);

        let mut text: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(ht_complex_to_string(k, &mut text), HtStatus::Ok);
        let back = CStr::from_ptr(text).to_str().unwrap().to_string();
        ht_string_free(text);
        let k2 = parse(&back);
        assert_eq!(ht_complex_face_count(k2), 10);
        ht_complex_free(k2);
        ht_complex_free(k);
    }
}

#[test]
fn homology_and_measure_of_the_projective_plane() {
    let k = parse(RP2);
    unsafe {
        let mut finite = 0u8;
        let mut order = 0u64;
        assert_eq!(ht_homology_order(k, &mut finite, &mut order), HtStatus::Ok);
        assert_eq!((finite, order), (1, 2));

        let mut is_tree = 0u8;
        assert_eq!(ht_is_hypertree(k, &mut is_tree), HtStatus::Ok);
        assert_eq!(is_tree, 1);

        let (mut num, mut den): (*mut std::ffi::c_char, *mut std::ffi::c_char) =
            (ptr::null_mut(), ptr::null_mut());
        assert_eq!(ht_measure_weight(k, &mut num, &mut den), HtStatus::Ok);
        // 4/6⁶ in lowest terms.
        assert_eq!(CStr::from_ptr(num).to_str().unwrap(), "1");
        assert_eq!(CStr::from_ptr(den).to_str().unwrap(), "11664");
        ht_string_free(num);
        ht_string_free(den);
        ht_complex_free(k);
    }
}

#[test]
fn weights_covers_expansion() {
    let text = "4 1\n1 2\n1 3\n1 4\n2 3\n2 4\n3 4\n";
    let k = parse(text);
    unsafe {
        let verts = [1u32, 2];
        let mut cover = 0u64;
        assert_eq!(
            ht_cover_count(k, verts.as_ptr(), 2, &mut cover),
            HtStatus::Ok
        );
        assert_eq!(cover, 1);

        let (mut num, mut den) = (0i64, 0u64);
        assert_eq!(
            ht_weight(k, verts.as_ptr(), 2, &mut num, &mut den),
            HtStatus::Ok
        );
        assert_eq!((num, den), (1, 6));

        let mut inf = 2u8;
        assert_eq!(
            ht_expansion_constant(k, 0, HtConvention::Reduced, &mut inf, &mut num, &mut den),
            HtStatus::Ok
        );
        assert_eq!((inf, num, den), (0, 4, 3));

        let mut dim = 99u64;
        assert_eq!(
            ht_cohomology_dim(k, 0, HtConvention::Reduced, &mut dim),
            HtStatus::Ok
        );
        assert_eq!(dim, 0);

        assert_eq!(ht_skeleton_alpha(k, &mut num, &mut den), HtStatus::Ok);
        assert!(den > 0);
        ht_complex_free(k);
    }
}

#[test]
fn sampling_through_the_abi() {
    unsafe {
        let mut k: *mut HtComplex = ptr::null_mut();
        assert_eq!(
            ht_sample_hypertree(8, 2, 0, 42, HtBackend::Percolation, &mut k),
            HtStatus::Ok
        );
        assert_eq!(ht_complex_face_count(k), 21); // C(7,2)
        let mut is_tree = 0u8;
        assert_eq!(ht_is_hypertree(k, &mut is_tree), HtStatus::Ok);
        assert_eq!(is_tree, 1);
        ht_complex_free(k);

        // Same seed, same draw.
        let (mut a, mut b): (*mut HtComplex, *mut HtComplex) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(
            ht_sample_hypertree(7, 1, 2, 9, HtBackend::Percolation, &mut a),
            HtStatus::Ok
        );
        assert_eq!(
            ht_sample_hypertree(7, 1, 2, 9, HtBackend::Percolation, &mut b),
            HtStatus::Ok
        );
        let (mut ta, mut tb): (*mut std::ffi::c_char, *mut std::ffi::c_char) =
            (ptr::null_mut(), ptr::null_mut());
        assert_eq!(ht_complex_to_string(a, &mut ta), HtStatus::Ok);
        assert_eq!(ht_complex_to_string(b, &mut tb), HtStatus::Ok);
        assert_eq!(
            CStr::from_ptr(ta).to_str().unwrap(),
            CStr::from_ptr(tb).to_str().unwrap()
        );
        ht_string_free(ta);
        ht_string_free(tb);
        ht_complex_free(a);
        ht_complex_free(b);

        let mut u: *mut HtComplex = ptr::null_mut();
        assert_eq!(ht_sample_union(7, 2, 0, 4, 5, &mut u), HtStatus::Ok);
        assert!(ht_complex_face_count(u) <= 4 * 15);
        ht_complex_free(u);
    }
}

#[test]
fn error_paths_and_messages() {
    unsafe {
        let mut out: *mut HtComplex = ptr::null_mut();
        assert_eq!(
            ht_complex_parse(ptr::null(), &mut out),
            HtStatus::NullPointer
        );

        let bad = CString::new("4 1\n1 2\n1 2\n").unwrap();
        assert_eq!(ht_complex_parse(bad.as_ptr(), &mut out), HtStatus::Parse);
        let msg = CStr::from_ptr(ht_last_error()).to_str().unwrap();
        assert!(msg.contains("duplicate"), "message was {msg:?}");

        let missing = CString::new("/nonexistent/path/to/complex").unwrap();
        assert_eq!(
            ht_complex_read_file(missing.as_ptr(), &mut out),
            HtStatus::Io
        );

        // Invalid sampling parameters.
        assert_eq!(
            ht_sample_hypertree(3, 5, 0, 1, HtBackend::Percolation, &mut out),
            HtStatus::InvalidInput
        );

        // Vertex outside the range.
        let k = parse("4 1\n1 2\n3 4\n");
        let verts = [1u32, 9];
        let mut cover = 0u64;
        assert_eq!(
            ht_cover_count(k, verts.as_ptr(), 2, &mut cover),
            HtStatus::InvalidInput
        );
        ht_complex_free(k);

        // Null frees are no-ops.
        ht_complex_free(ptr::null_mut());
        ht_string_free(ptr::null_mut());
    }
}

#[test]
fn header_is_generated_with_the_public_surface() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("hypertree.h");
    let text = std::fs::read_to_string(&header).expect("cbindgen header exists");
    for symbol in [
        "typedef struct HtComplex HtComplex;",
        "ht_complex_parse",
        "ht_sample_hypertree",
        "ht_homology_order",
        "ht_expansion_constant",
        "ht_skeleton_alpha",
        "ht_last_error",
        "HT_STATUS_CAPACITY",
    ] {
        assert!(text.contains(symbol), "header is missing {symbol}");
    }
}
