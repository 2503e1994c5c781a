//! C ABI for the hypertree library.
//!
//! Complexes travel as opaque handles; every fallible call returns an
//! [`HtStatus`] and writes results through out-pointers. Strings handed
//! out must be released with [`ht_string_free`], complexes with
//! [`ht_complex_free`]. The most recent error message per thread is
//! available from [`ht_last_error`]. Capacity caps come from the
//! `HYPERTREE_CAPS` environment variable, as in the CLI.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use hypertree::error::Error;
use hypertree::f2::Convention;
use hypertree::kernels::{Backend, HypertreeSampler};
use hypertree::simplicial::{Complex, Face};
use hypertree::Caps;
use num::{BigRational, ToPrimitive};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HtStatus {
    Ok = 0,
    NullPointer = 1,
    Utf8 = 2,
    Parse = 3,
    InvalidInput = 4,
    Capacity = 5,
    Numerical = 6,
    Io = 7,
    Panic = 8,
}

/// Sampler backend selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HtBackend {
    Kernel = 0,
    Percolation = 1,
}

/// Coboundary-space convention in dimension 0.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HtConvention {
    Reduced = 0,
    Unreduced = 1,
}

/// Opaque complex handle.
pub struct HtComplex {
    inner: Complex,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let clean = msg.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).unwrap());
}

fn status_of(err: &Error) -> HtStatus {
    match err {
        Error::InvalidInput(_) => HtStatus::InvalidInput,
        Error::Capacity { .. } => HtStatus::Capacity,
        Error::Parse { .. } => HtStatus::Parse,
        Error::Numerical(_) => HtStatus::Numerical,
        Error::EmptyComplex => HtStatus::InvalidInput,
        Error::Io(_) => HtStatus::Io,
    }
}

fn fail(err: &Error) -> HtStatus {
    set_error(&err.to_string());
    status_of(err)
}

fn guarded(f: impl FnOnce() -> HtStatus) -> HtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("panic inside the library");
            HtStatus::Panic
        }
    }
}

fn caps() -> Caps {
    Caps::from_env_and(None).unwrap_or_default()
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, HtStatus> {
    if ptr.is_null() {
        set_error("null string pointer");
        return Err(HtStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string is not valid UTF-8");
        HtStatus::Utf8
    })
}

unsafe fn read_face(verts: *const u32, len: usize) -> Result<Face, HtStatus> {
    if verts.is_null() {
        set_error("null vertex pointer");
        return Err(HtStatus::NullPointer);
    }
    let slice = std::slice::from_raw_parts(verts, len);
    Face::new(slice.to_vec()).map_err(|e| fail(&e))
}

fn write_handle(out: *mut *mut HtComplex, complex: Complex) -> HtStatus {
    if out.is_null() {
        set_error("null output pointer");
        return HtStatus::NullPointer;
    }
    unsafe {
        *out = Box::into_raw(Box::new(HtComplex { inner: complex }));
    }
    HtStatus::Ok
}

fn write_string(out: *mut *mut c_char, text: String) -> HtStatus {
    if out.is_null() {
        set_error("null output pointer");
        return HtStatus::NullPointer;
    }
    let c = CString::new(text.replace('\0', " ")).unwrap();
    unsafe {
        *out = c.into_raw();
    }
    HtStatus::Ok
}

/// Writes a reduced rational into the `(num, den)` out-pair; fails with
/// `Numerical` when it does not fit 64 bits.
fn write_rational(r: &BigRational, num: *mut i64, den: *mut u64) -> HtStatus {
    if num.is_null() || den.is_null() {
        set_error("null output pointer");
        return HtStatus::NullPointer;
    }
    match (r.numer().to_i64(), r.denom().to_u64()) {
        (Some(n), Some(d)) => {
            unsafe {
                *num = n;
                *den = d;
            }
            HtStatus::Ok
        }
        _ => {
            set_error("rational does not fit in 64 bits");
            HtStatus::Numerical
        }
    }
}

/// Message of the most recent error on this thread. Valid until the
/// next failing call from the same thread; never null.
#[no_mangle]
pub extern "C" fn ht_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Frees a string returned by this library. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn ht_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Frees a complex handle. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn ht_complex_free(complex: *mut HtComplex) {
    if !complex.is_null() {
        drop(Box::from_raw(complex));
    }
}

/// Parses the standard complex format (header `n d`, one ascending
/// face per line, `#` comments).
#[no_mangle]
pub unsafe extern "C" fn ht_complex_parse(
    text: *const c_char,
    out: *mut *mut HtComplex,
) -> HtStatus {
    guarded(|| {
        let text = match read_str(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match Complex::parse(text) {
            Ok(c) => write_handle(out, c),
            Err(e) => fail(&e),
        }
    })
}

/// Reads a complex file from disk.
#[no_mangle]
pub unsafe extern "C" fn ht_complex_read_file(
    path: *const c_char,
    out: *mut *mut HtComplex,
) -> HtStatus {
    guarded(|| {
        let path = match read_str(path) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match Complex::read_file(path) {
            Ok(c) => write_handle(out, c),
            Err(e) => fail(&e),
        }
    })
}

/// Serializes a complex in the standard format.
#[no_mangle]
pub unsafe extern "C" fn ht_complex_to_string(
    complex: *const HtComplex,
    out: *mut *mut c_char,
) -> HtStatus {
    guarded(|| {
        let Some(c) = complex.as_ref() else {
            set_error("null complex handle");
            return HtStatus::NullPointer;
        };
        write_string(out, c.inner.to_file_string())
    })
}

/// Vertex count `n`; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn ht_complex_vertex_count(complex: *const HtComplex) -> u32 {
    complex.as_ref().map_or(0, |c| c.inner.vertex_count())
}

/// Top dimension `d`; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn ht_complex_dimension(complex: *const HtComplex) -> u32 {
    complex.as_ref().map_or(0, |c| c.inner.dim() as u32)
}

/// Number of top faces; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn ht_complex_face_count(complex: *const HtComplex) -> u64 {
    complex.as_ref().map_or(0, |c| c.inner.face_count())
}

/// Draws one generalized hypertree with the given backend.
#[no_mangle]
pub unsafe extern "C" fn ht_sample_hypertree(
    n: u32,
    d: u32,
    ell: u32,
    seed: u64,
    backend: HtBackend,
    out: *mut *mut HtComplex,
) -> HtStatus {
    guarded(|| {
        let backend = match backend {
            HtBackend::Kernel => Backend::Kernel,
            HtBackend::Percolation => Backend::Percolation,
        };
        match hypertree::kernels::sample_hypertree(n, d as usize, ell, seed, backend, &caps()) {
            Ok(c) => write_handle(out, c),
            Err(e) => fail(&e),
        }
    })
}

/// Draws the union of `k` independent copies (copy `j` runs on the
/// child seed derived from `seed` and `j`).
#[no_mangle]
pub unsafe extern "C" fn ht_sample_union(
    n: u32,
    d: u32,
    ell: u32,
    k: u32,
    seed: u64,
    out: *mut *mut HtComplex,
) -> HtStatus {
    guarded(|| {
        if k == 0 {
            set_error("union needs k >= 1");
            return HtStatus::InvalidInput;
        }
        let sampler = match HypertreeSampler::new(n, d as usize, ell, Backend::Percolation, &caps())
        {
            Ok(s) => s,
            Err(e) => return fail(&e),
        };
        match sampler.draw_union(k as usize, seed) {
            Ok((c, _)) => write_handle(out, c),
            Err(e) => fail(&e),
        }
    })
}

/// Number of top faces containing the given face.
#[no_mangle]
pub unsafe extern "C" fn ht_cover_count(
    complex: *const HtComplex,
    verts: *const u32,
    len: usize,
    out: *mut u64,
) -> HtStatus {
    guarded(|| {
        let Some(c) = complex.as_ref() else {
            set_error("null complex handle");
            return HtStatus::NullPointer;
        };
        if out.is_null() {
            set_error("null output pointer");
            return HtStatus::NullPointer;
        }
        let face = match read_face(verts, len) {
            Ok(f) => f,
            Err(s) => return s,
        };
        match c.inner.cover_count(&face) {
            Ok(v) => {
                *out = v;
                HtStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Normalized face weight as a reduced rational.
#[no_mangle]
pub unsafe extern "C" fn ht_weight(
    complex: *const HtComplex,
    verts: *const u32,
    len: usize,
    out_num: *mut i64,
    out_den: *mut u64,
) -> HtStatus {
    guarded(|| {
        let Some(c) = complex.as_ref() else {
            set_error("null complex handle");
            return HtStatus::NullPointer;
        };
        let face = match read_face(verts, len) {
            Ok(f) => f,
            Err(s) => return s,
        };
        match c.inner.weight(&face) {
            Ok(w) => write_rational(&w, out_num, out_den),
            Err(e) => fail(&e),
        }
    })
}

/// Hypertree predicate: complete lower skeleton (structural), full
/// face count, finite integral homology.
#[no_mangle]
pub unsafe extern "C" fn ht_is_hypertree(complex: *const HtComplex, out: *mut u8) -> HtStatus {
    guarded(|| {
        let Some(c) = complex.as_ref() else {
            set_error("null complex handle");
            return HtStatus::NullPointer;
        };
        if out.is_null() {
            set_error("null output pointer");
            return HtStatus::NullPointer;
        }
        *out = hypertree::homology::is_hypertree(&c.inner) as u8;
        HtStatus::Ok
    })
}

/// `|H_{d-1}|`: `*finite` is 0 for infinite homology, else 1 with the
/// order in `*order` (Numerical if it does not fit u64).
#[no_mangle]
pub unsafe extern "C" fn ht_homology_order(
    complex: *const HtComplex,
    finite: *mut u8,
    order: *mut u64,
) -> HtStatus {
    guarded(|| {
        let Some(c) = complex.as_ref() else {
            set_error("null complex handle");
            return HtStatus::NullPointer;
        };
        if finite.is_null() || order.is_null() {
            set_error("null output pointer");
            return HtStatus::NullPointer;
        }
        match hypertree::homology::homology_order(&c.inner) {
            hypertree::homology::HomologyOrder::Infinite => {
                *finite = 0;
                *order = 0;
                HtStatus::Ok
            }
            hypertree::homology::HomologyOrder::Finite(o) => match o.to_u64() {
                Some(v) => {
                    *finite = 1;
                    *order = v;
                    HtStatus::Ok
                }
                None => {
                    set_error("homology order does not fit in 64 bits");
                    HtStatus::Numerical
                }
            },
        }
    })
}

/// Exact measure weight `|H|²/n^C(n-2,d)` as decimal numerator and
/// denominator strings (free both with `ht_string_free`).
#[no_mangle]
pub unsafe extern "C" fn ht_measure_weight(
    complex: *const HtComplex,
    out_num: *mut *mut c_char,
    out_den: *mut *mut c_char,
) -> HtStatus {
    guarded(|| {
        let Some(c) = complex.as_ref() else {
            set_error("null complex handle");
            return HtStatus::NullPointer;
        };
        if out_num.is_null() || out_den.is_null() {
            set_error("null output pointer");
            return HtStatus::NullPointer;
        }
        match hypertree::homology::measure_weight(&c.inner) {
            Ok(w) => {
                let s1 = write_string(out_num, w.numer().to_string());
                if s1 != HtStatus::Ok {
                    return s1;
                }
                write_string(out_den, w.denom().to_string())
            }
            Err(e) => fail(&e),
        }
    })
}

/// Coboundary-expansion constant 𝔥ᵢ as a reduced rational;
/// `*is_infinite = 1` (with 0/1 written) when no non-coboundary
/// cochain exists.
#[no_mangle]
pub unsafe extern "C" fn ht_expansion_constant(
    complex: *const HtComplex,
    i: u32,
    convention: HtConvention,
    is_infinite: *mut u8,
    out_num: *mut i64,
    out_den: *mut u64,
) -> HtStatus {
    guarded(|| {
        let Some(c) = complex.as_ref() else {
            set_error("null complex handle");
            return HtStatus::NullPointer;
        };
        if is_infinite.is_null() {
            set_error("null output pointer");
            return HtStatus::NullPointer;
        }
        let convention = match convention {
            HtConvention::Reduced => Convention::Reduced,
            HtConvention::Unreduced => Convention::Unreduced,
        };
        match hypertree::f2::expansion_constant(&c.inner, i as usize, convention, &caps()) {
            Ok(Some(h)) => {
                *is_infinite = 0;
                write_rational(&h, out_num, out_den)
            }
            Ok(None) => {
                *is_infinite = 1;
                write_rational(&BigRational::from_integer(0.into()), out_num, out_den)
            }
            Err(e) => fail(&e),
        }
    })
}

/// Dimension of `H^i(K; F₂)` under the chosen convention.
#[no_mangle]
pub unsafe extern "C" fn ht_cohomology_dim(
    complex: *const HtComplex,
    i: u32,
    convention: HtConvention,
    out: *mut u64,
) -> HtStatus {
    guarded(|| {
        let Some(c) = complex.as_ref() else {
            set_error("null complex handle");
            return HtStatus::NullPointer;
        };
        if out.is_null() {
            set_error("null output pointer");
            return HtStatus::NullPointer;
        }
        let convention = match convention {
            HtConvention::Reduced => Convention::Reduced,
            HtConvention::Unreduced => Convention::Unreduced,
        };
        match hypertree::f2::cohomology_dim(&c.inner, i as usize, convention) {
            Ok(v) => {
                *out = v as u64;
                HtStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Least α making the complex an α-skeleton expander, as a reduced
/// rational.
#[no_mangle]
pub unsafe extern "C" fn ht_skeleton_alpha(
    complex: *const HtComplex,
    out_num: *mut i64,
    out_den: *mut u64,
) -> HtStatus {
    guarded(|| {
        let Some(c) = complex.as_ref() else {
            set_error("null complex handle");
            return HtStatus::NullPointer;
        };
        match hypertree::lab::skeleton_alpha(&c.inner, &caps()) {
            Ok(alpha) => write_rational(&alpha, out_num, out_den),
            Err(e) => fail(&e),
        }
    })
}
