//! C ABI over `swl-core`.
//!
//! Coordinate vectors and reports are opaque handles owned by the caller and
//! released with the matching `*_free` function. Every function returns an
//! [`SwlStatus`]; on failure [`swl_last_error`] describes the problem. Panics
//! never cross the boundary and surface as `SWL_STATUS_PANIC`.
//!
//! # Safety
//!
//! Pointer arguments must be null or valid for the access the function
//! performs; handles must come from this library and be freed at most once.
//! Null is always checked and reported as `SWL_STATUS_NULL_POINTER`.

#![allow(clippy::missing_safety_doc, clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;
use swl_core::alpha::{f_from_g, g_from_f, AlphaMatrix};
use swl_core::filters::{mirror_filter, LaurentPoly};
use swl_core::group_action::{act_dt_on_f, act_dt_on_g, act_td_on_f, act_td_on_g};
use swl_core::json::{report_value, to_canonical_string};
use swl_core::oracle::{oracle_f_coords, oracle_g_coords, QuadPlan};
use swl_core::wavelet::{check_scaling_coordinate_identity, check_wavelet_completeness, check_wavelet_orthonormality, PqRange};
use swl_core::{BasisFamily, CheckReport, DilIndex, Error, FCoordVec, FunctionSpec, GCoordVec, IndexRange, Sign, TransIndex, Verdict, Window};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidLabel = 3,
    Parse = 4,
    UnboundedSupport = 5,
    QuadratureNotConverged = 6,
    KRangeTooSmall = 7,
    GridMismatch = 8,
    OutsideSlice = 9,
    Numerical = 10,
    Io = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwlBasis {
    Haar = 0,
    Exponential = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwlSign {
    Plus = 0,
    Minus = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwlVerdict {
    Pass = 0,
    Fail = 1,
    Inconclusive = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SwlComplex {
    pub re: f64,
    pub im: f64,
}

/// Inclusive index ranges of both models.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SwlWindow {
    pub trans_label_lo: i64,
    pub trans_label_hi: i64,
    pub n_lo: i64,
    pub n_hi: i64,
    pub dil_label_lo: i64,
    pub dil_label_hi: i64,
    pub m_lo: i64,
    pub m_hi: i64,
}

/// Translation-model coordinates.
pub struct SwlFCoords {
    inner: FCoordVec,
}

/// Dilation-model coordinates.
pub struct SwlGCoords {
    inner: GCoordVec,
}

pub struct SwlReport {
    inner: CheckReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SwlStatus {
    match e {
        Error::InvalidLabel { .. } => SwlStatus::InvalidLabel,
        Error::InvalidArgument(_) => SwlStatus::InvalidArgument,
        Error::Parse(_) => SwlStatus::Parse,
        Error::UnboundedSupport => SwlStatus::UnboundedSupport,
        Error::QuadratureNotConverged { .. } => SwlStatus::QuadratureNotConverged,
        Error::KRangeTooSmall { .. } => SwlStatus::KRangeTooSmall,
        Error::GridMismatch(_) => SwlStatus::GridMismatch,
        Error::OutsideSlice(_) => SwlStatus::OutsideSlice,
        Error::Numerical(_) => SwlStatus::Numerical,
        Error::Io(_) => SwlStatus::Io,
    }
}

enum Fail {
    Core(Error),
    Null(&'static str),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

type FfiResult<T> = std::result::Result<T, Fail>;

fn guard<F: FnOnce() -> FfiResult<()>>(f: F) -> SwlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SwlStatus::Ok
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            SwlStatus::NullPointer
        }
        Err(p) => {
            let msg = p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned()).unwrap_or_default();
            set_error(&format!("internal panic: {msg}"));
            SwlStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> FfiResult<&'a T> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &'static str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &'static str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Core(Error::Parse(format!("{what} is not valid UTF-8"))))
}

fn family(b: SwlBasis) -> BasisFamily {
    match b {
        SwlBasis::Haar => BasisFamily::Haar,
        SwlBasis::Exponential => BasisFamily::Exponential,
    }
}

fn sign(s: SwlSign) -> Sign {
    match s {
        SwlSign::Plus => Sign::Plus,
        SwlSign::Minus => Sign::Minus,
    }
}

fn to_c(c: Complex64) -> SwlComplex {
    SwlComplex { re: c.re, im: c.im }
}

fn window(w: &SwlWindow) -> FfiResult<Window> {
    Ok(Window::new(
        IndexRange::new(w.trans_label_lo, w.trans_label_hi)?,
        IndexRange::new(w.n_lo, w.n_hi)?,
        IndexRange::new(w.dil_label_lo, w.dil_label_hi)?,
        IndexRange::new(w.m_lo, w.m_hi)?,
    ))
}

fn from_window(w: &Window) -> SwlWindow {
    SwlWindow {
        trans_label_lo: w.trans_labels.lo,
        trans_label_hi: w.trans_labels.hi,
        n_lo: w.trans_range.lo,
        n_hi: w.trans_range.hi,
        dil_label_lo: w.dil_labels.lo,
        dil_label_hi: w.dil_labels.hi,
        m_lo: w.dil_range.lo,
        m_hi: w.dil_range.hi,
    }
}

fn emit<T>(out: *mut *mut T, value: T) -> FfiResult<()> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

fn emit_tail(out: *mut f64, tail: f64) {
    if !out.is_null() {
        unsafe { *out = tail };
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn swl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Symmetric window of radius `radius`; `m_max >= 0` overrides the dilation range.
#[no_mangle]
pub unsafe extern "C" fn swl_window_symmetric(basis: SwlBasis, radius: i64, m_max: i64, out: *mut SwlWindow) -> SwlStatus {
    guard(|| {
        if radius < 0 {
            return Err(Error::InvalidArgument(format!("radius must be non-negative, got {radius}")).into());
        }
        let mut w = Window::symmetric(family(basis), radius);
        if m_max >= 0 {
            w = w.with_m_max(m_max);
        }
        *deref_mut(out, "out")? = from_window(&w);
        Ok(())
    })
}

/// `α_{i,n}^{s,j,m}`.
#[no_mangle]
pub unsafe extern "C" fn swl_alpha_entry(basis: SwlBasis, i: i64, n: i64, s: SwlSign, j: i64, m: i64, out: *mut SwlComplex) -> SwlStatus {
    guard(|| {
        let v = AlphaMatrix::new(family(basis)).entry(TransIndex::new(i, n), DilIndex::new(sign(s), j, m))?;
        *deref_mut(out, "out")? = to_c(v);
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn swl_fcoords_new() -> *mut SwlFCoords {
    Box::into_raw(Box::new(SwlFCoords { inner: FCoordVec::new() }))
}

#[no_mangle]
pub unsafe extern "C" fn swl_fcoords_free(v: *mut SwlFCoords) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

#[no_mangle]
pub unsafe extern "C" fn swl_fcoords_set(v: *mut SwlFCoords, i: i64, n: i64, c: SwlComplex) -> SwlStatus {
    guard(|| {
        deref_mut(v, "coords")?.inner.set(TransIndex::new(i, n), Complex64::new(c.re, c.im));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn swl_fcoords_get(v: *const SwlFCoords, i: i64, n: i64, out: *mut SwlComplex) -> SwlStatus {
    guard(|| {
        let c = deref(v, "coords")?.inner.get(&TransIndex::new(i, n));
        *deref_mut(out, "out")? = to_c(c);
        Ok(())
    })
}

/// Number of stored entries; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn swl_fcoords_len(v: *const SwlFCoords) -> usize {
    v.as_ref().map(|v| v.inner.len()).unwrap_or(0)
}

/// Entry `k` in index order.
#[no_mangle]
pub unsafe extern "C" fn swl_fcoords_entry(v: *const SwlFCoords, k: usize, i: *mut i64, n: *mut i64, out: *mut SwlComplex) -> SwlStatus {
    guard(|| {
        let v = deref(v, "coords")?;
        let (t, c) = v.inner.iter().nth(k).ok_or_else(|| Error::InvalidArgument(format!("entry {k} out of range ({} entries)", v.inner.len())))?;
        *deref_mut(i, "i")? = t.label;
        *deref_mut(n, "n")? = t.n;
        *deref_mut(out, "out")? = to_c(*c);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn swl_fcoords_norm_sq(v: *const SwlFCoords) -> f64 {
    v.as_ref().map(|v| v.inner.norm_sq()).unwrap_or(f64::NAN)
}

#[no_mangle]
pub extern "C" fn swl_gcoords_new() -> *mut SwlGCoords {
    Box::into_raw(Box::new(SwlGCoords { inner: GCoordVec::new() }))
}

#[no_mangle]
pub unsafe extern "C" fn swl_gcoords_free(v: *mut SwlGCoords) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

#[no_mangle]
pub unsafe extern "C" fn swl_gcoords_set(v: *mut SwlGCoords, s: SwlSign, j: i64, m: i64, c: SwlComplex) -> SwlStatus {
    guard(|| {
        deref_mut(v, "coords")?.inner.set(DilIndex::new(sign(s), j, m), Complex64::new(c.re, c.im));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn swl_gcoords_get(v: *const SwlGCoords, s: SwlSign, j: i64, m: i64, out: *mut SwlComplex) -> SwlStatus {
    guard(|| {
        let c = deref(v, "coords")?.inner.get(&DilIndex::new(sign(s), j, m));
        *deref_mut(out, "out")? = to_c(c);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn swl_gcoords_len(v: *const SwlGCoords) -> usize {
    v.as_ref().map(|v| v.inner.len()).unwrap_or(0)
}

#[no_mangle]
pub unsafe extern "C" fn swl_gcoords_entry(v: *const SwlGCoords, k: usize, s: *mut SwlSign, j: *mut i64, m: *mut i64, out: *mut SwlComplex) -> SwlStatus {
    guard(|| {
        let v = deref(v, "coords")?;
        let (d, c) = v.inner.iter().nth(k).ok_or_else(|| Error::InvalidArgument(format!("entry {k} out of range ({} entries)", v.inner.len())))?;
        *deref_mut(s, "s")? = match d.sign {
            Sign::Plus => SwlSign::Plus,
            Sign::Minus => SwlSign::Minus,
        };
        *deref_mut(j, "j")? = d.label;
        *deref_mut(m, "m")? = d.m;
        *deref_mut(out, "out")? = to_c(*c);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn swl_gcoords_norm_sq(v: *const SwlGCoords) -> f64 {
    v.as_ref().map(|v| v.inner.norm_sq()).unwrap_or(f64::NAN)
}

/// Dilation coordinates from translation coordinates. `tail_sq` may be null.
#[no_mangle]
pub unsafe extern "C" fn swl_g_from_f(basis: SwlBasis, v: *const SwlFCoords, w: *const SwlWindow, out: *mut *mut SwlGCoords, tail_sq: *mut f64) -> SwlStatus {
    guard(|| {
        let r = g_from_f(&deref(v, "coords")?.inner, &AlphaMatrix::new(family(basis)), &window(deref(w, "window")?)?)?;
        emit(out, SwlGCoords { inner: r.value })?;
        emit_tail(tail_sq, r.tail_sq);
        Ok(())
    })
}

/// Translation coordinates from dilation coordinates. `tail_sq` may be null.
#[no_mangle]
pub unsafe extern "C" fn swl_f_from_g(basis: SwlBasis, v: *const SwlGCoords, w: *const SwlWindow, out: *mut *mut SwlFCoords, tail_sq: *mut f64) -> SwlStatus {
    guard(|| {
        let r = f_from_g(&deref(v, "coords")?.inner, &AlphaMatrix::new(family(basis)), &window(deref(w, "window")?)?)?;
        emit(out, SwlFCoords { inner: r.value })?;
        emit_tail(tail_sq, r.tail_sq);
        Ok(())
    })
}

/// Translation coordinates of the function described by `spec` (text form), by direct integration.
#[no_mangle]
pub unsafe extern "C" fn swl_oracle_f_coords(
    spec: *const c_char,
    basis: SwlBasis,
    w: *const SwlWindow,
    out: *mut *mut SwlFCoords,
    tail_sq: *mut f64,
) -> SwlStatus {
    guard(|| {
        let f = FunctionSpec::parse(c_str(spec, "spec")?)?;
        let r = oracle_f_coords(&f, family(basis), &window(deref(w, "window")?)?, &QuadPlan::default())?;
        emit(out, SwlFCoords { inner: r.value })?;
        emit_tail(tail_sq, r.tail_sq);
        Ok(())
    })
}

/// Dilation coordinates of the function described by `spec`, by direct integration.
#[no_mangle]
pub unsafe extern "C" fn swl_oracle_g_coords(
    spec: *const c_char,
    basis: SwlBasis,
    w: *const SwlWindow,
    out: *mut *mut SwlGCoords,
    tail_sq: *mut f64,
) -> SwlStatus {
    guard(|| {
        let f = FunctionSpec::parse(c_str(spec, "spec")?)?;
        let r = oracle_g_coords(&f, family(basis), &window(deref(w, "window")?)?, &QuadPlan::default())?;
        emit(out, SwlGCoords { inner: r.value })?;
        emit_tail(tail_sq, r.tail_sq);
        Ok(())
    })
}

/// `D^p T^q f` (`td == 0`) or `T^q D^p f` (`td != 0`) in translation coordinates.
#[no_mangle]
pub unsafe extern "C" fn swl_act_on_f(
    basis: SwlBasis,
    v: *const SwlFCoords,
    p: i64,
    q: i64,
    td: i32,
    w: *const SwlWindow,
    out: *mut *mut SwlFCoords,
    tail_sq: *mut f64,
) -> SwlStatus {
    guard(|| {
        let (v, a, w) = (&deref(v, "coords")?.inner, AlphaMatrix::new(family(basis)), window(deref(w, "window")?)?);
        let r = if td == 0 { act_dt_on_f(v, p, q, &a, &w)? } else { act_td_on_f(v, p, q, &a, &w)? };
        emit(out, SwlFCoords { inner: r.value })?;
        emit_tail(tail_sq, r.tail_sq);
        Ok(())
    })
}

/// `D^p T^q f` (`td == 0`) or `T^q D^p f` (`td != 0`) in dilation coordinates.
#[no_mangle]
pub unsafe extern "C" fn swl_act_on_g(
    basis: SwlBasis,
    v: *const SwlGCoords,
    p: i64,
    q: i64,
    td: i32,
    w: *const SwlWindow,
    out: *mut *mut SwlGCoords,
    tail_sq: *mut f64,
) -> SwlStatus {
    guard(|| {
        let (v, a, w) = (&deref(v, "coords")?.inner, AlphaMatrix::new(family(basis)), window(deref(w, "window")?)?);
        let r = if td == 0 { act_dt_on_g(v, p, q, &a, &w)? } else { act_td_on_g(v, p, q, &a, &w)? };
        emit(out, SwlGCoords { inner: r.value })?;
        emit_tail(tail_sq, r.tail_sq);
        Ok(())
    })
}

/// Orthonormality over `|p|, |q| <= pq` and the completeness rank test with
/// columns `(signs[k], labels[k])`.
#[no_mangle]
pub unsafe extern "C" fn swl_check_wavelet(
    basis: SwlBasis,
    psi: *const SwlGCoords,
    pq: i64,
    rank_radius: i64,
    signs: *const SwlSign,
    labels: *const i64,
    f_len: usize,
    w: *const SwlWindow,
    tol: f64,
    rank_threshold: f64,
    out: *mut *mut SwlReport,
) -> SwlStatus {
    guard(|| {
        if pq < 0 || rank_radius < 0 || !(tol > 0.0) || !(rank_threshold > 0.0) {
            return Err(Error::InvalidArgument("pq and rank_radius must be non-negative, tolerances positive".into()).into());
        }
        let f_set: Vec<(Sign, i64)> = if f_len == 0 {
            Vec::new()
        } else {
            if signs.is_null() || labels.is_null() {
                return Err(Fail::Null("signs/labels"));
            }
            let s = std::slice::from_raw_parts(signs, f_len);
            let l = std::slice::from_raw_parts(labels, f_len);
            s.iter().zip(l).map(|(s, l)| (sign(*s), *l)).collect()
        };
        let (psi, a, w) = (&deref(psi, "psi")?.inner, AlphaMatrix::new(family(basis)), window(deref(w, "window")?)?);
        let orth = check_wavelet_orthonormality(psi, &a, &PqRange::square(pq), &w, tol)?;
        let comp = check_wavelet_completeness(psi, &a, &f_set, rank_radius, &w, rank_threshold)?;
        emit(out, SwlReport { inner: CheckReport::combine("wavelet", tol, Some(w), vec![orth, comp]) })
    })
}

/// Autocorrelation identity of integer translates for lags `|k| <= k_max`.
#[no_mangle]
pub unsafe extern "C" fn swl_check_scaling(phi: *const SwlFCoords, k_max: i64, tol: f64, out: *mut *mut SwlReport) -> SwlStatus {
    guard(|| {
        if k_max < 0 {
            return Err(Error::InvalidArgument(format!("k_max must be non-negative, got {k_max}")).into());
        }
        let r = check_scaling_coordinate_identity(&deref(phi, "phi")?.inner, IndexRange::symmetric(k_max), tol);
        emit(out, SwlReport { inner: r })
    })
}

#[no_mangle]
pub unsafe extern "C" fn swl_report_free(r: *mut SwlReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

#[no_mangle]
pub unsafe extern "C" fn swl_report_verdict(r: *const SwlReport, out: *mut SwlVerdict) -> SwlStatus {
    guard(|| {
        *deref_mut(out, "out")? = match deref(r, "report")?.inner.verdict {
            Verdict::Pass => SwlVerdict::Pass,
            Verdict::Fail => SwlVerdict::Fail,
            Verdict::Inconclusive => SwlVerdict::Inconclusive,
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn swl_report_max_residual(r: *const SwlReport) -> f64 {
    r.as_ref().map(|r| r.inner.max_residual).unwrap_or(f64::NAN)
}

/// Report as canonical JSON; release with [`swl_string_free`].
#[no_mangle]
pub unsafe extern "C" fn swl_report_json(r: *const SwlReport, out: *mut *mut c_char) -> SwlStatus {
    guard(|| {
        let text = to_canonical_string(&report_value(&deref(r, "report")?.inner));
        write_string(out, text)
    })
}

/// Mirror filter of a JSON `{"k": [re, im]}` map; result in the same format.
#[no_mangle]
pub unsafe extern "C" fn swl_mirror_filter_json(filter_json: *const c_char, m: i64, out: *mut *mut c_char) -> SwlStatus {
    guard(|| {
        let v: serde_json::Value = serde_json::from_str(c_str(filter_json, "filter_json")?).map_err(Error::from)?;
        let h = LaurentPoly::from_json(&v)?;
        write_string(out, to_canonical_string(&mirror_filter(&h, m).to_json()))
    })
}

fn write_string(out: *mut *mut c_char, text: String) -> FfiResult<()> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    let c = CString::new(text).map_err(|_| Error::Numerical("interior NUL in output".into()))?;
    unsafe { *out = c.into_raw() };
    Ok(())
}

#[no_mangle]
pub unsafe extern "C" fn swl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
