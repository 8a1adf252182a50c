//! C ABI over `lattice-growth`: curve zeta functions, type data and parahoric
//! grade dimensions.
//!
//! Every entry point returns an [`LgStatus`]; results go through out-pointers.
//! On failure the message is available from [`lg_last_error`] until the next
//! call on the same thread. Handles are opaque and released with their `_free`
//! function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use lattice_growth::arith::{self, CurveZeta};
use lattice_growth::parahoric::{self, ParahoricGraded};
use lattice_growth::rootsys::{build_affine_datum, build_root_datum, CartanType};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// A value does not fit the caller's integer type.
    Overflow = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

/// Zeta function of a curve over a finite field.
pub struct LgCurveZeta(CurveZeta);

/// Graded Lie algebra of a parahoric over F_p, truncated to a window.
pub struct LgParahoric(ParahoricGraded);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl std::fmt::Display) {
    let c = CString::new(msg.to_string().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: LgStatus, msg: impl std::fmt::Display) -> LgStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> LgStatus) -> LgStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(LgStatus::Panic, "internal panic"),
    }
}

/// # Safety
/// `data` must point to `len` readable values, or be null with `len == 0`.
unsafe fn input<'a, T>(data: *const T, len: usize) -> Option<&'a [T]> {
    if len == 0 {
        Some(&[])
    } else if data.is_null() {
        None
    } else {
        Some(slice::from_raw_parts(data, len))
    }
}

unsafe fn label<'a>(s: *const c_char) -> Result<&'a str, LgStatus> {
    if s.is_null() {
        return Err(fail(LgStatus::NullPointer, "label is null"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(LgStatus::InvalidArgument, "label is not UTF-8"))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn lg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a zeta function from the L-polynomial `coeffs[0..len]`, constant term first.
///
/// # Safety
/// `coeffs` must point to `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lg_curve_zeta_new(
    q: u64,
    genus: u32,
    coeffs: *const i64,
    len: usize,
    out: *mut *mut LgCurveZeta,
) -> LgStatus {
    guard(|| {
        let (Some(c), false) = (input(coeffs, len), out.is_null()) else {
            return fail(LgStatus::NullPointer, "coeffs or out is null");
        };
        match CurveZeta::from_coefficients(q, genus, c) {
            Ok(z) => {
                *out = Box::into_raw(Box::new(LgCurveZeta(z)));
                LgStatus::Ok
            }
            Err(e) => fail(LgStatus::InvalidArgument, e),
        }
    })
}

/// Builds a zeta function from `#C(F_{q^n})` for `n = 1..=genus`.
///
/// # Safety
/// `counts` must point to `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lg_curve_zeta_from_point_counts(
    q: u64,
    genus: u32,
    counts: *const i64,
    len: usize,
    out: *mut *mut LgCurveZeta,
) -> LgStatus {
    guard(|| {
        let (Some(c), false) = (input(counts, len), out.is_null()) else {
            return fail(LgStatus::NullPointer, "counts or out is null");
        };
        match arith::zeta_from_point_counts(q, genus, c) {
            Ok(z) => {
                *out = Box::into_raw(Box::new(LgCurveZeta(z)));
                LgStatus::Ok
            }
            Err(e) => fail(LgStatus::InvalidArgument, e),
        }
    })
}

/// # Safety
/// `z` must come from a constructor above and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lg_curve_zeta_free(z: *mut LgCurveZeta) {
    if !z.is_null() {
        drop(Box::from_raw(z));
    }
}

/// Class number `P(1)`.
///
/// # Safety
/// `z` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lg_curve_zeta_class_number(
    z: *const LgCurveZeta,
    out: *mut u64,
) -> LgStatus {
    guard(|| {
        let (Some(z), false) = (z.as_ref(), out.is_null()) else {
            return fail(LgStatus::NullPointer, "handle or out is null");
        };
        match u64::try_from(z.0.class_number()) {
            Ok(h) => {
                *out = h;
                LgStatus::Ok
            }
            Err(_) => fail(LgStatus::Overflow, "class number exceeds u64"),
        }
    })
}

/// Writes `b_0..=b_n`, the effective-divisor counts by degree, to `out[0..=n]`.
///
/// # Safety
/// `z` must be a live handle; `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn lg_curve_zeta_divisor_counts(
    z: *const LgCurveZeta,
    n: usize,
    out: *mut u64,
    len: usize,
) -> LgStatus {
    guard(|| {
        let (Some(z), false) = (z.as_ref(), out.is_null()) else {
            return fail(LgStatus::NullPointer, "handle or out is null");
        };
        if len <= n {
            return fail(
                LgStatus::BufferTooSmall,
                format!("need {} slots, got {len}", n + 1),
            );
        }
        let series = z.0.divisor_series(n);
        let mut vals = Vec::with_capacity(series.len());
        for b in &series {
            match u64::try_from(b) {
                Ok(v) => vals.push(v),
                Err(_) => return fail(LgStatus::Overflow, "divisor count exceeds u64"),
            }
        }
        slice::from_raw_parts_mut(out, len)[..vals.len()].copy_from_slice(&vals);
        LgStatus::Ok
    })
}

/// Whether `(sqrt q - 1)^(2g) <= P(1) <= (sqrt q + 1)^(2g)`.
///
/// # Safety
/// `z` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lg_curve_zeta_weil_bounds_hold(
    z: *const LgCurveZeta,
    out: *mut bool,
) -> LgStatus {
    guard(|| {
        let (Some(z), false) = (z.as_ref(), out.is_null()) else {
            return fail(LgStatus::NullPointer, "handle or out is null");
        };
        *out = z.0.weil_bounds_hold();
        LgStatus::Ok
    })
}

/// Type data for a label such as `"E6"` or `"2A3"`, as a JSON string to release
/// with [`lg_string_free`].
///
/// # Safety
/// `type_label` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lg_type_data_json(
    type_label: *const c_char,
    out: *mut *mut c_char,
) -> LgStatus {
    guard(|| {
        if out.is_null() {
            return fail(LgStatus::NullPointer, "out is null");
        }
        let l = match label(type_label) {
            Ok(l) => l,
            Err(s) => return s,
        };
        match arith::type_data(l) {
            Ok(td) => {
                let json = serde_json::to_string(&td).expect("type data serializes");
                *out = CString::new(json).expect("JSON has no NUL").into_raw();
                LgStatus::Ok
            }
            Err(e) => fail(LgStatus::InvalidArgument, e),
        }
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds the graded algebra of the parahoric of type `xi[0..xi_len]` (node
/// indices; empty means the special vertex) for a finite type and twist over
/// F_p on grades `1..=window` (`0` picks the default window).
///
/// # Safety
/// `type_label` must be a NUL-terminated string, `xi` must hold `xi_len`
/// values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lg_parahoric_new(
    type_label: *const c_char,
    twist: u32,
    xi: *const usize,
    xi_len: usize,
    p: u32,
    window: usize,
    out: *mut *mut LgParahoric,
) -> LgStatus {
    guard(|| {
        let (Some(xi), false) = (input(xi, xi_len), out.is_null()) else {
            return fail(LgStatus::NullPointer, "xi or out is null");
        };
        let l = match label(type_label) {
            Ok(l) => l,
            Err(s) => return s,
        };
        let t: CartanType = match l.parse() {
            Ok(t) => t,
            Err(e) => return fail(LgStatus::InvalidArgument, e),
        };
        let ad = match build_root_datum(t).and_then(|rd| build_affine_datum(&rd, twist)) {
            Ok(ad) => ad,
            Err(e) => return fail(LgStatus::InvalidArgument, e),
        };
        let xi = if xi.is_empty() {
            vec![ad.special_index()]
        } else {
            xi.to_vec()
        };
        let window = if window == 0 {
            parahoric::default_window(&ad)
        } else {
            window
        };
        match parahoric::build_parahoric_graded(&ad, &xi, p, window) {
            Ok(g) => {
                *out = Box::into_raw(Box::new(LgParahoric(g)));
                LgStatus::Ok
            }
            Err(e) => fail(LgStatus::InvalidArgument, e),
        }
    })
}

/// # Safety
/// `g` must come from [`lg_parahoric_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lg_parahoric_free(g: *mut LgParahoric) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Number of grades in the window.
///
/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lg_parahoric_window(g: *const LgParahoric, out: *mut usize) -> LgStatus {
    guard(|| {
        let (Some(g), false) = (g.as_ref(), out.is_null()) else {
            return fail(LgStatus::NullPointer, "handle or out is null");
        };
        *out = g.0.window();
        LgStatus::Ok
    })
}

/// Writes the dimensions of grades `1..=window` to `out[0..window]`.
///
/// # Safety
/// `g` must be a live handle; `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn lg_parahoric_grade_dims(
    g: *const LgParahoric,
    out: *mut usize,
    len: usize,
) -> LgStatus {
    guard(|| {
        let (Some(g), false) = (g.as_ref(), out.is_null()) else {
            return fail(LgStatus::NullPointer, "handle or out is null");
        };
        let dims = g.0.grade_dims();
        if len < dims.len() {
            return fail(
                LgStatus::BufferTooSmall,
                format!("need {} slots, got {len}", dims.len()),
            );
        }
        slice::from_raw_parts_mut(out, len)[..dims.len()].copy_from_slice(&dims);
        LgStatus::Ok
    })
}

/// Whether the Jacobi identity holds on the window.
///
/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lg_parahoric_jacobi_holds(
    g: *const LgParahoric,
    out: *mut bool,
) -> LgStatus {
    guard(|| {
        let (Some(g), false) = (g.as_ref(), out.is_null()) else {
            return fail(LgStatus::NullPointer, "handle or out is null");
        };
        *out = g.0.jacobi_holds();
        LgStatus::Ok
    })
}
