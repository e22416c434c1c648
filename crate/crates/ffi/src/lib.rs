//! C ABI over `garchpd`.
//!
//! Objects cross the boundary as opaque handles ([`GdParams`], [`GdTable`])
//! created and destroyed by this library. Every fallible call returns a
//! [`GdStatus`]; on failure `gd_last_error()` gives a message for the
//! calling thread. Outputs are written through pointers only on success.
//! Panics are caught and reported as `GD_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use garchpd::density::{build_table, standardize, CoefficientTable, SeriesConfig};
use garchpd::model::GarchParams;
use garchpd::montecarlo::{plan, simulate_terminal};
use garchpd::risk::{risk_at, RiskOptions};
use garchpd::stationary::tail_index;
use garchpd::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GdStatus {
    Ok = 0,
    NullPointer = 1,
    /// Argument outside the domain of the operation.
    Domain = 2,
    InvalidParams = 3,
    /// A series, iteration or quadrature missed its tolerance.
    Convergence = 4,
    Resource = 5,
    /// Malformed JSON or table document.
    Format = 6,
    Io = 7,
    Panic = 8,
}

/// Model parameters. Opaque.
pub struct GdParams(GarchParams);

/// Coefficient table for one horizon. Opaque.
pub struct GdTable(CoefficientTable);

/// VaR and ES at one tail probability, in the table's units.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GdRisk {
    pub p: f64,
    pub var: f64,
    pub es: f64,
    pub iterations: u32,
    pub gaussian_var: f64,
    pub gaussian_es: f64,
    pub ratio_var: f64,
    pub ratio_es: f64,
}

/// Replications needed for Monte Carlo VaR and ES intervals of length 10^-a.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GdPlan {
    pub r_var: u64,
    pub r_es: u64,
    pub f_at_q: f64,
    pub v_sq: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> GdStatus {
    match e {
        Error::Domain(_) => GdStatus::Domain,
        Error::Convergence { .. } => GdStatus::Convergence,
        Error::Resource(_) => GdStatus::Resource,
        Error::InvalidParams(_) => GdStatus::InvalidParams,
        Error::Format(_) | Error::Json(_) => GdStatus::Format,
        Error::Io(_) => GdStatus::Io,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> GdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GdStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            GdStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            GdStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    unsafe { p.as_ref() }.ok_or(Fail::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    unsafe { p.as_mut() }.ok_or(Fail::Null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Fail::Lib(Error::Format(format!("{what} is not valid UTF-8"))))
}

/// Message for the last failed call on this thread, or NULL. Valid until
/// the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn gd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Free a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn gd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Parameters from values. `lambda` is the GJR leverage term; `sign0` is
/// the sign of x₀ (+1 or −1), which only matters when `lambda` ≠ 0.
///
/// # Safety
/// `out_params` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gd_params_new(
    omega: f64,
    alpha: f64,
    beta: f64,
    lambda: f64,
    sigma0_sq: f64,
    x0_sq: f64,
    sign0: i32,
    out_params: *mut *mut GdParams,
) -> GdStatus {
    guard(|| {
        let slot = unsafe { out(out_params, "out_params") }?;
        let sign = match sign0 {
            1 => 1,
            -1 => -1,
            s => return Err(Error::InvalidParams(format!("sign0 must be +1 or -1, got {s}")).into()),
        };
        let p = GarchParams::new(omega, alpha, beta, lambda, sigma0_sq, x0_sq, sign)?;
        *slot = Box::into_raw(Box::new(GdParams(p)));
        Ok(())
    })
}

/// Parameters from a JSON document, in the same format as the CLI's
/// `--params` files.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out_params` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gd_params_from_json(json: *const c_char, out_params: *mut *mut GdParams) -> GdStatus {
    guard(|| {
        let slot = unsafe { out(out_params, "out_params") }?;
        let text = unsafe { c_str(json, "json") }?;
        let p = GarchParams::from_json_str(text)?;
        *slot = Box::into_raw(Box::new(GdParams(p)));
        Ok(())
    })
}

/// # Safety
/// `params` must come from this library and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn gd_params_free(params: *mut GdParams) {
    if !params.is_null() {
        drop(unsafe { Box::from_raw(params) });
    }
}

/// Build the coefficient table for horizon `h`. `j_max` = 0 uses the default.
///
/// # Safety
/// `params` must be a live handle; `out_table` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gd_table_build(
    params: *const GdParams,
    h: u32,
    j_max: u32,
    out_table: *mut *mut GdTable,
) -> GdStatus {
    guard(|| {
        let p = unsafe { borrow(params, "params") }?;
        let slot = unsafe { out(out_table, "out_table") }?;
        let mut config = SeriesConfig::default();
        if j_max > 0 {
            config.j_max = j_max as usize;
        }
        let t = build_table(&p.0, h as usize, &config)?;
        *slot = Box::into_raw(Box::new(GdTable(t)));
        Ok(())
    })
}

/// New table rescaled to unit variance. `out_scale` (may be NULL) receives
/// the standard deviation of x_h.
///
/// # Safety
/// `table` must be a live handle; `out_table` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gd_table_standardize(
    table: *const GdTable,
    out_scale: *mut f64,
    out_table: *mut *mut GdTable,
) -> GdStatus {
    guard(|| {
        let t = unsafe { borrow(table, "table") }?;
        let slot = unsafe { out(out_table, "out_table") }?;
        let (scale, s) = standardize(&t.0)?;
        if let Some(o) = unsafe { out_scale.as_mut() } {
            *o = scale;
        }
        *slot = Box::into_raw(Box::new(GdTable(s)));
        Ok(())
    })
}

/// # Safety
/// `table` must come from this library and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn gd_table_free(table: *mut GdTable) {
    if !table.is_null() {
        drop(unsafe { Box::from_raw(table) });
    }
}

/// Serialize a table. Free the result with `gd_string_free`.
///
/// # Safety
/// `table` must be a live handle; `out_json` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gd_table_to_json(table: *const GdTable, out_json: *mut *mut c_char) -> GdStatus {
    guard(|| {
        let t = unsafe { borrow(table, "table") }?;
        let slot = unsafe { out(out_json, "out_json") }?;
        let s = t.0.to_json()?;
        *slot = CString::new(s).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

/// # Safety
/// `json` must be a NUL-terminated string; `out_table` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gd_table_from_json(json: *const c_char, out_table: *mut *mut GdTable) -> GdStatus {
    guard(|| {
        let slot = unsafe { out(out_table, "out_table") }?;
        let text = unsafe { c_str(json, "json") }?;
        let t = CoefficientTable::from_json(text)?;
        *slot = Box::into_raw(Box::new(GdTable(t)));
        Ok(())
    })
}

/// Horizon and outer truncation of a table. Either output may be NULL.
///
/// # Safety
/// `table` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gd_table_info(table: *const GdTable, out_h: *mut u32, out_j_max: *mut u32) -> GdStatus {
    guard(|| {
        let t = unsafe { borrow(table, "table") }?;
        if let Some(o) = unsafe { out_h.as_mut() } {
            *o = t.0.h as u32;
        }
        if let Some(o) = unsafe { out_j_max.as_mut() } {
            *o = t.0.j_max() as u32;
        }
        Ok(())
    })
}

/// # Safety
/// `table` must be a live handle; `out_value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gd_pdf(table: *const GdTable, u: f64, out_value: *mut f64) -> GdStatus {
    guard(|| {
        let t = unsafe { borrow(table, "table") }?;
        *unsafe { out(out_value, "out_value") }? = t.0.pdf_x(u);
        Ok(())
    })
}

/// # Safety
/// `table` must be a live handle; `out_value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gd_cdf(table: *const GdTable, u: f64, out_value: *mut f64) -> GdStatus {
    guard(|| {
        let t = unsafe { borrow(table, "table") }?;
        *unsafe { out(out_value, "out_value") }? = t.0.cdf_x(u);
        Ok(())
    })
}

/// Density of z_h = x_h² at `w`.
///
/// # Safety
/// `table` must be a live handle; `out_value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gd_pdf_z(table: *const GdTable, w: f64, out_value: *mut f64) -> GdStatus {
    guard(|| {
        let t = unsafe { borrow(table, "table") }?;
        let slot = unsafe { out(out_value, "out_value") }?;
        *slot = t.0.pdf_z(w)?;
        Ok(())
    })
}

/// # Safety
/// `table` must be a live handle; `out_value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gd_cdf_z(table: *const GdTable, w: f64, out_value: *mut f64) -> GdStatus {
    guard(|| {
        let t = unsafe { borrow(table, "table") }?;
        let slot = unsafe { out(out_value, "out_value") }?;
        *slot = t.0.cdf_z(w)?;
        Ok(())
    })
}

/// E(x_h^{2m}) in the table's units.
///
/// # Safety
/// `table` must be a live handle; `out_value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gd_moment(table: *const GdTable, m: u32, out_value: *mut f64) -> GdStatus {
    guard(|| {
        let t = unsafe { borrow(table, "table") }?;
        let slot = unsafe { out(out_value, "out_value") }?;
        *slot = t.0.moment(m)?;
        Ok(())
    })
}

/// VaR and ES at tail probability `p` in (0, 0.5].
///
/// # Safety
/// `table` must be a live handle; `out_risk` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gd_risk(table: *const GdTable, p: f64, out_risk: *mut GdRisk) -> GdStatus {
    guard(|| {
        let t = unsafe { borrow(table, "table") }?;
        let slot = unsafe { out(out_risk, "out_risk") }?;
        let r = risk_at(&t.0, p, &RiskOptions::default())?;
        *slot = GdRisk {
            p: r.p,
            var: r.var,
            es: r.es,
            iterations: r.iterations as u32,
            gaussian_var: r.gaussian_var,
            gaussian_es: r.gaussian_es,
            ratio_var: r.ratio_var,
            ratio_es: r.ratio_es,
        };
        Ok(())
    })
}

/// Monte Carlo replication plan at confidence 1 − `eta` and interval
/// length 10^-`a`, from the exact VaR and ES of `table`.
///
/// # Safety
/// `table` must be a live handle; `out_plan` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gd_plan(table: *const GdTable, p: f64, eta: f64, a: f64, out_plan: *mut GdPlan) -> GdStatus {
    guard(|| {
        let t = unsafe { borrow(table, "table") }?;
        let slot = unsafe { out(out_plan, "out_plan") }?;
        let pl = plan(&t.0, p, eta, a, &RiskOptions::default())?;
        *slot = GdPlan {
            r_var: pl.r_var,
            r_es: pl.r_es,
            f_at_q: pl.f_at_q,
            v_sq: pl.v_sq,
        };
        Ok(())
    })
}

/// Stationary tail index κ solving E((αε² + β)^κ) = 1.
///
/// # Safety
/// `out_kappa` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gd_tail_index(alpha: f64, beta: f64, tol: f64, out_kappa: *mut f64) -> GdStatus {
    guard(|| {
        let slot = unsafe { out(out_kappa, "out_kappa") }?;
        *slot = tail_index(alpha, beta, tol)?.kappa;
        Ok(())
    })
}

/// Simulate `r` terminal values x_h into `out_sample`, which must hold
/// `r` doubles. Deterministic given `seed`.
///
/// # Safety
/// `params` must be a live handle; `out_sample` must be valid for `r` writes.
#[no_mangle]
pub unsafe extern "C" fn gd_simulate(
    params: *const GdParams,
    h: u32,
    r: usize,
    seed: u64,
    out_sample: *mut f64,
) -> GdStatus {
    guard(|| {
        let p = unsafe { borrow(params, "params") }?;
        if out_sample.is_null() {
            return Err(Fail::Null("out_sample"));
        }
        let xs = simulate_terminal(&p.0, h as usize, r, seed)?;
        unsafe { std::slice::from_raw_parts_mut(out_sample, r) }.copy_from_slice(&xs);
        Ok(())
    })
}
