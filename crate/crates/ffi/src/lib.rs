//! C ABI over `chase_rd`.
//!
//! Every function returns a [`ChaseRdStatus`]. On failure a message is kept
//! per thread and can be read with [`chase_rd_last_error`]. Arrays are
//! passed as pointer plus length; output arrays must hold the stated number
//! of elements. Strings returned through `char **` are owned by the caller
//! and released with [`chase_rd_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use chase_rd::bch::{BchCode, DecodeOutcome};
use chase_rd::cli::{execute, ExperimentConfig, Kind};
use chase_rd::exact::{list_failure_given_composition, optimize_flip};
use chase_rd::waterfill::{awgn_asymptotic_level, solve_waterfill, WaterFillInput};
use chase_rd::Error;

/// Result codes. The nonzero codes 2 to 4 match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChaseRdStatus {
    Ok = 0,
    InvalidInput = 2,
    Budget = 3,
    Numerical = 4,
    NullPointer = 5,
    Panic = 6,
}

/// Opaque BCH code handle.
pub struct ChaseRdBch {
    code: BchCode,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

struct Failure(ChaseRdStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidInput(_) => ChaseRdStatus::InvalidInput,
            Error::Budget { .. } => ChaseRdStatus::Budget,
            Error::Numerical(_) => ChaseRdStatus::Numerical,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(ChaseRdStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ChaseRdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ChaseRdStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            ChaseRdStatus::Panic
        }
    }
}

unsafe fn input<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(null(what))
    } else {
        Ok(slice::from_raw_parts(p, len))
    }
}

unsafe fn output<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        Ok(&mut [])
    } else if p.is_null() {
        Err(null(what))
    } else {
        Ok(slice::from_raw_parts_mut(p, len))
    }
}

unsafe fn write_opt<T>(p: *mut T, v: T) {
    if !p.is_null() {
        *p = v;
    }
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(ChaseRdStatus::InvalidInput, format!("{what} is not UTF-8: {e}")))
}

/// Message for the last failed call on this thread. Valid until the next
/// call on the same thread; never null.
#[no_mangle]
pub extern "C" fn chase_rd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Reverse water-filling over `m` classes.
///
/// `out_q` and `out_d_star` hold `m` values each; any scalar output may be
/// null. `block_length` of 0 means the composition total.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn chase_rd_waterfill(
    composition: *const u64,
    p: *const f64,
    m: usize,
    t: u64,
    block_length: u64,
    out_q: *mut f64,
    out_d_star: *mut f64,
    out_nu: *mut f64,
    out_rate: *mut f64,
    out_log2_list_size: *mut f64,
) -> ChaseRdStatus {
    guard(|| {
        let comp = input(composition, m, "composition")?.to_vec();
        let p = input(p, m, "p")?.to_vec();
        let total = comp.iter().sum();
        let n = if block_length == 0 { total } else { block_length };
        let sol = solve_waterfill(&WaterFillInput::with_block_length(comp, p, t, n)?)?;
        output(out_q, m, "out_q")?.copy_from_slice(&sol.q);
        if !out_d_star.is_null() {
            output(out_d_star, m, "out_d_star")?.copy_from_slice(&sol.d_star);
        }
        write_opt(out_nu, sol.nu);
        write_opt(out_rate, sol.rate);
        write_opt(out_log2_list_size, sol.list_size.log2);
        Ok(())
    })
}

/// Exact list failure probability for class composition `composition`,
/// crossovers `p`, flip vector `q` and real list length `list_len >= 1`.
///
/// # Safety
/// Pointers must be valid for `m` elements; `out` for one.
#[no_mangle]
pub unsafe extern "C" fn chase_rd_list_failure(
    composition: *const u64,
    p: *const f64,
    q: *const f64,
    m: usize,
    t: u64,
    list_len: f64,
    out: *mut f64,
) -> ChaseRdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let v = list_failure_given_composition(
            input(composition, m, "composition")?,
            input(p, m, "p")?,
            input(q, m, "q")?,
            t,
            list_len,
        )?;
        *out = v;
        Ok(())
    })
}

/// Flip vector minimizing the exact list failure probability.
///
/// # Safety
/// Pointers must be valid for `m` elements; `out_value` may be null.
#[no_mangle]
pub unsafe extern "C" fn chase_rd_optimize_flip(
    composition: *const u64,
    p: *const f64,
    m: usize,
    t: u64,
    list_len: f64,
    out_q: *mut f64,
    out_value: *mut f64,
) -> ChaseRdStatus {
    guard(|| {
        let opt = optimize_flip(input(composition, m, "composition")?, input(p, m, "p")?, t, list_len)?;
        output(out_q, m, "out_q")?.copy_from_slice(&opt.q_star);
        write_opt(out_value, opt.value);
        Ok(())
    })
}

/// Asymptotic BI-AWGN water level and LLR cutoff for noise `sigma` and
/// distortion budget `distortion`. `out_threshold_llr` may be null.
///
/// # Safety
/// `out_nu` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn chase_rd_awgn_level(
    sigma: f64,
    distortion: f64,
    out_nu: *mut f64,
    out_threshold_llr: *mut f64,
) -> ChaseRdStatus {
    guard(|| {
        if out_nu.is_null() {
            return Err(null("out_nu"));
        }
        let rule = awgn_asymptotic_level(sigma, distortion)?;
        *out_nu = rule.nu;
        write_opt(out_threshold_llr, rule.threshold_llr);
        Ok(())
    })
}

/// Narrow-sense binary BCH code of length `2^m - 1` correcting `t` errors.
///
/// # Safety
/// `out` must be valid for one write. Free the handle with
/// [`chase_rd_bch_free`].
#[no_mangle]
pub unsafe extern "C" fn chase_rd_bch_new(m: u32, t: usize, out: *mut *mut ChaseRdBch) -> ChaseRdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let code = BchCode::new(m, t)?;
        *out = Box::into_raw(Box::new(ChaseRdBch { code }));
        Ok(())
    })
}

/// # Safety
/// `handle` must come from [`chase_rd_bch_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn chase_rd_bch_free(handle: *mut ChaseRdBch) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Code length, or 0 for a null handle.
///
/// # Safety
/// `handle` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn chase_rd_bch_n(handle: *const ChaseRdBch) -> usize {
    handle.as_ref().map_or(0, |h| h.code.n())
}

/// Code dimension, or 0 for a null handle.
///
/// # Safety
/// `handle` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn chase_rd_bch_k(handle: *const ChaseRdBch) -> usize {
    handle.as_ref().map_or(0, |h| h.code.k())
}

/// Systematic encoding of `k` message bits into `n` codeword bits (one bit
/// per byte).
///
/// # Safety
/// `message` must hold `k` bytes and `codeword` `n` bytes.
#[no_mangle]
pub unsafe extern "C" fn chase_rd_bch_encode(
    handle: *const ChaseRdBch,
    message: *const u8,
    codeword: *mut u8,
) -> ChaseRdStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("handle"))?;
        let cw = h.code.encode(input(message, h.code.k(), "message")?)?;
        output(codeword, h.code.n(), "codeword")?.copy_from_slice(&cw);
        Ok(())
    })
}

/// Bounded-distance decoding of an `n`-bit word. On success `*corrected`
/// is 1 and `codeword` holds the decoded word; on decoding failure
/// `*corrected` is 0 and `codeword` is left unchanged.
///
/// # Safety
/// `word` and `codeword` must hold `n` bytes; `corrected` one byte.
#[no_mangle]
pub unsafe extern "C" fn chase_rd_bch_decode(
    handle: *const ChaseRdBch,
    word: *const u8,
    codeword: *mut u8,
    corrected: *mut u8,
) -> ChaseRdStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("handle"))?;
        if corrected.is_null() {
            return Err(null("corrected"));
        }
        let n = h.code.n();
        let out = output(codeword, n, "codeword")?;
        match h.code.decode(input(word, n, "word")?)? {
            DecodeOutcome::Corrected { codeword: cw, .. } => {
                out.copy_from_slice(&cw);
                *corrected = 1;
            }
            DecodeOutcome::Failure => *corrected = 0,
        }
        Ok(())
    })
}

/// Run a CLI command (`"waterfill"`, `"awgn-rule"`, `"exact"`,
/// `"optimize"`, `"simulate"` or `"figure"`) on a JSON config and return the
/// JSON report in `*out`.
///
/// # Safety
/// `command` and `config_json` must be NUL-terminated; `out` valid for one
/// write. Release `*out` with [`chase_rd_string_free`].
#[no_mangle]
pub unsafe extern "C" fn chase_rd_run_json(
    command: *const c_char,
    config_json: *const c_char,
    out: *mut *mut c_char,
) -> ChaseRdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let name = c_str(command, "command")?;
        let kind: Kind = serde_json::from_value(serde_json::Value::String(name.to_string()))
            .map_err(|_| Failure(ChaseRdStatus::InvalidInput, format!("unknown command {name:?}")))?;
        let mut config = ExperimentConfig::from_json(c_str(config_json, "config_json")?)?;
        if let Some(k) = config.kind {
            if k != kind {
                return Err(Failure(ChaseRdStatus::InvalidInput, format!("config kind is {k} but the command is {kind}")));
            }
        }
        config.apply_preset()?;
        let text = execute(kind, &config)?.to_json();
        *out = CString::new(text).map_err(|e| Failure(ChaseRdStatus::Numerical, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn chase_rd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
