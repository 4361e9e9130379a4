//! C ABI over `pricing-core`.
//!
//! Instances and outcomes are opaque heap handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! a [`PricingStatus`]; on failure, [`pricing_last_error`] holds a message for
//! the calling thread. Money crosses the boundary as canonical decimal or
//! fraction strings (`"5/2"`) and, for convenience, as doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pricing_core::capprofit::{run_algorithm1, Alg1Config, Mode};
use pricing_core::highway::{highway_run, maxbuy_run, HighwayConfig, MaxBuyConfig, TrimMode};
use pricing_core::io::{instance_from_json, outcome_to_json};
use pricing_core::num::{format_money, parse_money, to_f64};
use pricing_core::oracle::{exact_profit, OracleBudget};
use pricing_core::swm::ExactSwm;
use pricing_core::treeprice::tollbooth_tree;
use pricing_core::{evaluate, Instance, Numeric, PricedOutcome, PricingError};

/// Result codes; `PRICING_OK` is zero.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PricingStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidInstance = 4,
    BudgetViolation = 5,
    CapacityViolation = 6,
    ShapeViolation = 7,
    UnsupportedEncoding = 8,
    Infeasible = 9,
    Unbounded = 10,
    NumericFailure = 11,
    BudgetExceeded = 12,
    NotATree = 13,
    VerifierContractBroken = 14,
    ModeMismatch = 15,
    MonotoneViolation = 16,
    NoProgress = 17,
    NoPrivateItem = 18,
    Io = 19,
    OutOfRange = 20,
    Panic = 99,
}

impl From<&PricingError> for PricingStatus {
    fn from(e: &PricingError) -> Self {
        use PricingError as E;
        match e {
            E::BudgetViolation(_) => PricingStatus::BudgetViolation,
            E::CapacityViolation(_) => PricingStatus::CapacityViolation,
            E::ShapeViolation(_) => PricingStatus::ShapeViolation,
            E::UnsupportedEncoding(_) => PricingStatus::UnsupportedEncoding,
            E::Infeasible => PricingStatus::Infeasible,
            E::Unbounded => PricingStatus::Unbounded,
            E::NumericFailure(_) => PricingStatus::NumericFailure,
            E::BudgetExceeded { .. } => PricingStatus::BudgetExceeded,
            E::NotATree(_) => PricingStatus::NotATree,
            E::VerifierContractBroken(_) => PricingStatus::VerifierContractBroken,
            E::ModeMismatch(_) => PricingStatus::ModeMismatch,
            E::MonotoneViolation(_) => PricingStatus::MonotoneViolation,
            E::NoProgress(_) => PricingStatus::NoProgress,
            E::NoPrivateItem(_) => PricingStatus::NoPrivateItem,
            E::InvalidInstance(_) => PricingStatus::InvalidInstance,
            E::Parse(_) => PricingStatus::Parse,
            E::Io(_) => PricingStatus::Io,
        }
    }
}

/// Rounding used by [`pricing_run_alg1`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PricingAlg1Mode {
    Subadditive = 0,
    General = 1,
}

/// Trimming used by [`pricing_run_highway`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PricingHighwayMode {
    Subadditive = 0,
    Unlimited = 1,
}

/// Opaque instance handle.
pub struct PricingInstance {
    inner: Instance,
}

/// Opaque outcome handle: prices, allocation and profit.
pub struct PricingOutcome {
    inner: PricedOutcome,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (PricingStatus, String)>) -> PricingStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PricingStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            PricingStatus::Panic
        }
    }
}

fn core_err(e: PricingError) -> (PricingStatus, String) {
    (PricingStatus::from(&e), e.to_string())
}

fn null(what: &str) -> (PricingStatus, String) {
    (PricingStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `s` must be null or a valid NUL-terminated string.
unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, (PricingStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| (PricingStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// # Safety
/// `p` must be null or a handle from this library that was not freed.
unsafe fn instance<'a>(p: *const PricingInstance) -> Result<&'a Instance, (PricingStatus, String)> {
    p.as_ref().map(|h| &h.inner).ok_or_else(|| null("instance"))
}

/// # Safety
/// `out` must be null or writable.
unsafe fn put_outcome(out: *mut *mut PricingOutcome, o: PricedOutcome) -> Result<(), (PricingStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(PricingOutcome { inner: o }));
    Ok(())
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("interior nuls removed").into_raw()
}

/// Message for the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pricing_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a JSON instance into `*out`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pricing_instance_from_json(json: *const c_char, out: *mut *mut PricingInstance) -> PricingStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = instance_from_json(text).map_err(core_err)?;
        *out = Box::into_raw(Box::new(PricingInstance { inner }));
        Ok(())
    })
}

/// # Safety
/// `inst` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn pricing_instance_free(inst: *mut PricingInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Number of items, or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pricing_instance_item_count(inst: *const PricingInstance) -> usize {
    inst.as_ref().map_or(0, |h| h.inner.m)
}

/// Number of customers, or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pricing_instance_customer_count(inst: *const PricingInstance) -> usize {
    inst.as_ref().map_or(0, |h| h.inner.n())
}

/// The capacity-schedule algorithm in exact arithmetic; `epsilon` is a decimal or fraction string.
///
/// # Safety
/// Pointers must be valid as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn pricing_run_alg1(
    inst: *const PricingInstance,
    epsilon: *const c_char,
    mode: PricingAlg1Mode,
    trials: u32,
    seed: u64,
    out: *mut *mut PricingOutcome,
) -> PricingStatus {
    guard(|| {
        let inst = instance(inst)?;
        let epsilon = parse_money(read_str(epsilon, "epsilon")?).map_err(core_err)?;
        let mode = match mode {
            PricingAlg1Mode::Subadditive => Mode::Subadditive,
            PricingAlg1Mode::General => Mode::General,
        };
        let cfg = Alg1Config { epsilon, mode, trials: trials as usize, seed, numeric: Numeric::Exact };
        put_outcome(out, run_algorithm1(inst, &cfg).map_err(core_err)?.outcome)
    })
}

/// The capacity-schedule algorithm with the tree rounding at scale `alpha`.
///
/// # Safety
/// Pointers must be valid as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn pricing_run_tree(
    inst: *const PricingInstance,
    epsilon: *const c_char,
    alpha: f64,
    trials: u32,
    seed: u64,
    out: *mut *mut PricingOutcome,
) -> PricingStatus {
    guard(|| {
        let inst = instance(inst)?;
        let epsilon = parse_money(read_str(epsilon, "epsilon")?).map_err(core_err)?;
        let cfg = Alg1Config { epsilon, mode: Mode::Subadditive, trials: trials as usize, seed, numeric: Numeric::Exact };
        put_outcome(out, tollbooth_tree(inst, &cfg, alpha, &ExactSwm::default()).map_err(core_err)?.outcome)
    })
}

/// The highway pipeline.
///
/// # Safety
/// Pointers must be valid as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn pricing_run_highway(
    inst: *const PricingInstance,
    mode: PricingHighwayMode,
    trials: u32,
    seed: u64,
    out: *mut *mut PricingOutcome,
) -> PricingStatus {
    guard(|| {
        let inst = instance(inst)?;
        let mode = match mode {
            PricingHighwayMode::Subadditive => TrimMode::Subadditive,
            PricingHighwayMode::Unlimited => TrimMode::Unlimited,
        };
        let cfg = HighwayConfig { mode, trials: trials as usize, seed, numeric: Numeric::Exact };
        put_outcome(out, highway_run(inst, &cfg).map_err(core_err)?.outcome)
    })
}

/// Multi-product pricing.
///
/// # Safety
/// Pointers must be valid as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn pricing_run_maxbuy(
    inst: *const PricingInstance,
    trials: u32,
    seed: u64,
    out: *mut *mut PricingOutcome,
) -> PricingStatus {
    guard(|| {
        let inst = instance(inst)?;
        let cfg = MaxBuyConfig { trials: trials as usize, seed, numeric: Numeric::Exact };
        put_outcome(out, maxbuy_run(inst, &cfg).map_err(core_err)?.outcome)
    })
}

/// Exhaustive optimum with the default enumeration budget.
///
/// # Safety
/// Pointers must be valid as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn pricing_exact_profit(inst: *const PricingInstance, out: *mut *mut PricingOutcome) -> PricingStatus {
    guard(|| {
        let inst = instance(inst)?;
        put_outcome(out, exact_profit(inst, &OracleBudget::default()).map_err(core_err)?)
    })
}

/// Re-checks `outcome` against `inst` with capacities enforced.
///
/// # Safety
/// Both handles must be live.
#[no_mangle]
pub unsafe extern "C" fn pricing_evaluate(inst: *const PricingInstance, outcome: *const PricingOutcome) -> PricingStatus {
    guard(|| {
        let inst = instance(inst)?;
        let o = outcome.as_ref().ok_or_else(|| null("outcome"))?;
        evaluate(inst, &o.inner.prices, &o.inner.allocation).map_err(core_err)?;
        Ok(())
    })
}

/// # Safety
/// `outcome` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn pricing_outcome_free(outcome: *mut PricingOutcome) {
    if !outcome.is_null() {
        drop(Box::from_raw(outcome));
    }
}

/// Profit as a double (NaN for a null handle).
///
/// # Safety
/// `outcome` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pricing_outcome_profit(outcome: *const PricingOutcome) -> f64 {
    outcome.as_ref().map_or(f64::NAN, |o| to_f64(&o.inner.profit))
}

/// Exact profit string; free with [`pricing_string_free`]. Null for a null handle.
///
/// # Safety
/// `outcome` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pricing_outcome_profit_string(outcome: *const PricingOutcome) -> *mut c_char {
    outcome.as_ref().map_or(ptr::null_mut(), |o| into_c_string(format_money(&o.inner.profit)))
}

/// Price of item `item` as a double.
///
/// # Safety
/// `outcome` must be a live handle and `price` writable.
#[no_mangle]
pub unsafe extern "C" fn pricing_outcome_price(outcome: *const PricingOutcome, item: usize, price: *mut f64) -> PricingStatus {
    guard(|| {
        let o = outcome.as_ref().ok_or_else(|| null("outcome"))?;
        if price.is_null() {
            return Err(null("price"));
        }
        let p = o.inner.prices.0.get(item).ok_or((PricingStatus::OutOfRange, format!("no item {item}")))?;
        *price = to_f64(p);
        Ok(())
    })
}

/// Whole outcome as JSON; free with [`pricing_string_free`].
///
/// # Safety
/// `outcome` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pricing_outcome_to_json(outcome: *const PricingOutcome) -> *mut c_char {
    outcome.as_ref().map_or(ptr::null_mut(), |o| into_c_string(outcome_to_json(&o.inner).to_string()))
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn pricing_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
