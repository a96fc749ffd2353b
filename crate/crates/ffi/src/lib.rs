//! C ABI over `mps-core`.
//!
//! Instances and schedules are opaque handles created from JSON or by the
//! built-in generators and released with their matching `*_free` function.
//! Every fallible call returns an [`MpsStatus`]; on failure the message is
//! available from [`mps_last_error`] on the same thread. Strings returned
//! through out-pointers are owned by the caller and released with
//! [`mps_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mps_core::heuristic::run_heuristic;
use mps_core::instance::{generate_instance, paper_base_instance, parse_instance, Dimensions, GeneratorRanges};
use mps_core::milp::MilpConfig;
use mps_core::report::{compare_models, render_report, ReportFormat};
use mps_core::schedule::{linear_profit, parse_schedule, render_schedule};
use mps_core::search::{multi_start, true_profit, SearchConfig};
use mps_core::{Error, Instance, ProductionSchedule, ProfitBreakdown};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpsStatus {
    Ok = 0,
    /// The instance or schedule admits no feasible plan.
    Infeasible = 1,
    /// Malformed JSON, wrong shapes or out-of-range values.
    InvalidInput = 2,
    /// An iteration, node or enumeration limit was reached.
    LimitReached = 3,
    /// A required pointer argument was null.
    NullPointer = 4,
    /// A panic or other unexpected failure inside the library.
    Internal = 5,
}

/// Opaque instance handle.
pub struct MpsInstance(Instance);

/// Opaque schedule handle.
pub struct MpsSchedule(ProductionSchedule);

/// Profit decomposition of one schedule.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MpsProfit {
    pub revenue: f64,
    pub material_cost: f64,
    pub inventory_cost: f64,
    pub variable_cost: f64,
    pub fixed_cost: f64,
    pub profit: f64,
    pub utilization: f64,
}

impl From<&ProfitBreakdown> for MpsProfit {
    fn from(b: &ProfitBreakdown) -> Self {
        Self {
            revenue: b.revenue,
            material_cost: b.material_cost,
            inventory_cost: b.inventory_cost,
            variable_cost: b.variable_cost,
            fixed_cost: b.fixed_cost,
            profit: b.profit,
            utilization: b.utilization,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> MpsStatus {
    match e.exit_code() {
        1 => MpsStatus::Infeasible,
        2 => MpsStatus::InvalidInput,
        3 => MpsStatus::LimitReached,
        _ => MpsStatus::Internal,
    }
}

enum Failure {
    Core(Error),
    Null(&'static str),
    Utf8,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> MpsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            MpsStatus::Ok
        }
        Ok(Err(Failure::Core(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(name))) => {
            set_last_error(&format!("null pointer: {name}"));
            MpsStatus::NullPointer
        }
        Ok(Err(Failure::Utf8)) => {
            set_last_error("input string is not valid UTF-8");
            MpsStatus::InvalidInput
        }
        Err(_) => {
            set_last_error("internal panic");
            MpsStatus::Internal
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, name: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::Utf8)
}

unsafe fn deref<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn write_out<T>(out: *mut T, value: T, name: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure::Core(Error::Validation("output contains NUL".into())))?;
    write_out(out, c.into_raw(), "out")
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(v).map_err(|e| Failure::Core(Error::from(e)))
}

/// Parses and validates an instance document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mps_instance_from_json(json: *const c_char, out: *mut *mut MpsInstance) -> MpsStatus {
    guard(|| {
        let inst = parse_instance(read_str(json, "json")?)?;
        write_out(out, Box::into_raw(Box::new(MpsInstance(inst))), "out")
    })
}

/// Builds the six-product base case with materials drawn from `material_seed`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mps_instance_base_case(material_seed: u64, out: *mut *mut MpsInstance) -> MpsStatus {
    guard(|| {
        let inst = paper_base_instance(material_seed);
        write_out(out, Box::into_raw(Box::new(MpsInstance(inst))), "out")
    })
}

/// Generates a random instance with the default ranges.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mps_instance_generate(
    seed: u64,
    n_products: usize,
    n_materials: usize,
    n_periods: usize,
    out: *mut *mut MpsInstance,
) -> MpsStatus {
    guard(|| {
        let dims = Dimensions::new(n_products, n_materials, n_periods);
        let inst = generate_instance(seed, dims, &GeneratorRanges::default())?;
        write_out(out, Box::into_raw(Box::new(MpsInstance(inst))), "out")
    })
}

/// Serializes an instance to JSON.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mps_instance_to_json(inst: *const MpsInstance, out: *mut *mut c_char) -> MpsStatus {
    guard(|| {
        let inst = deref(inst, "inst")?;
        write_string(out, inst.0.to_json())
    })
}

/// Releases an instance handle. Null is ignored.
///
/// # Safety
/// `inst` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mps_instance_free(inst: *mut MpsInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Parses a schedule document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mps_schedule_from_json(json: *const c_char, out: *mut *mut MpsSchedule) -> MpsStatus {
    guard(|| {
        let doc = parse_schedule(read_str(json, "json")?)?;
        write_out(out, Box::into_raw(Box::new(MpsSchedule(doc.into()))), "out")
    })
}

/// Serializes a schedule to a schedule document.
///
/// # Safety
/// `sched` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mps_schedule_to_json(sched: *const MpsSchedule, out: *mut *mut c_char) -> MpsStatus {
    guard(|| {
        let sched = deref(sched, "sched")?;
        write_string(out, render_schedule(&sched.0, None))
    })
}

/// Number of products and periods of a schedule.
///
/// # Safety
/// `sched` must be a live handle; the out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn mps_schedule_shape(
    sched: *const MpsSchedule,
    n_products: *mut usize,
    n_periods: *mut usize,
) -> MpsStatus {
    guard(|| {
        let s = deref(sched, "sched")?;
        write_out(n_products, s.0.x.len(), "n_products")?;
        write_out(n_periods, s.0.x.first().map_or(0, Vec::len), "n_periods")
    })
}

/// Production of product `product` in period `period`.
///
/// # Safety
/// `sched` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mps_schedule_get(
    sched: *const MpsSchedule,
    product: usize,
    period: usize,
    out: *mut f64,
) -> MpsStatus {
    guard(|| {
        let s = deref(sched, "sched")?;
        let v = s
            .0
            .x
            .get(product)
            .and_then(|row| row.get(period))
            .copied()
            .ok_or_else(|| Error::Shape(format!("index ({product}, {period}) out of range")))?;
        write_out(out, v, "out")
    })
}

/// Releases a schedule handle. Null is ignored.
///
/// # Safety
/// `sched` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mps_schedule_free(sched: *mut MpsSchedule) {
    if !sched.is_null() {
        drop(Box::from_raw(sched));
    }
}

/// Profit with whole-lot material purchasing.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mps_true_profit(
    inst: *const MpsInstance,
    sched: *const MpsSchedule,
    out: *mut MpsProfit,
) -> MpsStatus {
    guard(|| {
        let b = true_profit(&deref(inst, "inst")?.0, &deref(sched, "sched")?.0)?;
        write_out(out, MpsProfit::from(&b), "out")
    })
}

/// Profit with fractional material cost.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mps_linear_profit(
    inst: *const MpsInstance,
    sched: *const MpsSchedule,
    out: *mut MpsProfit,
) -> MpsStatus {
    guard(|| {
        let b = linear_profit(&deref(inst, "inst")?.0, &deref(sched, "sched")?.0)?;
        write_out(out, MpsProfit::from(&b), "out")
    })
}

/// Solves the integer linear model and applies lot rounding. Writes the
/// schedule handle and, when `profit` is non-null, its updated profit.
///
/// # Safety
/// `inst` must be live; `out` must be writable; `profit` may be null.
#[no_mangle]
pub unsafe extern "C" fn mps_run_heuristic(
    inst: *const MpsInstance,
    out: *mut *mut MpsSchedule,
    profit: *mut MpsProfit,
) -> MpsStatus {
    guard(|| {
        let sol = run_heuristic(&deref(inst, "inst")?.0, &MilpConfig::default())?;
        if !profit.is_null() {
            profit.write(MpsProfit::from(&sol.breakdown));
        }
        write_out(out, Box::into_raw(Box::new(MpsSchedule(sol.schedule))), "out")
    })
}

/// Multi-start search on the lot-quantized profit. `threads` of 0 uses all
/// cores; results do not depend on it.
///
/// # Safety
/// `inst` must be live; `out` must be writable; `profit` may be null.
#[no_mangle]
pub unsafe extern "C" fn mps_multi_start(
    inst: *const MpsInstance,
    integer_mode: bool,
    starts: usize,
    seed: u64,
    budget: usize,
    threads: usize,
    out: *mut *mut MpsSchedule,
    profit: *mut MpsProfit,
) -> MpsStatus {
    guard(|| {
        let cfg = SearchConfig {
            starts,
            seed,
            budget,
            integer_mode,
            threads,
            ..SearchConfig::default()
        };
        let outcome = multi_start(&deref(inst, "inst")?.0, &cfg)?;
        if !profit.is_null() {
            profit.write(MpsProfit::from(&outcome.best));
        }
        write_out(out, Box::into_raw(Box::new(MpsSchedule(outcome.best_schedule))), "out")
    })
}

/// Runs all three models and renders the comparison. `format` is one of
/// `table-text`, `csv` or `structured`.
///
/// # Safety
/// `inst` must be live; `format` must be a NUL-terminated string; `out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn mps_compare(
    inst: *const MpsInstance,
    seed: u64,
    format: *const c_char,
    out: *mut *mut c_char,
) -> MpsStatus {
    guard(|| {
        let format: ReportFormat = read_str(format, "format")?.parse()?;
        let cfg = SearchConfig {
            seed,
            ..SearchConfig::default()
        };
        let report = compare_models(&deref(inst, "inst")?.0, &MilpConfig::default(), &cfg)?;
        write_string(out, render_report(&report, format))
    })
}

/// Profit breakdown of a schedule as JSON, lot-quantized when `lots` is true.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mps_profit_json(
    inst: *const MpsInstance,
    sched: *const MpsSchedule,
    lots: bool,
    out: *mut *mut c_char,
) -> MpsStatus {
    guard(|| {
        let (inst, sched) = (&deref(inst, "inst")?.0, &deref(sched, "sched")?.0);
        let b = if lots { true_profit(inst, sched)? } else { linear_profit(inst, sched)? };
        write_string(out, to_json(&b)?)
    })
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next call on this thread and must not be freed.
#[no_mangle]
pub extern "C" fn mps_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mps_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
