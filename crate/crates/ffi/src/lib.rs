//! C ABI over the `subtrend` library.
//!
//! Conventions: every fallible function returns an [`StStatus`]; on failure a
//! message is available from [`st_last_error`] on the same thread. Results
//! are written through out-pointers. Handles are opaque and released with the
//! matching `*_free` function; strings returned by the library are released
//! with [`st_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use subtrend::data::read_dataset;
use subtrend::simulation::simulate;
use subtrend::{
    bootstrap_test, exact_pmf, m_statistic, run_fixed_table_test, BootstrapOptions, Error,
    FrequencyTable, ShiftConstruction, SimConfig, TestResult, TieMode, TiePolicy, TieScope,
    TrendDataset,
};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Input data could not be parsed or violates its invariants.
    MalformedInput = 3,
    /// No adjacent pair has data in both groups.
    NoComparablePairs = 4,
    /// A numeric argument or option is out of range.
    InvalidArgument = 5,
    /// An output buffer is too small; the required length was written.
    BufferTooSmall = 6,
    Io = 7,
    /// A panic was caught at the boundary.
    Internal = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StTieMode {
    ExpectedHalf = 0,
    RandomCoin = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StTieScope {
    AllExactTies = 0,
    ZeroZeroPairs = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StShift {
    Cumulative = 0,
    PerLevel = 1,
}

/// Options for the bootstrap test. Start from [`st_test_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct StTestOptions {
    pub alpha: f64,
    pub n_boot: usize,
    pub seed: u64,
    pub tie_mode: StTieMode,
    pub tie_scope: StTieScope,
    pub shift: StShift,
    /// Keep the bootstrap statistics in the result handle.
    pub keep_sample: bool,
}

/// Scalar outcome of a test.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct StTestSummary {
    pub m_observed: f64,
    /// Meaningful only when `has_critical_value` is true (false when alpha = 1).
    pub critical_value: f64,
    pub has_critical_value: bool,
    pub p_value: f64,
    pub reject: bool,
    pub n_boot: usize,
    pub num_columns: usize,
}

/// Opaque validated dataset.
pub struct StDataset(TrendDataset);

/// Opaque test result.
pub struct StTestResult(TestResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> StStatus {
    match err {
        Error::NoComparablePairs => StStatus::NoComparablePairs,
        Error::Io(_) => StStatus::Io,
        Error::InvalidProbability(_)
        | Error::InvalidSize { .. }
        | Error::SizeCapExceeded { .. }
        | Error::InvalidConfig(_) => StStatus::InvalidArgument,
        _ => StStatus::MalformedInput,
    }
}

struct Failure(StStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null_arg(name: &str) -> Failure {
    Failure(StStatus::NullArgument, format!("`{name}` is null"))
}

/// Runs `body`, converting errors and panics into a status and last-error
/// message.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> StStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => StStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal error: {msg}"));
            StStatus::Internal
        }
    }
}

unsafe fn slice<'a, T>(ptr: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null_arg(name));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn str_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(null_arg(name));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| Failure(StStatus::InvalidUtf8, format!("`{name}` is not UTF-8")))
}

unsafe fn write_out<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null_arg(name));
    }
    out.write(value);
    Ok(())
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(StStatus::Internal, "string contains NUL".into()))
}

impl StTestOptions {
    fn to_options(self) -> BootstrapOptions {
        let mode = match self.tie_mode {
            StTieMode::ExpectedHalf => TieMode::ExpectedHalf,
            StTieMode::RandomCoin => TieMode::RandomCoin,
        };
        let scope = match self.tie_scope {
            StTieScope::AllExactTies => TieScope::AllExactTies,
            StTieScope::ZeroZeroPairs => TieScope::ZeroZeroPairs,
        };
        let shift = match self.shift {
            StShift::Cumulative => ShiftConstruction::Cumulative,
            StShift::PerLevel => ShiftConstruction::PerLevel,
        };
        BootstrapOptions {
            tie_policy: TiePolicy::new(mode, scope),
            shift_construction: shift,
            keep_sample: self.keep_sample,
            ..BootstrapOptions::new(self.alpha, self.n_boot, self.seed)
        }
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn st_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn st_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn st_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Defaults: alpha 0.05, 10000 replicates, seed 0, expected-half ties on all
/// exact ties, cumulative shifts, no sample kept.
#[no_mangle]
pub extern "C" fn st_test_options_default() -> StTestOptions {
    StTestOptions {
        alpha: 0.05,
        n_boot: 10_000,
        seed: 0,
        tie_mode: StTieMode::ExpectedHalf,
        tie_scope: StTieScope::AllExactTies,
        shift: StShift::Cumulative,
        keep_sample: false,
    }
}

/// Parses CSV text with columns `group`, `level`, `value`. `levels` fixes the
/// number of levels; pass 0 to use the largest level present.
///
/// # Safety
/// `csv` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_dataset_from_csv(
    csv: *const c_char,
    levels: usize,
    out: *mut *mut StDataset,
) -> StStatus {
    guard(|| {
        let text = str_arg(csv, "csv")?;
        let ds = read_dataset(text.as_bytes(), (levels > 0).then_some(levels))?;
        write_out(out, Box::into_raw(Box::new(StDataset(ds))), "out")
    })
}

/// Builds a dataset from flat arrays. `values_a` holds the measurements of
/// group a level by level, `sizes_a[i]` of them for level `i`; likewise for
/// group b. Both groups have `num_levels` levels.
///
/// # Safety
/// Each array must hold the number of elements its sizes imply.
#[no_mangle]
pub unsafe extern "C" fn st_dataset_from_arrays(
    values_a: *const f64,
    sizes_a: *const usize,
    values_b: *const f64,
    sizes_b: *const usize,
    num_levels: usize,
    out: *mut *mut StDataset,
) -> StStatus {
    guard(|| {
        let split = |values: *const f64, sizes: *const usize, name: &str| {
            let sizes = slice(sizes, num_levels, name)?;
            let total = sizes.iter().sum();
            let values = slice(values, total, name)?;
            let mut at = 0;
            Ok::<_, Failure>(
                sizes
                    .iter()
                    .map(|&n| {
                        let level = values[at..at + n].to_vec();
                        at += n;
                        level
                    })
                    .collect::<Vec<_>>(),
            )
        };
        let a = split(values_a, sizes_a, "group a")?;
        let b = split(values_b, sizes_b, "group b")?;
        let ds = TrendDataset::new(a, b)?;
        write_out(out, Box::into_raw(Box::new(StDataset(ds))), "out")
    })
}

/// # Safety
/// `ds` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn st_dataset_free(ds: *mut StDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// # Safety
/// `ds` must be a live dataset handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_dataset_num_levels(ds: *const StDataset, out: *mut usize) -> StStatus {
    guard(|| {
        let ds = ds.as_ref().ok_or_else(|| null_arg("ds"))?;
        write_out(out, ds.0.num_levels(), "out")
    })
}

/// Runs the bootstrap test on a dataset.
///
/// # Safety
/// `ds` and `opts` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_bootstrap_test(
    ds: *const StDataset,
    opts: *const StTestOptions,
    out: *mut *mut StTestResult,
) -> StStatus {
    guard(|| {
        let ds = ds.as_ref().ok_or_else(|| null_arg("ds"))?;
        let opts = opts.as_ref().ok_or_else(|| null_arg("opts"))?;
        let result = bootstrap_test(&ds.0, &opts.to_options())?;
        write_out(out, Box::into_raw(Box::new(StTestResult(result))), "out")
    })
}

/// Runs the bootstrap test from a frequency table with `num_columns`
/// columns. `pairs` lists the 1-based adjacent pair of each column, or is
/// null for pairs `1..=num_columns`. The sizes arrays have `num_levels`
/// entries and must reproduce the totals.
///
/// # Safety
/// Arrays must hold the stated number of elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_fixed_table_test(
    o_x: *const f64,
    o_y: *const f64,
    tot_x: *const u64,
    tot_y: *const u64,
    pairs: *const usize,
    num_columns: usize,
    sizes_x: *const usize,
    sizes_y: *const usize,
    num_levels: usize,
    opts: *const StTestOptions,
    out: *mut *mut StTestResult,
) -> StStatus {
    guard(|| {
        let table = table_from_raw(o_x, o_y, tot_x, tot_y, pairs, num_columns)?;
        let sx = slice(sizes_x, num_levels, "sizes_x")?;
        let sy = slice(sizes_y, num_levels, "sizes_y")?;
        let opts = opts.as_ref().ok_or_else(|| null_arg("opts"))?;
        let result = run_fixed_table_test(&table, sx, sy, &opts.to_options())?;
        write_out(out, Box::into_raw(Box::new(StTestResult(result))), "out")
    })
}

unsafe fn table_from_raw(
    o_x: *const f64,
    o_y: *const f64,
    tot_x: *const u64,
    tot_y: *const u64,
    pairs: *const usize,
    k: usize,
) -> Result<FrequencyTable, Failure> {
    let o_x = slice(o_x, k, "o_x")?.to_vec();
    let o_y = slice(o_y, k, "o_y")?.to_vec();
    let tot_x = slice(tot_x, k, "tot_x")?.to_vec();
    let tot_y = slice(tot_y, k, "tot_y")?.to_vec();
    let table = if pairs.is_null() {
        FrequencyTable::new(o_x, o_y, tot_x, tot_y)?
    } else {
        let pairs = slice(pairs, k, "pairs")?.to_vec();
        FrequencyTable::with_pairs(pairs, o_x, o_y, tot_x, tot_y)?
    };
    Ok(table)
}

/// # Safety
/// `res` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn st_result_free(res: *mut StTestResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// # Safety
/// `res` must be a live result handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_result_summary(
    res: *const StTestResult,
    out: *mut StTestSummary,
) -> StStatus {
    guard(|| {
        let r = &res.as_ref().ok_or_else(|| null_arg("res"))?.0;
        let summary = StTestSummary {
            m_observed: r.m_observed,
            critical_value: r.critical_value.unwrap_or(f64::NAN),
            has_critical_value: r.critical_value.is_some(),
            p_value: r.p_value,
            reject: r.reject,
            n_boot: r.n_boot,
            num_columns: r.table.num_columns(),
        };
        write_out(out, summary, "out")
    })
}

/// Borrows the bootstrap statistics kept with `keep_sample`. `*data` is set
/// to null and `*len` to 0 when no sample was kept. The memory belongs to
/// the handle.
///
/// # Safety
/// `res` must be a live result handle; `data` and `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_result_bootstrap_sample(
    res: *const StTestResult,
    data: *mut *const f64,
    len: *mut usize,
) -> StStatus {
    guard(|| {
        let r = &res.as_ref().ok_or_else(|| null_arg("res"))?.0;
        let (p, n) = r
            .bootstrap_sample
            .as_ref()
            .map_or((ptr::null(), 0), |s| (s.as_ptr(), s.len()));
        write_out(data, p, "data")?;
        write_out(len, n, "len")
    })
}

/// Full result as JSON; release with [`st_string_free`].
///
/// # Safety
/// `res` must be a live result handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_result_to_json(
    res: *const StTestResult,
    out: *mut *mut c_char,
) -> StStatus {
    guard(|| {
        let r = &res.as_ref().ok_or_else(|| null_arg("res"))?.0;
        let json = serde_json::to_string(r).map_err(Error::from)?;
        write_out(out, into_c_string(json)?, "out")
    })
}

/// Discrepancy statistic of a frequency table with `num_columns` columns.
///
/// # Safety
/// Arrays must hold `num_columns` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_m_statistic(
    o_x: *const f64,
    o_y: *const f64,
    tot_x: *const u64,
    tot_y: *const u64,
    num_columns: usize,
    out: *mut f64,
) -> StStatus {
    guard(|| {
        let table = table_from_raw(o_x, o_y, tot_x, tot_y, ptr::null(), num_columns)?;
        write_out(out, m_statistic(&table), "out")
    })
}

/// Writes `Pr(O = k)`, `k = 0..=n1*n2`, from the deletion recurrence into
/// `mass`. `*len` receives the number of entries; when `capacity` is too
/// small nothing else is written and the status is `BufferTooSmall`.
///
/// # Safety
/// `mass` must hold `capacity` elements; `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_exact_pmf(
    n1: usize,
    n2: usize,
    p: f64,
    mass: *mut f64,
    capacity: usize,
    len: *mut usize,
) -> StStatus {
    guard(|| {
        let pmf = exact_pmf(n1, n2, p)?;
        write_out(len, pmf.mass.len(), "len")?;
        if capacity < pmf.mass.len() {
            return Err(Failure(
                StStatus::BufferTooSmall,
                format!("need {} entries, got {capacity}", pmf.mass.len()),
            ));
        }
        if mass.is_null() {
            return Err(null_arg("mass"));
        }
        ptr::copy_nonoverlapping(pmf.mass.as_ptr(), mass, pmf.mass.len());
        Ok(())
    })
}

/// Runs a type-I error study (no `true_p_y`) or a power study from a JSON
/// simulation config and returns the JSON report; release it with
/// [`st_string_free`].
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_simulate_json(
    config_json: *const c_char,
    out: *mut *mut c_char,
) -> StStatus {
    guard(|| {
        let text = str_arg(config_json, "config_json")?;
        let config: SimConfig = serde_json::from_str(text).map_err(Error::from)?;
        let report = simulate(&config, None)?;
        let json = serde_json::to_string(&report).map_err(Error::from)?;
        write_out(out, into_c_string(json)?, "out")
    })
}
