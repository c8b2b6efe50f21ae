//! C bindings for `tclose`.
//!
//! Every function returns a [`TcStatus`]; results come back through out
//! pointers. Objects are opaque handles released with their `_free`
//! function. After a failed call, [`tc_last_error`] describes the error on
//! the calling thread.
//!
//! Rationals cross the boundary as strings such as `3/10` or `0.3`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tclose::formats::{parse_table_csv, write_partition};
use tclose::kanon::{approx_k_anonymity, brute_force_k_anonymity, exact_k_anonymity};
use tclose::ldiv::{brute_force_l_diversity, solve_2diversity};
use tclose::metric::{emd_general, SpaceSpec};
use tclose::tclose::{brute_force_tclose, build_milp, exact_tclose, solve_milp_small};
use tclose::{DistributionVector, Error, Limits, Rational, SaSpace, SolveResult, Table};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TcStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidInput = 4,
    OutOfRange = 5,
    TooLarge = 6,
    Unsupported = 7,
    Internal = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TcAlgorithm {
    Exact = 0,
    Oracle = 1,
    Milp = 2,
    Approx = 3,
}

/// Size guards; see `tc_limits_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TcLimits {
    pub oracle_max_rows: u32,
    pub exact_max_rows: u32,
    pub milp_max_assignments: u64,
}

impl From<TcLimits> for Limits {
    fn from(l: TcLimits) -> Self {
        Limits {
            oracle_max_rows: l.oracle_max_rows as usize,
            exact_max_rows: l.exact_max_rows as usize,
            milp_max_assignments: l.milp_max_assignments as u128,
        }
    }
}

/// A parsed microdata table.
pub struct TcTable(Table);

/// A metric over SA values, possibly bound to a table only when used.
pub struct TcSpace(SpaceSpec);

/// Outcome of a solver call.
pub struct TcSolution(SolveResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(TcStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse(_) => TcStatus::Parse,
            Error::OutOfRange(_) => TcStatus::OutOfRange,
            Error::TooLarge { .. } => TcStatus::TooLarge,
            Error::Io(_) => TcStatus::Internal,
            _ => TcStatus::InvalidInput,
        };
        Fail(status, e.to_string())
    }
}

fn guarded(f: impl FnOnce() -> Result<(), Fail>) -> TcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TcStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            TcStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(TcStatus::NullArgument, format!("{what} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(TcStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn object<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| Fail(TcStatus::NullArgument, format!("{what} is NULL")))
}

fn out<T>(p: *mut *mut T, value: T) -> Result<(), Fail> {
    if p.is_null() {
        return Err(Fail(TcStatus::NullArgument, "output pointer is NULL".into()));
    }
    unsafe { *p = Box::into_raw(Box::new(value)) };
    Ok(())
}

fn check_out<T>(p: *mut T) -> Result<(), Fail> {
    if p.is_null() {
        Err(Fail(TcStatus::NullArgument, "output pointer is NULL".into()))
    } else {
        Ok(())
    }
}

unsafe fn read_limits(p: *const TcLimits) -> Limits {
    p.as_ref().map_or_else(Limits::default, |l| (*l).into())
}

fn parse_rational(s: &str) -> Result<Rational, Fail> {
    Ok(s.parse::<Rational>()?)
}

fn into_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail(TcStatus::Internal, "output contains NUL".into()))
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn tc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn tc_limits_default() -> TcLimits {
    let l = Limits::default();
    TcLimits {
        oracle_max_rows: l.oracle_max_rows as u32,
        exact_max_rows: l.exact_max_rows as u32,
        milp_max_assignments: l.milp_max_assignments as u64,
    }
}

/// Parses CSV text with `qi:`/`sa:` headers.
///
/// # Safety
/// `csv` must be a NUL-terminated string and `out_table` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tc_table_from_csv(csv: *const c_char, split_digits: bool, out_table: *mut *mut TcTable) -> TcStatus {
    guarded(|| {
        let t = parse_table_csv(text(csv, "csv")?, split_digits)?;
        out(out_table, TcTable(t))
    })
}

/// # Safety
/// `table` must come from [`tc_table_from_csv`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn tc_table_free(table: *mut TcTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// # Safety
/// `table` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tc_table_rows(table: *const TcTable) -> usize {
    table.as_ref().map_or(0, |t| t.0.len())
}

/// # Safety
/// `table` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tc_table_columns(table: *const TcTable) -> usize {
    table.as_ref().map_or(0, |t| t.0.num_qi())
}

/// Equal-distance space over whatever SA values the table has.
///
/// # Safety
/// `out_space` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tc_space_equal(out_space: *mut *mut TcSpace) -> TcStatus {
    guarded(|| out(out_space, TcSpace(SpaceSpec::Equal(None))))
}

/// Space over labels `1`..`4` with distance 1 among the first three and
/// 1/2 from each of them to `4`.
///
/// # Safety
/// `out_space` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tc_space_four_point(out_space: *mut *mut TcSpace) -> TcStatus {
    guarded(|| out(out_space, TcSpace(SpaceSpec::Matrix(SaSpace::hub_four_point()))))
}

/// Parses a space file: `equal [s]`, or a size line, a label line and the
/// distance matrix.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out_space` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tc_space_parse(spec: *const c_char, out_space: *mut *mut TcSpace) -> TcStatus {
    guarded(|| {
        let s = SpaceSpec::parse(text(spec, "spec")?)?;
        out(out_space, TcSpace(s))
    })
}

/// # Safety
/// `space` must come from a `tc_space_*` constructor or be NULL.
#[no_mangle]
pub unsafe extern "C" fn tc_space_free(space: *mut TcSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Exact EMD between two comma-separated distributions, written as a newly
/// allocated string to release with [`tc_string_free`].
///
/// # Safety
/// String arguments must be NUL-terminated, `space` a live handle and
/// `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tc_emd(
    x: *const c_char,
    y: *const c_char,
    space: *const TcSpace,
    out_value: *mut *mut c_char,
) -> TcStatus {
    guarded(|| {
        check_out(out_value)?;
        let x = DistributionVector::parse(text(x, "x")?)?;
        let y = DistributionVector::parse(text(y, "y")?)?;
        if x.dim() != y.dim() {
            return Err(Error::DimensionMismatch {
                expected: x.dim(),
                got: y.dim(),
            }
            .into());
        }
        let space = object(space, "space")?.0.resolve_dimension(x.dim())?;
        let d = emd_general(&x, &y, &space)?;
        *out_value = into_c_string(d.to_string())?;
        Ok(())
    })
}

/// Minimum-cost t-closeness partition with `Exact`, `Oracle` or `Milp`.
/// `limits` may be NULL for the defaults.
///
/// # Safety
/// Handles must be live, `t` NUL-terminated and `out_solution` valid.
#[no_mangle]
pub unsafe extern "C" fn tc_solve_tclose(
    table: *const TcTable,
    space: *const TcSpace,
    t: *const c_char,
    algorithm: TcAlgorithm,
    limits: *const TcLimits,
    out_solution: *mut *mut TcSolution,
) -> TcStatus {
    let limits = read_limits(limits);
    guarded(|| {
        check_out(out_solution)?;
        let table = &object(table, "table")?.0;
        let space = object(space, "space")?.0.resolve(table)?;
        let t = parse_rational(text(t, "t")?)?;
        let r = match algorithm {
            TcAlgorithm::Exact => exact_tclose(table, &t, &space, &limits)?,
            TcAlgorithm::Oracle => brute_force_tclose(table, &t, &space, &limits)?,
            TcAlgorithm::Milp => solve_milp_small(&build_milp(table, &t, &space)?, table, &t, &space, &limits)?,
            TcAlgorithm::Approx => return Err(unsupported("approximation", "t-closeness")),
        };
        out(out_solution, TcSolution(r))
    })
}

/// Minimum-cost k-anonymous partition with `Exact`, `Oracle` or `Approx`.
///
/// # Safety
/// `table` must be live and `out_solution` valid; `limits` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn tc_solve_kanon(
    table: *const TcTable,
    k: usize,
    algorithm: TcAlgorithm,
    limits: *const TcLimits,
    out_solution: *mut *mut TcSolution,
) -> TcStatus {
    let limits = read_limits(limits);
    guarded(|| {
        check_out(out_solution)?;
        let table = &object(table, "table")?.0;
        let r = match algorithm {
            TcAlgorithm::Exact => exact_k_anonymity(table, k, &limits)?,
            TcAlgorithm::Oracle => brute_force_k_anonymity(table, k, &limits)?,
            TcAlgorithm::Approx => approx_k_anonymity(table, k)?.result,
            TcAlgorithm::Milp => return Err(unsupported("MILP", "k-anonymity")),
        };
        out(out_solution, TcSolution(r))
    })
}

/// Minimum-cost 2-diverse partition with `Exact` or `Oracle`.
///
/// # Safety
/// `table` must be live and `out_solution` valid; `limits` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn tc_solve_2diversity(
    table: *const TcTable,
    algorithm: TcAlgorithm,
    limits: *const TcLimits,
    out_solution: *mut *mut TcSolution,
) -> TcStatus {
    let limits = read_limits(limits);
    guarded(|| {
        check_out(out_solution)?;
        let table = &object(table, "table")?.0;
        let r = match algorithm {
            TcAlgorithm::Exact => solve_2diversity(table, &limits)?,
            TcAlgorithm::Oracle => brute_force_l_diversity(table, 2, &limits)?,
            _ => return Err(unsupported("this algorithm", "2-diversity")),
        };
        out(out_solution, TcSolution(r))
    })
}

fn unsupported(algo: &str, principle: &str) -> Fail {
    Fail(TcStatus::Unsupported, format!("{algo} is not available for {principle}"))
}

/// # Safety
/// `solution` must come from a `tc_solve_*` call or be NULL.
#[no_mangle]
pub unsafe extern "C" fn tc_solution_free(solution: *mut TcSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// False when no partition satisfies the principle.
///
/// # Safety
/// `solution` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tc_solution_feasible(solution: *const TcSolution) -> bool {
    solution.as_ref().is_some_and(|s| s.0.is_feasible())
}

/// # Safety
/// `solution` must be a live handle and `out_cost` valid.
#[no_mangle]
pub unsafe extern "C" fn tc_solution_cost(solution: *const TcSolution, out_cost: *mut u64) -> TcStatus {
    guarded(|| {
        check_out(out_cost)?;
        let cost = object(solution, "solution")?
            .0
            .cost()
            .ok_or_else(|| Fail(TcStatus::InvalidInput, "the solution is infeasible".into()))?;
        *out_cost = cost;
        Ok(())
    })
}

/// Number of groups; 0 for an infeasible solution.
///
/// # Safety
/// `solution` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tc_solution_group_count(solution: *const TcSolution) -> usize {
    solution.as_ref().and_then(|s| s.0.partition()).map_or(0, |p| p.len())
}

/// Writes the group index of each row into `out_groups`, which must hold
/// `rows` entries, `rows` being the row count of the solved table.
///
/// # Safety
/// `solution` must be live and `out_groups` point to `rows` writable slots.
#[no_mangle]
pub unsafe extern "C" fn tc_solution_assignment(solution: *const TcSolution, out_groups: *mut usize, rows: usize) -> TcStatus {
    guarded(|| {
        check_out(out_groups)?;
        let p = object(solution, "solution")?
            .0
            .partition()
            .ok_or_else(|| Fail(TcStatus::InvalidInput, "the solution is infeasible".into()))?;
        let covered: usize = p.groups().iter().map(|g| g.len()).sum();
        if covered != rows {
            return Err(Fail(
                TcStatus::InvalidInput,
                format!("the partition covers {covered} rows, not {rows}"),
            ));
        }
        let slots = std::slice::from_raw_parts_mut(out_groups, rows);
        for (i, g) in p.groups().iter().enumerate() {
            for &r in g.rows() {
                slots[r] = i;
            }
        }
        Ok(())
    })
}

/// Partition file text: one line of row indices per group, then
/// `cost=<n>`; `infeasible` otherwise. Release with [`tc_string_free`].
///
/// # Safety
/// `solution` must be live and `out_text` valid.
#[no_mangle]
pub unsafe extern "C" fn tc_solution_to_string(solution: *const TcSolution, out_text: *mut *mut c_char) -> TcStatus {
    guarded(|| {
        check_out(out_text)?;
        *out_text = into_c_string(write_partition(&object(solution, "solution")?.0))?;
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn tc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
