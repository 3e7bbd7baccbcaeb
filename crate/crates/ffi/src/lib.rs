//! C ABI over the `parrep` toolkit.
//!
//! Objects cross the boundary as opaque handles created by `pr_*_new`/`pr_*_from_*`
//! functions and released by the matching `pr_*_free`. Every fallible call returns a
//! [`PrStatus`]; the message for the most recent failure on the calling thread is
//! available from [`pr_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use parrep::games::{self, Game};
use parrep::reduction::{self, ReductionConfig, ReductionReport};
use parrep::strategy::{self, EntangledStrategy};
use parrep::values::{self, LogBase};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    /// A fixture name or file could not be resolved or parsed.
    NotFound = 4,
    /// The computation itself failed (size caps, numerical checks).
    Computation = 5,
    Panic = 6,
}

/// Game description.
pub struct PrGame(Game);

/// Strategy for a game repeated `n` times.
pub struct PrStrategy {
    inner: EntangledStrategy,
    n: usize,
}

/// Result of a reduction run together with its JSON serialization.
pub struct PrReport {
    report: ReductionReport,
    json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

struct Fail(PrStatus, String);

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            PrStatus::Ok
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic");
            PrStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(PrStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(PrStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| Fail(PrStatus::NullPointer, format!("{what} is null")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(PrStatus::NullPointer, format!("{what} is null")))
}

fn compute(e: impl std::fmt::Display) -> Fail {
    Fail(PrStatus::Computation, e.to_string())
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message describing the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn pr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pr_version() -> *const c_char {
    static V: &[u8] = concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes();
    V.as_ptr().cast()
}

/// Looks up a built-in game (`chsh`, `trivial`, `asym3`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `game_out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pr_game_from_fixture(name: *const c_char, game_out: *mut *mut PrGame) -> PrStatus {
    guard(|| {
        let name = text(name, "name")?;
        let slot = out(game_out, "game_out")?;
        let g = games::fixtures::by_name(name).ok_or_else(|| Fail(PrStatus::NotFound, format!("unknown game fixture '{name}'")))?;
        *slot = boxed(PrGame(g));
        Ok(())
    })
}

/// Parses a game in the text file format.
///
/// # Safety
/// `source` must be a NUL-terminated string and `game_out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pr_game_parse(source: *const c_char, game_out: *mut *mut PrGame) -> PrStatus {
    guard(|| {
        let src = text(source, "source")?;
        let slot = out(game_out, "game_out")?;
        let spec = games::parse_game(src).map_err(|e| Fail(PrStatus::NotFound, e.to_string()))?;
        let g = Game::new(spec).map_err(|e| Fail(PrStatus::InvalidArgument, e.to_string()))?;
        *slot = boxed(PrGame(g));
        Ok(())
    })
}

/// Writes the question and answer alphabet sizes.
///
/// # Safety
/// `game` must be a live handle; each output pointer must be writable.
#[no_mangle]
pub unsafe extern "C" fn pr_game_sizes(game: *const PrGame, x: *mut usize, y: *mut usize, a: *mut usize, b: *mut usize) -> PrStatus {
    guard(|| {
        let g = &handle(game, "game")?.0;
        *out(x, "x")? = g.x_size();
        *out(y, "y")? = g.y_size();
        *out(a, "a")? = g.a_size();
        *out(b, "b")? = g.b_size();
        Ok(())
    })
}

/// # Safety
/// `game` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn pr_game_free(game: *mut PrGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// Best classical winning probability of the `n`-fold repetition.
///
/// # Safety
/// `game` must be a live handle and `value_out` writable.
#[no_mangle]
pub unsafe extern "C" fn pr_classical_value(game: *const PrGame, n: usize, value_out: *mut f64) -> PrStatus {
    guard(|| {
        let g = &handle(game, "game")?.0;
        let slot = out(value_out, "value_out")?;
        *slot = values::classical_value(g, n).map_err(compute)?.value;
        Ok(())
    })
}

/// Builds a strategy from a fixture name (`tsirelson`, `printing`, `detprod`) or a strategy file path.
///
/// # Safety
/// `game` must be a live handle, `name` a NUL-terminated string and `strategy_out` writable.
#[no_mangle]
pub unsafe extern "C" fn pr_strategy_load(
    game: *const PrGame,
    name: *const c_char,
    n: usize,
    strategy_out: *mut *mut PrStrategy,
) -> PrStatus {
    guard(|| {
        let g = &handle(game, "game")?.0;
        let name = text(name, "name")?;
        let slot = out(strategy_out, "strategy_out")?;
        if n == 0 {
            return Err(Fail(PrStatus::InvalidArgument, "n must be positive".into()));
        }
        let s = reduction::resolve_strategy(name, g, n).map_err(|e| Fail(PrStatus::NotFound, e.to_string()))?;
        let n = s.n;
        *slot = boxed(PrStrategy { inner: s, n });
        Ok(())
    })
}

/// Parses a strategy in the text file format.
///
/// # Safety
/// `source` must be a NUL-terminated string and `strategy_out` writable.
#[no_mangle]
pub unsafe extern "C" fn pr_strategy_parse(source: *const c_char, strategy_out: *mut *mut PrStrategy) -> PrStatus {
    guard(|| {
        let src = text(source, "source")?;
        let slot = out(strategy_out, "strategy_out")?;
        let s = strategy::parse_strategy(src).map_err(|e| Fail(PrStatus::NotFound, e.to_string()))?;
        let n = s.n;
        *slot = boxed(PrStrategy { inner: s, n });
        Ok(())
    })
}

/// # Safety
/// `strategy` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn pr_strategy_free(strategy: *mut PrStrategy) {
    if !strategy.is_null() {
        drop(Box::from_raw(strategy));
    }
}

/// Probability that the strategy wins every coordinate of the repeated game.
///
/// # Safety
/// Both handles must be live and `value_out` writable.
#[no_mangle]
pub unsafe extern "C" fn pr_win_probability(game: *const PrGame, strategy: *const PrStrategy, value_out: *mut f64) -> PrStatus {
    guard(|| {
        let g = &handle(game, "game")?.0;
        let s = handle(strategy, "strategy")?;
        let slot = out(value_out, "value_out")?;
        s.inner.check_game(g).map_err(|e| Fail(PrStatus::InvalidArgument, e.to_string()))?;
        *slot = strategy::win_probability(g, s.n, &s.inner).map_err(compute)?;
        Ok(())
    })
}

/// Evaluates the repetition upper bound. `log_base` is 2 or 0 (natural log).
///
/// # Safety
/// Output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn pr_repetition_bound(
    eps: f64,
    s_bits: f64,
    n: u64,
    c: f64,
    log_base: u32,
    value_out: *mut f64,
    vacuous_out: *mut bool,
) -> PrStatus {
    guard(|| {
        let base = match log_base {
            2 => LogBase::Two,
            0 => LogBase::Natural,
            other => return Err(Fail(PrStatus::InvalidArgument, format!("log_base must be 2 or 0, got {other}"))),
        };
        let v = out(value_out, "value_out")?;
        let flag = out(vacuous_out, "vacuous_out")?;
        let r = values::repetition_bound(eps, s_bits, n as u128, c, base).map_err(|e| Fail(PrStatus::InvalidArgument, e.to_string()))?;
        *v = r.bound_value;
        *flag = r.vacuous;
        Ok(())
    })
}

/// Runs the reduction harness. `config_json` is a JSON object with any of the fields
/// `game, strategy, n, c, eps, t_max, mode_classical, mode_quantum, seed, trials`;
/// missing fields take their defaults. Coordinates in `c` are 0-based.
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `report_out` writable.
#[no_mangle]
pub unsafe extern "C" fn pr_reduction_run(config_json: *const c_char, report_out: *mut *mut PrReport) -> PrStatus {
    guard(|| {
        let src = text(config_json, "config_json")?;
        let slot = out(report_out, "report_out")?;
        let cfg: ReductionConfig = serde_json::from_str(src).map_err(|e| Fail(PrStatus::InvalidArgument, e.to_string()))?;
        let report = reduction::run_reduction(&cfg).map_err(|e| match e {
            reduction::ReductionError::Config(m) => Fail(PrStatus::InvalidArgument, m),
            other => compute(other),
        })?;
        let json = serde_json::to_string(&report).map_err(compute)?;
        let json = CString::new(json).map_err(compute)?;
        *slot = boxed(PrReport { report, json });
        Ok(())
    })
}

/// Full report as JSON; owned by the handle. Null if `report` is null.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pr_report_json(report: *const PrReport) -> *const c_char {
    report.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}

/// Headline numbers of a reduction report.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PrReductionSummary {
    pub avg_p_tilde: f64,
    pub avg_p_target: f64,
    pub avg_residual: f64,
    pub budget: f64,
    pub std_error: f64,
    pub p_wc: f64,
    pub within_budget: bool,
}

/// # Safety
/// `report` must be a live handle and `summary_out` writable.
#[no_mangle]
pub unsafe extern "C" fn pr_report_summary(report: *const PrReport, summary_out: *mut PrReductionSummary) -> PrStatus {
    guard(|| {
        let r = &handle(report, "report")?.report;
        *out(summary_out, "summary_out")? = PrReductionSummary {
            avg_p_tilde: r.avg_p_tilde,
            avg_p_target: r.avg_p_target,
            avg_residual: r.avg_residual,
            budget: r.budget.total,
            std_error: r.stderr,
            p_wc: r.p_wc,
            within_budget: r.within_budget,
        };
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn pr_report_free(report: *mut PrReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
