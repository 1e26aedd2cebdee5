//! C ABI for `coopdesign`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` and released
//! by the matching `*_free`. Every fallible call returns a [`CdStatus`]; on a
//! non-zero status [`cd_last_error`] describes the failure. Panics are caught
//! and reported as [`CdStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use coopdesign::equilibrium::{classify, CooperationOutcome, Environment, EnvironmentSpec};
use coopdesign::error::Error;
use coopdesign::reactive_design::{design_observable, design_unobservable, OptimalReactive};
use coopdesign::reshuffle_design::{design, Fallback, ReshuffleDesign};
use coopdesign::scalar::{Quantity, Rational, Scalar, Tolerance};
use coopdesign::stage_games::GamePrimitives;
use coopdesign::static_assignment::{nu_coop, optimal_static, TaskEnvironment};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    PremiseViolation = 3,
    Internal = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdOutcome {
    None = 0,
    OnlyGood = 1,
    OnlyBad = 2,
    Total = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdFallback {
    NoFallback = 0,
    KeepTogetherTotal = 1,
    ReshuffleNone = 2,
}

/// Two-game environment.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CdEnvironmentParams {
    pub delta: f64,
    pub p_good: f64,
    pub p_bad: f64,
    pub c_good: f64,
    pub c_bad: f64,
    pub d_good: f64,
    pub d_bad: f64,
    pub v_good: f64,
    pub v_bad: f64,
}

/// Two-task environment.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CdTaskParams {
    pub delta: f64,
    pub a_good: f64,
    pub a_bad: f64,
    pub q_good: f64,
    pub q_bad: f64,
    pub c_good: f64,
    pub c_bad: f64,
    pub d_good: f64,
    pub d_bad: f64,
    pub v_good: f64,
    pub v_bad: f64,
}

/// Optimal reshuffling. `r_star` is NaN when no rate isolates good-game
/// cooperation.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CdReshuffleReport {
    pub feasible: bool,
    pub r_star: f64,
    pub r: f64,
    pub delta_effective: f64,
    pub outcome: CdOutcome,
    pub fallback: CdFallback,
    pub social_value: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CdReactiveSummary {
    pub observe_good: bool,
    pub nb: u64,
    pub x: f64,
    pub bad_share: f64,
    pub coop_mass: f64,
    pub social_value: f64,
    pub state_count: usize,
}

/// Opaque two-game environment.
pub struct CdEnvironment {
    float: Environment<f64>,
    exact: Environment<Rational>,
}

/// Opaque two-task environment.
pub struct CdTaskEnvironment {
    float: TaskEnvironment<f64>,
    exact: TaskEnvironment<Rational>,
}

/// Opaque designed reactive assignment.
pub struct CdReactiveDesign {
    summary: CdReactiveSummary,
    steady: Vec<f64>,
    dot: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(CdStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Invalid(_) => CdStatus::InvalidArgument,
            Error::Premise(_) => CdStatus::PremiseViolation,
            Error::Internal(_) => CdStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(CdStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            CdStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            CdStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(p: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

fn q(x: f64) -> Result<Quantity, Failure> {
    Ok(Quantity::from_f64(x)?)
}

fn outcome(o: CooperationOutcome) -> CdOutcome {
    match o {
        CooperationOutcome::None => CdOutcome::None,
        CooperationOutcome::OnlyGood => CdOutcome::OnlyGood,
        CooperationOutcome::OnlyBad => CdOutcome::OnlyBad,
        CooperationOutcome::Total => CdOutcome::Total,
    }
}

fn tolerance() -> Result<Tolerance, Failure> {
    Ok(Tolerance::from_env()?)
}

/// Numbers are read through their shortest decimal form, so `0.6` is exactly
/// `3/5` in exact mode.
///
/// # Safety
/// `params` must point to a valid struct and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn cd_environment_new(
    params: *const CdEnvironmentParams,
    out: *mut *mut CdEnvironment,
) -> CdStatus {
    guard(|| {
        let p = deref(params, "params")?;
        let spec = EnvironmentSpec {
            delta: q(p.delta)?,
            p_good: q(p.p_good)?,
            p_bad: q(p.p_bad)?,
            c_good: q(p.c_good)?,
            c_bad: q(p.c_bad)?,
            d_good: q(p.d_good)?,
            d_bad: q(p.d_bad)?,
            v_good: q(p.v_good)?,
            v_bad: q(p.v_bad)?,
        };
        let handle = CdEnvironment {
            float: spec.to_env()?,
            exact: spec.to_env()?,
        };
        write(out, Box::into_raw(Box::new(handle)), "out")
    })
}

/// # Safety
/// `env` must come from [`cd_environment_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cd_environment_free(env: *mut CdEnvironment) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

/// # Safety
/// `env` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cd_classify(env: *const CdEnvironment, exact: bool, out: *mut CdOutcome) -> CdStatus {
    guard(|| {
        let env = deref(env, "env")?;
        let tol = tolerance()?;
        let o = if exact { classify(&env.exact, tol)? } else { classify(&env.float, tol)? };
        write(out, outcome(o), "out")
    })
}

fn reshuffle_report<S: Scalar>(d: &ReshuffleDesign<S>) -> CdReshuffleReport {
    CdReshuffleReport {
        feasible: d.feasible_optimal,
        r_star: d.r_star.as_ref().map_or(f64::NAN, Scalar::to_f64),
        r: d.r.to_f64(),
        delta_effective: d.delta_effective.to_f64(),
        outcome: outcome(d.outcome),
        fallback: match d.fallback {
            None => CdFallback::NoFallback,
            Some(Fallback::KeepTogetherTotal) => CdFallback::KeepTogetherTotal,
            Some(Fallback::ReshuffleNone) => CdFallback::ReshuffleNone,
        },
        social_value: d.social_value.to_f64(),
    }
}

/// # Safety
/// `env` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cd_design_reshuffle(
    env: *const CdEnvironment,
    exact: bool,
    out: *mut CdReshuffleReport,
) -> CdStatus {
    guard(|| {
        let env = deref(env, "env")?;
        let tol = tolerance()?;
        let report = if exact {
            reshuffle_report(&design(&env.exact, tol)?)
        } else {
            reshuffle_report(&design(&env.float, tol)?)
        };
        write(out, report, "out")
    })
}

fn task_env<S: Scalar>(p: &CdTaskParams) -> Result<TaskEnvironment<S>, Failure> {
    let g = |x: f64| -> Result<S, Failure> { Ok(q(x)?.get()) };
    let env = TaskEnvironment {
        delta: g(p.delta)?,
        a_good: g(p.a_good)?,
        a_bad: g(p.a_bad)?,
        q_good: g(p.q_good)?,
        q_bad: g(p.q_bad)?,
        good: GamePrimitives {
            c: g(p.c_good)?,
            d: g(p.d_good)?,
        },
        bad: GamePrimitives {
            c: g(p.c_bad)?,
            d: g(p.d_bad)?,
        },
        v_good: g(p.v_good)?,
        v_bad: g(p.v_bad)?,
    };
    env.validate()?;
    Ok(env)
}

/// # Safety
/// `params` must point to a valid struct and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn cd_task_environment_new(
    params: *const CdTaskParams,
    out: *mut *mut CdTaskEnvironment,
) -> CdStatus {
    guard(|| {
        let p = deref(params, "params")?;
        let handle = CdTaskEnvironment {
            float: task_env(p)?,
            exact: task_env(p)?,
        };
        write(out, Box::into_raw(Box::new(handle)), "out")
    })
}

/// # Safety
/// `env` must come from [`cd_task_environment_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cd_task_environment_free(env: *mut CdTaskEnvironment) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

/// Writes NaN when no assignment weight sustains total cooperation.
///
/// # Safety
/// `env` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cd_nu_coop(env: *const CdTaskEnvironment, exact: bool, out: *mut f64) -> CdStatus {
    guard(|| {
        let env = deref(env, "env")?;
        let nu = if exact {
            nu_coop(&env.exact)?.map(|v| v.to_f64())
        } else {
            nu_coop(&env.float)?
        };
        write(out, nu.unwrap_or(f64::NAN), "out")
    })
}

/// # Safety
/// `env` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cd_optimal_static_value(env: *const CdTaskEnvironment, exact: bool, out: *mut f64) -> CdStatus {
    guard(|| {
        let env = deref(env, "env")?;
        let tol = tolerance()?;
        let value = if exact {
            optimal_static(&env.exact, tol)?.social_value.to_f64()
        } else {
            optimal_static(&env.float, tol)?.social_value
        };
        write(out, value, "out")
    })
}

fn reactive_handle<S: Scalar>(d: &OptimalReactive<S>) -> Result<CdReactiveDesign, Failure> {
    let name = if d.observe_good { "observable" } else { "unobservable" };
    let dot = CString::new(d.chain.to_dot(name)).map_err(|e| Failure(CdStatus::Internal, e.to_string()))?;
    Ok(CdReactiveDesign {
        summary: CdReactiveSummary {
            observe_good: d.observe_good,
            nb: d.nb,
            x: d.x.to_f64(),
            bad_share: d.bad_share.to_f64(),
            coop_mass: d.structure.coop_mass.to_f64(),
            social_value: d.social_value.to_f64(),
            state_count: d.chain.len(),
        },
        steady: d.solution.steady.iter().map(Scalar::to_f64).collect(),
        dot,
    })
}

/// # Safety
/// `env` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cd_design_reactive(
    env: *const CdTaskEnvironment,
    observe_good: bool,
    exact: bool,
    out: *mut *mut CdReactiveDesign,
) -> CdStatus {
    guard(|| {
        let env = deref(env, "env")?;
        let tol = tolerance()?;
        let handle = match (exact, observe_good) {
            (true, true) => reactive_handle(&design_observable(&env.exact, tol)?)?,
            (true, false) => reactive_handle(&design_unobservable(&env.exact, tol)?)?,
            (false, true) => reactive_handle(&design_observable(&env.float, tol)?)?,
            (false, false) => reactive_handle(&design_unobservable(&env.float, tol)?)?,
        };
        write(out, Box::into_raw(Box::new(handle)), "out")
    })
}

/// # Safety
/// `design` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cd_reactive_summary(design: *const CdReactiveDesign, out: *mut CdReactiveSummary) -> CdStatus {
    guard(|| {
        let d = deref(design, "design")?;
        write(out, d.summary, "out")
    })
}

/// Stationary probability of chain state `index`.
///
/// # Safety
/// `design` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cd_reactive_steady_state(
    design: *const CdReactiveDesign,
    index: usize,
    out: *mut f64,
) -> CdStatus {
    guard(|| {
        let d = deref(design, "design")?;
        let p = d.steady.get(index).copied().ok_or_else(|| {
            Failure(
                CdStatus::InvalidArgument,
                format!("state index {index} out of range (chain has {} states)", d.steady.len()),
            )
        })?;
        write(out, p, "out")
    })
}

/// Graphviz source for the chain; owned by the handle.
///
/// # Safety
/// `design` must be a live handle. Returns null for a null handle.
#[no_mangle]
pub unsafe extern "C" fn cd_reactive_dot(design: *const CdReactiveDesign) -> *const c_char {
    design.as_ref().map_or(ptr::null(), |d| d.dot.as_ptr())
}

/// # Safety
/// `design` must come from [`cd_design_reactive`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cd_reactive_free(design: *mut CdReactiveDesign) {
    if !design.is_null() {
        drop(Box::from_raw(design));
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn cd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn cd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
