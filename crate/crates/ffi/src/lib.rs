//! C ABI over the chemostat library.
//!
//! Objects cross the boundary as opaque handles created by `chm_*_new`-style
//! constructors and released with the matching `chm_*_free`. Every fallible
//! call returns a [`ChmStatus`]; on failure the message is available from
//! [`chm_last_error`] on the same thread until the next failing call.
//! Strings returned by the library are freed with [`chm_string_free`].
//!
//! Panics never unwind into C: they are caught and reported as
//! [`ChmStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use chemostat::analysis::{report, AnalysisOptions};
use chemostat::noise::{sample_ou_path, NoiseConfig};
use chemostat::{integrate, ChemostatParams, Error, Figure, NoisePath, SimConfig, State, Trajectory};

/// Status codes. The first four match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChmStatus {
    Ok = 0,
    /// Invalid parameters, configuration or arguments.
    Config = 1,
    /// The integrator produced a negative or non-finite state.
    Blowup = 2,
    /// A closed-form quantity could not be evaluated.
    Analysis = 3,
    NullPointer = 4,
    InvalidUtf8 = 5,
    /// Output buffer too small; nothing was written.
    BufferTooSmall = 6,
    Panic = 7,
}

/// Opaque parameter set.
pub struct ChmParams(ChemostatParams);

/// Opaque sampled noise path.
pub struct ChmNoise(NoisePath);

/// Opaque integrated trajectory.
pub struct ChmTrajectory(Trajectory<State>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    let c = CString::new(msg).expect("interior NULs replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> ChmStatus {
    match err.exit_code() {
        2 => ChmStatus::Blowup,
        3 => ChmStatus::Analysis,
        _ => ChmStatus::Config,
    }
}

/// Run `f`, recording the error message and mapping panics.
fn guard(f: impl FnOnce() -> Result<(), (ChmStatus, String)>) -> ChmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ChmStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            ChmStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (ChmStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (ChmStatus, String) {
    (ChmStatus::NullPointer, format!("{name} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, (ChmStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p).to_str().map_err(|e| (ChmStatus::InvalidUtf8, format!("{name}: {e}")))
}

unsafe fn out_handle<T>(out: *mut *mut T, value: T) -> Result<(), (ChmStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, (ChmStatus, String)> {
    p.as_ref().ok_or_else(|| null(name))
}

/// Message of the last failing call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn chm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn chm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Free a string returned by the library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn chm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a parameter set from its JSON object form
/// (`{"s_in": .., "D": .., ..., "kinetics": {"type": "monod", "k": ..}}`).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chm_params_from_json(json: *const c_char, out: *mut *mut ChmParams) -> ChmStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let params: ChemostatParams =
            serde_json::from_str(text).map_err(|e| (ChmStatus::Config, format!("parameters: {e}")))?;
        params.validate().map_err(lib_err)?;
        out_handle(out, ChmParams(params))
    })
}

/// Reference parameter set `figure` (1 to 4).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chm_params_figure(figure: u8, out: *mut *mut ChmParams) -> ChmStatus {
    guard(|| {
        let fig = Figure::from_number(figure).map_err(lib_err)?;
        out_handle(out, ChmParams(fig.params()))
    })
}

/// Serialize parameters to JSON; free the result with [`chm_string_free`].
///
/// # Safety
/// `params` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chm_params_to_json(params: *const ChmParams, out: *mut *mut c_char) -> ChmStatus {
    guard(|| {
        let p = handle(params, "params")?;
        let text = serde_json::to_string(&p.0).expect("parameters serialize");
        out_handle_string(out, text)
    })
}

unsafe fn out_handle_string(out: *mut *mut c_char, text: String) -> Result<(), (ChmStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = CString::new(text).expect("JSON has no NULs").into_raw();
    Ok(())
}

/// # Safety
/// `params` must come from this library and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn chm_params_free(params: *mut ChmParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Sample an Ornstein–Uhlenbeck path on `[0, t_end]` with spacing `dt`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chm_noise_sample(
    seed: u64,
    t_end: f64,
    dt: f64,
    burn_in: f64,
    out: *mut *mut ChmNoise,
) -> ChmStatus {
    guard(|| {
        let cfg = NoiseConfig::new(seed, t_end, dt).with_burn_in(burn_in);
        let path = sample_ou_path(&cfg).map_err(lib_err)?;
        out_handle(out, ChmNoise(path))
    })
}

/// Identically zero path, for deterministic runs.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chm_noise_zeros(t_end: f64, dt: f64, out: *mut *mut ChmNoise) -> ChmStatus {
    guard(|| {
        let path = NoisePath::zeros(t_end, dt).map_err(lib_err)?;
        out_handle(out, ChmNoise(path))
    })
}

/// Number of grid points, or 0 for NULL.
///
/// # Safety
/// `noise` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn chm_noise_len(noise: *const ChmNoise) -> usize {
    noise.as_ref().map_or(0, |n| n.0.len())
}

/// Copy the path values into `values[0..len]`.
///
/// # Safety
/// `noise` must be a live handle; `values` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn chm_noise_values(
    noise: *const ChmNoise,
    values: *mut f64,
    capacity: usize,
) -> ChmStatus {
    guard(|| {
        let n = handle(noise, "noise")?;
        copy_out(n.0.xi(), values, capacity, "values")
    })
}

unsafe fn copy_out(
    src: &[f64],
    dst: *mut f64,
    capacity: usize,
    name: &str,
) -> Result<(), (ChmStatus, String)> {
    if dst.is_null() {
        return Err(null(name));
    }
    if capacity < src.len() {
        return Err((
            ChmStatus::BufferTooSmall,
            format!("{name} holds {capacity} values, {} needed", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    Ok(())
}

/// # Safety
/// `noise` must come from this library and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn chm_noise_free(noise: *mut ChmNoise) {
    if !noise.is_null() {
        drop(Box::from_raw(noise));
    }
}

/// Integrate from `(s0, m1_0, m2_0)` to `t_end` with step `dt`, recording
/// every `record_every` steps. `dt` must equal or divide the noise spacing.
///
/// # Safety
/// `params` and `noise` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chm_integrate(
    params: *const ChmParams,
    noise: *const ChmNoise,
    s0: f64,
    m1_0: f64,
    m2_0: f64,
    t_end: f64,
    dt: f64,
    record_every: usize,
    out: *mut *mut ChmTrajectory,
) -> ChmStatus {
    guard(|| {
        let p = handle(params, "params")?;
        let n = handle(noise, "noise")?;
        let cfg =
            SimConfig::new(State::new(s0, m1_0, m2_0), t_end).with_dt(dt).with_record_every(record_every);
        let traj = integrate(&p.0, &n.0, &cfg).map_err(lib_err)?;
        out_handle(out, ChmTrajectory(traj))
    })
}

/// Number of recorded points, or 0 for NULL.
///
/// # Safety
/// `traj` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn chm_trajectory_len(traj: *const ChmTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.len())
}

/// Number of round-off clamps applied during integration, or 0 for NULL.
///
/// # Safety
/// `traj` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn chm_trajectory_clamp_count(traj: *const ChmTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.clamp_count)
}

/// Copy the recorded columns; each buffer must hold `capacity` doubles.
///
/// # Safety
/// `traj` must be a live handle; every buffer must be valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn chm_trajectory_copy(
    traj: *const ChmTrajectory,
    t: *mut f64,
    s: *mut f64,
    m1: *mut f64,
    m2: *mut f64,
    capacity: usize,
) -> ChmStatus {
    guard(|| {
        let tr = &handle(traj, "traj")?.0;
        let column = |f: fn(&State) -> f64| tr.states.iter().map(f).collect::<Vec<_>>();
        copy_out(&tr.times, t, capacity, "t")?;
        copy_out(&column(|x| x.s), s, capacity, "s")?;
        copy_out(&column(|x| x.m1), m1, capacity, "m1")?;
        copy_out(&column(|x| x.m2), m2, capacity, "m2")
    })
}

/// # Safety
/// `traj` must come from this library and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn chm_trajectory_free(traj: *mut ChmTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Closed-form analysis report as JSON; free the result with
/// [`chm_string_free`]. Nonzero flags select the variants.
///
/// # Safety
/// `params` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chm_analyze_json(
    params: *const ChmParams,
    verbatim_f: i32,
    strict_proof_consistent: i32,
    out: *mut *mut c_char,
) -> ChmStatus {
    guard(|| {
        let p = handle(params, "params")?;
        let opts = AnalysisOptions {
            verbatim_f: verbatim_f != 0,
            strict_proof_consistent: strict_proof_consistent != 0,
            s_star_margin: None,
        };
        let r = report(&p.0, &opts).map_err(lib_err)?;
        out_handle_string(out, serde_json::to_string(&r).expect("report serializes"))
    })
}
