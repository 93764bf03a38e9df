//! Fixed-step RK4 integration of the random system against a frozen noise path.
//!
//! The noise is evaluated at the RK4 stage times by linear interpolation on
//! the noise grid. The integrator step must equal the noise spacing or divide
//! it exactly, so every step boundary lands on a grid node or a fixed fraction
//! of one.
//!
//! Solutions are nonnegative in exact arithmetic. After each step, components
//! in `(-1e-10, 0)` are clamped to zero and counted; anything more negative (or
//! non-finite) aborts with [`Error::Blowup`], which means the step is too large.

use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{
    rhs_original, rhs_transformed_with, AggregateState, ChemostatParams, State, TransformedForm,
};
use crate::noise::NoisePath;

/// Round-off excursions below zero smaller than this are clamped.
pub const CLAMP_TOLERANCE: f64 = 1e-10;

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_RECORD_EVERY: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig<S> {
    pub t_end: f64,
    pub dt: f64,
    pub record_every: usize,
    pub initial: S,
}

impl<S> SimConfig<S> {
    pub fn new(initial: S, t_end: f64) -> Self {
        Self { t_end, dt: DEFAULT_DT, record_every: DEFAULT_RECORD_EVERY, initial }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_record_every(mut self, n: usize) -> Self {
        self.record_every = n;
        self
    }
}

/// Column layout for trajectory CSV files.
pub trait TrajectoryState: Copy + Into<[f64; 3]> + From<[f64; 3]> {
    const CSV_HEADER: &'static str;
}

impl TrajectoryState for State {
    const CSV_HEADER: &'static str = "t,s,m1,m2,psi";
}

impl TrajectoryState for AggregateState {
    const CSV_HEADER: &'static str = "t,s,m,p,psi";
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    /// `ψ(ξ(t))` at each recorded time.
    pub noise_used: Vec<f64>,
    /// SHA-256 of the canonical JSON of the parameters.
    pub params_hash: String,
    pub seed: u64,
    /// Number of round-off clamps applied over the whole run.
    pub clamp_count: usize,
    /// Largest clamped magnitude (always below [`CLAMP_TOLERANCE`]).
    pub max_clamp: f64,
}

impl<S: TrajectoryState> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> S {
        self.states[self.states.len() - 1]
    }

    /// Earliest recorded time after which `pred` holds at every recorded point.
    pub fn settles_after(&self, pred: impl Fn(&S) -> bool) -> Option<f64> {
        let mut entry = None;
        for (t, x) in self.times.iter().zip(&self.states) {
            match (pred(x), entry) {
                (true, None) => entry = Some(*t),
                (false, _) => entry = None,
                _ => {}
            }
        }
        entry
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", S::CSV_HEADER)?;
        for ((t, x), psi) in self.times.iter().zip(&self.states).zip(&self.noise_used) {
            let [a, b, c]: [f64; 3] = (*x).into();
            writeln!(out, "{t:?},{a:?},{b:?},{c:?},{psi:?}")?;
        }
        out.flush()
    }
}

pub fn params_hash(params: &ChemostatParams) -> String {
    let json = serde_json::to_string(params).expect("parameters serialize to JSON");
    Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Integrate the original `(s, m1, m2)` system.
pub fn integrate(
    params: &ChemostatParams,
    noise: &NoisePath,
    cfg: &SimConfig<State>,
) -> Result<Trajectory<State>> {
    run(params, noise, cfg, rhs_original_array, clamp_original)
}

/// Integrate the aggregate `(s, m, p)` system in the chosen competition form.
pub fn integrate_transformed(
    params: &ChemostatParams,
    noise: &NoisePath,
    cfg: &SimConfig<AggregateState>,
    form: TransformedForm,
) -> Result<Trajectory<AggregateState>> {
    let rhs = move |p: &ChemostatParams, y: &[f64; 3], xi: f64| -> [f64; 3] {
        rhs_transformed_with(p, &AggregateState::from(*y), xi, form).into()
    };
    run(params, noise, cfg, rhs, clamp_aggregate)
}

fn rhs_original_array(p: &ChemostatParams, y: &[f64; 3], xi: f64) -> [f64; 3] {
    rhs_original(p, &State::from(*y), xi).into()
}

/// Returns the clamped magnitude, or `Err(reason)` for a genuine excursion.
type Clamp = fn(&mut [f64; 3]) -> std::result::Result<f64, &'static str>;

fn clamp_nonnegative(v: &mut f64) -> std::result::Result<f64, &'static str> {
    if !v.is_finite() {
        return Err("non-finite value");
    }
    if *v < 0.0 {
        if *v <= -CLAMP_TOLERANCE {
            return Err("negative component beyond round-off");
        }
        let mag = -*v;
        *v = 0.0;
        return Ok(mag);
    }
    Ok(0.0)
}

fn clamp_original(y: &mut [f64; 3]) -> std::result::Result<f64, &'static str> {
    let mut worst: f64 = 0.0;
    for v in y.iter_mut() {
        worst = worst.max(clamp_nonnegative(v)?);
    }
    Ok(worst)
}

fn clamp_aggregate(y: &mut [f64; 3]) -> std::result::Result<f64, &'static str> {
    let mut worst: f64 = 0.0;
    for v in y.iter_mut() {
        worst = worst.max(clamp_nonnegative(v)?);
    }
    if y[2] > 1.0 {
        if y[2] >= 1.0 + CLAMP_TOLERANCE {
            return Err("floating fraction above one beyond round-off");
        }
        worst = worst.max(y[2] - 1.0);
        y[2] = 1.0;
    }
    Ok(worst)
}

fn validate_cfg(noise: &NoisePath, t_end: f64, dt: f64, record_every: usize) -> Result<(usize, usize)> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::config(format!("integration dt must be positive, got {dt}")));
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::config(format!("t_end must be positive, got {t_end}")));
    }
    if record_every == 0 {
        return Err(Error::config("record_every must be at least 1"));
    }
    let ratio = noise.dt() / dt;
    let substeps = ratio.round();
    if substeps < 1.0 || (ratio - substeps).abs() > 1e-9 * ratio {
        return Err(Error::config(format!(
            "integration dt = {dt} must equal or divide the noise spacing {}",
            noise.dt()
        )));
    }
    if t_end > noise.t_end() * (1.0 + 1e-12) + 1e-12 {
        return Err(Error::config(format!(
            "t_end = {t_end} exceeds the noise path horizon {}",
            noise.t_end()
        )));
    }
    let exact = t_end / dt;
    let steps =
        if (exact - exact.round()).abs() <= 1e-9 * exact.max(1.0) { exact.round() } else { exact.floor() };
    if steps < 1.0 {
        return Err(Error::config(format!("t_end = {t_end} is shorter than one step dt = {dt}")));
    }
    Ok((steps as usize, substeps as usize))
}

fn run<S, F>(
    params: &ChemostatParams,
    noise: &NoisePath,
    cfg: &SimConfig<S>,
    rhs: F,
    clamp: Clamp,
) -> Result<Trajectory<S>>
where
    S: TrajectoryState,
    F: Fn(&ChemostatParams, &[f64; 3], f64) -> [f64; 3],
{
    params.validate()?;
    let (steps, substeps) = validate_cfg(noise, cfg.t_end, cfg.dt, cfg.record_every)?;
    let dt = cfg.dt;
    let q = substeps as f64;

    let mut y: [f64; 3] = cfg.initial.into();
    if y.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::config(format!("initial state must be finite and nonnegative, got {y:?}")));
    }

    let capacity = steps / cfg.record_every + 2;
    let mut traj = Trajectory {
        times: Vec::with_capacity(capacity),
        states: Vec::with_capacity(capacity),
        noise_used: Vec::with_capacity(capacity),
        params_hash: params_hash(params),
        seed: noise.seed(),
        clamp_count: 0,
        max_clamp: 0.0,
    };
    let xi_at_step = |n: usize, frac: f64| noise.xi_at_position((n as f64 + frac) / q);

    let record = |traj: &mut Trajectory<S>, n: usize, y: &[f64; 3]| {
        traj.times.push(n as f64 * dt);
        traj.states.push(S::from(*y));
        traj.noise_used.push(params.psi(xi_at_step(n, 0.0)));
    };
    record(&mut traj, 0, &y);

    for n in 0..steps {
        let xi0 = xi_at_step(n, 0.0);
        let xih = xi_at_step(n, 0.5);
        let xi1 = xi_at_step(n, 1.0);

        let k1 = rhs(params, &y, xi0);
        let k2 = rhs(params, &axpy(&y, 0.5 * dt, &k1), xih);
        let k3 = rhs(params, &axpy(&y, 0.5 * dt, &k2), xih);
        let k4 = rhs(params, &axpy(&y, dt, &k3), xi1);
        for i in 0..3 {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }

        let t = (n + 1) as f64 * dt;
        match clamp(&mut y) {
            Ok(mag) if mag > 0.0 => {
                traj.clamp_count += 1;
                traj.max_clamp = traj.max_clamp.max(mag);
            }
            Ok(_) => {}
            Err(reason) => {
                return Err(Error::Blowup {
                    t,
                    state: y,
                    reason: reason.to_string(),
                    seed: Some(noise.seed()),
                })
            }
        }

        let done = n + 1 == steps;
        if (n + 1) % cfg.record_every == 0 || done {
            record(&mut traj, n + 1, &y);
        }
    }
    Ok(traj)
}

#[inline]
fn axpy(y: &[f64; 3], h: f64, k: &[f64; 3]) -> [f64; 3] {
    [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2]]
}
