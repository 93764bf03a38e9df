//! Bounded real noise: the stationary Ornstein-Uhlenbeck process sampled on a
//! uniform grid, and the `arctan` map that squeezes it into `(-a, a)`.
//!
//! The process has unit mean-reversion rate and unit diffusion,
//! `dξ = -ξ dt + dW`, so its stationary law is `Normal(0, 1/2)` and its
//! autocorrelation at lag `τ` is `e^{-τ}`. Paths are generated with the exact
//! Gaussian transition, which is free of discretization bias at any `dt`.
//!
//! # Random streams
//!
//! Each path owns one generator: `ChaCha8Rng::seed_from_u64(seed)` on stream 0
//! (`rand_chacha` 0.9). Normal variates come from `rand_distr::StandardNormal`
//! (ziggurat). Ensembles obtain independent paths by giving each path its own
//! seed, never by sharing a generator across paths.

use std::f64::consts::PI;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default pre-roll discarded before `t = 0`.
pub const DEFAULT_BURN_IN: f64 = 10.0;

/// Stationary variance of the unit-rate, unit-diffusion OU process.
pub const STATIONARY_VARIANCE: f64 = 0.5;

/// Upper bound on grid length; guards against `t_end / dt` overflowing memory.
const MAX_GRID_POINTS: usize = 1 << 31;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub seed: u64,
    pub t_end: f64,
    pub dt: f64,
    #[serde(default = "default_burn_in")]
    pub burn_in: f64,
}

fn default_burn_in() -> f64 {
    DEFAULT_BURN_IN
}

impl NoiseConfig {
    pub fn new(seed: u64, t_end: f64, dt: f64) -> Self {
        Self { seed, t_end, dt, burn_in: DEFAULT_BURN_IN }
    }

    pub fn with_burn_in(mut self, burn_in: f64) -> Self {
        self.burn_in = burn_in;
        self
    }

    /// Number of grid points, `floor(t_end / dt) + 1`.
    pub fn grid_len(&self) -> Result<usize> {
        self.validate()?;
        Ok(grid_len(self.t_end, self.dt))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::config(format!("noise dt must be positive and finite, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::config(format!(
                "noise t_end must be positive and finite, got {}",
                self.t_end
            )));
        }
        if !(self.burn_in.is_finite() && self.burn_in >= 0.0) {
            return Err(Error::config(format!(
                "noise burn_in must be non-negative and finite, got {}",
                self.burn_in
            )));
        }
        let steps = (self.t_end / self.dt).floor();
        if steps < 1.0 {
            return Err(Error::config(format!(
                "noise grid needs at least two points: t_end = {} < dt = {}",
                self.t_end, self.dt
            )));
        }
        if steps + 1.0 > MAX_GRID_POINTS as f64 {
            return Err(Error::config(format!("noise grid of {} points is too large", steps + 1.0)));
        }
        Ok(())
    }
}

fn grid_len(t_end: f64, dt: f64) -> usize {
    // A relative slack of 1e-9 keeps t_end = n * dt from losing its last point
    // to round-off (e.g. 100 / 0.001 = 99999.99999999999).
    (t_end / dt * (1.0 + 1e-12) + 1e-9).floor() as usize + 1
}

/// A frozen realization of the OU process on the grid `t_j = j * dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath {
    times: Vec<f64>,
    xi: Vec<f64>,
    seed: u64,
    dt: f64,
}

impl NoisePath {
    /// Build a path from explicit values on the grid `j * dt`.
    pub fn from_values(dt: f64, xi: Vec<f64>, seed: u64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::config(format!("noise dt must be positive, got {dt}")));
        }
        if xi.len() < 2 {
            return Err(Error::config("a noise path needs at least two points"));
        }
        if let Some(j) = xi.iter().position(|v| !v.is_finite()) {
            return Err(Error::config(format!("noise value at index {j} is not finite")));
        }
        let times = (0..xi.len()).map(|j| j as f64 * dt).collect();
        Ok(Self { times, xi, seed, dt })
    }

    /// The identically-zero path, used for deterministic runs.
    pub fn zeros(t_end: f64, dt: f64) -> Result<Self> {
        let cfg = NoiseConfig::new(0, t_end, dt);
        let n = cfg.grid_len()?;
        Self::from_values(dt, vec![0.0; n], 0)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Linear interpolation at fractional grid position `pos = t / dt`.
    ///
    /// Positions past either end are clamped to the end values.
    pub fn xi_at_position(&self, pos: f64) -> f64 {
        let last = self.xi.len() - 1;
        if pos <= 0.0 {
            return self.xi[0];
        }
        let j = pos.floor() as usize;
        if j >= last {
            return self.xi[last];
        }
        let frac = pos - j as f64;
        if frac == 0.0 {
            self.xi[j]
        } else {
            self.xi[j] + frac * (self.xi[j + 1] - self.xi[j])
        }
    }

    /// Linear interpolation at time `t`.
    pub fn xi_at(&self, t: f64) -> f64 {
        self.xi_at_position(t / self.dt)
    }

    /// Write the path as CSV with header `t,xi`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,xi")?;
        for (t, x) in self.times.iter().zip(&self.xi) {
            writeln!(out, "{t:?},{x:?}")?;
        }
        out.flush()
    }
}

/// Sample a stationary OU path on `[0, t_end]`.
///
/// `ξ(-burn_in)` is drawn from `Normal(0, 1/2)`; every step applies
/// `ξ_{j+1} = ξ_j e^{-dt} + sqrt((1 - e^{-2dt}) / 2) Z_j`. The burn-in steps
/// are discarded, so the recorded path starts at `t = 0`.
pub fn sample_ou_path(cfg: &NoiseConfig) -> Result<NoisePath> {
    cfg.validate()?;
    let n = grid_len(cfg.t_end, cfg.dt);
    let burn_steps = (cfg.burn_in / cfg.dt).round() as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let decay = (-cfg.dt).exp();
    let step_sd = (-(-2.0 * cfg.dt).exp_m1() / 2.0).sqrt();

    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };

    let mut x = STATIONARY_VARIANCE.sqrt() * normal();
    for _ in 0..burn_steps {
        x = x * decay + step_sd * normal();
    }

    let mut xi = Vec::new();
    xi.try_reserve_exact(n)
        .map_err(|e| Error::config(format!("cannot allocate noise grid of {n} points: {e}")))?;
    xi.push(x);
    for _ in 1..n {
        x = x * decay + step_sd * normal();
        xi.push(x);
    }

    let times = (0..n).map(|j| j as f64 * cfg.dt).collect();
    Ok(NoisePath { times, xi, seed: cfg.seed, dt: cfg.dt })
}

/// The bounding map `ψ(ξ) = (2a/π) arctan ξ`, valued in `(-a, a)`.
pub fn psi(xi: f64, a: f64) -> Result<f64> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::config(format!("noise amplitude must be positive, got {a}")));
    }
    if !xi.is_finite() {
        return Err(Error::config("noise value is not finite"));
    }
    Ok(psi_unchecked(xi, a))
}

#[inline]
pub(crate) fn psi_unchecked(xi: f64, a: f64) -> f64 {
    2.0 * a / PI * xi.atan()
}

/// Perturbed dilution rate `D + ψ(ξ)`; exactly `D` when `a = 0`.
pub fn effective_dilution(dilution: f64, a: f64, xi: f64) -> Result<f64> {
    if !(a.is_finite() && a >= 0.0) {
        return Err(Error::config(format!("noise amplitude must be non-negative, got {a}")));
    }
    if !(dilution.is_finite() && dilution > a) {
        return Err(Error::config(format!(
            "dilution rate D = {dilution} must exceed the noise amplitude a = {a}"
        )));
    }
    if a == 0.0 {
        return Ok(dilution);
    }
    Ok(dilution + psi(xi, a)?)
}

/// Trapezoidal estimate of `(1/T) ∫_0^T ψ(ξ(s)) ds` over the whole path.
pub fn time_average_psi(path: &NoisePath, a: f64) -> Result<f64> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::config(format!("noise amplitude must be positive, got {a}")));
    }
    let values: Vec<f64> = path.xi.iter().map(|&x| psi_unchecked(x, a)).collect();
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    let ends = 0.5 * (values[0] + values[values.len() - 1]);
    let steps = (values.len() - 1) as f64;
    Ok((inner + ends) / steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn same_seed_same_path() {
        let cfg = NoiseConfig::new(42, 50.0, 0.01);
        let a = sample_ou_path(&cfg).unwrap();
        let b = sample_ou_path(&cfg).unwrap();
        assert_eq!(a, b);
        let c = sample_ou_path(&NoiseConfig::new(43, 50.0, 0.01)).unwrap();
        assert_ne!(a.xi(), c.xi());
    }

    #[test]
    fn grid_is_uniform() {
        let path = sample_ou_path(&NoiseConfig::new(1, 100.0, 0.001)).unwrap();
        assert_eq!(path.len(), 100_001);
        assert_eq!(path.times().len(), path.xi().len());
        for w in path.times().windows(2) {
            assert!(((w[1] - w[0]) - 0.001).abs() < 1e-12);
        }
        assert!((path.t_end() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_config() {
        for cfg in [
            NoiseConfig::new(1, 10.0, 0.0),
            NoiseConfig::new(1, 10.0, -0.1),
            NoiseConfig::new(1, 0.0, 0.1),
            NoiseConfig::new(1, 10.0, f64::NAN),
            NoiseConfig::new(1, 0.05, 0.1),
            NoiseConfig::new(1, 10.0, 0.1).with_burn_in(-1.0),
        ] {
            assert!(matches!(sample_ou_path(&cfg), Err(Error::Config(_))), "{cfg:?}");
        }
    }

    #[test]
    fn psi_values() {
        assert_eq!(psi(0.0, 0.7).unwrap(), 0.0);
        assert!((psi(1.0, 0.25).unwrap() - 0.125).abs() < 1e-15);
        assert!((psi(1.0, 0.4).unwrap() - 0.2).abs() < 1e-15);
        let far = psi(1e6, 0.25).unwrap();
        assert!(far < 0.25 && (0.25 - far).abs() < 1e-4);
        assert!(psi(-1e6, 0.25).unwrap() > -0.25);
        assert!((psi(-3.0, 0.3).unwrap() + psi(3.0, 0.3).unwrap()).abs() < 1e-16);
        assert!(psi(1.0, 0.0).is_err());
        assert!(psi(1.0, -0.1).is_err());
    }

    #[test]
    fn effective_dilution_band() {
        for xi in [-1e9, -3.0, -0.1, 0.0, 0.4, 12.0, 1e9] {
            let d = effective_dilution(1.9, 0.25, xi).unwrap();
            assert!((1.65..=2.15).contains(&d), "{d}");
        }
        assert_eq!(effective_dilution(1.9, 0.0, 123.0).unwrap(), 1.9);
        assert_eq!(effective_dilution(0.47, 0.4, 0.0).unwrap(), 0.47);
        assert!(effective_dilution(0.4, 0.4, 0.0).is_err());
        assert!(effective_dilution(0.3, 0.4, 0.0).is_err());
    }

    #[test]
    fn time_average_of_constant_paths() {
        let zero = NoisePath::zeros(5.0, 0.1).unwrap();
        assert_eq!(time_average_psi(&zero, 0.25).unwrap(), 0.0);

        let two = NoisePath::from_values(0.5, vec![1.3, 1.3], 0).unwrap();
        let expect = psi(1.3, 0.25).unwrap();
        assert!((time_average_psi(&two, 0.25).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn interpolation_is_linear_between_nodes() {
        let path = NoisePath::from_values(0.5, vec![0.0, 1.0, -1.0], 0).unwrap();
        assert_eq!(path.xi_at(0.25), 0.5);
        assert_eq!(path.xi_at(0.5), 1.0);
        assert_eq!(path.xi_at(0.75), 0.0);
        assert_eq!(path.xi_at(1.0), -1.0);
        assert_eq!(path.xi_at(7.0), -1.0);
    }

    #[test]
    fn psi_stays_strictly_inside_band_on_sampled_path() {
        let path = sample_ou_path(&NoiseConfig::new(9, 200.0, 0.01)).unwrap();
        let a = 0.25;
        let max = path.xi().iter().map(|&x| psi(x, a).unwrap().abs()).fold(0.0, f64::max);
        assert!(max < a);
    }

    #[test]
    fn stationary_moments_on_long_path() {
        // Fixed seeds; sample mean sd ~ 0.032, sample variance sd ~ 0.022 at T = 1000.
        for seed in [11, 12, 13] {
            let path = sample_ou_path(&NoiseConfig::new(seed, 1000.0, 0.001)).unwrap();
            let (mean, var) = moments(path.xi());
            assert!(mean.abs() < 0.05, "seed {seed}: mean {mean}");
            assert!((var - 0.5).abs() < 0.05, "seed {seed}: var {var}");
        }
    }

    #[test]
    fn halves_of_long_path_agree() {
        // Halves of length 10^4: the mean difference has sd ~ 0.014.
        let path = sample_ou_path(&NoiseConfig::new(2024, 20_000.0, 0.01)).unwrap();
        let (first, second) = path.xi().split_at(path.len() / 2);
        let (m1, v1) = moments(first);
        let (m2, v2) = moments(second);
        assert!((m1 - m2).abs() < 0.05, "{m1} vs {m2}");
        assert!((v1 - v2).abs() < 0.05, "{v1} vs {v2}");
    }

    #[test]
    fn csv_header_and_rows() {
        let path = NoisePath::from_values(0.5, vec![0.1, -0.25], 3).unwrap();
        let mut buf = Vec::new();
        path.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,xi\n0.0,0.1\n0.5,-0.25\n");
    }
}
