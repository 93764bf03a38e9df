//! Right-hand sides of the random chemostat with wall growth and competition.
//!
//! Two coordinate systems are provided:
//!
//! * original `(s, m1, m2)`: nutrient, floating biomass, wall biomass;
//! * aggregate `(s, m, p)` with `m = m1 + m2` and `p = m1 / m`.
//!
//! The floating population attaches to the wall at rate `alpha1` and the wall
//! population detaches at rate `alpha2`. Both populations compete through the
//! per-capita term `r1 m1 + r2 m2`. The dilution rate is `D + ψ(ξ)`; with
//! `a = 0` the system is the deterministic one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetics::Kinetics;
use crate::noise::psi_unchecked;

/// Model constants. Serialized field names are the short symbols used in
/// configuration files (`s_in`, `D`, `a`, `alpha`, `c`, `g`, `r`, `d`,
/// `alpha1`, `alpha2`, `r1`, `r2`, `kinetics`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChemostatParams {
    /// Input nutrient concentration.
    pub s_in: f64,
    /// Nominal dilution rate.
    #[serde(rename = "D")]
    pub dilution: f64,
    /// Noise amplitude; 0 means deterministic.
    #[serde(rename = "a", default)]
    pub noise_amplitude: f64,
    /// Ratio between output and input flow rates.
    #[serde(rename = "alpha")]
    pub outflow_ratio: f64,
    /// Maximal consumption rate.
    #[serde(rename = "c")]
    pub consumption: f64,
    /// Growth yield rate, `0 < g <= c`.
    #[serde(rename = "g")]
    pub growth_yield: f64,
    /// Fraction of dead biomass recycled into nutrient.
    #[serde(rename = "r")]
    pub recycling: f64,
    /// Death rate.
    #[serde(rename = "d")]
    pub death: f64,
    /// Wall-attachment rate.
    #[serde(rename = "alpha1")]
    pub attach: f64,
    /// Wall-detachment rate.
    #[serde(rename = "alpha2")]
    pub detach: f64,
    /// Competition intensity in the liquid.
    #[serde(rename = "r1")]
    pub liquid_competition: f64,
    /// Competition intensity on the wall.
    #[serde(rename = "r2")]
    pub wall_competition: f64,
    pub kinetics: Kinetics,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must be positive, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must be non-negative, got {v}")))
    }
}

impl ChemostatParams {
    pub fn validate(&self) -> Result<()> {
        positive("s_in", self.s_in)?;
        positive("D", self.dilution)?;
        non_negative("a", self.noise_amplitude)?;
        positive("alpha", self.outflow_ratio)?;
        positive("c", self.consumption)?;
        positive("g", self.growth_yield)?;
        positive("d", self.death)?;
        non_negative("alpha1", self.attach)?;
        non_negative("alpha2", self.detach)?;
        non_negative("r1", self.liquid_competition)?;
        non_negative("r2", self.wall_competition)?;
        if self.growth_yield > self.consumption {
            return Err(Error::config(format!(
                "g must not exceed c (g = {}, c = {})",
                self.growth_yield, self.consumption
            )));
        }
        if !(self.recycling > 0.0 && self.recycling < 1.0) {
            return Err(Error::config(format!("r must lie in (0, 1), got {}", self.recycling)));
        }
        if self.dilution - self.noise_amplitude <= 0.0 {
            return Err(Error::config(format!(
                "D - a must be positive (D = {}, a = {})",
                self.dilution, self.noise_amplitude
            )));
        }
        if self.attach + self.detach <= 0.0 {
            return Err(Error::config(
                "alpha1 + alpha2 must be positive (the floating fraction is undefined otherwise)",
            ));
        }
        self.kinetics.validate()
    }

    pub fn d_min(&self) -> f64 {
        self.dilution - self.noise_amplitude
    }

    pub fn d_max(&self) -> f64 {
        self.dilution + self.noise_amplitude
    }

    /// `D + ψ(ξ)`, or exactly `D` when the amplitude is zero.
    #[inline]
    pub fn effective_dilution(&self, xi: f64) -> f64 {
        if self.noise_amplitude == 0.0 {
            self.dilution
        } else {
            self.dilution + psi_unchecked(xi, self.noise_amplitude)
        }
    }

    /// `ψ(ξ)` for this amplitude (zero when deterministic).
    #[inline]
    pub fn psi(&self, xi: f64) -> f64 {
        if self.noise_amplitude == 0.0 {
            0.0
        } else {
            psi_unchecked(xi, self.noise_amplitude)
        }
    }

    /// Same constants with the noise switched off.
    pub fn deterministic(&self) -> Self {
        Self { noise_amplitude: 0.0, ..*self }
    }

    /// Attracting value of the floating fraction, `alpha2 / (alpha1 + alpha2)`.
    pub fn p_upper(&self) -> f64 {
        self.detach / (self.attach + self.detach)
    }

    /// `alpha2 / (alpha1 + alpha2 + alpha D_max)`.
    pub fn p_lower(&self) -> f64 {
        self.detach / (self.attach + self.detach + self.outflow_ratio * self.d_max())
    }

    /// `z = g s + c (m1 + m2)`.
    pub fn z(&self, state: &State) -> f64 {
        self.growth_yield * state.s + self.consumption * (state.m1 + state.m2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub s: f64,
    pub m1: f64,
    pub m2: f64,
}

impl State {
    pub const fn new(s: f64, m1: f64, m2: f64) -> Self {
        Self { s, m1, m2 }
    }

    pub fn total_biomass(&self) -> f64 {
        self.m1 + self.m2
    }

    pub fn is_nonnegative(&self) -> bool {
        self.s >= 0.0 && self.m1 >= 0.0 && self.m2 >= 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateState {
    pub s: f64,
    pub m: f64,
    pub p: f64,
}

impl AggregateState {
    pub const fn new(s: f64, m: f64, p: f64) -> Self {
        Self { s, m, p }
    }
}

/// Which competition term the aggregate biomass equation uses.
///
/// Summing the two population equations gives `-(r1 p + r2 (1 - p)) m²`
/// (`Consistent`). The customary statement of the aggregate system uses
/// `-r1 m² - r2 (1 - p) m²` (`AsPrinted`), which removes an extra
/// `r1 (1 - p) m²`. Both are offered so the discrepancy can be measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformedForm {
    #[default]
    AsPrinted,
    Consistent,
}

impl From<State> for [f64; 3] {
    fn from(x: State) -> Self {
        [x.s, x.m1, x.m2]
    }
}

impl From<[f64; 3]> for State {
    fn from(v: [f64; 3]) -> Self {
        State::new(v[0], v[1], v[2])
    }
}

impl From<AggregateState> for [f64; 3] {
    fn from(x: AggregateState) -> Self {
        [x.s, x.m, x.p]
    }
}

impl From<[f64; 3]> for AggregateState {
    fn from(v: [f64; 3]) -> Self {
        AggregateState::new(v[0], v[1], v[2])
    }
}

/// Derivative `(s', m1', m2')` of the original system for noise value `xi`.
///
/// Values of `s` below zero (integrator round-off only) are evaluated as 0.
pub fn rhs_original(params: &ChemostatParams, state: &State, xi: f64) -> State {
    let p = params;
    let deff = p.effective_dilution(xi);
    let mu = p.kinetics.mu_unchecked(state.s.max(0.0));
    let (m1, m2) = (state.m1, state.m2);
    let competition = p.liquid_competition * m1 + p.wall_competition * m2;

    let ds = deff * (p.s_in - p.outflow_ratio * state.s) - p.consumption * mu * (m1 + m2)
        + p.recycling * p.death * m1;
    let dm1 = m1 * (-p.death - p.outflow_ratio * deff + p.growth_yield * mu - competition - p.attach)
        + p.detach * m2;
    let dm2 = m2 * (-p.death + p.growth_yield * mu - competition - p.detach) + p.attach * m1;
    State::new(ds, dm1, dm2)
}

/// Derivative `(s', m', p')` of the aggregate system, printed competition form.
pub fn rhs_transformed(params: &ChemostatParams, state: &AggregateState, xi: f64) -> AggregateState {
    rhs_transformed_with(params, state, xi, TransformedForm::AsPrinted)
}

pub fn rhs_transformed_with(
    params: &ChemostatParams,
    state: &AggregateState,
    xi: f64,
    form: TransformedForm,
) -> AggregateState {
    let pr = params;
    let deff = pr.effective_dilution(xi);
    let mu = pr.kinetics.mu_unchecked(state.s.max(0.0));
    let (m, p) = (state.m, state.p);
    let alpha_d = pr.outflow_ratio * deff;

    let ds = deff * (pr.s_in - pr.outflow_ratio * state.s) - pr.consumption * mu * m
        + pr.recycling * pr.death * p * m;
    let competition = match form {
        TransformedForm::AsPrinted => pr.liquid_competition * m * m + pr.wall_competition * (1.0 - p) * m * m,
        TransformedForm::Consistent => (pr.liquid_competition * p + pr.wall_competition * (1.0 - p)) * m * m,
    };
    let dm = -alpha_d * p * m + pr.growth_yield * mu * m - pr.death * m - competition;
    let dp = alpha_d * p * p - (alpha_d + pr.attach + pr.detach) * p + pr.detach;
    AggregateState::new(ds, dm, dp)
}

/// `(s, m1, m2) -> (s, m1 + m2, m1 / (m1 + m2))`; at `m = 0` the fraction is
/// set to `alpha2 / (alpha1 + alpha2)`.
pub fn to_aggregate(params: &ChemostatParams, state: &State) -> AggregateState {
    let m = state.m1 + state.m2;
    let p = if m > 0.0 { state.m1 / m } else { params.p_upper() };
    AggregateState::new(state.s, m, p)
}

/// `(s, m, p) -> (s, p m, (1 - p) m)`.
pub fn from_aggregate(state: &AggregateState) -> State {
    State::new(state.s, state.p * state.m, (1.0 - state.p) * state.m)
}
