//! Closed-form quantities and sufficient conditions for extinction and
//! persistence of the random chemostat.
//!
//! Everything here is a pure function of [`ChemostatParams`] plus the variant
//! switches in [`AnalysisOptions`]:
//!
//! * `verbatim_f` drops the factor `s_in` from the biomass coefficient of the
//!   nutrient lower-bound function `f` (the absorbing bound is
//!   `g D_max s_in / ϑ`, so the default keeps `s_in`).
//! * `strict_proof_consistent` evaluates the persistence conditions in the
//!   form the supporting estimates actually justify: `l = min{s*, D_max s_in/ϑ}`
//!   for Monod, a factor `g` on the Haldane right-hand side, and the competition
//!   slope `r1 P + r2 (1 - p)` in the biomass growth function.
//!
//! The default (both off) reproduces the conditions exactly as they are
//! usually stated.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetics::Kinetics;
use crate::model::ChemostatParams;
use crate::roots::{bisect, first_root, Root};

/// Relative tolerance for every bisection in this module.
pub const ROOT_REL_TOL: f64 = 1e-10;

/// Default `s*` margin as a fraction of `f(0) = D_min s_in`.
pub const S_STAR_MARGIN_FRACTION: f64 = 1e-3;

const SCAN_CELLS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisOptions {
    pub verbatim_f: bool,
    pub strict_proof_consistent: bool,
    /// Margin `ε` added to the biomass coefficient of `f`; defaults to
    /// `1e-3 D_min s_in`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_star_margin: Option<f64>,
}

/// Both sides of a sufficient condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersistenceCheck {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub s_star: f64,
    /// `l = min{s*, ..}`; Monod only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
}

impl PersistenceCheck {
    pub fn condition(&self) -> ConditionCheck {
        ConditionCheck { holds: self.holds, lhs: self.lhs, rhs: self.rhs }
    }
}

/// Positive nutrient floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SStar {
    pub value: f64,
    /// False when `f` stayed positive up to the scan bound.
    pub bracketed: bool,
    pub margin: f64,
    /// Weight of `μ(s)` in `f`, including the margin.
    pub coefficient: f64,
}

/// Total-biomass floor from the biomass growth function `G(m) = A - B m`
/// (or its Monod variant with an `m`-dependent consumption bound).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MStar {
    pub value: f64,
    /// False when `G` stayed positive up to the search bound; `value` is the bound.
    pub bracketed: bool,
    /// Margin used for `P_ε = p_upper + ε` and `p_ε = p_lower - ε`.
    pub epsilon: f64,
    /// `G(0)`.
    pub intercept: f64,
    /// Competition coefficient `B`; `G` has slope `-B`, and `B <= 0` means no
    /// root exists.
    pub competition_slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Floors {
    pub m1_floor: f64,
    pub m2_floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorReport {
    pub m_star: MStar,
    pub m1_floor: f64,
    pub m2_floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub kinetics: String,
    pub d_min: f64,
    pub d_max: f64,
    pub vartheta: f64,
    pub absorbing_bound: f64,
    pub s_star: Option<f64>,
    pub s_star_bracketed: bool,
    pub s_star_margin: f64,
    pub p_lower: f64,
    pub p_upper: f64,
    pub extinction: ConditionCheck,
    pub persistence_monod: Option<PersistenceCheck>,
    pub persistence_haldane: Option<PersistenceCheck>,
    pub floors: Option<FloorReport>,
    /// False when extinction and persistence both hold.
    pub conditions_exclusive: bool,
    pub options: AnalysisOptions,
    pub notes: Vec<String>,
}

impl AnalysisReport {
    pub fn persistence(&self) -> &PersistenceCheck {
        self.persistence_monod
            .as_ref()
            .or(self.persistence_haldane.as_ref())
            .expect("report carries exactly one persistence check")
    }
}

/// `ϑ = min{α D_min, d + α D_min - g r d / c, d}`.
pub fn compute_vartheta(params: &ChemostatParams) -> Result<f64> {
    params.validate()?;
    let p = params;
    let alpha_dmin = p.outflow_ratio * p.d_min();
    let middle = p.death + alpha_dmin - p.growth_yield / p.consumption * p.recycling * p.death;
    let v = alpha_dmin.min(middle).min(p.death);
    if v.is_nan() || v <= 0.0 {
        return Err(Error::analysis(format!(
            "absorbing-set bound unavailable: vartheta = {v} is not positive"
        )));
    }
    Ok(v)
}

/// `g D_max s_in / ϑ`, the bound on `z = g s + c (m1 + m2)` after transients.
pub fn absorbing_bound(params: &ChemostatParams) -> Result<f64> {
    let v = compute_vartheta(params)?;
    Ok(params.growth_yield * params.d_max() * params.s_in / v)
}

/// Extinction: `D α p_lower + d > g`.
pub fn check_extinction(params: &ChemostatParams) -> Result<ConditionCheck> {
    params.validate()?;
    let p = params;
    let lhs = p.dilution * p.outflow_ratio * p.p_lower() + p.death;
    let rhs = p.growth_yield;
    Ok(ConditionCheck { holds: lhs > rhs, lhs, rhs })
}

/// Default margin for the `s*` function: `1e-3 D_min s_in`.
pub fn default_s_star_margin(params: &ChemostatParams) -> f64 {
    S_STAR_MARGIN_FRACTION * params.d_min() * params.s_in
}

/// Weight of `μ(s)` in `f`, without the margin.
pub fn s_star_base_coefficient(params: &ChemostatParams, opts: &AnalysisOptions) -> Result<f64> {
    let v = compute_vartheta(params)?;
    let inflow = if opts.verbatim_f { 1.0 } else { params.s_in };
    Ok(params.growth_yield * params.d_max() * inflow / v)
}

/// `f(s) = D_min s_in - α D_max s - μ(s) · coefficient`.
pub fn s_star_function(params: &ChemostatParams, coefficient: f64, s: f64) -> f64 {
    params.d_min() * params.s_in
        - params.outflow_ratio * params.d_max() * s
        - params.kinetics.mu_unchecked(s) * coefficient
}

/// Smallest positive root of `f` for a given `μ` weight.
///
/// `f` is strictly decreasing for Monod and on `[0, √(k i)]` for Haldane, so a
/// bracket is known up front; past the Haldane peak the first crossing is
/// located by a scan. `f` is negative at the linear root
/// `D_min s_in / (α D_max)` whenever `coefficient > 0`, so a root always exists
/// below it.
pub fn s_star_for_coefficient(params: &ChemostatParams, coefficient: f64) -> Root {
    let linear_root = params.d_min() * params.s_in / (params.outflow_ratio * params.d_max());
    if coefficient == 0.0 {
        return Root { value: linear_root, bracketed: true };
    }
    let f = |s: f64| s_star_function(params, coefficient, s);
    let scan_bound = 10.0 * params.s_in / params.outflow_ratio;
    if f(linear_root) > 0.0 {
        // Only reachable for a negative coefficient.
        return first_root(f, linear_root, scan_bound, SCAN_CELLS, ROOT_REL_TOL);
    }
    let monotone_to = match params.kinetics {
        Kinetics::Monod { .. } => linear_root,
        Kinetics::Haldane { .. } => {
            params.kinetics.mu_argmax().map_or(linear_root, |peak| peak.min(linear_root))
        }
    };
    if f(monotone_to) <= 0.0 {
        return Root { value: bisect(f, 0.0, monotone_to, ROOT_REL_TOL), bracketed: true };
    }
    first_root(f, monotone_to, linear_root, SCAN_CELLS, ROOT_REL_TOL)
}

/// Nutrient floor `s*`, the smallest positive root of `f`.
pub fn compute_s_star(params: &ChemostatParams, opts: &AnalysisOptions) -> Result<SStar> {
    let margin = opts.s_star_margin.unwrap_or_else(|| default_s_star_margin(params));
    if !(margin.is_finite() && margin > 0.0) {
        return Err(Error::config(format!("s* margin must be positive, got {margin}")));
    }
    let coefficient = s_star_base_coefficient(params, opts)? + margin;
    let root = s_star_for_coefficient(params, coefficient);
    Ok(SStar { value: root.value, bracketed: root.bracketed, margin, coefficient })
}

fn persistence_lhs(params: &ChemostatParams) -> f64 {
    params.outflow_ratio * params.d_max() * params.p_upper() + params.death
}

/// Monod persistence: `α D_max p_upper + d < g s* / (k + l)`.
pub fn check_persistence_monod(params: &ChemostatParams, opts: &AnalysisOptions) -> Result<PersistenceCheck> {
    let Kinetics::Monod { half_saturation: k } = params.kinetics else {
        return Err(Error::usage("Monod persistence check requested for non-Monod kinetics"));
    };
    let s_star = compute_s_star(params, opts)?.value;
    let l = s_star.min(monod_l_bound(params, opts)?);
    let lhs = persistence_lhs(params);
    let rhs = params.growth_yield * s_star / (k + l);
    Ok(PersistenceCheck { holds: lhs < rhs, lhs, rhs, s_star, l: Some(l) })
}

/// Second argument of `l = min{s*, ..}`: `D_max / k` as stated, or
/// `D_max s_in / ϑ` in the proof-consistent variant.
fn monod_l_bound(params: &ChemostatParams, opts: &AnalysisOptions) -> Result<f64> {
    if opts.strict_proof_consistent {
        absorbing_bound(params).map(|b| b / params.growth_yield)
    } else {
        Ok(params.d_max() / params.kinetics.half_saturation())
    }
}

fn haldane_denominator(params: &ChemostatParams, k: f64, i: f64, eps: f64) -> f64 {
    let u = params.d_max() * params.s_in / k + eps;
    k + u + u * u / i
}

/// Haldane persistence: `α D_max p_upper + d < s* / (k + D_max s_in/k + D_max² s_in²/(i k²))`,
/// with an extra factor `g` on the right in the proof-consistent variant.
pub fn check_persistence_haldane(
    params: &ChemostatParams,
    opts: &AnalysisOptions,
) -> Result<PersistenceCheck> {
    let Kinetics::Haldane { half_saturation: k, inhibition: i } = params.kinetics else {
        return Err(Error::usage("Haldane persistence check requested for non-Haldane kinetics"));
    };
    let s_star = compute_s_star(params, opts)?.value;
    let scale = if opts.strict_proof_consistent { params.growth_yield } else { 1.0 };
    let lhs = persistence_lhs(params);
    let rhs = scale * s_star / haldane_denominator(params, k, i, 0.0);
    Ok(PersistenceCheck { holds: lhs < rhs, lhs, rhs, s_star, l: None })
}

/// The persistence check matching the configured kinetics.
pub fn check_persistence(params: &ChemostatParams, opts: &AnalysisOptions) -> Result<PersistenceCheck> {
    match params.kinetics {
        Kinetics::Monod { .. } => check_persistence_monod(params, opts),
        Kinetics::Haldane { .. } => check_persistence_haldane(params, opts),
    }
}

/// `m1 >= p_lower m*` and `m2 >= p_lower p_upper m*` asymptotically.
pub fn persistence_floors(params: &ChemostatParams, m_star: f64) -> Result<Floors> {
    if !(m_star.is_finite() && m_star >= 0.0) {
        return Err(Error::config(format!("m* must be finite and nonnegative, got {m_star}")));
    }
    let lower = params.p_lower();
    Ok(Floors { m1_floor: lower * m_star, m2_floor: lower * params.p_upper() * m_star })
}

/// Per-capita biomass growth lower bound `G(m; ε)` together with the end of
/// its domain.
struct GrowthFunction<'a> {
    params: &'a ChemostatParams,
    opts: AnalysisOptions,
    s_star: f64,
}

impl GrowthFunction<'_> {
    fn p_cap(&self, eps: f64) -> f64 {
        self.params.p_upper() + eps
    }

    fn p_floor(&self, eps: f64) -> f64 {
        self.params.p_lower() - eps
    }

    /// Coefficient `B` of `-B m`.
    fn competition_slope(&self, eps: f64) -> f64 {
        let p = self.params;
        let (r1, r2) = (p.liquid_competition, p.wall_competition);
        let (cap, floor) = (self.p_cap(eps), self.p_floor(eps));
        if self.opts.strict_proof_consistent {
            return r1 * cap + r2 * (1.0 - floor);
        }
        match p.kinetics {
            Kinetics::Monod { .. } => r1 * cap + r2 * floor - r2,
            Kinetics::Haldane { .. } => r1 + r2 - floor,
        }
    }

    /// Upper limit of the nutrient used in the Monod consumption bound when
    /// `s*` exceeds it; `None` when the bound `μ(s) >= μ(s*)` applies.
    fn monod_cap(&self) -> Result<Option<f64>> {
        let cap = monod_l_bound(self.params, &self.opts)?;
        Ok((self.s_star > cap).then_some(cap))
    }

    fn eval(&self, m: f64, eps: f64) -> Result<f64> {
        let p = self.params;
        let g = p.growth_yield;
        let base = -p.outflow_ratio * p.d_max() * self.p_cap(eps) - p.death;
        let consumption = match p.kinetics {
            Kinetics::Monod { half_saturation: k } => match self.monod_cap()? {
                None => g * self.s_star / (k + self.s_star),
                Some(cap) => g * self.s_star / (k + cap + eps / g - p.consumption * m / g),
            },
            Kinetics::Haldane { half_saturation: k, inhibition: i } => {
                g * self.s_star / haldane_denominator(p, k, i, eps)
            }
        };
        Ok(base + consumption - self.competition_slope(eps) * m)
    }

    /// Right end of the domain where the Monod consumption bound is finite.
    fn domain_end(&self, eps: f64) -> Result<Option<f64>> {
        let p = self.params;
        Ok(match (p.kinetics, self.monod_cap()?) {
            (Kinetics::Monod { half_saturation: k }, Some(cap)) => {
                Some(p.growth_yield / p.consumption * (k + cap + eps / p.growth_yield))
            }
            _ => None,
        })
    }
}

/// Total-biomass floor `m*`: smallest positive root of the growth function,
/// with `ε` chosen so that `G(0; ε)` is half of `G(0; 0)`.
///
/// Monod uses the slope `r1 P_ε + r2 p_ε - r2`, Haldane `r1 + r2 - p_ε`
/// (`r1 P_ε + r2 (1 - p_ε)` for both in the proof-consistent variant). A
/// function that stays positive has no root; the search stops at the largest
/// biomass compatible with the absorbing set, `absorbing_bound / c` (or the
/// end of the Monod domain), which is returned with `bracketed = false`.
pub fn compute_m_star(params: &ChemostatParams, opts: &AnalysisOptions) -> Result<MStar> {
    let persistence = check_persistence(params, opts)?;
    if !persistence.holds {
        return Err(Error::usage(format!(
            "m* requires the {} persistence condition to hold (lhs = {}, rhs = {})",
            params.kinetics.name(),
            persistence.lhs,
            persistence.rhs
        )));
    }
    let growth = GrowthFunction { params, opts: *opts, s_star: persistence.s_star };
    let gap = growth.eval(0.0, 0.0)?;
    if gap.is_nan() || gap <= 0.0 {
        return Err(Error::analysis(format!(
            "biomass growth bound is not positive at m = 0 (G(0) = {gap}); m* does not exist"
        )));
    }

    // G(0; ε) decreases in ε: grow an upper bracket, then bisect for G(0; ε) = gap/2.
    let half = 0.5 * gap;
    let at = |eps: f64| growth.eval(0.0, eps).map(|v| v - half);
    let mut hi = half / (params.outflow_ratio * params.d_max());
    while at(hi)? > 0.0 {
        hi *= 2.0;
    }
    let eps = {
        let (mut lo, mut hi) = (0.0, hi);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= ROOT_REL_TOL * hi {
                break;
            }
            if at(mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };

    let intercept = growth.eval(0.0, eps)?;
    let slope = growth.competition_slope(eps);
    let mut bound = absorbing_bound(params)? / params.consumption;
    if let Some(end) = growth.domain_end(eps)? {
        bound = bound.min(end * (1.0 - 1e-12));
    }
    let f = |m: f64| growth.eval(m, eps).unwrap_or(f64::NAN);
    let root = first_root(f, 0.0, bound, SCAN_CELLS, ROOT_REL_TOL);
    Ok(MStar {
        value: root.value,
        bracketed: root.bracketed,
        epsilon: eps,
        intercept,
        competition_slope: slope,
    })
}

/// Assemble every quantity for one parameter set.
pub fn report(params: &ChemostatParams, opts: &AnalysisOptions) -> Result<AnalysisReport> {
    params.validate()?;
    let vartheta = compute_vartheta(params)?;
    let bound = absorbing_bound(params)?;
    let s_star = compute_s_star(params, opts)?;
    let extinction = check_extinction(params)?;
    let persistence = check_persistence(params, opts)?;
    let mut notes = Vec::new();

    if !s_star.bracketed {
        notes.push(format!(
            "no root of the nutrient bound function below {}; s* set to the scan bound",
            s_star.value
        ));
    }

    let floors = if persistence.holds {
        match compute_m_star(params, opts) {
            Ok(m_star) => {
                if !m_star.bracketed {
                    notes.push(format!(
                        "biomass growth bound has no root below {} (competition slope {}); \
                         m* set to the search bound",
                        m_star.value, m_star.competition_slope
                    ));
                }
                let f = persistence_floors(params, m_star.value)?;
                Some(FloorReport { m_star, m1_floor: f.m1_floor, m2_floor: f.m2_floor })
            }
            Err(Error::Analysis(msg)) => {
                notes.push(msg);
                None
            }
            Err(e) => return Err(e),
        }
    } else {
        None
    };

    let conditions_exclusive = !(extinction.holds && persistence.holds);
    if !conditions_exclusive {
        log::warn!("extinction and {} persistence conditions both hold", params.kinetics.name());
        notes.push(
            "extinction and persistence conditions both hold; the persistence \
             right-hand side exceeds g"
                .to_string(),
        );
    }

    let (persistence_monod, persistence_haldane) = match params.kinetics {
        Kinetics::Monod { .. } => (Some(persistence), None),
        Kinetics::Haldane { .. } => (None, Some(persistence)),
    };

    Ok(AnalysisReport {
        kinetics: params.kinetics.name().to_string(),
        d_min: params.d_min(),
        d_max: params.d_max(),
        vartheta,
        absorbing_bound: bound,
        s_star: Some(s_star.value),
        s_star_bracketed: s_star.bracketed,
        s_star_margin: s_star.margin,
        p_lower: params.p_lower(),
        p_upper: params.p_upper(),
        extinction,
        persistence_monod,
        persistence_haldane,
        floors,
        conditions_exclusive,
        options: *opts,
        notes,
    })
}

fn verdict(holds: bool) -> &'static str {
    if holds {
        "holds"
    } else {
        "fails"
    }
}

impl fmt::Display for AnalysisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = |f: &mut fmt::Formatter<'_>, name: &str, value: String| writeln!(f, "  {name:<26} {value}");
        writeln!(f, "Analysis ({} kinetics)", self.kinetics)?;
        row(f, "D_min", format!("{:.6}", self.d_min))?;
        row(f, "D_max", format!("{:.6}", self.d_max))?;
        row(f, "vartheta", format!("{:.6}", self.vartheta))?;
        row(f, "absorbing bound", format!("{:.6}", self.absorbing_bound))?;
        match self.s_star {
            Some(s) => row(f, "s*", format!("{s:.6e}"))?,
            None => row(f, "s*", "unavailable".into())?,
        }
        row(f, "p band", format!("[{:.6}, {:.6}]", self.p_lower, self.p_upper))?;
        row(
            f,
            "extinction",
            format!(
                "{}: lhs = {:.6} vs rhs = {:.6}",
                verdict(self.extinction.holds),
                self.extinction.lhs,
                self.extinction.rhs
            ),
        )?;
        let p = self.persistence();
        row(
            f,
            &format!("persistence ({})", self.kinetics),
            format!("{}: lhs = {:.6} vs rhs = {:.6}", verdict(p.holds), p.lhs, p.rhs),
        )?;
        match &self.floors {
            Some(fl) => {
                row(f, "m*", format!("{:.6}", fl.m_star.value))?;
                row(f, "m1 floor", format!("{:.6}", fl.m1_floor))?;
                row(f, "m2 floor", format!("{:.6}", fl.m2_floor))?;
            }
            None => row(f, "floors", "n/a".into())?,
        }
        for note in &self.notes {
            writeln!(f, "  note: {note}")?;
        }
        Ok(())
    }
}
