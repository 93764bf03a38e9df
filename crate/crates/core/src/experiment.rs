//! Ensembles of noisy trajectories plus a deterministic reference, with
//! finite-horizon extinction/persistence classification.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{report, AnalysisOptions, AnalysisReport};
use crate::error::{Error, Result};
use crate::integrator::{integrate, params_hash, SimConfig, Trajectory, DEFAULT_DT, DEFAULT_RECORD_EVERY};
use crate::kinetics::Kinetics;
use crate::model::{ChemostatParams, State};
use crate::noise::{sample_ou_path, NoiseConfig, NoisePath, DEFAULT_BURN_IN};

pub const DEFAULT_T_END: f64 = 100.0;
pub const DEFAULT_N_SEEDS: u64 = 5;
pub const DEFAULT_THRESHOLD: f64 = 1e-2;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "CHEMOSTAT_THREADS";

/// The four reference parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

impl Figure {
    pub const ALL: [Figure; 4] = [Figure::Fig1, Figure::Fig2, Figure::Fig3, Figure::Fig4];

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Figure::Fig1),
            2 => Ok(Figure::Fig2),
            3 => Ok(Figure::Fig3),
            4 => Ok(Figure::Fig4),
            _ => Err(Error::usage(format!("figure must be 1, 2, 3 or 4, got {n}"))),
        }
    }

    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
        }
    }

    pub fn params(self) -> ChemostatParams {
        match self {
            Figure::Fig1 | Figure::Fig2 => ChemostatParams {
                s_in: 17.0,
                dilution: 1.9,
                noise_amplitude: 0.25,
                outflow_ratio: 0.5,
                consumption: 4.8,
                growth_yield: 0.6,
                recycling: 0.4,
                death: 0.4,
                attach: 0.5,
                detach: 0.7,
                liquid_competition: 0.1,
                wall_competition: 0.5,
                kinetics: if self == Figure::Fig1 {
                    Kinetics::monod(4.7)
                } else {
                    Kinetics::haldane(4.7, 5.0)
                },
            },
            Figure::Fig3 => ChemostatParams {
                s_in: 17.0,
                dilution: 0.47,
                noise_amplitude: 0.4,
                outflow_ratio: 0.5,
                consumption: 4.0,
                growth_yield: 3.8,
                recycling: 0.4,
                death: 0.01,
                attach: 0.5,
                detach: 0.7,
                liquid_competition: 0.4,
                wall_competition: 0.6,
                kinetics: Kinetics::monod(1.4),
            },
            Figure::Fig4 => ChemostatParams {
                s_in: 19.0,
                dilution: 0.61,
                noise_amplitude: 0.16,
                outflow_ratio: 0.5,
                consumption: 7.0,
                growth_yield: 6.8,
                recycling: 0.7,
                death: 0.01,
                attach: 0.55,
                detach: 0.65,
                liquid_competition: 0.4,
                wall_competition: 0.2,
                kinetics: Kinetics::haldane(7.0, 7.6),
            },
        }
    }

    pub fn initial(self) -> State {
        match self {
            Figure::Fig4 => State::new(20.0, 14.0, 17.0),
            _ => State::new(20.0, 14.0, 10.0),
        }
    }

    /// Behavior the figure is meant to show.
    pub fn expected(self) -> Classification {
        match self {
            Figure::Fig1 | Figure::Fig2 => Classification::Extinct,
            Figure::Fig3 | Figure::Fig4 => Classification::Persistent,
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Extinct,
    Persistent,
    Inconclusive,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Extinct => "extinct",
            Classification::Persistent => "persistent",
            Classification::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPreset {
    pub name: String,
    pub params: ChemostatParams,
    pub initial: State,
    pub seeds: Vec<u64>,
    pub t_end: f64,
    pub dt: f64,
    pub record_every: usize,
    pub burn_in: f64,
    pub extinction_threshold: f64,
    pub persistence_threshold: f64,
    pub analysis: AnalysisOptions,
}

impl ExperimentPreset {
    pub fn figure(fig: Figure) -> Self {
        Self::custom(fig.name(), fig.params(), fig.initial(), DEFAULT_N_SEEDS)
    }

    /// Seeds `1..=n_seeds`, horizon 100, step `1e-3`.
    pub fn custom(name: &str, params: ChemostatParams, initial: State, n_seeds: u64) -> Self {
        Self {
            name: name.to_string(),
            params,
            initial,
            seeds: (1..=n_seeds).collect(),
            t_end: DEFAULT_T_END,
            dt: DEFAULT_DT,
            record_every: DEFAULT_RECORD_EVERY,
            burn_in: DEFAULT_BURN_IN,
            extinction_threshold: DEFAULT_THRESHOLD,
            persistence_threshold: DEFAULT_THRESHOLD,
            analysis: AnalysisOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !self.initial.is_nonnegative() {
            return Err(Error::config(format!(
                "initial state must be finite and nonnegative, got {:?}",
                self.initial
            )));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::config(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::config(format!("dt must be positive, got {}", self.dt)));
        }
        if self.record_every == 0 {
            return Err(Error::config("record_every must be at least 1"));
        }
        for (name, v) in [
            ("extinction_threshold", self.extinction_threshold),
            ("persistence_threshold", self.persistence_threshold),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    fn sim_config(&self) -> SimConfig<State> {
        SimConfig::new(self.initial, self.t_end).with_dt(self.dt).with_record_every(self.record_every)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

impl Stat {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let (mut min, mut max, mut sum, mut n) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
        for v in values {
            min = min.min(v);
            max = max.max(v);
            sum += v;
            n += 1;
        }
        Stat { min, mean: sum / n as f64, max }
    }
}

/// Statistics over recorded points with `t >= t_end / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailStats {
    pub from: f64,
    pub to: f64,
    pub s: Stat,
    pub m1: Stat,
    pub m2: Stat,
    pub total: Stat,
    /// Least-squares slope of `ln(m1 + m2)` over the window; absent when the
    /// biomass hits zero.
    pub log_biomass_slope: Option<f64>,
}

impl TailStats {
    pub fn of(traj: &Trajectory<State>, from: f64) -> Result<Self> {
        let idx: Vec<usize> = (0..traj.len()).filter(|&j| traj.times[j] >= from).collect();
        if idx.is_empty() {
            return Err(Error::config(format!("no recorded points after t = {from}")));
        }
        let pick = |f: fn(&State) -> f64| idx.iter().map(move |&j| f(&traj.states[j]));
        let slope = if idx.len() >= 2 && pick(|x| x.total_biomass()).all(|m| m > 0.0) {
            let t: Vec<f64> = idx.iter().map(|&j| traj.times[j]).collect();
            let y: Vec<f64> = pick(|x| x.total_biomass().ln()).collect();
            Some(least_squares_slope(&t, &y))
        } else {
            None
        };
        Ok(TailStats {
            from,
            to: traj.times[traj.len() - 1],
            s: Stat::of(pick(|x| x.s)),
            m1: Stat::of(pick(|x| x.m1)),
            m2: Stat::of(pick(|x| x.m2)),
            total: Stat::of(pick(|x| x.total_biomass())),
            log_biomass_slope: slope,
        })
    }

    pub fn classify(&self, extinction_threshold: f64, persistence_threshold: f64) -> Classification {
        if self.total.max < extinction_threshold {
            Classification::Extinct
        } else if self.m1.min > persistence_threshold && self.m2.min > persistence_threshold {
            Classification::Persistent
        } else {
            Classification::Inconclusive
        }
    }
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    /// `None` for the deterministic reference.
    pub seed: Option<u64>,
    pub terminal: State,
    pub tail: TailStats,
    pub classification: Classification,
    pub clamp_count: usize,
    pub max_clamp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub name: String,
    pub params: ChemostatParams,
    pub params_hash: String,
    pub initial: State,
    pub t_end: f64,
    pub dt: f64,
    pub extinction_threshold: f64,
    pub persistence_threshold: f64,
    pub deterministic: RunSummary,
    pub runs: Vec<RunSummary>,
    /// Shared classification of the noisy runs (of the reference when there
    /// are none); `inconclusive` if they disagree.
    pub classification: Classification,
    pub analysis: AnalysisReport,
}

impl EnsembleSummary {
    pub fn all_runs(&self) -> impl Iterator<Item = &RunSummary> {
        std::iter::once(&self.deterministic).chain(&self.runs)
    }

    pub fn total_clamps(&self) -> usize {
        self.all_runs().map(|r| r.clamp_count).sum()
    }
}

/// Summary plus the trajectories it was computed from.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub summary: EnsembleSummary,
    pub deterministic: Trajectory<State>,
    pub runs: Vec<Trajectory<State>>,
}

impl Ensemble {
    /// `summary.json`, `analysis.json`, `traj_det.csv` and `traj_seed<k>.csv`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        write_json(&dir.join("summary.json"), &self.summary)?;
        write_json(&dir.join("analysis.json"), &self.summary.analysis)?;
        self.deterministic.write_csv(BufWriter::new(File::create(dir.join("traj_det.csv"))?))?;
        for traj in &self.runs {
            let name = format!("traj_seed{}.csv", traj.seed);
            traj.write_csv(BufWriter::new(File::create(dir.join(name))?))?;
        }
        Ok(())
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

/// Worker count from `CHEMOSTAT_THREADS`, or rayon's default when unset.
pub fn thread_count() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

fn summarize(preset: &ExperimentPreset, traj: &Trajectory<State>, seed: Option<u64>) -> Result<RunSummary> {
    let tail = TailStats::of(traj, preset.t_end / 2.0)?;
    Ok(RunSummary {
        seed,
        terminal: traj.last(),
        tail,
        classification: tail.classify(preset.extinction_threshold, preset.persistence_threshold),
        clamp_count: traj.clamp_count,
        max_clamp: traj.max_clamp,
    })
}

fn noisy_run(preset: &ExperimentPreset, seed: u64) -> Result<(Trajectory<State>, RunSummary)> {
    let noise =
        sample_ou_path(&NoiseConfig::new(seed, preset.t_end, preset.dt).with_burn_in(preset.burn_in))?;
    let traj = integrate(&preset.params, &noise, &preset.sim_config()).map_err(|e| e.with_seed(seed))?;
    let summary = summarize(preset, &traj, Some(seed))?;
    Ok((traj, summary))
}

/// Run the deterministic reference and every seeded trajectory, in memory.
pub fn simulate_ensemble(preset: &ExperimentPreset) -> Result<Ensemble> {
    preset.validate()?;
    let analysis = report(&preset.params, &preset.analysis)?;

    let det_params = preset.params.deterministic();
    let det_traj = integrate(&det_params, &NoisePath::zeros(preset.t_end, preset.dt)?, &preset.sim_config())?;
    let deterministic = summarize(preset, &det_traj, None)?;

    let work = || -> Result<Vec<(Trajectory<State>, RunSummary)>> {
        preset.seeds.par_iter().map(|&s| noisy_run(preset, s)).collect()
    };
    let results = match thread_count()? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let (runs, summaries): (Vec<_>, Vec<_>) = results.into_iter().unzip();

    let classification = {
        let mut classes = summaries.iter().map(|r| r.classification);
        match classes.next() {
            None => deterministic.classification,
            Some(first) if classes.all(|c| c == first) => first,
            Some(_) => Classification::Inconclusive,
        }
    };
    log::info!("{}: {} noisy runs, classification {classification}", preset.name, summaries.len());

    Ok(Ensemble {
        summary: EnsembleSummary {
            name: preset.name.clone(),
            params: preset.params,
            params_hash: params_hash(&preset.params),
            initial: preset.initial,
            t_end: preset.t_end,
            dt: preset.dt,
            extinction_threshold: preset.extinction_threshold,
            persistence_threshold: preset.persistence_threshold,
            deterministic,
            runs: summaries,
            classification,
            analysis,
        },
        deterministic: det_traj,
        runs,
    })
}

/// Run a preset, writing the output layout to `out_dir` when given.
pub fn run_preset(preset: &ExperimentPreset, out_dir: Option<&Path>) -> Result<EnsembleSummary> {
    let ensemble = simulate_ensemble(preset)?;
    if let Some(dir) = out_dir {
        ensemble.write(dir)?;
    }
    Ok(ensemble.summary)
}

/// [`run_preset`] for user-supplied values with seeds `1..=n_seeds`.
pub fn run_custom(
    params: ChemostatParams,
    initial: State,
    n_seeds: u64,
    t_end: f64,
    dt: f64,
    out_dir: Option<&Path>,
) -> Result<EnsembleSummary> {
    let mut preset = ExperimentPreset::custom("custom", params, initial, n_seeds);
    preset.t_end = t_end;
    preset.dt = dt;
    run_preset(&preset, out_dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short(fig: Figure, seeds: u64) -> ExperimentPreset {
        let mut p = ExperimentPreset::figure(fig);
        p.seeds = (1..=seeds).collect();
        p.t_end = 10.0;
        p.dt = 2e-3;
        p
    }

    #[test]
    fn figure_lookup() {
        for (n, fig) in (1..=4).zip(Figure::ALL) {
            assert_eq!(Figure::from_number(n).unwrap(), fig);
            assert_eq!(fig.number(), n);
            assert!(fig.params().validate().is_ok());
        }
        assert!(Figure::from_number(5).is_err());
        assert_eq!(Figure::Fig4.initial(), State::new(20.0, 14.0, 17.0));
    }

    #[test]
    fn tail_classification() {
        let traj = |m: f64| Trajectory {
            times: vec![0.0, 5.0, 10.0],
            states: vec![State::new(1.0, 5.0, 5.0), State::new(1.0, m, m), State::new(1.0, m, m)],
            noise_used: vec![0.0; 3],
            params_hash: String::new(),
            seed: 0,
            clamp_count: 0,
            max_clamp: 0.0,
        };
        let classify = |m| TailStats::of(&traj(m), 5.0).unwrap().classify(1e-2, 1e-2);
        assert_eq!(classify(1e-3), Classification::Extinct);
        assert_eq!(classify(1.0), Classification::Persistent);
        assert_eq!(classify(6e-3), Classification::Inconclusive);

        let t = TailStats::of(&traj(1.0), 5.0).unwrap();
        assert_eq!(t.m1.min, 1.0);
        assert_eq!(t.log_biomass_slope, Some(0.0));
        assert_eq!(TailStats::of(&traj(0.0), 5.0).unwrap().log_biomass_slope, None);
    }

    #[test]
    fn zero_seeds_runs_reference_only() {
        let s = run_preset(&short(Figure::Fig1, 0), None).unwrap();
        assert!(s.runs.is_empty());
        assert_eq!(s.classification, s.deterministic.classification);
    }

    #[test]
    fn repeatable() {
        let p = short(Figure::Fig3, 2);
        let a = run_preset(&p, None).unwrap();
        let b = run_preset(&p, None).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.runs[0].terminal, a.runs[1].terminal);
    }

    #[test]
    fn invalid_preset() {
        let mut p = short(Figure::Fig1, 1);
        p.record_every = 0;
        assert!(matches!(run_preset(&p, None), Err(Error::Config(_))));
        let mut p = short(Figure::Fig1, 1);
        p.initial = State::new(-1.0, 0.0, 0.0);
        assert!(matches!(run_preset(&p, None), Err(Error::Config(_))));
    }

    #[test]
    fn writes_layout() {
        let dir = tempfile::tempdir().unwrap();
        let p = short(Figure::Fig2, 2);
        let ens = simulate_ensemble(&p).unwrap();
        ens.write(dir.path()).unwrap();
        for f in ["summary.json", "analysis.json", "traj_det.csv", "traj_seed1.csv", "traj_seed2.csv"] {
            assert!(dir.path().join(f).is_file(), "{f}");
        }
        let back: EnsembleSummary =
            serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
        assert_eq!(back.runs.len(), 2);
        assert_eq!(back.classification, ens.summary.classification);
    }
}
