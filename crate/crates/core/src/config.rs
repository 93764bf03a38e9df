//! JSON run configuration: `"spec": 1`, the flat parameter set, and optional
//! simulation settings. Overrides are `dotted.key=value` pairs applied to the
//! raw JSON before it is typed, so they go through the same validation as the
//! file itself.
//!
//! ```json
//! {
//!   "spec": 1,
//!   "s_in": 17, "D": 1.9, "a": 0.25, "alpha": 0.5, "c": 4.8, "g": 0.6,
//!   "r": 0.4, "d": 0.4, "alpha1": 0.5, "alpha2": 0.7, "r1": 0.1, "r2": 0.5,
//!   "kinetics": {"type": "monod", "k": 4.7},
//!   "initial": {"s": 20, "m1": 14, "m2": 10},
//!   "t_end": 100, "dt": 0.001, "seeds": [1, 2, 3, 4, 5]
//! }
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::analysis::AnalysisOptions;
use crate::error::{Error, Result};
use crate::experiment::{ExperimentPreset, Figure, DEFAULT_N_SEEDS, DEFAULT_THRESHOLD, DEFAULT_T_END};
use crate::integrator::{DEFAULT_DT, DEFAULT_RECORD_EVERY};
use crate::model::{ChemostatParams, State};
use crate::noise::DEFAULT_BURN_IN;

pub const CONFIG_VERSION: u64 = 1;

const PARAM_KEYS: &[&str] =
    &["s_in", "D", "a", "alpha", "c", "g", "r", "d", "alpha1", "alpha2", "r1", "r2", "kinetics"];

/// Every key an override may name.
pub const OVERRIDE_KEYS: &[&str] = &[
    "s_in",
    "D",
    "a",
    "alpha",
    "c",
    "g",
    "r",
    "d",
    "alpha1",
    "alpha2",
    "r1",
    "r2",
    "kinetics.type",
    "kinetics.k",
    "kinetics.i",
    "initial.s",
    "initial.m1",
    "initial.m2",
    "t_end",
    "dt",
    "record_every",
    "seeds",
    "burn_in",
    "extinction_threshold",
    "persistence_threshold",
    "analysis.verbatim_f",
    "analysis.strict_proof_consistent",
    "analysis.s_star_margin",
];

fn default_t_end() -> f64 {
    DEFAULT_T_END
}
fn default_dt() -> f64 {
    DEFAULT_DT
}
fn default_record_every() -> usize {
    DEFAULT_RECORD_EVERY
}
fn default_seeds() -> Vec<u64> {
    (1..=DEFAULT_N_SEEDS).collect()
}
fn default_burn_in() -> f64 {
    DEFAULT_BURN_IN
}
fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

/// Everything in a config file besides the parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<State>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_burn_in")]
    pub burn_in: f64,
    #[serde(default = "default_threshold")]
    pub extinction_threshold: f64,
    #[serde(default = "default_threshold")]
    pub persistence_threshold: f64,
    #[serde(default)]
    pub analysis: AnalysisOptions,
}

impl Default for RunSettings {
    fn default() -> Self {
        serde_json::from_value(Value::Object(Map::new())).expect("all settings have defaults")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ChemostatParams,
    pub run: RunSettings,
}

impl RunConfig {
    pub fn figure(fig: Figure) -> Self {
        RunConfig {
            params: fig.params(),
            run: RunSettings { initial: Some(fig.initial()), ..RunSettings::default() },
        }
    }

    pub fn from_json_str(text: &str, overrides: &[String]) -> Result<Self> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Error::config(format!("malformed config JSON: {e}")))?;
        Self::from_value(value, overrides)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json_str(&text, overrides)
    }

    pub fn from_value(value: Value, overrides: &[String]) -> Result<Self> {
        let Value::Object(mut map) = value else {
            return Err(Error::config("config must be a JSON object"));
        };
        match map.remove("spec") {
            Some(Value::Number(n)) if n.as_u64() == Some(CONFIG_VERSION) => {}
            Some(other) => {
                return Err(Error::config(format!(
                    "unsupported config version spec = {other}; expected {CONFIG_VERSION}"
                )))
            }
            None => return Err(Error::config("config is missing the version field \"spec\"")),
        }
        for ov in overrides {
            apply_override(&mut map, ov)?;
        }

        let mut params = Map::new();
        for key in PARAM_KEYS {
            if let Some(v) = map.remove(*key) {
                params.insert((*key).to_string(), v);
            }
        }
        let params: ChemostatParams = serde_json::from_value(Value::Object(params))
            .map_err(|e| Error::config(format!("parameters: {e}")))?;
        params.validate()?;
        let run: RunSettings = serde_json::from_value(Value::Object(map))
            .map_err(|e| Error::config(format!("settings: {e}")))?;
        Ok(RunConfig { params, run })
    }

    pub fn to_value(&self) -> Value {
        let mut map = Map::new();
        map.insert("spec".into(), CONFIG_VERSION.into());
        for part in [
            serde_json::to_value(self.params).expect("parameters serialize"),
            serde_json::to_value(&self.run).expect("settings serialize"),
        ] {
            if let Value::Object(m) = part {
                map.extend(m);
            }
        }
        Value::Object(map)
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json_string())?;
        Ok(())
    }

    pub fn initial(&self) -> Result<State> {
        self.run
            .initial
            .ok_or_else(|| Error::config("initial state is required (set \"initial\" or initial.s/m1/m2)"))
    }

    pub fn to_preset(&self, name: &str) -> Result<ExperimentPreset> {
        let r = &self.run;
        Ok(ExperimentPreset {
            name: name.to_string(),
            params: self.params,
            initial: self.initial()?,
            seeds: r.seeds.clone(),
            t_end: r.t_end,
            dt: r.dt,
            record_every: r.record_every,
            burn_in: r.burn_in,
            extinction_threshold: r.extinction_threshold,
            persistence_threshold: r.persistence_threshold,
            analysis: r.analysis,
        })
    }
}

/// Apply one `key=value` override. The value is read as JSON when it parses
/// (numbers, booleans, arrays) and as a bare string otherwise.
pub fn apply_override(map: &mut Map<String, Value>, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::config(format!("override {assignment:?} is not of the form key=value")))?;
    let key = key.trim();
    if !OVERRIDE_KEYS.contains(&key) {
        return Err(Error::config(format!(
            "unknown override field {key:?}; valid fields: {}",
            OVERRIDE_KEYS.join(", ")
        )));
    }
    let raw = raw.trim();
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));

    let mut parts: Vec<&str> = key.split('.').collect();
    let leaf = parts.pop().expect("split yields at least one part");
    let mut node = map;
    for part in parts {
        let entry = node.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
        node = entry
            .as_object_mut()
            .ok_or_else(|| Error::config(format!("override {key:?}: {part:?} is not an object")))?;
    }
    node.insert(leaf.to_string(), value);
    Ok(())
}
