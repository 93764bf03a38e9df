//! Random chemostat with wall growth: bounded Ornstein–Uhlenbeck noise on the
//! dilution rate, a fixed-step integrator, closed-form extinction/persistence
//! conditions and seeded ensemble experiments.

pub mod analysis;
pub mod config;
pub mod error;
pub mod experiment;
pub mod integrator;
pub mod kinetics;
pub mod model;
pub mod noise;
pub mod roots;

pub use analysis::{AnalysisOptions, AnalysisReport};
pub use error::{Error, Result};
pub use experiment::{Classification, EnsembleSummary, ExperimentPreset, Figure};
pub use integrator::{integrate, integrate_transformed, SimConfig, Trajectory};
pub use kinetics::Kinetics;
pub use model::{AggregateState, ChemostatParams, State, TransformedForm};
pub use noise::{sample_ou_path, NoiseConfig, NoisePath};
