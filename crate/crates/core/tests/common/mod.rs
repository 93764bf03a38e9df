//! Shared fixtures for the integration suites: random admissible parameter
//! sets and oracles written independently of the library's analysis code.
#![allow(dead_code)]

pub mod oracle;

use chemostat::{ChemostatParams, Kinetics, State};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Broad admissible distribution used for the mutual-exclusion sweep.
pub fn random_admissible(rng: &mut ChaCha8Rng) -> ChemostatParams {
    let dilution = rng.random_range(0.1..3.0);
    let consumption = rng.random_range(0.5..10.0);
    let kinetics = if rng.random_bool(0.5) {
        Kinetics::monod(rng.random_range(0.1..10.0))
    } else {
        Kinetics::haldane(rng.random_range(0.1..10.0), rng.random_range(0.5..20.0))
    };
    let attach = rng.random_range(0.0..2.0);
    let params = ChemostatParams {
        s_in: rng.random_range(1.0..100.0),
        dilution,
        noise_amplitude: rng.random::<f64>() * 0.9 * dilution,
        outflow_ratio: rng.random_range(0.1..2.0),
        consumption,
        growth_yield: consumption * rng.random_range(0.01..1.0),
        recycling: rng.random_range(0.01..0.99),
        death: rng.random_range(0.005..1.0),
        attach,
        // Keep alpha1 + alpha2 away from zero.
        detach: rng.random_range(0.0..2.0) + if attach < 1e-3 { 1e-3 } else { 0.0 },
        liquid_competition: rng.random_range(0.0..1.0),
        wall_competition: rng.random_range(0.0..1.0),
        kinetics,
    };
    params.validate().expect("sampler yields admissible parameters");
    params
}

/// Narrower distribution for simulation suites: contraction rate and
/// biomass scale keep the transient within the horizon at `dt = 1e-3`.
pub fn random_simulable(rng: &mut ChaCha8Rng) -> (ChemostatParams, State) {
    let dilution = rng.random_range(0.5..3.0);
    let consumption = rng.random_range(0.5..10.0);
    let kinetics = if rng.random_bool(0.5) {
        Kinetics::monod(rng.random_range(0.1..10.0))
    } else {
        Kinetics::haldane(rng.random_range(0.1..10.0), rng.random_range(0.5..20.0))
    };
    let params = ChemostatParams {
        s_in: rng.random_range(1.0..30.0),
        dilution,
        noise_amplitude: rng.random::<f64>() * 0.5 * dilution,
        outflow_ratio: rng.random_range(0.5..2.0),
        consumption,
        growth_yield: consumption * rng.random_range(0.05..1.0),
        recycling: rng.random_range(0.01..0.99),
        death: rng.random_range(0.1..1.0),
        attach: rng.random_range(0.05..2.0),
        detach: rng.random_range(0.05..2.0),
        liquid_competition: rng.random_range(0.0..1.0),
        wall_competition: rng.random_range(0.0..1.0),
        kinetics,
    };
    params.validate().expect("sampler yields admissible parameters");
    let initial = State::new(
        rng.random_range(0.0..2.0 * params.s_in),
        rng.random_range(0.0..10.0),
        rng.random_range(0.0..10.0),
    );
    (params, initial)
}
