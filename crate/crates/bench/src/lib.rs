//! Shared fixtures for the criterion benchmarks.

use tauleap_core::steppers::Simulation;
use tauleap_core::{
    builtin_model, BuiltinModel, Method, MethodConfig, Model, ModelParams, RngStream,
};

pub fn model(which: BuiltinModel) -> Model {
    builtin_model(which, &ModelParams::default()).expect("builtin models are valid")
}

/// A simulation advanced past its initial transient, ready to be cloned
/// into each benchmark iteration.
pub fn warmed_up(model: &Model, method: Method, warmup: f64) -> Simulation<'_> {
    let tau = model.default_tau.expect("builtin models carry a step size");
    let cfg = MethodConfig::new(method, tau);
    let mut sim = Simulation::new(&model.network, cfg, &model.initial, RngStream::new(1, 0))
        .expect("valid configuration");
    sim.advance_to(warmup).expect("stable warm-up");
    sim
}
