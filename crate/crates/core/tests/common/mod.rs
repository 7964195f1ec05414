#![allow(dead_code)]

use radflow::diagnostics::{DiagnosticsConfig, DiagnosticsRecord};
use radflow::initial_data::{sample_on_grid, truncate_and_floor, GaussianParams, Mollifier, RadialProfile};
use radflow::solver::{init_state, run, RadialState, RunPlan};
use radflow::{CoefficientModel, RegularizationParams, StepControl};

/// `ρ₀ = 0.5 + 0.4e^{−4(r−1)²}`, `m₀ = 0.1ρ₀re^{−r²}`.
pub fn reference_profile() -> RadialProfile {
    RadialProfile::gaussian(GaussianParams {
        base: 0.5,
        amp: 0.4,
        k: 4.0,
        center: 1.0,
        mom_amp: 0.1,
        mom_k: 1.0,
    })
}

/// Level `j` of the default schedule for `N = 2`, `α = 1/2`.
pub fn level_params(j: i32) -> RegularizationParams {
    let eps = 0.1 * 0.25f64.powi(j);
    RegularizationParams::new(2, 0.5, eps, eps.powf(-0.25), 0.05 * 0.5f64.powi(j), false).unwrap()
}

pub fn reference_state(params: &RegularizationParams, k: usize) -> RadialState {
    let data = truncate_and_floor(&reference_profile(), params).unwrap();
    let grid = sample_on_grid(&data, &Mollifier::new(params.delta()), 2, k).unwrap();
    init_state(&grid, params).unwrap()
}

/// Runs the Saint-Venant reference data and returns every accepted state.
pub fn run_every_step(params: &RegularizationParams, k: usize, t_end: f64) -> Vec<RadialState> {
    let plan = RunPlan {
        t_end,
        observer_dt: 0.0,
        every_step: false,
        diagnostics: DiagnosticsConfig::default(),
    };
    let mut states = Vec::new();
    let mut keep = |s: &RadialState, _: &DiagnosticsRecord| states.push(s.clone());
    run(
        reference_state(params, k),
        &CoefficientModel::saint_venant(),
        params,
        &StepControl::default(),
        &plan,
        &mut [&mut keep],
    )
    .unwrap();
    states
}
