//! Lagrangian staggered-grid solver for the regularized radial system on
//! `inner ≤ r ≤ R` with `u = 0` at both walls.

pub mod scheme;
pub mod snapshot;
pub mod state;
pub mod tridiag;

use crate::coefficients::{CoefficientModel, RegularizationParams, Regularized};
use crate::diagnostics::{self, DiagnosticsConfig, DiagnosticsRecord, RunTotals};
use crate::error::{Error, Result};

pub use scheme::{Scheme, StepControl, ViscousOperator};
pub use state::{init_state, shell_volume, RadialState};

/// Retries with a halved step before giving up.
pub const MAX_HALVINGS: usize = 20;

/// `min_i Δr_i / √(γ ρ_i^{γ−1})`.
pub fn acoustic_limit(state: &RadialState, model: &CoefficientModel) -> f64 {
    (0..state.cells())
        .map(|i| state.cell_width(i) / (model.gamma * state.cell_rho[i].powf(model.gamma - 1.0)).sqrt())
        .fold(f64::INFINITY, f64::min)
}

/// Result of one accepted step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: RadialState,
    pub dt: f64,
    /// `dt·uᵀAu` with the viscous operator frozen at the start of the step.
    pub work: f64,
    pub halvings: usize,
}

/// One step of size `min(cfl·acoustic_limit, dt_max, dt_cap)`, halved on
/// rejection. `model` is the base law; the `ε` terms come from `params`.
pub fn step(
    state: &RadialState,
    model: &CoefficientModel,
    params: &RegularizationParams,
    ctl: &StepControl,
    dt_cap: f64,
) -> Result<StepOutcome> {
    let visc = Regularized::new(model, params);
    let mut dt = (ctl.cfl * acoustic_limit(state, model)).min(ctl.dt_max).min(dt_cap);
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("step size {dt} is not positive")));
    }
    let mut last = String::new();
    for halvings in 0..=MAX_HALVINGS {
        let trial = match ctl.scheme {
            Scheme::DiscreteGradient => scheme::discrete_gradient_step(state, &visc, model.gamma, dt, ctl),
            Scheme::SemiImplicit => scheme::semi_implicit_step(state, &visc, model.gamma, dt, ctl),
        };
        match trial {
            Ok(t) => {
                return Ok(StepOutcome {
                    state: t.state,
                    dt,
                    work: t.work,
                    halvings,
                })
            }
            Err(rej) => {
                last = rej.describe();
                dt *= 0.5;
            }
        }
    }
    Err(Error::SolverAbort {
        time: state.time,
        halvings: MAX_HALVINGS,
        reason: last,
        dump: Some(snapshot::to_string(state, model, params)),
    })
}

/// Read-only callback at every observer tick.
pub trait Observer {
    fn observe(&mut self, state: &RadialState, record: &DiagnosticsRecord);
}

impl<F: FnMut(&RadialState, &DiagnosticsRecord)> Observer for F {
    fn observe(&mut self, state: &RadialState, record: &DiagnosticsRecord) {
        self(state, record)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunPlan {
    pub t_end: f64,
    /// Spacing of observer ticks; `0` observes after every step.
    pub observer_dt: f64,
    /// Also call observers after steps between ticks. Records are still
    /// kept only at ticks.
    pub every_step: bool,
    pub diagnostics: DiagnosticsConfig,
}

#[derive(Debug)]
pub struct RunOutput {
    pub state: RadialState,
    pub records: Vec<DiagnosticsRecord>,
    pub totals: RunTotals,
    /// Set when a step could not be completed; `state` is the last accepted one.
    pub abort: Option<Error>,
}

/// Advances to `plan.t_end`, calling observers at `t = 0`, at every tick
/// `t0 + k·observer_dt` (the step size is clipped to land on ticks) and at `t_end`.
pub fn run(
    state: RadialState,
    model: &CoefficientModel,
    params: &RegularizationParams,
    ctl: &StepControl,
    plan: &RunPlan,
    observers: &mut [&mut dyn Observer],
) -> Result<RunOutput> {
    let out = run_until_abort(state, model, params, ctl, plan, observers)?;
    match out.abort {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Like [`run`], but a solver abort is returned inside the output together
/// with everything recorded before it.
pub fn run_until_abort(
    mut state: RadialState,
    model: &CoefficientModel,
    params: &RegularizationParams,
    ctl: &StepControl,
    plan: &RunPlan,
    observers: &mut [&mut dyn Observer],
) -> Result<RunOutput> {
    ctl.validate()?;
    if !(plan.t_end >= state.time) {
        return Err(Error::Config(format!(
            "t_end {} precedes the state time {}",
            plan.t_end, state.time
        )));
    }
    if !(plan.observer_dt >= 0.0) {
        return Err(Error::Config("observer_dt must be nonnegative".into()));
    }
    let exponent = plan.diagnostics.pressure_exponent(state.n_dim);
    let mut totals = RunTotals::default();
    let mut records = Vec::new();

    let emit = |state: &RadialState, totals: &RunTotals, records: &mut Vec<DiagnosticsRecord>, observers: &mut [&mut dyn Observer]| {
        let rec = diagnostics::evaluate(state, model, params, &plan.diagnostics, totals);
        for o in observers.iter_mut() {
            o.observe(state, &rec);
        }
        records.push(rec);
    };
    emit(&state, &totals, &mut records, observers);

    let mut cross_prev = diagnostics::bd_entropy(&state, model, params).1;
    let mut pressure_prev = diagnostics::pressure_power(&state, model.gamma, exponent);
    let mut tick = 1u64;
    let start = state.time;
    while state.time < plan.t_end {
        let target = if plan.observer_dt > 0.0 {
            (start + plan.observer_dt * tick as f64).min(plan.t_end)
        } else {
            plan.t_end
        };
        let outcome = match step(&state, model, params, ctl, target - state.time) {
            Ok(o) => o,
            Err(e) => {
                return Ok(RunOutput {
                    state,
                    records,
                    totals,
                    abort: Some(e),
                })
            }
        };
        let dt = outcome.dt;
        let mut next = outcome.state;
        let reached = next.time >= target || (target - next.time) <= 1e-12 * target.abs().max(1.0);
        if reached {
            next.time = target;
        }
        let cross = diagnostics::bd_entropy(&next, model, params).1;
        let pressure = diagnostics::pressure_power(&next, model.gamma, exponent);
        let momentum: f64 = (0..=next.cells()).map(|j| next.node_mass(j) * next.node_u[j]).sum();
        totals.steps += 1;
        totals.work += outcome.work;
        totals.cross_integral += 0.5 * dt * (cross_prev + cross);
        totals.pressure_integral += 0.5 * dt * (pressure_prev + pressure);
        totals.drift_integral += dt * momentum;
        cross_prev = cross;
        pressure_prev = pressure;
        state = next;
        if reached && plan.observer_dt > 0.0 {
            tick += 1;
            emit(&state, &totals, &mut records, observers);
        } else if plan.observer_dt == 0.0 {
            emit(&state, &totals, &mut records, observers);
        } else if plan.every_step && !observers.is_empty() {
            let rec = diagnostics::evaluate(&state, model, params, &plan.diagnostics, &totals);
            for o in observers.iter_mut() {
                o.observe(&state, &rec);
            }
        }
    }
    Ok(RunOutput {
        state,
        records,
        totals,
        abort: None,
    })
}
