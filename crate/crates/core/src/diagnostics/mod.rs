//! Monitored functionals of a state: mass, energy (or relative entropy when
//! `γ = 1`), viscous dissipation, the BD entropy and its pressure cross term,
//! `‖√ρ‖_{H¹}`, the `h̄` gradient, the logarithmic velocity moment, `‖u‖_{L^m}`
//! and the space-time pressure norm.
//!
//! Cell quantities are piecewise constant; nodal quantities are lumped onto
//! node masses. Gradients of cell fields live at nodes and are integrated over
//! dual cells `[r_c(j−1), r_c(j)]`, with the two end half-cells taking the
//! nearest interior gradient.

mod record;

use serde::{Deserialize, Serialize};

use crate::coefficients::{CoefficientModel, RegularizationParams, Regularized};
use crate::quadrature::adaptive;
use crate::solver::scheme::cell_rates;
use crate::solver::state::shell_volume;
use crate::solver::RadialState;

pub use record::{write_csv, write_integrals_csv, DiagnosticsRecord, RunTotals, CSV_HEADER, INTEGRALS_HEADER};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsConfig {
    /// Pressure-norm exponent used when `N = 2`, in `[1, 2)`.
    pub beta: f64,
    /// Exponent slack of the extra velocity moment `∫ρ|u|^{2+η}`.
    pub eta: f64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self { beta: 1.5, eta: 0.2 }
    }
}

impl DiagnosticsConfig {
    /// `(N+2)/N` for `N ≥ 3`, `β` for `N = 2`.
    pub fn pressure_exponent(&self, n_dim: usize) -> f64 {
        if n_dim >= 3 {
            (n_dim as f64 + 2.0) / n_dim as f64
        } else {
            self.beta
        }
    }
}

/// Gradient of a cell field at one node, with its node value and dual-cell weight.
#[derive(Debug, Clone, Copy)]
pub(crate) struct NodeGradient {
    pub weight: f64,
    pub value: f64,
    pub grad: f64,
}

pub(crate) fn node_gradients(state: &RadialState, cell_values: &[f64]) -> Vec<NodeGradient> {
    let k = state.cells();
    let n = state.n_dim;
    let centers: Vec<f64> = (0..k).map(|i| state.cell_center(i)).collect();
    let interior = |j: usize| (cell_values[j] - cell_values[j - 1]) / (centers[j] - centers[j - 1]);
    let mut out = Vec::with_capacity(k + 1);
    out.push(NodeGradient {
        weight: shell_volume(state.node_r[0], centers[0], n),
        value: cell_values[0],
        grad: interior(1),
    });
    for j in 1..k {
        out.push(NodeGradient {
            weight: shell_volume(centers[j - 1], centers[j], n),
            value: 0.5 * (cell_values[j - 1] + cell_values[j]),
            grad: interior(j),
        });
    }
    out.push(NodeGradient {
        weight: shell_volume(centers[k - 1], state.node_r[k], n),
        value: cell_values[k - 1],
        grad: interior(k - 1),
    });
    out
}

/// `∫ρ̄ r^{N−1} dr` over the annulus for `ρ̄ = e^{−r}`.
fn reference_mass(a: f64, b: f64, n_dim: usize) -> f64 {
    adaptive(a, b, 1e-16, 1e-14, |r| (-r).exp() * r.powi(n_dim as i32 - 1)).unwrap_or(f64::NAN)
}

/// Total energy. For `γ > 1`: `Σ ½M_j u_j² + Σ Δm_i ρ_i^{γ−1}/(γ−1)`. For
/// `γ = 1` the relative entropy against `ρ̄ = e^{−r}`, which reduces to
/// `∫[½ρu² + ρ ln ρ + (r−1)ρ + ρ̄] r^{N−1} dr`.
pub fn energy(state: &RadialState, model: &CoefficientModel) -> f64 {
    let gamma = model.gamma;
    let kinetic: f64 = (0..=state.cells())
        .map(|j| 0.5 * state.node_mass(j) * state.node_u[j].powi(2))
        .sum();
    if gamma > 1.0 {
        let internal: f64 = state
            .cell_mass
            .iter()
            .zip(&state.cell_rho)
            .map(|(m, rho)| m * rho.powf(gamma - 1.0) / (gamma - 1.0))
            .sum();
        kinetic + internal
    } else {
        let k = state.cells();
        let internal: f64 = (0..k)
            .map(|i| state.cell_mass[i] * (state.cell_rho[i].ln() + state.cell_center(i) - 1.0))
            .sum();
        kinetic + internal + reference_mass(state.node_r[0], state.node_r[k], state.n_dim)
    }
}

/// `Σ V_i [(2h + ερ^θ)(a_i² + (N−1)b_i²) + (g + (θ−1)ερ^θ)(a_i + (N−1)b_i)²]`.
pub fn dissipation_exact(state: &RadialState, model: &CoefficientModel, params: &RegularizationParams) -> f64 {
    let visc = Regularized::new(model, params);
    let nm1 = state.n_dim as f64 - 1.0;
    cellwise_rates(state)
        .map(|(i, a, b, d, v)| {
            let rho = state.cell_rho[i];
            v * (visc.two_mu(rho) * (a * a + nm1 * b * b) + visc.lambda(rho) * d * d)
        })
        .sum()
}

/// `Σ V_i (ν₁h + αερ^θ)(a_i² + (N−1)b_i²)`.
pub fn dissipation_lower(state: &RadialState, model: &CoefficientModel, params: &RegularizationParams) -> f64 {
    let visc = Regularized::new(model, params);
    let nm1 = state.n_dim as f64 - 1.0;
    cellwise_rates(state)
        .map(|(i, a, b, _, v)| v * visc.lower_weight(state.cell_rho[i]) * (a * a + nm1 * b * b))
        .sum()
}

fn cellwise_rates(state: &RadialState) -> impl Iterator<Item = (usize, f64, f64, f64, f64)> + '_ {
    (0..state.cells()).map(move |i| {
        let c = cell_rates(state.node_r[i], state.node_r[i + 1], state.n_dim);
        let (ul, ur) = (state.node_u[i], state.node_u[i + 1]);
        let a = c.a.0 * ul + c.a.1 * ur;
        let b = c.b.0 * ul + c.b.1 * ur;
        let d = c.d.0 * ul + c.d.1 * ur;
        (i, a, b, d, c.volume)
    })
}

/// BD entropy `½∫ρ(u + ψρ_r/ρ)² r^{N−1} dr` and the cross rate
/// `∫(ψ/ρ) ρ_r ∂_r(ρ^γ) r^{N−1} dr`, with `ψ = 2h' + θερ^{θ−1}`.
/// The rate is a product of two same-signed node differences, so it is never negative.
pub fn bd_entropy(state: &RadialState, model: &CoefficientModel, params: &RegularizationParams) -> (f64, f64) {
    let visc = Regularized::new(model, params);
    let rho = node_gradients(state, &state.cell_rho);
    let p: Vec<f64> = state.cell_rho.iter().map(|r| model.pressure(*r)).collect();
    let pg = node_gradients(state, &p);
    let mut entropy = 0.0;
    let mut cross = 0.0;
    for (j, (g, q)) in rho.iter().zip(&pg).enumerate() {
        let psi = visc.psi(g.value);
        let v = state.node_u[j] + psi * g.grad / g.value;
        entropy += 0.5 * g.weight * g.value * v * v;
        cross += g.weight * (psi / g.value) * g.grad * q.grad;
    }
    (entropy, cross)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqrtRhoH1 {
    /// `∫ρ r^{N−1} dr`
    pub l2_sq: f64,
    /// `∫(∂_r√ρ)² r^{N−1} dr`
    pub grad_sq: f64,
    pub norm: f64,
}

pub fn sqrt_rho_h1(state: &RadialState) -> SqrtRhoH1 {
    let l2_sq = state.total_mass();
    let s: Vec<f64> = state.cell_rho.iter().map(|r| r.sqrt()).collect();
    let grad_sq: f64 = node_gradients(state, &s)
        .iter()
        .map(|g| g.weight * g.grad * g.grad)
        .sum();
    SqrtRhoH1 {
        l2_sq,
        grad_sq,
        norm: (l2_sq + grad_sq).sqrt(),
    }
}

/// `‖∂_r h̄(ρ)‖_{L²}` with `h̄' = h'/√s`, `h̄(0) = 0`.
pub fn hbar_grad_l2(state: &RadialState, model: &CoefficientModel) -> f64 {
    let hb: Vec<f64> = state.cell_rho.iter().map(|r| model.hbar(*r)).collect();
    node_gradients(state, &hb)
        .iter()
        .map(|g| g.weight * g.grad * g.grad)
        .sum::<f64>()
        .sqrt()
}

/// `Σ M_j (u_j²/2) ln(1 + u_j²)`
pub fn log_moment(state: &RadialState) -> f64 {
    (0..=state.cells())
        .map(|j| {
            let u2 = state.node_u[j].powi(2);
            state.node_mass(j) * 0.5 * u2 * u2.ln_1p()
        })
        .sum()
}

/// `(Σ M_j |u_j|^m)^{1/m}` with `m = N/(1−α)`, the norm in the mass coordinate.
pub fn u_lm_norm(state: &RadialState, alpha: f64) -> f64 {
    let m = state.n_dim as f64 / (1.0 - alpha);
    (0..=state.cells())
        .map(|j| state.node_mass(j) * state.node_u[j].abs().powf(m))
        .sum::<f64>()
        .powf(1.0 / m)
}

/// `Σ M_j |u_j|^{2+η}`
pub fn extra_moment(state: &RadialState, eta: f64) -> f64 {
    (0..=state.cells())
        .map(|j| state.node_mass(j) * state.node_u[j].abs().powf(2.0 + eta))
        .sum()
}

/// Instantaneous `∫(ρ^γ)^q r^{N−1} dr`.
pub fn pressure_power(state: &RadialState, gamma: f64, exponent: f64) -> f64 {
    (0..state.cells())
        .map(|i| state.cell_volume(i) * state.cell_rho[i].powf(gamma * exponent))
        .sum()
}

/// `‖ρ^γ‖_{L^q(space-time)}` from time samples by the trapezoid rule.
pub fn pressure_spacetime_norm(samples: &[(f64, &RadialState)], gamma: f64, exponent: f64) -> f64 {
    let vals: Vec<(f64, f64)> = samples
        .iter()
        .map(|(t, s)| (*t, pressure_power(s, gamma, exponent)))
        .collect();
    let integral: f64 = vals
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum();
    integral.powf(1.0 / exponent)
}

/// Evaluates every functional at once.
pub fn evaluate(
    state: &RadialState,
    model: &CoefficientModel,
    params: &RegularizationParams,
    cfg: &DiagnosticsConfig,
    totals: &RunTotals,
) -> DiagnosticsRecord {
    let (bd, cross) = bd_entropy(state, model, params);
    let exponent = cfg.pressure_exponent(state.n_dim);
    DiagnosticsRecord {
        t: state.time,
        mass: state.total_mass(),
        energy: energy(state, model),
        diss_exact: dissipation_exact(state, model, params),
        diss_lower: dissipation_lower(state, model, params),
        bd_entropy: bd,
        bd_cross_rate: cross,
        sqrt_rho_h1: sqrt_rho_h1(state).norm,
        log_moment: log_moment(state),
        u_lm: u_lm_norm(state, params.alpha()),
        hbar_grad_l2: hbar_grad_l2(state, model),
        extra_moment: extra_moment(state, cfg.eta),
        pressure_norm: totals.pressure_integral.max(0.0).powf(1.0 / exponent),
        work: totals.work,
        cross_integral: totals.cross_integral,
        drift_integral: totals.drift_integral,
    }
}
