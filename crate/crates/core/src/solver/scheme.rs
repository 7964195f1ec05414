use serde::{Deserialize, Serialize};

use super::state::{shell_volume, RadialState};
use super::tridiag;
use crate::coefficients::Regularized;

/// Time discretization of the Lagrangian system.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Implicit midpoint-type update whose pressure is the divided difference
    /// of the internal energy; the discrete energy decreases by exactly the
    /// viscous work plus a nonnegative numerical term.
    #[default]
    DiscreteGradient,
    /// Explicit pressure, viscous operator implicit or explicit per
    /// `StepControl::visc_theta_implicit`.
    SemiImplicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    pub cfl: f64,
    pub dt_max: f64,
    pub visc_theta_implicit: bool,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub scheme: Scheme,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            cfl: 0.5,
            dt_max: 1e-2,
            visc_theta_implicit: true,
            newton_tol: 1e-13,
            newton_max_iter: 30,
            scheme: Scheme::DiscreteGradient,
        }
    }
}

impl StepControl {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(crate::Error::Config(format!("cfl must lie in (0,1], got {}", self.cfl)));
        }
        if !(self.dt_max > 0.0) || !(self.newton_tol > 0.0) || self.newton_max_iter == 0 {
            return Err(crate::Error::Config("step tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Symmetric tridiagonal matrix of the discrete viscous work
/// `D(u) = Σ V_i [2μ_i (a_i² + (N−1)b_i²) + λ_i d_i²] = uᵀAu`, with
/// `a_i` the cell slope of `u`, `d_i` the exact cell divergence
/// `(r^{N−1}u)|/V_i`, and `b_i = (d_i − a_i)/(N−1)` standing for `u/r`.
#[derive(Debug, Clone)]
pub struct ViscousOperator {
    pub diag: Vec<f64>,
    /// `off[i]` couples nodes `i` and `i+1`.
    pub off: Vec<f64>,
}

/// Per-cell rate coefficients: `a = aL·u_i + aR·u_{i+1}`, same for `b`, `d`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CellRates {
    pub a: (f64, f64),
    pub b: (f64, f64),
    pub d: (f64, f64),
    pub volume: f64,
}

pub(crate) fn cell_rates(r0: f64, r1: f64, n_dim: usize) -> CellRates {
    let nm1 = n_dim as f64 - 1.0;
    let v = shell_volume(r0, r1, n_dim);
    let dr = r1 - r0;
    let p0 = r0.powi(n_dim as i32 - 1);
    let p1 = r1.powi(n_dim as i32 - 1);
    let a = (-1.0 / dr, 1.0 / dr);
    let d = (-p0 / v, p1 / v);
    let b = ((d.0 - a.0) / nm1, (d.1 - a.1) / nm1);
    CellRates { a, b, d, volume: v }
}

impl ViscousOperator {
    pub fn assemble(state: &RadialState, visc: &Regularized) -> Self {
        let k = state.cells();
        let nm1 = state.n_dim as f64 - 1.0;
        let mut diag = vec![0.0; k + 1];
        let mut off = vec![0.0; k];
        for i in 0..k {
            let c = cell_rates(state.node_r[i], state.node_r[i + 1], state.n_dim);
            let rho = state.cell_rho[i];
            let two_mu = visc.two_mu(rho);
            let lambda = visc.lambda(rho);
            let q = |x: usize, y: usize| {
                let pick = |p: (f64, f64), s: usize| if s == 0 { p.0 } else { p.1 };
                c.volume
                    * (two_mu * (pick(c.a, x) * pick(c.a, y) + nm1 * pick(c.b, x) * pick(c.b, y))
                        + lambda * pick(c.d, x) * pick(c.d, y))
            };
            diag[i] += q(0, 0);
            diag[i + 1] += q(1, 1);
            off[i] += q(0, 1);
        }
        Self { diag, off }
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        (0..n)
            .map(|j| {
                let mut v = self.diag[j] * u[j];
                if j > 0 {
                    v += self.off[j - 1] * u[j - 1];
                }
                if j + 1 < n {
                    v += self.off[j] * u[j + 1];
                }
                v
            })
            .collect()
    }

    pub fn quadratic(&self, u: &[f64]) -> f64 {
        let au = self.apply(u);
        au.iter().zip(u).map(|(a, b)| a * b).sum()
    }
}

/// Why a trial step was rejected.
#[derive(Debug, Clone)]
pub(crate) enum Rejection {
    Positivity(String),
    Newton(String),
}

impl Rejection {
    pub fn describe(&self) -> String {
        match self {
            Rejection::Positivity(s) => format!("density would become nonpositive: {s}"),
            Rejection::Newton(s) => format!("nonlinear solve failed: {s}"),
        }
    }
}

pub(crate) struct TrialStep {
    pub state: RadialState,
    /// `dt·uᵀA u` with the operator frozen at the start of the step.
    pub work: f64,
}

/// Pressure `p(τ) = τ^{−γ}` as a function of specific volume.
fn pressure_tau(tau: f64, gamma: f64) -> f64 {
    tau.powf(-gamma)
}

/// Divided difference `−(e(τ₀+Δ) − e(τ₀))/Δ` of the internal energy per unit
/// mass, written with `ln1p/expm1` so it stays accurate for tiny `Δ`, and its
/// derivative with respect to `Δ`.
fn averaged_pressure(tau0: f64, delta: f64, gamma: f64) -> (f64, f64) {
    let x = delta / tau0;
    let p0 = pressure_tau(tau0, gamma);
    if x.abs() < 1e-12 {
        let dp = -gamma * p0 / tau0;
        let d2p = gamma * (gamma + 1.0) * p0 / (tau0 * tau0);
        return (p0 + 0.5 * dp * delta, 0.5 * dp + d2p * delta / 3.0);
    }
    let l = x.ln_1p();
    let phat = if gamma == 1.0 {
        p0 * l / x
    } else {
        -p0 * ((1.0 - gamma) * l).exp_m1() / ((gamma - 1.0) * x)
    };
    let deriv = if x.abs() > 1e-4 {
        (pressure_tau(tau0 + delta, gamma) - phat) / delta
    } else {
        let dp = -gamma * p0 / tau0;
        let d2p = gamma * (gamma + 1.0) * p0 / (tau0 * tau0);
        let d3p = -gamma * (gamma + 1.0) * (gamma + 2.0) * p0 / (tau0 * tau0 * tau0);
        0.5 * dp + d2p * delta / 3.0 + d3p * delta * delta / 8.0
    };
    (phat, deriv)
}

/// `(r'^N − r^N)/(N(r' − r))` and its derivative in `r'`.
fn mean_power(r_new: f64, r_old: f64, n_dim: usize) -> (f64, f64) {
    let n = n_dim as f64;
    let mut value = 0.0;
    let mut deriv = 0.0;
    for k in 0..n_dim {
        let old_pow = r_old.powi((n_dim - 1 - k) as i32);
        value += r_new.powi(k as i32) * old_pow;
        if k > 0 {
            deriv += k as f64 * r_new.powi(k as i32 - 1) * old_pow;
        }
    }
    (value / n, deriv / n)
}

pub(crate) fn discrete_gradient_step(
    state: &RadialState,
    visc: &Regularized,
    gamma: f64,
    dt: f64,
    ctl: &StepControl,
) -> Result<TrialStep, Rejection> {
    let k = state.cells();
    let n_dim = state.n_dim;
    let op = ViscousOperator::assemble(state, visc);
    let mass: Vec<f64> = (0..=k).map(|j| state.node_mass(j)).collect();
    let tau0: Vec<f64> = state.cell_rho.iter().map(|r| 1.0 / r).collect();
    let u_old = &state.node_u;
    let mut u = u_old.clone();
    let scale = 1.0 + u_old.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut rbar = vec![0.0; k + 1];
    let mut rbar_d = vec![0.0; k + 1];
    let mut rpow = vec![0.0; k + 1];
    let mut phat = vec![0.0; k];
    let mut phat_d = vec![0.0; k];

    let mut converged = false;
    for _ in 0..ctl.newton_max_iter {
        for j in 0..=k {
            let r_new = state.node_r[j] + dt * u[j];
            let (v, d) = mean_power(r_new, state.node_r[j], n_dim);
            rbar[j] = v;
            rbar_d[j] = d;
            rpow[j] = r_new.powi(n_dim as i32 - 1);
        }
        for i in 0..k {
            let dtau = dt * (rbar[i + 1] * u[i + 1] - rbar[i] * u[i]) / state.cell_mass[i];
            if !(tau0[i] + dtau > 0.0) || !dtau.is_finite() {
                return Err(Rejection::Positivity(format!("cell {i}")));
            }
            let (p, dp) = averaged_pressure(tau0[i], dtau, gamma);
            phat[i] = p;
            phat_d[i] = dp;
        }
        let au = op.apply(&u);
        let m = k - 1;
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        let mut rhs = vec![0.0; m];
        for row in 0..m {
            let j = row + 1;
            let dm_l = state.cell_mass[j - 1];
            let dm_r = state.cell_mass[j];
            let jump = phat[j - 1] - phat[j];
            let f = mass[j] * (u[j] - u_old[j]) - dt * rbar[j] * jump + dt * au[j];
            rhs[row] = -f;
            let dt2 = dt * dt;
            diag[row] = mass[j] - dt2 * rbar_d[j] * jump
                - dt2 * rbar[j] * rpow[j] * (phat_d[j - 1] / dm_l + phat_d[j] / dm_r)
                + dt * op.diag[j];
            lower[row] = dt2 * rbar[j] * rpow[j - 1] * phat_d[j - 1] / dm_l + dt * op.off[j - 1];
            upper[row] = dt2 * rbar[j] * rpow[j + 1] * phat_d[j] / dm_r + dt * op.off[j];
        }
        let delta = tridiag::solve(&lower, &diag, &upper, &rhs)
            .ok_or_else(|| Rejection::Newton("singular Jacobian".into()))?;
        let mut change = 0.0f64;
        for (row, d) in delta.iter().enumerate() {
            if !d.is_finite() {
                return Err(Rejection::Newton("non-finite update".into()));
            }
            u[row + 1] += d;
            change = change.max(d.abs());
        }
        if change <= ctl.newton_tol * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Rejection::Newton(format!(
            "no convergence in {} iterations",
            ctl.newton_max_iter
        )));
    }
    let work = dt * op.quadratic(&u);
    finish(state, u, dt, work)
}

pub(crate) fn semi_implicit_step(
    state: &RadialState,
    visc: &Regularized,
    gamma: f64,
    dt: f64,
    ctl: &StepControl,
) -> Result<TrialStep, Rejection> {
    let k = state.cells();
    let op = ViscousOperator::assemble(state, visc);
    let p: Vec<f64> = state.cell_rho.iter().map(|r| r.powf(gamma)).collect();
    let mut u = state.node_u.clone();
    let force = |j: usize| state.node_r[j].powi(state.n_dim as i32 - 1) * (p[j - 1] - p[j]);
    if ctl.visc_theta_implicit {
        let m = k - 1;
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        let mut rhs = vec![0.0; m];
        for row in 0..m {
            let j = row + 1;
            let mj = state.node_mass(j);
            diag[row] = mj + dt * op.diag[j];
            lower[row] = dt * op.off[j - 1];
            upper[row] = dt * op.off[j];
            rhs[row] = mj * state.node_u[j] + dt * force(j);
        }
        let sol = tridiag::solve(&lower, &diag, &upper, &rhs)
            .ok_or_else(|| Rejection::Newton("singular viscous system".into()))?;
        u[1..k].copy_from_slice(&sol);
    } else {
        let au = op.apply(&state.node_u);
        for j in 1..k {
            u[j] = state.node_u[j] + dt * (force(j) - au[j]) / state.node_mass(j);
        }
    }
    let work = dt * op.quadratic(&u);
    finish(state, u, dt, work)
}

fn finish(state: &RadialState, u: Vec<f64>, dt: f64, work: f64) -> Result<TrialStep, Rejection> {
    let k = state.cells();
    let mut node_r: Vec<f64> = state
        .node_r
        .iter()
        .zip(&u)
        .map(|(r, v)| r + dt * v)
        .collect();
    node_r[0] = state.node_r[0];
    node_r[k] = state.node_r[k];
    let mut next = RadialState {
        time: state.time + dt,
        n_dim: state.n_dim,
        node_r,
        node_u: u,
        cell_mass: state.cell_mass.clone(),
        cell_rho: Vec::new(),
    };
    next.node_u[0] = 0.0;
    next.node_u[k] = 0.0;
    next.cell_rho = next
        .densities_from_geometry()
        .map_err(|e| Rejection::Positivity(e.to_string()))?;
    Ok(TrialStep { state: next, work })
}
