//! Weak-form residuals of zero-extended numerical solutions against radial
//! test functions.
//!
//! A run is a sequence of snapshots. Between snapshots every time integrand is
//! linear in `t`; inside a snapshot `ρ` is constant per cell, `u` is linear
//! between nodes, and both vanish outside `[r_0, r_K]`. Space integrals use
//! Gauss-Legendre on every cell, split where the test support ends.
//!
//! For piecewise-constant `ρ` the terms `2h'(ρ)√ρ ∂√ρ = ∂h(ρ)` of the
//! integrated-by-parts diffusion brackets are measures sitting on cell
//! interfaces; they are evaluated as jumps of `h` (resp. `g`).

mod test_function;

use serde::Serialize;

use crate::coefficients::{CoefficientModel, RegularizationParams, Regularized};
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::solver::RadialState;

pub use test_function::{RadialJet, RadialShape, TemporalShape, TestFunction};

/// Numerical solution extended by zero outside the annulus.
#[derive(Debug, Clone)]
pub struct ExtendedSolution {
    snapshots: Vec<RadialState>,
    coverage: f64,
}

impl ExtendedSolution {
    /// Snapshots must be nonempty, share one grid size, and have increasing times.
    pub fn new(snapshots: Vec<RadialState>) -> Result<Self> {
        let first = snapshots
            .first()
            .ok_or_else(|| Error::Domain("no snapshots".into()))?;
        let (n, k) = (first.n_dim, first.cells());
        for w in snapshots.windows(2) {
            if !(w[1].time > w[0].time) {
                return Err(Error::Domain(format!(
                    "snapshot times not increasing: {} then {}",
                    w[0].time, w[1].time
                )));
            }
        }
        if snapshots.iter().any(|s| s.n_dim != n || s.cells() != k) {
            return Err(Error::Domain("snapshots disagree on N or K".into()));
        }
        Ok(Self {
            snapshots,
            coverage: f64::INFINITY,
        })
    }

    /// Limits trusted evaluation to `r ≤ n`, as for snapshots stored only on a ball.
    pub fn with_coverage(mut self, n: f64) -> Self {
        self.coverage = n;
        self
    }

    pub fn coverage(&self) -> f64 {
        self.coverage
    }

    pub fn snapshots(&self) -> &[RadialState] {
        &self.snapshots
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time).collect()
    }

    pub fn n_dim(&self) -> usize {
        self.snapshots[0].n_dim
    }

    fn locate(s: &RadialState, r: f64) -> Option<usize> {
        let k = s.cells();
        if !(r >= s.node_r[0] && r <= s.node_r[k]) {
            return None;
        }
        let i = s.node_r.partition_point(|x| *x <= r);
        Some(i.saturating_sub(1).min(k - 1))
    }

    /// `ρ` of snapshot `k` at `r`; exactly `0` off the annulus.
    pub fn rho(&self, k: usize, r: f64) -> f64 {
        let s = &self.snapshots[k];
        Self::locate(s, r).map_or(0.0, |i| s.cell_rho[i])
    }

    /// `u` of snapshot `k` at `r`; exactly `0` off the annulus.
    pub fn u(&self, k: usize, r: f64) -> f64 {
        let s = &self.snapshots[k];
        Self::locate(s, r).map_or(0.0, |i| {
            let (r0, r1) = (s.node_r[i], s.node_r[i + 1]);
            let w = (r - r0) / (r1 - r0);
            (1.0 - w) * s.node_u[i] + w * s.node_u[i + 1]
        })
    }

    pub fn momentum(&self, k: usize, r: f64) -> f64 {
        self.rho(k, r) * self.u(k, r)
    }

    fn check_support(&self, phi: &TestFunction) -> Result<()> {
        phi.radial.validate()?;
        let (_, hi) = phi.radial.support();
        if hi > self.coverage {
            return Err(Error::SupportUncovered(format!(
                "test support uncovered: `{}` reaches r = {hi} but snapshots cover r <= {}",
                phi.id, self.coverage
            )));
        }
        Ok(())
    }

    fn check_window(&self, t1: f64, t2: f64) -> Result<()> {
        let t0 = self.snapshots[0].time;
        let tn = self.snapshots[self.snapshots.len() - 1].time;
        if !(t1 >= t0 && t2 <= tn && t1 < t2) {
            return Err(Error::Domain(format!(
                "window [{t1}, {t2}] not inside the stored interval [{t0}, {tn}]"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualOptions {
    /// Gauss-Legendre points per cell piece.
    pub gl_points: usize,
}

impl Default for ResidualOptions {
    fn default() -> Self {
        Self { gl_points: 4 }
    }
}

/// Everything a cell-piece integrand may need at one quadrature point.
struct Point {
    cell: usize,
    r: f64,
    u: f64,
    u_r: f64,
    jet: RadialJet,
}

/// `∫ f · r^{N−1} dr` over the part of the annulus where `ψ` lives.
fn integrate(s: &RadialState, shape: &RadialShape, gl: &GaussLegendre, mut f: impl FnMut(&Point) -> f64) -> f64 {
    let (lo, hi) = shape.support();
    let nm1 = s.n_dim as i32 - 1;
    let k = s.cells();
    let first = s.node_r.partition_point(|x| *x <= lo).saturating_sub(1);
    let mut total = 0.0;
    for i in first..k {
        let (r0, r1) = (s.node_r[i], s.node_r[i + 1]);
        if r0 >= hi {
            break;
        }
        let (a, b) = (r0.max(lo), r1.min(hi));
        if b <= a {
            continue;
        }
        let (u0, u1) = (s.node_u[i], s.node_u[i + 1]);
        let u_r = (u1 - u0) / (r1 - r0);
        total += gl.integrate(a, b, |r| {
            let p = Point {
                cell: i,
                r,
                u: u0 + u_r * (r - r0),
                u_r,
                jet: shape.jet(r),
            };
            f(&p) * r.powi(nm1)
        });
    }
    total
}

/// Time-linear interpolation of sampled values.
fn value_at(times: &[f64], values: &[f64], t: f64) -> f64 {
    let j = times.partition_point(|x| *x < t);
    if j == 0 {
        return values[0];
    }
    if j == times.len() {
        return values[j - 1];
    }
    let (ta, tb) = (times[j - 1], times[j]);
    let w = (t - ta) / (tb - ta);
    (1.0 - w) * values[j - 1] + w * values[j]
}

/// Trapezoid rule over `[t1, t2]` for a piecewise-linear sample.
fn time_integral(times: &[f64], values: &[f64], t1: f64, t2: f64) -> f64 {
    let mut pts = vec![(t1, value_at(times, values, t1))];
    pts.extend(
        times
            .iter()
            .zip(values)
            .filter(|(t, _)| **t > t1 && **t < t2)
            .map(|(t, v)| (*t, *v)),
    );
    pts.push((t2, value_at(times, values, t2)));
    pts.windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum()
}

/// Mass-equation residual
/// `[∫ρφ r^{N−1}]_{t1}^{t2} − ∫∫(ρφ_t + ρuφ_r) r^{N−1} dr dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassResidual {
    pub residual: f64,
    /// Sum of the magnitudes of the individual terms.
    pub scale: f64,
}

impl MassResidual {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.residual / self.scale
        } else {
            0.0
        }
    }
}

pub fn mass_weak_residual(
    sol: &ExtendedSolution,
    phi: &TestFunction,
    t1: f64,
    t2: f64,
    opts: &ResidualOptions,
) -> Result<MassResidual> {
    sol.check_support(phi)?;
    sol.check_window(t1, t2)?;
    let gl = GaussLegendre::new(opts.gl_points);
    let times = sol.times();
    let mut content = Vec::with_capacity(times.len());
    let mut rate = Vec::with_capacity(times.len());
    for s in &sol.snapshots {
        let (tau, tau_t) = phi.temporal.eval(s.time);
        let mass = integrate(s, &phi.radial, &gl, |p| s.cell_rho[p.cell] * p.jet.value);
        let flux = integrate(s, &phi.radial, &gl, |p| s.cell_rho[p.cell] * p.u * p.jet.d1);
        content.push(mass * tau);
        rate.push(mass * tau_t + flux * tau);
    }
    let end = value_at(&times, &content, t2) - value_at(&times, &content, t1);
    let bulk = time_integral(&times, &rate, t1, t2);
    let bulk_abs = time_integral(&times, &rate.iter().map(|v| v.abs()).collect::<Vec<_>>(), t1, t2);
    Ok(MassResidual {
        residual: end - bulk,
        scale: value_at(&times, &content, t2).abs() + value_at(&times, &content, t1).abs() + bulk_abs,
    })
}

/// Per-snapshot spatial integrals of the momentum identity, without `τ`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct MomentumTerms {
    /// `∫ρuψ`
    pub momentum: f64,
    /// `∫ρu²ψ'`
    pub convection: f64,
    /// `∫ρ^γ(ψ' + (N−1)ψ/r)`, exact per cell.
    pub pressure: f64,
    /// `<2hD(U), ∇φ₂> + <g div U, div φ₂>` in the integrated-by-parts form.
    pub viscous: f64,
    /// The same brackets in the direct form on the annulus.
    pub viscous_direct: f64,
    /// `ε∫ρ^θ[D(U):∇φ₂ + (θ−1) div U div φ₂]`
    pub epsilon_terms: f64,
    /// `[(2h + g + θερ^θ)u_r − ρ^γ] r^{N−1} ψ` at the inner wall.
    pub inner_trace: f64,
    /// The same combination at the outer wall.
    pub outer_trace: f64,
}

/// Evaluates [`MomentumTerms`] on one snapshot.
pub fn momentum_terms(
    s: &RadialState,
    shape: &RadialShape,
    model: &CoefficientModel,
    params: &RegularizationParams,
    gl: &GaussLegendre,
) -> MomentumTerms {
    let k = s.cells();
    let n = s.n_dim;
    let nm1 = n as f64 - 1.0;
    let visc = Regularized::new(model, params);
    let (eps, theta) = (params.epsilon(), params.theta());
    let div = |j: &RadialJet, r: f64| j.d1 + nm1 * j.value / r;
    let ddiv = |j: &RadialJet, r: f64| j.d2 + nm1 * j.d1 / r - nm1 * j.value / (r * r);
    let h: Vec<f64> = s.cell_rho.iter().map(|r| model.h(*r)).collect();
    let g: Vec<f64> = s.cell_rho.iter().map(|r| model.g(*r)).collect();

    let momentum = integrate(s, shape, gl, |p| s.cell_rho[p.cell] * p.u * p.jet.value);
    let convection = integrate(s, shape, gl, |p| s.cell_rho[p.cell] * p.u * p.u * p.jet.d1);
    let pressure: f64 = (0..k)
        .map(|i| {
            let (r0, r1) = (s.node_r[i], s.node_r[i + 1]);
            let w = |r: f64| r.powi(n as i32 - 1) * shape.jet(r).value;
            model.pressure(s.cell_rho[i]) * (w(r1) - w(r0))
        })
        .sum();
    let bulk = integrate(s, shape, gl, |p| {
        let d = ddiv(&p.jet, p.r);
        -p.u * (h[p.cell] * 2.0 * d + g[p.cell] * d)
    });
    let jumps: f64 = (0..=k)
        .map(|j| {
            let r = s.node_r[j];
            let (hl, gl_) = if j == 0 { (0.0, 0.0) } else { (h[j - 1], g[j - 1]) };
            let (hr, gr) = if j == k { (0.0, 0.0) } else { (h[j], g[j]) };
            let jet = shape.jet(r);
            -s.node_u[j] * r.powi(n as i32 - 1) * (2.0 * (hr - hl) * jet.d1 + (gr - gl_) * div(&jet, r))
        })
        .sum();
    let viscous_direct = integrate(s, shape, gl, |p| {
        let dd = p.u_r * p.jet.d1 + nm1 * p.u * p.jet.value / (p.r * p.r);
        let dv = (p.u_r + nm1 * p.u / p.r) * div(&p.jet, p.r);
        2.0 * h[p.cell] * dd + g[p.cell] * dv
    });
    let epsilon_terms = if eps > 0.0 {
        integrate(s, shape, gl, |p| {
            let dd = p.u_r * p.jet.d1 + nm1 * p.u * p.jet.value / (p.r * p.r);
            let dv = (p.u_r + nm1 * p.u / p.r) * div(&p.jet, p.r);
            eps * s.cell_rho[p.cell].powf(theta) * (dd + (theta - 1.0) * dv)
        })
    } else {
        0.0
    };
    let trace = |cell: usize, node: usize| {
        let rho = s.cell_rho[cell];
        let slope = (s.node_u[cell + 1] - s.node_u[cell]) / s.cell_width(cell);
        let r = s.node_r[node];
        let stress = (visc.two_mu(rho) + visc.lambda(rho)) * slope - model.pressure(rho);
        stress * r.powi(n as i32 - 1) * shape.jet(r).value
    };
    MomentumTerms {
        momentum,
        convection,
        pressure,
        viscous: bulk + jumps,
        viscous_direct,
        epsilon_terms,
        inner_trace: trace(0, 0),
        outer_trace: trace(k - 1, k),
    }
}

/// Momentum residual of the regularized problem on the annulus, as the
/// defect of
/// `∫ρuφ|_{t1} − ∫ρuφ|_{t2} + ∫∫(ρuφ_t + ρu²φ_r + ρ^γ div φ₂)
///  − <2hD(U),∇φ₂> − <g div U, div φ₂> = E_ε + ε_b − (outer trace)`,
/// with every group reported separately.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentumResidual {
    pub residual: f64,
    pub scale: f64,
    pub initial: f64,
    pub terminal: f64,
    pub time_derivative: f64,
    pub convection: f64,
    pub pressure: f64,
    pub viscous: f64,
    pub epsilon_terms: f64,
    pub boundary_term: f64,
    pub outer_boundary: f64,
}

impl MomentumResidual {
    /// The left-hand side built from the unregularized groups only.
    pub fn base_form(&self) -> f64 {
        self.initial - self.terminal + self.time_derivative + self.convection + self.pressure - self.viscous
    }

    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.residual / self.scale
        } else {
            0.0
        }
    }
}

fn abs_all(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x.abs()).collect()
}

pub fn momentum_weak_residual(
    sol: &ExtendedSolution,
    phi: &TestFunction,
    model: &CoefficientModel,
    params: &RegularizationParams,
    t1: f64,
    t2: f64,
    opts: &ResidualOptions,
) -> Result<MomentumResidual> {
    sol.check_support(phi)?;
    sol.check_window(t1, t2)?;
    let gl = GaussLegendre::new(opts.gl_points);
    let times = sol.times();
    let m = sol.snapshots.len();
    let mut content = Vec::with_capacity(m);
    let mut series: [Vec<f64>; 7] = Default::default();
    for s in &sol.snapshots {
        let (tau, tau_t) = phi.temporal.eval(s.time);
        let t = momentum_terms(s, &phi.radial, model, params, &gl);
        content.push(t.momentum * tau);
        for (v, x) in series.iter_mut().zip([
            t.momentum * tau_t,
            t.convection * tau,
            t.pressure * tau,
            t.viscous * tau,
            t.epsilon_terms * tau,
            t.inner_trace * tau,
            t.outer_trace * tau,
        ]) {
            v.push(x);
        }
    }
    let int = |v: &[f64]| time_integral(&times, v, t1, t2);
    let initial = value_at(&times, &content, t1);
    let terminal = value_at(&times, &content, t2);
    let [dt_s, conv_s, pres_s, visc_s, eps_s, inner_s, outer_s] = &series;
    let out = MomentumResidual {
        residual: 0.0,
        scale: initial.abs()
            + terminal.abs()
            + series.iter().map(|v| time_integral(&times, &abs_all(v), t1, t2)).sum::<f64>(),
        initial,
        terminal,
        time_derivative: int(dt_s),
        convection: int(conv_s),
        pressure: int(pres_s),
        viscous: int(visc_s),
        epsilon_terms: int(eps_s),
        boundary_term: int(inner_s),
        outer_boundary: int(outer_s),
    };
    Ok(MomentumResidual {
        residual: out.base_form() - out.epsilon_terms - out.boundary_term + out.outer_boundary,
        ..out
    })
}

/// The inner-wall term
/// `ε_b = ∫[(2h + g + θερ^θ)u_r − ρ^γ](ε, t) ε^{N−1} φ(ε, t) dt` over `[t1, t2]`.
/// Only meaningful when the inner wall shrinks to the origin.
pub fn boundary_term(
    sol: &ExtendedSolution,
    phi: &TestFunction,
    model: &CoefficientModel,
    params: &RegularizationParams,
    t1: f64,
    t2: f64,
) -> Result<f64> {
    if params.exterior() {
        return Err(Error::Config(
            "the inner boundary term is defined for the whole-space family only".into(),
        ));
    }
    sol.check_support(phi)?;
    sol.check_window(t1, t2)?;
    let visc = Regularized::new(model, params);
    let times = sol.times();
    let vals: Vec<f64> = sol
        .snapshots
        .iter()
        .map(|s| {
            let rho = s.cell_rho[0];
            let slope = (s.node_u[1] - s.node_u[0]) / s.cell_width(0);
            let r = s.node_r[0];
            let stress = (visc.two_mu(rho) + visc.lambda(rho)) * slope - model.pressure(rho);
            stress * r.powi(s.n_dim as i32 - 1) * phi.radial.jet(r).value * phi.temporal.eval(s.time).0
        })
        .collect();
    // + 0.0 turns a signed zero into +0
    Ok(time_integral(&times, &vals, t1, t2) + 0.0)
}

/// `C` such that the level-0 ε-terms sit exactly on `C√ε·n^{N(1−θ)/2}`.
pub fn fit_envelope_constant(measured: f64, epsilon: f64, n: f64, n_dim: usize, theta: f64) -> f64 {
    measured.abs() / epsilon_envelope(1.0, epsilon, n, n_dim, theta)
}

/// `C√ε·n^{N(1−θ)/2}`
pub fn epsilon_envelope(c: f64, epsilon: f64, n: f64, n_dim: usize, theta: f64) -> f64 {
    c * epsilon.sqrt() * n.powf(n_dim as f64 * (1.0 - theta) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_window_interpolates_ends() {
        let t = [0.0, 1.0, 2.0];
        let v = [0.0, 1.0, 2.0];
        assert!((time_integral(&t, &v, 0.5, 1.5) - 1.0).abs() < 1e-15);
        assert!((time_integral(&t, &v, 0.0, 2.0) - 2.0).abs() < 1e-15);
        assert_eq!(value_at(&t, &v, 1.25), 1.25);
    }
}
