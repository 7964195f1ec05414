use serde::Serialize;

use super::RadialProfile;
use crate::coefficients::CoefficientModel;
use crate::quadrature::{adaptive_half_line, QuadratureFailure};

const TRUNCATION: f64 = 1e-14;
const MAX_RADIUS: f64 = 1e6;
const REL_TOL: f64 = 1e-10;
/// Radial samples for the pointwise sign and vacuum checks.
const POINT_SAMPLES: usize = 4096;
const POINT_SAMPLE_RADIUS: f64 = 50.0;

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    /// `∫ρ₀ r^{N−1} dr`
    pub mass: Option<f64>,
    /// `∫ρ₀^γ r^{N−1} dr`
    pub pressure: Option<f64>,
    /// `∫|∂_r h(ρ₀)|²/ρ₀ r^{N−1} dr`
    pub viscosity_gradient: Option<f64>,
    /// `∫(m₀²/ρ₀)(1 + ln(1 + m₀²/ρ₀²)) r^{N−1} dr`
    pub momentum: Option<f64>,
    pub failures: Vec<String>,
    pub passed: bool,
}

/// Five-point derivative of `f` at `r`. The step is halved until the stencil
/// stays where `inside` holds, so that vacuum edges of compactly supported
/// data are not differenced across.
fn derivative(f: impl Fn(f64) -> f64, inside: impl Fn(f64) -> bool, r: f64) -> f64 {
    let mut h = 1e-3 * (1.0 + r);
    for _ in 0..60 {
        if r > 2.0 * h && (-2..=2).all(|k| inside(r + k as f64 * h)) {
            return (-f(r + 2.0 * h) + 8.0 * f(r + h) - 8.0 * f(r - h) + f(r - 2.0 * h)) / (12.0 * h);
        }
        if r <= 2.0 * h && (0..=2).all(|k| inside(r + k as f64 * h)) {
            let h = h.min(0.25 * r.max(1e-8));
            return (-3.0 * f(r) + 4.0 * f(r + h) - f(r + 2.0 * h)) / (2.0 * h);
        }
        h *= 0.5;
    }
    0.0
}

fn momentum_density(rho: f64, m: f64) -> f64 {
    if m == 0.0 {
        return 0.0;
    }
    let q = m * m / rho;
    q * (1.0 + (1.0 + q / rho).ln())
}

/// Integrability of the untruncated data, plus the pointwise requirements
/// `ρ₀ ≥ 0` and `m₀ = 0` where `ρ₀ = 0`.
pub fn validate_hypotheses(profile: &RadialProfile, model: &CoefficientModel, n_dim: usize) -> HypothesisReport {
    let weight = |r: f64| r.powi(n_dim as i32 - 1);
    let mut failures = Vec::new();

    for k in 1..=POINT_SAMPLES {
        let r = POINT_SAMPLE_RADIUS * k as f64 / POINT_SAMPLES as f64;
        let rho = profile.rho0(r);
        let m = profile.m0(r);
        if !(rho >= 0.0) {
            failures.push(format!("negative or undefined density {rho} at r = {r}"));
            break;
        }
        if rho == 0.0 && m != 0.0 {
            failures.push(format!("momentum {m} on vacuum at r = {r}"));
            break;
        }
    }

    let mut run = |label: &str, f: &dyn Fn(f64) -> f64| -> Option<f64> {
        match adaptive_half_line(0.0, TRUNCATION, MAX_RADIUS, REL_TOL, |r| f(r) * weight(r)) {
            Ok(v) if v.is_finite() => Some(v),
            Ok(v) => {
                failures.push(format!("{label}: non-finite value {v}"));
                None
            }
            Err(QuadratureFailure { location, reason }) => {
                failures.push(format!("{label}: {reason} near r = {location:.6e}"));
                None
            }
        }
    };

    let mass = run("mass", &|r| profile.rho0(r));
    let pressure = run("pressure", &|r| model.pressure(profile.rho0(r)));
    let viscosity_gradient = run("viscosity gradient", &|r| {
        let rho = profile.rho0(r);
        if rho <= 0.0 {
            return 0.0;
        }
        let d = derivative(|x| model.h(profile.rho0(x)), |x| profile.rho0(x) > 0.0, r);
        d * d / rho
    });
    let momentum = run("momentum", &|r| momentum_density(profile.rho0(r), profile.m0(r)));

    let passed = failures.is_empty();
    HypothesisReport {
        mass,
        pressure,
        viscosity_gradient,
        momentum,
        failures,
        passed,
    }
}
