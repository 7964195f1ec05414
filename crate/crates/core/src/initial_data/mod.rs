//! Initial data on the annulus: truncation to `[ε, R]` with the `+ε` floor,
//! a velocity cut-off `2δ` inside each wall, mollification, and integrability
//! checks on the untruncated profile.

mod hypotheses;
mod mollifier;
mod profile;

use std::sync::Arc;

use crate::coefficients::{RegularizationParams, ScalarFn};
use crate::error::{Error, Result};

pub use hypotheses::{validate_hypotheses, HypothesisReport};
pub use mollifier::Mollifier;
pub use profile::{BumpParams, GaussianParams, RadialProfile};

/// Subcells per solver cell when integrating cell masses.
pub const OVERSAMPLE: usize = 4;

/// Truncated and floored data on `[inner, R]`, extended constantly outside for
/// convolution.
#[derive(Clone)]
pub struct AnnulusProfile {
    pub inner: f64,
    pub outer: f64,
    pub floor: f64,
    pub delta: f64,
    rho: ScalarFn,
    u: ScalarFn,
}

impl std::fmt::Debug for AnnulusProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AnnulusProfile")
            .field("inner", &self.inner)
            .field("outer", &self.outer)
            .field("floor", &self.floor)
            .field("delta", &self.delta)
            .finish_non_exhaustive()
    }
}

impl AnnulusProfile {
    pub fn rho(&self, r: f64) -> f64 {
        (self.rho)(r)
    }

    pub fn u(&self, r: f64) -> f64 {
        (self.u)(r)
    }

    /// Start of the velocity support, `inner + 2δ`.
    pub fn velocity_start(&self) -> f64 {
        self.inner + 2.0 * self.delta
    }

    /// End of the velocity support, `R − 2δ`.
    pub fn velocity_end(&self) -> f64 {
        self.outer - 2.0 * self.delta
    }
}

/// `ρ = ρ₀(clamp(r, inner, R)) + ε`, and `u = m₀/(ρ₀ + ε)` on
/// `[inner + 2δ, R − 2δ]`, exactly zero elsewhere.
pub fn truncate_and_floor(profile: &RadialProfile, params: &RegularizationParams) -> Result<AnnulusProfile> {
    let inner = params.inner_radius();
    let outer = params.outer_radius();
    let eps = params.epsilon();
    let delta = params.delta();
    let lo = inner + 2.0 * delta;
    let hi = outer - 2.0 * delta;
    if hi <= lo {
        return Err(Error::Config(format!(
            "velocity support empty: R - 2 delta = {hi} <= inner + 2 delta = {lo}"
        )));
    }
    let rho0 = profile.rho0.clone();
    let m0 = profile.m0.clone();
    let rho0_u = profile.rho0.clone();
    Ok(AnnulusProfile {
        inner,
        outer,
        floor: eps,
        delta,
        rho: Arc::new(move |r: f64| rho0(r.clamp(inner, outer)) + eps),
        u: Arc::new(move |r: f64| {
            if r < lo || r > hi {
                0.0
            } else {
                m0(r) / (rho0_u(r) + eps)
            }
        }),
    })
}

/// Mollified density, with the floor reinstated against roundoff.
pub fn mollified_rho(data: &AnnulusProfile, kernel: &Mollifier, r: f64) -> f64 {
    kernel.convolve(r, |x| data.rho(x)).max(data.floor)
}

pub fn mollified_u(data: &AnnulusProfile, kernel: &Mollifier, r: f64) -> f64 {
    kernel.convolve(r, |x| data.u(x))
}

/// Mollified data sampled on a uniform Lagrangian grid: node radii and
/// velocities, and cell masses `Δm_i = ∫ ρ r^{N−1} dr` over each cell.
#[derive(Debug, Clone)]
pub struct ProfileOnGrid {
    pub n_dim: usize,
    pub node_r: Vec<f64>,
    pub node_u: Vec<f64>,
    pub cell_mass: Vec<f64>,
}

/// Builds the grid data with `k` cells. Cell masses use `OVERSAMPLE` subcells,
/// each carrying the mollified density at its midpoint times its exact volume.
pub fn sample_on_grid(data: &AnnulusProfile, kernel: &Mollifier, n_dim: usize, k: usize) -> Result<ProfileOnGrid> {
    if k < 8 {
        return Err(Error::Construction(format!("need at least 8 cells, got {k}")));
    }
    let n = n_dim as i32;
    let a = data.inner;
    let b = data.outer;
    let dr = (b - a) / k as f64;
    let mut node_r: Vec<f64> = (0..=k).map(|j| a + dr * j as f64).collect();
    node_r[k] = b;
    let mut node_u: Vec<f64> = node_r.iter().map(|&r| mollified_u(data, kernel, r)).collect();
    node_u[0] = 0.0;
    node_u[k] = 0.0;
    let mut cell_mass = Vec::with_capacity(k);
    for i in 0..k {
        let (r0, r1) = (node_r[i], node_r[i + 1]);
        let sub = (r1 - r0) / OVERSAMPLE as f64;
        let mut m = 0.0;
        for s in 0..OVERSAMPLE {
            let lo = r0 + sub * s as f64;
            let hi = if s + 1 == OVERSAMPLE { r1 } else { r0 + sub * (s + 1) as f64 };
            let rho = mollified_rho(data, kernel, 0.5 * (lo + hi));
            if !(rho > 0.0) {
                return Err(Error::Construction(format!("nonpositive density {rho} near r = {lo}")));
            }
            m += rho * (hi.powi(n) - lo.powi(n)) / n_dim as f64;
        }
        cell_mass.push(m);
    }
    Ok(ProfileOnGrid {
        n_dim,
        node_r,
        node_u,
        cell_mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(delta: f64) -> RegularizationParams {
        RegularizationParams::new(2, 0.5, 0.1, 1.5, delta, false).unwrap()
    }

    #[test]
    fn velocity_support_is_cut_exactly() {
        let prof = RadialProfile::new("u=1", |_| 1.0, |_| 1.0);
        let data = truncate_and_floor(&prof, &params(0.05)).unwrap();
        assert_eq!(data.u(0.1999), 0.0);
        assert_eq!(data.u(1.4001), 0.0);
        assert_eq!(data.u(3.0), 0.0);
        assert!((data.u(0.7) - 1.0 / 1.1).abs() < 1e-15);
    }

    #[test]
    fn empty_velocity_support() {
        let p = RegularizationParams::new(2, 0.5, 0.1, 1.5, 0.4, false).unwrap();
        let prof = RadialProfile::new("c", |_| 1.0, |_| 0.0);
        let err = truncate_and_floor(&prof, &p).unwrap_err();
        assert!(err.to_string().contains("velocity support empty"));
    }

    #[test]
    fn grid_needs_eight_cells() {
        let prof = RadialProfile::new("c", |_| 1.0, |_| 0.0);
        let data = truncate_and_floor(&prof, &params(0.0)).unwrap();
        let kernel = Mollifier::new(0.0);
        assert!(sample_on_grid(&data, &kernel, 2, 7).is_err());
        assert!(sample_on_grid(&data, &kernel, 2, 8).is_ok());
    }
}
