use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One member `(ε, R, δ, α, N)` of the approximating family. `θ` is derived
/// once at construction and stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizationParams {
    n_dim: usize,
    alpha: f64,
    theta: f64,
    epsilon: f64,
    outer_radius: f64,
    delta: f64,
    exterior: bool,
}

/// Relative slack on `εR^N ≤ √ε`, so that `R = ε^{-1/(2N)}` itself is accepted.
const RADIUS_CONSTRAINT_TOL: f64 = 1e-12;

impl RegularizationParams {
    pub fn new(
        n_dim: usize,
        alpha: f64,
        epsilon: f64,
        outer_radius: f64,
        delta: f64,
        exterior: bool,
    ) -> Result<Self> {
        if n_dim < 2 {
            return Err(Error::Config(format!("N must be at least 2, got {n_dim}")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0,1), got {alpha}")));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::Config(format!("delta must be nonnegative, got {delta}")));
        }
        let inner = if exterior { 1.0 } else { epsilon };
        if !(outer_radius > inner && outer_radius.is_finite()) {
            return Err(Error::Config(format!(
                "outer radius {outer_radius} must exceed inner radius {inner}"
            )));
        }
        if !exterior {
            let lhs = epsilon * outer_radius.powi(n_dim as i32);
            let rhs = epsilon.sqrt();
            if lhs > rhs * (1.0 + RADIUS_CONSTRAINT_TOL) {
                return Err(Error::Config(format!(
                    "eps*R^N = {lhs:.6e} exceeds sqrt(eps) = {rhs:.6e}"
                )));
            }
        }
        let theta = (n_dim as f64 - 1.0 + alpha) / n_dim as f64;
        Ok(Self {
            n_dim,
            alpha,
            theta,
            epsilon,
            outer_radius,
            delta,
            exterior,
        })
    }

    pub fn n_dim(&self) -> usize {
        self.n_dim
    }

    pub fn n(&self) -> f64 {
        self.n_dim as f64
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn exterior(&self) -> bool {
        self.exterior
    }

    /// `ε` on the whole-space family, `1` in exterior mode.
    pub fn inner_radius(&self) -> f64 {
        if self.exterior {
            1.0
        } else {
            self.epsilon
        }
    }

    /// `m = N/(1−α)`, the velocity integrability exponent.
    pub fn velocity_exponent(&self) -> f64 {
        self.n() / (1.0 - self.alpha)
    }
}
