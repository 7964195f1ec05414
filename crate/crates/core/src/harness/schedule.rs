use serde::Serialize;

use super::config::{LevelSpec, ScenarioConfig};
use crate::coefficients::RegularizationParams;
use crate::error::{Error, Result};

/// The levels `(ε_j, R_j, δ_j, K_j)` of a refinement study, validated as a
/// whole before anything runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementSchedule {
    pub levels: Vec<LevelSpec>,
}

impl RefinementSchedule {
    /// `ε_j = eps0·4^{−j}`, `R_j = ε_j^{−1/(2N)}`, `δ_j = δ0·2^{−j}`, `K_j = K0·2^j`.
    pub fn geometric(levels: usize, eps0: f64, delta0: f64, k0: usize, n_dim: usize) -> Self {
        let levels = (0..levels)
            .map(|j| {
                let epsilon = eps0 * 0.25f64.powi(j as i32);
                LevelSpec {
                    epsilon,
                    outer_radius: epsilon.powf(-1.0 / (2.0 * n_dim as f64)),
                    delta: delta0 * 0.5f64.powi(j as i32),
                    cells: k0 << j,
                }
            })
            .collect();
        Self { levels }
    }

    /// Uses `schedule.explicit` when present, the geometric rule otherwise,
    /// and checks the result against `min_levels`.
    pub fn from_config(cfg: &ScenarioConfig, min_levels: usize) -> Result<Self> {
        let s = &cfg.schedule;
        let sched = if s.explicit.is_empty() {
            Self::geometric(s.levels, s.eps0, s.delta0, s.k0, cfg.n_dim)
        } else {
            Self {
                levels: s.explicit.clone(),
            }
        };
        sched.validate(cfg, min_levels)?;
        Ok(sched)
    }

    /// Per-level parameter checks (including `εR^N ≤ √ε` outside exterior
    /// mode and a nonempty velocity support), `ε_j` and `δ_j` nonincreasing,
    /// and strictly decreasing `ε_j` for the geometric rule.
    pub fn validate(&self, cfg: &ScenarioConfig, min_levels: usize) -> Result<()> {
        if self.levels.len() < min_levels {
            return Err(Error::Config(format!(
                "need at least {min_levels} levels, got {}",
                self.levels.len()
            )));
        }
        for (j, l) in self.levels.iter().enumerate() {
            let p = cfg
                .params(l)
                .map_err(|e| Error::Config(format!("level {j}: {e}")))?;
            if !(l.delta > 0.0) && cfg.schedule.explicit.is_empty() {
                return Err(Error::Config(format!("level {j}: delta must be positive")));
            }
            if l.cells < 8 {
                return Err(Error::Config(format!("level {j}: K = {} is below 8", l.cells)));
            }
            check_velocity_support(&p).map_err(|e| Error::Config(format!("level {j}: {e}")))?;
        }
        let strict = cfg.schedule.explicit.is_empty();
        for (j, w) in self.levels.windows(2).enumerate() {
            let bad_eps = if strict {
                !(w[1].epsilon < w[0].epsilon)
            } else {
                w[1].epsilon > w[0].epsilon
            };
            if bad_eps {
                return Err(Error::Config(format!(
                    "epsilon must decrease: level {} has {} after {}",
                    j + 1,
                    w[1].epsilon,
                    w[0].epsilon
                )));
            }
            if w[1].delta > w[0].delta {
                return Err(Error::Config(format!(
                    "delta must not increase: level {} has {} after {}",
                    j + 1,
                    w[1].delta,
                    w[0].delta
                )));
            }
        }
        Ok(())
    }
}

fn check_velocity_support(p: &RegularizationParams) -> Result<()> {
    let lo = p.inner_radius() + 2.0 * p.delta();
    let hi = p.outer_radius() - 2.0 * p.delta();
    if hi <= lo {
        return Err(Error::Config(format!(
            "velocity support empty: R - 2 delta = {hi} <= inner + 2 delta = {lo}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_rule_respects_the_radius_constraint() {
        let s = RefinementSchedule::geometric(4, 0.1, 0.05, 256, 2);
        for (j, l) in s.levels.iter().enumerate() {
            assert_eq!(l.cells, 256 << j);
            assert!(l.epsilon * l.outer_radius.powi(2) <= l.epsilon.sqrt() * (1.0 + 1e-12));
        }
        assert!((s.levels[1].epsilon - 0.025).abs() < 1e-17);
        assert!((s.levels[2].delta - 0.0125).abs() < 1e-17);
    }
}
