//! Viscosity laws `h(ρ)`, `g(ρ)`, the pressure `P(ρ) = ρ^γ`, and the checks
//! that a law satisfies the structural conditions the estimates rely on.

mod checks;
mod params;
mod tabulated;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::quadrature::GaussLegendre;

pub use checks::{
    admissibility, admissible_alpha, check_dimension_bounds, check_growth_envelope,
    check_large_density_growth, sign_structure_constant, v1, v2, validate_model, Admissibility, Condition,
    ConditionResult, GrowthCheck, ValidationReport, ENVELOPE_E,
};
pub use params::RegularizationParams;
pub use tabulated::TabulatedLaw;
pub(crate) use tabulated::read_two_columns;

/// One term `c·ρ^p` of a power-law viscosity. The induced second coefficient
/// is `2(p−1)c·ρ^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm {
    pub coeff: f64,
    pub exponent: f64,
}

impl PowerTerm {
    pub fn new(coeff: f64, exponent: f64) -> Self {
        Self { coeff, exponent }
    }

    fn h(&self, rho: f64) -> f64 {
        self.coeff * rho.powf(self.exponent)
    }

    fn h_prime(&self, rho: f64) -> f64 {
        if self.exponent == 0.0 {
            return 0.0;
        }
        self.coeff * self.exponent * rho.powf(self.exponent - 1.0)
    }

    fn g(&self, rho: f64) -> f64 {
        2.0 * (self.exponent - 1.0) * self.h(rho)
    }

    fn g_prime(&self, rho: f64) -> f64 {
        2.0 * (self.exponent - 1.0) * self.h_prime(rho)
    }

    /// `2∫₀^{√s} h'(w²) dw` in closed form; infinite for `p ≤ 1/2`.
    fn hbar(&self, s: f64) -> f64 {
        if self.exponent == 0.0 {
            return 0.0;
        }
        let q = self.exponent - 0.5;
        if q <= 0.0 {
            return f64::INFINITY;
        }
        self.coeff * self.exponent * s.powf(q) / q
    }
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied closures for `h, h', g, g'`. Nothing ties `g` to `h`; the
/// validator is what catches inconsistent pairs.
#[derive(Clone)]
pub struct CustomLaw {
    pub h: ScalarFn,
    pub h_prime: ScalarFn,
    pub g: ScalarFn,
    pub g_prime: ScalarFn,
}

impl fmt::Debug for CustomLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomLaw { .. }")
    }
}

#[derive(Debug, Clone)]
pub enum ViscosityLaw {
    Power(Vec<PowerTerm>),
    Tabulated(TabulatedLaw),
    Custom(CustomLaw),
}

/// A viscosity pair with its structural constants.
///
/// `added` holds the regularizing terms `(ε/2)ρ^θ`; they are kept apart from
/// the base law so that diagnostics can refer to either.
#[derive(Debug, Clone)]
pub struct CoefficientModel {
    pub name: String,
    pub law: ViscosityLaw,
    pub added: Vec<PowerTerm>,
    pub nu: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub gamma: f64,
}

impl CoefficientModel {
    pub fn power_law(
        name: impl Into<String>,
        terms: Vec<PowerTerm>,
        nu: f64,
        nu1: f64,
        nu2: f64,
        gamma: f64,
    ) -> Self {
        Self {
            name: name.into(),
            law: ViscosityLaw::Power(terms),
            added: Vec::new(),
            nu,
            nu1,
            nu2,
            gamma,
        }
    }

    /// Shallow-water law `h = ρ`, `g = 0`, `γ = 2`, with `ν = 1/2`, `ν₁ = ν₂ = 2`.
    pub fn saint_venant() -> Self {
        Self::power_law("saint-venant", vec![PowerTerm::new(1.0, 1.0)], 0.5, 2.0, 2.0, 2.0)
    }

    /// `h = c·ρ^p` with the induced `g`; `ν₁, ν₂` are the exact trace bounds
    /// `2 + 2N(p−1)` collapsed to one value.
    pub fn single_power(c: f64, p: f64, n_dim: usize, nu: f64, gamma: f64) -> Self {
        let trace = 2.0 + 2.0 * n_dim as f64 * (p - 1.0);
        Self::power_law(
            format!("power c={c} p={p}"),
            vec![PowerTerm::new(c, p)],
            nu,
            trace,
            trace,
            gamma,
        )
    }

    pub fn custom(
        name: impl Into<String>,
        law: CustomLaw,
        nu: f64,
        nu1: f64,
        nu2: f64,
        gamma: f64,
    ) -> Self {
        Self {
            name: name.into(),
            law: ViscosityLaw::Custom(law),
            added: Vec::new(),
            nu,
            nu1,
            nu2,
            gamma,
        }
    }

    fn added_sum(&self, f: impl Fn(&PowerTerm) -> f64) -> f64 {
        self.added.iter().map(f).sum()
    }

    pub fn h(&self, rho: f64) -> f64 {
        self.base_h(rho) + self.added_sum(|t| t.h(rho))
    }

    pub fn h_prime(&self, rho: f64) -> f64 {
        self.base_h_prime(rho) + self.added_sum(|t| t.h_prime(rho))
    }

    pub fn g(&self, rho: f64) -> f64 {
        self.base_g(rho) + self.added_sum(|t| t.g(rho))
    }

    pub fn g_prime(&self, rho: f64) -> f64 {
        self.base_g_prime(rho) + self.added_sum(|t| t.g_prime(rho))
    }

    pub fn base_h(&self, rho: f64) -> f64 {
        match &self.law {
            ViscosityLaw::Power(ts) => ts.iter().map(|t| t.h(rho)).sum(),
            ViscosityLaw::Tabulated(t) => t.h(rho),
            ViscosityLaw::Custom(c) => (c.h)(rho),
        }
    }

    pub fn base_h_prime(&self, rho: f64) -> f64 {
        match &self.law {
            ViscosityLaw::Power(ts) => ts.iter().map(|t| t.h_prime(rho)).sum(),
            ViscosityLaw::Tabulated(t) => t.h_prime(rho),
            ViscosityLaw::Custom(c) => (c.h_prime)(rho),
        }
    }

    pub fn base_g(&self, rho: f64) -> f64 {
        match &self.law {
            ViscosityLaw::Power(ts) => ts.iter().map(|t| t.g(rho)).sum(),
            ViscosityLaw::Tabulated(t) => t.g(rho),
            ViscosityLaw::Custom(c) => (c.g)(rho),
        }
    }

    pub fn base_g_prime(&self, rho: f64) -> f64 {
        match &self.law {
            ViscosityLaw::Power(ts) => ts.iter().map(|t| t.g_prime(rho)).sum(),
            ViscosityLaw::Tabulated(t) => t.g_prime(rho),
            ViscosityLaw::Custom(c) => (c.g_prime)(rho),
        }
    }

    pub fn pressure(&self, rho: f64) -> f64 {
        rho.powf(self.gamma)
    }

    /// `h̄(s)` with `h̄(0) = 0` and `h̄'(s) = h'(s)/√s`, for the base law.
    pub fn hbar(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match &self.law {
            ViscosityLaw::Power(ts) => ts.iter().map(|t| t.hbar(s)).sum(),
            _ => {
                // h̄(s) = 2∫₀^{√s} h'(w²) dw removes the 1/√s singularity.
                let rule = GaussLegendre::new(24);
                let top = s.sqrt();
                let panels = 16;
                let dw = top / panels as f64;
                (0..panels)
                    .map(|k| {
                        rule.integrate(k as f64 * dw, (k + 1) as f64 * dw, |w| {
                            2.0 * self.base_h_prime(w * w)
                        })
                    })
                    .sum()
            }
        }
    }

    /// `h̄'(s) = h'(s)/√s` for the base law.
    pub fn hbar_prime(&self, s: f64) -> f64 {
        self.base_h_prime(s) / s.sqrt()
    }

    /// Total regularization strength `ε` folded into `added`, if any, with its exponent.
    pub fn regularization(&self) -> Option<(f64, f64)> {
        self.added.first().map(|t| (2.0 * t.coeff, t.exponent))
    }
}

/// The coefficients actually used on the annulus: `2h + ερ^θ`, `g + (θ−1)ερ^θ`,
/// and `ψ = 2h' + θερ^{θ−1}`, built from a base law without mutating it.
#[derive(Debug, Clone, Copy)]
pub struct Regularized<'a> {
    pub model: &'a CoefficientModel,
    pub epsilon: f64,
    pub theta: f64,
    pub alpha: f64,
}

impl<'a> Regularized<'a> {
    pub fn new(model: &'a CoefficientModel, params: &RegularizationParams) -> Self {
        Self {
            model,
            epsilon: params.epsilon(),
            theta: params.theta(),
            alpha: params.alpha(),
        }
    }

    /// `2h(ρ) + ερ^θ`
    pub fn two_mu(&self, rho: f64) -> f64 {
        2.0 * self.model.h(rho) + self.epsilon * rho.powf(self.theta)
    }

    /// `g(ρ) + (θ−1)ερ^θ`
    pub fn lambda(&self, rho: f64) -> f64 {
        self.model.g(rho) + (self.theta - 1.0) * self.epsilon * rho.powf(self.theta)
    }

    /// `2h'(ρ) + θερ^{θ−1}`
    pub fn psi(&self, rho: f64) -> f64 {
        2.0 * self.model.h_prime(rho) + self.theta * self.epsilon * rho.powf(self.theta - 1.0)
    }

    /// `ν₁h(ρ) + αερ^θ`, the coefficient of the guaranteed dissipation.
    pub fn lower_weight(&self, rho: f64) -> f64 {
        self.model.nu1 * self.model.h(rho) + self.alpha * self.epsilon * rho.powf(self.theta)
    }

    /// `h(ρ) + ερ^θ`
    pub fn h_plus(&self, rho: f64) -> f64 {
        self.model.h(rho) + self.epsilon * rho.powf(self.theta)
    }
}

/// Adds `ε/2·ρ^θ` to `h` (so `2h ← 2h + ερ^θ`) and the induced
/// `(θ−1)ερ^θ` to `g`.
///
/// The trace bounds are widened to `min(ν₁, 2α)` and `max(ν₂, 2α)`: the added
/// pair contributes exactly `αερ^θ = 2α·(ε/2)ρ^θ` to `2h + Ng`.
pub fn regularized_pair(model: &CoefficientModel, params: &RegularizationParams) -> CoefficientModel {
    let eps = params.epsilon();
    if eps == 0.0 {
        return model.clone();
    }
    let mut out = model.clone();
    out.added.push(PowerTerm::new(0.5 * eps, params.theta()));
    let two_alpha = 2.0 * params.alpha();
    out.nu1 = model.nu1.min(two_alpha);
    out.nu2 = model.nu2.max(two_alpha);
    out.name = format!("{} (eps={eps:e})", model.name);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saint_venant_pair() {
        let m = CoefficientModel::saint_venant();
        assert_eq!(m.h(3.0), 3.0);
        assert_eq!(m.g(3.0), 0.0);
        assert_eq!(m.h_prime(3.0), 1.0);
        assert_eq!(m.hbar(4.0), 4.0);
    }

    #[test]
    fn hbar_quadrature_matches_closed_form() {
        let power = CoefficientModel::power_law(
            "p",
            vec![PowerTerm::new(1.0, 1.0), PowerTerm::new(0.5, 1.5)],
            0.5,
            2.0,
            4.0,
            2.0,
        );
        let law = CustomLaw {
            h: Arc::new(|r: f64| r + 0.5 * r.powf(1.5)),
            h_prime: Arc::new(|r: f64| 1.0 + 0.75 * r.sqrt()),
            g: Arc::new(|r: f64| 0.5 * r.powf(1.5)),
            g_prime: Arc::new(|r: f64| 0.75 * r.sqrt()),
        };
        let custom = CoefficientModel::custom("c", law, 0.5, 2.0, 4.0, 2.0);
        for s in [0.01, 0.7, 3.0, 40.0] {
            let a = power.hbar(s);
            let b = custom.hbar(s);
            assert!((a - b).abs() < 1e-12 * a.abs().max(1.0), "s={s}: {a} vs {b}");
        }
    }

    #[test]
    fn regularization_is_recorded() {
        let p = RegularizationParams::new(2, 0.5, 0.1, 1.5, 0.0, false).unwrap();
        let m = regularized_pair(&CoefficientModel::saint_venant(), &p);
        let (eps, theta) = m.regularization().unwrap();
        assert_eq!(eps, 0.1);
        assert_eq!(theta, 0.75);
        assert!(CoefficientModel::saint_venant().regularization().is_none());
    }
}
