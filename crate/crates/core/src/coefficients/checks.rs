use serde::Serialize;

use super::{CoefficientModel, RegularizationParams};
use crate::error::{Error, Result};

/// Exponent slack in the large-density growth check.
pub const ENVELOPE_E: f64 = 1e-3;

const IDENTITY_REL_TOL: f64 = 1e-10;
/// Slack on non-strict inequalities so that equality cases survive roundoff.
const INEQUALITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Condition {
    /// `g = 2ρh' − 2h`
    SecondCoefficientIdentity,
    /// `h' ≥ ν`, `h(0) ≥ 0`
    ViscosityMonotone,
    /// `|g'| ≤ h'/ν`
    SecondCoefficientSlope,
    /// `ν₁h ≤ 2h + Ng ≤ ν₂h`
    TraceBounds,
}

impl Condition {
    pub fn label(&self) -> &'static str {
        match self {
            Condition::SecondCoefficientIdentity => "g = 2 rho h' - 2 h",
            Condition::ViscosityMonotone => "h' >= nu, h(0) >= 0",
            Condition::SecondCoefficientSlope => "|g'| <= h'/nu",
            Condition::TraceBounds => "nu1 h <= 2h + N g <= nu2 h",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionResult {
    pub condition: Condition,
    pub passed: bool,
    /// Sample attaining the smallest margin (or the first failing evaluation).
    pub worst_rho: f64,
    /// Smallest signed margin; negative means violated.
    pub worst_margin: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub model: String,
    pub conditions: Vec<ConditionResult>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn get(&self, c: Condition) -> &ConditionResult {
        self.conditions
            .iter()
            .find(|r| r.condition == c)
            .expect("every condition is reported")
    }
}

struct Tracker {
    condition: Condition,
    worst_rho: f64,
    worst_margin: f64,
    passed: bool,
    error: Option<String>,
}

impl Tracker {
    fn new(condition: Condition) -> Self {
        Self {
            condition,
            worst_rho: f64::NAN,
            worst_margin: f64::INFINITY,
            passed: true,
            error: None,
        }
    }

    /// Records `margin` at `rho`; `ok` decides pass/fail with whatever slack applies.
    fn record(&mut self, rho: f64, margin: f64, ok: bool, values: &[f64]) {
        if self.error.is_some() {
            return;
        }
        if values.iter().any(|v| !v.is_finite()) || !margin.is_finite() {
            self.error = Some(format!("evaluation error at rho = {rho:e}"));
            self.passed = false;
            self.worst_rho = rho;
            self.worst_margin = f64::NAN;
            return;
        }
        if margin < self.worst_margin {
            self.worst_margin = margin;
            self.worst_rho = rho;
        }
        self.passed &= ok;
    }

    fn finish(self) -> ConditionResult {
        ConditionResult {
            condition: self.condition,
            passed: self.passed,
            worst_rho: self.worst_rho,
            worst_margin: self.worst_margin,
            error: self.error,
        }
    }
}

/// Checks the four structural conditions on `h, g` at each sample density.
pub fn validate_model(model: &CoefficientModel, n_dim: usize, rho_samples: &[f64]) -> Result<ValidationReport> {
    if rho_samples.is_empty() {
        return Err(Error::Domain("rho_samples must be nonempty".into()));
    }
    if let Some(bad) = rho_samples.iter().find(|r| !(**r > 0.0)) {
        return Err(Error::Domain(format!("rho samples must be positive, got {bad}")));
    }
    let n = n_dim as f64;
    let mut identity = Tracker::new(Condition::SecondCoefficientIdentity);
    let mut monotone = Tracker::new(Condition::ViscosityMonotone);
    let mut slope = Tracker::new(Condition::SecondCoefficientSlope);
    let mut trace = Tracker::new(Condition::TraceBounds);

    let h0 = model.h(0.0);
    monotone.record(0.0, h0, h0 >= 0.0, &[h0]);

    for &rho in rho_samples {
        let h = model.h(rho);
        let hp = model.h_prime(rho);
        let g = model.g(rho);
        let gp = model.g_prime(rho);

        let residual = (g - 2.0 * rho * hp + 2.0 * h).abs();
        // Relative to the largest term: 2ρh' and 2h cancel when g ≪ h.
        let allowed = IDENTITY_REL_TOL * (1.0 + g.abs().max(2.0 * (rho * hp).abs()).max(2.0 * h.abs()));
        identity.record(rho, allowed - residual, residual <= allowed, &[h, hp, g]);

        let m = hp - model.nu;
        monotone.record(rho, m, m >= -INEQUALITY_SLACK * (1.0 + hp.abs()), &[hp]);

        let m = hp / model.nu - gp.abs();
        slope.record(rho, m, m >= -INEQUALITY_SLACK * (1.0 + hp.abs() / model.nu), &[hp, gp]);

        let t = 2.0 * h + n * g;
        let m = (t - model.nu1 * h).min(model.nu2 * h - t);
        let scale = h.abs() * (2.0 + model.nu2.abs()) + (n * g).abs();
        trace.record(rho, m, m >= -INEQUALITY_SLACK * scale, &[h, g]);
    }

    let conditions: Vec<ConditionResult> = [identity, monotone, slope, trace]
        .into_iter()
        .map(Tracker::finish)
        .collect();
    let passed = conditions.iter().all(|c| c.passed);
    Ok(ValidationReport {
        model: model.name.clone(),
        conditions,
        passed,
    })
}

/// Dimension-dependent restriction on `ν₁, ν₂`; vacuous for `N ≤ 2`.
pub fn check_dimension_bounds(nu1: f64, nu2: f64, n_dim: usize) -> bool {
    if n_dim < 3 {
        return true;
    }
    let n = n_dim as f64;
    let root = (2.0 * n * n - 4.0 * n + 4.0).sqrt();
    let den = n * n - 4.0 * n + 4.0;
    let lhs1 = (4.0 * n - 4.0 * root) / den;
    let lhs2 = (4.0 * n + 4.0 * root) / den;
    lhs1 < (nu1 - 2.0) / n && lhs2 > (nu2 - 2.0) / n
}

fn v_parts(m: f64, n_dim: usize) -> Result<(f64, f64, f64)> {
    if !(m > 2.0) {
        return Err(Error::Domain(format!("V1/V2 need m > 2, got {m}")));
    }
    if n_dim < 2 {
        return Err(Error::Domain(format!("V1/V2 need N >= 2, got {n_dim}")));
    }
    let n = n_dim as f64;
    let a = 4.0 * n * (m - 1.0);
    let root = 4.0 * (n * n * (m - 1.0).powi(2) + (n - 1.0) * (m - 1.0) * (m - 2.0).powi(2)).sqrt();
    let den = (n - 1.0) * (m - 2.0).powi(2);
    Ok((a, root, den))
}

pub fn v1(m: f64, n_dim: usize) -> Result<f64> {
    let (a, root, _) = v_parts(m, n_dim)?;
    // Conjugate form of (a − root)/den; the direct difference cancels as m → 2⁺.
    Ok(-16.0 * (m - 1.0) / (a + root))
}

pub fn v2(m: f64, n_dim: usize) -> Result<f64> {
    let (a, root, den) = v_parts(m, n_dim)?;
    Ok((a + root) / den)
}

#[derive(Debug, Clone, Serialize)]
pub struct Admissibility {
    pub alpha: f64,
    pub m: f64,
    pub v1: f64,
    pub v2: f64,
    /// `min{(ν₁−2)/N, (α−1)/N}`, which `V1` must stay strictly below.
    pub lower_target: f64,
    /// `(ν₂−2)/N`, which `V2` must strictly exceed.
    pub upper_target: f64,
    pub admissible: bool,
}

pub fn admissibility(alpha: f64, nu1: f64, nu2: f64, n_dim: usize) -> Result<Admissibility> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0,1), got {alpha}")));
    }
    let n = n_dim as f64;
    let m = n / (1.0 - alpha);
    let v1 = v1(m, n_dim)?;
    let v2 = v2(m, n_dim)?;
    let lower_target = ((nu1 - 2.0) / n).min((alpha - 1.0) / n);
    let upper_target = (nu2 - 2.0) / n;
    Ok(Admissibility {
        alpha,
        m,
        v1,
        v2,
        lower_target,
        upper_target,
        admissible: v1 < lower_target && v2 > upper_target,
    })
}

/// Whether `α` satisfies the `V1/V2` window for this model's trace bounds.
pub fn admissible_alpha(alpha: f64, model: &CoefficientModel, n_dim: usize) -> bool {
    admissibility(alpha, model.nu1, model.nu2, n_dim)
        .map(|a| a.admissible)
        .unwrap_or(false)
}

/// Whether a single `C ∈ [1e−6, 1e6]` brackets `h` between the power envelopes
/// implied by the trace bounds, sampled at `ρ = 2^k`, `k = −10..10`.
pub fn check_growth_envelope(model: &CoefficientModel, n_dim: usize) -> bool {
    let n = n_dim as f64;
    let a1 = (n - 1.0) / n + model.nu1 / (2.0 * n);
    let a2 = (n - 1.0) / n + model.nu2 / (2.0 * n);
    let mut lo = 1e-6f64.ln();
    let mut hi = 1e6f64.ln();
    for k in -10..=10 {
        let rho = 2f64.powi(k);
        let lr = rho.ln();
        let lh = model.h(rho).ln();
        if !lh.is_finite() {
            return false;
        }
        // ρ ≥ 1: Cρ^{a1} ≤ h ≤ Cρ^{a2};  ρ ≤ 1: Cρ^{a2} ≤ h ≤ Cρ^{a1}.
        let (upper_exp, lower_exp) = if rho >= 1.0 { (a1, a2) } else { (a2, a1) };
        hi = hi.min(lh - upper_exp * lr);
        lo = lo.max(lh - lower_exp * lr);
        if rho == 1.0 {
            hi = hi.min(lh - lower_exp * lr);
            lo = lo.max(lh - upper_exp * lr);
        }
    }
    lo <= hi + 1e-12
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthCheck {
    pub exponent: f64,
    pub min_ratio: f64,
    pub log_slope: f64,
    pub passed: bool,
}

/// Large-density growth requirement for `N ≥ 3`, `γ ≥ N/(N−2)`: the ratio
/// `h(ρ)/ρ^{(N−2)γ/N + e}` on `[1e3, 1e6]` must stay positive and must not
/// trend toward zero (least-squares slope in log-log ≥ 0). `None` when the
/// requirement does not apply.
pub fn check_large_density_growth(model: &CoefficientModel, n_dim: usize) -> Option<GrowthCheck> {
    if n_dim < 3 {
        return None;
    }
    let n = n_dim as f64;
    if model.gamma < n / (n - 2.0) {
        return None;
    }
    let exponent = (n - 2.0) * model.gamma / n + ENVELOPE_E;
    let samples = 31;
    let mut min_ratio = f64::INFINITY;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..samples {
        let lr = (1e3f64).ln() + (1e3f64).ln() * k as f64 / (samples - 1) as f64;
        let rho = lr.exp();
        let ratio = model.h(rho) / rho.powf(exponent);
        min_ratio = min_ratio.min(ratio);
        let ly = ratio.ln();
        sx += lr;
        sy += ly;
        sxx += lr * lr;
        sxy += lr * ly;
    }
    let s = samples as f64;
    let log_slope = (s * sxy - sx * sy) / (s * sxx - sx * sx);
    let passed = min_ratio.is_finite() && min_ratio > 0.0 && log_slope.is_finite() && log_slope >= -1e-9;
    Some(GrowthCheck {
        exponent,
        min_ratio,
        log_slope,
        passed,
    })
}

/// Largest `C` such that, at every sample density, the velocity-moment quadratic form
/// `a X² + c XY + b Y²` dominates `C·w·(X² + Y²)` with `w = ρh + ερ^{θ+1}`,
/// where (for `m = N/(1−α)`)
///
/// ```text
/// a = (m−1)(2hρ + gρ + εθρ^{θ+1})
/// b = 2(N−1)ρh + (N−1)²ρg + ε(N−1)(θ(N−1) − N + 2)ρ^{1+θ}
/// c = ρgm(N−1) + εm(N−1)(θ−1)ρ^{1+θ}
/// ```
///
/// using the base law of `model`. A positive value means the negative-definite
/// structure holds on the samples.
pub fn sign_structure_constant(model: &CoefficientModel, params: &RegularizationParams, rho_samples: &[f64]) -> f64 {
    let n = params.n();
    let m = params.velocity_exponent();
    let eps = params.epsilon();
    let th = params.theta();
    rho_samples
        .iter()
        .map(|&rho| {
            let h = model.base_h(rho);
            let g = model.base_g(rho);
            let reg = eps * rho.powf(1.0 + th);
            let a = (m - 1.0) * (2.0 * h * rho + g * rho + th * reg);
            let b = 2.0 * (n - 1.0) * rho * h
                + (n - 1.0).powi(2) * rho * g
                + (n - 1.0) * (th * (n - 1.0) - n + 2.0) * reg;
            let c = rho * g * m * (n - 1.0) + m * (n - 1.0) * (th - 1.0) * reg;
            let w = rho * h + reg;
            let (a, b, c) = (a / w, b / w, c / w);
            0.5 * ((a + b) - ((a - b).powi(2) + c * c).sqrt())
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn v1_conjugate_form_matches_direct() {
        for n in [2usize, 3, 5] {
            for m in [2.5, 4.0, 10.0, 77.0] {
                let (a, root, den) = v_parts(m, n).unwrap();
                let direct = (a - root) / den;
                let got = v1(m, n).unwrap();
                assert!((got - direct).abs() < 1e-12 * direct.abs().max(1.0));
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(v1(2.0, 2).is_err());
        assert!(v2(1.5, 3).is_err());
        assert!(admissibility(1.0, 2.0, 2.0, 2).is_err());
    }
}
