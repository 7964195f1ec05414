use std::fmt::Write as _;

use serde::Serialize;

use super::config::ScenarioConfig;
use crate::coefficients::{
    admissibility, check_dimension_bounds, check_growth_envelope, check_large_density_growth, validate_model,
    Admissibility, GrowthCheck, ValidationReport,
};
use crate::error::Result;
use crate::initial_data::{validate_hypotheses, HypothesisReport};

/// Log-spaced densities `10^{-6} .. 10^{6}`, 8 per decade.
pub fn density_samples() -> Vec<f64> {
    (0..=96).map(|k| 10f64.powf(-6.0 + k as f64 / 8.0)).collect()
}

/// Result of `validate`: structural conditions on `h, g`, the dimension
/// restriction, `α`-admissibility, growth checks and initial-data hypotheses.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationSummary {
    pub scenario: String,
    pub model: ValidationReport,
    pub dimension_bounds: bool,
    pub admissibility: Admissibility,
    pub growth_envelope: bool,
    pub large_density_growth: Option<GrowthCheck>,
    pub hypotheses: HypothesisReport,
    pub passed: bool,
}

pub fn validate_scenario(cfg: &ScenarioConfig) -> Result<ValidationSummary> {
    let model = cfg.model()?;
    let report = validate_model(&model, cfg.n_dim, &density_samples())?;
    let dims = check_dimension_bounds(model.nu1, model.nu2, cfg.n_dim);
    let adm = admissibility(cfg.alpha, model.nu1, model.nu2, cfg.n_dim)?;
    let env = check_growth_envelope(&model, cfg.n_dim);
    let large = check_large_density_growth(&model, cfg.n_dim);
    let hyp = validate_hypotheses(&cfg.profile()?, &model, cfg.n_dim);
    let passed = report.passed && dims && adm.admissible && env && large.as_ref().is_none_or(|g| g.passed) && hyp.passed;
    Ok(ValidationSummary {
        scenario: cfg.label(),
        model: report,
        dimension_bounds: dims,
        admissibility: adm,
        growth_envelope: env,
        large_density_growth: large,
        hypotheses: hyp,
        passed,
    })
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

impl ValidationSummary {
    /// Human-readable report, one check per line.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario: {}", self.scenario);
        let _ = writeln!(s, "model: {}", self.model.model);
        for c in &self.model.conditions {
            let _ = write!(
                s,
                "  {:<5} {:<28} worst margin {:.6e} at rho = {:.6e}",
                verdict(c.passed),
                c.condition.label(),
                c.worst_margin,
                c.worst_rho
            );
            if let Some(e) = &c.error {
                let _ = write!(s, " ({e})");
            }
            s.push('\n');
        }
        let _ = writeln!(s, "  {:<5} dimension bounds on nu1, nu2", verdict(self.dimension_bounds));
        let a = &self.admissibility;
        let _ = writeln!(
            s,
            "  {:<5} alpha = {} admissible: m = {:.6}, V1 = {:.12e} < {:.6e}, V2 = {:.12e} > {:.6e}",
            verdict(a.admissible),
            a.alpha,
            a.m,
            a.v1,
            a.lower_target,
            a.v2,
            a.upper_target
        );
        let _ = writeln!(s, "  {:<5} growth envelope", verdict(self.growth_envelope));
        match &self.large_density_growth {
            Some(g) => {
                let _ = writeln!(
                    s,
                    "  {:<5} large-density growth: exponent {:.6}, min ratio {:.6e}, slope {:.6e}",
                    verdict(g.passed),
                    g.exponent,
                    g.min_ratio,
                    g.log_slope
                );
            }
            None => {
                let _ = writeln!(s, "  n/a   large-density growth (does not apply)");
            }
        }
        let h = &self.hypotheses;
        let fmt = |v: Option<f64>| v.map_or("divergent".to_string(), |v| format!("{v:.10e}"));
        let _ = writeln!(s, "initial data:");
        let _ = writeln!(s, "  mass                {}", fmt(h.mass));
        let _ = writeln!(s, "  pressure            {}", fmt(h.pressure));
        let _ = writeln!(s, "  viscosity gradient  {}", fmt(h.viscosity_gradient));
        let _ = writeln!(s, "  momentum            {}", fmt(h.momentum));
        for f in &h.failures {
            let _ = writeln!(s, "  FAIL  {f}");
        }
        let _ = writeln!(s, "{}", if self.passed { "PASS" } else { "FAIL" });
        s
    }
}
