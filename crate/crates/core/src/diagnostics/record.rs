use std::io::Write;

use serde::Serialize;

pub const CSV_HEADER: &str =
    "t,mass,energy,diss_exact,diss_lower,bd_entropy,bd_cross_rate,sqrt_rho_h1,log_moment,u_Lm,hbar_grad_l2";

/// Header of the companion file with the time-integrated quantities.
pub const INTEGRALS_HEADER: &str = "t,work,cross_integral,pressure_norm,drift_integral,extra_moment";

/// Time integrals accumulated step by step during a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct RunTotals {
    pub steps: usize,
    /// `Σ dt·uᵀAu`, the viscous work with each step's frozen operator.
    pub work: f64,
    /// Trapezoid-rule `∫ bd_cross_rate dt`.
    pub cross_integral: f64,
    /// Trapezoid-rule `∫∫(ρ^γ)^q r^{N−1} dr dt`.
    pub pressure_integral: f64,
    /// `Σ dt·Σ M_j u_j`, i.e. `∫∫ρu r^{N−1} dr dt`; this is the exact change of
    /// `∫ρ r·r^{N−1} dr`, which enters the `γ = 1` relative entropy.
    pub drift_integral: f64,
}

/// One row of monitored functionals at an observer tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub diss_exact: f64,
    pub diss_lower: f64,
    pub bd_entropy: f64,
    pub bd_cross_rate: f64,
    pub sqrt_rho_h1: f64,
    pub log_moment: f64,
    pub u_lm: f64,
    pub hbar_grad_l2: f64,
    pub extra_moment: f64,
    /// Space-time pressure norm over `[0, t]`.
    pub pressure_norm: f64,
    pub work: f64,
    pub cross_integral: f64,
    pub drift_integral: f64,
}

impl DiagnosticsRecord {
    pub fn csv_row(&self) -> String {
        [
            self.t,
            self.mass,
            self.energy,
            self.diss_exact,
            self.diss_lower,
            self.bd_entropy,
            self.bd_cross_rate,
            self.sqrt_rho_h1,
            self.log_moment,
            self.u_lm,
            self.hbar_grad_l2,
        ]
        .iter()
        .map(|v| format!("{v:.16e}"))
        .collect::<Vec<_>>()
        .join(",")
    }

    pub fn integrals_row(&self) -> String {
        [
            self.t,
            self.work,
            self.cross_integral,
            self.pressure_norm,
            self.drift_integral,
            self.extra_moment,
        ]
        .iter()
        .map(|v| format!("{v:.16e}"))
        .collect::<Vec<_>>()
        .join(",")
    }

    /// `bd_entropy + ∫ cross rate`
    pub fn bd_total(&self) -> f64 {
        self.bd_entropy + self.cross_integral
    }
}

/// Writes `diagnostics.csv`-style output with the fixed header.
pub fn write_csv(mut out: impl Write, records: &[DiagnosticsRecord]) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

pub fn write_integrals_csv(mut out: impl Write, records: &[DiagnosticsRecord]) -> std::io::Result<()> {
    writeln!(out, "{INTEGRALS_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.integrals_row())?;
    }
    Ok(())
}
