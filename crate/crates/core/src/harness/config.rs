//! Scenario files: TOML with dotted keys.
//!
//! ```toml
//! gamma = 2.0
//! N = 2
//! alpha = 0.5
//! coeff.kind = "saint_venant"        # or "power" (c, p, nu) / "table" (table_path, nu)
//! init.kind = "gaussian"             # or "bump" / "table" / "expr"
//! init.base = 0.5
//! schedule.levels = 3
//! run.t_end = 0.5
//! eval.ball_n = 1.0
//! ```
//!
//! Relative paths are resolved against the directory of the scenario file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coefficients::{CoefficientModel, RegularizationParams, TabulatedLaw, ViscosityLaw};
use crate::diagnostics::DiagnosticsConfig;
use crate::error::{Error, Result};
use crate::initial_data::{BumpParams, GaussianParams, RadialProfile};
use crate::solver::{Scheme, StepControl};
use crate::weak_residual::TestFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub gamma: f64,
    #[serde(rename = "N")]
    pub n_dim: usize,
    pub alpha: f64,
    /// Single-level parameters for `simulate`; level 0 of the schedule when absent.
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default, rename = "R")]
    pub outer_radius: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub exterior: bool,
    pub coeff: CoeffConfig,
    pub init: InitConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    /// Test functions for weak residuals; a default set is used when empty.
    #[serde(default)]
    pub test: Vec<ResidualTest>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffKind {
    SaintVenant,
    Power,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffConfig {
    pub kind: CoeffKind,
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub nu: Option<f64>,
    #[serde(default)]
    pub nu1: Option<f64>,
    #[serde(default)]
    pub nu2: Option<f64>,
    #[serde(default)]
    pub table_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitConfig {
    Gaussian {
        base: f64,
        amp: f64,
        k: f64,
        center: f64,
        mom_amp: f64,
        mom_k: f64,
    },
    Bump {
        base: f64,
        amp: f64,
        center: f64,
        width: f64,
        mom_amp: f64,
    },
    Table {
        table_path: PathBuf,
        #[serde(default)]
        momentum_path: Option<PathBuf>,
    },
    Expr {
        rho: String,
        #[serde(default = "zero_expr")]
        m: String,
    },
}

fn zero_expr() -> String {
    "0".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelSpec {
    pub epsilon: f64,
    #[serde(rename = "R")]
    pub outer_radius: f64,
    pub delta: f64,
    #[serde(rename = "K")]
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_eps0")]
    pub eps0: f64,
    #[serde(default = "default_delta0")]
    pub delta0: f64,
    #[serde(default = "default_k0", rename = "K0")]
    pub k0: usize,
    /// Explicit per-level parameters; replaces the geometric rule.
    #[serde(default)]
    pub explicit: Vec<LevelSpec>,
}

fn default_levels() -> usize {
    3
}
fn default_eps0() -> f64 {
    0.1
}
fn default_delta0() -> f64 {
    0.05
}
fn default_k0() -> usize {
    256
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            levels: default_levels(),
            eps0: default_eps0(),
            delta0: default_delta0(),
            k0: default_k0(),
            explicit: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_observer_dt")]
    pub observer_dt: f64,
    #[serde(default = "default_dt_max")]
    pub dt_max: f64,
    /// Grid size for `simulate` when `epsilon` is given explicitly.
    #[serde(default, rename = "K")]
    pub cells: Option<usize>,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "default_true")]
    pub visc_theta_implicit: bool,
    /// Keep a snapshot after every step for residuals (in memory only).
    #[serde(default)]
    pub every_step: bool,
}

fn default_t_end() -> f64 {
    0.5
}
fn default_cfl() -> f64 {
    0.5
}
fn default_observer_dt() -> f64 {
    0.05
}
fn default_dt_max() -> f64 {
    1e-2
}
fn default_true() -> bool {
    true
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            t_end: default_t_end(),
            cfl: default_cfl(),
            observer_dt: default_observer_dt(),
            dt_max: default_dt_max(),
            cells: None,
            scheme: Scheme::default(),
            visc_theta_implicit: true,
            every_step: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    #[serde(default = "default_ball")]
    pub ball_n: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    /// Midpoints of `[0, n]` used for inter-level distances.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_gl")]
    pub gl_points: usize,
}

fn default_ball() -> f64 {
    1.0
}
fn default_beta() -> f64 {
    1.5
}
fn default_eta() -> f64 {
    0.2
}
fn default_samples() -> usize {
    4096
}
fn default_gl() -> usize {
    4
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            ball_n: default_ball(),
            beta: default_beta(),
            eta: default_eta(),
            samples: default_samples(),
            gl_points: default_gl(),
        }
    }
}

/// A test function with an optional time window (defaults to `[0, t_end]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualTest {
    #[serde(flatten)]
    pub function: TestFunction,
    #[serde(default)]
    pub t1: Option<f64>,
    #[serde(default)]
    pub t2: Option<f64>,
}

impl ResidualTest {
    pub fn window(&self, t_end: f64) -> (f64, f64) {
        (self.t1.unwrap_or(0.0), self.t2.unwrap_or(t_end))
    }
}

/// `[[test]]` tables of a stand-alone tests file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestsFile {
    pub test: Vec<ResidualTest>,
}

impl TestsFile {
    pub fn parse(text: &str) -> Result<Self> {
        let f: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if f.test.is_empty() {
            return Err(Error::Config("tests file lists no [[test]]".into()));
        }
        for t in &f.test {
            t.function.radial.validate()?;
        }
        Ok(f)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, dir)
    }

    fn check(&self) -> Result<()> {
        if self.n_dim < 2 {
            return Err(Error::Config(format!("N = {} must be at least 2", self.n_dim)));
        }
        if !(self.gamma >= 1.0) {
            return Err(Error::Config(format!("gamma = {} must be at least 1", self.gamma)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha = {} must lie in (0, 1)", self.alpha)));
        }
        let r = &self.run;
        if !(r.t_end >= 0.0 && r.cfl > 0.0 && r.observer_dt >= 0.0 && r.dt_max > 0.0) {
            return Err(Error::Config(
                "run.t_end, run.observer_dt must be >= 0 and run.cfl, run.dt_max > 0".into(),
            ));
        }
        let e = &self.eval;
        if !(e.ball_n > 0.0) || e.samples == 0 || e.gl_points == 0 {
            return Err(Error::Config("eval.ball_n, eval.samples and eval.gl_points must be positive".into()));
        }
        if !(e.beta >= 1.0 && e.beta < 2.0) {
            return Err(Error::Config(format!("eval.beta = {} must lie in [1, 2)", e.beta)));
        }
        if !(e.eta > 0.0 && e.eta < 1.0) {
            return Err(Error::Config(format!("eval.eta = {} must lie in (0, 1)", e.eta)));
        }
        for t in &self.test {
            t.function.radial.validate()?;
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| "scenario".into())
    }

    pub fn model(&self) -> Result<CoefficientModel> {
        let c = &self.coeff;
        let need = |v: Option<f64>, key: &str| v.ok_or_else(|| Error::Config(format!("coeff.{key} is required for this kind")));
        let mut model = match c.kind {
            CoeffKind::SaintVenant => {
                let mut m = CoefficientModel::saint_venant();
                if let Some(nu) = c.nu {
                    m.nu = nu;
                }
                m
            }
            CoeffKind::Power => {
                let (cc, p) = (need(c.c, "c")?, need(c.p, "p")?);
                let mut m = CoefficientModel::single_power(cc, p, self.n_dim, need(c.nu, "nu")?, self.gamma);
                if let Some(v) = c.nu1 {
                    m.nu1 = v;
                }
                if let Some(v) = c.nu2 {
                    m.nu2 = v;
                }
                m
            }
            CoeffKind::Table => {
                let path = c
                    .table_path
                    .as_ref()
                    .ok_or_else(|| Error::Config("coeff.table_path is required for kind = \"table\"".into()))?;
                let law = TabulatedLaw::from_file(&self.resolve(path))?;
                CoefficientModel {
                    name: format!("table {}", path.display()),
                    law: ViscosityLaw::Tabulated(law),
                    added: Vec::new(),
                    nu: need(c.nu, "nu")?,
                    nu1: need(c.nu1, "nu1")?,
                    nu2: need(c.nu2, "nu2")?,
                    gamma: self.gamma,
                }
            }
        };
        if c.kind != CoeffKind::Power {
            if let Some(v) = c.nu1 {
                model.nu1 = v;
            }
            if let Some(v) = c.nu2 {
                model.nu2 = v;
            }
        }
        if c.kind == CoeffKind::SaintVenant && (c.c.is_some() || c.p.is_some()) {
            return Err(Error::Config("coeff.c and coeff.p do not apply to saint_venant".into()));
        }
        model.gamma = self.gamma;
        Ok(model)
    }

    pub fn profile(&self) -> Result<RadialProfile> {
        Ok(match &self.init {
            InitConfig::Gaussian {
                base,
                amp,
                k,
                center,
                mom_amp,
                mom_k,
            } => RadialProfile::gaussian(GaussianParams {
                base: *base,
                amp: *amp,
                k: *k,
                center: *center,
                mom_amp: *mom_amp,
                mom_k: *mom_k,
            }),
            InitConfig::Bump {
                base,
                amp,
                center,
                width,
                mom_amp,
            } => RadialProfile::bump(BumpParams {
                base: *base,
                amp: *amp,
                center: *center,
                width: *width,
                mom_amp: *mom_amp,
            }),
            InitConfig::Table {
                table_path,
                momentum_path,
            } => RadialProfile::from_tables(
                &self.resolve(table_path),
                momentum_path.as_ref().map(|p| self.resolve(p)).as_deref(),
            )?,
            InitConfig::Expr { rho, m } => RadialProfile::from_expressions(rho, m)?,
        })
    }

    pub fn step_control(&self) -> StepControl {
        StepControl {
            cfl: self.run.cfl,
            dt_max: self.run.dt_max,
            visc_theta_implicit: self.run.visc_theta_implicit,
            scheme: self.run.scheme,
            ..StepControl::default()
        }
    }

    pub fn diagnostics(&self) -> DiagnosticsConfig {
        DiagnosticsConfig {
            beta: self.eval.beta,
            eta: self.eval.eta,
        }
    }

    /// Level for `simulate`: the top-level `epsilon`/`R`/`delta`/`run.K`
    /// when `epsilon` is set, otherwise level 0 of the schedule.
    pub fn single_level(&self) -> Result<LevelSpec> {
        match self.epsilon {
            Some(eps) => Ok(LevelSpec {
                epsilon: eps,
                outer_radius: self
                    .outer_radius
                    .unwrap_or_else(|| eps.powf(-1.0 / (2.0 * self.n_dim as f64))),
                delta: self.delta.unwrap_or(self.schedule.delta0),
                cells: self.run.cells.unwrap_or(self.schedule.k0),
            }),
            None => Ok(super::schedule::RefinementSchedule::from_config(self, 1)?.levels[0]),
        }
    }

    pub fn params(&self, level: &LevelSpec) -> Result<RegularizationParams> {
        RegularizationParams::new(
            self.n_dim,
            self.alpha,
            level.epsilon,
            level.outer_radius,
            level.delta,
            self.exterior,
        )
    }

    /// The configured tests, or three defaults scaled to the evaluation ball:
    /// an interior bump, a time-decaying bump, and an origin profile whose
    /// value at the inner wall exposes the boundary term.
    pub fn residual_tests(&self) -> Vec<ResidualTest> {
        if !self.test.is_empty() {
            return self.test.clone();
        }
        default_tests(self.eval.ball_n, self.run.t_end)
    }
}

pub fn default_tests(n: f64, t_end: f64) -> Vec<ResidualTest> {
    use crate::weak_residual::{RadialShape, TemporalShape};
    let decay = if t_end > 0.0 {
        TemporalShape::Decay { horizon: t_end }
    } else {
        TemporalShape::Constant
    };
    [
        TestFunction::new("bump", RadialShape::Bump { a: 0.4 * n, b: n }, TemporalShape::Constant),
        TestFunction::new("bump_decay", RadialShape::Bump { a: 0.2 * n, b: 0.8 * n }, decay),
        TestFunction::new("origin", RadialShape::Origin { n }, decay),
    ]
    .into_iter()
    .map(|function| ResidualTest {
        function,
        t1: None,
        t2: None,
    })
    .collect()
}
