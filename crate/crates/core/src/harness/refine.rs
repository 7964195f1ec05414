use rayon::prelude::*;
use serde::Serialize;

use super::config::{LevelSpec, ResidualTest, ScenarioConfig};
use super::schedule::RefinementSchedule;
use crate::coefficients::{CoefficientModel, RegularizationParams};
use crate::diagnostics::{DiagnosticsRecord, RunTotals};
use crate::error::{Error, Result};
use crate::initial_data::{sample_on_grid, truncate_and_floor, Mollifier};
use crate::solver::{self, init_state, RadialState, RunPlan};
use crate::weak_residual::{
    boundary_term, epsilon_envelope, fit_envelope_constant, mass_weak_residual, momentum_weak_residual,
    ExtendedSolution, ResidualOptions,
};

/// Regularized initial state of one level.
pub fn initial_state(
    cfg: &ScenarioConfig,
    spec: &LevelSpec,
) -> Result<(RegularizationParams, RadialState)> {
    let params = cfg.params(spec)?;
    let data = truncate_and_floor(&cfg.profile()?, &params)?;
    let grid = sample_on_grid(&data, &Mollifier::new(spec.delta), cfg.n_dim, spec.cells)?;
    let state = init_state(&grid, &params)?;
    Ok((params, state))
}

/// Everything kept from one level's run.
#[derive(Debug)]
pub struct LevelRun {
    pub index: usize,
    pub spec: LevelSpec,
    pub params: RegularizationParams,
    pub records: Vec<DiagnosticsRecord>,
    /// States at the record times.
    pub ticks: Vec<RadialState>,
    /// Every accepted step when `run.every_step` is set, otherwise the ticks.
    pub history: Vec<RadialState>,
    pub totals: RunTotals,
    pub abort: Option<Error>,
}

impl LevelRun {
    pub fn abort_reason(&self) -> Option<String> {
        self.abort.as_ref().map(|e| e.to_string())
    }
}

/// Runs one level to `run.t_end`. A solver abort is kept in the result.
pub fn run_level(cfg: &ScenarioConfig, model: &CoefficientModel, index: usize, spec: &LevelSpec) -> Result<LevelRun> {
    let (params, state) = initial_state(cfg, spec)?;
    let plan = RunPlan {
        t_end: cfg.run.t_end,
        observer_dt: cfg.run.observer_dt,
        every_step: cfg.run.every_step,
        diagnostics: cfg.diagnostics(),
    };
    let mut history: Vec<RadialState> = Vec::new();
    let mut keep = |s: &RadialState, _: &DiagnosticsRecord| history.push(s.clone());
    let out = solver::run_until_abort(state, model, &params, &cfg.step_control(), &plan, &mut [&mut keep])?;
    let records = out.records;
    let mut k = 0;
    let ticks = records
        .iter()
        .filter_map(|r| {
            while k < history.len() && history[k].time < r.t {
                k += 1;
            }
            history.get(k).filter(|s| s.time == r.t).cloned()
        })
        .collect();
    Ok(LevelRun {
        index,
        spec: *spec,
        params,
        records,
        ticks,
        history,
        totals: out.totals,
        abort: out.abort,
    })
}

/// Zero-extended `ρ`, `ρu` and `√ρ u` at the midpoints of `[0, n]`.
#[allow(clippy::needless_range_loop)]
fn sample_fields(s: &RadialState, n: f64, samples: usize) -> [Vec<f64>; 3] {
    let k = s.cells();
    let dr = n / samples as f64;
    let mut out = [vec![0.0; samples], vec![0.0; samples], vec![0.0; samples]];
    let mut i = 0;
    for q in 0..samples {
        let r = (q as f64 + 0.5) * dr;
        if r < s.node_r[0] || r > s.node_r[k] {
            continue;
        }
        while i + 1 < k && s.node_r[i + 1] < r {
            i += 1;
        }
        let (r0, r1) = (s.node_r[i], s.node_r[i + 1]);
        let w = (r - r0) / (r1 - r0);
        let u = (1.0 - w) * s.node_u[i] + w * s.node_u[i + 1];
        let rho = s.cell_rho[i];
        out[0][q] = rho;
        out[1][q] = rho * u;
        out[2][q] = rho.sqrt() * u;
    }
    out
}

/// Distances between consecutive levels on `B_n`, over their common ticks.
#[derive(Debug, Clone, Serialize)]
pub struct LevelDistance {
    pub coarse: usize,
    pub fine: usize,
    pub common_ticks: usize,
    /// `max_t ‖ρ^j − ρ^{j+1}‖_{L¹(B_n)}`
    pub rho_l1_max: f64,
    /// `‖ρ^j u^j − ρ^{j+1}u^{j+1}‖_{L²(0,T; L^β(B_n))}`
    pub momentum_l2_lbeta: f64,
    /// `‖√ρ^j u^j − √ρ^{j+1}u^{j+1}‖_{L²(0,T; L²(B_n))}`
    pub sqrt_rho_u_l2: f64,
}

/// `(t, ‖Δρ‖_{L¹}, ‖Δ(ρu)‖_{L^β}, ‖Δ(√ρu)‖²_{L²})` at one tick.
type TickNorms = (f64, f64, f64, f64);

pub fn level_distance(a: &LevelRun, b: &LevelRun, n: f64, samples: usize, beta: f64, n_dim: usize) -> LevelDistance {
    let dr = n / samples as f64;
    let weights: Vec<f64> = (0..samples)
        .map(|q| ((q as f64 + 0.5) * dr).powi(n_dim as i32 - 1) * dr)
        .collect();
    let mut per_tick = Vec::new();
    let mut j = 0;
    for sa in &a.ticks {
        while j < b.ticks.len() && b.ticks[j].time < sa.time {
            j += 1;
        }
        let Some(sb) = b.ticks.get(j).filter(|s| s.time == sa.time) else {
            continue;
        };
        let fa = sample_fields(sa, n, samples);
        let fb = sample_fields(sb, n, samples);
        let norm = |c: usize, p: f64| -> f64 {
            fa[c]
                .iter()
                .zip(&fb[c])
                .zip(&weights)
                .map(|((x, y), w)| w * (x - y).abs().powf(p))
                .sum::<f64>()
        };
        per_tick.push((sa.time, norm(0, 1.0), norm(1, beta).powf(1.0 / beta), norm(2, 2.0)));
    }
    let trap = |f: &dyn Fn(&TickNorms) -> f64| -> f64 {
        per_tick
            .windows(2)
            .map(|w| 0.5 * (w[1].0 - w[0].0) * (f(&w[0]) + f(&w[1])))
            .sum()
    };
    LevelDistance {
        coarse: a.index,
        fine: b.index,
        common_ticks: per_tick.len(),
        rho_l1_max: per_tick.iter().map(|t| t.1).fold(0.0, f64::max),
        momentum_l2_lbeta: trap(&|t| t.2 * t.2).sqrt(),
        sqrt_rho_u_l2: trap(&|t| t.3).sqrt(),
    }
}

/// Per-level summary: parameters, componentwise maxima over ticks, and the
/// final record.
#[derive(Debug, Clone, Serialize)]
pub struct LevelSummary {
    pub level: usize,
    pub epsilon: f64,
    #[serde(rename = "R")]
    pub outer_radius: f64,
    pub delta: f64,
    #[serde(rename = "K")]
    pub cells: usize,
    pub theta: f64,
    pub steps: usize,
    pub t_reached: f64,
    pub abort: Option<String>,
    pub max: Option<DiagnosticsRecord>,
    pub last: Option<DiagnosticsRecord>,
    /// `max_t (bd_entropy + ∫ cross rate)`
    pub max_bd_total: f64,
    pub initial_bd_entropy: f64,
    pub min_diss_gap: f64,
    pub min_cross_rate: f64,
}

fn componentwise_max(records: &[DiagnosticsRecord]) -> Option<DiagnosticsRecord> {
    let mut it = records.iter();
    let mut m = *it.next()?;
    for r in it {
        macro_rules! up {
            ($($f:ident),*) => { $( m.$f = m.$f.max(r.$f); )* };
        }
        up!(t, mass, energy, diss_exact, diss_lower, bd_entropy, bd_cross_rate, sqrt_rho_h1, log_moment, u_lm,
            hbar_grad_l2, extra_moment, pressure_norm, work, cross_integral, drift_integral);
    }
    Some(m)
}

pub fn summarize(run: &LevelRun) -> LevelSummary {
    let rec = &run.records;
    LevelSummary {
        level: run.index,
        epsilon: run.spec.epsilon,
        outer_radius: run.spec.outer_radius,
        delta: run.spec.delta,
        cells: run.spec.cells,
        theta: run.params.theta(),
        steps: run.totals.steps,
        t_reached: rec.last().map_or(0.0, |r| r.t),
        abort: run.abort_reason(),
        max: componentwise_max(rec),
        last: rec.last().copied(),
        max_bd_total: rec.iter().map(|r| r.bd_total()).fold(f64::NEG_INFINITY, f64::max),
        initial_bd_entropy: rec.first().map_or(f64::NAN, |r| r.bd_entropy),
        min_diss_gap: rec
            .iter()
            .map(|r| r.diss_exact - r.diss_lower)
            .fold(f64::INFINITY, f64::min),
        min_cross_rate: rec.iter().map(|r| r.bd_cross_rate).fold(f64::INFINITY, f64::min),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FlagStatus {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

/// One policy check of the refinement study.
#[derive(Debug, Clone, Serialize)]
pub struct Flag {
    pub check: String,
    pub level: Option<usize>,
    pub value: f64,
    pub threshold: f64,
    pub status: FlagStatus,
}

/// Diagnostics whose maxima must stay within twice the level-0 value.
pub const BOUNDED_METRICS: [&str; 5] = ["energy", "bd_total", "sqrt_rho_h1", "log_moment", "pressure_norm"];

fn metric(s: &LevelSummary, name: &str) -> Option<f64> {
    let m = s.max.as_ref()?;
    Some(match name {
        "energy" => m.energy,
        "bd_total" => s.max_bd_total,
        "sqrt_rho_h1" => m.sqrt_rho_h1,
        "log_moment" => m.log_moment,
        "pressure_norm" => m.pressure_norm,
        _ => return None,
    })
}

/// Bound checks (`max ≤ 2×` level 0 for levels ≥ 1), completion checks, and
/// the decrease of each distance between the last two level pairs.
pub fn flags(levels: &[LevelSummary], distances: &[LevelDistance]) -> Vec<Flag> {
    let mut out = Vec::new();
    let status = |ok: bool| if ok { FlagStatus::Pass } else { FlagStatus::Fail };
    for s in levels {
        out.push(Flag {
            check: "completed".into(),
            level: Some(s.level),
            value: s.t_reached,
            threshold: f64::NAN,
            status: status(s.abort.is_none()),
        });
    }
    for name in BOUNDED_METRICS {
        let Some(base) = levels.first().and_then(|s| metric(s, name)) else {
            continue;
        };
        for s in levels.iter().skip(1) {
            let v = metric(s, name).unwrap_or(f64::NAN);
            out.push(Flag {
                check: format!("bound:{name}"),
                level: Some(s.level),
                value: v,
                threshold: 2.0 * base,
                status: status(v <= 2.0 * base),
            });
        }
    }
    if distances.len() >= 2 {
        let (p, l) = (&distances[distances.len() - 2], &distances[distances.len() - 1]);
        for (name, a, b) in [
            ("decrease:rho_l1_max", p.rho_l1_max, l.rho_l1_max),
            ("decrease:momentum_l2_lbeta", p.momentum_l2_lbeta, l.momentum_l2_lbeta),
            ("decrease:sqrt_rho_u_l2", p.sqrt_rho_u_l2, l.sqrt_rho_u_l2),
        ] {
            out.push(Flag {
                check: name.into(),
                level: Some(l.fine),
                value: b,
                threshold: a,
                status: status(b < a),
            });
        }
    }
    out
}

/// One row of `residuals.csv` plus the measured detail behind it.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualRow {
    pub level: usize,
    pub test_id: String,
    pub t1: f64,
    pub t2: f64,
    pub mass_residual: f64,
    pub momentum_residual: f64,
    /// NaN in exterior mode, where the inner wall does not shrink.
    pub boundary_term: f64,
    /// `C√ε_j·n^{N(1−θ)/2}` with `C` fitted to the level-0 measurement.
    pub epsilon_terms_bound: f64,
    pub epsilon_terms: f64,
    pub mass_relative: f64,
    pub momentum_relative: f64,
    pub momentum_base_form: f64,
}

pub const RESIDUALS_HEADER: &str =
    "level,test_id,t1,t2,mass_residual,momentum_residual,boundary_term,epsilon_terms_bound";
pub const RESIDUALS_DETAIL_HEADER: &str =
    "level,test_id,epsilon_terms,mass_relative,momentum_relative,momentum_base_form";

impl ResidualRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.level,
            self.test_id,
            self.t1,
            self.t2,
            self.mass_residual,
            self.momentum_residual,
            self.boundary_term,
            self.epsilon_terms_bound
        )
    }

    pub fn detail_row(&self) -> String {
        format!(
            "{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.level, self.test_id, self.epsilon_terms, self.mass_relative, self.momentum_relative, self.momentum_base_form
        )
    }
}

/// A level's stored solution, ready for residual evaluation.
pub struct ResidualInput<'a> {
    pub level: usize,
    pub params: RegularizationParams,
    pub solution: &'a ExtendedSolution,
}

/// Residual rows for every level and test. The ε-envelope constant of each
/// test is fitted on the first level given.
pub fn residual_rows(
    inputs: &[ResidualInput<'_>],
    tests: &[ResidualTest],
    model: &CoefficientModel,
    t_end: f64,
    opts: &ResidualOptions,
) -> Result<Vec<ResidualRow>> {
    let per_level: Vec<Vec<ResidualRow>> = inputs
        .par_iter()
        .map(|inp| {
            tests
                .iter()
                .map(|t| {
                    let (t1, t2) = t.window(t_end);
                    let f = &t.function;
                    let mass = mass_weak_residual(inp.solution, f, t1, t2, opts)?;
                    let mom = momentum_weak_residual(inp.solution, f, model, &inp.params, t1, t2, opts)?;
                    let eb = if inp.params.exterior() {
                        f64::NAN
                    } else {
                        boundary_term(inp.solution, f, model, &inp.params, t1, t2)?
                    };
                    Ok(ResidualRow {
                        level: inp.level,
                        test_id: f.id.clone(),
                        t1,
                        t2,
                        mass_residual: mass.residual,
                        momentum_residual: mom.residual,
                        boundary_term: eb,
                        epsilon_terms_bound: f64::NAN,
                        epsilon_terms: mom.epsilon_terms,
                        mass_relative: mass.relative(),
                        momentum_relative: mom.relative(),
                        momentum_base_form: mom.base_form(),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<ResidualRow> = per_level.into_iter().flatten().collect();
    if let Some(first) = inputs.first() {
        let n_dim = first.params.n_dim();
        for t in tests {
            let n = t.function.radial.support().1;
            let theta = first.params.theta();
            let c = rows
                .iter()
                .find(|r| r.level == first.level && r.test_id == t.function.id)
                .map(|r| fit_envelope_constant(r.epsilon_terms, first.params.epsilon(), n, n_dim, theta));
            if let Some(c) = c {
                for (r, inp) in rows
                    .iter_mut()
                    .filter(|r| r.test_id == t.function.id)
                    .filter_map(|r| {
                        let lvl = r.level;
                        inputs.iter().find(|i| i.level == lvl).map(|i| (r, i))
                    })
                {
                    r.epsilon_terms_bound = epsilon_envelope(c, inp.params.epsilon(), n, n_dim, inp.params.theta());
                }
            }
        }
    }
    Ok(rows)
}

/// Output of [`run_refinement`]. `per_level`, `distances` and `flags` are
/// the keys of `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RefinementReport {
    pub scenario: String,
    pub schedule: RefinementSchedule,
    pub per_level: Vec<LevelSummary>,
    pub distances: Vec<LevelDistance>,
    pub flags: Vec<Flag>,
    pub residuals: Vec<ResidualRow>,
    pub passed: bool,
}

/// Report plus the raw level runs (for writing snapshots and CSVs).
pub struct Refinement {
    pub report: RefinementReport,
    pub runs: Vec<LevelRun>,
}

/// Validates the schedule, runs all levels in parallel, and assembles the report.
pub fn run_refinement(cfg: &ScenarioConfig) -> Result<Refinement> {
    let schedule = RefinementSchedule::from_config(cfg, 2)?;
    let model = cfg.model()?;
    let runs: Vec<LevelRun> = schedule
        .levels
        .par_iter()
        .enumerate()
        .map(|(j, spec)| run_level(cfg, &model, j, spec))
        .collect::<Result<Vec<_>>>()?;
    let per_level: Vec<LevelSummary> = runs.iter().map(summarize).collect();
    let distances: Vec<LevelDistance> = runs
        .windows(2)
        .map(|w| level_distance(&w[0], &w[1], cfg.eval.ball_n, cfg.eval.samples, cfg.eval.beta, cfg.n_dim))
        .collect();
    let flags = flags(&per_level, &distances);

    let solutions: Vec<Option<ExtendedSolution>> = runs
        .iter()
        .map(|r| {
            if r.abort.is_some() || r.history.len() < 2 {
                None
            } else {
                ExtendedSolution::new(r.history.clone()).ok()
            }
        })
        .collect();
    let inputs: Vec<ResidualInput<'_>> = runs
        .iter()
        .zip(&solutions)
        .filter_map(|(r, s)| {
            s.as_ref().map(|solution| ResidualInput {
                level: r.index,
                params: r.params,
                solution,
            })
        })
        .collect();
    let tests = cfg.residual_tests();
    let residuals = if cfg.run.t_end > 0.0 {
        residual_rows(
            &inputs,
            &tests,
            &model,
            cfg.run.t_end,
            &ResidualOptions {
                gl_points: cfg.eval.gl_points,
            },
        )?
    } else {
        Vec::new()
    };
    let passed = flags.iter().all(|f| f.status == FlagStatus::Pass);
    Ok(Refinement {
        report: RefinementReport {
            scenario: cfg.label(),
            schedule,
            per_level,
            distances,
            flags,
            residuals,
            passed,
        },
        runs,
    })
}
