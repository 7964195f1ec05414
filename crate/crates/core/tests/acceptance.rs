//! Acceptance run on the bundled reference and isothermal scenarios.
//! Prints one PASS/FAIL line per criterion and exits nonzero on any
//! failure not listed in `KNOWN_FAILURES`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use radflow::coefficients::{admissibility, v1, v2};
use radflow::diagnostics::dissipation_exact;
use radflow::harness::output::write_refinement;
use radflow::harness::refine::{residual_rows, run_level, FlagStatus, ResidualInput, ResidualRow};
use radflow::harness::{run_refinement, Refinement, RefinementSchedule, ScenarioConfig};
use radflow::solver::{self, RadialState};
use radflow::weak_residual::{
    boundary_term, mass_weak_residual, momentum_weak_residual, ExtendedSolution, RadialShape, ResidualOptions,
    TemporalShape, TestFunction,
};
use radflow::{CoefficientModel, RegularizationParams, StepControl};

/// Criteria that fail on the reference scenario for reasons recorded in the
/// project notes. They are still evaluated and printed; the run only insists
/// that they keep failing so that a change in behaviour gets noticed.
const KNOWN_FAILURES: &[usize] = &[5];

struct Line {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn config(name: &str) -> ScenarioConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ScenarioConfig::load(&path).unwrap()
}

fn mass_conservation(r: &Refinement) -> Line {
    let mut worst = 0.0f64;
    for run in &r.runs {
        let m0 = run.records[0].mass;
        for rec in &run.records {
            worst = worst.max((rec.mass - m0).abs() / m0);
        }
    }
    Line {
        id: 1,
        name: "mass conservation",
        pass: worst <= 1e-13,
        detail: format!("max relative drift {worst:.3e} (tol 1e-13)"),
    }
}

fn energy_inequality(r: &Refinement) -> Line {
    let mut worst = f64::NEG_INFINITY;
    let mut gap = f64::INFINITY;
    for run in &r.runs {
        let e0 = run.records[0].energy;
        for rec in &run.records {
            worst = worst.max((rec.energy + rec.work) / (e0 * (1.0 + 1e-6)) - 1.0);
            gap = gap.min(rec.diss_exact - rec.diss_lower);
        }
    }
    Line {
        id: 2,
        name: "energy inequality",
        pass: worst <= 0.0 && gap >= -1e-10,
        detail: format!("max (E+W)/(E0(1+1e-6)) - 1 = {worst:.3e}, min D_exact - D_lower = {gap:.3e}"),
    }
}

fn isothermal() -> Line {
    let mut cfg = config("isothermal.cfg");
    cfg.run.every_step = false;
    cfg.test.clear();
    let r = run_refinement(&cfg).unwrap();
    let mut worst = f64::NEG_INFINITY;
    let mut finite = true;
    let mut completed = true;
    for run in &r.runs {
        completed &= run.abort.is_none();
        let e0 = run.records[0].energy;
        for rec in &run.records {
            finite &= rec.energy.is_finite();
            worst = worst.max((rec.energy + rec.work - rec.drift_integral) / (e0 * (1.0 + 1e-5)) - 1.0);
        }
    }
    Line {
        id: 3,
        name: "isothermal relative entropy",
        pass: finite && completed && worst <= 0.0,
        detail: format!("finite {finite}, completed {completed}, max (E+W-drift)/(E0(1+1e-5)) - 1 = {worst:.3e}"),
    }
}

fn bd_entropy(r: &Refinement) -> Line {
    let mut worst = f64::NEG_INFINITY;
    let mut cross = f64::INFINITY;
    for s in &r.report.per_level {
        worst = worst.max(s.max_bd_total / (2.0 * s.initial_bd_entropy));
        cross = cross.min(s.min_cross_rate);
    }
    Line {
        id: 4,
        name: "BD entropy bound",
        pass: worst <= 1.0 && cross >= -1e-10,
        detail: format!("max (bd + int cross)/(2 bd_0) = {worst:.4}, min cross_rate = {cross:.3e}"),
    }
}

fn uniform_bounds(r: &Refinement) -> Line {
    let mut failed = Vec::new();
    let mut worst: BTreeMap<&str, f64> = BTreeMap::new();
    for f in &r.report.flags {
        let Some(metric) = f.check.strip_prefix("bound:") else {
            continue;
        };
        if metric == "bd_total" {
            continue;
        }
        let ratio = f.value / f.threshold * 2.0;
        let e = worst.entry(metric).or_insert(0.0);
        *e = e.max(ratio);
        if f.status != FlagStatus::Pass && !failed.contains(&metric) {
            failed.push(metric);
        }
    }
    let ratios: Vec<String> = worst.iter().map(|(k, v)| format!("{k} {v:.2}")).collect();
    Line {
        id: 5,
        name: "uniform-in-j bounds",
        pass: failed.is_empty(),
        detail: format!("max level-j / level-0 ratios: {} (limit 2); failing: {failed:?}", ratios.join(", ")),
    }
}

fn convergence(r: &Refinement) -> Line {
    let d = &r.report.distances;
    let factors = [
        d[0].rho_l1_max / d[1].rho_l1_max,
        d[0].momentum_l2_lbeta / d[1].momentum_l2_lbeta,
        d[0].sqrt_rho_u_l2 / d[1].sqrt_rho_u_l2,
    ];
    Line {
        id: 6,
        name: "inter-level convergence",
        pass: d.len() == 2 && factors.iter().all(|f| *f >= 1.3),
        detail: format!(
            "decrease factors rho {:.2}, momentum {:.2}, sqrt(rho)u {:.2} (min 1.3)",
            factors[0], factors[1], factors[2]
        ),
    }
}

fn level0_rows(cfg: &ScenarioConfig, cells: usize) -> Vec<ResidualRow> {
    let model = cfg.model().unwrap();
    let mut spec = RefinementSchedule::from_config(cfg, 2).unwrap().levels[0];
    spec.cells = cells;
    let run = run_level(cfg, &model, 0, &spec).unwrap();
    let sol = ExtendedSolution::new(run.history.clone()).unwrap();
    let inputs = [ResidualInput {
        level: 0,
        params: run.params,
        solution: &sol,
    }];
    let opts = ResidualOptions {
        gl_points: cfg.eval.gl_points,
    };
    residual_rows(&inputs, &cfg.residual_tests(), &model, cfg.run.t_end, &opts).unwrap()
}

fn weak_residuals(cfg: &ScenarioConfig, r: &Refinement) -> Line {
    let coarse = level0_rows(cfg, 256);
    let fine = level0_rows(cfg, 512);
    let mut worst_ratio = 0.0f64;
    for (c, f) in coarse.iter().zip(&fine) {
        worst_ratio = worst_ratio
            .max(f.mass_residual.abs() / c.mass_residual.abs())
            .max(f.momentum_residual.abs() / c.momentum_residual.abs());
    }
    let rows = &r.report.residuals;
    let mut monotone = true;
    for t in cfg.residual_tests() {
        let eb: Vec<f64> = rows
            .iter()
            .filter(|row| row.test_id == t.function.id)
            .map(|row| row.boundary_term.abs())
            .collect();
        let touches_wall = eb.iter().any(|v| *v > 0.0);
        if touches_wall {
            monotone &= eb.windows(2).all(|w| w[1] < w[0]);
        }
    }
    let envelope = rows
        .iter()
        .all(|row| row.epsilon_terms.abs() <= row.epsilon_terms_bound * (1.0 + 1e-9));
    Line {
        id: 7,
        name: "weak residuals",
        pass: worst_ratio <= 0.6 && monotone && envelope,
        detail: format!(
            "max K=512/K=256 ratio {worst_ratio:.3} (limit 0.6), boundary term decreasing {monotone}, envelope {envelope}"
        ),
    }
}

fn static_state() -> Line {
    let model = CoefficientModel::saint_venant();
    let params = RegularizationParams::new(2, 0.5, 0.1, 1.5, 0.05, false).unwrap();
    let s0 = RadialState::uniform(2, 0.1, 1.5, 64, 0.7, 0.0).unwrap();
    let mut states = vec![s0.clone()];
    let mut work = 0.0f64;
    for _ in 0..100 {
        let out = solver::step(states.last().unwrap(), &model, &params, &StepControl::default(), f64::INFINITY)
            .unwrap();
        work = work.max(out.work.abs());
        states.push(out.state);
    }
    let last = states.last().unwrap();
    let change = last
        .node_r
        .iter()
        .zip(&s0.node_r)
        .chain(last.cell_rho.iter().zip(&s0.cell_rho))
        .chain(last.node_u.iter().zip(&s0.node_u))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let diss = dissipation_exact(last, &model, &params).abs();
    let t_end = last.time;
    let sol = ExtendedSolution::new(states).unwrap();
    let phi = TestFunction::new("b", RadialShape::Bump { a: 0.3, b: 1.2 }, TemporalShape::Constant);
    let opts = ResidualOptions::default();
    let mass = mass_weak_residual(&sol, &phi, 0.0, t_end, &opts).unwrap().residual.abs();
    let mom = momentum_weak_residual(&sol, &phi, &model, &params, 0.0, t_end, &opts)
        .unwrap()
        .residual
        .abs();
    let worst = [change, work, diss, mass, mom].into_iter().fold(0.0, f64::max);
    Line {
        id: 8,
        name: "static state oracle",
        pass: worst <= 1e-12,
        detail: format!("after 100 steps: change {change:.1e}, work {work:.1e}, D {diss:.1e}, residuals {mass:.1e}/{mom:.1e}"),
    }
}

fn oracle_values() -> Line {
    let pairs = [
        (v1(4.0, 2).unwrap(), -0.92820323027550917411),
        (v2(4.0, 2).unwrap(), 12.928203230275509174),
        (v1(10.0 / 3.0, 3).unwrap(), -0.64061066512554929171),
        (v2(10.0 / 3.0, 3).unwrap(), 16.390610665125549292),
        (v1(2.0 + 1e-6, 2).unwrap(), -0.99999999999993750006),
    ];
    let mut worst = pairs.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let mut verdicts = true;
    for (alpha, n, a1, a2) in [
        (0.5, 2, -0.92820323027550917411, 12.928203230275509174),
        (0.1, 3, -0.64061066512554929171, 16.390610665125549292),
        (0.999, 2, -0.085593456944865414363, 0.093605472964889442395),
    ] {
        let a = admissibility(alpha, 2.0, 2.0, n).unwrap();
        verdicts &= a.admissible;
        worst = worst.max((a.v1 - a1).abs()).max((a.v2 - a2).abs());
    }
    let model = CoefficientModel::saint_venant();
    let params = RegularizationParams::new(2, 0.5, 0.1, 1.6, 0.01, false).unwrap();
    let base = RadialState::uniform(2, 0.1, 1.6, 32, 1.5, 0.0).unwrap();
    let frames = 20001;
    let states = (0..frames)
        .map(|i| {
            let mut s = base.clone();
            s.time = 0.5 * i as f64 / (frames - 1) as f64;
            s
        })
        .collect();
    let sol = ExtendedSolution::new(states).unwrap();
    let origin = TestFunction::new("o", RadialShape::Origin { n: 1.0 }, TemporalShape::Decay { horizon: 0.5 });
    let eb = boundary_term(&sol, &origin, &model, &params, 0.0, 0.5).unwrap();
    let eb_err = (eb - -0.0036386212500000000000).abs();
    Line {
        id: 9,
        name: "oracle values",
        pass: worst <= 1e-9 && verdicts && eb_err <= 1e-10,
        detail: format!("V1/V2 max error {worst:.1e} (tol 1e-9), admissibility verdicts {verdicts}, static boundary term error {eb_err:.1e}"),
    }
}

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(files(&p));
        } else {
            out.push(p);
        }
    }
    out.sort();
    out
}

fn determinism(cfg: &ScenarioConfig) -> Line {
    let model = cfg.model().unwrap();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        write_refinement(d.path(), cfg, &model, &run_refinement(cfg).unwrap()).unwrap();
    }
    let a = files(dirs[0].path());
    let b = files(dirs[1].path());
    let same_names = a.len() == b.len()
        && a.iter()
            .zip(&b)
            .all(|(x, y)| x.strip_prefix(dirs[0].path()).ok() == y.strip_prefix(dirs[1].path()).ok());
    let differing = a
        .iter()
        .zip(&b)
        .filter(|(x, y)| fs::read(x).unwrap() != fs::read(y).unwrap())
        .count();
    Line {
        id: 10,
        name: "determinism",
        pass: same_names && differing == 0,
        detail: format!("{} files compared, {differing} differ", a.len()),
    }
}

fn main() -> ExitCode {
    let cfg = config("reference.cfg");
    let reference = run_refinement(&cfg).unwrap();
    let lines = [
        mass_conservation(&reference),
        energy_inequality(&reference),
        isothermal(),
        bd_entropy(&reference),
        uniform_bounds(&reference),
        convergence(&reference),
        weak_residuals(&cfg, &reference),
        static_state(),
        oracle_values(),
        determinism(&cfg),
    ];
    let mut ok = true;
    for l in &lines {
        let known = KNOWN_FAILURES.contains(&l.id);
        let tag = match (l.pass, known) {
            (true, false) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "FAIL (known)",
            (true, true) => "PASS (expected to fail)",
        };
        println!("criterion {:>2} {tag:<12} {:<28} {}", l.id, l.name, l.detail);
        ok &= l.pass != known;
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
