//! Run directories.
//!
//! ```text
//! <out>/scenario.cfg            resolved scenario of this level
//! <out>/diagnostics.csv
//! <out>/integrals.csv
//! <out>/snapshots/snap_00000.txt ...
//! ```
//!
//! `refine` writes one such directory per level (`level_0`, `level_1`, ...)
//! next to `report.json`, `distances.csv`, `flags.csv`, `residuals.csv` and
//! `residuals_detail.csv`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::config::{CoeffConfig, InitConfig, LevelSpec, ResidualTest, ScenarioConfig};
use super::refine::{
    residual_rows, LevelRun, Refinement, ResidualInput, ResidualRow, RESIDUALS_DETAIL_HEADER, RESIDUALS_HEADER,
};
use crate::coefficients::CoefficientModel;
use crate::diagnostics::{write_csv, write_integrals_csv};
use crate::error::{Error, Result};
use crate::solver::snapshot;
use crate::weak_residual::{ExtendedSolution, ResidualOptions};

pub const SCENARIO_FILE: &str = "scenario.cfg";
pub const SNAPSHOT_DIR: &str = "snapshots";

pub fn snapshot_name(i: usize) -> String {
    format!("snap_{i:05}.txt")
}

/// The scenario with every path made absolute and the top-level
/// `epsilon`/`R`/`delta`/`run.K` pinned to `level`, so that the file
/// reproduces this level on its own.
pub fn level_scenario(cfg: &ScenarioConfig, level: &LevelSpec) -> ScenarioConfig {
    let mut c = cfg.clone();
    let abs = |p: &mut PathBuf| *p = cfg.resolve(p);
    if let CoeffConfig {
        table_path: Some(p), ..
    } = &mut c.coeff
    {
        abs(p);
    }
    if let InitConfig::Table {
        table_path,
        momentum_path,
    } = &mut c.init
    {
        abs(table_path);
        if let Some(p) = momentum_path {
            abs(p);
        }
    }
    c.epsilon = Some(level.epsilon);
    c.outer_radius = Some(level.outer_radius);
    c.delta = Some(level.delta);
    c.run.cells = Some(level.cells);
    c
}

pub fn scenario_to_toml(cfg: &ScenarioConfig) -> Result<String> {
    toml::to_string(cfg).map_err(|e| Error::Config(format!("cannot serialize scenario: {e}")))
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path)?))
}

/// Writes the scenario, both CSVs and the tick states of one level.
pub fn write_level(dir: &Path, cfg: &ScenarioConfig, model: &CoefficientModel, run: &LevelRun) -> Result<()> {
    fs::create_dir_all(dir.join(SNAPSHOT_DIR))?;
    fs::write(dir.join(SCENARIO_FILE), scenario_to_toml(&level_scenario(cfg, &run.spec))?)?;
    let mut f = create(&dir.join("diagnostics.csv"))?;
    write_csv(&mut f, &run.records)?;
    f.flush()?;
    let mut f = create(&dir.join("integrals.csv"))?;
    write_integrals_csv(&mut f, &run.records)?;
    f.flush()?;
    for (i, s) in run.ticks.iter().enumerate() {
        snapshot::write(&dir.join(SNAPSHOT_DIR).join(snapshot_name(i)), s, model, &run.params)?;
    }
    Ok(())
}

pub fn level_dir(out: &Path, j: usize) -> PathBuf {
    out.join(format!("level_{j}"))
}

pub fn write_residuals(out: &Path, rows: &[ResidualRow]) -> Result<()> {
    let mut f = create(&out.join("residuals.csv"))?;
    writeln!(f, "{RESIDUALS_HEADER}")?;
    for r in rows {
        writeln!(f, "{}", r.csv_row())?;
    }
    f.flush()?;
    let mut f = create(&out.join("residuals_detail.csv"))?;
    writeln!(f, "{RESIDUALS_DETAIL_HEADER}")?;
    for r in rows {
        writeln!(f, "{}", r.detail_row())?;
    }
    f.flush()?;
    Ok(())
}

pub fn write_refinement(out: &Path, cfg: &ScenarioConfig, model: &CoefficientModel, result: &Refinement) -> Result<()> {
    fs::create_dir_all(out)?;
    for run in &result.runs {
        write_level(&level_dir(out, run.index), cfg, model, run)?;
    }
    let rep = &result.report;
    let json = serde_json::to_string_pretty(rep).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(out.join("report.json"), json + "\n")?;

    let mut f = create(&out.join("distances.csv"))?;
    writeln!(f, "coarse,fine,common_ticks,rho_l1_max,momentum_l2_lbeta,sqrt_rho_u_l2")?;
    for d in &rep.distances {
        writeln!(
            f,
            "{},{},{},{:.16e},{:.16e},{:.16e}",
            d.coarse, d.fine, d.common_ticks, d.rho_l1_max, d.momentum_l2_lbeta, d.sqrt_rho_u_l2
        )?;
    }
    f.flush()?;

    let mut f = create(&out.join("flags.csv"))?;
    writeln!(f, "check,level,value,threshold,status")?;
    for fl in &rep.flags {
        let level = fl.level.map_or(String::new(), |l| l.to_string());
        let status = match fl.status {
            super::refine::FlagStatus::Pass => "PASS",
            super::refine::FlagStatus::Fail => "FAIL",
        };
        writeln!(f, "{},{level},{:.16e},{:.16e},{status}", fl.check, fl.value, fl.threshold)?;
    }
    f.flush()?;
    write_residuals(out, &rep.residuals)
}

/// One level read back from a run directory.
pub struct StoredLevel {
    pub index: usize,
    pub scenario: ScenarioConfig,
    pub solution: ExtendedSolution,
}

fn load_level(dir: &Path, index: usize) -> Result<StoredLevel> {
    let scenario = ScenarioConfig::load(&dir.join(SCENARIO_FILE))?;
    let snap_dir = dir.join(SNAPSHOT_DIR);
    let mut files: Vec<PathBuf> = fs::read_dir(&snap_dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| p.extension().is_some_and(|x| x == "txt"));
    files.sort();
    let states = files
        .iter()
        .map(|p| snapshot::read(p).map(|(_, s)| s))
        .collect::<Result<Vec<_>>>()?;
    Ok(StoredLevel {
        index,
        scenario,
        solution: ExtendedSolution::new(states)?,
    })
}

/// A `simulate` directory (one level) or a `refine` directory (`level_*`).
pub fn load_run_dir(dir: &Path) -> Result<Vec<StoredLevel>> {
    if dir.join(SCENARIO_FILE).is_file() {
        return Ok(vec![load_level(dir, 0)?]);
    }
    let mut levels = Vec::new();
    for j in 0.. {
        let d = level_dir(dir, j);
        if !d.is_dir() {
            break;
        }
        levels.push(load_level(&d, j)?);
    }
    if levels.is_empty() {
        return Err(Error::Config(format!(
            "{} holds neither {SCENARIO_FILE} nor level_0/",
            dir.display()
        )));
    }
    Ok(levels)
}

/// Residual rows of every stored level against `tests`; the window defaults
/// to the stored time span.
pub fn residuals_for_dir(dir: &Path, tests: &[ResidualTest]) -> Result<Vec<ResidualRow>> {
    let levels = load_run_dir(dir)?;
    let first = &levels[0].scenario;
    let model = first.model()?;
    let params = levels
        .iter()
        .map(|l| l.scenario.params(&l.scenario.single_level()?))
        .collect::<Result<Vec<_>>>()?;
    let inputs: Vec<ResidualInput<'_>> = levels
        .iter()
        .zip(&params)
        .map(|(l, p)| ResidualInput {
            level: l.index,
            params: *p,
            solution: &l.solution,
        })
        .collect();
    let t_end = levels
        .iter()
        .map(|l| *l.solution.times().last().expect("nonempty"))
        .fold(f64::INFINITY, f64::min);
    residual_rows(
        &inputs,
        tests,
        &model,
        t_end,
        &ResidualOptions {
            gl_points: first.eval.gl_points,
        },
    )
}

/// Self-contained matplotlib script over the CSVs of a run directory.
pub const PLOT_SCRIPT: &str = include_str!("plot.py");


pub fn write_plot_script(dir: &Path) -> Result<PathBuf> {
    if !dir.is_dir() {
        return Err(Error::Config(format!("{} is not a directory", dir.display())));
    }
    let path = dir.join("plot.py");
    fs::write(&path, PLOT_SCRIPT)?;
    Ok(path)
}
