use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use radflow::harness::output::{residuals_for_dir, write_level, write_plot_script, write_refinement, write_residuals};
use radflow::harness::refine::FlagStatus;
use radflow::harness::validate::validate_scenario;
use radflow::harness::{run_level, run_refinement, ScenarioConfig, TestsFile};

#[derive(Parser)]
#[command(name = "radflow", version, about = "Radial compressible Navier-Stokes with density-dependent viscosity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single-level run; writes snapshots/ and diagnostics.csv. Exit 2 on solver abort.
    Simulate {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// All levels of the schedule; writes report.json and CSVs. Exit 1 if a flag fails.
    Refine {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Coefficient conditions, alpha-admissibility and initial-data hypotheses. Exit 1 on failure.
    Validate {
        config: PathBuf,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Weak residuals of a stored run; writes <run-dir>/residuals.csv.
    Residuals { run_dir: PathBuf, tests_config: PathBuf },
    /// Writes <run-dir>/plot.py, a matplotlib script over the CSVs.
    Plot { run_dir: PathBuf },
}

fn load(path: &Path) -> Result<ScenarioConfig> {
    ScenarioConfig::load(path).with_context(|| format!("loading {}", path.display()))
}

fn simulate(config: &Path, out: &Path) -> Result<ExitCode> {
    let cfg = load(config)?;
    let model = cfg.model()?;
    let spec = cfg.single_level()?;
    let run = run_level(&cfg, &model, 0, &spec)?;
    write_level(out, &cfg, &model, &run)?;
    let last = run.records.last().map_or(0.0, |r| r.t);
    match run.abort_reason() {
        Some(reason) => {
            eprintln!("{reason}; output up to t = {last} in {}", out.display());
            Ok(ExitCode::from(2))
        }
        None => {
            println!(
                "{} steps to t = {last}; {} records, {} snapshots in {}",
                run.totals.steps,
                run.records.len(),
                run.ticks.len(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn refine(config: &Path, out: &Path) -> Result<ExitCode> {
    let cfg = load(config)?;
    let model = cfg.model()?;
    let result = run_refinement(&cfg)?;
    write_refinement(out, &cfg, &model, &result)?;
    let rep = &result.report;
    for s in &rep.per_level {
        println!(
            "level {}: eps = {:e}, R = {:.4}, delta = {:e}, K = {}, steps = {}, t = {}{}",
            s.level,
            s.epsilon,
            s.outer_radius,
            s.delta,
            s.cells,
            s.steps,
            s.t_reached,
            s.abort.as_ref().map_or(String::new(), |a| format!(" (aborted: {a})"))
        );
    }
    for d in &rep.distances {
        println!(
            "d({},{}): rho L1 {:.6e}, momentum {:.6e}, sqrt(rho) u {:.6e}",
            d.coarse, d.fine, d.rho_l1_max, d.momentum_l2_lbeta, d.sqrt_rho_u_l2
        );
    }
    for f in rep.flags.iter().filter(|f| f.status == FlagStatus::Fail) {
        println!("FAIL {} level {:?}: {:e} vs {:e}", f.check, f.level, f.value, f.threshold);
    }
    println!("report written to {}", out.join("report.json").display());
    Ok(if rep.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn validate(config: &Path, json: bool) -> Result<ExitCode> {
    let summary = validate_scenario(&load(config)?)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&summary)?);
    } else {
        print!("{}", summary.render());
    }
    Ok(if summary.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn residuals(run_dir: &Path, tests: &Path) -> Result<ExitCode> {
    let tests = TestsFile::load(tests).with_context(|| format!("loading {}", tests.display()))?;
    let rows = residuals_for_dir(run_dir, &tests.test)?;
    write_residuals(run_dir, &rows)?;
    for r in &rows {
        println!(
            "level {} {:<12} mass {:.6e}  momentum {:.6e}  boundary {:.6e}",
            r.level, r.test_id, r.mass_residual, r.momentum_residual, r.boundary_term
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate { config, out } => simulate(config, out),
        Command::Refine { config, out } => refine(config, out),
        Command::Validate { config, json } => validate(config, *json),
        Command::Residuals { run_dir, tests_config } => residuals(run_dir, tests_config),
        Command::Plot { run_dir } => write_plot_script(run_dir)
            .map(|p| {
                println!("{}", p.display());
                ExitCode::SUCCESS
            })
            .map_err(Into::into),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(1)
    })
}
