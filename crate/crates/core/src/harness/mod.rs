//! Scenario files, refinement schedules, cross-level comparison and the
//! files written by the command-line tool.

pub mod config;
pub mod output;
pub mod refine;
pub mod schedule;
pub mod validate;

pub use config::{ResidualTest, ScenarioConfig, TestsFile};
pub use refine::{run_level, run_refinement, Refinement, RefinementReport};
pub use schedule::RefinementSchedule;
