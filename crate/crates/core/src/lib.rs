//! Radially symmetric isentropic compressible Navier-Stokes with density-dependent
//! viscosity on annuli `ε < r < R`, with the regularized approximation family,
//! estimate monitors, weak-form residuals and a refinement harness.
//!
//! All radial integrals carry the weight `r^(N-1)` and omit the surface
//! factor `|S^(N-1)|`; it cancels in every inequality that is monitored.

pub mod coefficients;
pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod initial_data;
pub mod quadrature;
pub mod solver;
pub mod weak_residual;

pub use coefficients::{CoefficientModel, PowerTerm, RegularizationParams};
pub use error::{Error, Result};
pub use solver::{RadialState, StepControl};
