use crate::coefficients::RegularizationParams;
use crate::error::{Error, Result};
use crate::initial_data::ProfileOnGrid;

/// Staggered Lagrangian grid: velocities at nodes, densities in cells. Cell
/// masses are fixed at construction and never recomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialState {
    pub time: f64,
    pub n_dim: usize,
    pub node_r: Vec<f64>,
    pub node_u: Vec<f64>,
    pub cell_mass: Vec<f64>,
    pub cell_rho: Vec<f64>,
}

/// `(b^N − a^N)/N`, the radial volume of `[a, b]` without the sphere factor.
pub fn shell_volume(a: f64, b: f64, n_dim: usize) -> f64 {
    (b.powi(n_dim as i32) - a.powi(n_dim as i32)) / n_dim as f64
}

impl RadialState {
    /// Builds a state from explicit grid data, deriving densities from geometry.
    pub fn from_parts(n_dim: usize, time: f64, node_r: Vec<f64>, node_u: Vec<f64>, cell_mass: Vec<f64>) -> Result<Self> {
        if node_r.len() != cell_mass.len() + 1 || node_u.len() != node_r.len() {
            return Err(Error::Construction(format!(
                "inconsistent sizes: {} nodes, {} velocities, {} cells",
                node_r.len(),
                node_u.len(),
                cell_mass.len()
            )));
        }
        let mut s = Self {
            time,
            n_dim,
            node_r,
            node_u,
            cell_mass,
            cell_rho: Vec::new(),
        };
        s.cell_rho = s.densities_from_geometry()?;
        Ok(s)
    }

    /// A state with prescribed cell densities (masses follow from geometry).
    pub fn from_densities(n_dim: usize, node_r: Vec<f64>, node_u: Vec<f64>, cell_rho: &[f64]) -> Result<Self> {
        let mass = node_r
            .windows(2)
            .zip(cell_rho)
            .map(|(w, rho)| rho * shell_volume(w[0], w[1], n_dim))
            .collect();
        Self::from_parts(n_dim, 0.0, node_r, node_u, mass)
    }

    /// Uniform grid on `[a, b]` with constant density and velocity.
    pub fn uniform(n_dim: usize, a: f64, b: f64, k: usize, rho: f64, u: f64) -> Result<Self> {
        let dr = (b - a) / k as f64;
        let mut node_r: Vec<f64> = (0..=k).map(|j| a + dr * j as f64).collect();
        node_r[k] = b;
        Self::from_densities(n_dim, node_r, vec![u; k + 1], &vec![rho; k])
    }

    pub fn cells(&self) -> usize {
        self.cell_mass.len()
    }

    pub fn cell_volume(&self, i: usize) -> f64 {
        shell_volume(self.node_r[i], self.node_r[i + 1], self.n_dim)
    }

    pub fn cell_center(&self, i: usize) -> f64 {
        0.5 * (self.node_r[i] + self.node_r[i + 1])
    }

    pub fn cell_width(&self, i: usize) -> f64 {
        self.node_r[i + 1] - self.node_r[i]
    }

    /// Lumped node mass: half of each adjacent cell.
    pub fn node_mass(&self, j: usize) -> f64 {
        let k = self.cells();
        let left = if j > 0 { self.cell_mass[j - 1] } else { 0.0 };
        let right = if j < k { self.cell_mass[j] } else { 0.0 };
        0.5 * (left + right)
    }

    pub fn total_mass(&self) -> f64 {
        self.cell_mass.iter().sum()
    }

    pub(crate) fn densities_from_geometry(&self) -> Result<Vec<f64>> {
        let mut rho = Vec::with_capacity(self.cells());
        for i in 0..self.cells() {
            if !(self.node_r[i + 1] > self.node_r[i]) {
                return Err(Error::Construction(format!(
                    "node radii not increasing at cell {i}: {} >= {}",
                    self.node_r[i],
                    self.node_r[i + 1]
                )));
            }
            let v = self.cell_volume(i);
            let d = self.cell_mass[i] / v;
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::Construction(format!("nonpositive density {d} in cell {i}")));
            }
            rho.push(d);
        }
        Ok(rho)
    }

    /// Checks ordering, positivity and wall velocities.
    pub fn check_invariants(&self) -> Result<()> {
        let k = self.cells();
        let rho = self.densities_from_geometry()?;
        if rho
            .iter()
            .zip(&self.cell_rho)
            .any(|(a, b)| (a - b).abs() > 1e-12 * a.abs())
        {
            return Err(Error::Construction("stored densities disagree with geometry".into()));
        }
        if self.node_u[0] != 0.0 || self.node_u[k] != 0.0 {
            return Err(Error::Construction("wall velocities must be exactly zero".into()));
        }
        Ok(())
    }
}

/// Builds the initial state from sampled data. Walls sit at `inner` and `R`.
pub fn init_state(grid: &ProfileOnGrid, params: &RegularizationParams) -> Result<RadialState> {
    let k = grid.cell_mass.len();
    if k < 8 {
        return Err(Error::Construction(format!("need at least 8 cells, got {k}")));
    }
    if (grid.node_r[0] - params.inner_radius()).abs() > 1e-14 * params.inner_radius()
        || (grid.node_r[k] - params.outer_radius()).abs() > 1e-14 * params.outer_radius()
    {
        return Err(Error::Construction("grid does not span the annulus".into()));
    }
    let mut u = grid.node_u.clone();
    u[0] = 0.0;
    u[k] = 0.0;
    RadialState::from_parts(grid.n_dim, 0.0, grid.node_r.clone(), u, grid.cell_mass.clone())
}
