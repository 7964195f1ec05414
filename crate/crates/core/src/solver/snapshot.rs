//! Plain-text snapshot files.
//!
//! ```text
//! # radflow snapshot
//! N <int>
//! gamma <real>
//! epsilon <real>
//! R <real>
//! delta <real>
//! K <int>
//! t <real>
//! nodes
//! <r_node> <u_node>        (K+1 rows)
//! cells
//! <r_center> <rho>         (K rows)
//! ```
//!
//! Reals are written with 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use super::state::{shell_volume, RadialState};
use crate::coefficients::{CoefficientModel, RegularizationParams};
use crate::error::{Error, Result};

/// Header values of a snapshot file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotHeader {
    pub n_dim: usize,
    pub gamma: f64,
    pub epsilon: f64,
    pub outer_radius: f64,
    pub delta: f64,
    pub cells: usize,
    pub time: f64,
}

pub fn to_string(state: &RadialState, model: &CoefficientModel, params: &RegularizationParams) -> String {
    let k = state.cells();
    let mut s = String::with_capacity(64 * (2 * k + 10));
    s.push_str("# radflow snapshot\n");
    let _ = writeln!(s, "N {}", state.n_dim);
    let _ = writeln!(s, "gamma {:.16e}", model.gamma);
    let _ = writeln!(s, "epsilon {:.16e}", params.epsilon());
    let _ = writeln!(s, "R {:.16e}", params.outer_radius());
    let _ = writeln!(s, "delta {:.16e}", params.delta());
    let _ = writeln!(s, "K {k}");
    let _ = writeln!(s, "t {:.16e}", state.time);
    s.push_str("nodes\n");
    for (r, u) in state.node_r.iter().zip(&state.node_u) {
        let _ = writeln!(s, "{r:.16e} {u:.16e}");
    }
    s.push_str("cells\n");
    for i in 0..k {
        let _ = writeln!(s, "{:.16e} {:.16e}", state.cell_center(i), state.cell_rho[i]);
    }
    s
}

pub fn write(path: &Path, state: &RadialState, model: &CoefficientModel, params: &RegularizationParams) -> Result<()> {
    std::fs::write(path, to_string(state, model, params))?;
    Ok(())
}

fn field<'a>(lines: &mut impl Iterator<Item = &'a str>, key: &str) -> Result<&'a str> {
    let line = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("snapshot ended before `{key}`")))?;
    let mut it = line.split_whitespace();
    match (it.next(), it.next()) {
        (Some(k), Some(v)) if k == key => Ok(v),
        _ => Err(Error::Parse(format!("expected `{key} <value>`, found `{line}`"))),
    }
}

fn num<T: std::str::FromStr>(s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| Error::Parse(format!("`{s}`: {e}")))
}

fn pair(line: Option<&str>) -> Result<(f64, f64)> {
    let line = line.ok_or_else(|| Error::Parse("snapshot truncated".into()))?;
    let mut it = line.split_whitespace();
    let a = it.next().ok_or_else(|| Error::Parse(format!("bad row `{line}`")))?;
    let b = it.next().ok_or_else(|| Error::Parse(format!("bad row `{line}`")))?;
    Ok((num(a)?, num(b)?))
}

/// Parses a snapshot. Cell masses are rebuilt as `ρ·V` from the stored geometry.
pub fn parse(text: &str) -> Result<(SnapshotHeader, RadialState)> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let n_dim: usize = num(field(&mut lines, "N")?)?;
    let gamma = num(field(&mut lines, "gamma")?)?;
    let epsilon = num(field(&mut lines, "epsilon")?)?;
    let outer_radius = num(field(&mut lines, "R")?)?;
    let delta = num(field(&mut lines, "delta")?)?;
    let cells: usize = num(field(&mut lines, "K")?)?;
    let time = num(field(&mut lines, "t")?)?;
    if lines.next() != Some("nodes") {
        return Err(Error::Parse("expected `nodes`".into()));
    }
    let mut node_r = Vec::with_capacity(cells + 1);
    let mut node_u = Vec::with_capacity(cells + 1);
    for _ in 0..=cells {
        let (r, u) = pair(lines.next())?;
        node_r.push(r);
        node_u.push(u);
    }
    if lines.next() != Some("cells") {
        return Err(Error::Parse("expected `cells`".into()));
    }
    let mut mass = Vec::with_capacity(cells);
    for i in 0..cells {
        let (_, rho) = pair(lines.next())?;
        mass.push(rho * shell_volume(node_r[i], node_r[i + 1], n_dim));
    }
    let state = RadialState::from_parts(n_dim, time, node_r, node_u, mass)?;
    Ok((
        SnapshotHeader {
            n_dim,
            gamma,
            epsilon,
            outer_radius,
            delta,
            cells,
            time,
        },
        state,
    ))
}

pub fn read(path: &Path) -> Result<(SnapshotHeader, RadialState)> {
    parse(&std::fs::read_to_string(path)?)
}
