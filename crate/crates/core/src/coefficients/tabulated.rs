use std::path::Path;

use crate::error::{Error, Result};

/// `h` given at sample densities, interpolated by a natural cubic spline in
/// `(ln ρ, ln h)` and extended linearly in log-log outside the table, so pure
/// power laws are reproduced exactly. `g` is the induced `2ρh' − 2h`.
#[derive(Debug, Clone)]
pub struct TabulatedLaw {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl TabulatedLaw {
    pub fn new(rho: &[f64], h: &[f64]) -> Result<Self> {
        if rho.len() != h.len() || rho.len() < 3 {
            return Err(Error::Config("viscosity table needs at least 3 (rho, h) rows".into()));
        }
        if rho.windows(2).any(|w| w[1] <= w[0]) || rho[0] <= 0.0 {
            return Err(Error::Config("viscosity table densities must be positive and increasing".into()));
        }
        if h.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
            return Err(Error::Config("viscosity table values must be positive".into()));
        }
        let x: Vec<f64> = rho.iter().map(|r| r.ln()).collect();
        let y: Vec<f64> = h.iter().map(|v| v.ln()).collect();
        let m = natural_spline_moments(&x, &y);
        Ok(Self { x, y, m })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let (rho, h) = read_two_columns(path)?;
        Self::new(&rho, &h)
    }

    /// Spline value and first two derivatives in log-log variables.
    fn eval(&self, lx: f64) -> (f64, f64, f64) {
        let n = self.x.len();
        if lx <= self.x[0] {
            let s = self.slope_at(0);
            return (self.y[0] + s * (lx - self.x[0]), s, 0.0);
        }
        if lx >= self.x[n - 1] {
            let s = self.slope_at(n - 1);
            return (self.y[n - 1] + s * (lx - self.x[n - 1]), s, 0.0);
        }
        let i = match self.x.binary_search_by(|v| v.total_cmp(&lx)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i - 1,
        };
        let hstep = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - lx) / hstep;
        let b = (lx - self.x[i]) / hstep;
        let (mi, mj) = (self.m[i], self.m[i + 1]);
        let s = a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * mi + (b * b * b - b) * mj) * hstep * hstep / 6.0;
        let ds = (self.y[i + 1] - self.y[i]) / hstep
            + ((1.0 - 3.0 * a * a) * mi + (3.0 * b * b - 1.0) * mj) * hstep / 6.0;
        let d2s = a * mi + b * mj;
        (s, ds, d2s)
    }

    fn slope_at(&self, i: usize) -> f64 {
        let n = self.x.len();
        if i == 0 {
            let hs = self.x[1] - self.x[0];
            (self.y[1] - self.y[0]) / hs - hs * (2.0 * self.m[0] + self.m[1]) / 6.0
        } else {
            let hs = self.x[n - 1] - self.x[n - 2];
            (self.y[n - 1] - self.y[n - 2]) / hs + hs * (self.m[n - 2] + 2.0 * self.m[n - 1]) / 6.0
        }
    }

    pub fn h(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        self.eval(rho.ln()).0.exp()
    }

    pub fn h_prime(&self, rho: f64) -> f64 {
        let (s, ds, _) = self.eval(rho.ln());
        s.exp() * ds / rho
    }

    pub fn g(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        let (s, ds, _) = self.eval(rho.ln());
        2.0 * s.exp() * (ds - 1.0)
    }

    pub fn g_prime(&self, rho: f64) -> f64 {
        let (s, ds, d2s) = self.eval(rho.ln());
        let h = s.exp();
        2.0 * h * (ds * (ds - 1.0) + d2s) / rho
    }
}

fn natural_spline_moments(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    let k = n - 2;
    let mut lower = vec![0.0; k];
    let mut diag = vec![0.0; k];
    let mut upper = vec![0.0; k];
    let mut rhs = vec![0.0; k];
    for j in 0..k {
        let i = j + 1;
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        lower[j] = h0 / 6.0;
        diag[j] = (h0 + h1) / 3.0;
        upper[j] = h1 / 6.0;
        rhs[j] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
    }
    let inner = crate::solver::tridiag::solve(&lower, &diag, &upper, &rhs)
        .expect("spline system is diagonally dominant");
    m[1..=k].copy_from_slice(&inner);
    m
}

/// Reads whitespace- or comma-separated two-column numeric text; `#` starts a comment.
pub(crate) fn read_two_columns(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path)?;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty());
        let parse = |s: Option<&str>| -> Result<f64> {
            s.ok_or_else(|| Error::Parse(format!("{}:{}: expected two columns", path.display(), lineno + 1)))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("{}:{}: {e}", path.display(), lineno + 1)))
        };
        a.push(parse(it.next())?);
        b.push(parse(it.next())?);
    }
    Ok((a, b))
}
