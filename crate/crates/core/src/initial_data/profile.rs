use std::path::Path;
use std::sync::Arc;

use evalexpr::{build_operator_tree, ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Node, Value};

use crate::coefficients::ScalarFn;
use crate::error::{Error, Result};

/// Radial initial density `ρ₀(r)` and momentum `m₀(r)`, defined for `r ≥ 0`.
#[derive(Clone)]
pub struct RadialProfile {
    pub description: String,
    pub rho0: ScalarFn,
    pub m0: ScalarFn,
}

impl std::fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialProfile")
            .field("description", &self.description)
            .finish_non_exhaustive()
    }
}

/// Parameters of the Gaussian-family profile
/// `ρ₀ = base + amp·exp(−k(r−center)²)`, `m₀ = mom_amp·ρ₀·r·exp(−mom_k·r²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    pub base: f64,
    pub amp: f64,
    pub k: f64,
    pub center: f64,
    pub mom_amp: f64,
    pub mom_k: f64,
}

/// Parameters of the compact bump profile
/// `ρ₀ = base + amp·b(r)`, `m₀ = mom_amp·ρ₀·b(r)` with
/// `b(r) = (1 − ((r−center)/width)²)³` inside the support and 0 outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpParams {
    pub base: f64,
    pub amp: f64,
    pub center: f64,
    pub width: f64,
    pub mom_amp: f64,
}

impl RadialProfile {
    pub fn new(
        description: impl Into<String>,
        rho0: impl Fn(f64) -> f64 + Send + Sync + 'static,
        m0: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            description: description.into(),
            rho0: Arc::new(rho0),
            m0: Arc::new(m0),
        }
    }

    pub fn rho0(&self, r: f64) -> f64 {
        (self.rho0)(r)
    }

    pub fn m0(&self, r: f64) -> f64 {
        (self.m0)(r)
    }

    pub fn gaussian(p: GaussianParams) -> Self {
        let rho = move |r: f64| p.base + p.amp * (-p.k * (r - p.center).powi(2)).exp();
        Self::new(
            format!(
                "gaussian base={} amp={} k={} center={} mom_amp={} mom_k={}",
                p.base, p.amp, p.k, p.center, p.mom_amp, p.mom_k
            ),
            rho,
            move |r: f64| p.mom_amp * rho(r) * r * (-p.mom_k * r * r).exp(),
        )
    }

    pub fn bump(p: BumpParams) -> Self {
        let b = move |r: f64| {
            let s = (r - p.center) / p.width;
            if s.abs() >= 1.0 {
                0.0
            } else {
                (1.0 - s * s).powi(3)
            }
        };
        let rho = move |r: f64| p.base + p.amp * b(r);
        Self::new(
            format!(
                "bump base={} amp={} center={} width={} mom_amp={}",
                p.base, p.amp, p.center, p.width, p.mom_amp
            ),
            rho,
            move |r: f64| p.mom_amp * rho(r) * b(r),
        )
    }

    /// Piecewise-linear tables in `r`; constant beyond the first and last rows.
    /// Without a momentum table the momentum is zero.
    pub fn from_tables(rho_path: &Path, m_path: Option<&Path>) -> Result<Self> {
        let rho = LinearTable::from_file(rho_path)?;
        let m = m_path.map(LinearTable::from_file).transpose()?;
        let description = format!("table {}", rho_path.display());
        let m_fn: ScalarFn = match m {
            Some(t) => Arc::new(move |r| t.eval(r)),
            None => Arc::new(|_| 0.0),
        };
        Ok(Self {
            description,
            rho0: Arc::new(move |r| rho.eval(r)),
            m0: m_fn,
        })
    }

    /// Expressions in the variable `r`, e.g. `"0.5 + math::exp(-r^2)"`.
    pub fn from_expressions(rho_expr: &str, m_expr: &str) -> Result<Self> {
        let rho = RadialExpr::parse(rho_expr)?;
        let m = RadialExpr::parse(m_expr)?;
        for probe in [0.0, 0.5, 1.0] {
            rho.eval_checked(probe)?;
            m.eval_checked(probe)?;
        }
        Ok(Self {
            description: format!("expr rho=`{rho_expr}` m=`{m_expr}`"),
            rho0: Arc::new(move |r| rho.eval(r)),
            m0: Arc::new(move |r| m.eval(r)),
        })
    }
}

#[derive(Debug, Clone)]
struct LinearTable {
    r: Vec<f64>,
    v: Vec<f64>,
}

impl LinearTable {
    fn from_file(path: &Path) -> Result<Self> {
        let (r, v) = crate::coefficients::read_two_columns(path)?;
        if r.len() < 2 {
            return Err(Error::Config(format!("{}: need at least two rows", path.display())));
        }
        if r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(format!("{}: radii must increase", path.display())));
        }
        Ok(Self { r, v })
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.r.len();
        if x <= self.r[0] {
            return self.v[0];
        }
        if x >= self.r[n - 1] {
            return self.v[n - 1];
        }
        let i = self.r.partition_point(|&ri| ri <= x) - 1;
        let t = (x - self.r[i]) / (self.r[i + 1] - self.r[i]);
        self.v[i] + t * (self.v[i + 1] - self.v[i])
    }
}

struct RadialExpr {
    source: String,
    tree: Node<DefaultNumericTypes>,
}

impl RadialExpr {
    fn parse(source: &str) -> Result<Self> {
        let tree = build_operator_tree::<DefaultNumericTypes>(source)
            .map_err(|e| Error::Parse(format!("expression `{source}`: {e}")))?;
        Ok(Self {
            source: source.to_string(),
            tree,
        })
    }

    fn eval_checked(&self, r: f64) -> Result<f64> {
        let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
        ctx.set_value("r".into(), Value::Float(r))
            .map_err(|e| Error::Parse(e.to_string()))?;
        let v = self
            .tree
            .eval_with_context(&ctx)
            .map_err(|e| Error::Parse(format!("expression `{}` at r={r}: {e}", self.source)))?;
        match v {
            Value::Float(x) => Ok(x),
            Value::Int(i) => Ok(i as f64),
            other => Err(Error::Parse(format!(
                "expression `{}` is not numeric: {other:?}",
                self.source
            ))),
        }
    }

    fn eval(&self, r: f64) -> f64 {
        self.eval_checked(r).unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn expression_profile() {
        let p = RadialProfile::from_expressions("0.5 + math::exp(-r^2)", "0.1 * r").unwrap();
        assert!((p.rho0(1.0) - (0.5 + (-1.0f64).exp())).abs() < 1e-15);
        assert!((p.m0(2.0) - 0.2).abs() < 1e-15);
        assert!(RadialProfile::from_expressions("r +", "0").is_err());
    }

    #[test]
    fn table_profile_interpolates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rho.txt");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "# r rho\n0 1\n1 3\n2 3").unwrap();
        let p = RadialProfile::from_tables(&path, None).unwrap();
        assert_eq!(p.rho0(0.5), 2.0);
        assert_eq!(p.rho0(5.0), 3.0);
        assert_eq!(p.m0(0.5), 0.0);
    }

    #[test]
    fn bump_vanishes_outside_support() {
        let p = RadialProfile::bump(BumpParams {
            base: 0.0,
            amp: 1.0,
            center: 2.0,
            width: 0.5,
            mom_amp: 0.3,
        });
        assert_eq!(p.rho0(1.4), 0.0);
        assert_eq!(p.m0(2.6), 0.0);
        assert_eq!(p.rho0(2.0), 1.0);
    }
}
