use serde::{Deserialize, Serialize};

/// Radial profile `ψ(r)` of a test function, `C²` with compact support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialShape {
    /// `(1 − s²)³` with `s = (2r − a − b)/(b − a)`, supported on `[a, b]`.
    Bump { a: f64, b: f64 },
    /// `r(1 − (r/n)²)³` on `[0, n]`; vanishes at the origin but not at `r = ε`.
    Origin { n: f64 },
}

/// Temporal factor `τ(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TemporalShape {
    Constant,
    /// `(1 − t/T)²` for `t ≤ T`, zero afterwards.
    Decay { horizon: f64 },
}

/// `φ(r, t) = ψ(r)τ(t)`. Scalar for the mass equation; for the momentum
/// equation it generates the vector field `φ(r, t)x/r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub id: String,
    pub radial: RadialShape,
    pub temporal: TemporalShape,
}

/// `(ψ, ψ', ψ'')` at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialJet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

const ZERO_JET: RadialJet = RadialJet {
    value: 0.0,
    d1: 0.0,
    d2: 0.0,
};

impl RadialShape {
    pub fn support(&self) -> (f64, f64) {
        match *self {
            RadialShape::Bump { a, b } => (a, b),
            RadialShape::Origin { n } => (0.0, n),
        }
    }

    pub fn jet(&self, r: f64) -> RadialJet {
        match *self {
            RadialShape::Bump { a, b } => {
                if r <= a || r >= b {
                    return ZERO_JET;
                }
                let w = 0.5 * (b - a);
                let s = (r - 0.5 * (a + b)) / w;
                let q = 1.0 - s * s;
                RadialJet {
                    value: q * q * q,
                    d1: -6.0 * s * q * q / w,
                    d2: (-6.0 * q * q + 24.0 * s * s * q) / (w * w),
                }
            }
            RadialShape::Origin { n } => {
                if r <= 0.0 || r >= n {
                    return ZERO_JET;
                }
                let s = r / n;
                let q = 1.0 - s * s;
                RadialJet {
                    value: r * q * q * q,
                    d1: q * q * q - 6.0 * s * s * q * q,
                    d2: (-18.0 * s * q * q + 24.0 * s * s * s * q) / n,
                }
            }
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        let ok = match *self {
            RadialShape::Bump { a, b } => a > 0.0 && b > a && b.is_finite(),
            RadialShape::Origin { n } => n > 0.0 && n.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(crate::Error::Config(format!("invalid radial test profile {self:?}")))
        }
    }
}

impl TemporalShape {
    /// `(τ, τ')`
    pub fn eval(&self, t: f64) -> (f64, f64) {
        match *self {
            TemporalShape::Constant => (1.0, 0.0),
            TemporalShape::Decay { horizon } => {
                if t >= horizon {
                    (0.0, 0.0)
                } else {
                    let q = 1.0 - t / horizon;
                    (q * q, -2.0 * q / horizon)
                }
            }
        }
    }
}

impl TestFunction {
    pub fn new(id: impl Into<String>, radial: RadialShape, temporal: TemporalShape) -> Self {
        Self {
            id: id.into(),
            radial,
            temporal,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_derivatives(shape: RadialShape, points: &[f64]) {
        let h = 1e-5;
        for &r in points {
            let j = shape.jet(r);
            let fd1 = (shape.jet(r + h).value - shape.jet(r - h).value) / (2.0 * h);
            let fd2 = (shape.jet(r + h).d1 - shape.jet(r - h).d1) / (2.0 * h);
            assert!((j.d1 - fd1).abs() < 1e-7, "d1 at {r}: {} vs {fd1}", j.d1);
            assert!((j.d2 - fd2).abs() < 1e-6, "d2 at {r}: {} vs {fd2}", j.d2);
        }
    }

    #[test]
    fn derivatives_match_differences() {
        check_derivatives(RadialShape::Bump { a: 0.3, b: 1.1 }, &[0.35, 0.5, 0.7, 0.9, 1.05]);
        check_derivatives(RadialShape::Origin { n: 1.0 }, &[0.01, 0.2, 0.5, 0.9, 0.99]);
    }

    #[test]
    fn jets_vanish_to_second_order_at_the_support_ends() {
        for (shape, ends) in [
            (RadialShape::Bump { a: 0.3, b: 1.1 }, [0.3, 1.1]),
            (RadialShape::Origin { n: 1.0 }, [1.0, 1.0]),
        ] {
            for e in ends {
                for r in [e - 1e-9, e + 1e-9] {
                    let j = shape.jet(r);
                    assert!(j.value.abs() < 1e-20 && j.d1.abs() < 1e-12 && j.d2.abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn decay_reaches_zero_at_horizon() {
        let d = TemporalShape::Decay { horizon: 0.5 };
        assert_eq!(d.eval(0.0), (1.0, -4.0));
        assert_eq!(d.eval(0.5), (0.0, 0.0));
        assert_eq!(TemporalShape::Constant.eval(3.0), (1.0, 0.0));
    }
}
