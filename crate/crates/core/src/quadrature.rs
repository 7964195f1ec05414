//! Gauss-Legendre rules and an adaptive Gauss-Kronrod integrator that reports
//! where it failed to converge.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Integrate `f` over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, w * half))
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15(a: f64, b: f64, f: &mut impl FnMut(f64) -> f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Failure of adaptive integration, located at the offending subinterval.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureFailure {
    pub location: f64,
    pub reason: String,
}

/// Adaptive 7/15 Gauss-Kronrod on `[a, b]` with absolute/relative tolerances.
pub fn adaptive(
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    mut f: impl FnMut(f64) -> f64,
) -> Result<f64, QuadratureFailure> {
    const MAX_INTERVALS: usize = 4000;
    const MIN_WIDTH_RATIO: f64 = 1e-13;
    let (v, e) = kronrod15(a, b, &mut f);
    if !v.is_finite() {
        return Err(QuadratureFailure {
            location: 0.5 * (a + b),
            reason: "non-finite integrand".into(),
        });
    }
    let mut parts = vec![(a, b, v, e)];
    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if parts.len() >= MAX_INTERVALS {
            let worst = worst_part(&parts);
            return Err(QuadratureFailure {
                location: 0.5 * (parts[worst].0 + parts[worst].1),
                reason: format!("no convergence within {MAX_INTERVALS} subintervals"),
            });
        }
        let worst = worst_part(&parts);
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if (hi - lo) <= MIN_WIDTH_RATIO * (b - a).abs().max(1e-300) {
            return Err(QuadratureFailure {
                location: mid,
                reason: "subinterval collapsed (likely non-integrable singularity)".into(),
            });
        }
        for (x0, x1) in [(lo, mid), (mid, hi)] {
            let (v, e) = kronrod15(x0, x1, &mut f);
            if !v.is_finite() {
                return Err(QuadratureFailure {
                    location: 0.5 * (x0 + x1),
                    reason: "non-finite integrand".into(),
                });
            }
            parts.push((x0, x1, v, e));
        }
    }
}

fn worst_part(parts: &[(f64, f64, f64, f64)]) -> usize {
    parts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .3.total_cmp(&b.1 .3))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Integral over `[a, ∞)`, truncated once the integrand stays below `cutoff`
/// on a whole doubling window.
pub fn adaptive_half_line(
    a: f64,
    cutoff: f64,
    max_radius: f64,
    rel_tol: f64,
    mut f: impl FnMut(f64) -> f64,
) -> Result<f64, QuadratureFailure> {
    let mut lo = a;
    let mut hi = a.max(0.0) + 1.0;
    let mut total = adaptive(lo, hi, 1e-15, rel_tol, &mut f)?;
    loop {
        lo = hi;
        hi *= 2.0;
        let piece = adaptive(lo, hi, 1e-15, rel_tol, &mut f)?;
        total += piece;
        let peak = (0..=64)
            .map(|k| f(lo + (hi - lo) * k as f64 / 64.0).abs())
            .fold(0.0, f64::max);
        if peak < cutoff {
            return Ok(total);
        }
        if hi >= max_radius {
            return Err(QuadratureFailure {
                location: hi,
                reason: format!("integrand still {peak:.3e} at the truncation radius"),
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        for n in 1..12 {
            let rule = GaussLegendre::new(n);
            let w: f64 = rule.weights.iter().sum();
            assert!((w - 2.0).abs() < 1e-14, "n={n}");
            let deg = 2 * n - 1;
            let got = rule.integrate(0.0, 1.0, |x| x.powi(deg as i32));
            assert!((got - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn adaptive_handles_smooth_and_singular() {
        let v = adaptive(0.0, PI, 1e-14, 1e-12, f64::sin).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let v = adaptive(0.0, 1.0, 1e-9, 1e-6, |x| 1.0 / x.sqrt()).unwrap();
        assert!((v - 2.0).abs() < 1e-5);
        assert!(adaptive(0.0, 1.0, 1e-12, 1e-10, |x| 1.0 / x).is_err());
    }

    #[test]
    fn half_line_gaussian_moment() {
        let v = adaptive_half_line(0.0, 1e-14, 1e6, 1e-12, |r| (-r * r).exp() * r).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        assert!(adaptive_half_line(0.0, 1e-14, 1e4, 1e-10, |_| 1.0).is_err());
    }
}
