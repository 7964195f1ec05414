use crate::quadrature::{adaptive, GaussLegendre};

/// Nodes of the discrete rule that approximates convolution with the kernel.
const KERNEL_NODES: usize = 64;

/// Classical bump `exp(1/(s²−1))` on `(−1, 1)`, scaled to `[−δ, δ]` with unit
/// integral. Convolution uses a symmetric discrete rule whose weights sum to
/// one, so constants and linear functions pass through unchanged up to roundoff.
#[derive(Debug, Clone)]
pub struct Mollifier {
    delta: f64,
    norm: f64,
    offsets: Vec<f64>,
    weights: Vec<f64>,
}

fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 / (s * s - 1.0)).exp()
    }
}

impl Mollifier {
    pub fn new(delta: f64) -> Self {
        let norm = adaptive(-1.0, 1.0, 1e-16, 1e-14, bump).expect("bump is smooth");
        if delta == 0.0 {
            return Self {
                delta,
                norm,
                offsets: vec![0.0],
                weights: vec![1.0],
            };
        }
        let rule = GaussLegendre::new(KERNEL_NODES);
        let mut offsets = Vec::with_capacity(KERNEL_NODES);
        let mut weights = Vec::with_capacity(KERNEL_NODES);
        for (s, w) in rule.nodes.iter().zip(&rule.weights) {
            offsets.push(delta * s);
            weights.push(w * bump(*s));
        }
        // Pair up mirrored nodes so the rule is exactly even.
        let n = weights.len();
        for i in 0..n / 2 {
            let avg = 0.5 * (weights[i] + weights[n - 1 - i]);
            weights[i] = avg;
            weights[n - 1 - i] = avg;
            offsets[n - 1 - i] = -offsets[i];
        }
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        Self {
            delta,
            norm,
            offsets,
            weights,
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Kernel value `J_δ(s)`.
    pub fn kernel(&self, s: f64) -> f64 {
        if self.delta == 0.0 {
            return if s == 0.0 { f64::INFINITY } else { 0.0 };
        }
        bump(s / self.delta) / (self.norm * self.delta)
    }

    /// `(f * J_δ)(x)`; with `δ = 0` this is `f(x)`.
    pub fn convolve(&self, x: f64, f: impl Fn(f64) -> f64) -> f64 {
        if self.delta == 0.0 {
            return f(x);
        }
        // Sum mirrored pairs from the outside in so that even rules stay even.
        let n = self.weights.len();
        let mut acc = 0.0;
        for i in 0..n / 2 {
            let o = self.offsets[n - 1 - i];
            acc += self.weights[i] * (f(x - o) + f(x + o));
        }
        if n % 2 == 1 {
            acc += self.weights[n / 2] * f(x);
        }
        acc
    }
}
