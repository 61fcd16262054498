//! Gauss–Legendre quadrature with adaptive bisection.

use crate::error::{Error, Result};

/// Nodes and weights of an `order`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_order` from the Chebyshev-like initial guesses.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let s: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum();
        s * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadEstimate {
    pub value: f64,
    pub error: f64,
}

const MAX_DEPTH: u32 = 40;

/// Adaptive Gauss–Legendre: each panel is accepted when the one-panel and
/// two-half-panel results agree to within the panel's share of `abs_tol`.
pub fn adaptive<F: Fn(f64) -> f64>(
    rule: &GaussLegendre,
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
) -> Result<QuadEstimate> {
    let mut value = crate::numeric::CompensatedSum::new();
    let mut error = 0.0;
    let mut failed = false;
    let mut stack = vec![(a, b, rule.integrate(f, a, b), abs_tol, 0u32)];
    while let Some((lo, hi, whole, tol, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(f, lo, mid);
        let right = rule.integrate(f, mid, hi);
        let diff = (left + right - whole).abs();
        if diff <= tol || depth >= MAX_DEPTH {
            failed |= diff > tol;
            value.add(left + right);
            error += diff;
        } else {
            stack.push((mid, hi, right, 0.5 * tol, depth + 1));
            stack.push((lo, mid, left, 0.5 * tol, depth + 1));
        }
    }
    if failed || !error.is_finite() {
        return Err(Error::Quadrature {
            tol: abs_tol,
            estimate: error,
        });
    }
    Ok(QuadEstimate {
        value: value.value(),
        error,
    })
}
