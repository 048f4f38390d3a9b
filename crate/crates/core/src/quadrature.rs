//! Composite Gauss-Legendre quadrature for smooth complex integrands.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Nodes and weights of an `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
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
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate over `[a, b]` split into `panels` equal panels.
    pub fn integrate<F>(&self, f: F, a: f64, b: f64, panels: usize) -> C64
    where
        F: Fn(f64) -> C64,
    {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..panels {
            let mid = a + (j as f64 + 0.5) * h;
            let half = 0.5 * h;
            let mut part = C64::new(0.0, 0.0);
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                part += f(mid + half * x) * *w;
            }
            acc += part * half;
        }
        acc
    }

    /// Integrate with `panels` and `2 * panels`; return the finer estimate if
    /// the two agree to `tolerance` in absolute value.
    pub fn integrate_checked<F>(&self, f: F, a: f64, b: f64, panels: usize, tolerance: f64) -> Result<C64>
    where
        F: Fn(f64) -> C64,
    {
        let coarse = self.integrate(&f, a, b, panels);
        let fine = self.integrate(&f, a, b, 2 * panels.max(1));
        let difference = (fine - coarse).norm();
        if difference > tolerance {
            return Err(Error::QuadratureUnresolved { difference, tolerance });
        }
        Ok(fine)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
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
