//! Gauss–Legendre and Gauss–Lobatto rules on the reference interval
//! `[-1/2, 1/2]`, normalized so the weights sum to one.

use crate::error::{Error, Result};

/// Largest rule the Newton solver is trusted for.
pub const MAX_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuadratureKind {
    Gauss,
    GaussLobatto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub kind: QuadratureKind,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn npts(&self) -> usize {
        self.nodes.len()
    }

    /// Integrates `f` over `[-1/2, 1/2]`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| w * f(s))
            .sum()
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate_on(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let h = b - a;
        let mid = 0.5 * (a + b);
        h * self.integrate(|s| f(mid + h * s))
    }

    /// Highest polynomial degree integrated exactly.
    pub fn exact_degree(&self) -> usize {
        let n = self.npts();
        match self.kind {
            QuadratureKind::Gauss => 2 * n - 1,
            QuadratureKind::GaussLobatto => 2 * n - 3,
        }
    }
}

pub fn quadrature(kind: QuadratureKind, npts: usize) -> Result<QuadratureRule> {
    let unsupported = Error::UnsupportedQuadrature { kind, npts };
    match kind {
        QuadratureKind::Gauss if (1..=MAX_POINTS).contains(&npts) => Ok(gauss(npts)),
        QuadratureKind::GaussLobatto if (2..=MAX_POINTS).contains(&npts) => Ok(gauss_lobatto(npts)),
        _ => Err(unsupported),
    }
}

/// Convenience for internal callers with compile-time valid sizes.
pub(crate) fn gauss_rule(npts: usize) -> QuadratureRule {
    quadrature(QuadratureKind::Gauss, npts).expect("gauss rule size within table range")
}

/// Legendre polynomial `P_n(y)` and its derivative on `[-1, 1]`.
pub fn legendre(n: usize, y: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, y);
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * y * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = next;
    }
    let nf = n as f64;
    let dp = if (1.0 - y * y).abs() < 1e-300 {
        // P_n'(±1) = (±1)^{n+1} n(n+1)/2
        let sign = if y > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        sign * nf * (nf + 1.0) / 2.0
    } else {
        nf * (p_prev - y * p) / (1.0 - y * y)
    };
    (p, dp)
}

fn gauss(n: usize) -> QuadratureRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut y = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, y);
            let dy = p / dp;
            y -= dy;
            if dy.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, y);
        let w = 2.0 / ((1.0 - y * y) * dp * dp);
        // store in ascending order, halved to the unit-length interval
        nodes[i] = -0.5 * y;
        nodes[n - 1 - i] = 0.5 * y;
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    QuadratureRule {
        kind: QuadratureKind::Gauss,
        nodes,
        weights,
    }
}

fn gauss_lobatto(n: usize) -> QuadratureRule {
    // interior nodes are the roots of P'_{n-1}
    let m = n - 1;
    let mf = m as f64;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    nodes[0] = -0.5;
    nodes[m] = 0.5;
    let end_w = 1.0 / (mf * (mf + 1.0));
    weights[0] = end_w;
    weights[m] = end_w;
    for i in 1..=(m / 2) {
        let mut y = (std::f64::consts::PI * i as f64 / mf).cos();
        for _ in 0..100 {
            // Newton on q(y) = P'_m(y) using (1-y^2) P''_m = 2y P'_m - m(m+1) P_m
            let (p, dp) = legendre(m, y);
            let d2p = (2.0 * y * dp - mf * (mf + 1.0) * p) / (1.0 - y * y);
            let dy = dp / d2p;
            y -= dy;
            if dy.abs() < 1e-16 {
                break;
            }
        }
        let (p, _) = legendre(m, y);
        let w = 1.0 / (mf * (mf + 1.0) * p * p);
        nodes[i] = -0.5 * y;
        nodes[m - i] = 0.5 * y;
        weights[i] = w;
        weights[m - i] = w;
    }
    if m % 2 == 0 {
        nodes[m / 2] = 0.0;
        let (p, _) = legendre(m, 0.0);
        weights[m / 2] = 1.0 / (mf * (mf + 1.0) * p * p);
    }
    QuadratureRule {
        kind: QuadratureKind::GaussLobatto,
        nodes,
        weights,
    }
}
