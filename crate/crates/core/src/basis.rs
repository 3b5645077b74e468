//! Modal orthonormal Legendre bases for the tensor-product space `Q^l` and
//! the total-degree space `P^l` on the reference cell `[-1/2, 1/2]^2`.
//!
//! Mode `(a, b)` is `p_a(ξ) p_b(η)` with `p_n(s) = √(2n+1) P_n(2s)`, so the
//! Gram matrix under the unit reference measure is the identity and mode 0 is
//! the constant 1. Modes are ordered by total degree, then by increasing
//! velocity degree.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::legendre;

pub const MAX_DEGREE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisFamily {
    TensorQ,
    TotalDegreeP,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisSpec {
    family: BasisFamily,
    degree: usize,
    modes: Vec<(usize, usize)>,
}

impl BasisSpec {
    pub fn new(family: BasisFamily, degree: usize) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(Error::UnsupportedDegree(degree));
        }
        let mut modes = Vec::new();
        let max_total = match family {
            BasisFamily::TensorQ => 2 * degree,
            BasisFamily::TotalDegreeP => degree,
        };
        for total in 0..=max_total {
            for b in 0..=total {
                let a = total - b;
                if a <= degree && b <= degree {
                    modes.push((a, b));
                }
            }
        }
        Ok(Self {
            family,
            degree,
            modes,
        })
    }

    pub fn tensor(degree: usize) -> Result<Self> {
        Self::new(BasisFamily::TensorQ, degree)
    }

    pub fn total_degree(degree: usize) -> Result<Self> {
        Self::new(BasisFamily::TotalDegreeP, degree)
    }

    pub fn family(&self) -> BasisFamily {
        self.family
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    /// `(x-degree, v-degree)` of each mode.
    pub fn modes(&self) -> &[(usize, usize)] {
        &self.modes
    }

    /// Index of mode `(a, b)`, if it belongs to the space.
    pub fn mode_of(&self, a: usize, b: usize) -> Option<usize> {
        self.modes.iter().position(|&m| m == (a, b))
    }

    /// Short label such as `Q2` or `P1`.
    pub fn label(&self) -> String {
        let f = match self.family {
            BasisFamily::TensorQ => 'Q',
            BasisFamily::TotalDegreeP => 'P',
        };
        format!("{f}{}", self.degree)
    }

    pub fn eval(&self, mode: usize, xi: f64, eta: f64) -> Result<f64> {
        let &(a, b) = self.modes.get(mode).ok_or(Error::ModeOutOfRange {
            index: mode,
            dim: self.dim(),
        })?;
        Ok(legendre_orthonormal(a, xi) * legendre_orthonormal(b, eta))
    }

    /// All basis values at `(ξ, η)`.
    pub fn eval_all(&self, xi: f64, eta: f64, out: &mut [f64]) {
        let px = legendre_table(self.degree, xi);
        let pv = legendre_table(self.degree, eta);
        for (o, &(a, b)) in out.iter_mut().zip(&self.modes) {
            *o = px[a] * pv[b];
        }
    }

    pub fn values(&self, xi: f64, eta: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval_all(xi, eta, &mut out);
        out
    }

    /// Partial derivatives `(∂_ξ φ, ∂_η φ)` of every mode at `(ξ, η)`.
    pub fn gradients(&self, xi: f64, eta: f64) -> (Vec<f64>, Vec<f64>) {
        let px = legendre_table(self.degree, xi);
        let pv = legendre_table(self.degree, eta);
        let dpx = legendre_deriv_table(self.degree, xi);
        let dpv = legendre_deriv_table(self.degree, eta);
        let dxi = self.modes.iter().map(|&(a, b)| dpx[a] * pv[b]).collect();
        let deta = self.modes.iter().map(|&(a, b)| px[a] * dpv[b]).collect();
        (dxi, deta)
    }

    /// Evaluates the local polynomial with coefficients `coeffs` at `(ξ, η)`.
    pub fn eval_expansion(&self, coeffs: &[f64], xi: f64, eta: f64) -> f64 {
        let px = legendre_table(self.degree, xi);
        let pv = legendre_table(self.degree, eta);
        coeffs
            .iter()
            .zip(&self.modes)
            .map(|(c, &(a, b))| c * px[a] * pv[b])
            .sum()
    }
}

/// Free-function form of [`BasisSpec::eval`].
pub fn basis_eval(spec: &BasisSpec, mode: usize, xi: f64, eta: f64) -> Result<f64> {
    spec.eval(mode, xi, eta)
}

/// `√(2n+1) P_n(2s)`: orthonormal on `[-1/2, 1/2]` under the unit measure.
pub fn legendre_orthonormal(n: usize, s: f64) -> f64 {
    ((2 * n + 1) as f64).sqrt() * legendre(n, 2.0 * s).0
}

pub fn legendre_orthonormal_deriv(n: usize, s: f64) -> f64 {
    2.0 * ((2 * n + 1) as f64).sqrt() * legendre(n, 2.0 * s).1
}

fn legendre_table(degree: usize, s: f64) -> [f64; MAX_DEGREE + 1] {
    let y = 2.0 * s;
    let mut p = [0.0; MAX_DEGREE + 1];
    p[0] = 1.0;
    if degree >= 1 {
        p[1] = y;
    }
    for n in 1..degree {
        let nf = n as f64;
        p[n + 1] = ((2.0 * nf + 1.0) * y * p[n] - nf * p[n - 1]) / (nf + 1.0);
    }
    for (n, v) in p.iter_mut().enumerate().take(degree + 1) {
        *v *= ((2 * n + 1) as f64).sqrt();
    }
    p
}

fn legendre_deriv_table(degree: usize, s: f64) -> [f64; MAX_DEGREE + 1] {
    let mut d = [0.0; MAX_DEGREE + 1];
    for (n, v) in d.iter_mut().enumerate().take(degree + 1) {
        *v = legendre_orthonormal_deriv(n, s);
    }
    d
}

/// Monomial coefficients (in `s`) of `√(2n+1) P_n(2s)` for `n = 0..=degree`.
pub fn legendre_monomials(degree: usize) -> Vec<Vec<f64>> {
    // P_n(y) in powers of y, then substitute y = 2s
    let mut py: Vec<Vec<f64>> = vec![vec![1.0]];
    if degree >= 1 {
        py.push(vec![0.0, 1.0]);
    }
    for n in 1..degree {
        let nf = n as f64;
        let mut next = vec![0.0; n + 2];
        for (k, &c) in py[n].iter().enumerate() {
            next[k + 1] += (2.0 * nf + 1.0) * c / (nf + 1.0);
        }
        for (k, &c) in py[n - 1].iter().enumerate() {
            next[k] -= nf * c / (nf + 1.0);
        }
        py.push(next);
    }
    py.into_iter()
        .enumerate()
        .map(|(n, coeffs)| {
            let norm = ((2 * n + 1) as f64).sqrt();
            coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| norm * c * 2f64.powi(k as i32))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_rule;

    fn all_specs() -> Vec<BasisSpec> {
        let mut v = Vec::new();
        for l in 0..=MAX_DEGREE {
            v.push(BasisSpec::tensor(l).unwrap());
            v.push(BasisSpec::total_degree(l).unwrap());
        }
        v
    }

    #[test]
    fn dimensions() {
        for l in 0..=MAX_DEGREE {
            assert_eq!(BasisSpec::tensor(l).unwrap().dim(), (l + 1) * (l + 1));
            assert_eq!(BasisSpec::total_degree(l).unwrap().dim(), (l + 1) * (l + 2) / 2);
            if l >= 1 {
                assert!((l + 1) * (l + 2) / 2 < (l + 1) * (l + 1));
            }
        }
        assert!(BasisSpec::tensor(4).is_err());
    }

    #[test]
    fn constant_mode_is_one() {
        for spec in all_specs() {
            for &(x, v) in &[(0.0, 0.0), (0.5, -0.5), (-0.31, 0.12)] {
                assert_eq!(spec.eval(0, x, v).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn gram_matrix_is_identity() {
        for spec in all_specs() {
            let n = spec.degree() + 2;
            let q = gauss_rule(n);
            let dim = spec.dim();
            let mut gram = vec![0.0; dim * dim];
            for (&xi, &wx) in q.nodes.iter().zip(&q.weights) {
                for (&eta, &wv) in q.nodes.iter().zip(&q.weights) {
                    let phi = spec.values(xi, eta);
                    for a in 0..dim {
                        for b in 0..dim {
                            gram[a * dim + b] += wx * wv * phi[a] * phi[b];
                        }
                    }
                }
            }
            for a in 0..dim {
                for b in 0..dim {
                    let expected = if a == b { 1.0 } else { 0.0 };
                    assert!(
                        (gram[a * dim + b] - expected).abs() < 1e-13,
                        "{} ({a},{b}) = {}",
                        spec.label(),
                        gram[a * dim + b]
                    );
                }
            }
        }
    }

    #[test]
    fn out_of_range_mode() {
        let spec = BasisSpec::total_degree(1).unwrap();
        assert!(matches!(
            spec.eval(3, 0.0, 0.0),
            Err(Error::ModeOutOfRange { index: 3, dim: 3 })
        ));
    }

    #[test]
    fn monomial_form_matches_recurrence() {
        let mono = legendre_monomials(MAX_DEGREE);
        for (n, coeffs) in mono.iter().enumerate() {
            for &s in &[-0.5, -0.2, 0.0, 0.13, 0.5] {
                let direct = legendre_orthonormal(n, s);
                let from_mono: f64 = coeffs.iter().enumerate().map(|(k, c)| c * s.powi(k as i32)).sum();
                assert!((direct - from_mono).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for n in 0..=MAX_DEGREE {
            for &s in &[-0.4, 0.0, 0.27] {
                let h = 1e-6;
                let fd = (legendre_orthonormal(n, s + h) - legendre_orthonormal(n, s - h)) / (2.0 * h);
                assert!((fd - legendre_orthonormal_deriv(n, s)).abs() < 1e-7);
            }
        }
    }
}
