//! Univariate polynomials in a cell-local coordinate `s ∈ [-1/2, 1/2]`,
//! stored by monomial coefficients. Degrees stay below ~8 here, so the
//! monomial form is well conditioned.

use std::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly1 {
    coeffs: Vec<f64>,
}

impl Poly1 {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![0.0] }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    pub fn derivative(&self) -> Poly1 {
        if self.coeffs.len() <= 1 {
            return Poly1::zero();
        }
        Poly1::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    /// Antiderivative vanishing at `s = -1/2`.
    pub fn antiderivative(&self) -> Poly1 {
        let mut out = vec![0.0; self.coeffs.len() + 1];
        for (k, &c) in self.coeffs.iter().enumerate() {
            out[k + 1] = c / (k as f64 + 1.0);
        }
        let mut p = Poly1::new(out);
        let shift = p.eval(-0.5);
        p.coeffs[0] -= shift;
        p
    }

    /// `∫_{-1/2}^{1/2} p(s) ds`, exact.
    pub fn integral(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(k, _)| k % 2 == 0)
            .map(|(k, &c)| c * 2.0 * 0.5f64.powi(k as i32 + 1) / (k as f64 + 1.0))
            .sum()
    }

    pub fn scale(&self, a: f64) -> Poly1 {
        Poly1::new(self.coeffs.iter().map(|c| a * c).collect())
    }

    /// Real critical points of `p` in the open interval `(-1/2, 1/2)`.
    pub fn critical_points(&self) -> Vec<f64> {
        real_roots_in(&self.derivative(), -0.5, 0.5)
    }

    /// Maximum of `p` over `[-1/2, 1/2]`.
    pub fn max_on_cell(&self) -> f64 {
        let mut best = self.eval(-0.5).max(self.eval(0.5));
        for s in self.critical_points() {
            best = best.max(self.eval(s));
        }
        best
    }

    /// Maximum of `|p|` over `[-1/2, 1/2]`.
    pub fn max_abs_on_cell(&self) -> f64 {
        let mut best = self.eval(-0.5).abs().max(self.eval(0.5).abs());
        for s in self.critical_points() {
            best = best.max(self.eval(s).abs());
        }
        best
    }
}

impl Add for &Poly1 {
    type Output = Poly1;
    fn add(self, rhs: &Poly1) -> Poly1 {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly1::new(
            (0..n)
                .map(|k| self.coeffs.get(k).unwrap_or(&0.0) + rhs.coeffs.get(k).unwrap_or(&0.0))
                .collect(),
        )
    }
}

impl Sub for &Poly1 {
    type Output = Poly1;
    fn sub(self, rhs: &Poly1) -> Poly1 {
        self + &rhs.scale(-1.0)
    }
}

impl Mul for &Poly1 {
    type Output = Poly1;
    fn mul(self, rhs: &Poly1) -> Poly1 {
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (a, &ca) in self.coeffs.iter().enumerate() {
            for (b, &cb) in rhs.coeffs.iter().enumerate() {
                out[a + b] += ca * cb;
            }
        }
        Poly1::new(out)
    }
}

/// Real roots of `p` in `(lo, hi)`, located by sign changes on a fine
/// sampling and polished by bisection + Newton. Double roots that do not
/// change sign are picked up through the minima of `|p|` only when they are
/// exact zeros at a sample, which is enough for extremum searches.
fn real_roots_in(p: &Poly1, lo: f64, hi: f64) -> Vec<f64> {
    let deg = p.degree();
    if deg == 0 {
        return Vec::new();
    }
    if deg == 1 {
        let c = p.coeffs();
        if c[1] == 0.0 {
            return Vec::new();
        }
        let r = -c[0] / c[1];
        return if r > lo && r < hi { vec![r] } else { Vec::new() };
    }
    if deg == 2 {
        let c = p.coeffs();
        let (a, b, cc) = (c[2], c[1], c[0]);
        if a == 0.0 {
            return real_roots_in(&Poly1::new(vec![cc, b]), lo, hi);
        }
        let disc = b * b - 4.0 * a * cc;
        if disc < 0.0 {
            return Vec::new();
        }
        let sq = disc.sqrt();
        let q = -0.5 * (b + b.signum().max(0.0).mul_add(2.0, -1.0) * sq);
        let mut roots = Vec::new();
        if q != 0.0 {
            roots.push(cc / q);
            roots.push(q / a);
        } else {
            roots.push(0.0);
        }
        roots.retain(|&r| r > lo && r < hi);
        return roots;
    }
    let samples = 32 * deg;
    let h = (hi - lo) / samples as f64;
    let mut roots = Vec::new();
    let mut s0 = lo;
    let mut f0 = p.eval(s0);
    for k in 1..=samples {
        let s1 = lo + k as f64 * h;
        let f1 = p.eval(s1);
        if f1 == 0.0 && k < samples {
            roots.push(s1);
        } else if f0 * f1 < 0.0 {
            let (mut a, mut b, mut fa) = (s0, s1, f0);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let fm = p.eval(m);
                if fm == 0.0 || (b - a) < 1e-15 {
                    a = m;
                    b = m;
                    break;
                }
                if fa * fm < 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            roots.push(0.5 * (a + b));
        }
        s0 = s1;
        f0 = f1;
    }
    roots
}
