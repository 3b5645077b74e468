//! Closed-form ("exact") solution of the 1D periodic Poisson problem for a
//! piecewise polynomial density.

use crate::field::{locate_x, DensityPoly};
use crate::poly::Poly1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoissonKind {
    /// `E' = 1 - ρ` with a neutralizing ion background.
    Nonlinear,
    /// `E' = -ρ` for the perturbation of the linearized system.
    Linear,
}

/// Per x-cell polynomials (in `ξ`) of `E_h` and `Φ_h`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElectricFieldPoly {
    pub dx: f64,
    pub length: f64,
    pub ce: f64,
    pub e: Vec<Poly1>,
    pub phi: Vec<Poly1>,
}

pub fn solve_nonlinear(rho: &DensityPoly) -> ElectricFieldPoly {
    solve(rho, PoissonKind::Nonlinear)
}

pub fn solve_linear(rho: &DensityPoly) -> ElectricFieldPoly {
    solve(rho, PoissonKind::Linear)
}

pub fn solve(rho: &DensityPoly, kind: PoissonKind) -> ElectricFieldPoly {
    let nx = rho.nx();
    let dx = rho.dx;
    let length = dx * nx as f64;

    // R(x) = ∫_0^x ρ restricted to cell i is R_i + dx·A_i(ξ)
    let anti: Vec<Poly1> = rho.cells.iter().map(Poly1::antiderivative).collect();
    let mut r_edge = Vec::with_capacity(nx);
    let mut acc = 0.0;
    for i in 0..nx {
        r_edge.push(acc);
        acc += dx * anti[i].eval(0.5);
    }
    let int_r: f64 = (0..nx)
        .map(|i| dx * (r_edge[i] + dx * anti[i].integral()))
        .sum();
    let ce = match kind {
        PoissonKind::Nonlinear => -length / 2.0 + int_r / length,
        PoissonKind::Linear => int_r / length,
    };

    let mut e = Vec::with_capacity(nx);
    let mut phi = Vec::with_capacity(nx);
    let mut phi_edge = 0.0;
    for i in 0..nx {
        // x = x_{i-1/2} + dx(ξ + 1/2)
        let mut ei = Poly1::constant(ce - r_edge[i]);
        ei = &ei - &anti[i].scale(dx);
        if kind == PoissonKind::Nonlinear {
            let x_lo = i as f64 * dx;
            ei = &ei + &Poly1::new(vec![x_lo + 0.5 * dx, dx]);
        }
        // Φ = -∫_0^x E
        let ai = ei.antiderivative();
        let mut pi = ai.scale(-dx);
        let c0 = pi.coeffs()[0] + phi_edge;
        let mut coeffs = pi.coeffs().to_vec();
        coeffs[0] = c0;
        pi = Poly1::new(coeffs);
        phi_edge = pi.eval(0.5);
        e.push(ei);
        phi.push(pi);
    }
    ElectricFieldPoly {
        dx,
        length,
        ce,
        e,
        phi,
    }
}

impl ElectricFieldPoly {
    pub fn zero(dx: f64, nx: usize) -> Self {
        Self {
            dx,
            length: dx * nx as f64,
            ce: 0.0,
            e: vec![Poly1::zero(); nx],
            phi: vec![Poly1::zero(); nx],
        }
    }

    pub fn nx(&self) -> usize {
        self.e.len()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (i, xi) = locate_x(x, self.dx, self.nx());
        self.e[i].eval(xi)
    }

    pub fn potential(&self, x: f64) -> f64 {
        let (i, xi) = locate_x(x, self.dx, self.nx());
        self.phi[i].eval(xi)
    }

    pub fn cell_integral(&self, i: usize) -> f64 {
        self.dx * self.e[i].integral()
    }

    /// `½∫E²`.
    pub fn energy(&self) -> f64 {
        0.5 * self.dx * self.e.iter().map(|p| (p * p).integral()).sum::<f64>()
    }

    pub fn max_abs(&self) -> f64 {
        self.e.iter().map(Poly1::max_abs_on_cell).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisSpec;
    use crate::field::project;
    use crate::mesh::build_mesh;
    use std::f64::consts::PI;

    fn density_from(g: impl Fn(f64) -> f64 + Sync, nx: usize, l: usize) -> DensityPoly {
        // a field constant in v on a single velocity cell of unit width
        let mesh = build_mesh(nx, 2, 4.0 * PI, 0.5).unwrap();
        let spec = BasisSpec::tensor(l).unwrap();
        project(|x, _| g(x), &mesh, &spec).density()
    }

    #[test]
    fn neutral_plasma_has_no_field() {
        let rho = density_from(|_| 1.0, 10, 2);
        let e = solve_nonlinear(&rho);
        for x in [0.0, 1.0, 5.0, 4.0 * PI] {
            assert!(e.eval(x).abs() < 1e-13);
        }
    }

    #[test]
    fn cosine_perturbation() {
        let rho = density_from(|x| 1.0 + 0.01 * (0.5 * x).cos(), 40, 3);
        let e = solve_nonlinear(&rho);
        for k in 0..100 {
            let x = 4.0 * PI * k as f64 / 99.0;
            let exact = -0.02 * (0.5 * x).sin();
            // projection error of the density is the only error left
            assert!((e.eval(x) - exact).abs() < 1e-9, "{x}: {} vs {exact}", e.eval(x));
        }
        assert!((e.eval(0.0) - e.eval(4.0 * PI)).abs() < 1e-12);
        assert!(e.potential(0.0).abs() < 1e-15);
        assert!((e.potential(4.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn linear_solver_zero_density() {
        let rho = density_from(|_| 0.0, 6, 1);
        let e = solve_linear(&rho);
        assert!(e.max_abs() == 0.0);
    }

    #[test]
    fn field_derivative_matches_density() {
        let rho = density_from(|x| 1.0 + 0.3 * (0.5 * x).sin() + 0.1 * x.cos(), 12, 2);
        let e = solve_nonlinear(&rho);
        for (i, p) in e.e.iter().enumerate() {
            let de = p.derivative().scale(1.0 / e.dx);
            let target = &Poly1::constant(1.0) - &rho.cells[i];
            let diff = &de - &target;
            assert!(diff.coeffs().iter().all(|c| c.abs() < 1e-11));
            let dphi = e.phi[i].derivative().scale(-1.0 / e.dx);
            assert!((&dphi - p).coeffs().iter().all(|c| c.abs() < 1e-11));
        }
    }
}
