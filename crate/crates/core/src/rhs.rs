//! Semi-discrete DG operators with upwind fluxes.
//!
//! Everything is assembled in modal coordinates. Since the mass matrix of the
//! orthonormal basis is `Δx Δv I`, the operators return `dc/dt` directly.
//! The x-transport blocks depend only on the velocity row and are built once;
//! the field blocks depend only on the x-column and are rebuilt for every
//! field sample.

use rayon::prelude::*;

use crate::basis::BasisSpec;
use crate::error::{Error, Result};
use crate::field::DGField;
use crate::mesh::Mesh;
use crate::poisson::ElectricFieldPoly;
use crate::quadrature::gauss_rule;
use crate::scenarios::{DriveSpec, Equilibrium};

/// Upwind flux in x: the trace from the side the characteristic comes from.
pub fn flux_v(v: f64, f_minus: f64, f_plus: f64) -> f64 {
    if v >= 0.0 {
        v * f_minus
    } else {
        v * f_plus
    }
}

/// Upwind flux in v; the characteristic speed is `-E`, decided per x-cell by
/// the sign of `∫_{J_i} E dx`.
pub fn flux_e(cell_int_e: f64, f_minus: f64, f_plus: f64, e_at_node: f64) -> f64 {
    if cell_int_e <= 0.0 {
        e_at_node * f_minus
    } else {
        e_at_node * f_plus
    }
}

/// Number of Gauss points per x-cell for field-weighted integrals: exact for
/// `E·φ·∂φ` with `E` of degree `l+1`.
pub fn field_quadrature_points(degree: usize) -> usize {
    (degree + 2).max((3 * degree + 3) / 2)
}

/// The electric field as seen by the Vlasov operator: values at the x-cell
/// quadrature nodes plus the cell integrals that pick the upwind side.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub nq: usize,
    pub values: Vec<f64>,
    pub integrals: Vec<f64>,
}

impl FieldSample {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Velocity-cell moments `∫ f'_eq(v_j + Δv η) p_b(η) dη` of the equilibrium.
#[derive(Debug, Clone)]
pub struct LinearSource {
    pub equilibrium: Equilibrium,
    moments: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Operator {
    pub mesh: Mesh,
    pub spec: BasisSpec,
    dim: usize,
    x_self: Vec<Vec<f64>>,
    x_nb: Vec<Vec<f64>>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    // ∫ φ_k(ξ_q, η) ∂_η φ_m(ξ_q, η) dη, row m
    g_vol: Vec<Vec<f64>>,
    top: Vec<Vec<f64>>,
    bot: Vec<Vec<f64>>,
    px: Vec<Vec<f64>>,
}

fn dense(dim: usize) -> Vec<f64> {
    vec![0.0; dim * dim]
}

#[inline]
fn matvec_acc(a: &[f64], x: &[f64], y: &mut [f64]) {
    let n = x.len();
    for (m, ym) in y.iter_mut().enumerate() {
        let row = &a[m * n..(m + 1) * n];
        let mut s = 0.0;
        for k in 0..n {
            s += row[k] * x[k];
        }
        *ym += s;
    }
}

impl Operator {
    pub fn new(mesh: &Mesh, spec: &BasisSpec) -> Self {
        let dim = spec.dim();
        let l = spec.degree();
        let q = gauss_rule(l + 2);

        // reference matrices, row index = test function m, column = trial k
        let mut dxm = dense(dim);
        let mut dxm_eta = dense(dim);
        for (&xi, &wx) in q.nodes.iter().zip(&q.weights) {
            for (&eta, &wv) in q.nodes.iter().zip(&q.weights) {
                let phi = spec.values(xi, eta);
                let (dxi, _) = spec.gradients(xi, eta);
                for m in 0..dim {
                    for k in 0..dim {
                        let val = wx * wv * phi[k] * dxi[m];
                        dxm[m * dim + k] += val;
                        dxm_eta[m * dim + k] += val * eta;
                    }
                }
            }
        }
        // edge matrices ∫ φ_m(s_m, η) φ_k(s_k, η) dη, with and without η
        let edge = |sm: f64, sk: f64| {
            let mut a = dense(dim);
            let mut b = dense(dim);
            for (&eta, &w) in q.nodes.iter().zip(&q.weights) {
                let pm = spec.values(sm, eta);
                let pk = spec.values(sk, eta);
                for m in 0..dim {
                    for k in 0..dim {
                        a[m * dim + k] += w * pm[m] * pk[k];
                        b[m * dim + k] += w * eta * pm[m] * pk[k];
                    }
                }
            }
            (a, b)
        };
        let (rr, rr_eta) = edge(0.5, 0.5);
        let (lr, lr_eta) = edge(-0.5, 0.5);
        let (ll, ll_eta) = edge(-0.5, -0.5);
        let (rl, rl_eta) = edge(0.5, -0.5);

        let (dx, dv) = (mesh.dx, mesh.dv);
        let scale = 1.0 / (dx * dv);
        let mut x_self = Vec::with_capacity(mesh.nv);
        let mut x_nb = Vec::with_capacity(mesh.nv);
        for &vj in &mesh.v_centers {
            let mut s = dense(dim);
            let mut n = dense(dim);
            for e in 0..dim * dim {
                let vol = dv * (vj * dxm[e] + dv * dxm_eta[e]);
                if vj > 0.0 {
                    s[e] = scale * (vol - dv * (vj * rr[e] + dv * rr_eta[e]));
                    n[e] = scale * dv * (vj * lr[e] + dv * lr_eta[e]);
                } else {
                    s[e] = scale * (vol + dv * (vj * ll[e] + dv * ll_eta[e]));
                    n[e] = -scale * dv * (vj * rl[e] + dv * rl_eta[e]);
                }
            }
            x_self.push(s);
            x_nb.push(n);
        }

        let nq = field_quadrature_points(l);
        let fq = gauss_rule(nq);
        let vq = gauss_rule(l + 2);
        let mut g_vol = Vec::with_capacity(nq);
        let mut top = Vec::with_capacity(nq);
        let mut bot = Vec::with_capacity(nq);
        let mut px = Vec::with_capacity(nq);
        for &xi in &fq.nodes {
            let mut g = dense(dim);
            for (&eta, &w) in vq.nodes.iter().zip(&vq.weights) {
                let phi = spec.values(xi, eta);
                let (_, deta) = spec.gradients(xi, eta);
                for m in 0..dim {
                    for k in 0..dim {
                        g[m * dim + k] += w * phi[k] * deta[m];
                    }
                }
            }
            g_vol.push(g);
            top.push(spec.values(xi, 0.5));
            bot.push(spec.values(xi, -0.5));
            px.push(
                (0..=l)
                    .map(|a| crate::basis::legendre_orthonormal(a, xi))
                    .collect(),
            );
        }

        Self {
            mesh: mesh.clone(),
            spec: spec.clone(),
            dim,
            x_self,
            x_nb,
            nodes: fq.nodes,
            weights: fq.weights,
            g_vol,
            top,
            bot,
            px,
        }
    }

    pub fn nq(&self) -> usize {
        self.nodes.len()
    }

    pub fn field_nodes(&self) -> &[f64] {
        &self.nodes
    }

    fn check(&self, f: &DGField) -> Result<()> {
        if f.spec != self.spec || f.mesh != self.mesh {
            return Err(Error::Mismatch(
                "field layout differs from the operator's mesh/basis".into(),
            ));
        }
        Ok(())
    }

    /// Samples `E_h` (plus an optional external drive at time `t`).
    pub fn sample_field(&self, e: &ElectricFieldPoly, drive: Option<(&DriveSpec, f64)>) -> FieldSample {
        let nx = self.mesh.nx;
        let nq = self.nq();
        let dx = self.mesh.dx;
        let mut values = Vec::with_capacity(nx * nq);
        let mut integrals = Vec::with_capacity(nx);
        for i in 0..nx {
            let xc = self.mesh.x_centers[i];
            let mut integral = e.cell_integral(i);
            if let Some((d, t)) = drive {
                let amp = d.envelope(t);
                if amp != 0.0 {
                    let (a, b) = (self.mesh.x_edges[i], self.mesh.x_edges[i + 1]);
                    integral += amp / d.k
                        * ((d.k * a - d.omega * t).cos() - (d.k * b - d.omega * t).cos());
                }
            }
            for &xi in &self.nodes {
                let mut val = e.e[i].eval(xi);
                if let Some((d, t)) = drive {
                    val += d.field(xc + dx * xi, t);
                }
                values.push(val);
            }
            integrals.push(integral);
        }
        FieldSample {
            nq,
            values,
            integrals,
        }
    }

    /// `E ≡ 0`.
    pub fn zero_field(&self) -> FieldSample {
        FieldSample {
            nq: self.nq(),
            values: vec![0.0; self.mesh.nx * self.nq()],
            integrals: vec![0.0; self.mesh.nx],
        }
    }

    /// Field blocks for x-cell `i`: `(self, neighbor, neighbor offset in j)`.
    fn field_blocks(&self, field: &FieldSample, i: usize) -> (Vec<f64>, Vec<f64>, bool) {
        let dim = self.dim;
        let nq = self.nq();
        let inv_dv = 1.0 / self.mesh.dv;
        let up = field.integrals[i] <= 0.0;
        let mut s = dense(dim);
        let mut n = dense(dim);
        for q in 0..nq {
            let we = self.weights[q] * field.values[i * nq + q] * inv_dv;
            if we == 0.0 {
                continue;
            }
            let g = &self.g_vol[q];
            for e in 0..dim * dim {
                s[e] -= we * g[e];
            }
            let (t, b) = (&self.top[q], &self.bot[q]);
            for m in 0..dim {
                for k in 0..dim {
                    if up {
                        s[m * dim + k] += we * t[m] * t[k];
                        n[m * dim + k] -= we * b[m] * t[k];
                    } else {
                        n[m * dim + k] += we * t[m] * b[k];
                        s[m * dim + k] -= we * b[m] * b[k];
                    }
                }
            }
        }
        (s, n, up)
    }

    fn transport_cell(&self, f: &DGField, i: usize, j: usize, out: &mut [f64]) {
        let nx = self.mesh.nx;
        matvec_acc(&self.x_self[j], f.cell(i, j), out);
        let inb = if self.mesh.v_centers[j] > 0.0 {
            (i + nx - 1) % nx
        } else {
            (i + 1) % nx
        };
        matvec_acc(&self.x_nb[j], f.cell(inb, j), out);
    }

    /// `dc/dt` for `f_t + v f_x - E f_v = 0`.
    pub fn rhs_nonlinear(&self, f: &DGField, field: &FieldSample, out: &mut DGField) -> Result<()> {
        self.check(f)?;
        let nv = self.mesh.nv;
        let dim = self.dim;
        out.coeffs
            .par_chunks_mut(nv * dim)
            .enumerate()
            .for_each(|(i, col)| {
                let (vs, vn, up) = self.field_blocks(field, i);
                for j in 0..nv {
                    let o = &mut col[j * dim..(j + 1) * dim];
                    o.fill(0.0);
                    self.transport_cell(f, i, j, o);
                    matvec_acc(&vs, f.cell(i, j), o);
                    if up && j > 0 {
                        matvec_acc(&vn, f.cell(i, j - 1), o);
                    } else if !up && j + 1 < nv {
                        matvec_acc(&vn, f.cell(i, j + 1), o);
                    }
                }
            });
        Ok(())
    }

    /// `dc/dt` for free streaming `f_t + v f_x = 0`.
    pub fn rhs_advection(&self, f: &DGField, out: &mut DGField) -> Result<()> {
        self.check(f)?;
        let nv = self.mesh.nv;
        let dim = self.dim;
        out.coeffs
            .par_chunks_mut(nv * dim)
            .enumerate()
            .for_each(|(i, col)| {
                for j in 0..nv {
                    let o = &mut col[j * dim..(j + 1) * dim];
                    o.fill(0.0);
                    self.transport_cell(f, i, j, o);
                }
            });
        Ok(())
    }

    pub fn linear_source(&self, equilibrium: Equilibrium) -> LinearSource {
        let l = self.spec.degree();
        let q = gauss_rule(16);
        let mut moments = Vec::with_capacity(self.mesh.nv * (l + 1));
        for &vj in &self.mesh.v_centers {
            for b in 0..=l {
                moments.push(q.integrate(|eta| {
                    equilibrium.derivative(vj + self.mesh.dv * eta)
                        * crate::basis::legendre_orthonormal(b, eta)
                }));
            }
        }
        LinearSource {
            equilibrium,
            moments,
        }
    }

    /// `dc/dt` for the linearized system `f_t + v f_x = E f'_eq`.
    pub fn rhs_linear(
        &self,
        f: &DGField,
        e: &ElectricFieldPoly,
        source: &LinearSource,
        out: &mut DGField,
    ) -> Result<()> {
        self.rhs_advection(f, out)?;
        let l = self.spec.degree();
        let nv = self.mesh.nv;
        let dim = self.dim;
        let nq = self.nq();
        let modes = self.spec.modes();
        out.coeffs
            .par_chunks_mut(nv * dim)
            .enumerate()
            .for_each(|(i, col)| {
                let mut ea = vec![0.0; l + 1];
                for q in 0..nq {
                    let w = self.weights[q] * e.e[i].eval(self.nodes[q]);
                    for (a, ev) in ea.iter_mut().enumerate() {
                        *ev += w * self.px[q][a];
                    }
                }
                for j in 0..nv {
                    let g = &source.moments[j * (l + 1)..(j + 1) * (l + 1)];
                    let o = &mut col[j * dim..(j + 1) * dim];
                    for (k, &(a, b)) in modes.iter().enumerate() {
                        o[k] += ea[a] * g[b];
                    }
                }
            });
        Ok(())
    }

    /// `Θ(f, E, 1)`: net flux through `v = ±V_c`, i.e. the rate of change of
    /// total charge under the nonlinear operator.
    pub fn boundary_flux(&self, f: &DGField, field: &FieldSample) -> f64 {
        let nq = self.nq();
        let nv = self.mesh.nv;
        let dx = self.mesh.dx;
        let mut theta = 0.0;
        for i in 0..self.mesh.nx {
            let up = field.integrals[i] <= 0.0;
            let (cell, trace) = if up {
                (f.cell(i, nv - 1), &self.top)
            } else {
                (f.cell(i, 0), &self.bot)
            };
            let mut s = 0.0;
            for q in 0..nq {
                let fv: f64 = cell.iter().zip(&trace[q]).map(|(c, p)| c * p).sum();
                s += self.weights[q] * field.values[i * nq + q] * fv;
            }
            theta += if up { dx * s } else { -dx * s };
        }
        theta
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::project;
    use crate::mesh::build_mesh;
    use crate::poisson::solve_nonlinear;
    use std::f64::consts::PI;

    #[test]
    fn flux_branches() {
        assert_eq!(flux_v(1.0, 2.0, 5.0), 2.0);
        assert_eq!(flux_v(-1.0, 2.0, 5.0), -5.0);
        assert_eq!(flux_v(0.0, 2.0, 5.0), 0.0);
        assert_eq!(flux_e(-0.3, 1.0, 4.0, -0.3), -0.3);
        assert!((flux_e(0.3, 1.0, 4.0, 0.3) - 1.2).abs() < 1e-15);
        assert_eq!(flux_e(0.0, 1.0, 4.0, 2.0), 2.0);
    }

    #[test]
    fn constant_state_is_stationary() {
        let mesh = build_mesh(6, 8, 2.0, 2.0).unwrap();
        for spec in [BasisSpec::tensor(2).unwrap(), BasisSpec::total_degree(1).unwrap()] {
            let op = Operator::new(&mesh, &spec);
            let f = project(|_, _| 1.0, &mesh, &spec);
            let mut out = DGField::zeros(&mesh, &spec);
            op.rhs_nonlinear(&f, &op.zero_field(), &mut out).unwrap();
            assert!(out.coeffs.iter().all(|c| c.abs() < 1e-13));
        }
    }

    #[test]
    fn piecewise_constant_is_upwind_finite_volume() {
        let mesh = build_mesh(7, 6, 3.0, 3.0).unwrap();
        let spec = BasisSpec::tensor(0).unwrap();
        let op = Operator::new(&mesh, &spec);
        let f = project(|x, v| (x * 2.0).sin() + 0.3 * v, &mesh, &spec);
        let mut out = DGField::zeros(&mesh, &spec);
        op.rhs_advection(&f, &mut out).unwrap();
        for i in 0..7 {
            for j in 0..6 {
                let vj = mesh.v_centers[j];
                let expected = if vj >= 0.0 {
                    -vj * (f.cell(i, j)[0] - f.cell((i + 6) % 7, j)[0]) / mesh.dx
                } else {
                    -vj * (f.cell((i + 1) % 7, j)[0] - f.cell(i, j)[0]) / mesh.dx
                };
                assert!((out.cell(i, j)[0] - expected).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn charge_rate_is_boundary_flux() {
        let mesh = build_mesh(10, 12, 4.0 * PI, 3.0).unwrap();
        let spec = BasisSpec::total_degree(2).unwrap();
        let op = Operator::new(&mesh, &spec);
        // deliberately nonzero at v = ±Vc
        let f = project(|x, v| (1.0 + 0.4 * (0.5 * x).cos()) * (-0.1 * v * v).exp(), &mesh, &spec);
        let e = solve_nonlinear(&f.density());
        let field = op.sample_field(&e, None);
        let mut out = DGField::zeros(&mesh, &spec);
        op.rhs_nonlinear(&f, &field, &mut out).unwrap();
        let rate = out.total_charge();
        let theta = op.boundary_flux(&f, &field);
        assert!(theta.abs() > 1e-6);
        assert!((rate - theta).abs() < 1e-12, "{rate} vs {theta}");
    }
}
