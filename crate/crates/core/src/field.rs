use std::io::Write;
use std::path::Path;

use crate::basis::BasisSpec;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::poly::Poly1;
use crate::quadrature::gauss_rule;

/// Modal coefficients of `f_h`, cell-major: cell `(i, j)` occupies
/// `coeffs[(i·Nv + j)·dim ..][..dim]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DGField {
    pub mesh: Mesh,
    pub spec: BasisSpec,
    pub coeffs: Vec<f64>,
}

/// Per x-cell polynomial of `ρ_h` in the local coordinate `ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityPoly {
    pub dx: f64,
    pub cells: Vec<Poly1>,
}

impl DGField {
    pub fn zeros(mesh: &Mesh, spec: &BasisSpec) -> Self {
        Self {
            mesh: mesh.clone(),
            spec: spec.clone(),
            coeffs: vec![0.0; mesh.num_cells() * spec.dim()],
        }
    }

    pub fn from_coeffs(mesh: &Mesh, spec: &BasisSpec, coeffs: Vec<f64>) -> Result<Self> {
        let expected = mesh.num_cells() * spec.dim();
        if coeffs.len() != expected {
            return Err(Error::Mismatch(format!(
                "expected {expected} coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(Self {
            mesh: mesh.clone(),
            spec: spec.clone(),
            coeffs,
        })
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    #[inline]
    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        i * self.mesh.nv + j
    }

    pub fn cell(&self, i: usize, j: usize) -> &[f64] {
        let d = self.dim();
        let c = self.cell_index(i, j);
        &self.coeffs[c * d..(c + 1) * d]
    }

    pub fn cell_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let d = self.dim();
        let c = self.cell_index(i, j);
        &mut self.coeffs[c * d..(c + 1) * d]
    }

    pub fn cell_average(&self, i: usize, j: usize) -> f64 {
        self.cell(i, j)[0]
    }

    pub fn same_layout(&self, other: &DGField) -> bool {
        self.spec == other.spec && self.mesh == other.mesh
    }

    /// `self += a·other`.
    pub fn axpy(&mut self, a: f64, other: &DGField) {
        for (s, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *s += a * o;
        }
    }

    /// `a·self + b·other` as a new field.
    pub fn lincomb(&self, a: f64, other: &DGField, b: f64) -> DGField {
        let mut out = self.clone();
        for (s, o) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *s = a * *s + b * o;
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Local polynomial value at reference coordinates of cell `(i, j)`.
    pub fn eval_local(&self, i: usize, j: usize, xi: f64, eta: f64) -> f64 {
        self.spec.eval_expansion(self.cell(i, j), xi, eta)
    }

    pub fn evaluate(&self, x: f64, v: f64) -> Result<f64> {
        let (i, j) = match (self.mesh.x_cell(x), self.mesh.v_cell(v)) {
            (Some(i), Some(j)) => (i, j),
            _ => return Err(Error::OutOfDomain { x, v }),
        };
        Ok(self.eval_local(i, j, self.mesh.x_ref(i, x), self.mesh.v_ref(j, v)))
    }

    /// `ρ_h`: exact velocity integral, using `∫ p_b dη = δ_{b0}`.
    pub fn density(&self) -> DensityPoly {
        let l = self.spec.degree();
        let mono = crate::basis::legendre_monomials(l);
        let x_modes: Vec<(usize, usize)> = self
            .spec
            .modes()
            .iter()
            .enumerate()
            .filter(|(_, &(_, b))| b == 0)
            .map(|(k, &(a, _))| (k, a))
            .collect();
        let cells = (0..self.mesh.nx)
            .map(|i| {
                let mut r = vec![0.0; l + 1];
                for j in 0..self.mesh.nv {
                    let c = self.cell(i, j);
                    for &(k, a) in &x_modes {
                        r[a] += c[k];
                    }
                }
                let mut coeffs = vec![0.0; l + 1];
                for (a, ra) in r.iter().enumerate() {
                    for (p, m) in mono[a].iter().enumerate() {
                        coeffs[p] += self.mesh.dv * ra * m;
                    }
                }
                Poly1::new(coeffs)
            })
            .collect();
        DensityPoly {
            dx: self.mesh.dx,
            cells,
        }
    }

    /// `∫∫ f_h`.
    pub fn total_charge(&self) -> f64 {
        let area = self.mesh.dx * self.mesh.dv;
        let d = self.dim();
        self.coeffs.chunks(d).map(|c| c[0]).sum::<f64>() * area
    }

    /// `∫∫ f_h²`.
    pub fn l2_squared(&self) -> f64 {
        let area = self.mesh.dx * self.mesh.dv;
        self.coeffs.iter().map(|c| c * c).sum::<f64>() * area
    }

    /// Quarter-point samples `(x, v, f)` in cell order.
    pub fn quarter_point_samples(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(4 * self.mesh.num_cells());
        for i in 0..self.mesh.nx {
            for j in 0..self.mesh.nv {
                for &xi in &[-0.25, 0.25] {
                    for &eta in &[-0.25, 0.25] {
                        let x = self.mesh.x_centers[i] + xi * self.mesh.dx;
                        let v = self.mesh.v_centers[j] + eta * self.mesh.dv;
                        out.push((x, v, self.eval_local(i, j, xi, eta)));
                    }
                }
            }
        }
        out
    }

    pub fn write_snapshot(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        let mut body = String::from("x,v,f\n");
        for (x, v, f) in self.quarter_point_samples() {
            body.push_str(&format!("{x:.12e},{v:.12e},{f:.12e}\n"));
        }
        w.write_all(body.as_bytes()).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Cell-wise L² projection of `f0`, using `npts`-point Gauss per direction.
pub fn project_with(
    f0: impl Fn(f64, f64) -> f64 + Sync,
    mesh: &Mesh,
    spec: &BasisSpec,
    npts: usize,
) -> DGField {
    let q = gauss_rule(npts);
    let dim = spec.dim();
    // basis values at the tensor quadrature points, shared by all cells
    let mut table = Vec::with_capacity(npts * npts);
    for &xi in &q.nodes {
        for &eta in &q.nodes {
            table.push(spec.values(xi, eta));
        }
    }
    let mut field = DGField::zeros(mesh, spec);
    for i in 0..mesh.nx {
        for j in 0..mesh.nv {
            let cell = field.cell_mut(i, j);
            for (a, (&xi, &wx)) in q.nodes.iter().zip(&q.weights).enumerate() {
                let x = mesh.x_centers[i] + xi * mesh.dx;
                for (b, (&eta, &wv)) in q.nodes.iter().zip(&q.weights).enumerate() {
                    let v = mesh.v_centers[j] + eta * mesh.dv;
                    let fw = wx * wv * f0(x, v);
                    let phi = &table[a * npts + b];
                    for k in 0..dim {
                        cell[k] += fw * phi[k];
                    }
                }
            }
        }
    }
    field
}

/// L² projection with a rule comfortably above the basis degree.
pub fn project(f0: impl Fn(f64, f64) -> f64 + Sync, mesh: &Mesh, spec: &BasisSpec) -> DGField {
    project_with(f0, mesh, spec, spec.degree() + 4)
}

impl DensityPoly {
    pub fn nx(&self) -> usize {
        self.cells.len()
    }

    /// `∫_{J_i} ρ_h dx`.
    pub fn cell_integral(&self, i: usize) -> f64 {
        self.dx * self.cells[i].integral()
    }

    pub fn total(&self) -> f64 {
        (0..self.nx()).map(|i| self.cell_integral(i)).sum()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (i, xi) = locate_x(x, self.dx, self.nx());
        self.cells[i].eval(xi)
    }

    pub fn max(&self) -> f64 {
        self.cells
            .iter()
            .map(Poly1::max_on_cell)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn scale(&self, a: f64) -> DensityPoly {
        DensityPoly {
            dx: self.dx,
            cells: self.cells.iter().map(|p| p.scale(a)).collect(),
        }
    }

    /// `a·self + b·other`.
    pub fn lincomb(&self, a: f64, other: &DensityPoly, b: f64) -> DensityPoly {
        DensityPoly {
            dx: self.dx,
            cells: self
                .cells
                .iter()
                .zip(&other.cells)
                .map(|(p, q)| &p.scale(a) + &q.scale(b))
                .collect(),
        }
    }
}

/// Owning x-cell and local coordinate, with the periodic point `x = L`
/// mapped to the last cell's upper edge.
pub(crate) fn locate_x(x: f64, dx: f64, nx: usize) -> (usize, f64) {
    let s = x / dx;
    let i = (s.ceil() as isize - 1).clamp(0, nx as isize - 1) as usize;
    (i, s - i as f64 - 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_mesh;
    use std::f64::consts::PI;

    fn fm(v: f64) -> f64 {
        (-v * v / 2.0).exp() / (2.0 * PI).sqrt()
    }

    #[test]
    fn projects_constant() {
        let mesh = build_mesh(4, 6, 2.0, 3.0).unwrap();
        let spec = BasisSpec::tensor(2).unwrap();
        let f = project(|_, _| 1.0, &mesh, &spec);
        for i in 0..4 {
            for j in 0..6 {
                let c = f.cell(i, j);
                assert!((c[0] - 1.0).abs() < 1e-14);
                assert!(c[1..].iter().all(|x| x.abs() < 1e-14));
            }
        }
        assert_eq!(f.evaluate(1.3, -2.9).unwrap(), f.cell(2, 0)[0]);
    }

    #[test]
    fn density_of_constant() {
        let mesh = build_mesh(5, 10, 4.0 * PI, 5.0).unwrap();
        let spec = BasisSpec::total_degree(2).unwrap();
        let f = project(|_, _| 1.0, &mesh, &spec);
        let rho = f.density();
        for x in [0.0, 1.0, 7.3, 4.0 * PI] {
            assert!((rho.eval(x) - 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn density_of_odd_moment_vanishes() {
        let mesh = build_mesh(8, 20, 4.0 * PI, 5.0).unwrap();
        let spec = BasisSpec::tensor(2).unwrap();
        let f = project(|x, v| (1.0 + (0.5 * x).cos()) * v * fm(v), &mesh, &spec);
        let rho = f.density();
        for i in 0..8 {
            assert!(rho.cells[i].coeffs().iter().all(|c| c.abs() < 1e-13));
        }
    }

    #[test]
    fn polynomial_round_trip() {
        let mesh = build_mesh(3, 4, 3.0, 2.0).unwrap();
        let spec = BasisSpec::tensor(2).unwrap();
        let p = |x: f64, v: f64| 0.3 + x * v - 0.2 * x * x * v * v + 0.7 * v * v;
        let f = project(p, &mesh, &spec);
        for &(x, v) in &[(0.1, -1.9), (1.5, 0.3), (2.99, 1.2), (0.7, -0.01)] {
            assert!((f.evaluate(x, v).unwrap() - p(x, v)).abs() < 1e-12);
        }
        assert!(f.evaluate(3.5, 0.0).is_err());
    }
}
