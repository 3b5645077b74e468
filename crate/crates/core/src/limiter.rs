//! Positivity-preserving scaling limiter.

use log::warn;
use rayon::prelude::*;

use crate::basis::BasisSpec;
use crate::field::DGField;
use crate::quadrature::{quadrature, QuadratureKind};

/// Reference points `(Gauss ⊗ Lobatto) ∪ (Lobatto ⊗ Gauss)` with `l+1`
/// points per direction, and the basis values there.
#[derive(Debug, Clone)]
pub struct LimiterPointSet {
    pub points: Vec<(f64, f64)>,
    values: Vec<Vec<f64>>,
}

impl LimiterPointSet {
    pub fn new(spec: &BasisSpec) -> Self {
        let n = spec.degree() + 1;
        let mut points: Vec<(f64, f64)> = Vec::new();
        if n == 1 {
            points.push((0.0, 0.0));
        } else {
            let g = quadrature(QuadratureKind::Gauss, n).expect("small gauss rule");
            let gl = quadrature(QuadratureKind::GaussLobatto, n).expect("small lobatto rule");
            for &a in &g.nodes {
                for &b in &gl.nodes {
                    points.push((a, b));
                    points.push((b, a));
                }
            }
            points.sort_by(|p, q| p.partial_cmp(q).unwrap());
            points.dedup_by(|p, q| (p.0 - q.0).abs() < 1e-15 && (p.1 - q.1).abs() < 1e-15);
        }
        let values = points.iter().map(|&(x, v)| spec.values(x, v)).collect();
        Self { points, values }
    }

    pub fn min_over(&self, cell: &[f64]) -> f64 {
        self.values
            .iter()
            .map(|phi| cell.iter().zip(phi).map(|(c, p)| c * p).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }
}

/// `θ = min(1, |avg| / |T - avg|)`, with `θ = 1` for a flat cell.
pub fn theta(avg: f64, min: f64) -> f64 {
    if min >= avg {
        return 1.0;
    }
    (avg.abs() / (min - avg).abs()).min(1.0)
}

/// Scales one cell toward its average; returns the applied `θ`.
pub fn limit_cell(points: &LimiterPointSet, cell: &mut [f64]) -> f64 {
    let avg = cell[0];
    if avg < 0.0 {
        for c in cell[1..].iter_mut() {
            *c = 0.0;
        }
        return 0.0;
    }
    let t = points.min_over(cell);
    if t >= 0.0 {
        return 1.0;
    }
    let th = theta(avg, t);
    for c in cell[1..].iter_mut() {
        *c *= th;
    }
    th
}

/// Applies the limiter in place; returns the number of cells with a negative
/// average (which it cannot repair).
pub fn apply_positivity_in_place(f: &mut DGField, points: &LimiterPointSet) -> usize {
    let dim = f.dim();
    let negative: usize = f
        .coeffs
        .par_chunks_mut(dim)
        .map(|cell| {
            let neg = cell[0] < 0.0;
            limit_cell(points, cell);
            neg as usize
        })
        .sum();
    if negative > 0 {
        warn!("positivity limiter: {negative} cells have a negative average; flattened");
    }
    negative
}

pub fn apply_positivity(f: &DGField) -> DGField {
    let points = LimiterPointSet::new(&f.spec);
    let mut out = f.clone();
    apply_positivity_in_place(&mut out, &points);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_mesh;
    use proptest::prelude::*;

    #[test]
    fn point_set_sizes() {
        for l in 1..=3 {
            let spec = BasisSpec::tensor(l).unwrap();
            let n = l + 1;
            let pts = LimiterPointSet::new(&spec);
            // Gauss and Lobatto share the center when both have odd size
            let dup = if n % 2 == 1 { 1 } else { 0 };
            assert_eq!(pts.points.len(), 2 * n * n - dup);
            assert!(pts.points.iter().all(|p| p.0.abs() <= 0.5 && p.1.abs() <= 0.5));
        }
    }

    #[test]
    fn nonnegative_cell_untouched() {
        let spec = BasisSpec::tensor(1).unwrap();
        let pts = LimiterPointSet::new(&spec);
        let mut cell = vec![1.0, 0.1, 0.1, 0.0];
        let before = cell.clone();
        assert_eq!(limit_cell(&pts, &mut cell), 1.0);
        assert_eq!(cell, before);
    }

    #[test]
    fn halves_q1_cell_with_minimum_minus_one() {
        let spec = BasisSpec::tensor(1).unwrap();
        let pts = LimiterPointSet::new(&spec);
        // f = 1 + a·p1(ξ): choose a so the minimum over the point set is -1
        let mut cell = vec![1.0, 0.0, 0.0, 0.0];
        let k = spec.mode_of(1, 0).unwrap();
        cell[k] = 1.0;
        let scale = 2.0 / (1.0 - pts.min_over(&cell));
        cell[k] = scale;
        assert!((pts.min_over(&cell) + 1.0).abs() < 1e-14);
        let th = limit_cell(&pts, &mut cell);
        assert!((th - 0.5).abs() < 1e-14);
        assert!(pts.min_over(&cell).abs() < 1e-14);
    }

    #[test]
    fn zero_average_flattens() {
        assert_eq!(theta(0.0, -0.2), 0.0);
        assert_eq!(theta(0.3, 0.3), 1.0);
    }

    fn random_cells(spec: BasisSpec) -> impl Strategy<Value = Vec<f64>> {
        let dim = spec.dim();
        (0.0f64..2.0, prop::collection::vec(-1.5f64..1.5, dim - 1)).prop_map(|(avg, rest)| {
            let mut c = vec![avg];
            c.extend(rest);
            c
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn q2_cells_limited(cell in random_cells(BasisSpec::tensor(2).unwrap())) {
            let spec = BasisSpec::tensor(2).unwrap();
            let pts = LimiterPointSet::new(&spec);
            let mut c = cell.clone();
            limit_cell(&pts, &mut c);
            prop_assert_eq!(c[0], cell[0]);
            prop_assert!(pts.min_over(&c) >= -1e-14);
            let mut twice = c.clone();
            limit_cell(&pts, &mut twice);
            for (a, b) in twice.iter().zip(&c) {
                prop_assert!((a - b).abs() < 1e-13);
            }
        }

        #[test]
        fn p2_cells_limited(cell in random_cells(BasisSpec::total_degree(2).unwrap())) {
            let spec = BasisSpec::total_degree(2).unwrap();
            let pts = LimiterPointSet::new(&spec);
            let mut c = cell.clone();
            limit_cell(&pts, &mut c);
            prop_assert_eq!(c[0], cell[0]);
            prop_assert!(pts.min_over(&c) >= -1e-14);
        }
    }

    #[test]
    fn whole_field_keeps_averages() {
        let mesh = build_mesh(3, 4, 1.0, 1.0).unwrap();
        let spec = BasisSpec::total_degree(2).unwrap();
        let mut f = DGField::zeros(&mesh, &spec);
        for (n, c) in f.coeffs.iter_mut().enumerate() {
            *c = ((n * 7919) % 13) as f64 / 6.0 - 1.0;
        }
        for cell in f.coeffs.chunks_mut(spec.dim()) {
            cell[0] = cell[0].abs();
        }
        let g = apply_positivity(&f);
        for (a, b) in f.coeffs.chunks(spec.dim()).zip(g.coeffs.chunks(spec.dim())) {
            assert_eq!(a[0], b[0]);
        }
    }
}
