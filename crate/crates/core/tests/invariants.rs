use std::f64::consts::PI;

use proptest::prelude::*;

use vpdg::diagnostics::momentum;
use vpdg::poisson::solve_nonlinear;
use vpdg::rhs::Operator;
use vpdg::{build_mesh, BasisSpec, DGField, Mesh};

const NX: usize = 6;
const NV: usize = 8;

fn mesh() -> Mesh {
    build_mesh(NX, NV, 2.0 * PI, 3.0).unwrap()
}

fn specs() -> Vec<BasisSpec> {
    vec![
        BasisSpec::tensor(1).unwrap(),
        BasisSpec::total_degree(1).unwrap(),
        BasisSpec::tensor(2).unwrap(),
        BasisSpec::total_degree(2).unwrap(),
    ]
}

/// Random state supported away from `v = ±V_c` (the outermost velocity
/// cells are empty), so no boundary terms enter.
fn field_from(mesh: &Mesh, spec: &BasisSpec, raw: &[f64]) -> DGField {
    let mut f = DGField::zeros(mesh, spec);
    let dim = spec.dim();
    let mut k = 0;
    for i in 0..mesh.nx {
        for j in 1..mesh.nv - 1 {
            for (n, c) in f.cell_mut(i, j).iter_mut().enumerate() {
                let r = raw[k % raw.len()];
                *c = if n == 0 { 1.0 + r } else { 0.3 * r / (n as f64) };
                k += 1;
            }
        }
    }
    debug_assert_eq!(f.dim(), dim);
    // neutral: mean density equals the unit ion background
    let scale = mesh.length / f.total_charge();
    f.coeffs.iter_mut().for_each(|c| *c *= scale);
    f
}

fn dot(a: &DGField, b: &DGField) -> f64 {
    a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x * y).sum::<f64>() * a.mesh.dx * a.mesh.dv
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn self_consistent_rates(raw in prop::collection::vec(-0.9f64..0.9, 7..40)) {
        let mesh = mesh();
        for spec in specs() {
            let f = field_from(&mesh, &spec, &raw);
            let op = Operator::new(&mesh, &spec);
            let e = solve_nonlinear(&f.density());
            let sample = op.sample_field(&e, None);
            let mut out = DGField::zeros(&mesh, &spec);
            op.rhs_nonlinear(&f, &sample, &mut out).unwrap();
            let scale = f.l2_squared().sqrt();
            prop_assert!(out.total_charge().abs() < 1e-12 * scale, "{} charge rate {}", spec.label(), out.total_charge());
            prop_assert!(momentum(&out).abs() < 1e-11 * scale, "{} momentum rate {}", spec.label(), momentum(&out));
            prop_assert!(dot(&f, &out) <= 1e-12 * scale * scale, "{} L2 rate {}", spec.label(), dot(&f, &out));
        }
    }

    #[test]
    fn l2_decays_for_any_field(
        raw in prop::collection::vec(-0.9f64..0.9, 7..40),
        amps in prop::collection::vec(-2.0f64..2.0, 3),
    ) {
        let mesh = mesh();
        for spec in specs() {
            let f = field_from(&mesh, &spec, &raw);
            let op = Operator::new(&mesh, &spec);
            // arbitrary E: the self-consistent field of an unrelated density
            let g = vpdg::field::project(
                |x, v| (1.0 + amps[0] * x.sin() + amps[1] * (2.0 * x).cos() + amps[2] * (3.0 * x).sin()) * (-v * v).exp(),
                &mesh,
                &spec,
            );
            let e = solve_nonlinear(&g.density());
            let sample = op.sample_field(&e, None);
            let mut out = DGField::zeros(&mesh, &spec);
            op.rhs_nonlinear(&f, &sample, &mut out).unwrap();
            let scale = f.l2_squared();
            prop_assert!(dot(&f, &out) <= 1e-12 * scale, "{}: {}", spec.label(), dot(&f, &out));
        }
    }
}
