use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use vpdg::field::project;
use vpdg::recurrence::*;
use vpdg::rhs::Operator;
use vpdg::scenarios::Equilibrium;
use vpdg::{build_mesh, BasisSpec, DGField};

fn to_na(m: &Mat4) -> Matrix4<Complex64> {
    Matrix4::from_fn(|r, c| m[r][c])
}

fn same_multiset(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    let mut used = vec![false; b.len()];
    a.iter().all(|x| {
        let hit = (0..b.len())
            .filter(|&k| !used[k])
            .min_by(|&p, &q| (b[p] - x).norm().partial_cmp(&(b[q] - x).norm()).unwrap());
        match hit {
            Some(k) if (b[k] - x).norm() <= tol * (1.0 + x.norm()) => {
                used[k] = true;
                true
            }
            _ => false,
        }
    })
}

#[test]
fn closed_form_eigenvalues_match_dense_solver() {
    for m in [1, 3, 5, 7] {
        for kdx in [0.05, PI / 20.0, 0.3] {
            let b = q1_blocks(m, 1.0, kdx, 0.25).unwrap();
            let dense = to_na(&b.lambda).schur().eigenvalues().unwrap();
            let dense: Vec<Complex64> = dense.iter().copied().collect();
            let closed = q1_spectrum(m, 1.0, kdx, 0.25).unwrap();
            assert!(same_multiset(&closed.xi, &dense, 1e-11), "m={m} kdx={kdx}: {:?} vs {dense:?}", closed.xi);
        }
    }
}

#[test]
fn w_eigenvalues() {
    for m in [1, 3, 9] {
        let w = w_matrix(m).unwrap();
        let tr = w[0][0] + w[1][1];
        let det = w[0][0] * w[1][1] - w[0][1] * w[1][0];
        let disc = (tr * tr / 4.0 - det).sqrt();
        let mf = m as f64;
        assert!((tr / 2.0 - disc - (-3.0 * mf - 3f64.sqrt())).abs() < 1e-12);
        assert!((tr / 2.0 + disc - (-3.0 * mf + 3f64.sqrt())).abs() < 1e-12);
    }
}

/// Unit-norm null vector of `Λ − ξI` from the SVD.
fn null_vector(lambda: &Matrix4<Complex64>, xi: Complex64) -> Vector4<Complex64> {
    let a = lambda - Matrix4::identity() * xi;
    let svd = a.svd(false, true);
    let vt = svd.v_t.unwrap();
    let k = (0..4)
        .min_by(|&p, &q| svd.singular_values[p].partial_cmp(&svd.singular_values[q]).unwrap())
        .unwrap();
    vt.row(k).adjoint()
}

#[test]
fn eigenvectors_do_not_depend_on_m() {
    let (k, dx, dv) = (0.5, PI / 10.0, 0.25);
    let s1 = q1_spectrum(1, k, dx, dv).unwrap();
    let s5 = q1_spectrum(5, k, dx, dv).unwrap();
    let l1 = to_na(&q1_blocks(1, k, dx, dv).unwrap().lambda);
    let l5 = to_na(&q1_blocks(5, k, dx, dv).unwrap().lambda);
    for a in 0..4 {
        let v1 = null_vector(&l1, s1.xi[a]);
        let v5 = null_vector(&l5, s5.xi[a]);
        // parallel up to a complex scale: |<v1, v5>| = 1 for unit vectors
        let overlap = v1.dotc(&v5).norm();
        assert!((overlap - 1.0).abs() < 1e-10, "column {a}: {overlap}");
    }
}

#[test]
fn trace_of_s_for_both_velocity_signs() {
    for m in [1i64, 3, 5, 7] {
        let s = s_matrix(m).unwrap();
        let t: f64 = (0..4).map(|r| s[r][r]).sum();
        assert!((t + 4.0 * m as f64).abs() < 1e-13);
    }
}

/// Applies the assembled free-streaming operator to a Bloch wave
/// `u·e^{ikx_i}` and reads back the quarter-point response of cell `(i, j)`.
fn assembled_block(j: usize) -> (Mat4, i64, f64, f64, f64) {
    let (k, nx, nv) = (0.5, 40, 40);
    let mesh = build_mesh(nx, nv, 4.0 * PI, 5.0).unwrap();
    let spec = BasisSpec::tensor(1).unwrap();
    let op = Operator::new(&mesh, &spec);
    let i = 7;
    let phase = |ii: usize| Complex64::from_polar(1.0, k * mesh.x_centers[ii]);
    let mut g = [[Complex64::new(0.0, 0.0); 4]; 4];
    for q in 0..4 {
        let mut resp = [Complex64::new(0.0, 0.0); 4];
        for part in 0..2 {
            let f = q1_from_quarter_values(&mesh, |ii, jj| {
                let mut vals = [0.0; 4];
                if jj == j {
                    let z = phase(ii);
                    vals[q] = if part == 0 { z.re } else { z.im };
                }
                vals
            });
            let mut out = DGField::zeros(&mesh, &spec);
            op.rhs_advection(&f, &mut out).unwrap();
            let vals = quarter_values(&out, i, j);
            // real-linear operator: L(Re z·e) + i·L(Im z·e) for the complex wave
            let w = if part == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 1.0) };
            for r in 0..4 {
                resp[r] += w * vals[r];
            }
        }
        for r in 0..4 {
            g[r][q] = resp[r] / phase(i);
        }
    }
    (g, mesh.velocity_mode_index(j), k, mesh.dx, mesh.dv)
}

#[test]
fn assembled_operator_matches_g_for_positive_velocities() {
    for j in [20, 23, 39] {
        let (g, m, k, dx, dv) = assembled_block(j);
        let b = q1_blocks(m, k, dx, dv).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                assert!((g[r][c] - b.g[r][c]).norm() < 1e-11 * (1.0 + b.g[r][c].norm()), "j={j} [{r}][{c}]: {} vs {}", g[r][c], b.g[r][c]);
            }
        }
    }
}

#[test]
fn assembled_operator_matches_mirror_for_negative_velocities() {
    for j in [0, 12, 19] {
        let (g, m, k, dx, dv) = assembled_block(j);
        assert!(m < 0);
        let b = q1_blocks(-m, -k, dx, dv).unwrap();
        let mut trace = 0.0;
        for r in 0..4 {
            for c in 0..4 {
                let want = b.g[3 - r][3 - c];
                assert!((g[r][c] - want).norm() < 1e-11 * (1.0 + want.norm()), "j={j} [{r}][{c}]");
            }
            trace += b.s[3 - r][3 - r];
        }
        // −4|m| is +4m for the signed index
        assert!((trace - 4.0 * m as f64).abs() < 1e-12);
    }
}

#[test]
fn upsilon_is_close_to_projection() {
    let (k, a) = (0.5, 1.0);
    let mesh = build_mesh(40, 40, 4.0 * PI, 5.0).unwrap();
    let spec = BasisSpec::tensor(1).unwrap();
    let eq = Equilibrium::Maxwellian;
    let f = project(|x, v| a * (k * x).cos() * eq.value(v), &mesh, &spec);
    let mut worst: f64 = 0.0;
    for i in [0, 11, 30] {
        for j in [3, 18, 25] {
            let up = upsilon(k, mesh.dx, mesh.v_centers[j], mesh.dv, |v| eq.value(v));
            let ph = Complex64::from_polar(a, k * mesh.x_centers[i]);
            let got = quarter_values(&f, i, j);
            for r in 0..4 {
                worst = worst.max((got[r] - (ph * up[r]).re).abs());
            }
        }
    }
    // agreement at truncation-error level, O(Δx²)
    assert!(worst < 0.2 * mesh.dx * mesh.dx, "{worst}");
    assert!(worst > 1e-8);
}

#[test]
fn mode_evolution_matches_matrix_exponential() {
    let (k, dx, dv) = (0.5, PI / 10.0, 0.25);
    let u0 = [
        Complex64::new(0.3, 0.1),
        Complex64::new(-0.2, 0.4),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, -0.7),
    ];
    for m in [-5, -1, 1, 3, 9] {
        let g = if m > 0 {
            to_na(&q1_blocks(m, k, dx, dv).unwrap().g)
        } else {
            let b = q1_blocks(-m, -k, dx, dv).unwrap();
            Matrix4::from_fn(|r, c| b.g[3 - r][3 - c])
        };
        let t = 2.5;
        let want = (g * Complex64::new(t, 0.0)).exp() * Vector4::from_column_slice(&u0);
        let got = q1_mode_evolution(m, k, dx, dv, &u0, t).unwrap();
        for r in 0..4 {
            assert!((got[r] - want[r]).norm() < 1e-10, "m={m}: {} vs {}", got[r], want[r]);
        }
    }
}
