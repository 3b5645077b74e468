//! Semi-discrete recurrence analysis for free streaming.
//!
//! The `Q¹` matrices act on the four quarter-point values of a cell, ordered
//! `(ξ, η) = (−¼, +¼), (−¼, −¼), (+¼, +¼), (+¼, −¼)`. Indices below are
//! 0-based; the 1-based entry `[r, c]` of a printed matrix is `[r-1][c-1]`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::basis::BasisSpec;
use crate::diagnostics::{recurrence_peaks, recurrence_time, Peak};
use crate::error::{Error, Result};
use crate::field::DGField;
use crate::integrator::{run, StepControl};
use crate::mesh::{build_mesh, Mesh};
use crate::scenarios::{Equilibrium, Scenario, SystemKind};

pub type Mat2 = [[Complex64; 2]; 2];
pub type Mat4 = [[Complex64; 4]; 4];

/// Quarter-point ordering used by the `Q¹` analysis.
pub const QUARTER_POINTS: [(f64, f64); 4] = [(-0.25, 0.25), (-0.25, -0.25), (0.25, 0.25), (0.25, -0.25)];

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Piecewise-constant rate `s_j` of a single Fourier mode in velocity cell `j`.
pub fn s_j_p0(vj: f64, k: f64, dx: f64) -> Complex64 {
    let kdx = k * dx;
    Complex64::new(vj.abs() * (kdx.cos() - 1.0) / dx, -vj * kdx.sin() / dx)
}

/// `k' = sin(kΔx)/Δx`.
pub fn modified_wavenumber(k: f64, dx: f64) -> f64 {
    (k * dx).sin() / dx
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct P0Envelope {
    /// Slowest damping rate (the innermost velocity cells).
    pub rate_min: f64,
    /// Fastest damping rate quoted for the outer cells.
    pub rate_max: f64,
    pub recurrence_time: f64,
}

pub fn p0_envelope(k: f64, dx: f64, dv: f64, vc: f64) -> P0Envelope {
    let g = ((k * dx).cos() - 1.0) / dx;
    P0Envelope {
        rate_min: dv / 2.0 * g,
        rate_max: (vc - dv) / 2.0 * g,
        recurrence_time: 2.0 * PI / (modified_wavenumber(k, dx) * dv),
    }
}

/// `2π/(kΔv)`.
pub fn classical_recurrence_time(k: f64, dv: f64) -> f64 {
    2.0 * PI / (k * dv)
}

fn check_m(m: i64) -> Result<f64> {
    if m <= 0 || m % 2 == 0 {
        return Err(Error::InvalidModeIndex(m));
    }
    Ok(m as f64)
}

/// `S_m`. The `[3][1]` entry is `−77/96 + 11m/8`, which is what the mass,
/// volume and flux matrices of the scheme give (a printed `m/8` there is
/// inconsistent with them).
pub fn s_matrix(m: i64) -> Result<[[f64; 4]; 4]> {
    let m = check_m(m)?;
    Ok([
        [-49.0 / 96.0 - 7.0 * m / 8.0, 7.0 / 96.0, -7.0 / 32.0 - 3.0 * m / 8.0, 1.0 / 32.0],
        [-7.0 / 96.0, 49.0 / 96.0 - 7.0 * m / 8.0, -1.0 / 32.0, 7.0 / 32.0 - 3.0 * m / 8.0],
        [77.0 / 96.0 + 11.0 * m / 8.0, -11.0 / 96.0, -21.0 / 32.0 - 9.0 * m / 8.0, 3.0 / 32.0],
        [11.0 / 96.0, -77.0 / 96.0 + 11.0 * m / 8.0, -3.0 / 32.0, 21.0 / 32.0 - 9.0 * m / 8.0],
    ])
}

pub fn t_matrix(m: i64) -> Result<[[f64; 4]; 4]> {
    let m = check_m(m)?;
    Ok([
        [-35.0 / 96.0 - 5.0 * m / 8.0, 5.0 / 96.0, 35.0 / 32.0 + 15.0 * m / 8.0, -5.0 / 32.0],
        [-5.0 / 96.0, 35.0 / 96.0 - 5.0 * m / 8.0, 5.0 / 32.0, -35.0 / 32.0 + 15.0 * m / 8.0],
        [7.0 / 96.0 + m / 8.0, -1.0 / 96.0, -7.0 / 32.0 - 3.0 * m / 8.0, 1.0 / 32.0],
        [1.0 / 96.0, -7.0 / 96.0 + m / 8.0, -1.0 / 32.0, 7.0 / 32.0 - 3.0 * m / 8.0],
    ])
}

/// `W` (depends on `m`) and `V` (depends on `î = e^{−ikΔx} − 1`).
pub fn w_matrix(m: i64) -> Result<[[f64; 2]; 2]> {
    let m = check_m(m)?;
    Ok([[-3.0 * m - 1.75, 0.25], [-0.25, -3.0 * m + 1.75]])
}

pub fn v_matrix(k: f64, dx: f64) -> Mat2 {
    let ih = Complex64::from_polar(1.0, -k * dx) - 1.0;
    [
        [0.5 + ih * (5.0 / 24.0), -0.5 - ih * (5.0 / 8.0)],
        [-0.5 - ih / 24.0, 0.5 + ih / 8.0],
    ]
}

/// Block product with `V` as the outer factor: `(V ⊗ W)[2a+b][2c+d] =
/// V[a][c]·W[b][d]`. In this index convention `Λ_m = V ⊗ W`; the same
/// matrix is written `W ⊗ V` under the opposite (inner-factor-first) one.
pub fn kron(v: &Mat2, w: &[[f64; 2]; 2]) -> Mat4 {
    let mut out = [[c(0.0); 4]; 4];
    for a in 0..2 {
        for b in 0..2 {
            for cc in 0..2 {
                for d in 0..2 {
                    out[2 * a + b][2 * cc + d] = v[a][cc] * w[b][d];
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Q1Blocks {
    pub s: [[f64; 4]; 4],
    pub t: [[f64; 4]; 4],
    /// `Λ_m = S_m + T_m e^{−ikΔx}`.
    pub lambda: Mat4,
    /// `G = (Δv/Δx) Λ_m`.
    pub g: Mat4,
    pub w: [[f64; 2]; 2],
    pub v: Mat2,
}

pub fn q1_blocks(m: i64, k: f64, dx: f64, dv: f64) -> Result<Q1Blocks> {
    let s = s_matrix(m)?;
    let t = t_matrix(m)?;
    let phase = Complex64::from_polar(1.0, -k * dx);
    let mut lambda = [[c(0.0); 4]; 4];
    let mut g = [[c(0.0); 4]; 4];
    for r in 0..4 {
        for q in 0..4 {
            lambda[r][q] = s[r][q] + t[r][q] * phase;
            g[r][q] = lambda[r][q] * (dv / dx);
        }
    }
    Ok(Q1Blocks {
        s,
        t,
        lambda,
        g,
        w: w_matrix(m)?,
        v: v_matrix(k, dx),
    })
}

/// Eigenvalues `λ₁, λ₂` of `V`, with `λ₂ → 1` as `kΔx → 0`.
pub fn v_eigenvalues(k: f64, dx: f64) -> (Complex64, Complex64) {
    let ih = Complex64::from_polar(1.0, -k * dx) - 1.0;
    let root = (9.0 + 12.0 * ih + ih * ih).sqrt();
    ((3.0 + ih - root) / 6.0, (3.0 + ih + root) / 6.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplificationSpectrum {
    pub m: i64,
    /// `ξ₁..ξ₄ = (−3m−√3)λ₂, (−3m+√3)λ₂, (−3m−√3)λ₁, (−3m+√3)λ₁`.
    pub xi: [Complex64; 4],
    /// `η_α = ξ_α Δv/Δx`.
    pub eta: [Complex64; 4],
    /// Right eigenvectors of `Λ_m` (columns match `xi`).
    pub vectors: [[Complex64; 4]; 4],
}

pub fn q1_spectrum(m: i64, k: f64, dx: f64, dv: f64) -> Result<AmplificationSpectrum> {
    let mf = check_m(m)?;
    let (l1, l2) = v_eigenvalues(k, dx);
    let s3 = 3f64.sqrt();
    let (mu_minus, mu_plus) = (-3.0 * mf - s3, -3.0 * mf + s3);
    let xi = [l2 * mu_minus, l2 * mu_plus, l1 * mu_minus, l1 * mu_plus];
    let eta = xi.map(|x| x * (dv / dx));

    // V = [[a, b], [cc, d]]: eigenvector (b, λ − a)
    let v = v_matrix(k, dx);
    let vvec = |lam: Complex64| [v[0][1], lam - v[0][0]];
    // W's eigenvectors for −3m ∓ √3 do not depend on m
    let wvec = |mu: f64| [c(0.25), c(mu + 3.0 * mf + 1.75)];
    let pairs = [(l2, mu_minus), (l2, mu_plus), (l1, mu_minus), (l1, mu_plus)];
    let mut vectors = [[c(0.0); 4]; 4];
    for (col, &(lam, mu)) in pairs.iter().enumerate() {
        let a = vvec(lam);
        let b = wvec(mu);
        for p in 0..2 {
            for q in 0..2 {
                vectors[2 * p + q][col] = a[p] * b[q];
            }
        }
    }
    Ok(AmplificationSpectrum {
        m,
        xi,
        eta,
        vectors,
    })
}

/// `Υ` for velocity cell `j`: quarter-point values of `e^{ik(x−x_i)} f_eq(v)`.
pub fn upsilon(k: f64, dx: f64, vj: f64, dv: f64, feq: impl Fn(f64) -> f64) -> [Complex64; 4] {
    let minus = Complex64::from_polar(1.0, -k * dx / 4.0);
    let plus = minus.conj();
    let up = feq(vj + dv / 4.0);
    let down = feq(vj - dv / 4.0);
    [minus * up, minus * down, plus * up, plus * down]
}

fn solve4(a: &Mat4, b: &[Complex64; 4]) -> [Complex64; 4] {
    let mut m = *a;
    let mut x = *b;
    for col in 0..4 {
        let piv = (col..4)
            .max_by(|&p, &q| m[p][col].norm().partial_cmp(&m[q][col].norm()).unwrap())
            .unwrap();
        m.swap(col, piv);
        x.swap(col, piv);
        for r in col + 1..4 {
            let f = m[r][col] / m[col][col];
            for cc in col..4 {
                let sub = f * m[col][cc];
                m[r][cc] -= sub;
            }
            let sub = f * x[col];
            x[r] -= sub;
        }
    }
    for r in (0..4).rev() {
        let mut s = x[r];
        for cc in r + 1..4 {
            s -= m[r][cc] * x[cc];
        }
        x[r] = s / m[r][r];
    }
    x
}

/// `Σ a_α V_α e^{η_α t}` with `a` chosen so the sum is `u0` at `t = 0`.
/// For `m < 0` the mirror image `v → −v, x → −x` of the positive half is
/// used: the quarter points reverse and the phase factor is conjugated.
pub fn q1_mode_evolution(m: i64, k: f64, dx: f64, dv: f64, u0: &[Complex64; 4], t: f64) -> Result<[Complex64; 4]> {
    if m < 0 {
        let mut rev = *u0;
        rev.reverse();
        let mut out = q1_mode_evolution(-m, -k, dx, dv, &rev, t)?;
        out.reverse();
        return Ok(out);
    }
    let spec = q1_spectrum(m, k, dx, dv)?;
    let a = solve4(&spec.vectors, u0);
    let mut out = [c(0.0); 4];
    for alpha in 0..4 {
        let g = a[alpha] * (spec.eta[alpha] * t).exp();
        for (r, o) in out.iter_mut().enumerate() {
            *o += g * spec.vectors[r][alpha];
        }
    }
    Ok(out)
}

/// Quarter-point values of a `Q¹` cell (in [`QUARTER_POINTS`] order).
pub fn quarter_values(f: &DGField, i: usize, j: usize) -> [f64; 4] {
    QUARTER_POINTS.map(|(xi, eta)| f.eval_local(i, j, xi, eta))
}

/// Builds a `Q¹` field whose quarter-point values are `values(i, j)`.
pub fn q1_from_quarter_values(mesh: &Mesh, values: impl Fn(usize, usize) -> [f64; 4]) -> DGField {
    let spec = BasisSpec::tensor(1).expect("Q1 is supported");
    // modal → quarter-point map is φ_k(ξ_p, η_p); invert it once
    let mut phi = [[c(0.0); 4]; 4];
    for (p, &(xi, eta)) in QUARTER_POINTS.iter().enumerate() {
        for (k, val) in spec.values(xi, eta).into_iter().enumerate() {
            phi[p][k] = c(val);
        }
    }
    let mut f = DGField::zeros(mesh, &spec);
    for i in 0..mesh.nx {
        for j in 0..mesh.nv {
            let vals = values(i, j).map(c);
            let coeffs = solve4(&phi, &vals);
            for (dst, src) in f.cell_mut(i, j).iter_mut().zip(coeffs) {
                *dst = src.re;
            }
        }
    }
    f
}

/// One row of `recurrence_report.csv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRow {
    pub m: i64,
    pub eta: [Complex64; 4],
    pub predicted_tr: f64,
    pub measured_tr: f64,
}

pub const REPORT_HEADER: &str =
    "m,re_eta1,re_eta2,re_eta3,re_eta4,im_eta1,im_eta2,im_eta3,im_eta4,predicted_tr,measured_tr";

impl ReportRow {
    pub fn csv_row(&self) -> String {
        let mut cols = vec![self.m.to_string()];
        cols.extend(self.eta.iter().map(|e| format!("{:.15e}", e.re)));
        cols.extend(self.eta.iter().map(|e| format!("{:.15e}", e.im)));
        cols.push(format!("{:.15e}", self.predicted_tr));
        cols.push(format!("{:.15e}", self.measured_tr));
        cols.join(",")
    }
}

/// Predicted recurrence time for a basis: `2π/(k'Δv)` for piecewise
/// constants, `2π/(kΔv)` otherwise.
pub fn predicted_recurrence_time(spec: &BasisSpec, k: f64, dx: f64, dv: f64) -> f64 {
    if spec.degree() == 0 {
        p0_envelope(k, dx, dv, 0.0).recurrence_time
    } else {
        classical_recurrence_time(k, dv)
    }
}

/// Per positive odd `m` rows: the `Q¹` rates for `Q¹`, `s_j` (in the first
/// column) for piecewise constants, `NaN` where no closed form exists.
pub fn report_rows(spec: &BasisSpec, mesh: &Mesh, k: f64, measured_tr: f64) -> Result<Vec<ReportRow>> {
    let predicted = predicted_recurrence_time(spec, k, mesh.dx, mesh.dv);
    let nan = Complex64::new(f64::NAN, f64::NAN);
    let mut rows = Vec::new();
    for j in mesh.nv / 2..mesh.nv {
        let m = mesh.velocity_mode_index(j);
        let eta = match (spec.degree(), spec.family()) {
            (0, _) => [s_j_p0(mesh.v_centers[j], k, mesh.dx), nan, nan, nan],
            (1, crate::basis::BasisFamily::TensorQ) => q1_spectrum(m, k, mesh.dx, mesh.dv)?.eta,
            _ => [nan; 4],
        };
        rows.push(ReportRow {
            m,
            eta,
            predicted_tr: predicted,
            measured_tr,
        });
    }
    Ok(rows)
}

/// Number of `ρ_max` peaks averaged for a recurrence-time measurement.
pub fn peaks_for(equilibrium: Equilibrium) -> usize {
    match equilibrium {
        Equilibrium::Lorentzian => 7,
        _ => 3,
    }
}

/// `n`-th peak time over `n`, averaged.
pub fn measured_recurrence_time(series: &[(f64, f64)], count: usize, predicted: f64) -> Result<(f64, Vec<Peak>)> {
    let peaks = recurrence_peaks(series, count, predicted)?;
    Ok((recurrence_time(&peaks), peaks))
}

#[derive(Debug, Clone)]
pub struct RecurrenceComparison {
    pub predicted: f64,
    pub measured: f64,
    pub relative_error: f64,
    pub peaks: Vec<Peak>,
    pub rows: Vec<ReportRow>,
    pub steps: usize,
}

/// Runs free streaming of `A cos(kx) f_eq` long enough to see the requested
/// recurrences and compares the `ρ_max` peak times with the prediction.
pub fn predict_vs_measure(scenario: &Scenario, spec: &BasisSpec, nx: usize, nv: usize) -> Result<RecurrenceComparison> {
    if scenario.system != SystemKind::Advection {
        return Err(Error::InvalidConfig(format!(
            "recurrence measurement needs an advection scenario, got {}",
            scenario.name
        )));
    }
    let mesh = build_mesh(nx, nv, scenario.length, scenario.vc)?;
    let predicted = predicted_recurrence_time(spec, scenario.k, mesh.dx, mesh.dv);
    let count = peaks_for(scenario.equilibrium);
    let control = StepControl {
        t_end: (count as f64 + 0.5) * predicted,
        ..StepControl::default()
    };
    let out = run(scenario, &mesh, spec, false, &control, &mut ())?;
    let series: Vec<(f64, f64)> = out.diagnostics.iter().map(|r| (r.t, r.rhomax)).collect();
    let (measured, peaks) = measured_recurrence_time(&series, count, predicted)?;
    Ok(RecurrenceComparison {
        predicted,
        measured,
        relative_error: (measured - predicted).abs() / predicted,
        peaks,
        rows: report_rows(spec, &mesh, scenario.k, measured)?,
        steps: out.steps,
    })
}

pub fn write_report(path: &std::path::Path, rows: &[ReportRow]) -> Result<()> {
    let mut body = format!("{REPORT_HEADER}\n");
    for r in rows {
        body.push_str(&r.csv_row());
        body.push('\n');
    }
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}
