//! Conserved and tracked scalars, log Fourier modes, peak fitting and the
//! BGK scatter diagnostic.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::DGField;
use crate::poisson::ElectricFieldPoly;
use crate::quadrature::gauss_rule;
use crate::scenarios::Equilibrium;

pub const CSV_HEADER: &str =
    "t,charge,momentum,kinetic,electrostatic,total,enstrophy,entropy,hlinear,logfm1,logfm2,logfm3,logfm4,rhomax,emax";

/// Value reported by [`log_fourier_mode`] when the modulus underflows.
pub const LOGFM_FLOOR: f64 = -30.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub charge: f64,
    pub momentum: f64,
    pub kinetic: f64,
    pub electrostatic: f64,
    pub total: f64,
    pub enstrophy: f64,
    pub entropy: f64,
    /// `NaN` when no equilibrium with an analytic `v/f'` is supplied.
    pub hlinear: f64,
    pub logfm: [f64; 4],
    pub rhomax: f64,
    pub emax: f64,
    /// Set when some quadrature point had `f ≤ 0` in the entropy integral.
    #[serde(skip)]
    pub entropy_clipped: bool,
}

impl DiagnosticsRecord {
    pub fn csv_row(&self) -> String {
        let vals = [
            self.t,
            self.charge,
            self.momentum,
            self.kinetic,
            self.electrostatic,
            self.total,
            self.enstrophy,
            self.entropy,
            self.hlinear,
            self.logfm[0],
            self.logfm[1],
            self.logfm[2],
            self.logfm[3],
            self.rhomax,
            self.emax,
        ];
        vals.iter()
            .map(|v| format!("{v:.15e}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// `∫∫ v f_h` from the modal moments.
pub fn momentum(f: &DGField) -> f64 {
    let m01 = f.spec.mode_of(0, 1);
    let (dx, dv) = (f.mesh.dx, f.mesh.dv);
    let c1 = dv / (2.0 * 3f64.sqrt());
    let mut total = 0.0;
    for i in 0..f.mesh.nx {
        for j in 0..f.mesh.nv {
            let c = f.cell(i, j);
            total += f.mesh.v_centers[j] * c[0] + m01.map_or(0.0, |k| c1 * c[k]);
        }
    }
    total * dx * dv
}

/// `∫∫ v²/2 f_h` from the modal moments.
pub fn kinetic_energy(f: &DGField) -> f64 {
    let m01 = f.spec.mode_of(0, 1);
    let m02 = f.spec.mode_of(0, 2);
    let (dx, dv) = (f.mesh.dx, f.mesh.dv);
    let mut total = 0.0;
    for i in 0..f.mesh.nx {
        for j in 0..f.mesh.nv {
            let c = f.cell(i, j);
            let vj = f.mesh.v_centers[j];
            // η = p1/(2√3), η² = 1/12 + p2/(6√5)
            total += c[0] * (vj * vj + dv * dv / 12.0)
                + m01.map_or(0.0, |k| c[k] * vj * dv / 3f64.sqrt())
                + m02.map_or(0.0, |k| c[k] * dv * dv / (6.0 * 5f64.sqrt()));
        }
    }
    0.5 * total * dx * dv
}

/// Integrates `g(f_h, v)` cell by cell with an `n`-point Gauss product rule.
fn integrate_pointwise(f: &DGField, n: usize, g: impl Fn(f64, f64) -> f64 + Sync) -> f64 {
    let q = gauss_rule(n);
    let mut table = Vec::with_capacity(n * n);
    for &xi in &q.nodes {
        for &eta in &q.nodes {
            table.push(f.spec.values(xi, eta));
        }
    }
    let area = f.mesh.dx * f.mesh.dv;
    let nv = f.mesh.nv;
    let per_column: Vec<f64> = (0..f.mesh.nx)
        .into_par_iter()
        .map(|i| {
            let mut s = 0.0;
            for j in 0..nv {
                let c = f.cell(i, j);
                for a in 0..n {
                    for (b, &eta) in q.nodes.iter().enumerate() {
                        let phi = &table[a * n + b];
                        let val: f64 = c.iter().zip(phi).map(|(x, y)| x * y).sum();
                        let v = f.mesh.v_centers[j] + f.mesh.dv * eta;
                        s += q.weights[a] * q.weights[b] * g(val, v);
                    }
                }
            }
            s
        })
        .collect();
    per_column.iter().sum::<f64>() * area
}

/// `(−∫ f ln f, clipped)`, skipping points where `f ≤ 0`.
pub fn entropy(f: &DGField) -> (f64, bool) {
    let n = f.spec.degree() + 2;
    let clipped = std::sync::atomic::AtomicBool::new(false);
    let s = integrate_pointwise(f, n, |val, _| {
        if val > 0.0 {
            -val * val.ln()
        } else {
            clipped.store(true, std::sync::atomic::Ordering::Relaxed);
            0.0
        }
    });
    (s, clipped.into_inner())
}

/// `H_L = −½∫ v f²/f'_eq + ½∫E²`.
pub fn linear_energy(f: &DGField, e: &ElectricFieldPoly, eq: Equilibrium) -> Result<f64> {
    eq.v_over_derivative(0.0)?;
    let n = f.spec.degree() + 4;
    let weighted = integrate_pointwise(f, n, |val, v| {
        -0.5 * val * val * eq.v_over_derivative(v).unwrap_or(f64::NAN)
    });
    Ok(weighted + e.energy())
}

/// `log10((1/L)|∫ E e^{iknx} dx|)` with `k = 2π/L`.
pub fn log_fourier_mode(e: &ElectricFieldPoly, n: usize) -> f64 {
    let q = gauss_rule(8);
    let k = 2.0 * std::f64::consts::PI / e.length;
    let kn = k * n as f64;
    let (mut s, mut c) = (0.0, 0.0);
    for (i, p) in e.e.iter().enumerate() {
        let xc = (i as f64 + 0.5) * e.dx;
        for (&xi, &w) in q.nodes.iter().zip(&q.weights) {
            let x = xc + e.dx * xi;
            let val = w * p.eval(xi);
            s += val * (kn * x).sin();
            c += val * (kn * x).cos();
        }
    }
    let modulus = e.dx * (s * s + c * c).sqrt() / e.length;
    if modulus > 0.0 && modulus.is_finite() {
        modulus.log10().max(LOGFM_FLOOR)
    } else {
        LOGFM_FLOOR
    }
}

pub fn record(
    f: &DGField,
    e: &ElectricFieldPoly,
    t: f64,
    equilibrium: Option<Equilibrium>,
) -> DiagnosticsRecord {
    let kinetic = kinetic_energy(f);
    let electrostatic = e.energy();
    let (entropy, clipped) = entropy(f);
    let hlinear = equilibrium
        .and_then(|eq| linear_energy(f, e, eq).ok())
        .unwrap_or(f64::NAN);
    let mut logfm = [0.0; 4];
    for (n, l) in logfm.iter_mut().enumerate() {
        *l = log_fourier_mode(e, n + 1);
    }
    DiagnosticsRecord {
        t,
        charge: f.total_charge(),
        momentum: momentum(f),
        kinetic,
        electrostatic,
        total: kinetic + electrostatic,
        enstrophy: f.l2_squared(),
        entropy,
        hlinear,
        logfm,
        rhomax: f.density().max(),
        emax: e.max_abs(),
        entropy_clipped: clipped,
    }
}

pub fn write_csv(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    let mut body = String::with_capacity(256 * (records.len() + 1));
    body.push_str(CSV_HEADER);
    body.push('\n');
    for r in records {
        body.push_str(&r.csv_row());
        body.push('\n');
    }
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// Writes `header` followed by rows of `(a, b)`.
pub fn write_pairs(path: &Path, header: &str, rows: &[(f64, f64)]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let mut body = format!("{header}\n");
    for (a, b) in rows {
        body.push_str(&format!("{a:.15e},{b:.15e}\n"));
    }
    w.write_all(body.as_bytes()).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub t: f64,
    pub value: f64,
}

/// Local maxima by the 3-point test, refined by the parabola through the
/// three samples (non-uniform spacing allowed).
pub fn find_peaks(series: &[(f64, f64)]) -> Vec<Peak> {
    let mut peaks = Vec::new();
    for w in series.windows(3) {
        let ((t0, y0), (t1, y1), (t2, y2)) = (w[0], w[1], w[2]);
        if y1 > y0 && y1 >= y2 {
            peaks.push(refine_peak((t0, y0), (t1, y1), (t2, y2)));
        }
    }
    peaks
}

fn refine_peak(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> Peak {
    let (t0, y0) = a;
    let (t1, y1) = b;
    let (t2, y2) = c;
    // divided differences
    let d01 = (y1 - y0) / (t1 - t0);
    let d12 = (y2 - y1) / (t2 - t1);
    let a2 = (d12 - d01) / (t2 - t0);
    if a2 >= 0.0 {
        return Peak { t: t1, value: y1 };
    }
    let a1 = d01 - a2 * (t0 + t1);
    let ts = (-a1 / (2.0 * a2)).clamp(t0, t2);
    let value = y0 + d01 * (ts - t0) + a2 * (ts - t0) * (ts - t1);
    Peak { t: ts, value }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakFit {
    pub peaks: Vec<Peak>,
    /// Slope of `ln(value)` against time over the selected peaks.
    pub rate: f64,
    /// `π / mean spacing`: `|E|` peaks twice per period.
    pub frequency: f64,
}

/// Fits peaks `first..=last` (1-based) of `series`.
pub fn peak_fit(series: &[(f64, f64)], first: usize, last: usize) -> Result<PeakFit> {
    let peaks = find_peaks(series);
    fit_selected(&peaks, first, last)
}

pub fn fit_selected(peaks: &[Peak], first: usize, last: usize) -> Result<PeakFit> {
    if first < 1 || last <= first || peaks.len() < last {
        return Err(Error::NotEnoughPeaks {
            found: peaks.len(),
            needed: last.max(2),
        });
    }
    let sel = &peaks[first - 1..last];
    let n = sel.len() as f64;
    let mt = sel.iter().map(|p| p.t).sum::<f64>() / n;
    let my = sel.iter().map(|p| p.value.ln()).sum::<f64>() / n;
    let sxy: f64 = sel.iter().map(|p| (p.t - mt) * (p.value.ln() - my)).sum();
    let sxx: f64 = sel.iter().map(|p| (p.t - mt).powi(2)).sum();
    let spacing = (sel[sel.len() - 1].t - sel[0].t) / (n - 1.0);
    Ok(PeakFit {
        peaks: sel.to_vec(),
        rate: sxy / sxx,
        frequency: std::f64::consts::PI / spacing,
    })
}

/// Recurrence peaks of a decaying series: the n-th is the largest local maximum
/// within `±period/4` of `n·period`, refined by a parabola. `period` only
/// needs to be a rough guess; it keeps early wiggles of the initial decay
/// and small secondary maxima out of the count.
pub fn recurrence_peaks(series: &[(f64, f64)], count: usize, period: f64) -> Result<Vec<Peak>> {
    let mut peaks = Vec::with_capacity(count);
    for n in 1..=count {
        let not_enough = Error::NotEnoughPeaks {
            found: peaks.len(),
            needed: count,
        };
        let centre = n as f64 * period;
        let lo = series.partition_point(|&(t, _)| t < centre - period / 4.0);
        let hi = series.partition_point(|&(t, _)| t <= centre + period / 4.0);
        if lo == 0 || hi >= series.len() {
            return Err(not_enough);
        }
        // interior local maxima only: a window edge on a decaying background is not a peak
        let idx = (lo.max(1)..hi)
            .filter(|&i| series[i].1 >= series[i - 1].1 && series[i].1 > series[i + 1].1)
            .max_by(|&a, &b| series[a].1.partial_cmp(&series[b].1).unwrap())
            .ok_or(not_enough)?;
        peaks.push(refine_peak(series[idx - 1], series[idx], series[idx + 1]));
    }
    Ok(peaks)
}

/// Average of `t_n / n` over the recurrence peaks.
pub fn recurrence_time(peaks: &[Peak]) -> f64 {
    peaks
        .iter()
        .enumerate()
        .map(|(n, p)| p.t / (n + 1) as f64)
        .sum::<f64>()
        / peaks.len() as f64
}

/// `(ε, f)` at every cell quarter point, `ε = v²/2 − Φ_h(x)`.
pub fn bgk_scatter(f: &DGField, e: &ElectricFieldPoly) -> Vec<(f64, f64)> {
    f.quarter_point_samples()
        .into_iter()
        .map(|(x, v, val)| (0.5 * v * v - e.potential(x), val))
        .collect()
}

/// Mean over occupied ε-bins of `max f − min f`.
pub fn bgk_spread(pairs: &[(f64, f64)], bin_width: f64) -> f64 {
    let mut sorted: Vec<(f64, f64)> = pairs.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let Some(&(e0, _)) = sorted.first() else {
        return 0.0;
    };
    let (mut total, mut bins) = (0.0, 0usize);
    let mut current = None;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(eps, val) in &sorted {
        let b = ((eps - e0) / bin_width).floor() as i64;
        if current != Some(b) {
            if current.is_some() {
                total += hi - lo;
                bins += 1;
            }
            current = Some(b);
            lo = f64::INFINITY;
            hi = f64::NEG_INFINITY;
        }
        lo = lo.min(val);
        hi = hi.max(val);
    }
    total += hi - lo;
    bins += 1;
    total / bins as f64
}
