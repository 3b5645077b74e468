use serde::{Deserialize, Serialize};

use crate::basis::BasisSpec;
use crate::diagnostics::{self, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::field::{project, DGField};
use crate::limiter::{apply_positivity_in_place, LimiterPointSet};
use crate::mesh::Mesh;
use crate::poisson::{solve_linear, solve_nonlinear, ElectricFieldPoly};
use crate::rhs::{LinearSource, Operator};
use crate::scenarios::{DriveSpec, Equilibrium, Scenario, SystemKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    pub cfl: f64,
    pub t_end: f64,
    /// Diagnostics are recorded every this many steps (and at `t_end`).
    pub diag_every: usize,
    /// Times at which snapshots are requested; steps land on them exactly.
    pub snapshot_times: Vec<f64>,
    /// Fixed step overriding the CFL estimate (still clipped to outputs).
    pub fixed_dt: Option<f64>,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            cfl: 0.3,
            t_end: 0.0,
            diag_every: 1,
            snapshot_times: Vec::new(),
            fixed_dt: None,
        }
    }
}

/// One SSP-RK3 step on a plain state vector. `limit` is applied to the input
/// of every forward-Euler stage; `h(u, t)` is the spatial operator.
pub fn rk3<F, L>(u: &[f64], t: f64, dt: f64, mut h: F, mut limit: L) -> Result<Vec<f64>>
where
    F: FnMut(&[f64], f64) -> Result<Vec<f64>>,
    L: FnMut(&mut Vec<f64>),
{
    let mut u0 = u.to_vec();
    limit(&mut u0);
    let k0 = h(&u0, t)?;
    let mut u1: Vec<f64> = u0.iter().zip(&k0).map(|(a, k)| a + dt * k).collect();
    limit(&mut u1);
    let k1 = h(&u1, t + dt)?;
    let mut u2: Vec<f64> = u0
        .iter()
        .zip(u1.iter().zip(&k1))
        .map(|(a, (b, k))| 0.75 * a + 0.25 * (b + dt * k))
        .collect();
    limit(&mut u2);
    let k2 = h(&u2, t + 0.5 * dt)?;
    Ok(u0
        .iter()
        .zip(u2.iter().zip(&k2))
        .map(|(a, (b, k))| a / 3.0 + 2.0 / 3.0 * (b + dt * k))
        .collect())
}

/// Everything needed to advance one scenario's state.
pub struct Stepper {
    pub op: Operator,
    pub system: SystemKind,
    pub equilibrium: Equilibrium,
    pub drive: Option<DriveSpec>,
    source: Option<LinearSource>,
    limiter: Option<LimiterPointSet>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepInfo {
    /// `dt(Θ⁰/6 + Θ¹/6 + 2Θ²/3)`: charge that left through `v = ±V_c`.
    pub boundary_charge: f64,
    /// Cells whose average was negative when the limiter ran.
    pub negative_cells: usize,
}

impl Stepper {
    pub fn new(
        mesh: &Mesh,
        spec: &BasisSpec,
        system: SystemKind,
        equilibrium: Equilibrium,
        drive: Option<DriveSpec>,
        limiter: bool,
    ) -> Self {
        let op = Operator::new(mesh, spec);
        let source = (system == SystemKind::Linear).then(|| op.linear_source(equilibrium));
        let limiter = (limiter && system == SystemKind::Nonlinear).then(|| LimiterPointSet::new(spec));
        Self {
            op,
            system,
            equilibrium,
            drive,
            source,
            limiter,
        }
    }

    pub fn for_scenario(mesh: &Mesh, spec: &BasisSpec, scenario: &Scenario, limiter: bool) -> Self {
        Self::new(
            mesh,
            spec,
            scenario.system,
            scenario.equilibrium,
            scenario.drive,
            limiter,
        )
    }

    /// Self-consistent field of `f` (diagnostic only for advection).
    pub fn electric_field(&self, f: &DGField) -> ElectricFieldPoly {
        let rho = f.density();
        match self.system {
            SystemKind::Nonlinear => solve_nonlinear(&rho),
            SystemKind::Linear | SystemKind::Advection => solve_linear(&rho),
        }
    }

    /// `dc/dt` at time `t`, plus `Θ(f, E, 1)`.
    pub fn rhs(&self, f: &DGField, t: f64, out: &mut DGField) -> Result<f64> {
        match self.system {
            SystemKind::Advection => {
                self.op.rhs_advection(f, out)?;
                Ok(0.0)
            }
            SystemKind::Linear => {
                let e = self.electric_field(f);
                let src = self.source.as_ref().expect("linear source built for linear runs");
                self.op.rhs_linear(f, &e, src, out)?;
                Ok(0.0)
            }
            SystemKind::Nonlinear => {
                let e = self.electric_field(f);
                let sample = self.op.sample_field(&e, self.drive.as_ref().map(|d| (d, t)));
                self.op.rhs_nonlinear(f, &sample, out)?;
                Ok(self.op.boundary_flux(f, &sample))
            }
        }
    }

    /// Largest stable step: `cfl·min(Δx/V_c, Δv/E_max)/(2l+1)`.
    pub fn max_dt(&self, f: &DGField, t: f64, cfl: f64) -> f64 {
        let mesh = &self.op.mesh;
        let mut h = mesh.dx / mesh.vc;
        if self.system == SystemKind::Nonlinear {
            let mut emax = self.electric_field(f).max_abs();
            if let Some(d) = &self.drive {
                if t < d.shutoff() {
                    emax += d.amplitude.abs();
                }
            }
            if emax > 0.0 {
                h = h.min(mesh.dv / emax);
            }
        }
        cfl * h / (2 * self.op.spec.degree() + 1) as f64
    }

    pub fn step(&self, f: &DGField, t: f64, dt: f64) -> Result<(DGField, StepInfo)> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidStep(format!("dt = {dt}")));
        }
        let mut info = StepInfo::default();
        let mut thetas = Vec::with_capacity(3);
        let mut scratch = DGField::zeros(&f.mesh, &f.spec);
        let mut work = f.clone();
        let next = rk3(
            &f.coeffs,
            t,
            dt,
            |u, ts| {
                work.coeffs.copy_from_slice(u);
                thetas.push(self.rhs(&work, ts, &mut scratch)?);
                Ok(scratch.coeffs.clone())
            },
            |u| {
                if let Some(points) = &self.limiter {
                    let mut g = DGField {
                        mesh: f.mesh.clone(),
                        spec: f.spec.clone(),
                        coeffs: std::mem::take(u),
                    };
                    info.negative_cells += apply_positivity_in_place(&mut g, points);
                    *u = g.coeffs;
                }
            },
        )?;
        info.boundary_charge = dt * (thetas[0] / 6.0 + thetas[1] / 6.0 + 2.0 * thetas[2] / 3.0);
        let out = DGField::from_coeffs(&f.mesh, &f.spec, next)?;
        if !out.is_finite() {
            return Err(Error::NonFinite { t: t + dt });
        }
        Ok((out, info))
    }

    pub fn record(&self, f: &DGField, t: f64) -> DiagnosticsRecord {
        let e = self.electric_field(f);
        let eq = (self.system == SystemKind::Linear).then_some(self.equilibrium);
        diagnostics::record(f, &e, t, eq)
    }
}

/// Result of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub field: DGField,
    pub diagnostics: Vec<DiagnosticsRecord>,
    /// Accumulated boundary charge `Σ dt·Θ` up to each diagnostics row.
    pub boundary_charge: Vec<f64>,
    pub steps: usize,
}

/// Hooks invoked while integrating.
pub trait Observer {
    fn on_step(&mut self, _stepper: &Stepper, _f: &DGField, _t: f64) -> Result<()> {
        Ok(())
    }
    fn on_snapshot(&mut self, _stepper: &Stepper, _f: &DGField, _t: f64) -> Result<()> {
        Ok(())
    }
    /// Called for every diagnostics row, including the one at `t = 0`.
    fn on_record(&mut self, _stepper: &Stepper, _f: &DGField, _rec: &DiagnosticsRecord) -> Result<()> {
        Ok(())
    }
}

impl Observer for () {}

pub fn run(
    scenario: &Scenario,
    mesh: &Mesh,
    spec: &BasisSpec,
    limiter: bool,
    control: &StepControl,
    observer: &mut dyn Observer,
) -> Result<RunOutput> {
    let stepper = Stepper::for_scenario(mesh, spec, scenario, limiter);
    let f0 = project(|x, v| scenario.initial(x, v), mesh, spec);
    run_from(&stepper, f0, control, observer)
}

pub fn run_from(
    stepper: &Stepper,
    f0: DGField,
    control: &StepControl,
    observer: &mut dyn Observer,
) -> Result<RunOutput> {
    if !(control.cfl > 0.0) || control.t_end < 0.0 || control.diag_every == 0 {
        return Err(Error::InvalidStep(format!(
            "cfl = {}, t_end = {}, diag_every = {}",
            control.cfl, control.t_end, control.diag_every
        )));
    }
    let mut marks: Vec<f64> = control
        .snapshot_times
        .iter()
        .copied()
        .filter(|&s| s >= 0.0 && s <= control.t_end)
        .collect();
    marks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    marks.dedup();

    let mut f = f0;
    let mut t = 0.0;
    let mut steps = 0usize;
    let mut ledger = 0.0;
    let mut diagnostics = vec![stepper.record(&f, t)];
    observer.on_record(stepper, &f, &diagnostics[0])?;
    let mut boundary = vec![0.0];
    let mut next_mark = 0;
    while next_mark < marks.len() && marks[next_mark] <= 0.0 {
        observer.on_snapshot(stepper, &f, t)?;
        next_mark += 1;
    }
    observer.on_step(stepper, &f, t)?;

    while t < control.t_end {
        let target = marks.get(next_mark).copied().unwrap_or(control.t_end);
        let mut dt = control
            .fixed_dt
            .unwrap_or_else(|| stepper.max_dt(&f, t, control.cfl));
        let mut landed = false;
        // avoid a sliver step just before an output time
        if t + dt >= target - 1e-12 * target.max(1.0) {
            dt = target - t;
            landed = true;
        }
        let (next, info) = stepper.step(&f, t, dt)?;
        f = next;
        t = if landed { target } else { t + dt };
        steps += 1;
        ledger += info.boundary_charge;
        observer.on_step(stepper, &f, t)?;
        let at_end = t >= control.t_end;
        if steps % control.diag_every == 0 || at_end {
            let rec = stepper.record(&f, t);
            observer.on_record(stepper, &f, &rec)?;
            diagnostics.push(rec);
            boundary.push(ledger);
        }
        while next_mark < marks.len() && marks[next_mark] <= t {
            observer.on_snapshot(stepper, &f, t)?;
            next_mark += 1;
        }
    }
    Ok(RunOutput {
        field: f,
        diagnostics,
        boundary_charge: boundary,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_mesh;
    use crate::scenarios::ScenarioName;
    use std::f64::consts::PI;

    #[test]
    fn zero_operator_is_identity() {
        let u = vec![1.0, -2.0, 3.5];
        let out = rk3(&u, 0.0, 0.1, |x, _| Ok(vec![0.0; x.len()]), |_| {}).unwrap();
        assert_eq!(out, u);
    }

    #[test]
    fn scalar_amplification() {
        let lambda = -1.3;
        let dt = 0.2;
        let out = rk3(&[1.0], 0.0, dt, |x, _| Ok(vec![lambda * x[0]]), |_| {}).unwrap();
        let z: f64 = lambda * dt;
        let expected = 1.0 + z + z * z / 2.0 + z * z * z / 6.0;
        assert!((out[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn stage_times() {
        let mut times = Vec::new();
        rk3(&[0.0], 1.0, 0.5, |x, t| {
            times.push(t);
            Ok(vec![0.0; x.len()])
        }, |_| {})
        .unwrap();
        assert_eq!(times, vec![1.0, 1.5, 1.25]);
    }

    #[test]
    fn piecewise_constant_step_matches_chained_euler() {
        let mesh = build_mesh(9, 4, 2.0, 2.0).unwrap();
        let spec = BasisSpec::tensor(0).unwrap();
        let stepper = Stepper::new(&mesh, &spec, SystemKind::Advection, Equilibrium::Maxwellian, None, false);
        let f = project(|x, v| (PI * x).sin() * (1.0 + v), &mesh, &spec);
        let dt = 0.05;
        let euler = |g: &Vec<f64>| -> Vec<f64> {
            let mut out = g.clone();
            for i in 0..9 {
                for j in 0..4 {
                    let vj = mesh.v_centers[j];
                    let c = |ii: usize| g[ii * 4 + j];
                    let d = if vj >= 0.0 {
                        c(i) - c((i + 8) % 9)
                    } else {
                        c((i + 1) % 9) - c(i)
                    };
                    out[i * 4 + j] = c(i) - dt * vj * d / mesh.dx;
                }
            }
            out
        };
        let u0 = f.coeffs.clone();
        let u1 = euler(&u0);
        let e1 = euler(&u1);
        let u2: Vec<f64> = u0.iter().zip(&e1).map(|(a, b)| 0.75 * a + 0.25 * b).collect();
        let e2 = euler(&u2);
        let expected: Vec<f64> = u0.iter().zip(&e2).map(|(a, b)| a / 3.0 + 2.0 / 3.0 * b).collect();
        let (got, _) = stepper.step(&f, 0.0, dt).unwrap();
        for (a, b) in got.coeffs.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_end_time_gives_initial_state() {
        let sc = Scenario::defaults(ScenarioName::LandauLinear);
        let mesh = build_mesh(8, 8, sc.length, sc.vc).unwrap();
        let spec = BasisSpec::tensor(1).unwrap();
        let out = run(&sc, &mesh, &spec, false, &StepControl::default(), &mut ()).unwrap();
        assert_eq!(out.diagnostics.len(), 1);
        assert_eq!(out.steps, 0);
        assert_eq!(out.field, project(|x, v| sc.initial(x, v), &mesh, &spec));
    }

    #[test]
    fn lands_on_snapshot_times() {
        struct Times(Vec<f64>);
        impl Observer for Times {
            fn on_snapshot(&mut self, _: &Stepper, _: &DGField, t: f64) -> Result<()> {
                self.0.push(t);
                Ok(())
            }
        }
        let sc = Scenario::defaults(ScenarioName::AdvectionMaxwellian);
        let mesh = build_mesh(8, 8, sc.length, sc.vc).unwrap();
        let spec = BasisSpec::tensor(1).unwrap();
        let control = StepControl {
            t_end: 1.0,
            snapshot_times: vec![0.0, 0.25, 0.5, 1.0],
            diag_every: 1000,
            ..StepControl::default()
        };
        let mut obs = Times(Vec::new());
        let out = run(&sc, &mesh, &spec, false, &control, &mut obs).unwrap();
        assert_eq!(obs.0, vec![0.0, 0.25, 0.5, 1.0]);
        assert_eq!(out.diagnostics.last().unwrap().t, 1.0);
    }

    #[test]
    fn advection_l2_decays() {
        let sc = Scenario::defaults(ScenarioName::AdvectionMaxwellian);
        let mesh = build_mesh(10, 10, sc.length, sc.vc).unwrap();
        let spec = BasisSpec::total_degree(2).unwrap();
        let control = StepControl {
            t_end: 2.0,
            ..StepControl::default()
        };
        let out = run(&sc, &mesh, &spec, false, &control, &mut ()).unwrap();
        for w in out.diagnostics.windows(2) {
            assert!(w[1].enstrophy <= w[0].enstrophy * (1.0 + 1e-14));
        }
    }
}
