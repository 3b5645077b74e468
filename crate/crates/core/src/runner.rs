//! Runs a configuration and writes its output bundle.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::Serialize;

use crate::config::RunConfig;
use crate::diagnostics::{bgk_scatter, write_pairs, DiagnosticsRecord, CSV_HEADER};
use crate::error::{Error, Result};
use crate::field::DGField;
use crate::integrator::{run, Observer, Stepper};
use crate::mesh::Mesh;
use crate::recurrence::{measured_recurrence_time, peaks_for, predicted_recurrence_time, report_rows, write_report};
use crate::scenarios::{Scenario, SystemKind};

pub const THREADS_ENV: &str = "VPDG_THREADS";

/// Worker count: `VPDG_THREADS`, then the config's `threads`, else rayon's
/// default.
pub fn thread_count(cfg: &RunConfig) -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::InvalidConfig(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(cfg.threads),
    }
}

/// Runs `f` on a dedicated pool of `threads` workers (global pool if `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// `12.5 → "12.5"`, `200.0 → "200"`.
pub fn time_label(t: f64) -> String {
    format!("{t}")
}

#[derive(Debug, Clone, Serialize)]
struct MeshSummary {
    nx: usize,
    nv: usize,
    length: f64,
    vc: f64,
    dx: f64,
    dv: f64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    program: &'static str,
    version: &'static str,
    status: &'a str,
    error: Option<String>,
    config: &'a RunConfig,
    canonical_config: String,
    scenario: Scenario,
    mesh: MeshSummary,
    basis: String,
    steps: Option<usize>,
    files: &'a [String],
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub directory: PathBuf,
    pub steps: usize,
    pub records: usize,
    pub files: Vec<String>,
    /// Measured `ρ_max` recurrence time of advection runs, when enough
    /// peaks fit into the run.
    pub measured_tr: Option<f64>,
}

struct Bundle {
    dir: PathBuf,
    files: Vec<String>,
    diag: BufWriter<File>,
    ecenter: Option<BufWriter<File>>,
    bgk: bool,
    rhomax: Vec<(f64, f64)>,
    records: usize,
}

impl Bundle {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn note(&mut self, name: String) {
        if !self.files.contains(&name) {
            self.files.push(name);
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn write_line(w: &mut BufWriter<File>, path: &Path, line: &str) -> Result<()> {
    writeln!(w, "{line}").map_err(|e| Error::io(path, e))
}

impl Observer for Bundle {
    fn on_snapshot(&mut self, stepper: &Stepper, f: &DGField, t: f64) -> Result<()> {
        let name = format!("snapshot_t{}.csv", time_label(t));
        f.write_snapshot(&self.path(&name))?;
        self.note(name);
        if self.bgk {
            let e = stepper.electric_field(f);
            let name = format!("bgk_t{}.csv", time_label(t));
            write_pairs(&self.path(&name), "eps,f", &bgk_scatter(f, &e))?;
            self.note(name);
        }
        Ok(())
    }

    fn on_record(&mut self, stepper: &Stepper, f: &DGField, rec: &DiagnosticsRecord) -> Result<()> {
        let path = self.path("diagnostics.csv");
        write_line(&mut self.diag, &path, &rec.csv_row())?;
        self.diag.flush().map_err(|e| Error::io(&path, e))?;
        if let Some(w) = self.ecenter.as_mut() {
            let path = self.dir.join("ecenter.csv");
            let e0 = stepper.electric_field(f).eval(0.0);
            write_line(w, &path, &format!("{:.15e},{:.15e}", rec.t, e0))?;
        }
        self.rhomax.push((rec.t, rec.rhomax));
        self.records += 1;
        Ok(())
    }
}

fn write_manifest(
    dir: &Path,
    cfg: &RunConfig,
    mesh: &Mesh,
    status: &str,
    error: Option<String>,
    steps: Option<usize>,
    files: &[String],
) -> Result<()> {
    let manifest = Manifest {
        program: "vpdg",
        version: env!("CARGO_PKG_VERSION"),
        status,
        error,
        config: cfg,
        canonical_config: cfg.to_canonical(),
        scenario: cfg.scenario(),
        mesh: MeshSummary {
            nx: mesh.nx,
            nv: mesh.nv,
            length: mesh.length,
            vc: mesh.vc,
            dx: mesh.dx,
            dv: mesh.dv,
        },
        basis: cfg.basis()?.label(),
        steps,
        files,
    };
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::io(path, e))
}

/// Runs `cfg` and writes the bundle into `cfg.output`. Files written before a
/// solver failure are kept and the manifest records the error.
pub fn execute(cfg: &RunConfig) -> Result<RunSummary> {
    let threads = thread_count(cfg)?;
    with_threads(threads, || execute_inner(cfg))?
}

fn execute_inner(cfg: &RunConfig) -> Result<RunSummary> {
    let scenario = cfg.scenario();
    for w in scenario.validate()? {
        warn!("{w}");
    }
    let mesh = cfg.build_mesh()?;
    let spec = cfg.basis()?;
    let control = cfg.step_control();
    let dir = PathBuf::from(&cfg.output);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    write_manifest(&dir, cfg, &mesh, "running", None, None, &[])?;

    let diag_path = dir.join("diagnostics.csv");
    let mut diag = create(&diag_path)?;
    write_line(&mut diag, &diag_path, CSV_HEADER)?;
    let mut files = vec!["manifest.json".to_string(), "diagnostics.csv".to_string()];
    let ecenter = if scenario.drive.is_some() {
        let path = dir.join("ecenter.csv");
        let mut w = create(&path)?;
        write_line(&mut w, &path, "t,e0")?;
        files.push("ecenter.csv".to_string());
        Some(w)
    } else {
        None
    };
    let mut bundle = Bundle {
        dir: dir.clone(),
        files,
        diag,
        ecenter,
        bgk: scenario.system == SystemKind::Nonlinear,
        rhomax: Vec::new(),
        records: 0,
    };
    info!(
        "{}: {}x{} {} to t = {}",
        scenario.name,
        mesh.nx,
        mesh.nv,
        spec.label(),
        control.t_end
    );
    let result = run(&scenario, &mesh, &spec, cfg.limiter, &control, &mut bundle);
    let flushed = bundle
        .ecenter
        .as_mut()
        .map_or(Ok(()), |w| w.flush())
        .and_then(|_| bundle.diag.flush());
    let out = match result {
        Ok(out) => out,
        Err(e) => {
            write_manifest(&dir, cfg, &mesh, "failed", Some(e.to_string()), None, &bundle.files)?;
            return Err(e);
        }
    };
    flushed.map_err(|e| Error::io(&dir, e))?;

    let mut measured_tr = None;
    if scenario.system == SystemKind::Advection {
        let predicted = predicted_recurrence_time(&spec, scenario.k, mesh.dx, mesh.dv);
        let count = peaks_for(scenario.equilibrium);
        match measured_recurrence_time(&bundle.rhomax, count, predicted) {
            Ok((tr, _)) => measured_tr = Some(tr),
            Err(e) => warn!("recurrence time not measured: {e}"),
        }
        let rows = report_rows(&spec, &mesh, scenario.k, measured_tr.unwrap_or(f64::NAN))?;
        write_report(&dir.join("recurrence_report.csv"), &rows)?;
        bundle.note("recurrence_report.csv".to_string());
    }
    write_manifest(&dir, cfg, &mesh, "completed", None, Some(out.steps), &bundle.files)?;
    Ok(RunSummary {
        directory: dir,
        steps: out.steps,
        records: bundle.records,
        files: bundle.files.clone(),
        measured_tr,
    })
}
