//! INI-style run configuration.
//!
//! ```text
//! [mesh]      nx, nv, vc, length
//! [basis]     family (Q | P), degree
//! [scenario]  name, amplitude, k, drive_amplitude, drive_omega
//! [time]      cfl, t_end, diag_every, snapshot_times (comma separated)
//! [output]    directory
//! [limiter]   enabled (on | off)
//! [parallel]  threads
//! ```
//!
//! `#` and `;` start comments. Every key is optional except
//! `[scenario] name`; unknown sections and keys are errors.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::basis::{BasisFamily, BasisSpec, MAX_DEGREE};
use crate::error::{Error, Result};
use crate::integrator::StepControl;
use crate::mesh::{build_mesh, Mesh};
use crate::scenarios::{Scenario, ScenarioName};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshConfig {
    pub nx: usize,
    pub nv: usize,
    pub vc: Option<f64>,
    /// Defaults to one wavelength `2π/k` of the scenario.
    pub length: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisConfig {
    pub family: BasisFamily,
    pub degree: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: ScenarioName,
    pub amplitude: Option<f64>,
    pub k: Option<f64>,
    pub drive_amplitude: Option<f64>,
    pub drive_omega: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeConfig {
    pub cfl: f64,
    pub t_end: Option<f64>,
    pub diag_every: usize,
    pub snapshot_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mesh: MeshConfig,
    pub basis: BasisConfig,
    pub scenario: ScenarioConfig,
    pub time: TimeConfig,
    pub output: String,
    pub limiter: bool,
    pub threads: Option<usize>,
}

impl RunConfig {
    /// Defaults for everything but the scenario: 40×40, `Q²`, cfl 0.3.
    pub fn new(name: ScenarioName) -> Self {
        RunConfig {
            mesh: MeshConfig {
                nx: 40,
                nv: 40,
                vc: None,
                length: None,
            },
            basis: BasisConfig {
                family: BasisFamily::TensorQ,
                degree: 2,
            },
            scenario: ScenarioConfig {
                name,
                amplitude: None,
                k: None,
                drive_amplitude: None,
                drive_omega: None,
            },
            time: TimeConfig {
                cfl: 0.3,
                t_end: None,
                diag_every: 1,
                snapshot_times: Vec::new(),
            },
            output: "output".to_string(),
            limiter: false,
            threads: None,
        }
    }

    pub fn scenario(&self) -> Scenario {
        let mut s = Scenario::defaults(self.scenario.name);
        if let Some(a) = self.scenario.amplitude {
            s.amplitude = a;
        }
        if let Some(k) = self.scenario.k {
            s.k = k;
            if let Some(d) = s.drive.as_mut() {
                d.k = k;
            }
        }
        s.length = self.mesh.length.unwrap_or(2.0 * PI / s.k);
        if let Some(vc) = self.mesh.vc {
            s.vc = vc;
        }
        if let Some(d) = s.drive.as_mut() {
            if let Some(a) = self.scenario.drive_amplitude {
                d.amplitude = a;
            }
            if let Some(w) = self.scenario.drive_omega {
                d.omega = w;
            }
        }
        s
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        let s = self.scenario();
        build_mesh(self.mesh.nx, self.mesh.nv, s.length, s.vc)
    }

    pub fn basis(&self) -> Result<BasisSpec> {
        BasisSpec::new(self.basis.family, self.basis.degree)
    }

    pub fn t_end(&self) -> f64 {
        self.time
            .t_end
            .unwrap_or_else(|| default_t_end(self.scenario.name))
    }

    pub fn step_control(&self) -> StepControl {
        StepControl {
            cfl: self.time.cfl,
            t_end: self.t_end(),
            diag_every: self.time.diag_every,
            snapshot_times: self.time.snapshot_times.clone(),
            fixed_dt: None,
        }
    }

    /// Every parameter resolved, in a form [`parse_config`] reads back to
    /// the same resolved run.
    pub fn to_canonical(&self) -> String {
        let s = self.scenario();
        let mut out = String::new();
        out.push_str(&format!(
            "[mesh]\nnx = {}\nnv = {}\nvc = {:?}\nlength = {:?}\n\n",
            self.mesh.nx, self.mesh.nv, s.vc, s.length
        ));
        let fam = match self.basis.family {
            BasisFamily::TensorQ => "Q",
            BasisFamily::TotalDegreeP => "P",
        };
        out.push_str(&format!("[basis]\nfamily = {fam}\ndegree = {}\n\n", self.basis.degree));
        out.push_str(&format!(
            "[scenario]\nname = {}\namplitude = {:?}\nk = {:?}\n",
            s.name, s.amplitude, s.k
        ));
        if let Some(d) = &s.drive {
            out.push_str(&format!(
                "drive_amplitude = {:?}\ndrive_omega = {:?}\n",
                d.amplitude, d.omega
            ));
        }
        let snaps: Vec<String> = self.time.snapshot_times.iter().map(|t| format!("{t:?}")).collect();
        out.push_str(&format!(
            "\n[time]\ncfl = {:?}\nt_end = {:?}\ndiag_every = {}\nsnapshot_times = {}\n\n",
            self.time.cfl,
            self.t_end(),
            self.time.diag_every,
            snaps.join(", ")
        ));
        out.push_str(&format!("[output]\ndirectory = {}\n\n", self.output));
        out.push_str(&format!(
            "[limiter]\nenabled = {}\n",
            if self.limiter { "on" } else { "off" }
        ));
        if let Some(n) = self.threads {
            out.push_str(&format!("\n[parallel]\nthreads = {n}\n"));
        }
        out
    }
}

/// Run length used when `[time] t_end` is absent.
pub fn default_t_end(name: ScenarioName) -> f64 {
    match name {
        ScenarioName::AdvectionMaxwellian => 160.0,
        ScenarioName::AdvectionLorentzian => 60.0,
        ScenarioName::LandauLinear => 60.0,
        ScenarioName::LandauNonlinear | ScenarioName::TwoStream => 100.0,
        ScenarioName::KeenJ | ScenarioName::KeenA => 400.0,
    }
}

const KEYS: &[(&str, &[&str])] = &[
    ("mesh", &["nx", "nv", "vc", "length"]),
    ("basis", &["family", "degree"]),
    ("scenario", &["name", "amplitude", "k", "drive_amplitude", "drive_omega"]),
    ("time", &["cfl", "t_end", "diag_every", "snapshot_times"]),
    ("output", &["directory"]),
    ("limiter", &["enabled"]),
    ("parallel", &["threads"]),
];

struct Entry {
    line: usize,
    value: String,
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Config {
        line,
        msg: msg.into(),
    }
}

fn num<T: std::str::FromStr>(e: &Entry, key: &str) -> Result<T> {
    e.value
        .parse()
        .map_err(|_| err(e.line, format!("{key}: cannot parse `{}`", e.value)))
}

fn positive(e: &Entry, key: &str) -> Result<f64> {
    let v: f64 = num(e, key)?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(err(e.line, format!("{key} must be positive")));
    }
    Ok(v)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut entries: BTreeMap<(String, String), Entry> = BTreeMap::new();
    let mut section: Option<String> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let body = raw.split(['#', ';']).next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err(line, "unterminated section header"))?
                .trim()
                .to_ascii_lowercase();
            if !KEYS.iter().any(|(s, _)| *s == name) {
                return Err(err(line, format!("unknown section [{name}]")));
            }
            section = Some(name);
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected `key = value`, got `{body}`")))?;
        let key = key.trim().to_ascii_lowercase();
        let sec = section
            .clone()
            .ok_or_else(|| err(line, format!("key `{key}` outside of any section")))?;
        let allowed = KEYS.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key.as_str()) {
            return Err(err(line, format!("unknown key `{key}` in [{sec}]")));
        }
        let entry = Entry {
            line,
            value: value.trim().to_string(),
        };
        if let Some(prev) = entries.insert((sec.clone(), key.clone()), entry) {
            return Err(err(line, format!("duplicate key `{key}` (first set on line {})", prev.line)));
        }
    }

    let get = |s: &str, k: &str| entries.get(&(s.to_string(), k.to_string()));
    let name_entry = get("scenario", "name").ok_or_else(|| err(0, "missing [scenario] name"))?;
    let name: ScenarioName = name_entry
        .value
        .parse()
        .map_err(|e: Error| err(name_entry.line, e.to_string()))?;
    let mut cfg = RunConfig::new(name);

    if let Some(e) = get("mesh", "nx") {
        cfg.mesh.nx = num(e, "nx")?;
        if cfg.mesh.nx == 0 {
            return Err(err(e.line, "nx must be at least 1"));
        }
    }
    if let Some(e) = get("mesh", "nv") {
        cfg.mesh.nv = num(e, "nv")?;
        if cfg.mesh.nv % 2 != 0 || cfg.mesh.nv == 0 {
            return Err(err(e.line, "nv must be even"));
        }
    }
    if let Some(e) = get("mesh", "vc") {
        cfg.mesh.vc = Some(positive(e, "vc")?);
    }
    if let Some(e) = get("mesh", "length") {
        cfg.mesh.length = Some(positive(e, "length")?);
    }
    if let Some(e) = get("basis", "family") {
        cfg.basis.family = match e.value.to_ascii_lowercase().as_str() {
            "q" | "tensor" => BasisFamily::TensorQ,
            "p" | "total" => BasisFamily::TotalDegreeP,
            other => return Err(err(e.line, format!("family must be Q or P, got `{other}`"))),
        };
    }
    if let Some(e) = get("basis", "degree") {
        cfg.basis.degree = num(e, "degree")?;
        if cfg.basis.degree > MAX_DEGREE {
            return Err(err(e.line, format!("degree must be at most {MAX_DEGREE}")));
        }
    }
    if let Some(e) = get("scenario", "amplitude") {
        cfg.scenario.amplitude = Some(num(e, "amplitude")?);
    }
    if let Some(e) = get("scenario", "k") {
        cfg.scenario.k = Some(positive(e, "k")?);
    }
    let defaults = Scenario::defaults(name);
    for (key, slot) in [
        ("drive_amplitude", &mut cfg.scenario.drive_amplitude),
        ("drive_omega", &mut cfg.scenario.drive_omega),
    ] {
        if let Some(e) = get("scenario", key) {
            if defaults.drive.is_none() {
                return Err(err(e.line, format!("{key} only applies to driven scenarios")));
            }
            *slot = Some(num(e, key)?);
        }
    }
    if let Some(e) = get("time", "cfl") {
        cfg.time.cfl = positive(e, "cfl")?;
    }
    if let Some(e) = get("time", "t_end") {
        let t: f64 = num(e, "t_end")?;
        if !(t >= 0.0 && t.is_finite()) {
            return Err(err(e.line, "t_end must be non-negative"));
        }
        cfg.time.t_end = Some(t);
    }
    if let Some(e) = get("time", "diag_every") {
        cfg.time.diag_every = num(e, "diag_every")?;
        if cfg.time.diag_every == 0 {
            return Err(err(e.line, "diag_every must be at least 1"));
        }
    }
    if let Some(e) = get("time", "snapshot_times") {
        let mut times = Vec::new();
        for part in e.value.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let t: f64 = part
                .parse()
                .map_err(|_| err(e.line, format!("snapshot_times: cannot parse `{part}`")))?;
            if !(t >= 0.0 && t.is_finite()) {
                return Err(err(e.line, "snapshot times must be non-negative"));
            }
            times.push(t);
        }
        cfg.time.snapshot_times = times;
    }
    if let Some(e) = get("output", "directory") {
        if e.value.is_empty() {
            return Err(err(e.line, "directory must not be empty"));
        }
        cfg.output = e.value.clone();
    }
    if let Some(e) = get("limiter", "enabled") {
        cfg.limiter = match e.value.to_ascii_lowercase().as_str() {
            "on" | "true" | "yes" | "1" => true,
            "off" | "false" | "no" | "0" => false,
            other => return Err(err(e.line, format!("enabled must be on or off, got `{other}`"))),
        };
    }
    if let Some(e) = get("parallel", "threads") {
        let n: usize = num(e, "threads")?;
        if n == 0 {
            return Err(err(e.line, "threads must be at least 1"));
        }
        cfg.threads = Some(n);
    }
    Ok(cfg)
}
