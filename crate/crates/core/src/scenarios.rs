use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Equilibrium {
    Maxwellian,
    Lorentzian,
    TwoStream,
}

impl Equilibrium {
    pub fn value(self, v: f64) -> f64 {
        match self {
            Equilibrium::Maxwellian => INV_SQRT_2PI * (-0.5 * v * v).exp(),
            Equilibrium::Lorentzian => 1.0 / (PI * (v * v + 1.0)),
            Equilibrium::TwoStream => INV_SQRT_2PI * v * v * (-0.5 * v * v).exp(),
        }
    }

    pub fn derivative(self, v: f64) -> f64 {
        match self {
            Equilibrium::Maxwellian => -v * self.value(v),
            Equilibrium::Lorentzian => {
                let d = v * v + 1.0;
                -2.0 * v / (PI * d * d)
            }
            Equilibrium::TwoStream => INV_SQRT_2PI * v * (2.0 - v * v) * (-0.5 * v * v).exp(),
        }
    }

    /// `v / f'_eq(v)` in a form regular at `v = 0`.
    pub fn v_over_derivative(self, v: f64) -> Result<f64> {
        match self {
            Equilibrium::Maxwellian => Ok(-1.0 / self.value(v)),
            Equilibrium::Lorentzian => {
                let d = v * v + 1.0;
                Ok(-PI * d * d / 2.0)
            }
            Equilibrium::TwoStream => Err(Error::UnsupportedEquilibrium("two-stream")),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Equilibrium::Maxwellian => "maxwellian",
            Equilibrium::Lorentzian => "lorentzian",
            Equilibrium::TwoStream => "two-stream",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DriveKind {
    J,
    A,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    pub kind: DriveKind,
    pub amplitude: f64,
    pub k: f64,
    pub omega: f64,
}

impl DriveSpec {
    pub fn envelope(&self, t: f64) -> f64 {
        drive_amplitude(self, t)
    }

    pub fn field(&self, x: f64, t: f64) -> f64 {
        external_field(self, x, t)
    }

    /// Time after which the drive is identically (or negligibly) zero.
    pub fn shutoff(&self) -> f64 {
        match self.kind {
            DriveKind::J => 200.0,
            DriveKind::A => 110.0,
        }
    }
}

pub fn drive_amplitude(spec: &DriveSpec, t: f64) -> f64 {
    let am = spec.amplitude;
    match spec.kind {
        DriveKind::J => {
            if t <= 0.0 {
                0.0
            } else if t < 50.0 {
                am * (t * PI / 100.0).sin()
            } else if t < 150.0 {
                am
            } else if t < 200.0 {
                am * ((t - 150.0) * PI / 100.0).cos()
            } else {
                0.0
            }
        }
        DriveKind::A => {
            if t <= 0.0 {
                // the logistic ramp is ~4e-175 here; keep it literal
                am / (1.0 + (400.0f64).exp())
            } else if t < 60.0 {
                am / (1.0 + (-40.0 * (t - 10.0)).exp())
            } else {
                am * (1.0 - 1.0 / (1.0 + (-40.0 * (t - 110.0)).exp()))
            }
        }
    }
}

pub fn external_field(spec: &DriveSpec, x: f64, t: f64) -> f64 {
    drive_amplitude(spec, t) * (spec.k * x - spec.omega * t).sin()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemKind {
    /// Free streaming, `E ≡ 0`.
    Advection,
    /// Linearized Vlasov–Poisson about the equilibrium.
    Linear,
    /// Full Vlasov–Poisson, optionally with an external drive.
    Nonlinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioName {
    AdvectionMaxwellian,
    AdvectionLorentzian,
    LandauLinear,
    LandauNonlinear,
    TwoStream,
    KeenJ,
    KeenA,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 7] = [
        ScenarioName::AdvectionMaxwellian,
        ScenarioName::AdvectionLorentzian,
        ScenarioName::LandauLinear,
        ScenarioName::LandauNonlinear,
        ScenarioName::TwoStream,
        ScenarioName::KeenJ,
        ScenarioName::KeenA,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::AdvectionMaxwellian => "advection_maxwellian",
            ScenarioName::AdvectionLorentzian => "advection_lorentzian",
            ScenarioName::LandauLinear => "landau_linear",
            ScenarioName::LandauNonlinear => "landau_nonlinear",
            ScenarioName::TwoStream => "two_stream",
            ScenarioName::KeenJ => "keen_j",
            ScenarioName::KeenA => "keen_a",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ScenarioName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

/// A fully parameterized benchmark problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: ScenarioName,
    pub system: SystemKind,
    pub equilibrium: Equilibrium,
    /// Perturbation amplitude `A` of the initial condition.
    pub amplitude: f64,
    pub k: f64,
    pub length: f64,
    pub vc: f64,
    pub drive: Option<DriveSpec>,
}

impl Scenario {
    pub fn defaults(name: ScenarioName) -> Scenario {
        let base = |system, equilibrium, amplitude, vc| Scenario {
            name,
            system,
            equilibrium,
            amplitude,
            k: 0.5,
            length: 4.0 * PI,
            vc,
            drive: None,
        };
        match name {
            ScenarioName::AdvectionMaxwellian => {
                base(SystemKind::Advection, Equilibrium::Maxwellian, 1.0, 5.0)
            }
            ScenarioName::AdvectionLorentzian => {
                base(SystemKind::Advection, Equilibrium::Lorentzian, 1.0, 30.0)
            }
            ScenarioName::LandauLinear => base(SystemKind::Linear, Equilibrium::Maxwellian, 0.01, 5.0),
            ScenarioName::LandauNonlinear => {
                base(SystemKind::Nonlinear, Equilibrium::Maxwellian, 0.5, 6.0)
            }
            ScenarioName::TwoStream => base(SystemKind::Nonlinear, Equilibrium::TwoStream, 0.05, 6.0),
            ScenarioName::KeenJ | ScenarioName::KeenA => {
                let (kind, am) = if name == ScenarioName::KeenJ {
                    (DriveKind::J, 0.052)
                } else {
                    (DriveKind::A, 0.4)
                };
                let k = 0.26;
                Scenario {
                    name,
                    system: SystemKind::Nonlinear,
                    equilibrium: Equilibrium::Maxwellian,
                    amplitude: 0.0,
                    k,
                    length: 2.0 * PI / k,
                    vc: 8.0,
                    drive: Some(DriveSpec {
                        kind,
                        amplitude: am,
                        k,
                        omega: 0.37,
                    }),
                }
            }
        }
    }

    pub fn by_name(name: &str) -> Result<Scenario> {
        Ok(Scenario::defaults(name.parse()?))
    }

    /// Initial distribution `f(0, x, v)`.
    pub fn initial(&self, x: f64, v: f64) -> f64 {
        let feq = self.equilibrium.value(v);
        let c = (self.k * x).cos();
        match self.system {
            // the linear and advection unknowns are the perturbation itself
            SystemKind::Advection | SystemKind::Linear => self.amplitude * c * feq,
            SystemKind::Nonlinear => feq * (1.0 + self.amplitude * c),
        }
    }

    /// Checks parameter ranges; returns warnings for values that are legal
    /// but outside what the benchmarks were validated for.
    pub fn validate(&self) -> Result<Vec<String>> {
        if !(self.k > 0.0 && self.length > 0.0 && self.vc > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "scenario {}: k, length and vc must be positive",
                self.name
            )));
        }
        let mut warnings = Vec::new();
        let periods = self.length * self.k / (2.0 * PI);
        if (periods - periods.round()).abs() > 1e-9 {
            warnings.push(format!(
                "domain length {} is not a whole number of wavelengths of k = {}",
                self.length, self.k
            ));
        }
        if self.system == SystemKind::Nonlinear && self.amplitude.abs() >= 1.0 {
            warnings.push(format!(
                "amplitude {} makes the initial distribution negative",
                self.amplitude
            ));
        }
        Ok(warnings)
    }
}
