//! Fault scenarios and the campaign matrix.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FaultType {
    AG,
    BC,
    BCG,
    ABC,
}

impl FaultType {
    pub const ALL: [FaultType; 4] = [FaultType::AG, FaultType::BC, FaultType::BCG, FaultType::ABC];

    pub fn name(self) -> &'static str {
        match self {
            FaultType::AG => "AG",
            FaultType::BC => "BC",
            FaultType::BCG => "BCG",
            FaultType::ABC => "ABC",
        }
    }
}

impl fmt::Display for FaultType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FaultType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        FaultType::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown fault type {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaultScenario {
    pub fault_type: FaultType,
    /// Fault position as a fraction of line length from the relay end.
    pub location_fraction: f64,
    pub resistance_ohm: f64,
    pub inception_angle_deg: f64,
    /// How long the fault is applied after inception.
    pub duration_s: f64,
}

impl FaultScenario {
    pub fn new(fault_type: FaultType, resistance_ohm: f64, inception_angle_deg: f64) -> Self {
        Self {
            fault_type,
            location_fraction: 0.5,
            resistance_ohm,
            inception_angle_deg,
            duration_s: DEFAULT_DURATION_S,
        }
    }

    /// Identifier such as `AG-R15-A45`.
    pub fn id(&self) -> String {
        format!("{}-R{}-A{}", self.fault_type, self.resistance_ohm, self.inception_angle_deg)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.location_fraction > 0.0 && self.location_fraction < 1.0) {
            return Err(Error::Config(format!("{}: location must be inside (0, 1)", self.id())));
        }
        if !(self.resistance_ohm >= 0.0) {
            return Err(Error::Config(format!("{}: negative fault resistance", self.id())));
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(Error::Config(format!("{}: duration must be positive", self.id())));
        }
        Ok(())
    }
}

impl FromStr for FaultScenario {
    type Err = Error;

    /// Parses an id produced by [`FaultScenario::id`].
    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Config(format!("bad scenario id {s:?}, expected e.g. AG-R15-A45"));
        let mut parts = s.split('-');
        let (Some(t), Some(r), Some(a), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
            return Err(bad());
        };
        let r = r.strip_prefix('R').and_then(|r| r.parse().ok()).ok_or_else(bad)?;
        let a = a.strip_prefix('A').and_then(|a| a.parse().ok()).ok_or_else(bad)?;
        let sc = FaultScenario::new(t.parse()?, r, a);
        sc.validate()?;
        Ok(sc)
    }
}

pub const DEFAULT_DURATION_S: f64 = 1.0;

/// Cartesian product of fault types, resistances and inception angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioMatrix {
    pub fault_types: Vec<FaultType>,
    pub resistances_ohm: Vec<f64>,
    pub inception_angles_deg: Vec<f64>,
    pub location_fraction: f64,
    pub duration_s: f64,
}

impl Default for ScenarioMatrix {
    fn default() -> Self {
        Self {
            fault_types: FaultType::ALL.to_vec(),
            resistances_ohm: vec![0.0, 15.0, 30.0, 50.0],
            inception_angles_deg: vec![0.0, 45.0, 90.0],
            location_fraction: 0.5,
            duration_s: DEFAULT_DURATION_S,
        }
    }
}

impl ScenarioMatrix {
    pub fn from_toml_str(s: &str) -> Result<Self, Error> {
        let m: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        m.scenarios()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Scenarios ordered by type, then resistance, then angle.
    pub fn scenarios(&self) -> Result<Vec<FaultScenario>, Error> {
        let mut out = Vec::new();
        for &fault_type in &self.fault_types {
            for &resistance_ohm in &self.resistances_ohm {
                for &inception_angle_deg in &self.inception_angles_deg {
                    let sc = FaultScenario {
                        fault_type,
                        location_fraction: self.location_fraction,
                        resistance_ohm,
                        inception_angle_deg,
                        duration_s: self.duration_s,
                    };
                    sc.validate()?;
                    out.push(sc);
                }
            }
        }
        Ok(out)
    }
}
