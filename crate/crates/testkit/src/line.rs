//! Two-source transmission line used by the fault solver.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::Error;

/// Thevenin source behind one line terminal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Source {
    /// Line-to-line EMF magnitude.
    #[serde(rename = "emf_kV")]
    pub emf_kv: f64,
    pub angle_deg: f64,
    pub z1_ohm: Complex64,
    pub z0_ohm: Complex64,
}

impl Source {
    /// Phase-A EMF as a phase-to-neutral RMS phasor in volts.
    pub fn emf(&self) -> Complex64 {
        Complex64::from_polar(self.emf_kv * 1e3 / 3f64.sqrt(), self.angle_deg.to_radians())
    }
}

/// Single π-section line between sending end S (where the relay sits) and
/// receiving end R. Shunt capacitance is not modelled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LineModel {
    #[serde(rename = "nominal_kV")]
    pub nominal_kv: f64,
    pub length_km: f64,
    pub z1_ohm_per_km: Complex64,
    pub z0_ohm_per_km: Complex64,
    pub source_s: Source,
    pub source_r: Source,
    pub frequency_hz: f64,
}

impl Default for LineModel {
    fn default() -> Self {
        let source = |angle_deg| Source {
            emf_kv: 500.0,
            angle_deg,
            z1_ohm: Complex64::new(0.0, 30.0),
            z0_ohm: Complex64::new(0.0, 60.0),
        };
        Self {
            nominal_kv: 500.0,
            length_km: 100.0,
            z1_ohm_per_km: Complex64::new(0.028, 0.325),
            z0_ohm_per_km: Complex64::new(0.30, 1.00),
            source_s: source(10.0),
            source_r: source(0.0),
            frequency_hz: 60.0,
        }
    }
}

impl LineModel {
    pub fn from_toml_str(s: &str) -> Result<Self, Error> {
        let line: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        line.validate()?;
        Ok(line)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), Error> {
        let bad = |what: &str| Err(Error::Config(format!("line model: {what}")));
        if !(self.length_km > 0.0 && self.length_km.is_finite()) {
            return bad("length_km must be positive");
        }
        if !(self.nominal_kv > 0.0 && self.frequency_hz > 0.0) {
            return bad("nominal_kV and frequency_hz must be positive");
        }
        let impedances = [
            self.z1_ohm_per_km,
            self.z0_ohm_per_km,
            self.source_s.z1_ohm,
            self.source_s.z0_ohm,
            self.source_r.z1_ohm,
            self.source_r.z0_ohm,
        ];
        if impedances.iter().any(|z| !(z.re >= 0.0) || !z.im.is_finite()) {
            return bad("impedances need a finite, non-negative real part");
        }
        Ok(())
    }

    /// Whole-line positive-sequence impedance.
    pub fn z1(&self) -> Complex64 {
        self.z1_ohm_per_km * self.length_km
    }

    /// Whole-line zero-sequence impedance.
    pub fn z0(&self) -> Complex64 {
        self.z0_ohm_per_km * self.length_km
    }

    /// Nominal phase-to-neutral RMS voltage in volts.
    pub fn nominal_phase_v(&self) -> f64 {
        self.nominal_kv * 1e3 / 3f64.sqrt()
    }

    pub fn omega(&self) -> f64 {
        std::f64::consts::TAU * self.frequency_hz
    }
}
