use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::curves::Curve;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid setting {field}: {reason}")]
pub struct SettingsError {
    pub field: String,
    pub reason: String,
}

fn err(field: &str, reason: impl Into<String>) -> SettingsError {
    SettingsError {
        field: field.to_string(),
        reason: reason.into(),
    }
}

fn positive(field: &str, v: f64) -> Result<(), SettingsError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(err(field, format!("must be > 0, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<(), SettingsError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(err(field, format!("must be >= 0, got {v}")))
    }
}

/// Rated secondary-free quantities used for measurement floors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatedValues {
    /// Phase-to-ground RMS voltage (V).
    #[serde(rename = "voltage_V")]
    pub voltage_v: f64,
    /// Phase RMS current (A).
    #[serde(rename = "current_A")]
    pub current_a: f64,
}

impl Default for RatedValues {
    fn default() -> Self {
        Self {
            voltage_v: 500_000.0 / 3f64.sqrt(),
            current_a: 1000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiocSettings {
    pub enabled: bool,
    #[serde(rename = "pickup_A")]
    pub pickup_a: f64,
    pub delay_s: f64,
}

impl Default for PiocSettings {
    fn default() -> Self {
        Self {
            enabled: true,
            pickup_a: 2500.0,
            delay_s: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PtocSettings {
    pub enabled: bool,
    #[serde(rename = "pickup_A")]
    pub pickup_a: f64,
    pub curve_id: Curve,
    pub time_dial: f64,
}

impl Default for PtocSettings {
    fn default() -> Self {
        Self {
            enabled: true,
            pickup_a: 1300.0,
            curve_id: Curve::U1,
            time_dial: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Characteristic {
    Impedance,
    Mho,
    Reactance,
    Quadrilateral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadSettings {
    pub r_reach_ohm: f64,
    pub x_reach_ohm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdisSettings {
    pub enabled: bool,
    pub reach_fraction: f64,
    /// Positive-sequence impedance of the protected line, primary ohms.
    pub line_impedance_ohm: Complex64,
    pub characteristic: Characteristic,
    /// Zero-sequence compensation factor `(Z0L − Z1L) / (3·Z1L)`.
    pub k0: Complex64,
    pub delay_s: f64,
    pub quad: QuadSettings,
}

impl Default for PdisSettings {
    fn default() -> Self {
        let z1 = Complex64::new(0.028, 0.325) * 100.0;
        let z0 = Complex64::new(0.30, 1.00) * 100.0;
        Self {
            enabled: true,
            reach_fraction: 1.0,
            line_impedance_ohm: z1,
            characteristic: Characteristic::Mho,
            k0: PdisSettings::k0_from_line(z1, z0),
            delay_s: 0.0,
            quad: QuadSettings {
                r_reach_ohm: 30.0,
                x_reach_ohm: z1.im,
            },
        }
    }
}

impl PdisSettings {
    pub fn k0_from_line(z1: Complex64, z0: Complex64) -> Complex64 {
        (z0 - z1) / (3.0 * z1)
    }

    /// Reach impedance `reach_fraction · Z_line`.
    pub fn reach(&self) -> Complex64 {
        self.line_impedance_ohm * self.reach_fraction
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdirSettings {
    pub enabled: bool,
    #[serde(rename = "pickup_A")]
    pub pickup_a: f64,
    pub rca_deg: f64,
    pub delay_s: f64,
}

impl Default for PdirSettings {
    fn default() -> Self {
        Self {
            enabled: false,
            pickup_a: 2500.0,
            rca_deg: 30.0,
            delay_s: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoltageSettings {
    pub enabled: bool,
    pub pickup_pu: f64,
    /// Nominal phase-to-ground RMS voltage (V).
    #[serde(rename = "nominal_V")]
    pub nominal_v: f64,
    pub delay_s: f64,
}

impl VoltageSettings {
    fn defaults(enabled: bool, pickup_pu: f64) -> Self {
        Self {
            enabled,
            pickup_pu,
            nominal_v: 500_000.0 / 3f64.sqrt(),
            delay_s: 0.1,
        }
    }
}

/// Complete protection parameter set. The defaults reproduce the
/// evaluation parameterisation: PIOC 2500 A instantaneous, PTOC 1300 A on
/// U1 with time dial 1, PDIS mho at 100 % of the line with no delay and
/// PTUV at 0.9 pu after 0.1 s. PDIR and PTOV ship disabled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSettings {
    pub rated: RatedValues,
    pub pioc: PiocSettings,
    pub ptoc: PtocSettings,
    pub pdis: PdisSettings,
    pub pdir: PdirSettings,
    pub ptov: VoltageSettings,
    pub ptuv: VoltageSettings,
}

impl Default for FunctionSettings {
    fn default() -> Self {
        Self {
            rated: RatedValues::default(),
            pioc: PiocSettings::default(),
            ptoc: PtocSettings::default(),
            pdis: PdisSettings::default(),
            pdir: PdirSettings::default(),
            ptov: VoltageSettings::defaults(false, 1.1),
            ptuv: VoltageSettings::defaults(true, 0.9),
        }
    }
}

impl FunctionSettings {
    pub fn validate(&self) -> Result<(), SettingsError> {
        positive("rated.voltage_V", self.rated.voltage_v)?;
        positive("rated.current_A", self.rated.current_a)?;
        positive("pioc.pickup_A", self.pioc.pickup_a)?;
        non_negative("pioc.delay_s", self.pioc.delay_s)?;
        positive("ptoc.pickup_A", self.ptoc.pickup_a)?;
        positive("ptoc.time_dial", self.ptoc.time_dial)?;
        let reach = self.pdis.reach_fraction;
        if !(reach.is_finite() && reach > 0.0 && reach <= 2.0) {
            return Err(err("pdis.reach_fraction", format!("must be in (0, 2], got {reach}")));
        }
        let zl = self.pdis.line_impedance_ohm;
        if !(zl.re.is_finite() && zl.im.is_finite() && zl.re >= 0.0 && zl.norm() > 0.0) {
            return Err(err("pdis.line_impedance_ohm", "must be finite, non-zero, with Re >= 0"));
        }
        if !(self.pdis.k0.re.is_finite() && self.pdis.k0.im.is_finite()) {
            return Err(err("pdis.k0", "must be finite"));
        }
        non_negative("pdis.delay_s", self.pdis.delay_s)?;
        positive("pdis.quad.r_reach_ohm", self.pdis.quad.r_reach_ohm)?;
        positive("pdis.quad.x_reach_ohm", self.pdis.quad.x_reach_ohm)?;
        positive("pdir.pickup_A", self.pdir.pickup_a)?;
        if !self.pdir.rca_deg.is_finite() {
            return Err(err("pdir.rca_deg", "must be finite"));
        }
        non_negative("pdir.delay_s", self.pdir.delay_s)?;
        for (name, v) in [("ptov", &self.ptov), ("ptuv", &self.ptuv)] {
            positive(&format!("{name}.pickup_pu"), v.pickup_pu)?;
            positive(&format!("{name}.nominal_V"), v.nominal_v)?;
            non_negative(&format!("{name}.delay_s"), v.delay_s)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        FunctionSettings::default().validate().unwrap();
    }

    #[test]
    fn negative_pickup_rejected() {
        let mut s = FunctionSettings::default();
        s.pioc.pickup_a = -5.0;
        assert_eq!(s.validate().unwrap_err().field, "pioc.pickup_A");
    }

    #[test]
    fn reach_bounds() {
        let mut s = FunctionSettings::default();
        s.pdis.reach_fraction = 2.0;
        s.validate().unwrap();
        s.pdis.reach_fraction = 2.01;
        assert!(s.validate().is_err());
        s.pdis.reach_fraction = 0.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn zero_time_dial_rejected() {
        let mut s = FunctionSettings::default();
        s.ptoc.time_dial = 0.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn default_reach_matches_line() {
        let zr = PdisSettings::default().reach();
        assert!((zr.norm() - 32.62).abs() < 0.01);
        assert!((zr.arg().to_degrees() - 85.08).abs() < 0.01);
    }

    #[test]
    fn json_uses_unit_suffixed_names() {
        let json = serde_json::to_value(FunctionSettings::default()).unwrap();
        assert_eq!(json["pioc"]["pickup_A"], 2500.0);
        assert_eq!(json["ptuv"]["nominal_V"], 500_000.0 / 3f64.sqrt());
        let back: FunctionSettings = serde_json::from_value(json).unwrap();
        assert_eq!(back, FunctionSettings::default());
    }
}
