//! Protection functions operating on [`PhasorSet`]s.
//!
//! Each element is a small state machine advanced by `dt`; nothing reads a
//! wall clock, so identical phasor streams give identical outputs.

mod curves;
mod directional;
mod distance;
mod overcurrent;
mod settings;
mod timer;
mod voltage;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dsp::PhasorSet;

pub use curves::{u1_operate_time, Curve};
pub use directional::{direction_of, polarised_pairs, torque_angle_deg, Direction, Pdir};
pub use distance::{apparent_impedances, zone_contains, LoopId, Pdis};
pub use overcurrent::{Pioc, Ptoc};
pub use settings::{
    Characteristic, FunctionSettings, PdirSettings, PdisSettings, PiocSettings, PtocSettings, QuadSettings,
    RatedValues, SettingsError, VoltageSettings,
};
pub use timer::DefiniteTimer;
pub use voltage::{VoltageElement, DEAD_LINE_PU};

/// Loop currents below this fraction of rated current are not measured.
pub const CURRENT_FLOOR_PU: f64 = 0.05;
/// Polarising voltages below this fraction of rated voltage give no direction.
pub const VOLTAGE_FLOOR_PU: f64 = 0.01;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FunctionOutput {
    pub pickup: bool,
    pub trip: bool,
    pub timer_elapsed_s: f64,
    pub loop_id: Option<LoopId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FunctionId {
    Pioc,
    Ptoc,
    Pdis,
    Pdir,
    Ptov,
    Ptuv,
}

impl FunctionId {
    pub const ALL: [FunctionId; 6] = [
        FunctionId::Pioc,
        FunctionId::Ptoc,
        FunctionId::Pdis,
        FunctionId::Pdir,
        FunctionId::Ptov,
        FunctionId::Ptuv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FunctionId::Pioc => "PIOC",
            FunctionId::Ptoc => "PTOC",
            FunctionId::Pdis => "PDIS",
            FunctionId::Pdir => "PDIR",
            FunctionId::Ptov => "PTOV",
            FunctionId::Ptuv => "PTUV",
        }
    }
}

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FunctionId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FunctionId::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown function {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutput {
    pub pioc: FunctionOutput,
    pub ptoc: FunctionOutput,
    pub pdis: FunctionOutput,
    pub pdir: FunctionOutput,
    pub ptov: FunctionOutput,
    pub ptuv: FunctionOutput,
}

impl SuiteOutput {
    pub fn get(&self, f: FunctionId) -> &FunctionOutput {
        match f {
            FunctionId::Pioc => &self.pioc,
            FunctionId::Ptoc => &self.ptoc,
            FunctionId::Pdis => &self.pdis,
            FunctionId::Pdir => &self.pdir,
            FunctionId::Ptov => &self.ptov,
            FunctionId::Ptuv => &self.ptuv,
        }
    }

    pub fn any_trip(&self) -> bool {
        FunctionId::ALL.into_iter().any(|f| self.get(f).trip)
    }

    /// The 13-entry GOOSE dataset: overall trip, then pickup/trip per
    /// function in [`FunctionId::ALL`] order.
    pub fn dataset(&self) -> Vec<bool> {
        let mut v = Vec::with_capacity(13);
        v.push(self.any_trip());
        for f in FunctionId::ALL {
            let o = self.get(f);
            v.push(o.pickup);
            v.push(o.trip);
        }
        v
    }

    pub fn dataset_names() -> Vec<String> {
        let mut v = vec!["TRIP".to_string()];
        for f in FunctionId::ALL {
            v.push(format!("{f}.pickup"));
            v.push(format!("{f}.trip"));
        }
        v
    }
}

/// All six elements together.
#[derive(Debug, Clone)]
pub struct ProtectionSuite {
    pioc: Pioc,
    ptoc: Ptoc,
    pdis: Pdis,
    pdir: Pdir,
    ptov: VoltageElement,
    ptuv: VoltageElement,
}

impl Default for ProtectionSuite {
    fn default() -> Self {
        Self::new()
    }
}

impl ProtectionSuite {
    pub fn new() -> Self {
        Self {
            pioc: Pioc::new(),
            ptoc: Ptoc::new(),
            pdis: Pdis::new(),
            pdir: Pdir::new(),
            ptov: VoltageElement::overvoltage(),
            ptuv: VoltageElement::undervoltage(),
        }
    }

    pub fn step(&mut self, s: &FunctionSettings, phasors: &PhasorSet, dt: f64) -> SuiteOutput {
        let i_floor = CURRENT_FLOOR_PU * s.rated.current_a;
        let v_floor = VOLTAGE_FLOOR_PU * s.rated.voltage_v;
        SuiteOutput {
            pioc: self.pioc.step(&s.pioc, phasors, dt),
            ptoc: self.ptoc.step(&s.ptoc, phasors, dt),
            pdis: self.pdis.step(&s.pdis, phasors, i_floor, dt),
            pdir: self.pdir.step(&s.pdir, phasors, v_floor, dt),
            ptov: self.ptov.step(&s.ptov, phasors, dt),
            ptuv: self.ptuv.step(&s.ptuv, phasors, dt),
        }
    }

    pub fn pdis(&self) -> &Pdis {
        &self.pdis
    }

    pub fn reset(&mut self) {
        self.pioc.reset();
        self.ptoc.reset();
        self.pdis.reset();
        self.pdir.reset();
        self.ptov.reset();
        self.ptuv.reset();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_layout() {
        let names = SuiteOutput::dataset_names();
        assert_eq!(names.len(), 13);
        assert_eq!(names[0], "TRIP");
        assert_eq!(names[12], "PTUV.trip");
        let mut o = SuiteOutput::default();
        o.pdis.trip = true;
        let d = o.dataset();
        assert!(d[0] && d[6]);
        assert_eq!(d.iter().filter(|b| **b).count(), 2);
    }

    #[test]
    fn function_names_parse() {
        for f in FunctionId::ALL {
            assert_eq!(f.name().parse::<FunctionId>().unwrap(), f);
        }
    }
}
