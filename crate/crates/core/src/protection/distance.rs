use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::settings::{Characteristic, PdisSettings};
use super::timer::DefiniteTimer;
use super::FunctionOutput;
use crate::dsp::PhasorSet;
use crate::Channel;

/// Measuring loop, in the fixed evaluation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LoopId {
    AG,
    BG,
    CG,
    AB,
    BC,
    CA,
}

impl LoopId {
    pub const ALL: [LoopId; 6] = [LoopId::AG, LoopId::BG, LoopId::CG, LoopId::AB, LoopId::BC, LoopId::CA];

    pub fn name(self) -> &'static str {
        match self {
            LoopId::AG => "AG",
            LoopId::BG => "BG",
            LoopId::CG => "CG",
            LoopId::AB => "AB",
            LoopId::BC => "BC",
            LoopId::CA => "CA",
        }
    }
}

impl fmt::Display for LoopId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Apparent impedance of each loop, in [`LoopId::ALL`] order. A loop whose
/// current denominator is below `current_floor_a` is `None`.
///
/// Ground loops use `V / (I + k0·3I0)`, phase loops `(Vx − Vy)/(Ix − Iy)`.
pub fn apparent_impedances(
    phasors: &PhasorSet,
    k0: Complex64,
    current_floor_a: f64,
) -> [Option<Complex64>; 6] {
    let v = [Channel::VA, Channel::VB, Channel::VC].map(|c| phasors.complex(c));
    let i = [Channel::IA, Channel::IB, Channel::IC].map(|c| phasors.complex(c));
    let i3 = i[0] + i[1] + i[2];
    let ratio = |num: Complex64, den: Complex64| {
        if den.norm() < current_floor_a {
            None
        } else {
            Some(num / den)
        }
    };
    [
        ratio(v[0], i[0] + k0 * i3),
        ratio(v[1], i[1] + k0 * i3),
        ratio(v[2], i[2] + k0 * i3),
        ratio(v[0] - v[1], i[0] - i[1]),
        ratio(v[1] - v[2], i[1] - i[2]),
        ratio(v[2] - v[0], i[2] - i[0]),
    ]
}

/// Angular window of the quadrilateral's directional line, degrees.
const QUAD_DIR_MIN_DEG: f64 = -15.0;
const QUAD_DIR_MAX_DEG: f64 = 115.0;

/// Zone membership with closed boundaries.
pub fn zone_contains(settings: &PdisSettings, z: Complex64) -> bool {
    let zr = settings.reach();
    match settings.characteristic {
        Characteristic::Impedance => z.norm() <= zr.norm(),
        Characteristic::Mho => (z - zr / 2.0).norm() <= (zr / 2.0).norm(),
        Characteristic::Reactance => z.im <= zr.im,
        Characteristic::Quadrilateral => {
            let q = &settings.quad;
            let in_box = z.im >= 0.0
                && z.im <= q.x_reach_ohm
                && z.re >= -q.r_reach_ohm / 8.0
                && z.re <= q.r_reach_ohm;
            let forward = z == Complex64::new(0.0, 0.0) || {
                let a = z.arg().to_degrees();
                (QUAD_DIR_MIN_DEG..=QUAD_DIR_MAX_DEG).contains(&a)
            };
            in_box && forward
        }
    }
}

/// Six-loop distance element.
#[derive(Debug, Clone, Default)]
pub struct Pdis {
    timer: DefiniteTimer,
    impedances: [Option<Complex64>; 6],
}

impl Pdis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn step(
        &mut self,
        s: &PdisSettings,
        phasors: &PhasorSet,
        current_floor_a: f64,
        dt: f64,
    ) -> FunctionOutput {
        if !s.enabled {
            self.timer.reset();
            return FunctionOutput::default();
        }
        self.impedances = apparent_impedances(phasors, s.k0, current_floor_a);
        let loop_id = LoopId::ALL
            .into_iter()
            .zip(self.impedances)
            .find(|(_, z)| z.is_some_and(|z| zone_contains(s, z)))
            .map(|(id, _)| id);
        let pickup = loop_id.is_some();
        let trip = self.timer.step(pickup, s.delay_s, dt);
        FunctionOutput {
            pickup,
            trip,
            timer_elapsed_s: self.timer.elapsed_s(),
            loop_id,
        }
    }

    /// Loop impedances from the last step.
    pub fn impedances(&self) -> &[Option<Complex64>; 6] {
        &self.impedances
    }

    pub fn reset(&mut self) {
        self.timer.reset();
    }
}
