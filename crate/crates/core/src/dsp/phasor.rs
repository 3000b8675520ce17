use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::Channel;

/// Fundamental-frequency phasor: RMS magnitude and angle (rad) against the
/// shared rotating reference.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Phasor {
    pub rms: f64,
    pub angle: f64,
}

impl Phasor {
    pub const fn new(rms: f64, angle: f64) -> Self {
        Self { rms, angle }
    }

    /// From the in-phase/quadrature coefficients of `c·cos θ − s·sin θ`.
    pub fn from_components(c: f64, s: f64) -> Self {
        Self {
            rms: c.hypot(s) * FRAC_1_SQRT_2,
            angle: s.atan2(c),
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self {
            rms: z.norm(),
            angle: z.arg(),
        }
    }

    /// RMS complex value.
    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(self.rms, self.angle)
    }
}

/// Phasor estimates for all eight channels at one sample instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasorSet {
    pub phasors: [Phasor; 8],
    pub frequency_hz: f64,
    pub sample_index: u64,
}

impl Default for PhasorSet {
    fn default() -> Self {
        Self {
            phasors: [Phasor::default(); 8],
            frequency_hz: 60.0,
            sample_index: 0,
        }
    }
}

impl PhasorSet {
    pub fn from_complex(values: [Complex64; 8], frequency_hz: f64) -> Self {
        Self {
            phasors: values.map(Phasor::from_complex),
            frequency_hz,
            sample_index: 0,
        }
    }

    pub fn complex(&self, ch: Channel) -> Complex64 {
        self[ch].to_complex()
    }

    pub fn magnitude(&self, ch: Channel) -> f64 {
        self[ch].rms
    }

    /// Largest phase-current RMS value and the phase carrying it.
    pub fn max_phase_current(&self) -> (Channel, f64) {
        Channel::PHASE_CURRENTS
            .into_iter()
            .map(|ch| (ch, self[ch].rms))
            .fold((Channel::IA, f64::NEG_INFINITY), |best, x| if x.1 > best.1 { x } else { best })
    }

    /// Multiplies every magnitude by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for p in out.phasors.iter_mut() {
            p.rms *= factor;
        }
        out
    }
}

impl Index<Channel> for PhasorSet {
    type Output = Phasor;

    fn index(&self, ch: Channel) -> &Phasor {
        &self.phasors[ch.index()]
    }
}

impl IndexMut<Channel> for PhasorSet {
    fn index_mut(&mut self, ch: Channel) -> &mut Phasor {
        &mut self.phasors[ch.index()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    #[test]
    fn component_conversion() {
        let p = Phasor::from_components(1.0, 0.0);
        assert!((p.rms - 1.0 / SQRT_2).abs() < 1e-15 && p.angle == 0.0);
        let p = Phasor::from_components(0.0, 1.0);
        assert!((p.rms - 1.0 / SQRT_2).abs() < 1e-15 && (p.angle - FRAC_PI_2).abs() < 1e-15);
        let p = Phasor::from_components(3.0, 4.0);
        assert!((p.rms - 5.0 / SQRT_2).abs() < 1e-14);
        assert!((p.angle - 4f64.atan2(3.0)).abs() < 1e-15);
    }

    #[test]
    fn complex_round_trip() {
        let z = Complex64::new(-3.0, 2.0);
        let back = Phasor::from_complex(z).to_complex();
        assert!((back - z).norm() < 1e-14);
    }
}
