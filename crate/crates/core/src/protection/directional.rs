use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::distance::LoopId;
use super::settings::PdirSettings;
use super::timer::DefiniteTimer;
use super::FunctionOutput;
use crate::dsp::PhasorSet;
use crate::Channel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Reverse,
    Undetermined,
}

fn wrap_deg(a: f64) -> f64 {
    let r = (a + 180.0).rem_euclid(360.0) - 180.0;
    if r == -180.0 {
        180.0
    } else {
        r
    }
}

/// Torque angle `angle(I) − angle(j·Vpol) + rca`, wrapped to (−180°, 180°].
pub fn torque_angle_deg(current: Complex64, v_pol: Complex64, rca_deg: f64) -> f64 {
    let pol = v_pol * Complex64::i();
    wrap_deg(current.arg().to_degrees() - pol.arg().to_degrees() + rca_deg)
}

/// Quadrature-polarised direction decision. `v_pol` is the line voltage
/// opposite the faulted phase (VBC for phase A).
///
/// ```
/// use num_complex::Complex64;
/// use vied_core::protection::{direction_of, Direction};
/// let vbc = Complex64::from_polar(3f64.sqrt(), (-90f64).to_radians());
/// let ia = Complex64::from_polar(1.0, (-85f64).to_radians());
/// assert_eq!(direction_of(ia, vbc, 30.0, 0.01), Direction::Forward);
/// ```
pub fn direction_of(current: Complex64, v_pol: Complex64, rca_deg: f64, v_floor: f64) -> Direction {
    if !(v_pol.norm() >= v_floor) || v_pol.norm() == 0.0 {
        return Direction::Undetermined;
    }
    let theta = torque_angle_deg(current, v_pol, rca_deg);
    if theta > -90.0 && theta < 90.0 {
        Direction::Forward
    } else {
        Direction::Reverse
    }
}

/// Per-phase current and its quadrature polarising voltage.
pub fn polarised_pairs(phasors: &PhasorSet) -> [(Channel, Complex64, Complex64); 3] {
    let va = phasors.complex(Channel::VA);
    let vb = phasors.complex(Channel::VB);
    let vc = phasors.complex(Channel::VC);
    [
        (Channel::IA, phasors.complex(Channel::IA), vb - vc),
        (Channel::IB, phasors.complex(Channel::IB), vc - va),
        (Channel::IC, phasors.complex(Channel::IC), va - vb),
    ]
}

/// Directional overcurrent: a phase picks up when its current exceeds the
/// pickup and its direction is forward. `loop_id` names the phase through
/// the matching ground loop.
#[derive(Debug, Clone, Default)]
pub struct Pdir {
    timer: DefiniteTimer,
}

impl Pdir {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn step(&mut self, s: &PdirSettings, phasors: &PhasorSet, v_floor: f64, dt: f64) -> FunctionOutput {
        if !s.enabled {
            self.timer.reset();
            return FunctionOutput::default();
        }
        let loops = [LoopId::AG, LoopId::BG, LoopId::CG];
        let loop_id = polarised_pairs(phasors)
            .into_iter()
            .zip(loops)
            .find(|((_, i, v), _)| {
                i.norm() > s.pickup_a && direction_of(*i, *v, s.rca_deg, v_floor) == Direction::Forward
            })
            .map(|(_, l)| l);
        let pickup = loop_id.is_some();
        let trip = self.timer.step(pickup, s.delay_s, dt);
        FunctionOutput {
            pickup,
            trip,
            timer_elapsed_s: self.timer.elapsed_s(),
            loop_id,
        }
    }

    pub fn reset(&mut self) {
        self.timer.reset();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::Phasor;

    fn deg(rms: f64, a: f64) -> Complex64 {
        Complex64::from_polar(rms, a.to_radians())
    }

    #[test]
    fn forward_and_reverse_examples() {
        let vbc = deg(3f64.sqrt(), -90.0);
        assert!((torque_angle_deg(deg(1.0, -85.0), vbc, 30.0) + 55.0).abs() < 1e-9);
        assert!((torque_angle_deg(deg(1.0, 95.0), vbc, 30.0) - 125.0).abs() < 1e-9);
        assert_eq!(direction_of(deg(1.0, 95.0), vbc, 30.0, 0.01), Direction::Reverse);
    }

    #[test]
    fn no_polarisation_is_undetermined() {
        assert_eq!(
            direction_of(deg(1.0, 0.0), Complex64::new(0.0, 0.0), 30.0, 0.0),
            Direction::Undetermined
        );
    }

    #[test]
    fn boundary_is_reverse() {
        // theta exactly 90 degrees
        let vpol = deg(1.0, -90.0);
        assert_eq!(direction_of(deg(1.0, 60.0), vpol, 30.0, 0.01), Direction::Reverse);
    }

    fn balanced(i_rms: f64, i_angle: f64) -> PhasorSet {
        let mut p = PhasorSet::default();
        let chans = [(Channel::VA, Channel::IA), (Channel::VB, Channel::IB), (Channel::VC, Channel::IC)];
        for (k, (v, i)) in chans.into_iter().enumerate() {
            let shift = -120.0 * k as f64;
            p[v] = Phasor::new(288_675.0, shift.to_radians());
            p[i] = Phasor::new(i_rms, (shift + i_angle).to_radians());
        }
        p
    }

    #[test]
    fn and_gate() {
        let s = PdirSettings {
            enabled: true,
            ..PdirSettings::default()
        };
        let dt = 1.0 / 4800.0;
        let fwd = Pdir::new().step(&s, &balanced(3000.0, -80.0), 2886.75, dt);
        assert!(fwd.pickup && fwd.trip);
        assert_eq!(fwd.loop_id, Some(LoopId::AG));
        let rev = Pdir::new().step(&s, &balanced(3000.0, 100.0), 2886.75, dt);
        assert!(!rev.pickup);
        let low = Pdir::new().step(&s, &balanced(2000.0, -80.0), 2886.75, dt);
        assert!(!low.pickup);
    }
}
