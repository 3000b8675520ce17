use super::settings::VoltageSettings;
use super::timer::DefiniteTimer;
use super::FunctionOutput;
use crate::dsp::PhasorSet;
use crate::Channel;

/// Below this fraction of nominal a phase is treated as de-energised and
/// cannot pick up the undervoltage element.
pub const DEAD_LINE_PU: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sense {
    Over,
    Under,
}

#[derive(Debug, Clone)]
pub struct VoltageElement {
    sense: Sense,
    timer: DefiniteTimer,
}

impl VoltageElement {
    pub fn overvoltage() -> Self {
        Self {
            sense: Sense::Over,
            timer: DefiniteTimer::new(),
        }
    }

    pub fn undervoltage() -> Self {
        Self {
            sense: Sense::Under,
            timer: DefiniteTimer::new(),
        }
    }

    pub fn step(&mut self, s: &VoltageSettings, phasors: &PhasorSet, dt: f64) -> FunctionOutput {
        if !s.enabled {
            self.timer.reset();
            return FunctionOutput::default();
        }
        let threshold = s.pickup_pu * s.nominal_v;
        let dead = DEAD_LINE_PU * s.nominal_v;
        let pickup = Channel::PHASE_VOLTAGES.into_iter().any(|ch| {
            let v = phasors.magnitude(ch);
            match self.sense {
                Sense::Over => v > threshold,
                Sense::Under => v < threshold && v > dead,
            }
        });
        let trip = self.timer.step(pickup, s.delay_s, dt);
        FunctionOutput {
            pickup,
            trip,
            timer_elapsed_s: self.timer.elapsed_s(),
            loop_id: None,
        }
    }

    pub fn reset(&mut self) {
        self.timer.reset();
    }
}
