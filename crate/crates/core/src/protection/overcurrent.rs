use super::settings::{PiocSettings, PtocSettings};
use super::timer::DefiniteTimer;
use super::FunctionOutput;
use crate::dsp::PhasorSet;

/// Instantaneous / definite-time overcurrent.
#[derive(Debug, Clone, Default)]
pub struct Pioc {
    timer: DefiniteTimer,
}

impl Pioc {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn step(&mut self, s: &PiocSettings, phasors: &PhasorSet, dt: f64) -> FunctionOutput {
        if !s.enabled {
            self.timer.reset();
            return FunctionOutput::default();
        }
        let (_, imax) = phasors.max_phase_current();
        let pickup = imax > s.pickup_a;
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

/// Inverse-time overcurrent. While picked up the element integrates
/// `dt / t(M)` and trips once the integral reaches one, so a current that
/// rises mid-fault shortens the remaining time. Dropout clears the
/// integral at once.
#[derive(Debug, Clone, Default)]
pub struct Ptoc {
    accumulator: f64,
    elapsed_s: f64,
}

impl Ptoc {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn step(&mut self, s: &PtocSettings, phasors: &PhasorSet, dt: f64) -> FunctionOutput {
        if !s.enabled {
            self.reset();
            return FunctionOutput::default();
        }
        let (_, imax) = phasors.max_phase_current();
        let pickup = imax > s.pickup_a;
        if !pickup {
            self.reset();
            return FunctionOutput::default();
        }
        let m = imax / s.pickup_a;
        if let Some(t) = s.curve_id.operate_time(m, s.time_dial) {
            self.accumulator += dt / t;
        }
        self.elapsed_s += dt;
        FunctionOutput {
            pickup,
            trip: self.accumulator >= 1.0 - 1e-12,
            timer_elapsed_s: self.elapsed_s,
            loop_id: None,
        }
    }

    /// Fraction of the operate integral completed.
    pub fn progress(&self) -> f64 {
        self.accumulator
    }

    pub fn reset(&mut self) {
        self.accumulator = 0.0;
        self.elapsed_s = 0.0;
    }
}
