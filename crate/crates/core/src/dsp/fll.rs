use std::f64::consts::{SQRT_2, TAU};

use serde::{Deserialize, Serialize};

use super::DspFault;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FllSettings {
    /// SOGI damping gain.
    pub k: f64,
    /// FLL adaptation gain (1/s).
    pub gamma: f64,
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    /// Floor of the amplitude normalisation, as a fraction of nominal peak squared.
    pub floor_ratio: f64,
}

impl Default for FllSettings {
    fn default() -> Self {
        Self {
            k: SQRT_2,
            gamma: 50.0,
            f_min_hz: 40.0,
            f_max_hz: 70.0,
            floor_ratio: 1e-6,
        }
    }
}

/// SOGI-FLL frequency tracker with a clamped output.
///
/// The SOGI integrators use the gain `2·sin(ω·dt/2)` so that the discrete
/// resonator peaks exactly at the loop frequency. The adaptation law is
/// amplitude-normalised:
///
/// ```text
/// ε   = u − v
/// v  += g·(k·ε − qv)
/// qv += g·v
/// ω  += dt·(−γ·k·ω·ε·qv / max(v² + qv², floor))
/// ```
///
/// The loop integrator may run past the clamp band (within a wider safety
/// range) so that for an input outside 40–70 Hz the reported estimate sits
/// exactly on the nearest boundary rather than chattering beside it.
#[derive(Debug, Clone)]
pub struct FrequencyTracker {
    v: f64,
    qv: f64,
    omega_loop: f64,
    omega_hat: f64,
    k: f64,
    gamma: f64,
    f_min: f64,
    f_max: f64,
    omega_min: f64,
    omega_max: f64,
    floor: f64,
    fault: bool,
}

impl FrequencyTracker {
    pub fn new(settings: &FllSettings, nominal_hz: f64, nominal_peak: f64) -> Self {
        let omega_min = TAU * settings.f_min_hz;
        let omega_max = TAU * settings.f_max_hz;
        let omega0 = (TAU * nominal_hz).clamp(omega_min, omega_max);
        Self {
            v: 0.0,
            qv: 0.0,
            omega_loop: omega0,
            omega_hat: omega0,
            k: settings.k,
            gamma: settings.gamma,
            f_min: settings.f_min_hz,
            f_max: settings.f_max_hz,
            omega_min,
            omega_max,
            floor: settings.floor_ratio * nominal_peak * nominal_peak,
            fault: false,
        }
    }

    /// Advances the tracker by one sample of period `dt`.
    pub fn step(&mut self, sample: f64, dt: f64) -> Result<(), DspFault> {
        if !sample.is_finite() {
            self.fault = true;
            return Err(DspFault::NonFiniteSample);
        }
        let gain = 2.0 * (0.5 * self.omega_loop * dt).sin();
        let err = sample - self.v;
        self.v += gain * (self.k * err - self.qv);
        self.qv += gain * self.v;

        let energy = (self.v * self.v + self.qv * self.qv).max(self.floor);
        self.omega_loop += dt * (-self.gamma * self.k * self.omega_loop * err * self.qv / energy);
        self.omega_loop = self.omega_loop.clamp(0.5 * self.omega_min, 2.0 * self.omega_max);
        self.omega_hat = self.omega_loop.clamp(self.omega_min, self.omega_max);
        Ok(())
    }

    /// Estimated angular frequency (rad/s), always inside the clamp band.
    pub fn omega_hat(&self) -> f64 {
        self.omega_hat
    }

    /// Estimated frequency in Hz; exactly `f_min` or `f_max` when clamped.
    pub fn frequency(&self) -> f64 {
        if self.omega_hat <= self.omega_min {
            self.f_min
        } else if self.omega_hat >= self.omega_max {
            self.f_max
        } else {
            self.omega_hat / TAU
        }
    }

    /// In-phase SOGI output.
    pub fn v(&self) -> f64 {
        self.v
    }

    /// Quadrature SOGI output.
    pub fn qv(&self) -> f64 {
        self.qv
    }

    pub fn fault(&self) -> bool {
        self.fault
    }

    pub fn clear_fault(&mut self) {
        self.fault = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FS: f64 = 4800.0;

    fn run(f_in: f64, cycles: f64) -> FrequencyTracker {
        let mut fll = FrequencyTracker::new(&FllSettings::default(), 60.0, 1.0);
        let n = (cycles * FS / f_in).round() as usize;
        for i in 1..=n {
            let t = i as f64 / FS;
            fll.step((TAU * f_in * t).cos(), 1.0 / FS).unwrap();
        }
        fll
    }

    #[test]
    fn locks_on_nominal() {
        assert!((run(60.0, 10.0).frequency() - 60.0).abs() < 0.01);
    }

    #[test]
    fn clamps_to_upper_boundary() {
        assert_eq!(run(80.0, 10.0).frequency(), 70.0);
    }

    #[test]
    fn clamps_to_lower_boundary() {
        assert_eq!(run(30.0, 10.0).frequency(), 40.0);
    }

    #[test]
    fn zero_input_holds_initial_frequency() {
        let mut fll = FrequencyTracker::new(&FllSettings::default(), 60.0, 1.0);
        for _ in 0..48_000 {
            fll.step(0.0, 1.0 / FS).unwrap();
        }
        assert_eq!(fll.omega_hat(), TAU * 60.0);
        assert!((fll.frequency() - 60.0).abs() < 1e-12);
    }

    #[test]
    fn non_finite_sample_leaves_state_and_raises_flag() {
        let mut fll = run(55.0, 3.0);
        let before = (fll.v(), fll.qv(), fll.omega_hat());
        assert_eq!(fll.step(f64::NAN, 1.0 / FS), Err(DspFault::NonFiniteSample));
        assert_eq!(fll.step(f64::INFINITY, 1.0 / FS), Err(DspFault::NonFiniteSample));
        assert_eq!(before, (fll.v(), fll.qv(), fll.omega_hat()));
        assert!(fll.fault());
        fll.clear_fault();
        assert!(!fll.fault());
    }
}
