//! Frequency tracking and fundamental phasor estimation.
//!
//! A single [`FrequencyTracker`] runs on VA; its frequency estimate drives
//! the rotating reference shared by the eight [`PhasorEstimator`]s in a
//! [`SignalProcessor`]. For each sample the tracker steps first, then the
//! estimators.

mod fll;
mod kalman;
mod phasor;

pub use fll::{FllSettings, FrequencyTracker};
pub use kalman::{KalmanSettings, PhasorEstimator, PhasorFilter};
pub use phasor::{Phasor, PhasorSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Channel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DspFault {
    #[error("non-finite input sample")]
    NonFiniteSample,
    #[error("innovation variance collapsed; covariance reset")]
    CovarianceReset,
}

/// Tunables for the whole signal chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DspSettings {
    pub fll: FllSettings,
    pub kalman: KalmanSettings,
    /// Nominal peak amplitude of each current channel (A); scales Q, R and the FLL floor.
    pub nominal_current_peak_a: f64,
    /// Nominal peak amplitude of each voltage channel (V).
    pub nominal_voltage_peak_v: f64,
}

impl Default for DspSettings {
    fn default() -> Self {
        Self {
            fll: FllSettings::default(),
            kalman: KalmanSettings::default(),
            nominal_current_peak_a: 1000.0 * std::f64::consts::SQRT_2,
            nominal_voltage_peak_v: 500_000.0 / 3f64.sqrt() * std::f64::consts::SQRT_2,
        }
    }
}

impl DspSettings {
    pub fn validate(&self) -> Result<(), String> {
        let pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(format!("dsp.{name} must be > 0, got {v}"))
            }
        };
        pos("fll.k", self.fll.k)?;
        pos("fll.gamma", self.fll.gamma)?;
        pos("fll.f_min_hz", self.fll.f_min_hz)?;
        pos("fll.floor_ratio", self.fll.floor_ratio)?;
        if !(self.fll.f_max_hz > self.fll.f_min_hz) {
            return Err("dsp.fll.f_max_hz must exceed f_min_hz".into());
        }
        pos("kalman.q_tracking", self.kalman.q_tracking)?;
        pos("kalman.q_steady", self.kalman.q_steady)?;
        pos("kalman.r", self.kalman.r)?;
        pos("kalman.innovation_gate", self.kalman.innovation_gate)?;
        pos("kalman.p0", self.kalman.p0)?;
        if !(self.kalman.innovation_window >= 1.0) {
            return Err("dsp.kalman.innovation_window must be >= 1".into());
        }
        pos("nominal_current_peak_a", self.nominal_current_peak_a)?;
        pos("nominal_voltage_peak_v", self.nominal_voltage_peak_v)
    }
}

/// The full per-sample signal chain: one FLL on VA plus eight estimators
/// sharing its reference angle.
#[derive(Debug, Clone)]
pub struct SignalProcessor {
    fll: FrequencyTracker,
    theta: f64,
    filters: [PhasorFilter; 8],
    dt: f64,
    sample_index: u64,
    phasors: PhasorSet,
    last_fault: Option<DspFault>,
}

impl SignalProcessor {
    pub fn new(settings: &DspSettings, nominal_hz: f64, samples_per_second: f64) -> Self {
        let filters = Channel::ALL.map(|ch| {
            let nominal = if ch.is_current() {
                settings.nominal_current_peak_a
            } else {
                settings.nominal_voltage_peak_v
            };
            PhasorFilter::new(&settings.kalman, nominal)
        });
        Self {
            fll: FrequencyTracker::new(&settings.fll, nominal_hz, settings.nominal_voltage_peak_v),
            theta: 0.0,
            filters,
            dt: 1.0 / samples_per_second,
            sample_index: 0,
            last_fault: None,
            phasors: PhasorSet {
                frequency_hz: nominal_hz,
                ..PhasorSet::default()
            },
        }
    }

    /// Consumes one sample per channel (engineering units) and returns the
    /// updated phasor estimates.
    pub fn process(&mut self, samples: &[f64; 8]) -> &PhasorSet {
        // A non-finite VA leaves the tracker untouched and raises its flag.
        let mut fault = self.fll.step(samples[Channel::VA.index()], self.dt).err();
        let omega = self.fll.omega_hat();
        self.theta = kalman::wrap_angle(self.theta + omega * self.dt);
        let (sin, cos) = self.theta.sin_cos();
        for (i, filter) in self.filters.iter_mut().enumerate() {
            if let Err(e) = filter.update(samples[i], cos, sin) {
                fault.get_or_insert(e);
            }
            self.phasors.phasors[i] = filter.phasor();
        }
        self.last_fault = fault;
        self.sample_index += 1;
        self.phasors.frequency_hz = self.fll.frequency();
        self.phasors.sample_index = self.sample_index;
        &self.phasors
    }

    /// Fault raised while processing the most recent sample, if any.
    pub fn last_fault(&self) -> Option<DspFault> {
        self.last_fault
    }

    pub fn phasors(&self) -> &PhasorSet {
        &self.phasors
    }

    pub fn tracker(&self) -> &FrequencyTracker {
        &self.fll
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn sample_index(&self) -> u64 {
        self.sample_index
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
}
