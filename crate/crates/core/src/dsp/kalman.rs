use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::phasor::Phasor;
use super::DspFault;

/// Kalman tunables, expressed as fractions of the channel's nominal peak
/// amplitude squared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KalmanSettings {
    /// Process noise per sample while tracking a transient.
    pub q_tracking: f64,
    /// Process noise per sample in steady state.
    pub q_steady: f64,
    /// Measurement noise variance.
    pub r: f64,
    /// Smoothed normalised innovation above which the tracking noise is used.
    pub innovation_gate: f64,
    /// Averaging length of the normalised innovation, in samples.
    pub innovation_window: f64,
    /// Initial covariance.
    pub p0: f64,
}

impl Default for KalmanSettings {
    fn default() -> Self {
        Self {
            q_tracking: 1e-6,
            q_steady: 1e-8,
            r: 1e-4,
            innovation_gate: 4.0,
            innovation_window: 16.0,
            p0: 1.0,
        }
    }
}

/// Largest single normalised innovation fed to the smoother, so one outlier
/// cannot hold the filter in tracking mode for long.
const INNOVATION_CAP: f64 = 1e4;

pub(crate) fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    // rem_euclid can round up to TAU itself for tiny negative inputs.
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Two-state random-walk phasor filter with a rotating measurement row.
///
/// The state `x = [c, s]` models `u(θ) = c·cos θ − s·sin θ`. The reference
/// angle is supplied by the caller so that a bank of filters can share it.
/// Process noise switches between a steady-state and a tracking level
/// depending on a running average of the normalised innovation `y²/S`.
#[derive(Debug, Clone)]
pub struct PhasorFilter {
    c: f64,
    s: f64,
    p00: f64,
    p01: f64,
    p11: f64,
    q_tracking: f64,
    q_steady: f64,
    r: f64,
    gate: f64,
    alpha: f64,
    nis: f64,
    fault: bool,
}

impl PhasorFilter {
    pub fn new(settings: &KalmanSettings, nominal_peak: f64) -> Self {
        let n2 = nominal_peak * nominal_peak;
        Self {
            c: 0.0,
            s: 0.0,
            p00: settings.p0 * n2,
            p01: 0.0,
            p11: settings.p0 * n2,
            q_tracking: settings.q_tracking * n2,
            q_steady: settings.q_steady * n2,
            r: settings.r * n2,
            gate: settings.innovation_gate,
            alpha: 1.0 - 1.0 / settings.innovation_window.max(1.0),
            nis: 0.0,
            fault: false,
        }
    }

    /// One predict/update cycle given `cos θ` and `sin θ` of the reference.
    pub fn update(&mut self, z: f64, cos: f64, sin: f64) -> Result<(), DspFault> {
        if !z.is_finite() {
            self.fault = true;
            return Err(DspFault::NonFiniteSample);
        }
        let q = if self.nis > self.gate {
            self.q_tracking
        } else {
            self.q_steady
        };
        self.p00 += q;
        self.p11 += q;

        let (h0, h1) = (cos, -sin);
        let g0 = self.p00 * h0 + self.p01 * h1;
        let g1 = self.p01 * h0 + self.p11 * h1;
        let s = h0 * g0 + h1 * g1 + self.r;
        if !(s > 0.0) || !s.is_finite() {
            self.p00 = self.q_tracking;
            self.p01 = 0.0;
            self.p11 = self.q_tracking;
            self.fault = true;
            return Err(DspFault::CovarianceReset);
        }

        let y = z - (h0 * self.c + h1 * self.s);
        let inv_s = 1.0 / s;
        self.c += g0 * inv_s * y;
        self.s += g1 * inv_s * y;
        // (I − K·H)·P written as P − g·gᵀ/S, symmetric by construction.
        self.p00 -= g0 * g0 * inv_s;
        self.p01 -= g0 * g1 * inv_s;
        self.p11 -= g1 * g1 * inv_s;

        self.nis = self.alpha * self.nis + (1.0 - self.alpha) * (y * y * inv_s).min(INNOVATION_CAP);
        debug_assert!(self.covariance_is_psd(), "covariance lost positive semi-definiteness");
        Ok(())
    }

    pub fn phasor(&self) -> Phasor {
        Phasor::from_components(self.c, self.s)
    }

    pub fn components(&self) -> (f64, f64) {
        (self.c, self.s)
    }

    /// Covariance as `[[p00, p01], [p01, p11]]`.
    pub fn covariance(&self) -> [[f64; 2]; 2] {
        [[self.p00, self.p01], [self.p01, self.p11]]
    }

    pub fn covariance_is_psd(&self) -> bool {
        let tol = 1e-9 * (self.p00.abs() + self.p11.abs() + self.r);
        self.p00 >= -tol && self.p11 >= -tol && self.p00 * self.p11 - self.p01 * self.p01 >= -tol * tol
    }

    /// True while the innovation statistic holds the filter in tracking mode.
    pub fn is_tracking(&self) -> bool {
        self.nis > self.gate
    }

    pub fn fault(&self) -> bool {
        self.fault
    }
}

/// A single filter owning its own reference angle.
#[derive(Debug, Clone)]
pub struct PhasorEstimator {
    theta: f64,
    filter: PhasorFilter,
}

impl PhasorEstimator {
    pub fn new(settings: &KalmanSettings, nominal_peak: f64) -> Self {
        Self {
            theta: 0.0,
            filter: PhasorFilter::new(settings, nominal_peak),
        }
    }

    /// Advances the reference by `omega_hat·dt`, then filters `sample`.
    pub fn step(&mut self, sample: f64, omega_hat: f64, dt: f64) -> Result<(), DspFault> {
        if !sample.is_finite() {
            // Leave θ untouched as well.
            return self.filter.update(sample, 1.0, 0.0);
        }
        self.theta = wrap_angle(self.theta + omega_hat * dt);
        let (sin, cos) = self.theta.sin_cos();
        self.filter.update(sample, cos, sin)
    }

    pub fn phasor(&self) -> Phasor {
        self.filter.phasor()
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn filter(&self) -> &PhasorFilter {
        &self.filter
    }
}
