//! Time-domain synthesis of fault records and their CSV form.

use std::f64::consts::{FRAC_PI_2, SQRT_2, TAU};
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fault::{FaultPhasors, ThreePhase};
use crate::scenario::FaultScenario;
use crate::Error;

/// Channel order of every sample: IA, IB, IC, IN, VA, VB, VC, VN.
pub type Sample = [f64; 8];

fn channels(p: &ThreePhase) -> [Complex64; 8] {
    [p.i[0], p.i[1], p.i[2], p.i[0] + p.i[1] + p.i[2], p.v[0], p.v[1], p.v[2], p.v[0] + p.v[1] + p.v[2]]
}

fn instant(x: Complex64, omega: f64, t: f64) -> f64 {
    SQRT_2 * (x * Complex64::from_polar(1.0, omega * t)).re
}

/// Continuous-time fault record: steady pre-fault sinusoids, then faulted
/// sinusoids plus a decaying DC term on the currents that keeps them
/// continuous across inception.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultWaveform {
    omega: f64,
    pre: [Complex64; 8],
    fault: [Complex64; 8],
    inception_s: f64,
    end_s: f64,
    dc: [f64; 8],
    tau_s: f64,
}

impl FaultWaveform {
    /// Places inception at the first instant not before `earliest_s` where
    /// the fault-point phase-A voltage, read as a sine, has phase
    /// `scenario.inception_angle_deg`.
    pub fn new(phasors: &FaultPhasors, scenario: &FaultScenario, frequency_hz: f64, earliest_s: f64) -> Self {
        let omega = TAU * frequency_hz;
        let phase0 = phasors.fault_point_va.arg() + FRAC_PI_2;
        let target = scenario.inception_angle_deg.to_radians();
        let k = ((omega * earliest_s + phase0 - target) / TAU).ceil();
        let inception_s = (target - phase0 + TAU * k) / omega;

        let pre = channels(&phasors.pre);
        let fault = channels(&phasors.fault);
        let mut dc = [0.0; 8];
        for ch in 0..4 {
            dc[ch] = instant(pre[ch], omega, inception_s) - instant(fault[ch], omega, inception_s);
        }
        let z = phasors.loop_impedance;
        let tau_s = if z.re > 0.0 { z.im / (omega * z.re) } else { f64::INFINITY };
        Self {
            omega,
            pre,
            fault,
            inception_s,
            end_s: inception_s + scenario.duration_s,
            dc,
            tau_s,
        }
    }

    pub fn inception_s(&self) -> f64 {
        self.inception_s
    }

    /// Time at which the fault has lasted its full duration.
    pub fn end_s(&self) -> f64 {
        self.end_s
    }

    /// DC offset of each channel at inception (zero on voltages).
    pub fn dc_offset(&self) -> [f64; 8] {
        self.dc
    }

    pub fn tau_s(&self) -> f64 {
        self.tau_s
    }

    pub fn eval(&self, t: f64) -> Sample {
        if t < self.inception_s {
            return self.pre.map(|x| instant(x, self.omega, t));
        }
        let decay = (-(t - self.inception_s) / self.tau_s).exp();
        let mut out = self.fault.map(|x| instant(x, self.omega, t));
        for (o, d) in out.iter_mut().zip(self.dc) {
            *o += d * decay;
        }
        out
    }

    /// Samples at `t0 + k/fs` up to the end of the fault.
    pub fn sample(&self, fs: f64, t0: f64) -> Waveform {
        let n = ((self.end_s - t0) * fs).ceil().max(0.0) as usize;
        let times: Vec<f64> = (0..n).map(|k| t0 + k as f64 / fs).collect();
        let samples = times.iter().map(|&t| self.eval(t)).collect();
        Waveform {
            fs,
            times,
            samples,
            inception_s: Some(self.inception_s),
        }
    }
}

/// Samples the fault record at `fs` from t = 0 with `prefault_s` of healthy
/// signal before the first inception opportunity.
pub fn synthesize_waveform(
    phasors: &FaultPhasors,
    scenario: &FaultScenario,
    frequency_hz: f64,
    prefault_s: f64,
    fs: f64,
) -> Waveform {
    FaultWaveform::new(phasors, scenario, frequency_hz, prefault_s).sample(fs, 0.0)
}

/// A sampled record, uniformly spaced at `fs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub fs: f64,
    pub times: Vec<f64>,
    pub samples: Vec<Sample>,
    pub inception_s: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[allow(non_snake_case)]
struct Row {
    t_s: f64,
    IA: f64,
    IB: f64,
    IC: f64,
    IN: f64,
    VA: f64,
    VB: f64,
    VC: f64,
    VN: f64,
}

impl Waveform {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Writes `t_s,IA,IB,IC,IN,VA,VB,VC,VN` rows in amperes and volts.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), Error> {
        let mut out = csv::Writer::from_writer(w);
        for (&t_s, s) in self.times.iter().zip(&self.samples) {
            out.serialize(Row {
                t_s,
                IA: s[0],
                IB: s[1],
                IC: s[2],
                IN: s[3],
                VA: s[4],
                VB: s[5],
                VC: s[6],
                VN: s[7],
            })?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<(), Error> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Reads a record in the [`Waveform::write_csv`] layout. The sample
    /// rate is taken from the time column, which must be uniform.
    pub fn read_csv<R: Read>(r: R) -> Result<Self, Error> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.clone();
        let expected = ["t_s", "IA", "IB", "IC", "IN", "VA", "VB", "VC", "VN"];
        if headers.iter().ne(expected) {
            return Err(Error::Format(format!("waveform header must be {}", expected.join(","))));
        }
        let mut times = Vec::new();
        let mut samples = Vec::new();
        for row in rdr.deserialize() {
            let r: Row = row?;
            times.push(r.t_s);
            samples.push([r.IA, r.IB, r.IC, r.IN, r.VA, r.VB, r.VC, r.VN]);
        }
        if times.len() < 2 {
            return Err(Error::Format("waveform needs at least two samples".into()));
        }
        let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
        if !(dt > 0.0) || times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-3 * dt) {
            return Err(Error::Format("waveform time column is not uniformly spaced".into()));
        }
        Ok(Self {
            fs: 1.0 / dt,
            times,
            samples,
            inception_s: None,
        })
    }

    pub fn load_csv(path: &Path) -> Result<Self, Error> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fault::fault_phasors;
    use crate::line::LineModel;
    use crate::scenario::FaultType;

    #[test]
    fn csv_round_trip_is_exact() {
        let line = LineModel::default();
        let sc = FaultScenario {
            duration_s: 0.05,
            ..FaultScenario::new(FaultType::BCG, 15.0, 45.0)
        };
        let w = synthesize_waveform(&fault_phasors(&line, &sc).unwrap(), &sc, 60.0, 0.05, 4800.0);
        let mut buf = Vec::new();
        w.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"t_s,IA,IB,IC,IN,VA,VB,VC,VN\n"));
        let back = Waveform::read_csv(&buf[..]).unwrap();
        assert_eq!(back.samples, w.samples);
        assert_eq!(back.times, w.times);
        assert!((back.fs - 4800.0).abs() < 1e-6);
    }

    #[test]
    fn csv_rejects_wrong_header() {
        assert!(Waveform::read_csv(&b"t,IA\n0,1\n"[..]).is_err());
    }

    #[test]
    fn inception_lands_on_requested_angle() {
        let line = LineModel::default();
        for angle in [0.0, 45.0, 90.0, 300.0] {
            let sc = FaultScenario::new(FaultType::AG, 0.0, angle);
            let f = fault_phasors(&line, &sc).unwrap();
            let w = FaultWaveform::new(&f, &sc, 60.0, 1.0);
            assert!(w.inception_s() >= 1.0 && w.inception_s() < 1.0 + 1.0 / 60.0);
            let phase = TAU * 60.0 * w.inception_s() + f.fault_point_va.arg() + FRAC_PI_2;
            let err = (phase - angle.to_radians()).rem_euclid(TAU);
            assert!(err.min(TAU - err) < 1e-9, "{angle}: {err}");
        }
    }
}
