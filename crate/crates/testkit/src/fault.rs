//! Phasor-domain fault solution by symmetrical components.
//!
//! The faulted network is reduced to sequence Thevenin equivalents at the
//! fault point. The relay's share of each sequence fault current follows
//! from current division between the two sides, and the result is added to
//! the pre-fault load flow.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use vied_core::dsp::PhasorSet;

use crate::line::LineModel;
use crate::scenario::{FaultScenario, FaultType};
use crate::Error;

/// Three-phase voltages and currents at the relay, phase-to-neutral RMS
/// phasors. Current is positive flowing from the bus into the line.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ThreePhase {
    pub v: [Complex64; 3],
    pub i: [Complex64; 3],
}

impl ThreePhase {
    /// Eight-channel phasor set with residual channels as phase sums.
    pub fn to_phasor_set(&self, frequency_hz: f64) -> PhasorSet {
        let sum = |x: &[Complex64; 3]| x[0] + x[1] + x[2];
        PhasorSet::from_complex(
            [
                self.i[0],
                self.i[1],
                self.i[2],
                sum(&self.i),
                self.v[0],
                self.v[1],
                self.v[2],
                sum(&self.v),
            ],
            frequency_hz,
        )
    }

    pub fn max_current(&self) -> f64 {
        self.i.iter().map(|i| i.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaultPhasors {
    pub pre: ThreePhase,
    pub fault: ThreePhase,
    /// Pre-fault phase-A voltage at the fault point; inception angles are
    /// measured on it.
    pub fault_point_va: Complex64,
    /// Positive-sequence Thevenin impedance at the fault point plus the
    /// fault resistance. Its X/R sets the DC offset decay.
    pub loop_impedance: Complex64,
    /// Phase currents flowing into the fault.
    pub fault_current: [Complex64; 3],
}

/// `a = 1∠120°`.
pub fn rotator() -> Complex64 {
    Complex64::from_polar(1.0, 120f64.to_radians())
}

/// Phase quantities from sequence components `[x0, x1, x2]`.
pub fn from_sequence(x: [Complex64; 3]) -> [Complex64; 3] {
    let a = rotator();
    let a2 = a * a;
    [x[0] + x[1] + x[2], x[0] + a2 * x[1] + a * x[2], x[0] + a * x[1] + a2 * x[2]]
}

fn parallel(a: Complex64, b: Complex64) -> Complex64 {
    a * b / (a + b)
}

/// Sequence currents `[I0, I1, I2]` flowing into the fault.
fn sequence_fault_currents(
    kind: FaultType,
    v_pre: Complex64,
    z: [Complex64; 3],
    zf: Complex64,
) -> Result<[Complex64; 3], Error> {
    let zero = Complex64::new(0.0, 0.0);
    let [z0, z1, z2] = z;
    let divide = |num: Complex64, den: Complex64| {
        if den.norm() <= 1e-12 * (z1.norm() + zf.norm()).max(1.0) {
            Err(Error::Config("singular fault network: zero total impedance".into()))
        } else {
            Ok(num / den)
        }
    };
    Ok(match kind {
        FaultType::ABC => [zero, divide(v_pre, z1 + zf)?, zero],
        FaultType::AG => {
            let i = divide(v_pre, z0 + z1 + z2 + 3.0 * zf)?;
            [i, i, i]
        }
        FaultType::BC => {
            let i1 = divide(v_pre, z1 + z2 + zf)?;
            [zero, i1, -i1]
        }
        FaultType::BCG => {
            let zg = z0 + 3.0 * zf;
            let i1 = divide(v_pre, z1 + parallel(z2, zg))?;
            let i2 = -i1 * zg / (z2 + zg);
            let i0 = -i1 * z2 / (z2 + zg);
            [i0, i1, i2]
        }
    })
}

/// Relay-side phasors before and during the fault.
pub fn fault_phasors(line: &LineModel, scenario: &FaultScenario) -> Result<FaultPhasors, Error> {
    line.validate()?;
    scenario.validate()?;
    let m = scenario.location_fraction;
    let (s, r) = (&line.source_s, &line.source_r);
    let zl = [line.z0(), line.z1(), line.z1()];
    let zs = [s.z0_ohm, s.z1_ohm, s.z1_ohm];
    let zr = [r.z0_ohm, r.z1_ohm, r.z1_ohm];

    let loop1 = zs[1] + zl[1] + zr[1];
    if loop1.norm() == 0.0 {
        return Err(Error::Config("singular network: zero source-to-source impedance".into()));
    }
    let i_load = (s.emf() - r.emf()) / loop1;
    let v_fault_pre = s.emf() - i_load * (zs[1] + zl[1] * m);

    let left: [Complex64; 3] = std::array::from_fn(|k| zs[k] + zl[k] * m);
    let right: [Complex64; 3] = std::array::from_fn(|k| zr[k] + zl[k] * (1.0 - m));
    let zth: [Complex64; 3] = std::array::from_fn(|k| parallel(left[k], right[k]));
    let zf = Complex64::new(scenario.resistance_ohm, 0.0);
    let i_f = sequence_fault_currents(scenario.fault_type, v_fault_pre, zth, zf)?;

    let zero = Complex64::new(0.0, 0.0);
    let i_pre_seq = [zero, i_load, zero];
    let v_pre_seq = [zero, s.emf() - zs[1] * i_load, zero];
    let di: [Complex64; 3] = std::array::from_fn(|k| i_f[k] * right[k] / (left[k] + right[k]));
    let i_seq: [Complex64; 3] = std::array::from_fn(|k| i_pre_seq[k] + di[k]);
    let v_seq: [Complex64; 3] = std::array::from_fn(|k| v_pre_seq[k] - zs[k] * di[k]);

    Ok(FaultPhasors {
        pre: ThreePhase {
            v: from_sequence(v_pre_seq),
            i: from_sequence(i_pre_seq),
        },
        fault: ThreePhase {
            v: from_sequence(v_seq),
            i: from_sequence(i_seq),
        },
        fault_point_va: v_fault_pre,
        loop_impedance: zth[1] + zf,
        fault_current: from_sequence(i_f),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(kind: FaultType, r: f64) -> FaultPhasors {
        fault_phasors(&LineModel::default(), &FaultScenario::new(kind, r, 0.0)).unwrap()
    }

    #[test]
    fn ground_fault_current_flows_in_faulted_phase_only() {
        let f = solve(FaultType::AG, 15.0);
        let scale = f.fault_current[0].norm();
        assert!(scale > 1000.0);
        assert!(f.fault_current[1].norm() < 1e-9 * scale);
        assert!(f.fault_current[2].norm() < 1e-9 * scale);
        let g = solve(FaultType::BC, 15.0);
        assert!(g.fault_current[0].norm() < 1e-9 * g.fault_current[1].norm());
        assert!((g.fault_current[1] + g.fault_current[2]).norm() < 1e-9 * g.fault_current[1].norm());
    }

    #[test]
    fn open_fault_matches_prefault() {
        let f = solve(FaultType::ABC, 1e6);
        for ph in 0..3 {
            assert!((f.fault.i[ph] - f.pre.i[ph]).norm() / f.pre.i[ph].norm() < 1e-3);
            assert!((f.fault.v[ph] - f.pre.v[ph]).norm() / f.pre.v[ph].norm() < 1e-3);
        }
    }

    #[test]
    fn bolted_three_phase_exceeds_instantaneous_pickup() {
        assert!(solve(FaultType::ABC, 0.0).fault.max_current() > 2500.0);
    }

    #[test]
    fn zero_impedance_network_is_rejected() {
        let mut line = LineModel::default();
        line.z1_ohm_per_km = Complex64::new(0.0, 0.0);
        line.source_s.z1_ohm = Complex64::new(0.0, 0.0);
        line.source_r.z1_ohm = Complex64::new(0.0, 0.0);
        line.source_s.angle_deg = 0.0;
        assert!(fault_phasors(&line, &FaultScenario::new(FaultType::ABC, 0.0, 0.0)).is_err());
    }
}
