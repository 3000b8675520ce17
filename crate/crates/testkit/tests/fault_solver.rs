//! The sequence-network fault solver against a brute-force phase-domain
//! nodal solve, and waveform continuity.

mod common;

use common::{c, nodal, relative_error};
use vied_testkit::{fault_phasors, FaultScenario, FaultType, FaultWaveform, LineModel, ScenarioMatrix};

#[test]
fn sequence_solution_matches_nodal_solve_on_all_48_scenarios() {
    let line = LineModel::default();
    let pre = nodal(&line, None);
    let mut worst = 0.0f64;
    for sc in ScenarioMatrix::default().scenarios().unwrap() {
        let f = fault_phasors(&line, &sc).unwrap();
        let fault = nodal(&line, Some(&sc));
        let e = relative_error(&f.fault, &fault).max(relative_error(&f.pre, &pre));
        assert!(e < 1e-6, "{}: relative error {e:e}", sc.id());
        worst = worst.max(e);
    }
    println!("worst relative error over 48 scenarios: {worst:e}");
}

#[test]
fn nodal_agreement_off_midpoint_and_unequal_sources() {
    let mut line = LineModel::default();
    line.source_r.z1_ohm = c(1.0, 45.0);
    line.source_r.z0_ohm = c(2.0, 80.0);
    line.source_s.angle_deg = -7.0;
    for fault_type in FaultType::ALL {
        for m in [0.1, 0.37, 0.9] {
            let sc = FaultScenario {
                location_fraction: m,
                ..FaultScenario::new(fault_type, 7.5, 0.0)
            };
            let f = fault_phasors(&line, &sc).unwrap();
            let e = relative_error(&f.fault, &nodal(&line, Some(&sc)));
            assert!(e < 1e-6, "{} m={m}: {e:e}", sc.id());
        }
    }
}

const CURRENT_LSB_A: f64 = 0.001;

#[test]
fn currents_continuous_at_inception_on_all_48_scenarios() {
    let line = LineModel::default();
    for sc in ScenarioMatrix::default().scenarios().unwrap() {
        let f = fault_phasors(&line, &sc).unwrap();
        for earliest in [0.5, 1.0, 1.0 + 1.0 / 7.0] {
            let w = FaultWaveform::new(&f, &sc, 60.0, earliest);
            let t = w.inception_s();
            let before = w.eval(t - 1e-12);
            let after = w.eval(t);
            for ch in 0..4 {
                let jump = ((after[ch] - before[ch]) / CURRENT_LSB_A).abs();
                assert!(jump <= 1.0, "{} ch{ch}: {jump} LSB", sc.id());
            }
        }
    }
}

#[test]
fn voltage_peak_inception_on_inductive_loop_has_no_offset() {
    let mut line = LineModel::default();
    line.z1_ohm_per_km = c(0.0, 0.325);
    line.z0_ohm_per_km = c(0.0, 1.0);
    line.source_s.angle_deg = 0.0;
    let sc = FaultScenario::new(FaultType::ABC, 0.0, 90.0);
    let f = fault_phasors(&line, &sc).unwrap();
    let w = FaultWaveform::new(&f, &sc, 60.0, 1.0);
    let peak = f.fault.i[0].norm() * 2f64.sqrt();
    assert!(w.dc_offset()[0].abs() < 1e-9 * peak, "{}", w.dc_offset()[0]);
    assert!(w.tau_s().is_infinite());
    // At a zero crossing the same fault carries a full offset.
    let sc0 = FaultScenario::new(FaultType::ABC, 0.0, 0.0);
    let w0 = FaultWaveform::new(&f, &sc0, 60.0, 1.0);
    assert!((w0.dc_offset()[0].abs() - peak).abs() < 1e-6 * peak);
}

#[test]
fn open_fault_waveform_equals_prefault() {
    let line = LineModel::default();
    let sc = FaultScenario::new(FaultType::AG, 1e12, 45.0);
    let f = fault_phasors(&line, &sc).unwrap();
    let w = FaultWaveform::new(&f, &sc, 60.0, 0.1);
    let healthy = FaultWaveform::new(&f, &sc, 60.0, 1e3);
    for k in 0..4800 {
        let t = k as f64 / 4800.0;
        let (a, b) = (w.eval(t), healthy.eval(t));
        for ch in 0..8 {
            let lsb = if ch < 4 { 0.001 } else { 0.01 };
            assert!((a[ch] - b[ch]).abs() < lsb, "t={t} ch{ch}");
        }
    }
}
