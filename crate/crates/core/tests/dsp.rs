use std::f64::consts::{SQRT_2, TAU};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use vied_core::dsp::{DspSettings, FllSettings, FrequencyTracker, KalmanSettings, PhasorEstimator, SignalProcessor};
use vied_core::Channel;

const FS: f64 = 4800.0;
const DT: f64 = 1.0 / FS;
const PEAK: f64 = 100.0;

fn tracker() -> FrequencyTracker {
    FrequencyTracker::new(&FllSettings::default(), 60.0, PEAK)
}

fn run_tracker(f: f64, amp: f64, phase: f64, cycles: f64) -> FrequencyTracker {
    let mut t = tracker();
    let n = (cycles * FS / f).ceil() as usize;
    for k in 0..n {
        t.step(amp * (TAU * f * k as f64 * DT + phase).sin(), DT).unwrap();
    }
    t
}

#[test]
fn locks_within_ten_cycles_40_to_70() {
    for f in (40..=70).step_by(5).map(f64::from) {
        for phase in [0.0, 0.7, 2.0, 4.5] {
            for amp in [0.5 * PEAK, PEAK, 1.2 * PEAK] {
                let t = run_tracker(f, amp, phase, 10.0);
                assert!(
                    (t.frequency() - f).abs() <= 0.01,
                    "f={f} phase={phase} amp={amp}: {}",
                    t.frequency()
                );
            }
        }
    }
}

#[test]
fn clamps_exactly_out_of_range() {
    for (f, expect) in [(80.0, 70.0), (75.0, 70.0), (100.0, 70.0), (30.0, 40.0), (35.0, 40.0), (20.0, 40.0)] {
        let t = run_tracker(f, PEAK, 0.3, 40.0);
        assert_eq!(t.frequency(), expect, "input {f} Hz");
    }
}

#[test]
fn zero_input_stays_nominal() {
    let mut t = tracker();
    for _ in 0..48_000 {
        t.step(0.0, DT).unwrap();
    }
    // The error term is identically zero, so the loop state never moves.
    assert_eq!(t.omega_hat(), TAU * 60.0);
    assert!((t.frequency() - 60.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn frequency_always_within_clamp(
        f in 1.0f64..400.0,
        amp in 0.0f64..1e4,
        noise in 0.0f64..1.0,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = Normal::new(0.0, 1.0).unwrap();
        let mut t = tracker();
        for k in 0..4800 {
            let u = amp * (TAU * f * k as f64 * DT).sin() + noise * amp * n.sample(&mut rng);
            t.step(u, DT).unwrap();
            prop_assert!((40.0..=70.0).contains(&t.frequency()));
        }
    }

    #[test]
    fn covariance_stays_psd(amp in 0.0f64..1e6, seed in any::<u64>(), f in 40.0f64..70.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = Normal::new(0.0, 1.0).unwrap();
        let mut e = PhasorEstimator::new(&KalmanSettings::default(), PEAK);
        for k in 0..2000 {
            let z = amp * (TAU * f * k as f64 * DT).cos() + amp * 0.1 * n.sample(&mut rng);
            e.step(z, TAU * 60.0, DT).unwrap();
            prop_assert!(e.filter().covariance_is_psd());
            prop_assert!((0.0..TAU).contains(&e.theta()));
        }
    }
}

/// Feeds `A·cos(θ_k + φ)` where θ_k is the estimator's own reference after
/// step k, so the true phasor is exactly (A/√2, φ).
fn matched_estimator(samples: usize, amp: impl Fn(usize) -> f64, phi: f64, f: f64) -> (PhasorEstimator, Vec<f64>) {
    let mut e = PhasorEstimator::new(&KalmanSettings::default(), PEAK);
    let w = TAU * f;
    let mut mags = Vec::with_capacity(samples);
    for k in 0..samples {
        let theta = w * (k + 1) as f64 * DT;
        e.step(amp(k) * (theta + phi).cos(), w, DT).unwrap();
        mags.push(e.phasor().rms);
    }
    (e, mags)
}

fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

#[test]
fn magnitude_and_angle_after_two_cycles() {
    for f in [45.0, 60.0, 65.0] {
        for phi in [0.0, 1.0, -2.5, 3.0] {
            let n = (2.0 * FS / f).ceil() as usize;
            let (e, _) = matched_estimator(n, |_| PEAK, phi, f);
            let p = e.phasor();
            let want = PEAK / SQRT_2;
            assert!((p.rms - want).abs() / want < 1e-3, "f={f} phi={phi}: {}", p.rms);
            assert!(angle_diff(p.angle, phi).to_degrees() < 0.2, "f={f} phi={phi}: {}", p.angle);
        }
    }
}

#[test]
fn amplitude_step_settles_within_1_5_cycles() {
    let spc = 80usize;
    // The step happens at a zero crossing of cos(θ): θ = π/2 at k + 1 = 20.
    let step_at = 19usize;
    let total = step_at + 20 * spc;
    let (_, mags) = matched_estimator(total, |k| if k < step_at { PEAK } else { 5.0 * PEAK }, 0.0, 60.0);
    let target = 5.0 * PEAK / SQRT_2;
    let settled = (step_at..total)
        .rev()
        .take_while(|&k| (mags[k] - target).abs() <= 0.02 * target)
        .last()
        .unwrap();
    let cycles = (settled - step_at) as f64 / spc as f64;
    assert!(cycles <= 1.5, "settled after {cycles} cycles");
}

/// One-cycle sliding DFT magnitude (RMS), recomputed from scratch.
fn dft_magnitudes(x: &[f64], n: usize, f: f64) -> Vec<f64> {
    (n..=x.len())
        .map(|end| {
            let (mut re, mut im) = (0.0, 0.0);
            for (j, v) in x[end - n..end].iter().enumerate() {
                let a = TAU * f * j as f64 * DT;
                re += v * a.cos();
                im -= v * a.sin();
            }
            (re * re + im * im).sqrt() * 2.0 / n as f64 / SQRT_2
        })
        .collect()
}

fn std_dev(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

#[test]
fn noise_rejection_beats_one_cycle_dft() {
    // 40 dB SNR: noise variance is 1e-4 of the signal power A²/2.
    let sigma = (PEAK * PEAK / 2.0 * 1e-4).sqrt();
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, sigma).unwrap();
        let w = TAU * 60.0;
        let n = 4800 * 2;
        let x: Vec<f64> = (0..n)
            .map(|k| PEAK * (w * (k + 1) as f64 * DT + 0.4).cos() + noise.sample(&mut rng))
            .collect();
        let mut e = PhasorEstimator::new(&KalmanSettings::default(), PEAK);
        let mut kal = Vec::new();
        for (k, z) in x.iter().enumerate() {
            e.step(*z, w, DT).unwrap();
            if k >= 4800 {
                kal.push(e.phasor().rms);
            }
        }
        let dft = dft_magnitudes(&x[4800 - 80..], 80, 60.0);
        let (sk, sd) = (std_dev(&kal), std_dev(&dft));
        assert!(sk < sd, "seed {seed}: kalman {sk} vs dft {sd}");
    }
}

#[test]
fn processor_tracks_off_nominal_three_phase() {
    let settings = DspSettings::default();
    let mut sp = SignalProcessor::new(&settings, 60.0, FS);
    let f = 57.5;
    let v_rms = 288_675.0;
    let i_rms = 800.0;
    let mut last = None;
    for k in 0..(FS as usize) {
        let t = k as f64 * DT;
        let mut s = [0.0; 8];
        for ph in 0..3 {
            let shift = -(ph as f64) * TAU / 3.0;
            s[ph] = i_rms * SQRT_2 * (TAU * f * t + shift - 0.5).cos();
            s[4 + ph] = v_rms * SQRT_2 * (TAU * f * t + shift).cos();
        }
        last = Some(sp.process(&s).clone());
    }
    let p = last.unwrap();
    assert!((p.frequency_hz - f).abs() < 0.01, "{}", p.frequency_hz);
    for ch in [Channel::VA, Channel::VB, Channel::VC] {
        assert!((p.magnitude(ch) / v_rms - 1.0).abs() < 1e-3, "{ch}: {}", p.magnitude(ch));
    }
    for ch in [Channel::IA, Channel::IB, Channel::IC] {
        assert!((p.magnitude(ch) / i_rms - 1.0).abs() < 1e-3, "{ch}: {}", p.magnitude(ch));
    }
    // Current lags voltage by 0.5 rad on every phase.
    let lag = angle_diff(p[Channel::VA].angle, p[Channel::IA].angle);
    assert!((lag - 0.5).abs() < 2e-3, "{lag}");
    assert!(p.magnitude(Channel::VN) < 1.0 && p.magnitude(Channel::IN) < 1e-3);
}

#[test]
fn processor_is_deterministic() {
    let run = || {
        let mut sp = SignalProcessor::new(&DspSettings::default(), 60.0, FS);
        let mut out = Vec::new();
        for k in 0..2000 {
            let x = 4e5 * (TAU * 61.0 * k as f64 * DT).sin();
            out.push(sp.process(&[x / 300.0, 0.0, 0.0, 0.0, x, 0.0, 0.0, 0.0]).clone());
        }
        out
    };
    assert_eq!(run(), run());
}
