use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vied_core::dsp::{Phasor, PhasorSet};
use vied_core::protection::{
    apparent_impedances, direction_of, u1_operate_time, zone_contains, Characteristic, Direction, FunctionSettings,
    PdisSettings, Pdir, PdirSettings, Pioc, PiocSettings, ProtectionSuite,
};
use vied_core::Channel;

const DT: f64 = 1.0 / 4800.0;

/// ln(m) through the atanh series, m > 0.
fn ln_series(m: f64) -> f64 {
    let y = (m - 1.0) / (m + 1.0);
    let y2 = y * y;
    let mut term = y;
    let mut sum = 0.0f64;
    let mut k = 1.0;
    while term.abs() > 1e-20 * sum.abs().max(1e-300) {
        sum += term / k;
        term *= y2;
        k += 2.0;
    }
    2.0 * sum
}

/// e^x − 1 by its Taylor series, |x| small.
fn expm1_series(x: f64) -> f64 {
    let mut term = x;
    let mut sum = 0.0f64;
    let mut k = 1.0;
    while term.abs() > 1e-20 * sum.abs().max(1e-300) {
        sum += term;
        k += 1.0;
        term *= x / k;
    }
    sum
}

fn u1_oracle(m: f64, td: f64) -> f64 {
    td * (0.0226 + 0.0104 / expm1_series(0.02 * ln_series(m)))
}

#[test]
fn u1_matches_series_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    // Half uniform on (1, 20], half log-spaced towards M = 1.
    let mut ms: Vec<f64> = (0..100_000)
        .map(|k| {
            let u: f64 = rng.random();
            if k % 2 == 0 {
                1.0 + 19.0 * (1.0 - u)
            } else {
                1.0 + 19.0 * 10f64.powf(-10.0 * u)
            }
        })
        .collect();
    ms.extend([1.0 + 1e-12, 1.0 + 1e-6, 1.001, 2.0, 20.0]);
    for m in ms.into_iter().filter(|m| *m > 1.0 && *m <= 20.0) {
        let t = u1_operate_time(m, 1.0).unwrap();
        let o = u1_oracle(m, 1.0);
        assert!(((t - o) / o).abs() < 1e-4, "M={m}: {t} vs {o}");
    }
    assert!((u1_operate_time(2.0, 1.0).unwrap() - 0.767_613).abs() < 1e-4);
}

#[test]
fn u1_strictly_decreasing() {
    let mut prev = f64::INFINITY;
    let mut m = 1.0001;
    while m <= 50.0 {
        let t = u1_operate_time(m, 1.0).unwrap();
        assert!(t < prev, "M={m}");
        prev = t;
        m *= 1.01;
    }
}

fn random_complex(rng: &mut impl Rng, max: f64) -> Complex64 {
    Complex64::from_polar(max * rng.random::<f64>(), rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
}

/// Geometric zone oracle written independently of the library formulas.
fn zone_oracle(s: &PdisSettings, z: Complex64) -> (bool, f64) {
    let zr = s.line_impedance_ohm * s.reach_fraction;
    match s.characteristic {
        // Thales: Z is inside the circle on diameter 0–Zr iff the chord
        // vectors to the two ends meet at an angle of at least 90°.
        Characteristic::Mho => {
            let dot = z.re * (zr.re - z.re) + z.im * (zr.im - z.im);
            (dot >= 0.0, dot.abs() / zr.norm_sqr())
        }
        Characteristic::Impedance => {
            let d = zr.re * zr.re + zr.im * zr.im - (z.re * z.re + z.im * z.im);
            (d >= 0.0, d.abs() / zr.norm_sqr())
        }
        Characteristic::Reactance => (zr.im - z.im >= 0.0, (zr.im - z.im).abs() / zr.norm()),
        Characteristic::Quadrilateral => {
            let (r, x) = (s.quad.r_reach_ohm, s.quad.x_reach_ohm);
            // Directional line: inside the wedge between −15° and 115°,
            // expressed as two cross-product half-planes.
            let lo = Complex64::from_polar(1.0, (-15f64).to_radians());
            let hi = Complex64::from_polar(1.0, 115f64.to_radians());
            let cross = |a: Complex64, b: Complex64| a.re * b.im - a.im * b.re;
            let margins = [z.im, x - z.im, z.re + r / 8.0, r - z.re, cross(lo, z), cross(z, hi)];
            let inside = margins.iter().all(|m| *m >= 0.0);
            let closest = margins.iter().fold(f64::INFINITY, |a, m| a.min(m.abs()));
            (inside, closest / r.max(x))
        }
    }
}

#[test]
fn zone_contains_agrees_with_geometric_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let shapes = [
        Characteristic::Mho,
        Characteristic::Impedance,
        Characteristic::Reactance,
        Characteristic::Quadrilateral,
    ];
    let mut checked = 0;
    let mut inside = 0;
    for i in 0..10_000 {
        let mut s = PdisSettings::default();
        s.characteristic = shapes[i % 4];
        s.line_impedance_ohm = Complex64::from_polar(rng.random_range(1.0..100.0), rng.random_range(0.0..1.5));
        s.reach_fraction = rng.random_range(0.1..=2.0);
        s.quad.r_reach_ohm = rng.random_range(1.0..80.0);
        s.quad.x_reach_ohm = rng.random_range(1.0..80.0);
        let scale = s.line_impedance_ohm.norm() * 2.5;
        let z = random_complex(&mut rng, scale);
        let (want, margin) = zone_oracle(&s, z);
        if margin < 1e-9 {
            continue;
        }
        checked += 1;
        inside += want as usize;
        assert_eq!(zone_contains(&s, z), want, "{:?} Zr={} Z={z}", s.characteristic, s.reach());
    }
    assert!(checked > 9_900);
    assert!(inside > 1_000 && inside < checked - 1_000);
}

#[test]
fn mho_closed_boundary() {
    let s = PdisSettings::default();
    assert!(zone_contains(&s, Complex64::new(0.0, 0.0)));
    assert!(zone_contains(&s, s.reach()));
}

/// Direction oracle: forward iff the current has a positive projection on
/// the polarising quantity rotated by +90° − rca.
fn direction_oracle(i: Complex64, vpol: Complex64, rca_deg: f64) -> (Direction, f64) {
    let reference = vpol * Complex64::i() * Complex64::from_polar(1.0, -rca_deg.to_radians());
    let proj = (i * reference.conj()).re / (i.norm() * reference.norm());
    let d = if proj > 0.0 { Direction::Forward } else { Direction::Reverse };
    (d, proj.abs())
}

#[test]
fn direction_agrees_with_complex_angle_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut fwd = 0;
    for _ in 0..10_000 {
        let i = random_complex(&mut rng, 5000.0);
        let v = random_complex(&mut rng, 5e5);
        let rca = rng.random_range(-90.0..90.0);
        if v.norm() < 1.0 || i.norm() == 0.0 {
            continue;
        }
        let (want, margin) = direction_oracle(i, v, rca);
        if margin < 1e-9 {
            continue;
        }
        fwd += (want == Direction::Forward) as usize;
        assert_eq!(direction_of(i, v, rca, 1.0), want, "I={i} V={v} rca={rca}");
    }
    assert!(fwd > 4_000 && fwd < 6_000);
    assert_eq!(
        direction_of(Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0), 30.0, 1.0),
        Direction::Undetermined
    );
}

fn set_from(values: [Complex64; 8]) -> PhasorSet {
    PhasorSet::from_complex(values, 60.0)
}

fn random_set(rng: &mut impl Rng) -> PhasorSet {
    let mut v = [Complex64::default(); 8];
    for ch in Channel::PHASE_CURRENTS {
        v[ch.index()] = random_complex(rng, 8000.0);
    }
    for ch in Channel::PHASE_VOLTAGES {
        v[ch.index()] = random_complex(rng, 4e5);
    }
    set_from(v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn overcurrent_pickup_monotone(a in 0.0f64..10_000.0, b in 0.0f64..10_000.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let s = FunctionSettings::default();
        let mk = |x: f64| {
            let mut p = PhasorSet::default();
            p[Channel::IB] = Phasor::new(x, 0.3);
            p
        };
        let lo_out = ProtectionSuite::new().step(&s, &mk(lo), DT);
        let hi_out = ProtectionSuite::new().step(&s, &mk(hi), DT);
        prop_assert!(!lo_out.pioc.pickup || hi_out.pioc.pickup);
        prop_assert!(!lo_out.ptoc.pickup || hi_out.ptoc.pickup);
    }

    #[test]
    fn zone_decisions_scale_invariant(seed in any::<u64>(), c in 0.01f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_set(&mut rng);
        let s = PdisSettings::default();
        let z1 = apparent_impedances(&p, s.k0, 0.0);
        let z2 = apparent_impedances(&p.scaled(c), s.k0, 0.0);
        for (a, b) in z1.iter().zip(z2.iter()) {
            let (a, b) = (a.unwrap(), b.unwrap());
            prop_assert!((a - b).norm() <= 1e-9 * a.norm().max(1.0));
            let (_, margin) = zone_oracle(&s, a);
            if margin > 1e-9 {
                prop_assert_eq!(zone_contains(&s, a), zone_contains(&s, b));
            }
        }
    }

    #[test]
    fn pdir_implies_overcurrent_pickup(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_set(&mut rng);
        let ds = PdirSettings { enabled: true, ..PdirSettings::default() };
        let ps = PiocSettings { pickup_a: ds.pickup_a, delay_s: ds.delay_s, enabled: true };
        let dir = Pdir::new().step(&ds, &p, 2886.75, DT);
        let oc = Pioc::new().step(&ps, &p, DT);
        prop_assert!(!dir.pickup || oc.pickup);
    }

    #[test]
    fn definite_timer_soundness(delay_steps in 0usize..200, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let delay = delay_steps as f64 * DT;
        let s = PiocSettings { enabled: true, pickup_a: 2500.0, delay_s: delay };
        let mut f = Pioc::new();
        let mut run = 0usize;
        for _ in 0..5000 {
            let on = rng.random_bool(0.98);
            let mut p = PhasorSet::default();
            p[Channel::IA] = Phasor::new(if on { 3000.0 } else { 100.0 }, 0.0);
            let out = f.step(&s, &p, DT);
            run = if on { run + 1 } else { 0 };
            // Pickup has been held for (run − 1) sample periods when this
            // step is evaluated; trip exactly when that reaches the delay.
            let held = run.saturating_sub(1);
            prop_assert_eq!(out.trip, on && held >= delay_steps, "run={} delay={}", run, delay_steps);
        }
    }
}

#[test]
fn suite_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let stream: Vec<PhasorSet> = (0..5000).map(|_| random_set(&mut rng)).collect();
    let mut s = FunctionSettings::default();
    s.pdir.enabled = true;
    s.ptov.enabled = true;
    let run = || {
        let mut suite = ProtectionSuite::new();
        stream.iter().map(|p| suite.step(&s, p, DT)).collect::<Vec<_>>()
    };
    assert_eq!(run(), run());
}

fn balanced(v_pu: f64, i_rms: f64, i_lag_deg: f64) -> PhasorSet {
    let vn = 500_000.0 / 3f64.sqrt();
    let mut p = PhasorSet::default();
    for (k, (v, i)) in [(Channel::VA, Channel::IA), (Channel::VB, Channel::IB), (Channel::VC, Channel::IC)]
        .into_iter()
        .enumerate()
    {
        let a = -(k as f64) * 120.0;
        p[v] = Phasor::new(v_pu * vn, a.to_radians());
        p[i] = Phasor::new(i_rms, (a - i_lag_deg).to_radians());
    }
    p
}

fn first_trip(stream: impl Fn(usize) -> PhasorSet, pick: impl Fn(&vied_core::protection::SuiteOutput) -> bool) -> Option<f64> {
    let s = FunctionSettings::default();
    let mut suite = ProtectionSuite::new();
    (0..48_000).find(|&k| pick(&suite.step(&s, &stream(k), DT))).map(|k| k as f64 * DT)
}

#[test]
fn ptoc_and_ptuv_timing_through_suite() {
    // M = 2 on PTOC; voltage healthy so PTUV stays quiet.
    let t = first_trip(|_| balanced(1.0, 2600.0, 80.0), |o| o.ptoc.trip).unwrap();
    assert!((t - 0.767_613).abs() <= DT, "{t}");
    let t = first_trip(|_| balanced(0.8, 500.0, 30.0), |o| o.ptuv.trip).unwrap();
    assert!((t - 0.1).abs() <= DT, "{t}");
    assert!(first_trip(|_| balanced(0.95, 500.0, 30.0), |o| o.ptuv.pickup).is_none());
    assert!(first_trip(|_| balanced(1.0, 0.9 * 1300.0, 30.0), |o| o.ptoc.pickup).is_none());
}

#[test]
fn pdis_trips_for_midline_bolted_and_not_for_load() {
    let zl = PdisSettings::default().line_impedance_ohm;
    let mut fault = PhasorSet::default();
    let mut load = PhasorSet::default();
    for (k, (v, i)) in [(Channel::VA, Channel::IA), (Channel::VB, Channel::IB), (Channel::VC, Channel::IC)]
        .into_iter()
        .enumerate()
    {
        let rot = Complex64::from_polar(1.0, -(k as f64) * 120f64.to_radians());
        let i_f = Complex64::from_polar(6000.0, -1.4) * rot;
        fault[i] = Phasor::from_complex(i_f);
        fault[v] = Phasor::from_complex(i_f * zl * 0.5);
        let vn = Complex64::from_polar(288_675.0, 0.0) * rot;
        load[v] = Phasor::from_complex(vn);
        load[i] = Phasor::from_complex(vn / Complex64::new(500.0, 50.0));
    }
    let s = FunctionSettings::default();
    let out = ProtectionSuite::new().step(&s, &fault, DT);
    assert!(out.pdis.trip);
    let out = ProtectionSuite::new().step(&s, &load, DT);
    assert!(!out.pdis.pickup);
}
