//! Analytic expectation of relay behaviour from steady fault phasors.
//!
//! Each function is evaluated from its definition on the solved phasors,
//! without running the relay, its estimator or its timers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use vied_core::protection::{zone_contains, Characteristic, FunctionId, FunctionSettings, PdisSettings};
use vied_core::protection::DEAD_LINE_PU;

use crate::fault::ThreePhase;

/// Functions exercised by the campaign, in report order.
pub const CAMPAIGN_FUNCTIONS: [FunctionId; 4] = [FunctionId::Pioc, FunctionId::Ptoc, FunctionId::Pdis, FunctionId::Ptuv];

/// Fraction of rated current below which a distance loop is not measured.
const LOOP_CURRENT_FLOOR_PU: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub function: FunctionId,
    pub operates: bool,
    /// Operate time from inception under steady fault quantities.
    pub t_expected_s: Option<f64>,
    /// Signed relative distance of the operating quantity from its
    /// threshold; positive means inside the operate region.
    pub margin: f64,
}

/// Loop impedances in AG, BG, CG, AB, BC, CA order.
pub fn loop_impedances(p: &ThreePhase, k0: Complex64, floor_a: f64) -> [Option<Complex64>; 6] {
    let residual = p.i[0] + p.i[1] + p.i[2];
    let mut out = [None; 6];
    for ph in 0..3 {
        let i = p.i[ph] + k0 * residual;
        if i.norm() >= floor_a {
            out[ph] = Some(p.v[ph] / i);
        }
    }
    for (k, (x, y)) in [(0, 1), (1, 2), (2, 0)].into_iter().enumerate() {
        let i = p.i[x] - p.i[y];
        if i.norm() >= floor_a {
            out[3 + k] = Some((p.v[x] - p.v[y]) / i);
        }
    }
    out
}

/// Margin of `z` inside the zone: for a mho circle, one minus the distance
/// from the centre over the radius.
fn zone_margin(s: &PdisSettings, z: Complex64) -> (bool, f64) {
    match s.characteristic {
        Characteristic::Mho => {
            let centre = s.reach() / 2.0;
            let radius = centre.norm();
            let m = 1.0 - (z - centre).norm() / radius;
            (m >= 0.0, m)
        }
        _ => {
            let inside = zone_contains(s, z);
            (inside, if inside { 1.0 } else { -1.0 })
        }
    }
}

pub fn expect(s: &FunctionSettings, fault: &ThreePhase, duration_s: f64, function: FunctionId) -> Expectation {
    let imax = fault.max_current();
    let none = |margin| Expectation {
        function,
        operates: false,
        t_expected_s: None,
        margin,
    };
    let timed = |margin: f64, t: Option<f64>| match t {
        Some(t) if margin > 0.0 && t <= duration_s => Expectation {
            function,
            operates: true,
            t_expected_s: Some(t),
            margin,
        },
        _ => none(margin),
    };
    match function {
        FunctionId::Pioc if s.pioc.enabled => timed(imax / s.pioc.pickup_a - 1.0, Some(s.pioc.delay_s)),
        FunctionId::Ptoc if s.ptoc.enabled => {
            let m = imax / s.ptoc.pickup_a;
            timed(m - 1.0, s.ptoc.curve_id.operate_time(m, s.ptoc.time_dial))
        }
        FunctionId::Pdis if s.pdis.enabled => {
            let floor = LOOP_CURRENT_FLOOR_PU * s.rated.current_a;
            let best = loop_impedances(fault, s.pdis.k0, floor)
                .into_iter()
                .flatten()
                .map(|z| zone_margin(&s.pdis, z))
                .fold((false, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
            if best.0 {
                timed(best.1.max(f64::MIN_POSITIVE), Some(s.pdis.delay_s))
            } else {
                none(best.1)
            }
        }
        FunctionId::Ptuv if s.ptuv.enabled => {
            let threshold = s.ptuv.pickup_pu * s.ptuv.nominal_v;
            let dead = DEAD_LINE_PU * s.ptuv.nominal_v;
            let live: Vec<f64> = fault.v.iter().map(|v| v.norm()).filter(|&v| v > dead).collect();
            let vmin = live.iter().copied().fold(f64::INFINITY, f64::min);
            timed(1.0 - vmin / threshold, Some(s.ptuv.delay_s))
        }
        _ => none(f64::NAN),
    }
}

/// Expectations for [`CAMPAIGN_FUNCTIONS`].
pub fn expected_operation(s: &FunctionSettings, fault: &ThreePhase, duration_s: f64) -> [Expectation; 4] {
    CAMPAIGN_FUNCTIONS.map(|f| expect(s, fault, duration_s, f))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn balanced(v: f64, i: f64, lag_deg: f64) -> ThreePhase {
        let a = Complex64::from_polar(1.0, -120f64.to_radians());
        let vv = Complex64::new(v, 0.0);
        let ii = Complex64::from_polar(i, -lag_deg.to_radians());
        ThreePhase {
            v: [vv, vv * a, vv * a * a],
            i: [ii, ii * a, ii * a * a],
        }
    }

    #[test]
    fn load_operates_nothing() {
        let s = FunctionSettings::default();
        let e = expected_operation(&s, &balanced(288_675.0, 500.0, 10.0), 2.0);
        assert!(e.iter().all(|e| !e.operates), "{e:?}");
    }

    #[test]
    fn bolted_close_in_fault_operates_all() {
        let s = FunctionSettings::default();
        // Z = 10 Ω at 85°, well inside the 32.6 Ω mho.
        let e = expected_operation(&s, &balanced(100_000.0, 10_000.0, 85.0), 2.0);
        assert!(e.iter().all(|e| e.operates), "{e:?}");
        assert_eq!(e[0].t_expected_s, Some(0.0));
        assert_eq!(e[3].t_expected_s, Some(0.1));
        let m = 10_000.0 / 1300.0;
        let u1 = 0.0104 / (f64::powf(m, 0.02) - 1.0) + 0.0226;
        assert!((e[1].t_expected_s.unwrap() - u1).abs() < 1e-12);
    }

    #[test]
    fn slow_curve_beyond_duration_does_not_operate() {
        let s = FunctionSettings::default();
        let e = expect(&s, &balanced(288_675.0, 1400.0, 10.0), 2.0, FunctionId::Ptoc);
        assert!(!e.operates && e.margin > 0.0);
    }
}
