use serde::{Deserialize, Serialize};

/// US inverse-time overcurrent curves, `t = TD·(B + A/(M^p − 1))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Curve {
    /// Moderately inverse.
    U1,
    /// Inverse.
    U2,
    /// Very inverse.
    U3,
    /// Extremely inverse.
    U4,
    /// Short-time inverse.
    U5,
}

impl Curve {
    /// `(A, B, p)`.
    pub fn constants(self) -> (f64, f64, f64) {
        match self {
            Curve::U1 => (0.0104, 0.0226, 0.02),
            Curve::U2 => (5.95, 0.180, 2.0),
            Curve::U3 => (3.88, 0.0963, 2.0),
            Curve::U4 => (5.67, 0.0352, 2.0),
            Curve::U5 => (0.00342, 0.00262, 0.02),
        }
    }

    /// Operate time in seconds for a constant multiple of pickup `m`, or
    /// `None` when `m ≤ 1` (the element never operates at or below pickup).
    pub fn operate_time(self, m: f64, time_dial: f64) -> Option<f64> {
        if !(m > 1.0) || !m.is_finite() {
            return None;
        }
        let (a, b, p) = self.constants();
        // exp_m1 keeps precision when M is just above 1.
        let denom = (p * m.ln()).exp_m1();
        Some(time_dial * (b + a / denom))
    }
}

/// Moderately inverse operate time, `TD·(0.0226 + 0.0104/(M^0.02 − 1))`.
///
/// ```
/// use vied_core::protection::u1_operate_time;
/// let t = u1_operate_time(2.0, 1.0).unwrap();
/// assert!((t - 0.7676).abs() < 1e-4);
/// assert_eq!(u1_operate_time(1.0, 1.0), None);
/// ```
pub fn u1_operate_time(m: f64, time_dial: f64) -> Option<f64> {
    Curve::U1.operate_time(m, time_dial)
}
