use serde::{Deserialize, Serialize};

/// Summary of one function × resistance cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub n: usize,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
    /// Sample standard deviation (n − 1). Zero when `n == 1`.
    pub std: f64,
}

impl LatencyStats {
    pub fn from_samples(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let std = if n > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        // Rounding in the sum can push the mean a hair outside [min, max].
        Some(Self {
            n,
            min,
            mean: mean.clamp(min, max),
            max,
            std,
        })
    }

    /// `min ≤ mean ≤ max` and `0 ≤ std ≤ max − min`.
    pub fn is_sane(&self) -> bool {
        self.min <= self.mean && self.mean <= self.max && self.std >= 0.0 && self.std <= self.max - self.min + 1e-15
    }
}
