/// Definite-time pickup timer with instantaneous reset.
///
/// Elapsed time counts from the step on which pickup first asserted, so a
/// zero delay trips on that same step and a delay of `d` trips on the first
/// step at which at least `d` seconds of pickup have accumulated.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DefiniteTimer {
    elapsed_s: f64,
    running: bool,
}

const EPS: f64 = 1e-9;

impl DefiniteTimer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Advances the timer and returns `true` when the delay has expired.
    pub fn step(&mut self, pickup: bool, delay_s: f64, dt: f64) -> bool {
        if !pickup {
            self.reset();
            return false;
        }
        if self.running {
            self.elapsed_s += dt;
        } else {
            self.running = true;
            self.elapsed_s = 0.0;
        }
        self.elapsed_s + EPS >= delay_s
    }

    pub fn reset(&mut self) {
        self.running = false;
        self.elapsed_s = 0.0;
    }

    pub fn elapsed_s(&self) -> f64 {
        self.elapsed_s
    }
}
