//! Random smooth, compactly supported test functions in s.

use rand::Rng;

use super::grid::{GridFunction, LogGrid};

/// exp(1 − 1/(1 − r²)) on |r| < 1 with r = (s − center)/width.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
}

impl Bump {
    pub fn eval(&self, s: f64) -> f64 {
        let r = (s - self.center) / self.width;
        if r.abs() >= 1.0 {
            0.0
        } else {
            self.amplitude * (1.0 - 1.0 / (1.0 - r * r)).exp()
        }
    }
}

/// Sum of a few bumps; analytic in s so it can be sampled on any grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothFunction {
    pub bumps: Vec<Bump>,
}

impl SmoothFunction {
    pub fn eval(&self, s: f64) -> f64 {
        self.bumps.iter().map(|b| b.eval(s)).sum()
    }

    pub fn sample(&self, grid: LogGrid) -> GridFunction {
        GridFunction::from_fn(grid, |s| self.eval(s))
    }

    /// Support inside [lo, hi].
    pub fn random<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> Self {
        let count = rng.random_range(1..=3);
        let span = hi - lo;
        let bumps = (0..count)
            .map(|_| {
                let width = rng.random_range(0.15..0.35) * span;
                let center = rng.random_range(lo + width..hi - width);
                Bump {
                    center,
                    width,
                    amplitude: rng.random_range(-1.0..1.0),
                }
            })
            .collect();
        SmoothFunction { bumps }
    }
}
