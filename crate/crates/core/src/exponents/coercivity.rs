use serde::Serialize;

/// Open or closed interval; infinite endpoints are open.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    fn intersect(&self, o: &Interval) -> Interval {
        let (lo, lo_closed) = if self.lo > o.lo {
            (self.lo, self.lo_closed)
        } else if o.lo > self.lo {
            (o.lo, o.lo_closed)
        } else {
            (self.lo, self.lo_closed && o.lo_closed)
        };
        let (hi, hi_closed) = if self.hi < o.hi {
            (self.hi, self.hi_closed)
        } else if o.hi < self.hi {
            (o.hi, o.hi_closed)
        } else {
            (self.hi, self.hi_closed && o.hi_closed)
        };
        Interval { lo, hi, lo_closed, hi_closed }
    }
}

/// Sufficient coercivity range for a quartic with real roots γ₁ ≤ … ≤ γ₄:
/// the union of the root gaps (−∞, γ₁), (γ₂, γ₃), (γ₄, ∞) intersected with
/// the ball (α − mean)² ≤ variance/3.
pub fn coercivity_set(roots: [f64; 4]) -> Vec<Interval> {
    let mut g = roots;
    g.sort_by(|a, b| a.total_cmp(b));
    let mean = g.iter().sum::<f64>() / 4.0;
    let var = g.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / 4.0;
    let rad = (var / 3.0).sqrt();
    let ball = Interval {
        lo: mean - rad,
        hi: mean + rad,
        lo_closed: true,
        hi_closed: true,
    };
    let gaps = [
        Interval { lo: f64::NEG_INFINITY, hi: g[0], lo_closed: false, hi_closed: false },
        Interval { lo: g[1], hi: g[2], lo_closed: false, hi_closed: false },
        Interval { lo: g[3], hi: f64::INFINITY, lo_closed: false, hi_closed: false },
    ];
    gaps.iter()
        .map(|gap| gap.intersect(&ball))
        .filter(|i| !i.is_empty())
        .collect()
}

pub fn in_coercivity_set(roots: [f64; 4], alpha: f64) -> bool {
    coercivity_set(roots).iter().any(|i| i.contains(alpha))
}
