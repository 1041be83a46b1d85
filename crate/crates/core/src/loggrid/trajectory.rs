use std::io::{self, Write};

use super::expansion::{extract_expansion_with, ExpansionFit, FitOptions};
use super::grid::{GridFunction, LogGrid};
use crate::error::{Error, Result};
use crate::exec;
use crate::exponents::Exponent;

/// Time-stamped snapshots on a common grid, optionally with per-snapshot fits.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<GridFunction>,
    pub fits: Option<Vec<ExpansionFit>>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, snapshots: Vec<GridFunction>) -> Result<Self> {
        if times.len() != snapshots.len() || times.is_empty() {
            return Err(Error::InvalidInput("times and snapshots must match and be non-empty".into()));
        }
        if times[0] < 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("times must be increasing and nonnegative".into()));
        }
        let g = snapshots[0].grid();
        if snapshots.iter().any(|s| s.grid() != g) {
            return Err(Error::GridMismatch);
        }
        Ok(Trajectory {
            times,
            snapshots,
            fits: None,
        })
    }

    pub fn grid(&self) -> &LogGrid {
        self.snapshots[0].grid()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_snapshot(&self) -> &GridFunction {
        self.snapshots.last().expect("non-empty")
    }

    /// Fits every snapshot (batched through [`exec`]).
    pub fn with_fits(mut self, n0: u32, opts: &FitOptions) -> Result<Self> {
        let fits: Vec<Result<ExpansionFit>> =
            exec::map_slice(&self.snapshots, |u| extract_expansion_with(u, n0, opts));
        self.fits = Some(fits.into_iter().collect::<Result<Vec<_>>>()?);
        Ok(self)
    }

    pub fn fits_or_err(&self) -> Result<&[ExpansionFit]> {
        self.fits
            .as_deref()
            .ok_or_else(|| Error::FitFailed("trajectory carries no expansion fits".into()))
    }

    /// u_e(t) along the trajectory.
    pub fn coefficient_series(&self, e: Exponent) -> Result<Vec<f64>> {
        Ok(self
            .fits_or_err()?
            .iter()
            .map(|f| f.coefficient(e).unwrap_or(0.0))
            .collect())
    }

    pub fn uniform_dt(&self) -> Result<f64> {
        if self.times.len() < 2 {
            return Err(Error::InsufficientSnapshots { needed: 2, have: self.times.len() });
        }
        let dt = (self.times[self.len() - 1] - self.times[0]) / (self.len() - 1) as f64;
        if self
            .times
            .windows(2)
            .any(|w| ((w[1] - w[0]) - dt).abs() > 1e-8 * dt.max(1.0))
        {
            return Err(Error::InvalidInput("stored time mesh is not uniform".into()));
        }
        Ok(dt)
    }

    /// ∂ₜᵐ of every snapshot by repeated second-order differences.
    pub fn time_derivative(&self, m: usize) -> Result<Vec<GridFunction>> {
        if m == 0 {
            return Ok(self.snapshots.clone());
        }
        let dt = self.uniform_dt()?;
        let n = self.grid().count;
        let cols: Vec<Vec<f64>> = self.snapshots.iter().map(|s| s.values().to_vec()).collect();
        let d = time_diff_rows(&cols, n, dt, m)?;
        Ok(d.into_iter()
            .map(|v| GridFunction::raw(*self.grid(), v))
            .collect())
    }

    /// Every snapshot with `f` applied.
    pub fn map(&self, f: impl Fn(&GridFunction) -> GridFunction + Sync + Send) -> Trajectory {
        Trajectory {
            times: self.times.clone(),
            snapshots: exec::map_slice(&self.snapshots, f),
            fits: None,
        }
    }

    pub fn scale(&self, c: f64) -> Trajectory {
        self.map(|u| u.scale(c))
    }

    /// Long-format CSV (t, s, x, value), every `every`-th snapshot.
    pub fn write_csv<W: Write>(&self, mut w: W, every: usize) -> io::Result<()> {
        writeln!(w, "t,s,x,value")?;
        let g = self.grid();
        for (k, (t, u)) in self.times.iter().zip(&self.snapshots).enumerate() {
            if k % every.max(1) != 0 && k + 1 != self.len() {
                continue;
            }
            for (i, v) in u.values().iter().enumerate() {
                writeln!(w, "{t},{},{},{v}", g.s(i), g.x(i))?;
            }
        }
        Ok(())
    }
}

/// m-th derivative of a uniformly sampled scalar series.
pub fn time_diff_series(v: &[f64], dt: f64, m: usize) -> Result<Vec<f64>> {
    let rows: Vec<Vec<f64>> = v.iter().map(|&x| vec![x]).collect();
    Ok(time_diff_rows(&rows, 1, dt, m)?.into_iter().map(|r| r[0]).collect())
}

fn time_diff_rows(rows: &[Vec<f64>], width: usize, dt: f64, m: usize) -> Result<Vec<Vec<f64>>> {
    let k = rows.len();
    if k < m + 2 || k < 3 {
        return Err(Error::InsufficientSnapshots { needed: (m + 2).max(3), have: k });
    }
    let mut cur = rows.to_vec();
    for _ in 0..m {
        let mut next = vec![vec![0.0; width]; k];
        for j in 0..width {
            next[0][j] = (-3.0 * cur[0][j] + 4.0 * cur[1][j] - cur[2][j]) / (2.0 * dt);
            next[k - 1][j] =
                (3.0 * cur[k - 1][j] - 4.0 * cur[k - 2][j] + cur[k - 3][j]) / (2.0 * dt);
            for i in 1..k - 1 {
                next[i][j] = (cur[i + 1][j] - cur[i - 1][j]) / (2.0 * dt);
            }
        }
        cur = next;
    }
    Ok(cur)
}

/// Trapezoid rule on a (possibly nonuniform) time mesh.
pub fn time_integral(times: &[f64], g: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(g.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// ∫ t^p g dt with g linear between stored times and t^p integrated
/// exactly on each interval; p > −1.
pub fn time_integral_power(times: &[f64], g: &[f64], p: f64) -> Result<f64> {
    if !(p > -1.0) {
        return Err(Error::InvalidInput(format!("time weight t^{p} is not integrable at 0")));
    }
    if p == 0.0 {
        return Ok(time_integral(times, g));
    }
    let mut total = 0.0;
    for (t, v) in times.windows(2).zip(g.windows(2)) {
        let (a, b) = (t[0], t[1]);
        let slope = (v[1] - v[0]) / (b - a);
        let c = v[0] - slope * a;
        let m = |q: f64| (b.powf(q) - a.powf(q)) / q;
        total += c * m(p + 1.0) + slope * m(p + 2.0);
    }
    Ok(total)
}
