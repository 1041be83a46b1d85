use std::io::{Read, Write};

use serde::Serialize;

use super::series::Series;
use super::transport::transport_series;
use crate::error::{Error, Result};
use crate::loggrid::{cumulative_integral, d_apply, extract_expansion, fornberg, FitOptions, GridFunction, LogGrid};
use crate::operators::check_guard;

/// Film height h(z) on z > Z₀ with h(Z₀) = 0. The contact point itself is
/// held in `z0`; `z`, `h` are the samples beyond it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhysicalProfile {
    pub z0: f64,
    pub z: Vec<f64>,
    pub h: Vec<f64>,
}

impl PhysicalProfile {
    pub fn new(z0: f64, z: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        if z.len() != h.len() {
            return Err(Error::InvalidInput(format!("{} z samples but {} h samples", z.len(), h.len())));
        }
        if z.len() < 5 {
            return Err(Error::InvalidInput("a profile needs at least 5 samples".into()));
        }
        if !z0.is_finite() || z.iter().chain(&h).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("profile samples"));
        }
        if z[0] <= z0 || h[0] <= 0.0 {
            return Err(Error::NonMonotone { index: 0 });
        }
        for j in 1..z.len() {
            if z[j] <= z[j - 1] || h[j] <= h[j - 1] {
                return Err(Error::NonMonotone { index: j });
            }
        }
        Ok(PhysicalProfile { z0, z, h })
    }

    /// h = (a·(z − Z₀))^{3/2} at the given offsets z − Z₀.
    pub fn power_law(z0: f64, a: f64, offsets: &[f64]) -> Result<Self> {
        let z = offsets.iter().map(|d| z0 + d).collect();
        let h = offsets.iter().map(|d| (a * d).powf(1.5)).collect();
        Self::new(z0, z, h)
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// Rows `z,h`, the contact point first.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
        wr.write_record(["z", "h"]).map_err(io)?;
        wr.serialize((self.z0, 0.0)).map_err(io)?;
        for (z, h) in self.z.iter().zip(&self.h) {
            wr.serialize((z, h)).map_err(io)?;
        }
        wr.flush().map_err(|e| Error::InvalidInput(format!("csv: {e}")))
    }

    /// Reads `z,h` rows; the first row must be the contact point (h = 0).
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut rows = Vec::new();
        for rec in rd.deserialize::<(f64, f64)>() {
            rows.push(rec.map_err(|e| Error::InvalidInput(format!("csv: {e}")))?);
        }
        let Some(&(z0, h0)) = rows.first() else {
            return Err(Error::InvalidInput("empty profile".into()));
        };
        if h0 != 0.0 {
            return Err(Error::InvalidInput("first profile row must be the contact point h = 0".into()));
        }
        let (z, h) = rows[1..].iter().copied().unzip();
        Self::new(z0, z, h)
    }
}

/// ∫₀^{x₀} (1+u)⁻¹ from a fitted expansion of u (order 2, else 1), or from
/// u(x₀) if no fit is available.
fn head_integral(u: &GridFunction) -> f64 {
    let x0 = u.grid().x(0);
    let limit = FitOptions::default().cond_limit;
    let transported = |n0: u32| {
        extract_expansion(u, n0, 0.1)
            .ok()
            .filter(|f| f.condition_number <= limit)
            .and_then(|f| Series::from_terms(n0, f.terms.iter().map(|t| (t.exponent, t.coefficient))).ok())
            .and_then(|s| transport_series(&s, n0).ok())
    };
    match transported(2).or_else(|| transported(1)) {
        Some(t) => x0 * t.xtilde_factor.eval(x0),
        None => x0 / (1.0 + u.values()[0]),
    }
}

/// Z(x) = Z₀ + ∫₀ˣ (1+u)⁻¹dx′ and h(Z(x)) = x^{3/2} on the grid of u.
pub fn from_hodograph(u: &GridFunction, z0: f64) -> Result<PhysicalProfile> {
    check_guard(u, 0.0)?;
    let grid = *u.grid();
    let x = grid.x_values();
    // dZ = x (1+u)⁻¹ ds
    let g = GridFunction::new(grid, x.iter().zip(u.values()).map(|(x, v)| x / (1.0 + v)).collect())?;
    let dg = d_apply(&g, 1)?;
    let tail = cumulative_integral(g.values(), dg.values(), grid.h());
    let head = z0 + head_integral(u);
    let z = tail.iter().map(|t| head + t).collect();
    let h = x.iter().map(|x| x.powf(1.5)).collect();
    PhysicalProfile::new(z0, z, h)
}

/// Node slopes of y(σ) from the 5 nearest samples, then the Fritsch–Carlson
/// limiter so the cubic Hermite interpolant stays monotone.
fn monotone_slopes(sig: &[f64], y: &[f64]) -> Vec<f64> {
    let n = sig.len();
    let w = 5.min(n);
    let mut m: Vec<f64> = (0..n)
        .map(|i| {
            let start = i.saturating_sub(w / 2).min(n - w);
            let c = fornberg(sig[i], &sig[start..start + w], 1);
            c[1].iter().zip(&y[start..start + w]).map(|(a, b)| a * b).sum::<f64>().max(0.0)
        })
        .collect();
    for k in 0..n - 1 {
        let d = (y[k + 1] - y[k]) / (sig[k + 1] - sig[k]);
        let (a, b) = (m[k] / d, m[k + 1] / d);
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            m[k] = tau * a * d;
            m[k + 1] = tau * b * d;
        }
    }
    m
}

/// u = 1/Z_x − 1 on `grid`, with Z(x) = h⁻¹(x^{3/2}) interpolated by a
/// monotone cubic in σ = ln x and Z_x taken from the interpolant.
pub fn to_hodograph(profile: &PhysicalProfile, grid: LogGrid) -> Result<GridFunction> {
    let sig: Vec<f64> = profile.h.iter().map(|h| h.ln() / 1.5).collect();
    let z = &profile.z;
    let m = monotone_slopes(&sig, z);
    let (lo, hi) = (sig[0], sig[sig.len() - 1]);
    let tol = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
    let mut out = Vec::with_capacity(grid.count);
    for i in 0..grid.count {
        let s = grid.s(i);
        if s < lo - tol || s > hi + tol {
            return Err(Error::OutOfSupport { s, lo, hi });
        }
        let k = sig.partition_point(|&v| v <= s).clamp(1, sig.len() - 1) - 1;
        let hk = sig[k + 1] - sig[k];
        let t = ((s - sig[k]) / hk).clamp(0.0, 1.0);
        let dz = (6.0 * t * t - 6.0 * t) / hk * (z[k] - z[k + 1])
            + (3.0 * t * t - 4.0 * t + 1.0) * m[k]
            + (3.0 * t * t - 2.0 * t) * m[k + 1];
        // Z_x = (dZ/dσ)/x
        out.push(s.exp() / dz - 1.0);
    }
    GridFunction::new(grid, out)
}
