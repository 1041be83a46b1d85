use super::grid::GridFunction;
use super::stencil::d_power;
use crate::error::{Error, Result};

/// ∫ g ds over the uniform grid: trapezoid plus the h²/12 end correction,
/// with endpoint slopes from one-sided 5-point differences.
pub fn integrate(g: &[f64], h: f64) -> f64 {
    let n = g.len();
    if n < 2 {
        return 0.0;
    }
    let trap = h * (g.iter().sum::<f64>() - 0.5 * (g[0] + g[n - 1]));
    if n < 6 {
        return trap;
    }
    let d0 = (-25.0 * g[0] + 48.0 * g[1] - 36.0 * g[2] + 16.0 * g[3] - 3.0 * g[4]) / (12.0 * h);
    let a = n - 1;
    let d1 = (25.0 * g[a] - 48.0 * g[a - 1] + 36.0 * g[a - 2] - 16.0 * g[a - 3] + 3.0 * g[a - 4])
        / (12.0 * h);
    trap - h * h / 12.0 * (d1 - d0)
}

/// Cumulative version of [`integrate`]: out[j] = ∫_{s_0}^{s_j} g, using
/// per-interval corrected trapezoid with nodal slopes `dg`.
pub fn cumulative_integral(g: &[f64], dg: &[f64], h: f64) -> Vec<f64> {
    let mut out = vec![0.0; g.len()];
    for j in 1..g.len() {
        out[j] = out[j - 1] + 0.5 * h * (g[j - 1] + g[j]) - h * h / 12.0 * (dg[j] - dg[j - 1]);
    }
    out
}

fn weighted_sq_range(u: &GridFunction, alpha: f64, lo: usize, hi: usize) -> f64 {
    let g = u.grid();
    let vals: Vec<f64> = (lo..=hi)
        .map(|i| (-2.0 * alpha * g.s(i)).exp() * u.values()[i] * u.values()[i])
        .collect();
    integrate(&vals, g.h()).max(0.0)
}

/// Squared weighted L² norm, ∫ e^{−2αs} u² ds over the grid window.
pub fn weighted_l2_sq(u: &GridFunction, alpha: f64) -> f64 {
    weighted_sq_range(u, alpha, 0, u.len() - 1)
}

/// |u|_α = (∫ e^{−2αs} u² ds)^{1/2}.
pub fn weighted_l2(u: &GridFunction, alpha: f64) -> f64 {
    weighted_l2_sq(u, alpha).sqrt()
}

/// Index range `[lo, hi]` over which `sobolev(_, k, _)` integrates. Every
/// application of D_h pulls boundary-row error two points inward, and that
/// error grows like (c/h)^k under composition, so the outer 2k points at
/// each end are dropped.
pub fn sobolev_range(len: usize, k: usize) -> Result<(usize, usize)> {
    let m = 2 * k;
    if len < 2 * m + 8 {
        return Err(Error::GridTooSmall { count: len, needed: 2 * m + 8 });
    }
    Ok((m, len - 1 - m))
}

/// Σ_{ℓ ≤ k} |Dˡu|²_α with D = D_h composed, over [`sobolev_range`].
pub fn sobolev_sq(u: &GridFunction, k: usize, alpha: f64) -> Result<f64> {
    let (lo, hi) = sobolev_range(u.len(), k)?;
    let mut total = weighted_sq_range(u, alpha, lo, hi);
    let mut v = u.clone();
    for _ in 0..k {
        v = d_power(&v, 1)?;
        total += weighted_sq_range(&v, alpha, lo, hi);
    }
    Ok(total)
}

/// |u|_{k,α}.
pub fn sobolev(u: &GridFunction, k: usize, alpha: f64) -> Result<f64> {
    Ok(sobolev_sq(u, k, alpha)?.sqrt())
}

pub fn sup_norm(u: &GridFunction) -> f64 {
    u.values().iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Stride that brings the spacing of `u`'s grid up to about `target_h`.
/// Norms with many derivatives are evaluated on that coarser copy: each
/// D_h multiplies rounding noise by roughly 1.4/h.
pub fn norm_stride(h: f64, target_h: f64) -> usize {
    if target_h <= h {
        1
    } else {
        (target_h / h).round().max(1.0) as usize
    }
}
