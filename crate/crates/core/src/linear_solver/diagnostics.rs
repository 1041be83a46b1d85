use nalgebra::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::exponents::{coercivity_set, RealPolynomial};
use crate::loggrid::{
    integrate, poly_of_d, roots_of_d, sobolev, sobolev_coarse, time_integral_power, weighted_l2,
    GridFunction, LogGrid, SmoothFunction, Trajectory,
};

/// Random compactly supported test functions sampled on a refinement family.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchOptions {
    pub trials: usize,
    pub seed: u64,
    /// Grid window in s.
    pub window: (f64, f64),
    /// Support of the random functions, inside the window.
    pub support: (f64, f64),
    /// Point counts, coarse to fine.
    pub levels: Vec<usize>,
    /// Allowed relative change of the statistic between the last two levels.
    pub stability: f64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            trials: 100,
            seed: 7,
            window: (-10.0, 6.0),
            support: (-8.0, 4.0),
            levels: vec![401, 801],
            stability: 0.2,
        }
    }
}

impl BenchOptions {
    fn functions(&self) -> Vec<SmoothFunction> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.trials)
            .map(|_| SmoothFunction::random(&mut rng, self.support.0, self.support.1))
            .collect()
    }

    /// Applies `stat` to every function at every level, reducing with `pick`.
    fn sweep(
        &self,
        stat: impl Fn(&GridFunction) -> Result<f64> + Sync + Send,
        pick: fn(f64, f64) -> f64,
        start: f64,
    ) -> Result<Vec<(usize, f64)>> {
        if self.levels.len() < 2 || self.trials == 0 {
            return Err(Error::InvalidInput("need trials and at least two grid levels".into()));
        }
        let fns = self.functions();
        let mut out = Vec::new();
        for &count in &self.levels {
            let g = LogGrid::new(self.window.0, self.window.1, count)?;
            let vals: Vec<Result<f64>> = exec::map_slice(&fns, |f| stat(&f.sample(g)));
            let mut acc = start;
            for v in vals {
                acc = pick(acc, v?);
            }
            out.push((count, acc));
        }
        Ok(out)
    }
}

fn relative_change(levels: &[(usize, f64)]) -> f64 {
    let n = levels.len();
    let (a, b) = (levels[n - 2].1, levels[n - 1].1);
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn eval_complex(p: &RealPolynomial, z: Complex<f64>) -> Complex<f64> {
    p.coeffs()
        .iter()
        .rev()
        .fold(Complex::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// inf_ξ Re P(α + iξ) / (1 + |α + iξ|² + |α + iξ|⁴), the continuum value of
/// inf (u, P(D)u)_α / |u|²_{2,α}.
pub fn symbol_infimum(p: &RealPolynomial, alpha: f64) -> f64 {
    (0..=20_000)
        .map(|k| {
            let xi = k as f64 * 5e-3;
            let z = Complex::new(alpha, xi);
            let m = z.norm_sqr();
            eval_complex(p, z).re / (1.0 + m + m * m)
        })
        .fold(f64::INFINITY, f64::min)
}

/// (u, P(D)u)_α / |u|²_{2,α} with (u, v)_α = ∫ e^{−2αs} u v ds.
pub fn coercivity_ratio(u: &GridFunction, p: &RealPolynomial, alpha: f64) -> Result<f64> {
    let pu = poly_of_d(u, p)?;
    let g = u.grid();
    let prod: Vec<f64> = (0..g.count)
        .map(|i| (-2.0 * alpha * g.s(i)).exp() * u.values()[i] * pu.values()[i])
        .collect();
    let norm = sobolev(u, 2, alpha)?;
    Ok(integrate(&prod, g.h()) / (norm * norm))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoercivityReport {
    pub alpha: f64,
    pub trials: usize,
    /// α lies in the sufficient set built from P's roots (when P is a real-rooted quartic).
    pub in_sufficient_set: Option<bool>,
    pub symbol_infimum: f64,
    /// (grid points, min ratio) per level.
    pub levels: Vec<(usize, f64)>,
    pub min_ratio: f64,
    pub relative_change: f64,
    pub stable: bool,
    pub passed: bool,
}

pub fn coercivity_check(
    p: &RealPolynomial,
    roots: Option<[f64; 4]>,
    alpha: f64,
    opts: &BenchOptions,
) -> Result<CoercivityReport> {
    let levels = opts.sweep(|u| coercivity_ratio(u, p, alpha), f64::min, f64::INFINITY)?;
    let min_ratio = levels[levels.len() - 1].1;
    let relative_change = relative_change(&levels);
    let stable = relative_change <= opts.stability;
    Ok(CoercivityReport {
        alpha,
        trials: opts.trials,
        in_sufficient_set: roots.map(|r| coercivity_set(r).iter().any(|i| i.contains(alpha))),
        symbol_infimum: symbol_infimum(p, alpha),
        levels,
        min_ratio,
        relative_change,
        stable,
        passed: min_ratio > 0.0 && stable,
    })
}

/// sup_ξ ((1 + ϱ² + ξ²) / ((ϱ − γ)² + ξ²))^{1/2}.
pub fn hardy_constant(gamma: f64, rho: f64) -> f64 {
    (1.0f64).max((1.0 + rho * rho) / (rho - gamma).powi(2)).sqrt()
}

/// |w|_{1,ϱ} / |(D − γ)w|_ϱ.
pub fn hardy_ratio(w: &GridFunction, gamma: f64, rho: f64) -> Result<f64> {
    let dw = roots_of_d(w, &[gamma])?;
    Ok(sobolev(w, 1, rho)? / weighted_l2(&dw, rho))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HardyReport {
    pub gamma: f64,
    pub rho: f64,
    pub analytic: f64,
    pub levels: Vec<(usize, f64)>,
    pub constant: f64,
    pub relative_change: f64,
    pub stable: bool,
}

pub fn hardy_bench(gamma: f64, rho: f64, opts: &BenchOptions) -> Result<HardyReport> {
    if (gamma - rho).abs() < 1e-12 {
        return Err(Error::InvalidInput(format!("Hardy bench needs gamma != rho, got {gamma}")));
    }
    let levels = opts.sweep(|w| hardy_ratio(w, gamma, rho), f64::max, 0.0)?;
    let relative_change = relative_change(&levels);
    Ok(HardyReport {
        gamma,
        rho,
        analytic: hardy_constant(gamma, rho),
        constant: levels[levels.len() - 1].1,
        stable: relative_change <= opts.stability,
        relative_change,
        levels,
    })
}

/// Both sides of the anisotropic bound
/// ∫ t^{2α−2}|v|²_{ℓ,α−½±δ} ≲ ∫|∂ₜv|²_{ℓ,−½±δ} + ∫|v|²_{ℓ+1,½±δ}, α ∈ (½, 1).
pub fn anisotropic_check(traj: &Trajectory, ell: usize, alpha: f64, shift: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.5 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("alpha = {alpha} outside (1/2, 1)")));
    }
    let dv = traj.time_derivative(1)?;
    let sq = |u: &GridFunction, k: usize, w: f64| sobolev_coarse(u, k, w).map(|x| x * x);
    let lhs_t: Vec<f64> = traj
        .snapshots
        .iter()
        .map(|v| sq(v, ell, alpha - 0.5 + shift))
        .collect::<Result<_>>()?;
    let d_t: Vec<f64> = dv.iter().map(|v| sq(v, ell, -0.5 + shift)).collect::<Result<_>>()?;
    let s_t: Vec<f64> = traj
        .snapshots
        .iter()
        .map(|v| sq(v, ell + 1, 0.5 + shift))
        .collect::<Result<_>>()?;
    let lhs = time_integral_power(&traj.times, &lhs_t, 2.0 * alpha - 2.0)?;
    let rhs = time_integral_power(&traj.times, &d_t, 0.0)? + time_integral_power(&traj.times, &s_t, 0.0)?;
    Ok((lhs, rhs))
}

/// Both sides of the integrated maximal-regularity estimate, term by term.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaxRegReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// sup t^{2σ}|u|²_{ℓ+2,α−½}
    pub sup_term: f64,
    /// ∫ t^{2σ}|∂ₜu|²_{ℓ,α−1}
    pub dt_term: f64,
    /// ∫ t^{2σ}|u|²_{ℓ+4,α}
    pub space_term: f64,
    /// δ_{σ,0}|u⁽⁰⁾|²_{ℓ+2,α−½}
    pub initial_term: f64,
    /// ∫ t^{2σ}|f|²_{ℓ,α}
    pub forcing_term: f64,
    /// 2σ∫ t^{2σ−1}|u|²_{ℓ+2,α−½}
    pub remnant_term: f64,
    /// (grid points, stored dt, t_end)
    pub resolution: (usize, f64, f64),
}

pub fn maxreg_diagnostic(
    traj: &Trajectory,
    f: &Trajectory,
    ell: usize,
    alpha: f64,
    sigma: f64,
) -> Result<MaxRegReport> {
    if traj.times != f.times {
        return Err(Error::InvalidInput("u and f must share the time mesh".into()));
    }
    if sigma < 0.0 {
        return Err(Error::InvalidInput(format!("sigma = {sigma} must be nonnegative")));
    }
    let dt = traj.uniform_dt()?;
    let du = traj.time_derivative(1)?;
    let sq = |u: &GridFunction, k: usize, w: f64| sobolev_coarse(u, k, w).map(|x| x * x);
    let per = |us: &[GridFunction], k: usize, w: f64| -> Result<Vec<f64>> {
        exec::map_slice(us, |u| sq(u, k, w)).into_iter().collect()
    };
    let times = &traj.times;
    let mid = per(&traj.snapshots, ell + 2, alpha - 0.5)?;
    let p = 2.0 * sigma;
    let sup_term = times
        .iter()
        .zip(&mid)
        .map(|(t, v)| if p == 0.0 { *v } else { t.powf(p) * v })
        .fold(0.0, f64::max);
    let dt_term = time_integral_power(times, &per(&du, ell, alpha - 1.0)?, p)?;
    let space_term = time_integral_power(times, &per(&traj.snapshots, ell + 4, alpha)?, p)?;
    let initial_term = if sigma == 0.0 { mid[0] } else { 0.0 };
    let forcing_term = time_integral_power(times, &per(&f.snapshots, ell, alpha)?, p)?;
    let remnant_term = if sigma == 0.0 {
        0.0
    } else {
        2.0 * sigma * time_integral_power(times, &mid, p - 1.0)?
    };
    let lhs = sup_term + dt_term + space_term;
    let rhs = initial_term + forcing_term + remnant_term;
    Ok(MaxRegReport {
        name: format!("maxreg(l={ell}, alpha={alpha}, sigma={sigma})"),
        lhs,
        rhs,
        ratio: if rhs > 0.0 { lhs / rhs } else if lhs == 0.0 { 0.0 } else { f64::INFINITY },
        sup_term,
        dt_term,
        space_term,
        initial_term,
        forcing_term,
        remnant_term,
        resolution: (traj.grid().count, dt, times[times.len() - 1]),
    })
}
