//! Discrete versions of the parabolic norms: the initial-data norm, the
//! solution norm |||u||| and the right-hand-side norm |||f|||₁.
//!
//! Sup-in-time terms are maxima over snapshots; time integrals integrate the
//! power weight exactly against piecewise-linear data. Spatial norms are taken
//! of u minus its fitted partial expansion, on a grid coarsened so that the
//! composed difference operators stay above rounding noise.

use serde::Serialize;

use super::expansion::{extract_expansion_with, FitOptions};
use super::grid::{GridFunction, LogGrid};
use super::norms::{norm_stride, sobolev, sobolev_range, sobolev_sq};
use super::trajectory::{time_diff_series, time_integral_power, Trajectory};
use crate::error::{Error, Result};
use crate::exec;
use crate::exponents::{beta, DerivativeSchedule, WeightSet};

/// Spacing used for a norm with `k` derivatives: (1.37/h)^k·ε stays near 1e-7.
pub fn norm_spacing(k: usize) -> f64 {
    if k == 0 {
        0.0
    } else {
        1.37 * 10f64.powf(-9.0 / k as f64)
    }
}

fn coarse_stride(grid: &LogGrid, k: usize) -> usize {
    let mut stride = norm_stride(grid.h(), norm_spacing(k));
    while stride > 1 && (grid.count - 1) / stride + 1 < 4 * k + 8 {
        stride -= 1;
    }
    stride
}

/// The s-window a k-derivative coarse norm actually integrates over.
pub fn coarse_window(grid: &LogGrid, k: usize) -> Result<(f64, f64)> {
    let g = grid.coarsen(coarse_stride(grid, k))?;
    let (lo, hi) = sobolev_range(g.count, k)?;
    Ok((g.s(lo), g.s(hi)))
}

/// |u|_{k,α} evaluated on the grid coarsened to [`norm_spacing`]`(k)`.
pub fn sobolev_coarse(u: &GridFunction, k: usize, alpha: f64) -> Result<f64> {
    sobolev(&u.coarsen(coarse_stride(u.grid(), k))?, k, alpha)
}

/// (|u0|²_{k+6,−δ} + |u0 − u0₀|²_{k+6,δ})^{1/2}, u0₀ the fitted constant.
pub fn initial_norm(u0: &GridFunction, k: usize, delta: f64) -> Result<f64> {
    let fit = extract_expansion_with(
        u0,
        1,
        &FitOptions {
            delta,
            ..FitOptions::default()
        },
    )?;
    let kk = k + 6;
    let a = sobolev_coarse(u0, kk, -delta)?;
    let b = sobolev_coarse(&u0.offset(-fit.constant()), kk, delta)?;
    Ok((a * a + b * b).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TermKind {
    /// sup_t t^p |∂ₜᵐu − …|²_{ℓ+2, α′+n−3/2}
    Sup,
    /// ∫ t^p |∂ₜ^{m+1}u − …|²_{ℓ, α′+n−2}
    TimeDerivative,
    /// ∫ t^p |∂ₜᵐu − …|²_{k, α′+n−1}
    Space,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormTerm {
    pub alpha: f64,
    pub n: u32,
    pub alpha_prime: f64,
    pub m: u32,
    pub kind: TermKind,
    pub derivatives: usize,
    pub weight: f64,
    pub time_power: f64,
    pub value_sq: f64,
    pub s_window: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormReport {
    pub value: f64,
    pub terms: Vec<NormTerm>,
    pub time_window: (f64, f64),
}

impl NormReport {
    fn from_terms(traj: &Trajectory, terms: Vec<NormTerm>) -> Self {
        NormReport {
            value: terms.iter().map(|t| t.value_sq).sum::<f64>().sqrt(),
            terms,
            time_window: (traj.times[0], traj.times[traj.len() - 1]),
        }
    }
}

/// ∂ₜᵐ of the snapshots and of every fitted coefficient series, m ≤ max_m.
struct Prepared<'a> {
    traj: &'a Trajectory,
    fields: Vec<Vec<GridFunction>>,
    coeffs: Vec<Vec<(f64, Vec<f64>)>>,
}

impl<'a> Prepared<'a> {
    fn new(traj: &'a Trajectory, max_m: usize) -> Result<Self> {
        let fits = traj.fits_or_err()?;
        let exps: Vec<_> = fits[0].terms.iter().map(|t| t.exponent).collect();
        let dt = if max_m > 0 { traj.uniform_dt()? } else { 1.0 };
        let mut fields = Vec::new();
        let mut coeffs = Vec::new();
        for m in 0..=max_m {
            fields.push(traj.time_derivative(m)?);
            let mut per = Vec::new();
            for &e in &exps {
                let c = traj.coefficient_series(e)?;
                let d = if m == 0 { c } else { time_diff_series(&c, dt, m)? };
                per.push((e.value(), d));
            }
            coeffs.push(per);
        }
        Ok(Prepared { traj, fields, coeffs })
    }

    /// |∂ₜᵐu(t_j) − Σ_{keep(i)} dᵐu_i/dtᵐ(t_j) xⁱ|²_{k,w} for every j.
    fn squared(&self, m: usize, k: usize, w: f64, keep: impl Fn(f64) -> bool + Sync) -> Result<Vec<f64>> {
        let grid = *self.traj.grid();
        let stride = coarse_stride(&grid, k);
        let cg = grid.coarsen(stride)?;
        let kept: Vec<&(f64, Vec<f64>)> = self.coeffs[m].iter().filter(|(e, _)| keep(*e)).collect();
        let out: Vec<Result<f64>> = exec::map_range(self.traj.len(), |j| {
            let u = self.fields[m][j].coarsen(stride)?;
            let v: Vec<f64> = u
                .values()
                .iter()
                .enumerate()
                .map(|(i, &val)| {
                    let s = cg.s(i);
                    val - kept.iter().map(|(e, c)| c[j] * (e * s).exp()).sum::<f64>()
                })
                .collect();
            sobolev_sq(&GridFunction::raw(cg, v), k, w)
        });
        out.into_iter().collect()
    }
}

fn to_usize(ell: i64, what: &str) -> Result<usize> {
    usize::try_from(ell).map_err(|_| Error::InvalidInput(format!("negative derivative count {ell} in {what}")))
}

/// |||u|||² summed over (α, N) ∈ 𝒜, α′ = α ± δ ∈ (0, 1), m < N, with the
/// time weight t^{2(α+N)−3}. Needs per-snapshot fits at the schedule's N₀.
pub fn solution_norm(traj: &Trajectory, sched: &DerivativeSchedule, ws: &WeightSet) -> Result<NormReport> {
    let max_n = ws.pairs.iter().map(|w| w.n).max().unwrap_or(0) as usize;
    let prep = Prepared::new(traj, max_n)?;
    let grid = *traj.grid();
    let mut terms = Vec::new();
    for (w, sh) in ws.shifted(sched.delta) {
        let a = w.alpha.to_f64();
        let ap = sh.value(sched.delta);
        let p = 2.0 * (a + w.n as f64) - 3.0;
        for m in 0..w.n {
            let n = w.n - m;
            let ell = to_usize(sched.ell(n, m, sh), "solution_norm")?;
            let nf = n as f64;
            let specs = [
                (TermKind::Sup, m as usize, ell + 2, ap + nf - 1.5),
                (TermKind::TimeDerivative, m as usize + 1, ell, ap + nf - 2.0),
                (TermKind::Space, m as usize, ell + 4, ap + nf - 1.0),
            ];
            for (kind, order, k, wt) in specs {
                let sq = prep.squared(order, k, wt, |e| e < wt - 1e-12)?;
                let weighted: Vec<f64> = traj.times.iter().zip(&sq).map(|(t, v)| t.powf(p) * v).collect();
                let value_sq = match kind {
                    TermKind::Sup => weighted.iter().cloned().fold(0.0, f64::max),
                    _ => time_integral_power(&traj.times, &sq, p)?,
                };
                terms.push(NormTerm {
                    alpha: a,
                    n: w.n,
                    alpha_prime: ap,
                    m,
                    kind,
                    derivatives: k,
                    weight: wt,
                    time_power: p,
                    value_sq,
                    s_window: coarse_window(&grid, k)?,
                });
            }
        }
    }
    Ok(NormReport::from_terms(traj, terms))
}

/// |||f|||₁²: only the spatial terms, with ℓ derivatives, weight α′+n−1 and
/// the expansion sum restricted to β < i (f₀ and f_β stay in).
pub fn rhs_norm(ftraj: &Trajectory, sched: &DerivativeSchedule, ws: &WeightSet) -> Result<NormReport> {
    let max_n = ws.pairs.iter().map(|w| w.n).max().unwrap_or(1) as usize;
    let prep = Prepared::new(ftraj, max_n.saturating_sub(1))?;
    let grid = *ftraj.grid();
    let b = beta();
    let mut terms = Vec::new();
    for (w, sh) in ws.shifted(sched.delta) {
        let a = w.alpha.to_f64();
        let ap = sh.value(sched.delta);
        let p = 2.0 * (a + w.n as f64) - 3.0;
        for m in 0..w.n {
            let n = w.n - m;
            let k = to_usize(sched.ell(n, m, sh), "rhs_norm")?;
            let wt = ap + n as f64 - 1.0;
            let sq = prep.squared(m as usize, k, wt, |e| e > b + 1e-12 && e < wt - 1e-12)?;
            terms.push(NormTerm {
                alpha: a,
                n: w.n,
                alpha_prime: ap,
                m,
                kind: TermKind::Space,
                derivatives: k,
                weight: wt,
                time_power: p,
                value_sq: time_integral_power(&ftraj.times, &sq, p)?,
                s_window: coarse_window(&grid, k)?,
            });
        }
    }
    Ok(NormReport::from_terms(ftraj, terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::weight_set;
    use crate::loggrid::{Cutoff, FitOptions};

    fn closed_form(gamma: f64, alpha: f64, s0: f64, s1: f64) -> f64 {
        let c = 2.0 * (gamma - alpha);
        ((c * s1).exp() - (c * s0).exp()) / c
    }

    #[test]
    fn initial_norm_of_pure_beta_power() {
        // the whole window sits in the cutoff plateau, so u0 = x^β exactly
        let g = LogGrid::new(-8.0, -1.0, 141).unwrap();
        let cut = Cutoff::new(0.5, 5.0).unwrap();
        let u0 = GridFunction::from_fn(g, |s| (beta() * s).exp() * cut.eval_s(s));
        let (k, delta) = (0, 0.05);
        let (s0, s1) = coarse_window(&g, k + 6).unwrap();
        let levels: f64 = (0..=k + 6).map(|l| beta().powi(2 * l as i32)).sum();
        let exact = (levels * (closed_form(beta(), -delta, s0, s1) + closed_form(beta(), delta, s0, s1))).sqrt();
        let got = initial_norm(&u0, k, delta).unwrap();
        assert!((got - exact).abs() < 1e-6 * exact, "{got} {exact}");
    }

    #[test]
    fn initial_norm_trivial_cases() {
        let g = LogGrid::new(-10.0, -1.0, 181).unwrap();
        assert_eq!(initial_norm(&GridFunction::zeros(g), 3, 0.05).unwrap(), 0.0);
        let cut = Cutoff::new(0.5, 5.0).unwrap();
        let c = GridFunction::from_fn(g, |s| 0.3 * cut.eval_s(s));
        let first = sobolev_coarse(&c, 9, -0.05).unwrap();
        let total = initial_norm(&c, 3, 0.05).unwrap();
        assert!((total - first).abs() < 1e-8 * first);
    }

    fn sample_traj(amp: f64) -> Trajectory {
        let g = LogGrid::new(-10.0, 4.0, 281).unwrap();
        let cut = Cutoff::new(0.3, 3.0).unwrap();
        let times: Vec<f64> = (0..21).map(|k| k as f64 * 0.05).collect();
        let snaps = times
            .iter()
            .map(|&t| {
                GridFunction::from_fn(g, |s| {
                    let x = s.exp();
                    amp * (-t).exp() * (0.5 + (beta() * s).exp() + x * x) * cut.eval_s(s)
                })
            })
            .collect();
        Trajectory::new(times, snaps)
            .unwrap()
            .with_fits(1, &FitOptions::default())
            .unwrap()
    }

    #[test]
    fn solution_and_rhs_norms_homogeneous() {
        let sched = DerivativeSchedule::explicit(1, 0.05).unwrap();
        let ws = weight_set(1);
        let a = solution_norm(&sample_traj(1.0), &sched, &ws).unwrap();
        let b = solution_norm(&sample_traj(2.0), &sched, &ws).unwrap();
        assert!(a.value.is_finite() && a.value > 0.0);
        assert!((b.value - 2.0 * a.value).abs() < 1e-8 * a.value);
        let fa = rhs_norm(&sample_traj(1.0), &sched, &ws).unwrap();
        let fb = rhs_norm(&sample_traj(2.0), &sched, &ws).unwrap();
        assert!((fb.value - 2.0 * fa.value).abs() < 1e-8 * fa.value);
        assert!(a.terms.iter().all(|t| t.s_window.0 < t.s_window.1));
    }

    #[test]
    fn zero_trajectory_has_zero_norms() {
        let z = sample_traj(0.0);
        let sched = DerivativeSchedule::explicit(1, 0.05).unwrap();
        let ws = weight_set(1);
        assert_eq!(solution_norm(&z, &sched, &ws).unwrap().value, 0.0);
        assert_eq!(rhs_norm(&z, &sched, &ws).unwrap().value, 0.0);
    }

    #[test]
    fn norms_need_fits() {
        let g = LogGrid::new(-4.0, 2.0, 61).unwrap();
        let t = Trajectory::new(vec![0.0, 1.0, 2.0], vec![GridFunction::zeros(g); 3]).unwrap();
        let sched = DerivativeSchedule::explicit(1, 0.05).unwrap();
        assert!(solution_norm(&t, &sched, &weight_set(1)).is_err());
    }
}
