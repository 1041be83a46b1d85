use serde::Serialize;

use super::picard::{picard_solve, PicardConfig};
use crate::error::{Error, Result};
use crate::exec;
use crate::exponents::{lattice, DerivativeSchedule, Exponent, WeightSet};
use crate::loggrid::{
    d_power, initial_norm, solution_norm, sup_norm, time_diff_series, time_integral_power,
    GridFunction, NormReport, Trajectory,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AprioriReport {
    pub lhs: f64,
    pub rhs: f64,
    /// lhs / rhs, defined as 1 when both vanish.
    pub ratio: f64,
    pub solution: NormReport,
}

/// solution_norm(traj) against initial_norm(u⁽⁰⁾). `traj` needs fits.
pub fn apriori_check(
    traj: &Trajectory,
    u0: &GridFunction,
    sched: &DerivativeSchedule,
    ws: &WeightSet,
) -> Result<AprioriReport> {
    let solution = solution_norm(traj, sched, ws)?;
    let rhs = initial_norm(u0, sched.k.max(0) as usize, sched.delta)?;
    let lhs = solution.value;
    let ratio = if lhs == 0.0 && rhs == 0.0 {
        1.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    };
    Ok(AprioriReport { lhs, rhs, ratio, solution })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayEntry {
    /// None for the remainder.
    pub exponent: Option<Exponent>,
    pub target: f64,
    /// Least-squares slope of ln|·| against ln t; None when indeterminate.
    pub slope: Option<f64>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayReport {
    pub n0: u32,
    pub window: (f64, f64),
    pub samples: usize,
    pub coefficients: Vec<DecayEntry>,
    pub remainder: DecayEntry,
}

impl DecayReport {
    pub fn slope_of(&self, e: Exponent) -> Option<f64> {
        self.coefficients
            .iter()
            .find(|c| c.exponent == Some(e))
            .and_then(|c| c.slope)
    }
}

fn loglog_slope(t: &[f64], v: &[f64]) -> f64 {
    let x: Vec<f64> = t.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = v.iter().map(|v| v.abs().ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Magnitudes below this count as noise when no standard error is larger.
pub const NOISE_FLOOR: f64 = 1e-14;

/// Log-log slopes of |u_i(t)| and of the fitted remainder norm over [t0, t1].
pub fn decay_report(traj: &Trajectory, n0: u32, window: (f64, f64)) -> Result<DecayReport> {
    let (t0, t1) = window;
    if !(t0 > 0.0 && t1 >= 4.0 * t0) {
        return Err(Error::InvalidInput(format!(
            "decay window ({t0}, {t1}) needs t0 > 0 and t1 >= 4 t0"
        )));
    }
    let fits = traj.fits_or_err()?;
    let idx: Vec<usize> = (0..traj.len())
        .filter(|&j| traj.times[j] >= t0 - 1e-12 && traj.times[j] <= t1 + 1e-12)
        .collect();
    if idx.len() < 3 {
        return Err(Error::InsufficientSnapshots { needed: 3, have: idx.len() });
    }
    let times: Vec<f64> = idx.iter().map(|&j| traj.times[j]).collect();
    let entry = |exponent: Option<Exponent>, target: f64, vals: Vec<f64>, floor: Vec<f64>| {
        let noisy = vals.iter().zip(&floor).any(|(v, f)| v.abs() <= f.max(NOISE_FLOOR));
        if noisy {
            DecayEntry {
                exponent,
                target,
                slope: None,
                note: Some("below noise floor".into()),
            }
        } else {
            DecayEntry {
                exponent,
                target,
                slope: Some(loglog_slope(&times, &vals)),
                note: None,
            }
        }
    };
    let mut coefficients = Vec::new();
    for e in lattice(n0).entries.iter() {
        let vals: Vec<f64> = idx.iter().map(|&j| fits[j].coefficient(*e).unwrap_or(0.0)).collect();
        let floor: Vec<f64> = idx
            .iter()
            .map(|&j| {
                fits[j]
                    .terms
                    .iter()
                    .find(|t| t.exponent == *e)
                    .map_or(0.0, |t| 3.0 * t.std_error)
            })
            .collect();
        coefficients.push(entry(Some(*e), -e.value(), vals, floor));
    }
    let rem: Vec<f64> = idx.iter().map(|&j| fits[j].remainder_norm).collect();
    let remainder = entry(None, -(n0 as f64), rem, vec![0.0; idx.len()]);
    Ok(DecayReport {
        n0,
        window,
        samples: idx.len(),
        coefficients,
        remainder,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoefficientBound {
    pub label: String,
    pub lhs: f64,
    /// lhs / |||u|||².
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoefficientDiagnostics {
    pub solution_norm_sq: f64,
    pub bounds: Vec<CoefficientBound>,
}

impl CoefficientDiagnostics {
    pub fn max_ratio(&self) -> f64 {
        self.bounds.iter().map(|b| b.ratio).fold(0.0, f64::max)
    }
}

/// Discrete coefficient and C⁰ bounds, each divided by |||u|||²:
/// ∫ t^{2i+2m−1}|dᵐu_i/dtᵐ|² dt for i ∈ K_{N₀}, m < N₀ with i + m > 0 (for
/// i = m = 0 the weight t^{−1} is not integrable), and
/// sup_t t^{2m} sup_x |∂ₜᵐDˡ(u − u₀)|² for l ≤ 2, m < N₀.
pub fn coefficient_diagnostics(
    traj: &Trajectory,
    sched: &DerivativeSchedule,
    ws: &WeightSet,
) -> Result<CoefficientDiagnostics> {
    let norm_sq = solution_norm(traj, sched, ws)?.value.powi(2);
    let ratio = |lhs: f64| if norm_sq > 0.0 { lhs / norm_sq } else { 0.0 };
    let dt = traj.uniform_dt()?;
    let n0 = sched.n0;
    let mut bounds = Vec::new();
    for e in lattice(n0).entries.iter() {
        let series = traj.coefficient_series(*e)?;
        for m in 0..n0 {
            let p = 2.0 * e.value() + 2.0 * m as f64 - 1.0;
            if p <= -1.0 + 1e-12 {
                continue;
            }
            let d = if m == 0 { series.clone() } else { time_diff_series(&series, dt, m as usize)? };
            let sq: Vec<f64> = d.iter().map(|v| v * v).collect();
            let lhs = time_integral_power(&traj.times, &sq, p)?;
            bounds.push(CoefficientBound {
                label: format!("coeff i={e} m={m}"),
                lhs,
                ratio: ratio(lhs),
            });
        }
    }
    let u0_series = traj.coefficient_series(Exponent::ZERO)?;
    for m in 0..n0 as usize {
        let du = traj.time_derivative(m)?;
        let d0 = if m == 0 { u0_series.clone() } else { time_diff_series(&u0_series, dt, m)? };
        for l in 0..=2usize {
            let vals: Vec<f64> = exec::map_range(traj.len(), |j| {
                let v = du[j].offset(-d0[j]);
                let dv = if l == 0 { Ok(v) } else { d_power(&v, l) };
                dv.map(|dv| traj.times[j].powi(2 * m as i32) * sup_norm(&trim(&dv, 2 * l)).powi(2))
            })
            .into_iter()
            .collect::<Result<_>>()?;
            let lhs = vals.iter().cloned().fold(0.0, f64::max);
            bounds.push(CoefficientBound {
                label: format!("c0 m={m} l={l}"),
                lhs,
                ratio: ratio(lhs),
            });
        }
    }
    Ok(CoefficientDiagnostics {
        solution_norm_sq: norm_sq,
        bounds,
    })
}

/// Drops `k` points at each end (one-sided closure rows).
fn trim(u: &GridFunction, k: usize) -> GridFunction {
    let v = u.values();
    let mut out = v.to_vec();
    out[..k].fill(0.0);
    let n = out.len();
    out[n - k..].fill(0.0);
    GridFunction::new(*u.grid(), out).expect("same length")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepEntry {
    pub epsilon: f64,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<f64>,
    pub initial_norm: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub entries: Vec<SweepEntry>,
    /// Smaller ε never needed more iterations.
    pub monotone: bool,
}

/// Picard runs of ε·shape for each ε, in parallel across runs.
pub fn epsilon_sweep(shape: &GridFunction, eps: &[f64], cfg: &PicardConfig) -> SweepReport {
    let entries: Vec<SweepEntry> = exec::map_slice(eps, |&e| match picard_solve(&shape.scale(e), cfg) {
        Ok(r) => SweepEntry {
            epsilon: e,
            iterations: r.iterations,
            converged: r.converged,
            history: r.history,
            initial_norm: r.initial_norm,
            error: None,
        },
        Err(err) => SweepEntry {
            epsilon: e,
            iterations: 0,
            converged: false,
            history: Vec::new(),
            initial_norm: f64::NAN,
            error: Some(err.to_string()),
        },
    });
    let mut sorted: Vec<&SweepEntry> = entries.iter().filter(|e| e.converged).collect();
    sorted.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
    let monotone = sorted.windows(2).all(|w| w[0].iterations <= w[1].iterations);
    SweepReport { entries, monotone }
}
