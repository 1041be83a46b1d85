use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::{cascade_polynomials, q_polynomial, QBeta};
use crate::loggrid::{integrate, roots_of_d, GridFunction, LogGrid, Trajectory};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CascadeOptions {
    /// θ of the run, so the time operators match the scheme exactly.
    pub theta: f64,
    /// The residual is measured in |·|_{0, α′+n−1}.
    pub alpha_prime: f64,
    /// s-window of the norm; keeps the composed stencils off the closures.
    pub window: (f64, f64),
    /// Number of time levels sampled.
    pub samples: usize,
}

impl Default for CascadeOptions {
    fn default() -> Self {
        CascadeOptions {
            theta: 0.5,
            alpha_prime: 0.55,
            window: (-8.0, 4.0),
            samples: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CascadeResidual {
    pub n: u32,
    pub m: u32,
    /// Max over sampled times of ‖R‖ / (‖x∂ₜw‖ + ‖p(D−n)w‖ + ‖r‖ + ‖x q_n(D)∂ₜv‖).
    pub residual: f64,
    pub per_time: Vec<(f64, f64)>,
}

fn to_f64(v: &[QBeta]) -> Vec<f64> {
    v.iter().map(|q| q.to_f64()).collect()
}

/// Relative residual of (x∂ₜ + p(D−n))∂ₜᵐw⁽ⁿ⁾ = ∂ₜᵐr⁽ⁿ⁾ + x qₙ(D)∂ₜ^{m+1}v⁽ⁿ⁾,
/// with w, v, r built from every stored step of a θ-scheme run.
///
/// The time operators are the scheme's own: ∂ₜ is the step difference and
/// values are θ-averages over the step, with m further forward differences.
/// The residual is then purely the spatial commutator error of D_h with x.
pub fn cascade_verify(
    u: &Trajectory,
    f: &Trajectory,
    n: u32,
    m: u32,
    opts: &CascadeOptions,
) -> Result<CascadeResidual> {
    if n == 0 {
        return Err(Error::InvalidInput("cascade index n starts at 1".into()));
    }
    if u.times != f.times {
        return Err(Error::InvalidInput("u and f must share the time mesh".into()));
    }
    let dt = u.uniform_dt()?;
    let needed = m as usize + 3;
    if u.len() < needed {
        return Err(Error::InsufficientSnapshots { needed, have: u.len() });
    }
    let grid = *u.grid();
    let th = opts.theta;
    let vals = |t: &Trajectory| -> Vec<Vec<f64>> {
        t.snapshots.iter().map(|s| s.values().to_vec()).collect()
    };
    let (uu, ff) = (vals(u), vals(f));
    let comb = |a: &[f64], b: &[f64], x: f64, y: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(p, q)| x * p + y * q).collect()
    };
    let mut ub: Vec<Vec<f64>> = uu.windows(2).map(|w| comb(&w[1], &w[0], th, 1.0 - th)).collect();
    let mut ud: Vec<Vec<f64>> = uu.windows(2).map(|w| comb(&w[1], &w[0], 1.0 / dt, -1.0 / dt)).collect();
    let mut fb: Vec<Vec<f64>> = ff.windows(2).map(|w| comb(&w[1], &w[0], th, 1.0 - th)).collect();
    for _ in 0..m {
        let diff = |v: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            v.windows(2).map(|w| comb(&w[1], &w[0], 1.0 / dt, -1.0 / dt)).collect()
        };
        ub = diff(&ub);
        ud = diff(&ud);
        fb = diff(&fb);
    }
    let cp = cascade_polynomials(n);
    let (wr, vr, rr) = (to_f64(&cp.w_roots), to_f64(&cp.v_roots), to_f64(&cp.r_roots));
    let pn: Vec<f64> = crate::exponents::p_roots_f64(n as i64).to_vec();
    let q = q_polynomial(n).to_real();
    let x = grid.x_values();
    let lo = grid.index_at_or_below(opts.window.0);
    let hi = grid.index_at_or_below(opts.window.1);
    if hi <= lo + 8 {
        return Err(Error::InvalidInput("cascade window too narrow".into()));
    }
    let weight = opts.alpha_prime + n as f64 - 1.0;
    let norm = |v: &[f64]| -> f64 {
        let g: Vec<f64> = (lo..=hi)
            .map(|i| (-2.0 * weight * grid.s(i)).exp() * v[i] * v[i])
            .collect();
        integrate(&g, grid.h()).max(0.0).sqrt()
    };
    let gf = |v: &[f64]| GridFunction::new(grid, v.to_vec());
    let count = ub.len();
    let every = (count / opts.samples.max(1)).max(1);
    let mut per_time = Vec::new();
    for j in (0..count).step_by(every) {
        let wb = roots_of_d(&gf(&ub[j])?, &wr)?;
        let wd = roots_of_d(&gf(&ud[j])?, &wr)?;
        let vd = roots_of_d(&gf(&ud[j])?, &vr)?;
        let r = roots_of_d(&gf(&fb[j])?, &rr)?;
        let t1: Vec<f64> = wd.values().iter().zip(&x).map(|(a, b)| a * b).collect();
        let t2 = roots_of_d(&wb, &pn)?;
        let t4v = if q.is_zero() {
            GridFunction::zeros(grid)
        } else {
            crate::loggrid::poly_of_d(&vd, &q)?
        };
        let t4: Vec<f64> = t4v.values().iter().zip(&x).map(|(a, b)| a * b).collect();
        let res: Vec<f64> = (0..grid.count)
            .map(|i| t1[i] + t2.values()[i] - r.values()[i] - t4[i])
            .collect();
        let denom = norm(&t1) + norm(t2.values()) + norm(r.values()) + norm(&t4);
        let rel = if denom > 0.0 { norm(&res) / denom } else { 0.0 };
        let t = u.times[j] + th * dt + m as f64 * dt * 0.5;
        per_time.push((t, rel));
    }
    let residual = per_time.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(CascadeResidual {
        n,
        m,
        residual,
        per_time,
    })
}

/// Linear MMS run storing every step, with its forcing sampled alongside.
/// The n = 2 operators compose 14 factors of D_h, so rounding noise takes
/// over above N ≈ 300 on [−12, 6]; N ∈ {128, 192, 256} is the study family.
pub fn cascade_run(count: usize, dt: f64, t_end: f64) -> Result<(Trajectory, Trajectory)> {
    use super::mms::Manufactured;
    use super::stepper::{sample_source, BoundaryConfig, FarField, FnSource, Stepper};
    use std::sync::Arc;
    let m = Manufactured::new(2.0, 1.0, &crate::exponents::p_roots_f64(0));
    let grid = LogGrid::new(-12.0, 6.0, count)?;
    let st = Stepper::new(&m.poly(), grid, dt, 0.5, BoundaryConfig::default())?;
    let mm = m.clone();
    let src = FnSource(move |t: f64, x: f64| mm.forcing(t, x));
    let mm = m.clone();
    let far = FarField::Given(Arc::new(move |t, x| mm.exact(t, x)));
    let u = st.run(&m.sample(0.0, grid), &src, &far, t_end, 1)?;
    let f = sample_source(&src, &u.times, &grid)?;
    Ok((u, f))
}
