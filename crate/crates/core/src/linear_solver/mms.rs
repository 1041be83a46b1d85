use std::sync::Arc;

use serde::Serialize;

use super::stepper::{BoundaryConfig, FarField, FnSource, Stepper};
use crate::error::{Error, Result};
use crate::exec;
use crate::exponents::RealPolynomial;
use crate::loggrid::{GridFunction, LogGrid};

/// u*(t, x) = e^{−λt} x^a e^{−x} for x∂ₜu + P(D)u = f, P = ∏(ζ − rᵢ).
///
/// With g_k = x^{a+k} e^{−x} one has D g_k = (a+k) g_k − g_{k+1} and
/// x g_k = g_{k+1}, so f is a finite sum of g_k in closed form.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Manufactured {
    pub a: f64,
    pub rate: f64,
    pub roots: Vec<f64>,
    coeffs: Vec<f64>,
}

impl Manufactured {
    pub fn new(a: f64, rate: f64, roots: &[f64]) -> Self {
        let mut c = vec![1.0];
        for &r in roots {
            let mut next = vec![0.0; c.len() + 1];
            for (k, &ck) in c.iter().enumerate() {
                next[k] += (a + k as f64 - r) * ck;
                next[k + 1] -= ck;
            }
            c = next;
        }
        // −λ x g_0 = −λ g_1
        if c.len() < 2 {
            c.push(0.0);
        }
        c[1] -= rate;
        Manufactured {
            a,
            rate,
            roots: roots.to_vec(),
            coeffs: c,
        }
    }

    pub fn poly(&self) -> RealPolynomial {
        RealPolynomial::from_roots(&self.roots)
    }

    pub fn exact(&self, t: f64, x: f64) -> f64 {
        (-self.rate * t).exp() * x.powf(self.a) * (-x).exp()
    }

    pub fn forcing(&self, t: f64, x: f64) -> f64 {
        let e = (-self.rate * t).exp() * x.powf(self.a) * (-x).exp();
        let poly = self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
        e * poly
    }

    pub fn sample(&self, t: f64, grid: LogGrid) -> GridFunction {
        GridFunction::from_x_fn(grid, |x| self.exact(t, x))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MmsLevel {
    pub count: usize,
    pub dt: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MmsReport {
    pub theta: f64,
    pub t_end: f64,
    pub levels: Vec<MmsLevel>,
    /// log₂ of successive error ratios.
    pub orders: Vec<f64>,
    pub min_order: f64,
}

/// Max-norm error at `t_end` of one run.
pub fn mms_error(
    m: &Manufactured,
    grid: LogGrid,
    dt: f64,
    theta: f64,
    t_end: f64,
) -> Result<f64> {
    let st = Stepper::new(&m.poly(), grid, dt, theta, BoundaryConfig::default())?;
    let mm = m.clone();
    let src = FnSource(move |t: f64, x: f64| mm.forcing(t, x));
    let mm = m.clone();
    let far = FarField::Given(Arc::new(move |t, x| mm.exact(t, x)));
    let traj = st.run(&m.sample(0.0, grid), &src, &far, t_end, usize::MAX)?;
    let exact = m.sample(t_end, grid);
    Ok(traj
        .final_snapshot()
        .values()
        .iter()
        .zip(exact.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Runs each (count, dt) level on [s_min, s_max] (levels in parallel).
pub fn mms_convergence(
    m: &Manufactured,
    window: (f64, f64),
    levels: &[(usize, f64)],
    theta: f64,
    t_end: f64,
) -> Result<MmsReport> {
    if levels.len() < 2 {
        return Err(Error::InvalidInput("need at least two refinement levels".into()));
    }
    let errs: Vec<Result<MmsLevel>> = exec::map_slice(levels, |&(count, dt)| {
        let g = LogGrid::new(window.0, window.1, count)?;
        Ok(MmsLevel {
            count,
            dt,
            error: mms_error(m, g, dt, theta, t_end)?,
        })
    });
    let levels: Vec<MmsLevel> = errs.into_iter().collect::<Result<_>>()?;
    let orders: Vec<f64> = levels
        .windows(2)
        .map(|w| (w[0].error / w[1].error).log2())
        .collect();
    let min_order = orders.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(MmsReport {
        theta,
        t_end,
        levels,
        orders,
        min_order,
    })
}

/// Default study: a = 2, λ = 1, P = p, s ∈ [−12, 6], T = 1,
/// (N, dt) ∈ {(256, 0.04), (512, 0.02), (1024, 0.01)}.
pub fn default_mms_study(theta: f64) -> Result<MmsReport> {
    let m = Manufactured::new(2.0, 1.0, &crate::exponents::p_roots_f64(0));
    mms_convergence(
        &m,
        (-12.0, 6.0),
        &[(256, 0.04), (512, 0.02), (1024, 0.01)],
        theta,
        1.0,
    )
}
