use std::io::{self, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::{default_delta, p_exact, DerivativeSchedule};
use crate::linear_solver::{BoundaryConfig, FarField, SnapshotSource, Stepper, ZeroSource};
use crate::loggrid::{initial_norm, sup_norm, FitOptions, GridFunction, LogGrid, Trajectory};
use crate::operators::{check_guard, nonlinearity_with_guard, DEFAULT_GUARD};

/// Parameters of each linear sub-solve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearConfig {
    pub dt: f64,
    pub t_end: f64,
    pub theta: f64,
    pub stride: usize,
    pub boundary: BoundaryConfig,
}

impl Default for LinearConfig {
    fn default() -> Self {
        LinearConfig {
            dt: 1e-3,
            t_end: 10.0,
            theta: 1.0,
            stride: 10,
            boundary: BoundaryConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PicardConfig {
    pub n0: u32,
    /// Absolute stopping tolerance on max_t sup_x |u⁽ᵛ⁺¹⁾ − u⁽ᵛ⁾|.
    pub tol: f64,
    /// Also stop once the difference is below rel_tol · max_t sup_x |u|.
    pub rel_tol: f64,
    pub max_iter: usize,
    pub linear: LinearConfig,
    pub fit: FitOptions,
    /// u⁽ᵛ⁺¹⁾ ← ω·S[u⁽⁰⁾, 𝓝(u⁽ᵛ⁾)] + (1 − ω)·u⁽ᵛ⁾.
    pub damping: f64,
    /// Largest accepted initial_norm(u⁽⁰⁾).
    pub smallness: f64,
    /// min(1 + u) must stay above this.
    pub guard: f64,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig {
            n0: 1,
            tol: 1e-9,
            rel_tol: 1e-6,
            max_iter: 30,
            linear: LinearConfig::default(),
            fit: FitOptions::default(),
            damping: 1.0,
            smallness: 0.05,
            guard: DEFAULT_GUARD,
        }
    }
}

impl PicardConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if !(self.tol > 0.0) || self.rel_tol < 0.0 {
            return bad(format!("tol = {}, rel_tol = {} must be positive", self.tol, self.rel_tol));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1".into());
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad(format!("damping = {} outside (0, 1]", self.damping));
        }
        if self.n0 == 0 {
            return bad("N0 must be at least 1".into());
        }
        Ok(())
    }

    pub fn schedule(&self) -> Result<DerivativeSchedule> {
        let delta = default_delta(self.n0);
        DerivativeSchedule::explicit(self.n0, delta)
    }
}

#[derive(Clone, Debug)]
pub struct PicardResult {
    pub trajectory: Trajectory,
    /// Number of updates u⁽ᵛ⁾ → u⁽ᵛ⁺¹⁾ performed.
    pub iterations: usize,
    pub converged: bool,
    /// max_t sup_x |u⁽ᵛ⁺¹⁾ − u⁽ᵛ⁾| per update.
    pub history: Vec<f64>,
    pub initial_norm: f64,
}

impl PicardResult {
    /// Successive difference ratios d_{v+1}/d_v.
    pub fn contraction_ratios(&self) -> Vec<f64> {
        self.history
            .windows(2)
            .filter(|w| w[0] > 0.0)
            .map(|w| w[1] / w[0])
            .collect()
    }

    pub fn write_history_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "iteration,difference")?;
        for (k, d) in self.history.iter().enumerate() {
            writeln!(w, "{},{d}", k + 1)?;
        }
        Ok(())
    }
}

/// ε-free shape of the standard small data: exp(−(s − c)²/(2w²)) with c = −2,
/// w = 2. Its high derivatives stay O(1), unlike compactly supported bumps.
pub fn standard_bump(grid: LogGrid) -> GridFunction {
    let (c, w) = (-2.0, 2.0);
    GridFunction::from_fn(grid, |s| (-(s - c) * (s - c) / (2.0 * w * w)).exp())
}

/// max over snapshots of sup_x |a − b|.
pub fn max_difference(a: &Trajectory, b: &Trajectory) -> f64 {
    a.snapshots
        .iter()
        .zip(&b.snapshots)
        .map(|(x, y)| sup_norm(&(x - y)))
        .fold(0.0, f64::max)
}

/// 𝓝(u) at every stored snapshot.
pub fn nonlinear_forcing(u: &Trajectory, guard: f64) -> Result<Trajectory> {
    let snaps: Vec<GridFunction> = u
        .snapshots
        .iter()
        .map(|s| nonlinearity_with_guard(s, guard))
        .collect::<Result<_>>()?;
    Trajectory::new(u.times.clone(), snaps)
}

/// One Picard map: S[u⁽⁰⁾, 𝓝(u)] with 𝓝 linear in t between snapshots.
pub fn picard_map(stepper: &Stepper, u0: &GridFunction, u: &Trajectory, cfg: &PicardConfig) -> Result<Trajectory> {
    let src = SnapshotSource::new(&nonlinear_forcing(u, cfg.guard)?);
    stepper.run(u0, &src, &FarField::Initial, cfg.linear.t_end, cfg.linear.stride)
}

fn stepper_for(u0: &GridFunction, cfg: &PicardConfig) -> Result<Stepper> {
    Stepper::new(
        &p_exact().to_real(),
        *u0.grid(),
        cfg.linear.dt,
        cfg.linear.theta,
        cfg.linear.boundary.clone(),
    )
}

/// u⁽¹⁾ = S[u⁽⁰⁾, 0], u⁽ᵛ⁺¹⁾ = S[u⁽⁰⁾, 𝓝(u⁽ᵛ⁾)] until the difference drops
/// below `tol` or `rel_tol` times the size of u. Three consecutive growths
/// of the difference, above 10·tol, abort.
pub fn picard_solve(u0: &GridFunction, cfg: &PicardConfig) -> Result<PicardResult> {
    cfg.validate()?;
    check_guard(u0, cfg.guard)?;
    let sched = cfg.schedule()?;
    let norm0 = initial_norm(u0, sched.k.max(0) as usize, sched.delta)?;
    if norm0 > cfg.smallness {
        return Err(Error::NotSmall {
            norm: norm0,
            threshold: cfg.smallness,
        });
    }
    let stepper = stepper_for(u0, cfg)?;
    let mut u = stepper.run(u0, &ZeroSource, &FarField::Initial, cfg.linear.t_end, cfg.linear.stride)?;
    let mut history = Vec::new();
    let mut growths = 0;
    let mut converged = false;
    while history.len() < cfg.max_iter {
        let mut next = picard_map(&stepper, u0, &u, cfg)?;
        if cfg.damping < 1.0 {
            let w = cfg.damping;
            next.snapshots = next
                .snapshots
                .iter()
                .zip(&u.snapshots)
                .map(|(a, b)| a.axpby(w, b, 1.0 - w))
                .collect::<Result<_>>()?;
        }
        let d = max_difference(&next, &u);
        if !d.is_finite() {
            return Err(Error::NonFinite("picard difference"));
        }
        // growth inside the rounding floor of 𝓝 is not divergence
        if d > 10.0 * cfg.tol && history.last().is_some_and(|&prev| d > prev) {
            growths += 1;
        } else {
            growths = 0;
        }
        history.push(d);
        u = next;
        let size = u.snapshots.iter().map(sup_norm).fold(0.0, f64::max);
        if d < cfg.tol || d < cfg.rel_tol * size {
            converged = true;
            break;
        }
        if growths >= 3 {
            return Err(Error::Diverged {
                iterations: history.len(),
                history,
            });
        }
    }
    Ok(PicardResult {
        trajectory: u,
        iterations: history.len(),
        converged,
        history,
        initial_norm: norm0,
    })
}

/// max_t sup_x |S[u⁽⁰⁾, 𝓝(u)] − u|, the fixed-point residual of a run.
pub fn fixed_point_residual(u0: &GridFunction, u: &Trajectory, cfg: &PicardConfig) -> Result<f64> {
    let stepper = stepper_for(u0, cfg)?;
    Ok(max_difference(&picard_map(&stepper, u0, u, cfg)?, u))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short() -> PicardConfig {
        PicardConfig {
            linear: LinearConfig {
                dt: 0.01,
                t_end: 1.0,
                stride: 2,
                ..LinearConfig::default()
            },
            ..PicardConfig::default()
        }
    }

    fn grid() -> LogGrid {
        LogGrid::new(-12.0, 6.0, 512).unwrap()
    }

    fn bump(eps: f64) -> GridFunction {
        standard_bump(grid()).scale(eps)
    }

    #[test]
    fn zero_data_is_a_fixed_point() {
        let r = picard_solve(&GridFunction::zeros(grid()), &short()).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        assert!(r.trajectory.snapshots.iter().all(|s| sup_norm(s) == 0.0));
    }

    #[test]
    fn small_bump_contracts() {
        let cfg = short();
        let u0 = bump(1e-3);
        let r = picard_solve(&u0, &cfg).unwrap();
        assert!(r.converged && r.iterations <= 6, "{:?}", r.history);
        assert!(r.contraction_ratios().iter().all(|&q| q < 0.5), "{:?}", r.history);
        let res = fixed_point_residual(&u0, &r.trajectory, &cfg).unwrap();
        assert!(res < 2.0 * cfg.tol, "{res}");
    }

    #[test]
    fn contraction_ratio_scales_with_amplitude() {
        let cfg = short();
        let q = |eps: f64| picard_solve(&bump(eps), &cfg).unwrap().history;
        let (a, b) = (q(1e-3), q(2e-3));
        // d₂/d₁ ≈ C·ε for a quadratic leading nonlinearity
        let ratio = (b[1] / b[0]) / (a[1] / a[0]);
        assert!((ratio - 2.0).abs() < 0.4, "{ratio}");
    }

    #[test]
    fn rejects_large_or_degenerate_data() {
        assert!(matches!(picard_solve(&bump(1.0), &short()), Err(Error::NotSmall { .. })));
        let deep = GridFunction::constant(grid(), -0.95);
        assert!(matches!(picard_solve(&deep, &short()), Err(Error::Degenerate { .. })));
        let cfg = PicardConfig { damping: 0.0, ..short() };
        assert!(picard_solve(&bump(1e-3), &cfg).is_err());
    }

    #[test]
    fn constant_data_is_frozen() {
        let c = 0.01;
        let r = picard_solve(&GridFunction::constant(grid(), c), &short()).unwrap();
        assert!(r.converged);
        let dev = r
            .trajectory
            .snapshots
            .iter()
            .map(|s| sup_norm(&s.offset(-c)))
            .fold(0.0, f64::max);
        assert!(dev < 1e-8, "{dev}");
    }
}
