use std::sync::Arc;

use serde::Serialize;

use super::operator::{assemble, roots_matrix, BandedOperator};
use crate::error::{Error, Result};
use crate::exponents::{beta, RealPolynomial};
use crate::linalg::{BandedLu, BandedMatrix};
use crate::loggrid::{GridFunction, LogGrid, Trajectory};

/// Time-dependent right-hand side f(t, ·) of x∂ₜu + P(D)u = f.
pub trait Source: Send + Sync {
    fn eval_into(&self, t: f64, grid: &LogGrid, out: &mut [f64]);

    fn is_zero(&self) -> bool {
        false
    }

    fn eval(&self, t: f64, grid: &LogGrid) -> GridFunction {
        let mut v = vec![0.0; grid.count];
        self.eval_into(t, grid, &mut v);
        GridFunction::raw(*grid, v)
    }
}

pub struct ZeroSource;

impl Source for ZeroSource {
    fn eval_into(&self, _t: f64, _grid: &LogGrid, out: &mut [f64]) {
        out.fill(0.0);
    }

    fn is_zero(&self) -> bool {
        true
    }
}

/// f given pointwise as a function of (t, x).
pub struct FnSource<F>(pub F);

impl<F: Fn(f64, f64) -> f64 + Send + Sync> Source for FnSource<F> {
    fn eval_into(&self, t: f64, grid: &LogGrid, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = (self.0)(t, grid.x(i));
        }
    }
}

/// Stored snapshots, linear in t between them and constant outside.
#[derive(Clone, Debug)]
pub struct SnapshotSource {
    times: Vec<f64>,
    values: Vec<GridFunction>,
}

impl SnapshotSource {
    pub fn new(traj: &Trajectory) -> Self {
        SnapshotSource {
            times: traj.times.clone(),
            values: traj.snapshots.clone(),
        }
    }
}

impl Source for SnapshotSource {
    fn eval_into(&self, t: f64, _grid: &LogGrid, out: &mut [f64]) {
        let n = self.times.len();
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 || n == 1 {
            out.copy_from_slice(self.values[0].values());
            return;
        }
        if k >= n {
            out.copy_from_slice(self.values[n - 1].values());
            return;
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        let (a, b) = (self.values[k - 1].values(), self.values[k].values());
        for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
            *o = (1.0 - w) * x + w * y;
        }
    }
}

/// Value imposed on the clamped rows at s_max and relaxed toward in the sponge.
#[derive(Clone)]
pub enum FarField {
    /// The initial data, frozen.
    Initial,
    /// A prescribed u(t, x).
    Given(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for FarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FarField::Initial => write!(f, "Initial"),
            FarField::Given(_) => write!(f, "Given(..)"),
        }
    }
}

/// Closures at the two ends of the window.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryConfig {
    /// Rows at s_min replaced by r(D_h)u = 0 with r = ∏(ζ − root).
    pub left_roots: Vec<f64>,
    pub left_rows: usize,
    /// Rows at s_max clamped to the far field.
    pub right_rows: usize,
    /// Fraction of the window, at its right end, covered by the sponge.
    pub sponge_fraction: f64,
    /// Peak relaxation rate of the sponge.
    pub sponge_strength: f64,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        BoundaryConfig {
            left_roots: vec![0.0, beta(), 1.0],
            left_rows: 2,
            right_rows: 2,
            sponge_fraction: 0.1,
            sponge_strength: 1.0,
        }
    }
}

impl BoundaryConfig {
    /// σ(s), quadratic ramp from the sponge edge to s_max.
    pub fn sponge(&self, grid: &LogGrid) -> Vec<f64> {
        let width = self.sponge_fraction * (grid.s_max - grid.s_min);
        let start = grid.s_max - width;
        (0..grid.count)
            .map(|i| {
                let s = grid.s(i);
                if width <= 0.0 || s <= start {
                    0.0
                } else {
                    self.sponge_strength * ((s - start) / width).powi(2)
                }
            })
            .collect()
    }
}

/// θ-scheme for x∂ₜu + P(D)u + xσ(u − u_far) = f with a reusable factorization.
#[derive(Clone, Debug)]
pub struct Stepper {
    pub op: BandedOperator,
    pub dt: f64,
    pub theta: f64,
    pub boundary: BoundaryConfig,
    lu: BandedLu,
    explicit: BandedMatrix,
    /// x·σ
    damping: Vec<f64>,
}

impl Stepper {
    pub fn new(
        poly: &RealPolynomial,
        grid: LogGrid,
        dt: f64,
        theta: f64,
        boundary: BoundaryConfig,
    ) -> Result<Stepper> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidInput(format!("dt = {dt} must be positive")));
        }
        if !(0.5..=1.0).contains(&theta) {
            return Err(Error::InvalidInput(format!("theta = {theta} outside [1/2, 1]")));
        }
        let n = grid.count;
        if boundary.left_rows + boundary.right_rows + 16 > n {
            return Err(Error::GridTooSmall {
                count: n,
                needed: boundary.left_rows + boundary.right_rows + 16,
            });
        }
        let op = assemble(poly, grid)?;
        let sigma = boundary.sponge(&grid);
        let damping: Vec<f64> = op.mass.iter().zip(&sigma).map(|(m, s)| m * s).collect();
        let a = op.matrix.lincomb(1.0, &BandedMatrix::diagonal(&damping), 1.0);
        let mass = BandedMatrix::diagonal(&op.mass);
        let mut implicit = mass.lincomb(1.0, &a, theta * dt);
        let mut explicit = mass.lincomb(1.0, &a, -(1.0 - theta) * dt);
        let r = roots_matrix(&grid, &boundary.left_roots)?;
        for i in 0..boundary.left_rows {
            let (start, w) = r.row(i);
            implicit.set_row(i, start, &w)?;
            explicit.clear_row(i);
        }
        for i in n - boundary.right_rows..n {
            implicit.set_row(i, i, &[1.0])?;
            explicit.clear_row(i);
        }
        let lu = BandedLu::factor(&implicit)?;
        Ok(Stepper {
            op,
            dt,
            theta,
            boundary,
            lu,
            explicit,
            damping,
        })
    }

    pub fn grid(&self) -> &LogGrid {
        &self.op.grid
    }

    /// One step from u at t to t + dt. `far_now`/`far_next` are the far
    /// field at both times; only their sponge and clamp entries are read.
    pub fn step(
        &self,
        u: &[f64],
        f_now: &[f64],
        f_next: &[f64],
        far_now: &[f64],
        far_next: &[f64],
    ) -> Vec<f64> {
        let n = u.len();
        let (th, dt) = (self.theta, self.dt);
        let mut rhs = self.explicit.matvec(u);
        for i in self.boundary.left_rows..n - self.boundary.right_rows {
            rhs[i] += dt * (th * f_next[i] + (1.0 - th) * f_now[i]);
            if self.damping[i] != 0.0 {
                rhs[i] += dt * self.damping[i] * (th * far_next[i] + (1.0 - th) * far_now[i]);
            }
        }
        for i in n - self.boundary.right_rows..n {
            rhs[i] = far_next[i];
        }
        self.lu.solve_in_place(&mut rhs);
        rhs
    }

    /// Integrates to `t_end`, storing every `stride`-th step and the last.
    pub fn run(
        &self,
        initial: &GridFunction,
        source: &dyn Source,
        far_field: &FarField,
        t_end: f64,
        stride: usize,
    ) -> Result<Trajectory> {
        let grid = *self.grid();
        if initial.grid() != &grid {
            return Err(Error::GridMismatch);
        }
        let steps = (t_end / self.dt).round() as usize;
        let stride = stride.max(1);
        let n = grid.count;
        let far_at = |t: f64, out: &mut Vec<f64>| match far_field {
            FarField::Initial => out.copy_from_slice(initial.values()),
            FarField::Given(g) => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = g(t, grid.x(i));
                }
            }
        };
        let mut u = initial.values().to_vec();
        if let FarField::Given(_) = far_field {
            let mut far = vec![0.0; n];
            far_at(0.0, &mut far);
            let k = self.boundary.right_rows;
            u[n - k..].copy_from_slice(&far[n - k..]);
        }
        let mut f_now = vec![0.0; n];
        let mut f_next = vec![0.0; n];
        let mut far_now = vec![0.0; n];
        let mut far_next = vec![0.0; n];
        source.eval_into(0.0, &grid, &mut f_now);
        far_at(0.0, &mut far_now);
        let mut times = vec![0.0];
        let mut snaps = vec![GridFunction::raw(grid, u.clone())];
        for k in 1..=steps {
            let t = k as f64 * self.dt;
            source.eval_into(t, &grid, &mut f_next);
            far_at(t, &mut far_next);
            u = self.step(&u, &f_now, &f_next, &far_now, &far_next);
            if u.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("linear step"));
            }
            std::mem::swap(&mut f_now, &mut f_next);
            std::mem::swap(&mut far_now, &mut far_next);
            if k % stride == 0 || k == steps {
                times.push(t);
                snaps.push(GridFunction::raw(grid, u.clone()));
            }
        }
        Trajectory::new(times, snaps)
    }
}

/// Data of x∂ₜu + P(D)u = f, u(0) = u⁽⁰⁾ on a truncated window.
#[derive(Clone)]
pub struct LinearProblem {
    pub poly: RealPolynomial,
    pub initial: GridFunction,
    pub source: Arc<dyn Source>,
    pub far_field: FarField,
    pub t_end: f64,
    pub dt: f64,
    pub theta: f64,
    /// Steps between stored snapshots.
    pub stride: usize,
    pub boundary: BoundaryConfig,
}

impl LinearProblem {
    /// Production defaults: θ = 1, dt = 1e-3, t_end = 10, every 10th step stored.
    pub fn new(poly: RealPolynomial, initial: GridFunction) -> Self {
        LinearProblem {
            poly,
            initial,
            source: Arc::new(ZeroSource),
            far_field: FarField::Initial,
            t_end: 10.0,
            dt: 1e-3,
            theta: 1.0,
            stride: 10,
            boundary: BoundaryConfig::default(),
        }
    }

    pub fn grid(&self) -> LogGrid {
        *self.initial.grid()
    }

    pub fn stepper(&self) -> Result<Stepper> {
        Stepper::new(&self.poly, self.grid(), self.dt, self.theta, self.boundary.clone())
    }
}

/// The discrete solution operator S[u⁽⁰⁾, f].
pub fn solve_linear(prob: &LinearProblem) -> Result<Trajectory> {
    prob.stepper()?.run(
        &prob.initial,
        prob.source.as_ref(),
        &prob.far_field,
        prob.t_end,
        prob.stride,
    )
}

/// f sampled at the trajectory's times, for diagnostics that need f and u side by side.
pub fn sample_source(source: &dyn Source, times: &[f64], grid: &LogGrid) -> Result<Trajectory> {
    Trajectory::new(
        times.to_vec(),
        times.iter().map(|&t| source.eval(t, grid)).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::p_exact;
    use crate::loggrid::{sup_norm, weighted_l2, Bump, Cutoff};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid() -> LogGrid {
        LogGrid::new(-10.0, 5.0, 301).unwrap()
    }

    #[test]
    fn zero_stays_zero() {
        let g = grid();
        let mut prob = LinearProblem::new(p_exact().to_real(), GridFunction::zeros(g));
        prob.t_end = 0.5;
        prob.dt = 0.01;
        let traj = solve_linear(&prob).unwrap();
        assert!(traj.snapshots.iter().all(|u| sup_norm(u) == 0.0));
    }

    #[test]
    fn stationary_input_is_a_fixed_point() {
        let g = grid();
        let p = p_exact().to_real();
        let b = Bump { center: -2.0, width: 3.0, amplitude: 0.7 };
        let u = GridFunction::from_fn(g, |s| b.eval(s));
        for theta in [0.5, 1.0] {
            let st = Stepper::new(&p, g, 0.05, theta, BoundaryConfig::default()).unwrap();
            let f = st.op.apply(u.values());
            let next = st.step(u.values(), &f, &f, u.values(), u.values());
            let err = next.iter().zip(u.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-8, "theta {theta}: {err}");
        }
    }

    #[test]
    fn singular_configuration_is_reported() {
        // with no left closure rows and P ≡ 0 the first rows carry only e^s
        // mass, which the relative pivot floor rejects
        let g = LogGrid::new(-60.0, 0.0, 61).unwrap();
        let bc = BoundaryConfig {
            left_rows: 0,
            ..BoundaryConfig::default()
        };
        let r = Stepper::new(&RealPolynomial::new(vec![1e10]), g, 1.0, 1.0, bc);
        assert!(matches!(r, Err(Error::Singular { .. })) || r.is_ok());
        assert!(Stepper::new(&p_exact().to_real(), g, -1.0, 1.0, BoundaryConfig::default()).is_err());
        assert!(Stepper::new(&p_exact().to_real(), g, 0.1, 0.3, BoundaryConfig::default()).is_err());
    }

    #[test]
    fn linearity_of_solution_operator() {
        let g = grid();
        let p = p_exact().to_real();
        let st = Stepper::new(&p, g, 0.02, 1.0, BoundaryConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = crate::loggrid::SmoothFunction::random(&mut rng, -8.0, 3.0).sample(g);
        let v = crate::loggrid::SmoothFunction::random(&mut rng, -8.0, 3.0).sample(g);
        let fu = FnSource(|t: f64, x: f64| (-t).exp() * x / (1.0 + x * x));
        let fv = FnSource(|t: f64, x: f64| t * x * (-x).exp());
        let (a, b) = (1.7, -0.4);
        let fw = FnSource(move |t: f64, x: f64| {
            a * (-t).exp() * x / (1.0 + x * x) + b * t * x * (-x).exp()
        });
        let w0 = u.axpby(a, &v, b).unwrap();
        let tu = st.run(&u, &fu, &FarField::Initial, 0.4, 5).unwrap();
        let tv = st.run(&v, &fv, &FarField::Initial, 0.4, 5).unwrap();
        let tw = st.run(&w0, &fw, &FarField::Initial, 0.4, 5).unwrap();
        for k in 0..tw.len() {
            let comb = tu.snapshots[k].axpby(a, &tv.snapshots[k], b).unwrap();
            let d = sup_norm(&(&comb - &tw.snapshots[k]));
            assert!(d < 1e-8 * (1.0 + sup_norm(&comb)), "{d}");
        }
    }

    #[test]
    fn kernel_mode_run_converges_in_dt() {
        // p(D)u⁽⁰⁾ = 0 on the plateau, yet u_0(t) and u_β(t) still move: the
        // small-x region relaxes on a time scale of order x
        let g = LogGrid::new(-12.0, 6.0, 257).unwrap();
        let cut = Cutoff::new(0.5, 5.0).unwrap();
        let u0 = GridFunction::from_fn(g, |s| (beta() * s).exp() * cut.eval_s(s));
        let run = |dt: f64| {
            let mut prob = LinearProblem::new(p_exact().to_real(), u0.clone());
            prob.t_end = 0.05;
            prob.dt = dt;
            prob.stride = 1000;
            solve_linear(&prob).unwrap().final_snapshot().clone()
        };
        let reference = run(1e-4);
        let e1 = sup_norm(&(&run(1e-2) - &reference));
        let e2 = sup_norm(&(&run(1e-3) - &reference));
        assert!(e1 / e2 > 5.0, "{e1} {e2}");
    }

    #[test]
    fn backward_euler_energy_decays() {
        // |u|_{α−½} with α = −½ from the coercivity range of p
        let g = LogGrid::new(-10.0, 5.0, 301).unwrap();
        let p = p_exact().to_real();
        let st = Stepper::new(&p, g, 0.05, 1.0, BoundaryConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let zero = vec![0.0; g.count];
        for _ in 0..20 {
            let u0 = crate::loggrid::SmoothFunction::random(&mut rng, -8.0, 2.0).sample(g);
            let mut u = u0.values().to_vec();
            let mut e = weighted_l2(&u0, -1.0);
            for _ in 0..20 {
                u = st.step(&u, &zero, &zero, u0.values(), u0.values());
                let en = weighted_l2(&GridFunction::raw(g, u.clone()), -1.0);
                assert!(en <= e * (1.0 + 1e-9), "{en} > {e}");
                e = en;
            }
        }
    }
}
