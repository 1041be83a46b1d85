use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use tfe_core::exponents::{default_delta, validate_delta, DerivativeSchedule};
use tfe_core::loggrid::{FitOptions, LogGrid};
use tfe_core::nonlinear_solver::{LinearConfig, PicardConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub s_min: f64,
    pub s_max: f64,
    pub count: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        let g = LogGrid::default();
        GridSpec {
            s_min: g.s_min,
            s_max: g.s_max,
            count: g.count,
        }
    }
}

/// Everything a run depends on. Missing keys take the library defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub n0: u32,
    /// Largest N0 accepted by `schedule`.
    pub max_n0: u32,
    pub grid: GridSpec,
    pub dt: f64,
    pub t_end: f64,
    /// Steps between stored snapshots.
    pub stride: usize,
    pub theta: f64,
    /// Weight shift; defaults to the largest admissible value for N0.
    pub delta: Option<f64>,
    /// Amplitude of the initial data ε·exp(−(s + 2)²/8).
    pub epsilon: f64,
    pub seed: u64,
    /// Upper end of the expansion fit window in x.
    pub x_fit: f64,
    pub decay_window: (f64, f64),
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    /// Trials per random bench in `verify`.
    pub trials: usize,
    /// Output directory; not part of the config hash.
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let lin = LinearConfig::default();
        let pic = PicardConfig::default();
        RunConfig {
            n0: 1,
            max_n0: 4,
            grid: GridSpec::default(),
            dt: lin.dt,
            t_end: lin.t_end,
            stride: lin.stride,
            theta: lin.theta,
            delta: None,
            epsilon: 1e-3,
            seed: 0,
            x_fit: FitOptions::default().x_fit,
            decay_window: (1.0, 10.0),
            picard_tol: pic.tol,
            picard_max_iter: pic.max_iter,
            trials: 20,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Fills `delta` and checks every field against the library's preconditions.
    pub fn resolve(mut self) -> Result<Self, String> {
        if self.n0 == 0 || self.n0 > self.max_n0 {
            return Err(format!("n0 = {} must lie in 1..={}", self.n0, self.max_n0));
        }
        let delta = self.delta.unwrap_or_else(|| default_delta(self.n0));
        validate_delta(self.n0, delta).map_err(|e| e.to_string())?;
        self.delta = Some(delta);
        LogGrid::new(self.grid.s_min, self.grid.s_max, self.grid.count).map_err(|e| e.to_string())?;
        if !(self.dt > 0.0 && self.t_end >= self.dt && self.t_end.is_finite()) {
            return Err(format!("need 0 < dt <= t_end, got dt = {}, t_end = {}", self.dt, self.t_end));
        }
        if self.stride == 0 {
            return Err("stride must be at least 1".into());
        }
        if !(0.5..=1.0).contains(&self.theta) {
            return Err(format!("theta = {} outside [1/2, 1]", self.theta));
        }
        if !self.epsilon.is_finite() {
            return Err("epsilon must be finite".into());
        }
        let x_max = self.grid.s_max.exp();
        if !(self.x_fit > self.grid.s_min.exp() && self.x_fit < x_max) {
            return Err(format!("x_fit = {} must lie inside the grid", self.x_fit));
        }
        let (t0, t1) = self.decay_window;
        if !(t0 > 0.0 && t1 > t0) {
            return Err(format!("decay window ({t0}, {t1}) is not an interval in t > 0"));
        }
        if !(self.picard_tol > 0.0) || self.picard_max_iter == 0 {
            return Err("picard_tol must be positive and picard_max_iter at least 1".into());
        }
        if self.trials == 0 {
            return Err("trials must be at least 1".into());
        }
        Ok(self)
    }

    pub fn delta(&self) -> f64 {
        self.delta.unwrap_or_else(|| default_delta(self.n0))
    }

    pub fn grid(&self) -> LogGrid {
        LogGrid {
            s_min: self.grid.s_min,
            s_max: self.grid.s_max,
            count: self.grid.count,
        }
    }

    pub fn fit(&self) -> FitOptions {
        FitOptions {
            x_fit: self.x_fit,
            delta: self.delta(),
            ..FitOptions::default()
        }
    }

    pub fn linear(&self) -> LinearConfig {
        LinearConfig {
            dt: self.dt,
            t_end: self.t_end,
            theta: self.theta,
            stride: self.stride,
            ..LinearConfig::default()
        }
    }

    pub fn picard(&self) -> PicardConfig {
        PicardConfig {
            n0: self.n0,
            tol: self.picard_tol,
            max_iter: self.picard_max_iter,
            linear: self.linear(),
            fit: self.fit(),
            ..PicardConfig::default()
        }
    }

    pub fn schedule(&self) -> Result<DerivativeSchedule, String> {
        DerivativeSchedule::explicit(self.n0, self.delta()).map_err(|e| e.to_string())
    }

    /// sha256 of the serialized config.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let c = RunConfig::default().resolve().unwrap();
        assert_eq!(c.delta, Some(0.05));
        assert_eq!(c.grid(), LogGrid::default());
    }

    #[test]
    fn partial_json_fills_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"n0": 2, "grid": {"count": 512}}"#).unwrap();
        let c = c.resolve().unwrap();
        assert_eq!((c.n0, c.grid.count, c.grid.s_min), (2, 512, -12.0));
        assert_eq!(c.delta, Some(default_delta(2)));
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"n_0": 2}"#).is_err());
        let bad = |c: RunConfig| c.resolve().is_err();
        assert!(bad(RunConfig { n0: 5, ..RunConfig::default() }));
        assert!(bad(RunConfig { delta: Some(0.3), ..RunConfig::default() }));
        assert!(bad(RunConfig { dt: 0.0, ..RunConfig::default() }));
        assert!(bad(RunConfig { theta: 0.3, ..RunConfig::default() }));
        assert!(bad(RunConfig { x_fit: 1e3, ..RunConfig::default() }));
    }

    #[test]
    fn hash_ignores_output_directory() {
        let a = RunConfig::default();
        let b = RunConfig {
            out: Some("elsewhere".into()),
            ..RunConfig::default()
        };
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), RunConfig { seed: 1, ..a.clone() }.hash());
    }
}
