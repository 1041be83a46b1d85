use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::loggrid::{extract_expansion_with, FitOptions, GridFunction, Trajectory};
use crate::operators::{check_guard, velocity_tilde};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContactLine {
    pub times: Vec<f64>,
    pub z0: Vec<f64>,
    pub v0: Vec<f64>,
}

/// V₀ = (3/8)(1+u₀)³ pointwise and Z₀ = z_start − ∫V₀ by trapezoid.
pub fn contact_line(u0: &[f64], times: &[f64], z_start: f64) -> Result<ContactLine> {
    if u0.len() != times.len() || times.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{} values of u0 for {} times",
            u0.len(),
            times.len()
        )));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("times must increase".into()));
    }
    let v0: Vec<f64> = u0.iter().map(|u| 0.375 * (1.0 + u).powi(3)).collect();
    let mut z0 = vec![z_start; times.len()];
    for j in 1..times.len() {
        z0[j] = z0[j - 1] - 0.5 * (times[j] - times[j - 1]) * (v0[j] + v0[j - 1]);
    }
    Ok(ContactLine {
        times: times.to_vec(),
        z0,
        v0,
    })
}

/// V = 𝓜̃(1+u, 1+u, 1+u) as a function of x.
pub fn velocity_profile(u: &GridFunction) -> Result<GridFunction> {
    check_guard(u, 0.0)?;
    let f = u.offset(1.0);
    velocity_tilde([&f, &f, &f])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VelocityTrack {
    pub t: f64,
    pub u0: f64,
    /// Constant term of the fitted expansion of V.
    pub v_constant: f64,
    pub expected: f64,
    pub relative_error: f64,
}

/// Fitted constant of V against −(3/8)(1+u₀)³ at every stored time.
pub fn velocity_consistency(traj: &Trajectory, opts: &FitOptions) -> Result<Vec<VelocityTrack>> {
    let idx: Vec<usize> = (0..traj.len()).collect();
    exec::map_slice(&idx, |&j| {
        let u = &traj.snapshots[j];
        let u0 = extract_expansion_with(u, 1, opts)?.constant();
        let v = velocity_profile(u)?;
        let v_constant = extract_expansion_with(&v, 1, opts)?.constant();
        let expected = -0.375 * (1.0 + u0).powi(3);
        Ok(VelocityTrack {
            t: traj.times[j],
            u0,
            v_constant,
            expected,
            relative_error: ((v_constant - expected) / expected).abs(),
        })
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loggrid::LogGrid;
    use crate::operators::velocity_decomposition;

    #[test]
    fn traveling_wave_speed() {
        let times: Vec<f64> = (0..=20).map(|k| k as f64 * 0.05).collect();
        let cl = contact_line(&vec![0.0; times.len()], &times, 1.0).unwrap();
        assert!(cl.v0.iter().all(|&v| v == 0.375));
        for (t, z) in times.iter().zip(&cl.z0) {
            assert!((z - (1.0 - 0.375 * t)).abs() < 1e-15);
        }
    }

    #[test]
    fn position_slope_is_minus_speed() {
        let times: Vec<f64> = (0..=200).map(|k| k as f64 * 0.01).collect();
        let u0: Vec<f64> = times.iter().map(|t| 0.1 * (-t).exp()).collect();
        let cl = contact_line(&u0, &times, 0.0).unwrap();
        for j in 1..times.len() - 1 {
            let slope = (cl.z0[j + 1] - cl.z0[j - 1]) / (times[j + 1] - times[j - 1]);
            assert!((slope + cl.v0[j]).abs() < 1e-4, "{j}: {slope} {}", cl.v0[j]);
        }
        let c = 0.05;
        let cl = contact_line(&[c, c], &[0.0, 1.0], 0.0).unwrap();
        assert!((cl.v0[1] - 0.375 * (1.0 + c).powi(3)).abs() < 1e-15);
    }

    #[test]
    fn zero_gives_minus_three_eighths() {
        let g = LogGrid::new(-8.0, 2.0, 200).unwrap();
        let v = velocity_profile(&GridFunction::zeros(g)).unwrap();
        assert!(v.values().iter().all(|&x| x == -0.375));
    }

    #[test]
    fn matches_decomposition() {
        let g = LogGrid::new(-10.0, 4.0, 512).unwrap();
        let u = GridFunction::from_fn(g, |s| 0.02 + 0.05 * (-(s + 2.0) * (s + 2.0) / 8.0).exp());
        let v = velocity_profile(&u).unwrap();
        let d = velocity_decomposition(&u, 0.02).unwrap();
        let sum = d.b.zip_with(&d.c, |b, c| d.a + b + c).unwrap();
        let dev = v.values().iter().zip(sum.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(dev < 1e-9, "{dev}");
    }
}
