use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use tfe_core::exponents::{
    beta, i_set, lattice, p_eval, p_exact, p_roots_f64, p_shift_exact, p_tilde_exact, q_tilde, Exponent,
};
use tfe_core::hodograph::{transport_series, Series};
use tfe_core::linear_solver::{coercivity_check, hardy_bench, BenchOptions};
use tfe_core::loggrid::{poly_of_d, roots_of_d, GridFunction, LogGrid, SmoothFunction};
use tfe_core::operators::{m_sym_apply, pd_apply, pd_apply_slot_sum};

use crate::output::{Failure, Outcome, Sink};

#[derive(Serialize)]
struct Check {
    name: String,
    lhs: f64,
    rhs: f64,
    /// "=" within `tolerance`, or an inequality.
    relation: &'static str,
    tolerance: f64,
    passed: bool,
}

impl Check {
    fn equal(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            lhs,
            rhs,
            relation: "=",
            tolerance,
            passed: (lhs - rhs).abs() <= tolerance,
        }
    }

    fn at_most(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Check {
            name: name.into(),
            lhs,
            rhs,
            relation: "<=",
            tolerance: 0.0,
            passed: lhs <= rhs,
        }
    }
}

#[derive(Serialize)]
struct VerifyReport {
    checks: Vec<Check>,
    failed: Vec<String>,
    passed: bool,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn roots(beta: f64) -> Vec<Check> {
    [("p(0)", 0.0), ("p(beta)", beta), ("p(-3/2)", -1.5), ("p(-beta-1/2)", -beta - 0.5)]
        .into_iter()
        .map(|(name, z)| Check::equal(name, p_eval(z, 0), 0.0, 1e-12))
        .chain([Check::equal("p~(1)", p_tilde_exact().to_real().eval(1.0), 0.75, 1e-15)])
        .collect()
}

fn identities() -> Result<Vec<Check>, Failure> {
    let g = LogGrid::new(-6.0, 3.0, 200)?;
    let one = GridFunction::constant(g, 1.0);
    let m = m_sym_apply([&one, &one, &one, &one, &one])?;
    let v = transport_series(&Series::constant(1, 0.0), 1)?.velocity.constant_term();
    Ok(vec![
        Check::equal("M_sym(1,1,1,1,1)", sup(m.values()), 0.0, 1e-12),
        Check::equal("M~(1,1,1)", v, -0.375, 0.0),
        Check::equal("|K_2|", lattice(2).len() as f64, 6.0, 0.0),
        Check::equal(
            "I_2 = {2beta, 3beta}",
            (i_set(2) == vec![Exponent::new(0, 2), Exponent::new(0, 3)]) as u8 as f64,
            1.0,
            0.0,
        ),
    ])
}

fn slot_sum(rng: &mut ChaCha8Rng, trials: usize) -> Result<Check, Failure> {
    let g = LogGrid::new(-8.0, 4.0, 601)?;
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let u = SmoothFunction::random(rng, -6.0, 2.0).sample(g);
        let a = pd_apply(&u)?;
        let b = pd_apply_slot_sum(&u)?;
        let dev = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        worst = worst.max(dev / sup(a.values()).max(f64::MIN_POSITIVE));
    }
    Ok(Check::at_most("pD slot-sum relative deviation", worst, 1e-9))
}

/// ∏(D − i)(x v) = x ∏(D − i) v − x q̃ₙ(D) v over i ∈ Iₙ, on cubic v.
fn commutators(rng: &mut ChaCha8Rng) -> Result<Vec<Check>, Failure> {
    let g = LogGrid::new(-4.0, 0.5, 900)?;
    let x = g.x_values();
    let mut out = Vec::new();
    for n in 2..=3 {
        let c: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v = GridFunction::from_x_fn(g, |x| c.iter().rev().fold(0.0, |a, c| a * x + c));
        let r: Vec<f64> = i_set(n).iter().map(Exponent::value).collect();
        let xv = GridFunction::from_x_fn(g, |x| x).zip_with(&v, |a, b| a * b)?;
        let lhs = roots_of_d(&xv, &r)?;
        let pv = roots_of_d(&v, &r)?;
        let qv = poly_of_d(&v, &q_tilde(n).to_real())?;
        let (lo, hi) = (40, g.count - 40);
        let scale = (lo..hi).map(|i| lhs.values()[i].abs()).fold(1e-3, f64::max);
        let dev = (lo..hi)
            .map(|i| (lhs.values()[i] - x[i] * (pv.values()[i] - qv.values()[i])).abs())
            .fold(0.0, f64::max);
        out.push(Check::at_most(format!("q~_{n} commutator relative deviation"), dev / scale, 1e-6));
    }
    Ok(out)
}

fn benches(seed: u64, trials: usize, delta: f64) -> Result<Vec<Check>, Failure> {
    let opts = BenchOptions {
        trials,
        seed,
        ..BenchOptions::default()
    };
    let mut out = Vec::new();
    for (gamma, rho) in [(-0.5, 0.3), (0.2, 1.0), (1.5, 0.5)] {
        let r = hardy_bench(gamma, rho, &opts)?;
        let mut c = Check::at_most(
            format!("Hardy constant (gamma={gamma}, rho={rho}) vs analytic"),
            r.constant,
            r.analytic * (1.0 + 1e-6),
        );
        c.passed &= r.stable;
        out.push(c);
    }
    let p = p_exact().to_real();
    let p1 = p_shift_exact(1).to_real();
    for (name, poly, roots, alpha) in [
        ("p", &p, p_roots_f64(0), -0.5),
        ("p", &p, p_roots_f64(0), -0.9 + delta),
        ("p(.-1)", &p1, p_roots_f64(1), 0.5 - delta),
        ("p(.-1)", &p1, p_roots_f64(1), 0.5 + delta),
    ] {
        let r = coercivity_check(poly, Some(roots), alpha, &opts)?;
        out.push(Check {
            name: format!("coercivity of {name} at alpha={alpha}"),
            lhs: r.min_ratio,
            rhs: 0.0,
            relation: ">",
            tolerance: 0.0,
            passed: r.passed,
        });
    }
    Ok(out)
}

pub fn run(sink: &Sink, inject_beta: Option<f64>) -> Outcome {
    let cfg = &sink.cfg;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut checks = roots(inject_beta.unwrap_or_else(beta));
    checks.extend(identities()?);
    checks.push(slot_sum(&mut rng, cfg.trials)?);
    checks.extend(commutators(&mut rng)?);
    checks.extend(benches(cfg.seed, cfg.trials, cfg.delta())?);

    for c in &checks {
        sink.say(format!(
            "{} {}: {:.6e} {} {:.6e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.lhs,
            c.relation,
            c.rhs
        ));
    }
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
    let report = VerifyReport {
        passed: failed.is_empty(),
        failed: failed.clone(),
        checks,
    };
    sink.report("verify", &report)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("failing checks: {}", failed.join(", "))))
    }
}
