//! The 5-linear form 𝓜, its symmetrization, p(D), the nonlinearity 𝓝 and
//! the velocity form 𝓜̃. Operators act on everything to their right; every
//! chain is evaluated right to left.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::exponents::{p_exact, p_tilde_exact};
use crate::loggrid::{d1_into, poly_of_d, sup_norm, GridFunction};

/// min(1 + u) must stay above this for 𝓝 and the velocity.
pub const DEFAULT_GUARD: f64 = 0.1;

fn common_grid(f: &[&GridFunction]) -> Result<()> {
    for w in f.windows(2) {
        w[0].same_grid(w[1])?;
    }
    if let Some(g) = f.first() {
        if g.len() < 10 {
            return Err(Error::GridTooSmall { count: g.len(), needed: 10 });
        }
    }
    Ok(())
}

/// t ← D t + c·t, in place.
fn d_plus(t: &mut Vec<f64>, c: f64, h: f64, scratch: &mut Vec<f64>) {
    d1_into(t, h, scratch);
    for (a, &b) in scratch.iter_mut().zip(t.iter()) {
        *a += c * b;
    }
    std::mem::swap(t, scratch);
}

fn mul_in(t: &mut [f64], f: &GridFunction) {
    for (a, &b) in t.iter_mut().zip(f.values()) {
        *a *= b;
    }
}

fn m_chain(f: [&GridFunction; 5]) -> GridFunction {
    let g = *f[0].grid();
    let h = g.h();
    let mut t = f[4].values().to_vec();
    let mut s = vec![0.0; t.len()];
    d_plus(&mut t, 0.5, h, &mut s);
    mul_in(&mut t, f[3]);
    d_plus(&mut t, -0.5, h, &mut s);
    mul_in(&mut t, f[2]);
    d_plus(&mut t, 1.5, h, &mut s);
    d_plus(&mut t, 0.0, h, &mut s);
    mul_in(&mut t, f[1]);
    mul_in(&mut t, f[0]);
    GridFunction::raw(g, t)
}

/// 𝓜(F₁,…,F₅) = F₁F₂ D(D + 3/2)[F₃(D − ½)[F₄(D + ½)F₅]].
pub fn m_apply(f: [&GridFunction; 5]) -> Result<GridFunction> {
    common_grid(&f)?;
    Ok(m_chain(f))
}

/// Distinct arrangements of a label multiset.
fn arrangements(labels: &[usize]) -> Vec<Vec<usize>> {
    fn rec(counts: &mut Vec<(usize, usize)>, cur: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in 0..counts.len() {
            if counts[i].1 > 0 {
                counts[i].1 -= 1;
                cur.push(counts[i].0);
                rec(counts, cur, n, out);
                cur.pop();
                counts[i].1 += 1;
            }
        }
    }
    let mut counts: Vec<(usize, usize)> = Vec::new();
    for &l in labels {
        match counts.iter_mut().find(|c| c.0 == l) {
            Some(c) => c.1 += 1,
            None => counts.push((l, 1)),
        }
    }
    let mut out = Vec::new();
    rec(&mut counts, &mut Vec::new(), labels.len(), &mut out);
    out
}

/// Identical arguments share a label, so each distinct arrangement is
/// evaluated once; averaging over them equals the full permutation average.
fn labels_of(f: &[&GridFunction]) -> Vec<usize> {
    (0..f.len())
        .map(|i| (0..=i).find(|&j| f[j].values() == f[i].values()).unwrap())
        .collect()
}

/// Average of 𝓜 over all 120 argument permutations.
pub fn m_sym_apply(f: [&GridFunction; 5]) -> Result<GridFunction> {
    common_grid(&f)?;
    let arr = arrangements(&labels_of(&f));
    let terms = exec::map_slice(&arr, |a| m_chain([&f[a[0]], &f[a[1]], &f[a[2]], &f[a[3]], &f[a[4]]].map(|x| *x)));
    Ok(average(&terms))
}

fn average(terms: &[GridFunction]) -> GridFunction {
    let g = *terms[0].grid();
    let mut acc = vec![0.0; g.count];
    for t in terms {
        for (a, &b) in acc.iter_mut().zip(t.values()) {
            *a += b;
        }
    }
    let k = terms.len() as f64;
    GridFunction::raw(g, acc.into_iter().map(|v| v / k).collect())
}

/// p(D)u via Horner on the expanded polynomial.
pub fn pd_apply(u: &GridFunction) -> Result<GridFunction> {
    poly_of_d(u, &p_exact().to_real())
}

/// p(D)u = 𝓜(1,…,1,u) + … + 𝓜(u,1,…,1).
pub fn pd_apply_slot_sum(u: &GridFunction) -> Result<GridFunction> {
    common_grid(&[u])?;
    let one = GridFunction::constant(*u.grid(), 1.0);
    let mut acc = vec![0.0; u.len()];
    for slot in 0..5 {
        let mut args = [&one; 5];
        args[slot] = u;
        for (a, &b) in acc.iter_mut().zip(m_chain(args).values()) {
            *a += b;
        }
    }
    Ok(GridFunction::raw(*u.grid(), acc))
}

pub fn check_guard(u: &GridFunction, guard: f64) -> Result<()> {
    let min = u.min() + 1.0;
    if min > guard {
        Ok(())
    } else {
        Err(Error::Degenerate { min, guard })
    }
}

/// 𝓝(u) = p(D)u − 𝓜(1+u,…,1+u), evaluated as −Σ_{|S|≥2} 𝓜(u on S, 1 off S).
/// The expansion is exact by multilinearity and D_h 1 = 0, and it avoids
/// the O(1) cancellation of the literal form.
pub fn nonlinearity_with_guard(u: &GridFunction, guard: f64) -> Result<GridFunction> {
    check_guard(u, guard)?;
    common_grid(&[u])?;
    let one = GridFunction::constant(*u.grid(), 1.0);
    let subsets: Vec<u32> = (0u32..32).filter(|s| s.count_ones() >= 2).collect();
    let terms = exec::map_slice(&subsets, |&mask| {
        let args: [&GridFunction; 5] =
            std::array::from_fn(|k| if mask & (1 << k) != 0 { u } else { &one });
        m_chain(args)
    });
    let mut acc = vec![0.0; u.len()];
    for t in &terms {
        for (a, &b) in acc.iter_mut().zip(t.values()) {
            *a -= b;
        }
    }
    Ok(GridFunction::raw(*u.grid(), acc))
}

pub fn nonlinearity(u: &GridFunction) -> Result<GridFunction> {
    nonlinearity_with_guard(u, DEFAULT_GUARD)
}

/// The literal p(D)u − 𝓜(1+u,…,1+u).
pub fn nonlinearity_direct(u: &GridFunction, guard: f64) -> Result<GridFunction> {
    check_guard(u, guard)?;
    let f = u.offset(1.0);
    let m = m_apply([&f, &f, &f, &f, &f])?;
    pd_apply(u)?.zip_with(&m, |a, b| a - b)
}

fn binom(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// 𝓝 rebuilt from symmetrized terms in φ = u − u0 with constant coefficients:
/// 𝓝 = −Σ_j [Σ_{k ≥ max(2,j)} C(5,k)C(k,j)u0^{k−j}] 𝓜_sym(φʲ, 1^{5−j}).
pub fn nonlinearity_decomposed(u: &GridFunction, u0: f64, guard: f64) -> Result<GridFunction> {
    check_guard(u, guard)?;
    let g = *u.grid();
    let phi = u.offset(-u0);
    let one = GridFunction::constant(g, 1.0);
    let mut acc = GridFunction::zeros(g);
    for j in 1..=5u32 {
        let coef: f64 = (j.max(2)..=5)
            .map(|k| binom(5, k) * binom(k, j) * u0.powi((k - j) as i32))
            .sum();
        let args: [&GridFunction; 5] = std::array::from_fn(|k| if (k as u32) < j { &phi } else { &one });
        let term = m_sym_apply(args)?;
        acc = acc.axpby(1.0, &term, -coef)?;
    }
    Ok(acc)
}

fn v_chain(f: [&GridFunction; 3]) -> GridFunction {
    let g = *f[0].grid();
    let h = g.h();
    let mut t = f[2].values().to_vec();
    let mut s = vec![0.0; t.len()];
    d_plus(&mut t, 0.5, h, &mut s);
    mul_in(&mut t, f[1]);
    d_plus(&mut t, -0.5, h, &mut s);
    mul_in(&mut t, f[0]);
    for v in t.iter_mut() {
        *v *= 1.5;
    }
    GridFunction::raw(g, t)
}

/// 𝓜̃(F₁,F₂,F₃) = (3/2) F₁ (D − ½)[F₂ (D + ½) F₃].
pub fn velocity_tilde(f: [&GridFunction; 3]) -> Result<GridFunction> {
    common_grid(&f)?;
    Ok(v_chain(f))
}

/// Average of 𝓜̃ over the 6 argument permutations.
pub fn velocity_tilde_sym(f: [&GridFunction; 3]) -> Result<GridFunction> {
    common_grid(&f)?;
    let arr = arrangements(&labels_of(&f));
    let terms: Vec<GridFunction> = arr
        .iter()
        .map(|a| v_chain([f[a[0]], f[a[1]], f[a[2]]]))
        .collect();
    Ok(average(&terms))
}

/// Candidate arguments of p̃(D) in the linear velocity term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BReading {
    /// p̃(D)(u − u0)
    Increment,
    /// p̃(D)(1 + u)
    Full,
    /// p̃(D)(1 + u0), a constant
    Constant,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VelocityDecomposition {
    pub a: f64,
    pub b: GridFunction,
    pub c: GridFunction,
    /// Reading whose A + B + C reproduces 𝓜̃(F,F,F).
    pub reading: BReading,
    /// sup |A + B + C − 𝓜̃(F,F,F)| for each reading.
    pub mismatch: Vec<(BReading, f64)>,
}

/// V = A + B + C around the constant u0:
/// A = −(3/8)(1+u0)³, B = (3/2)(1+u0)² p̃(D)(·), C = the quadratic and cubic
/// symmetrized terms in φ = u − u0.
pub fn velocity_decomposition(u: &GridFunction, u0: f64) -> Result<VelocityDecomposition> {
    check_guard(u, DEFAULT_GUARD)?;
    let g = *u.grid();
    let a0 = 1.0 + u0;
    let big_a = -0.375 * a0.powi(3);
    let f = u.offset(1.0);
    let direct = v_chain([&f, &f, &f]);
    let phi = u.offset(-u0);
    let one = GridFunction::constant(g, 1.0);
    let quad = velocity_tilde_sym([&phi, &phi, &one])?;
    let cubic = v_chain([&phi, &phi, &phi]);
    let c = quad.axpby(3.0 * a0, &cubic, 1.0)?;
    let pt = p_tilde_exact().to_real();
    let mut best: Option<(BReading, GridFunction, f64)> = None;
    let mut mismatch = Vec::new();
    for reading in [BReading::Increment, BReading::Full, BReading::Constant] {
        let arg = match reading {
            BReading::Increment => phi.clone(),
            BReading::Full => f.clone(),
            BReading::Constant => GridFunction::constant(g, a0),
        };
        let b = poly_of_d(&arg, &pt)?.scale(1.5 * a0 * a0);
        let total = b.zip_unchecked(&c, |x, y| x + y).offset(big_a);
        let err = sup_norm(&(&total - &direct));
        mismatch.push((reading, err));
        if best.as_ref().is_none_or(|(_, _, e)| err < *e) {
            best = Some((reading, b, err));
        }
    }
    let (reading, b, _) = best.expect("three readings");
    Ok(VelocityDecomposition {
        a: big_a,
        b,
        c,
        reading,
        mismatch,
    })
}
