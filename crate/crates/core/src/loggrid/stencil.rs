//! Finite-difference stencils in s. All rows are applied in difference form,
//! Σ_j w_j (u_j − u_i), so constants are annihilated exactly.

use super::grid::{GridFunction, LogGrid};
use crate::error::{Error, Result};
use crate::exponents::RealPolynomial;

/// Fornberg's recursion: weights c[k][j] for the k-th derivative at `z`
/// from the nodes `x`, for k = 0..=m.
pub fn fornberg(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// One stencil row: weights for the nodes start..start + w.len().
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub start: usize,
    pub weights: Vec<f64>,
}

/// Derivative stencil of a given order with 4th-order accuracy.
#[derive(Clone, Debug, PartialEq)]
pub struct Stencil {
    pub order: usize,
    pub half_width: usize,
    pub interior: Vec<f64>,
    pub left: Vec<Row>,
    pub right: Vec<Row>,
    pub h: f64,
}

impl Stencil {
    pub fn new(order: usize, grid: &LogGrid) -> Result<Self> {
        if !(1..=4).contains(&order) {
            return Err(Error::InvalidInput(format!(
                "derivative order {order} outside 1..=4; compose for higher"
            )));
        }
        let hw = if order <= 2 { 2 } else { 3 };
        let wb = (2 * hw + 1).max(order + 4);
        if grid.count < wb + 2 * hw {
            return Err(Error::GridTooSmall {
                count: grid.count,
                needed: wb + 2 * hw,
            });
        }
        let h = grid.h();
        let scale = h.powi(order as i32);
        let nodes_c: Vec<f64> = (-(hw as i64)..=hw as i64).map(|k| k as f64).collect();
        let interior: Vec<f64> = fornberg(0.0, &nodes_c, order)[order]
            .iter()
            .map(|w| w / scale)
            .collect();
        let nodes_b: Vec<f64> = (0..wb).map(|k| k as f64).collect();
        let n = grid.count;
        let mut left = Vec::new();
        let mut right = Vec::new();
        for i in 0..hw {
            let w: Vec<f64> = fornberg(i as f64, &nodes_b, order)[order]
                .iter()
                .map(|w| w / scale)
                .collect();
            left.push(Row { start: 0, weights: w.clone() });
            // mirror: the k-th derivative picks up (−1)^k
            let sign = if order % 2 == 1 { -1.0 } else { 1.0 };
            let mut wr: Vec<f64> = w.iter().rev().map(|x| sign * x).collect();
            wr.shrink_to_fit();
            right.push(Row { start: n - wb, weights: wr });
        }
        right.reverse();
        Ok(Stencil {
            order,
            half_width: hw,
            interior,
            left,
            right,
            h,
        })
    }

    /// Row `i` as (start, weights).
    pub fn row(&self, i: usize, n: usize) -> (usize, &[f64]) {
        let hw = self.half_width;
        if i < hw {
            (self.left[i].start, &self.left[i].weights)
        } else if i >= n - hw {
            let r = &self.right[i - (n - hw)];
            (r.start, &r.weights)
        } else {
            (i - hw, &self.interior)
        }
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let mut out = vec![0.0; n];
        for (i, o) in out.iter_mut().enumerate() {
            let (start, w) = self.row(i, n);
            let ui = u[i];
            let mut acc = 0.0;
            for (k, &wk) in w.iter().enumerate() {
                acc += wk * (u[start + k] - ui);
            }
            *o = acc;
        }
        out
    }
}

/// D_h: the first-derivative operator every composite operator is built from.
/// Interior weights (1, −8, 0, 8, −1)/(12h), one-sided 5-point rows at the
/// two boundary bands.
pub(crate) fn d1_values(u: &[f64], h: f64) -> Vec<f64> {
    let n = u.len();
    let mut out = vec![0.0; n];
    d1_into(u, h, &mut out);
    out
}

pub(crate) fn d1_into(u: &[f64], h: f64, out: &mut [f64]) {
    let n = u.len();
    let c = 1.0 / (12.0 * h);
    out[0] = c * (48.0 * (u[1] - u[0]) - 36.0 * (u[2] - u[0]) + 16.0 * (u[3] - u[0])
        - 3.0 * (u[4] - u[0]));
    out[1] = c * (-3.0 * (u[0] - u[1]) + 18.0 * (u[2] - u[1]) - 6.0 * (u[3] - u[1])
        + (u[4] - u[1]));
    for i in 2..n - 2 {
        out[i] = c * (8.0 * (u[i + 1] - u[i - 1]) - (u[i + 2] - u[i - 2]));
    }
    let (a, b) = (n - 1, n - 2);
    out[a] = -c * (48.0 * (u[a - 1] - u[a]) - 36.0 * (u[a - 2] - u[a]) + 16.0 * (u[a - 3] - u[a])
        - 3.0 * (u[a - 4] - u[a]));
    out[b] = -c * (-3.0 * (u[b + 1] - u[b]) + 18.0 * (u[b - 1] - u[b]) - 6.0 * (u[b - 2] - u[b])
        + (u[b - 3] - u[b]));
}

/// Rows of D_h as (start, weights) for matrix assembly.
pub fn d1_rows(n: usize, h: f64) -> Vec<(usize, Vec<f64>)> {
    let c = 1.0 / (12.0 * h);
    let mut rows = Vec::with_capacity(n);
    rows.push((0, vec![-25.0 * c, 48.0 * c, -36.0 * c, 16.0 * c, -3.0 * c]));
    rows.push((0, vec![-3.0 * c, -10.0 * c, 18.0 * c, -6.0 * c, c]));
    for i in 2..n - 2 {
        rows.push((i - 2, vec![c, -8.0 * c, 0.0, 8.0 * c, -c]));
    }
    rows.push((n - 5, vec![-c, 6.0 * c, -18.0 * c, 10.0 * c, 3.0 * c]));
    rows.push((n - 5, vec![3.0 * c, -16.0 * c, 36.0 * c, -48.0 * c, 25.0 * c]));
    rows
}

fn check_size(g: &LogGrid, needed: usize) -> Result<()> {
    if g.count < needed {
        Err(Error::GridTooSmall {
            count: g.count,
            needed,
        })
    } else {
        Ok(())
    }
}

/// Dᵏu for k ≤ 4 with direct 4th-order stencils.
pub fn d_apply(u: &GridFunction, order: usize) -> Result<GridFunction> {
    if order == 1 {
        check_size(u.grid(), 10)?;
        return Ok(GridFunction::raw(*u.grid(), d1_values(u.values(), u.grid().h())));
    }
    let st = Stencil::new(order, u.grid())?;
    Ok(GridFunction::raw(*u.grid(), st.apply(u.values())))
}

/// D_h applied `k` times.
pub fn d_power(u: &GridFunction, k: usize) -> Result<GridFunction> {
    check_size(u.grid(), 10)?;
    let h = u.grid().h();
    let mut v = u.values().to_vec();
    let mut w = vec![0.0; v.len()];
    for _ in 0..k {
        d1_into(&v, h, &mut w);
        std::mem::swap(&mut v, &mut w);
    }
    Ok(GridFunction::raw(*u.grid(), v))
}

/// P(D)u by Horner composition of D_h.
pub fn poly_of_d(u: &GridFunction, p: &RealPolynomial) -> Result<GridFunction> {
    check_size(u.grid(), 10)?;
    let c = p.coeffs();
    let h = u.grid().h();
    let uv = u.values();
    let d = c.len() - 1;
    let mut res: Vec<f64> = uv.iter().map(|&x| c[d] * x).collect();
    let mut tmp = vec![0.0; uv.len()];
    for k in (0..d).rev() {
        d1_into(&res, h, &mut tmp);
        for ((r, &t), &x) in res.iter_mut().zip(&tmp).zip(uv) {
            *r = t + c[k] * x;
        }
    }
    Ok(GridFunction::raw(*u.grid(), res))
}

/// ∏(D_h − r)u, factor by factor.
pub fn roots_of_d(u: &GridFunction, roots: &[f64]) -> Result<GridFunction> {
    check_size(u.grid(), 10)?;
    let h = u.grid().h();
    let mut v = u.values().to_vec();
    let mut w = vec![0.0; v.len()];
    for &r in roots {
        d1_into(&v, h, &mut w);
        for (a, &b) in w.iter_mut().zip(&v) {
            *a -= r * b;
        }
        std::mem::swap(&mut v, &mut w);
    }
    Ok(GridFunction::raw(*u.grid(), v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::{beta, p_exact};

    fn interior_max_rel(a: &GridFunction, b: &GridFunction, margin: usize) -> f64 {
        let n = a.len();
        (margin..n - margin)
            .map(|i| (a.values()[i] - b.values()[i]).abs() / b.values()[i].abs().max(1e-300))
            .fold(0.0, f64::max)
    }

    #[test]
    fn fornberg_matches_known_weights() {
        let w = fornberg(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 1);
        let e = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
        for (a, b) in w[1].iter().zip(e) {
            assert!((a - b).abs() < 1e-14);
        }
        let rows = d1_rows(20, 1.0);
        let st = Stencil::new(1, &LogGrid::new(0.0, 19.0, 20).unwrap()).unwrap();
        for i in [0, 1, 18, 19] {
            let (s, w) = st.row(i, 20);
            assert_eq!(s, rows[i].0);
            for (a, b) in w.iter().zip(&rows[i].1) {
                assert!((a - b).abs() < 1e-12, "row {i}");
            }
        }
    }

    #[test]
    fn constants_are_annihilated_exactly() {
        let g = LogGrid::default();
        let one = GridFunction::constant(g, 1.0);
        for k in 1..=4 {
            assert!(d_apply(&one, k).unwrap().values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn eigenfunction_accuracy() {
        let g = LogGrid::new(-4.0, 2.0, 601).unwrap();
        let a = 0.7;
        let u = GridFunction::x_pow(g, a);
        for k in 1..=4 {
            let du = d_apply(&u, k).unwrap();
            let exact = u.scale(a.powi(k as i32));
            // roundoff grows like 1/h^k
            let tol = [1e-8, 1e-8, 1e-7, 1e-5][k - 1];
            assert!(interior_max_rel(&du, &exact, 8) < tol, "order {k}");
            let edge = interior_max_rel(&du, &exact, 0);
            assert!(edge < 1e-2, "order {k}: {edge}");
        }
    }

    #[test]
    fn sine_converges_at_fourth_order() {
        let err = |n: usize| {
            let g = LogGrid::new(-3.0, 3.0, n).unwrap();
            let u = GridFunction::from_fn(g, f64::sin);
            let du = d_apply(&u, 1).unwrap();
            g.s_values()
                .iter()
                .zip(du.values())
                .map(|(s, d)| (d - s.cos()).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2, e3) = (err(61), err(121), err(241));
        assert!((e1 / e2).log2() > 3.7 && (e2 / e3).log2() > 3.7, "{e1} {e2} {e3}");
    }

    #[test]
    fn p_of_d_on_monomials() {
        let g = LogGrid::new(-6.0, 1.0, 701).unwrap();
        let p = p_exact().to_real();
        let u2 = GridFunction::x_pow(g, 2.0);
        let pu = poly_of_d(&u2, &p).unwrap();
        assert!(interior_max_rel(&pu, &u2.scale(29.75), 10) < 1e-6);
        let ub = GridFunction::x_pow(g, beta());
        let pb = poly_of_d(&ub, &p).unwrap();
        let n = g.count;
        let m = (8..n - 8).map(|i| (pb.values()[i] / ub.values()[i]).abs()).fold(0.0, f64::max);
        assert!(m < 1e-6, "{m}");
        let gamma = 0.3;
        let lin = RealPolynomial::new(vec![-gamma, 1.0]);
        let z = poly_of_d(&GridFunction::x_pow(g, gamma), &lin).unwrap();
        assert!(z.values().iter().all(|v| v.abs() < 1e-8));
    }

    #[test]
    fn horner_and_factored_agree() {
        let g = LogGrid::new(-5.0, 2.0, 401).unwrap();
        let u = GridFunction::from_fn(g, |s| (-(s + 1.0).powi(2)).exp());
        let roots = crate::exponents::p_roots_f64(0);
        let a = poly_of_d(&u, &p_exact().to_real()).unwrap();
        let b = roots_of_d(&u, &roots).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-9);
        }
    }
}
