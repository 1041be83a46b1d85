use serde::Serialize;

use super::series::Series;
use crate::error::{Error, Result};
use crate::exponents::Exponent;
use crate::loggrid::{ExpansionFit, FitOptions};

/// The expansion of u at x = 0 carried through to the physical variables.
///
/// With x̃ = Z − Z₀:
///   Z_x = Σ (Z_x)ᵢ xⁱ,  x̃ = x·Σ (Z_x)ᵢ/(1+i) xⁱ,
///   x = (1+u₀) x̃ (1 + Σ cᵢ x̃ⁱ),  h = x̃^{3/2} (1 + Σ ũᵢ x̃ⁱ),
///   V(t,Z(t,x)) = Σ Vᵢ xⁱ,  V(t,z) = Σ Ṽᵢ x̃ⁱ.
/// ũ₀ = (1+u₀)^{3/2} − 1 carries the dilation; V₀ = Ṽ₀ = −(3/8)(1+u₀)³.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransportedExpansion {
    pub n0: u32,
    pub source: Series,
    pub zx: Series,
    /// x̃/x as a series in x.
    pub xtilde_factor: Series,
    /// cᵢ, i ≥ β.
    pub inverse: Series,
    /// ũᵢ, including the constant ũ₀.
    pub h_tilde: Series,
    pub velocity: Series,
    pub velocity_tilde: Series,
}

impl TransportedExpansion {
    pub fn u0(&self) -> f64 {
        self.source.constant_term()
    }

    /// x(x̃) from the truncated inversion.
    pub fn x_of(&self, xt: f64) -> f64 {
        (1.0 + self.u0()) * xt * (1.0 + self.inverse.eval(xt))
    }

    pub fn h_of(&self, xt: f64) -> f64 {
        xt.powf(1.5) * (1.0 + self.h_tilde.eval(xt))
    }

    /// Contact-line speed V₀ = (3/8)(1+u₀)³.
    pub fn contact_speed(&self) -> f64 {
        -self.velocity.constant_term()
    }
}

/// 𝓜̃(F,F,F) on monomials: (3/2) x^a (D−½)[x^b (D+½) x^c]
/// = (3/2)(c+½)(b+c−½) x^{a+b+c}.
fn velocity_series(f: &Series) -> Series {
    let terms: Vec<(Exponent, f64)> = f.terms().collect();
    let mut out = Series::zero(f.bound());
    for &(a, fa) in &terms {
        for &(b, fb) in &terms {
            for &(c, fc) in &terms {
                let (bv, cv) = (b.value(), c.value());
                let k = 1.5 * (cv + 0.5) * (bv + cv - 0.5);
                let m = Series::constant(f.bound(), fa * fb * fc * k).shift(a.plus(&b).plus(&c));
                out = out.add(&m);
            }
        }
    }
    out
}

/// Runs the chain on the source series u = Σ uᵢ xⁱ, truncated below `n0`.
pub fn transport_series(u: &Series, n0: u32) -> Result<TransportedExpansion> {
    if u.bound() < n0 {
        return Err(Error::TruncationOrder {
            requested: n0,
            available: u.bound(),
        });
    }
    let source = Series::from_terms(n0, u.terms())?;
    let f = source.add(&Series::constant(n0, 1.0));
    if f.constant_term() <= 0.0 {
        return Err(Error::Degenerate {
            min: f.constant_term(),
            guard: 0.0,
        });
    }
    let zx = f.reciprocal()?;
    let xtilde_factor = Series::from_terms(n0, zx.terms().map(|(e, c)| (e, c / (1.0 + e.value()))))?;
    let b = xtilde_factor.invert_scaled()?;
    let scale = f.constant_term();
    let mut inverse = b.scale(1.0 / scale);
    inverse.retain(|e| *e != Exponent::ZERO);
    let mut h_tilde = b.powf(1.5)?;
    let c0 = h_tilde.constant_term() - 1.0;
    h_tilde.retain(|e| *e != Exponent::ZERO);
    let h_tilde = h_tilde.add(&Series::constant(n0, c0));
    // the only exponent in (0, 1) is β, whose coefficient is p̃(β)·(…) = 0
    let mut velocity = velocity_series(&f);
    velocity.retain(|e| *e == Exponent::ZERO || e.cmp_int(1).is_ge());
    let mut velocity_tilde = velocity.compose_scaled(&b)?;
    velocity_tilde.retain(|e| *e == Exponent::ZERO || e.cmp_int(1).is_ge());
    Ok(TransportedExpansion {
        n0,
        source,
        zx,
        xtilde_factor,
        inverse,
        h_tilde,
        velocity,
        velocity_tilde,
    })
}

/// `transport_series` on the coefficients of a fit of order at least `n0`.
pub fn transport_expansion(fit: &ExpansionFit, n0: u32) -> Result<TransportedExpansion> {
    if fit.n0 < n0 {
        return Err(Error::TruncationOrder {
            requested: n0,
            available: fit.n0,
        });
    }
    // near-degenerate exponent pairs (3β next to 2) only flag the fit; the
    // transport is refused on conditioning alone
    let limit = FitOptions::default().cond_limit;
    if !(fit.condition_number <= limit) {
        return Err(Error::FitFailed(format!(
            "fit is ill-conditioned (condition number {:.2e})",
            fit.condition_number
        )));
    }
    let u = Series::from_terms(n0, fit.terms.iter().map(|t| (t.exponent, t.coefficient)))?;
    transport_series(&u, n0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::beta;

    fn e(n1: i64, n2: i64) -> Exponent {
        Exponent::new(n1, n2)
    }

    #[test]
    fn constant_is_pure_dilation() {
        let c = 0.2;
        let t = transport_series(&Series::constant(3, c), 3).unwrap();
        assert!(t.inverse.is_empty());
        assert_eq!(t.h_tilde.len(), 1);
        let xt: f64 = 0.03;
        assert!((t.x_of(xt) - (1.0 + c) * xt).abs() < 1e-16);
        assert!((t.h_of(xt) - ((1.0 + c) * xt).powf(1.5)).abs() < 1e-15);
        assert!((t.contact_speed() - 0.375 * (1.0 + c).powi(3)).abs() < 1e-15);
        assert_eq!(t.velocity.len(), 1);
    }

    #[test]
    fn velocity_excludes_powers_below_one() {
        let u = Series::from_terms(3, [(Exponent::ZERO, 0.1), (Exponent::BETA, 0.3), (e(1, 0), -0.2)]).unwrap();
        let f = u.add(&Series::constant(3, 1.0));
        let full = velocity_series(&f);
        assert!(full.coeff(Exponent::BETA).abs() < 1e-15);
        let t = transport_series(&u, 3).unwrap();
        assert!(t.velocity.exponents().iter().all(|x| *x == Exponent::ZERO || x.value() >= 1.0));
        assert!(t.velocity.coeff(e(0, 2)) != 0.0);
        assert!(t.zx.exponents().iter().skip(1).all(|x| x.value() >= beta() - 1e-15));
    }

    /// x = x̃·b(x̃) evaluated pointwise against x̃(x) from the series.
    #[test]
    fn inversion_is_identity_to_order() {
        let u = Series::from_terms(2, [(Exponent::ZERO, -0.1), (Exponent::BETA, 0.4), (e(1, 0), 0.3)]).unwrap();
        let t = transport_series(&u, 2).unwrap();
        for xt in [1e-4, 1e-3] {
            let x = t.x_of(xt);
            let back = x * t.xtilde_factor.eval(x);
            assert!((back - xt).abs() < 10.0 * xt.powi(3), "{xt}: {back}");
        }
    }

    #[test]
    fn truncation_order_is_checked() {
        let u = Series::constant(1, 0.0);
        assert!(matches!(
            transport_series(&u, 2),
            Err(Error::TruncationOrder { requested: 2, available: 1 })
        ));
    }

    /// Z(x) = x∫₀¹ dτ/(1 + a x^β τ^β) with τ = v²⁰ and composite Simpson.
    fn z_numeric(a: f64, x: f64) -> f64 {
        let n = 4000;
        let h = 1.0 / n as f64;
        let g = |v: f64| 20.0 * v.powi(19) / (1.0 + a * x.powf(beta()) * v.powf(20.0 * beta()));
        let mut acc = g(0.0) + g(1.0);
        for k in 1..n {
            acc += if k % 2 == 1 { 4.0 } else { 2.0 } * g(k as f64 * h);
        }
        x * acc * h / 3.0
    }

    fn x_numeric(a: f64, xt: f64) -> f64 {
        let mut x = xt;
        for _ in 0..60 {
            let dx = (z_numeric(a, x) - xt) * (1.0 + a * x.powf(beta()));
            x -= dx;
            if dx.abs() < 1e-17 * xt {
                break;
            }
        }
        x
    }

    /// x/x̃ is a power series in ỹ = x̃^β; fit it by least squares and compare
    /// the ỹ, ỹ², ỹ³ coefficients with c_β, c_{2β}, c_{3β}.
    #[test]
    fn single_mode_matches_numeric_inversion() {
        let a = 0.5;
        let u = Series::from_terms(2, [(Exponent::BETA, a)]).unwrap();
        let t = transport_series(&u, 2).unwrap();
        assert_eq!(t.inverse.exponents(), vec![e(0, 1), e(0, 2), e(0, 3)]);
        let (m, deg) = (60, 12);
        let ys: Vec<f64> = (0..m)
            .map(|k| 0.05 * (1.0 - (std::f64::consts::PI * (k as f64 + 0.5) / m as f64).cos()))
            .collect();
        let rows: Vec<f64> = ys
            .iter()
            .flat_map(|&y| (0..=deg).map(move |p| y.powi(p as i32)))
            .collect();
        let am = nalgebra::DMatrix::from_row_slice(m, deg + 1, &rows);
        let rhs = nalgebra::DVector::from_iterator(
            m,
            ys.iter().map(|&y| {
                let xt = y.powf(1.0 / beta());
                x_numeric(a, xt) / xt
            }),
        );
        let coef = am.svd(true, true).solve(&rhs, 1e-14).unwrap();
        assert!((coef[0] - 1.0).abs() < 1e-9);
        for k in 1..=3 {
            let c = t.inverse.coeff(e(0, k));
            assert!((c - coef[k as usize]).abs() < 1e-6, "k = {k}: {c} vs {}", coef[k as usize]);
        }
    }
}
