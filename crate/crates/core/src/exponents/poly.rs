use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::Serialize;

use super::qbeta::QBeta;

/// Ring operations needed by [`Poly`].
pub trait Coeff:
    Copy
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
}

impl Coeff for f64 {}
impl Coeff for QBeta {}

/// Dense polynomial, coefficients stored from the constant term upwards.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T: Coeff> {
    coeffs: Vec<T>,
}

pub type RealPolynomial = Poly<f64>;
pub type ExactPolynomial = Poly<QBeta>;

impl<T: Coeff> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(T::zero());
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly::new(vec![T::zero()])
    }

    pub fn constant(c: T) -> Self {
        Poly::new(vec![c])
    }

    /// ζ − r.
    pub fn linear(r: T) -> Self {
        Poly::new(vec![-r, T::one()])
    }

    /// ∏ (ζ − r).
    pub fn from_roots(roots: &[T]) -> Self {
        roots
            .iter()
            .fold(Poly::constant(T::one()), |acc, &r| acc.mul(&Poly::linear(r)))
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, z: T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * z + c)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let get = |v: &Vec<T>, i: usize| v.get(i).copied().unwrap_or_else(T::zero);
        Poly::new((0..n).map(|i| get(&self.coeffs, i) + get(&o.coeffs, i)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-T::one()))
    }

    pub fn scale(&self, c: T) -> Self {
        Poly::new(self.coeffs.iter().map(|&x| x * c).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = vec![T::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in o.coeffs.iter().enumerate() {
                out[i + j] = out[i + j] + a * b;
            }
        }
        Poly::new(out)
    }

    /// ζ ↦ P(ζ − c).
    pub fn shift(&self, c: T) -> Self {
        let lin = Poly::linear(c);
        self.coeffs
            .iter()
            .rev()
            .fold(Poly::zero(), |acc, &k| acc.mul(&lin).add(&Poly::constant(k)))
    }
}

impl ExactPolynomial {
    pub fn to_real(&self) -> RealPolynomial {
        Poly::new(self.coeffs.iter().map(|c| c.to_f64()).collect())
    }
}

impl Serialize for RealPolynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.coeffs.serialize(s)
    }
}

fn q(n: i64, d: i64) -> QBeta {
    QBeta::ratio(n, d)
}

/// Roots of p: {0, β, −β − ½, −3/2}, sorted ascending.
pub fn p_roots() -> [QBeta; 4] {
    [q(-3, 2), -QBeta::beta() - q(1, 2), QBeta::int(0), QBeta::beta()]
}

/// p(ζ) = ζ(ζ² + ζ/2 − 3/4)(ζ + 3/2) = ζ⁴ + 2ζ³ − (9/8)ζ.
pub fn p_exact() -> ExactPolynomial {
    Poly::new(vec![QBeta::int(0), q(-9, 8), QBeta::int(0), QBeta::int(2), QBeta::int(1)])
}

/// p(ζ − n), exactly.
pub fn p_shift_exact(n: i64) -> ExactPolynomial {
    let roots: Vec<QBeta> = p_roots().iter().map(|&r| r + QBeta::int(n)).collect();
    Poly::from_roots(&roots)
}

/// p̃(ζ) = ζ² + ζ/2 − 3/4 = (ζ + β + ½)(ζ − β).
pub fn p_tilde_exact() -> ExactPolynomial {
    Poly::new(vec![q(-3, 4), q(1, 2), QBeta::int(1)])
}

/// p(ζ − shift) from the factored form.
pub fn p_eval(zeta: f64, shift: i64) -> f64 {
    let z = zeta - shift as f64;
    let b = super::qbeta::beta();
    z * (z - b) * (z + b + 0.5) * (z + 1.5)
}
