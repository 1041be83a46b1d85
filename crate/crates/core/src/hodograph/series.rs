use std::collections::BTreeMap;

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exponents::Exponent;

/// Generalized power series Σ aᵢ xⁱ over lattice exponents, truncated to
/// i < `bound`. Exponents are exact; coefficients are floats.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    bound: u32,
    terms: BTreeMap<Exponent, f64>,
}

#[derive(Serialize)]
struct Entry {
    n1: i64,
    n2: i64,
    exponent: f64,
    coefficient: f64,
}

impl Serialize for Series {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.terms.len()))?;
        for (e, &c) in &self.terms {
            seq.serialize_element(&Entry {
                n1: e.n1,
                n2: e.n2,
                exponent: e.value(),
                coefficient: c,
            })?;
        }
        seq.end()
    }
}

impl Series {
    pub fn zero(bound: u32) -> Self {
        Series {
            bound,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(bound: u32, c: f64) -> Self {
        let mut s = Series::zero(bound);
        s.insert(Exponent::ZERO, c);
        s
    }

    /// Drops exponents at or above `bound`; repeated exponents add up.
    pub fn from_terms(bound: u32, terms: impl IntoIterator<Item = (Exponent, f64)>) -> Result<Self> {
        let mut s = Series::zero(bound);
        for (e, c) in terms {
            if !e.is_admissible() {
                return Err(Error::InvalidInput(format!("exponent {e} is not admissible")));
            }
            if !c.is_finite() {
                return Err(Error::NonFinite("series coefficient"));
            }
            s.insert(e, c);
        }
        Ok(s)
    }

    fn insert(&mut self, e: Exponent, c: f64) {
        if e.cmp_int(self.bound as i64).is_lt() && c != 0.0 {
            *self.terms.entry(e).or_insert(0.0) += c;
        }
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    pub fn coeff(&self, e: Exponent) -> f64 {
        self.terms.get(&e).copied().unwrap_or(0.0)
    }

    pub fn constant_term(&self) -> f64 {
        self.coeff(Exponent::ZERO)
    }

    pub fn terms(&self) -> impl Iterator<Item = (Exponent, f64)> + '_ {
        self.terms.iter().map(|(e, c)| (*e, *c))
    }

    pub fn exponents(&self) -> Vec<Exponent> {
        self.terms.keys().copied().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|(e, c)| c * x.powf(e.value())).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn add(&self, o: &Series) -> Series {
        let mut out = Series::zero(self.bound.min(o.bound));
        for (e, c) in self.terms().chain(o.terms()) {
            out.insert(e, c);
        }
        out
    }

    pub fn sub(&self, o: &Series) -> Series {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, a: f64) -> Series {
        let mut out = Series::zero(self.bound);
        for (e, c) in self.terms() {
            out.insert(e, a * c);
        }
        out
    }

    /// xᵉ · self.
    pub fn shift(&self, e: Exponent) -> Series {
        let mut out = Series::zero(self.bound);
        for (f, c) in self.terms() {
            out.insert(f.plus(&e), c);
        }
        out
    }

    pub fn mul(&self, o: &Series) -> Series {
        let mut out = Series::zero(self.bound.min(o.bound));
        for (a, ca) in self.terms() {
            for (b, cb) in o.terms() {
                out.insert(a.plus(&b), ca * cb);
            }
        }
        out
    }

    /// Terms with exponent strictly above 0.
    pub fn tail(&self) -> Series {
        let mut out = self.clone();
        out.terms.remove(&Exponent::ZERO);
        out
    }

    /// Σₖ wᵏ·g(k) with w = tail/a₀, summed until wᵏ truncates away.
    /// Every nonzero lattice exponent is at least β, so this terminates.
    fn binomial_sum(&self, mut weight: impl FnMut(usize) -> f64) -> Series {
        let a0 = self.constant_term();
        let w = self.tail().scale(1.0 / a0);
        let mut out = Series::constant(self.bound, weight(0));
        let mut wk = Series::constant(self.bound, 1.0);
        let mut k = 1;
        loop {
            wk = wk.mul(&w);
            if wk.is_empty() {
                return out;
            }
            out = out.add(&wk.scale(weight(k)));
            k += 1;
        }
    }

    pub fn reciprocal(&self) -> Result<Series> {
        let a0 = self.constant_term();
        if a0 == 0.0 {
            return Err(Error::InvalidInput("reciprocal needs a nonzero constant term".into()));
        }
        Ok(self
            .binomial_sum(|k| if k % 2 == 0 { 1.0 } else { -1.0 })
            .scale(1.0 / a0))
    }

    /// selfʳ for a positive constant term.
    pub fn powf(&self, r: f64) -> Result<Series> {
        let a0 = self.constant_term();
        if a0 <= 0.0 {
            return Err(Error::InvalidInput("real power needs a positive constant term".into()));
        }
        let mut binom = 1.0;
        let s = self.binomial_sum(|k| {
            if k > 0 {
                binom *= (r - (k - 1) as f64) / k as f64;
            }
            binom
        });
        Ok(s.scale(a0.powf(r)))
    }

    /// Σ aᵢ yⁱ with y = x·b(x), b(0) > 0.
    pub fn compose_scaled(&self, b: &Series) -> Result<Series> {
        let bound = self.bound.min(b.bound);
        let mut out = Series::zero(bound);
        for (e, c) in self.terms() {
            let be = b.powf(e.value())?;
            out = out.add(&be.shift(e).scale(c));
        }
        Ok(out)
    }

    /// For y = x·a(x) returns b with x = y·b(y), by iterative substitution
    /// b ← 1/a(y·b). Each pass fixes at least β more of the expansion.
    pub fn invert_scaled(&self) -> Result<Series> {
        let a0 = self.constant_term();
        if a0 <= 0.0 {
            return Err(Error::InvalidInput("inversion needs a positive leading factor".into()));
        }
        let passes = (self.bound as f64 / crate::exponents::beta()).ceil() as usize + 1;
        let mut b = Series::constant(self.bound, 1.0 / a0);
        for _ in 0..passes {
            b = self.compose_scaled(&b)?.reciprocal()?;
        }
        Ok(b)
    }

    pub(crate) fn retain(&mut self, keep: impl Fn(&Exponent) -> bool) {
        self.terms.retain(|e, _| keep(e));
    }
}
