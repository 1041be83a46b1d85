use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::ser::SerializeStruct;
use serde::Serialize;

use super::poly::{p_shift_exact, ExactPolynomial, Poly};
use super::qbeta::{beta, QBeta};

/// A point `n1 + n2·β` of the exponent lattice. Shifted sets such as
/// `I_n − 1` may carry a negative `n1`; admissible exponents have both
/// components nonnegative.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Exponent {
    pub n1: i64,
    pub n2: i64,
}

impl Exponent {
    pub const ZERO: Exponent = Exponent { n1: 0, n2: 0 };
    pub const BETA: Exponent = Exponent { n1: 0, n2: 1 };

    pub fn new(n1: i64, n2: i64) -> Self {
        Exponent { n1, n2 }
    }

    pub fn value(&self) -> f64 {
        self.n1 as f64 + self.n2 as f64 * beta()
    }

    pub fn exact(&self) -> QBeta {
        QBeta::lattice(self.n1, self.n2)
    }

    pub fn is_admissible(&self) -> bool {
        self.n1 >= 0 && self.n2 >= 0
    }

    /// `self + k` for an integer k.
    pub fn shift(&self, k: i64) -> Self {
        Exponent::new(self.n1 + k, self.n2)
    }

    pub fn plus(&self, o: &Exponent) -> Self {
        Exponent::new(self.n1 + o.n1, self.n2 + o.n2)
    }

    /// Exact comparison against an integer.
    pub fn cmp_int(&self, k: i64) -> Ordering {
        self.cmp(&Exponent::new(k, 0))
    }
}

impl Ord for Exponent {
    fn cmp(&self, o: &Self) -> Ordering {
        // sign of d1 + d2·β, times 4: (4·d1 − d2) + d2·√13
        let d1 = self.n1 - o.n1;
        let d2 = self.n2 - o.n2;
        let p = 4 * d1 - d2;
        let sp = p.cmp(&0);
        let sq = d2.cmp(&0);
        if sq == Ordering::Equal {
            return sp;
        }
        if sp == Ordering::Equal || sp == sq {
            return sq;
        }
        if (p as i128) * (p as i128) > 13 * (d2 as i128) * (d2 as i128) {
            sp
        } else {
            sq
        }
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Debug for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.n1, self.n2) {
            (a, 0) => write!(f, "{a}"),
            (0, 1) => write!(f, "β"),
            (0, b) => write!(f, "{b}β"),
            (a, 1) => write!(f, "{a}+β"),
            (a, b) => write!(f, "{a}+{b}β"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Exponent", 3)?;
        st.serialize_field("n1", &self.n1)?;
        st.serialize_field("n2", &self.n2)?;
        st.serialize_field("value", &self.value())?;
        st.end()
    }
}

/// K_{N0}: all admissible exponents with value below N0, ascending.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentLattice {
    pub n0: u32,
    pub entries: Vec<Exponent>,
}

impl ExponentLattice {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, e: &Exponent) -> bool {
        self.entries.binary_search(e).is_ok()
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(Exponent::value).collect()
    }
}

/// Exponents with value strictly below `bound` (bound > 0).
pub fn lattice_below(bound: QBeta) -> Vec<Exponent> {
    let mut out = Vec::new();
    let mut n2 = 0;
    while QBeta::lattice(0, n2) < bound {
        let mut n1 = 0;
        while QBeta::lattice(n1, n2) < bound {
            out.push(Exponent::new(n1, n2));
            n1 += 1;
        }
        n2 += 1;
    }
    out.sort();
    out
}

pub fn lattice(n0: u32) -> ExponentLattice {
    assert!(n0 >= 1, "lattice order must be positive");
    ExponentLattice {
        n0,
        entries: lattice_below(QBeta::int(n0 as i64)),
    }
}

/// I_n and J_n. J_n holds the non-integer, non-(integer + β) exponents in
/// (0, n); I_n is the part of J_n above n − 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexFamily {
    pub n: u32,
    pub i_n: Vec<Exponent>,
    pub j_n: Vec<Exponent>,
}

pub fn j_set(n: u32) -> Vec<Exponent> {
    if n == 0 {
        return Vec::new();
    }
    lattice(n).entries.into_iter().filter(|e| e.n2 >= 2).collect()
}

pub fn i_set(n: u32) -> Vec<Exponent> {
    if n == 0 {
        return Vec::new();
    }
    j_set(n)
        .into_iter()
        .filter(|e| e.cmp_int(n as i64 - 1) == Ordering::Greater)
        .collect()
}

pub fn index_sets(n: u32) -> IndexFamily {
    assert!(n >= 1);
    IndexFamily {
        n,
        i_n: i_set(n),
        j_n: j_set(n),
    }
}

fn roots_poly(set: &[Exponent], offset: i64) -> ExactPolynomial {
    let roots: Vec<QBeta> = set.iter().map(|e| e.shift(offset).exact()).collect();
    Poly::from_roots(&roots)
}

/// q̃_n(ζ) = ∏_{I_n}(ζ − i) − ∏_{I_n}(ζ − i + 1).
pub fn q_tilde(n: u32) -> ExactPolynomial {
    let i_n = i_set(n);
    roots_poly(&i_n, 0).sub(&roots_poly(&i_n, -1))
}

/// q_n through q_n = q̃_n + q_{n−1}·∏_{(I_n − 1) \ I_{n−1}}(ζ − j), q_1 = 0.
pub fn q_polynomial(n: u32) -> ExactPolynomial {
    assert!(n >= 1);
    let mut q = Poly::zero();
    for k in 2..=n {
        let prev: BTreeSet<Exponent> = i_set(k - 1).into_iter().collect();
        let extra: Vec<Exponent> = i_set(k)
            .iter()
            .map(|e| e.shift(-1))
            .filter(|e| !prev.contains(e))
            .collect();
        q = q_tilde(k).add(&q.mul(&roots_poly(&extra, 0)));
    }
    q
}

/// Root lists of the operators producing w⁽ⁿ⁾, v⁽ⁿ⁾ and r⁽ⁿ⁾ from u and f.
/// Kept factored: applying a degree-14 operator factor by factor is far
/// better conditioned than Horner on the expanded coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct CascadePolynomials {
    pub n: u32,
    pub w_roots: Vec<QBeta>,
    pub v_roots: Vec<QBeta>,
    pub r_roots: Vec<QBeta>,
}

impl CascadePolynomials {
    pub fn p_w(&self) -> ExactPolynomial {
        Poly::from_roots(&self.w_roots)
    }
    pub fn p_v(&self) -> ExactPolynomial {
        Poly::from_roots(&self.v_roots)
    }
    pub fn p_r(&self) -> ExactPolynomial {
        Poly::from_roots(&self.r_roots)
    }
}

fn p_shift_roots(n: i64) -> Vec<QBeta> {
    super::poly::p_roots()
        .iter()
        .map(|&r| r + QBeta::int(n))
        .collect()
}

pub fn cascade_polynomials(n: u32) -> CascadePolynomials {
    assert!(n >= 1);
    let n = n as i64;
    let exps = |s: Vec<Exponent>| s.into_iter().map(|e| e.exact()).collect::<Vec<_>>();
    let mut w_roots: Vec<QBeta> = (0..n).flat_map(p_shift_roots).collect();
    w_roots.extend(exps(j_set(n as u32)));
    let mut v_roots: Vec<QBeta> = (0..n).flat_map(p_shift_roots).collect();
    v_roots.extend(exps(j_set(n as u32 - 1)));
    let mut r_roots: Vec<QBeta> = (1..=n).flat_map(p_shift_roots).collect();
    r_roots.extend(exps(j_set(n as u32)));
    CascadePolynomials {
        n: n as u32,
        w_roots,
        v_roots,
        r_roots,
    }
}

/// p(ζ − n) as an exact polynomial; re-exported for the cascade.
pub fn p_shifted(n: i64) -> ExactPolynomial {
    p_shift_exact(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lattices() {
        assert_eq!(lattice(1).entries, vec![Exponent::ZERO, Exponent::BETA]);
        let k2 = lattice(2).entries;
        let expect = [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (0, 3)];
        assert_eq!(k2.len(), 6);
        for (e, (a, b)) in k2.iter().zip(expect) {
            assert_eq!(*e, Exponent::new(a, b));
        }
        assert_eq!(lattice_below(QBeta::beta()), vec![Exponent::ZERO]);
    }

    #[test]
    fn lattice_gaps() {
        for n0 in 1..=8 {
            let v = lattice(n0).values();
            assert!(v.windows(2).all(|w| w[1] - w[0] > 1e-9));
        }
    }

    #[test]
    fn index_set_examples() {
        assert!(i_set(1).is_empty());
        assert_eq!(i_set(2), vec![Exponent::new(0, 2), Exponent::new(0, 3)]);
        assert_eq!(
            i_set(3),
            vec![Exponent::new(1, 2), Exponent::new(0, 4), Exponent::new(1, 3)]
        );
    }

    #[test]
    fn index_set_structure() {
        for n in 1..=8u32 {
            let mut union: Vec<Exponent> = (1..=n).flat_map(i_set).collect();
            union.sort();
            assert_eq!(union, j_set(n));
            if n >= 2 {
                let shifted: BTreeSet<Exponent> = i_set(n).iter().map(|e| e.shift(-1)).collect();
                assert!(i_set(n - 1).iter().all(|e| shifted.contains(e)));
            }
        }
    }

    #[test]
    fn q2_closed_form() {
        let q2 = q_polynomial(2);
        let expect = Poly::new(vec![QBeta::lattice(-1, 5), QBeta::int(-2)]);
        assert_eq!(q2, expect);
        assert_eq!(q2.degree(), 1);
    }

    #[test]
    fn q_degree_bound() {
        for n in 2..=6 {
            assert!(q_polynomial(n).degree() < i_set(n).len().max(1));
        }
    }

    #[test]
    fn cascade_degrees_and_factorization() {
        let c1 = cascade_polynomials(1);
        assert_eq!(c1.p_w(), super::super::poly::p_exact());
        let c2 = cascade_polynomials(2);
        assert_eq!(c2.p_w().degree(), 10);
        for n in 1..=4 {
            let c = cascade_polynomials(n);
            let i_n: Vec<QBeta> = i_set(n).iter().map(|e| e.exact()).collect();
            assert_eq!(c.p_w(), c.p_v().mul(&Poly::from_roots(&i_n)));
        }
    }
}
