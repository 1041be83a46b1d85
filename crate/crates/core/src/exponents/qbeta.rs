use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = Ratio<i128>;

/// The irrational root (√13 − 1)/4 of ζ² + ζ/2 − 3/4.
pub fn beta() -> f64 {
    (13f64.sqrt() - 1.0) / 4.0
}

/// Exact element `a + b·β` of the quadratic field Q(β), using β² = 3/4 − β/2.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct QBeta {
    pub a: Rational,
    pub b: Rational,
}

impl QBeta {
    pub fn new(a: Rational, b: Rational) -> Self {
        QBeta { a, b }
    }

    pub fn int(a: i64) -> Self {
        QBeta::new(Rational::from_integer(a as i128), Rational::zero())
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        QBeta::new(Rational::new(num as i128, den as i128), Rational::zero())
    }

    pub fn beta() -> Self {
        QBeta::new(Rational::zero(), Rational::one())
    }

    /// `n1 + n2·β`.
    pub fn lattice(n1: i64, n2: i64) -> Self {
        QBeta::new(
            Rational::from_integer(n1 as i128),
            Rational::from_integer(n2 as i128),
        )
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64().unwrap() + self.b.to_f64().unwrap() * beta()
    }

    /// Exact sign. With P = a − b/4 and Q = b/4 the value is P + Q·√13.
    pub fn signum(&self) -> Ordering {
        let q4 = Rational::new(1, 4);
        let p = self.a - self.b * q4;
        let q = self.b * q4;
        let sp = p.cmp(&Rational::zero());
        let sq = q.cmp(&Rational::zero());
        if sq == Ordering::Equal {
            return sp;
        }
        if sp == Ordering::Equal || sp == sq {
            return sq;
        }
        let p2 = p * p;
        let q2 = q * q * Rational::from_integer(13);
        if p2 > q2 {
            sp
        } else {
            sq
        }
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// `2·self` is an integer (self ∈ ½ℤ).
    pub fn is_half_integer_multiple(&self) -> bool {
        self.is_rational() && (self.a * Rational::from_integer(2)).is_integer()
    }

    pub fn abs(self) -> Self {
        if self.signum() == Ordering::Less {
            -self
        } else {
            self
        }
    }

    /// Multiplicative inverse through the conjugate −β − ½.
    pub fn recip(self) -> Option<Self> {
        let half = Rational::new(1, 2);
        let norm = self.a * self.a - self.a * self.b * half - self.b * self.b * Rational::new(3, 4);
        if norm.is_zero() {
            return None;
        }
        Some(QBeta::new((self.a - self.b * half) / norm, -self.b / norm))
    }
}

impl fmt::Debug for QBeta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for QBeta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => write!(f, "{}", self.a),
            (true, false) => write!(f, "{}β", self.b),
            (false, false) => {
                if self.b.is_negative() {
                    write!(f, "{}-{}β", self.a, -self.b)
                } else {
                    write!(f, "{}+{}β", self.a, self.b)
                }
            }
        }
    }
}

impl PartialOrd for QBeta {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QBeta {
    fn cmp(&self, other: &Self) -> Ordering {
        (*self - *other).signum()
    }
}

impl Add for QBeta {
    type Output = QBeta;
    fn add(self, o: QBeta) -> QBeta {
        QBeta::new(self.a + o.a, self.b + o.b)
    }
}

impl Sub for QBeta {
    type Output = QBeta;
    fn sub(self, o: QBeta) -> QBeta {
        QBeta::new(self.a - o.a, self.b - o.b)
    }
}

impl Neg for QBeta {
    type Output = QBeta;
    fn neg(self) -> QBeta {
        QBeta::new(-self.a, -self.b)
    }
}

impl Mul for QBeta {
    type Output = QBeta;
    fn mul(self, o: QBeta) -> QBeta {
        let bd = self.b * o.b;
        QBeta::new(
            self.a * o.a + bd * Rational::new(3, 4),
            self.a * o.b + self.b * o.a - bd * Rational::new(1, 2),
        )
    }
}

impl Zero for QBeta {
    fn zero() -> Self {
        QBeta::int(0)
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

impl One for QBeta {
    fn one() -> Self {
        QBeta::int(1)
    }
}
