use serde::Serialize;

use super::lattice::{i_set, j_set, lattice, Exponent};
use super::qbeta::{beta, QBeta};
use crate::error::{Error, Result};

/// Which construction rule produced a weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum WeightRule {
    /// α ∈ (I_{N0} − N0 + 1) ∪ {β}, N = 2..N0
    ExpansionShifted,
    /// same set intersected with (½, 1), N = 1
    ExpansionFirst,
    /// (0, N), N = 2..N0
    Zero,
    /// (1, N), N = 1..N0 − 1
    One,
    /// α ∈ ((I_{N0} − N0 + ½) ∪ {β − ½}) ∩ (0, ½), N = 2..N0
    AbsorbLow,
    /// α ∈ (I_{N0} − N0 + 3/2) ∩ (½, 1), N = 1..N0 − 1
    AbsorbHigh,
    /// (½, N), N = 1..N0
    Half,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Weight {
    #[serde(serialize_with = "ser_qbeta")]
    pub alpha: QBeta,
    pub n: u32,
    pub rule: WeightRule,
}

fn ser_qbeta<S: serde::Serializer>(q: &QBeta, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(q.to_f64())
}

/// α′ = α + sign·δ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shifted {
    pub alpha: QBeta,
    pub sign: i8,
}

impl Shifted {
    pub fn new(alpha: QBeta, sign: i8) -> Self {
        Shifted { alpha, sign }
    }

    pub fn value(&self, delta: f64) -> f64 {
        self.alpha.to_f64() + self.sign as f64 * delta
    }

    /// α ∈ {0, ½, 1}, where the schedule uses its half-integer branch.
    pub fn is_half_integer(&self) -> bool {
        self.alpha.is_half_integer_multiple()
    }

    fn offset(&self, d: QBeta) -> Self {
        Shifted::new(self.alpha + d, self.sign)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightSet {
    pub n0: u32,
    pub pairs: Vec<Weight>,
}

impl WeightSet {
    /// All (weight, α′) with α′ = α ± δ inside (0, 1).
    pub fn shifted(&self, delta: f64) -> Vec<(Weight, Shifted)> {
        let mut out = Vec::new();
        for w in &self.pairs {
            for sign in [-1i8, 1] {
                let s = Shifted::new(w.alpha, sign);
                let v = s.value(delta);
                if v > 0.0 && v < 1.0 {
                    out.push((*w, s));
                }
            }
        }
        out
    }
}

fn open(lo: QBeta, hi: QBeta, x: QBeta) -> bool {
    lo < x && x < hi
}

pub fn weight_set(n0: u32) -> WeightSet {
    assert!(n0 >= 1);
    let half = QBeta::ratio(1, 2);
    let one = QBeta::int(1);
    let zero = QBeta::int(0);
    let i_n0: Vec<QBeta> = i_set(n0).iter().map(|e| e.exact()).collect();
    let shift = QBeta::int(n0 as i64);
    let mut pairs = Vec::new();
    let mut push = |alpha: QBeta, n: u32, rule: WeightRule| {
        pairs.push(Weight { alpha, n, rule });
    };

    let mut exp_set: Vec<QBeta> = i_n0.iter().map(|&i| i - shift + one).collect();
    exp_set.push(QBeta::beta());
    for n in 2..=n0 {
        for &a in &exp_set {
            push(a, n, WeightRule::ExpansionShifted);
        }
    }
    for &a in exp_set.iter().filter(|&&a| open(half, one, a)) {
        push(a, 1, WeightRule::ExpansionFirst);
    }
    for n in 2..=n0 {
        push(zero, n, WeightRule::Zero);
    }
    for n in 1..n0 {
        push(one, n, WeightRule::One);
    }
    let mut low: Vec<QBeta> = i_n0.iter().map(|&i| i - shift + half).collect();
    low.push(QBeta::beta() - half);
    for n in 2..=n0 {
        for &a in low.iter().filter(|&&a| open(zero, half, a)) {
            push(a, n, WeightRule::AbsorbLow);
        }
    }
    let high: Vec<QBeta> = i_n0
        .iter()
        .map(|&i| i - shift + QBeta::ratio(3, 2))
        .filter(|&a| open(half, one, a))
        .collect();
    for n in 1..n0 {
        for &a in &high {
            push(a, n, WeightRule::AbsorbHigh);
        }
    }
    for n in 1..=n0 {
        push(half, n, WeightRule::Half);
    }
    WeightSet { n0, pairs }
}

/// Checks the separation rule α₁ < α₂ ⇒ α₁ + δ < α₂ − δ over the weights
/// together with {0, ½, 1}, and keeps every α′ + j/2 off the lattice.
pub fn validate_delta(n0: u32, delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 0.25) {
        return Err(Error::InvalidInput(format!("delta = {delta} not in (0, 1/4)")));
    }
    let ws = weight_set(n0);
    let mut alphas: Vec<QBeta> = ws.pairs.iter().map(|w| w.alpha).collect();
    alphas.extend([QBeta::int(0), QBeta::ratio(1, 2), QBeta::int(1)]);
    alphas.sort();
    alphas.dedup();
    for w in alphas.windows(2) {
        let (a1, a2) = (w[0].to_f64(), w[1].to_f64());
        if !(a1 + delta < a2 - delta) {
            return Err(Error::InvalidInput(format!(
                "delta = {delta} violates separation between {a1} and {a2}"
            )));
        }
    }
    let lat = lattice(n0 + 2).values();
    for (w, s) in ws.shifted(delta) {
        let _ = w;
        let v = s.value(delta);
        for j in -4..=(2 * n0 as i32 + 4) {
            let x = v + j as f64 / 2.0;
            if lat.iter().any(|&l| (l - x).abs() < 1e-9) {
                return Err(Error::InvalidInput(format!(
                    "delta = {delta}: shifted weight {v} collides with the lattice"
                )));
            }
        }
    }
    Ok(())
}

/// Default δ: 0.05, halved until valid.
pub fn default_delta(n0: u32) -> f64 {
    let mut d = 0.05;
    for _ in 0..40 {
        if validate_delta(n0, d).is_ok() {
            return d;
        }
        d /= 2.0;
    }
    d
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum EllRule {
    /// The explicit choice built from C = 8·N0 + |J_{N0}|.
    Explicit,
    /// ℓ ≡ constant; for exercising the condition checker.
    Constant(i64),
}

/// Derivative counts ℓ(n, m, α′), k(n, m, α′) and the global k.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivativeSchedule {
    pub n0: u32,
    pub delta: f64,
    pub k: i64,
    pub rule: EllRule,
    j_sizes: Vec<i64>,
}

impl DerivativeSchedule {
    pub fn explicit(n0: u32, delta: f64) -> Result<Self> {
        validate_delta(n0, delta)?;
        Ok(Self::build(n0, delta, EllRule::Explicit))
    }

    pub fn constant(n0: u32, delta: f64, value: i64) -> Self {
        Self::build(n0, delta, EllRule::Constant(value))
    }

    fn build(n0: u32, delta: f64, rule: EllRule) -> Self {
        let j_sizes: Vec<i64> = (0..=n0 + 2).map(|n| j_set(n).len() as i64).collect();
        let c = 8 * n0 as i64 + j_sizes[n0 as usize];
        DerivativeSchedule {
            n0,
            delta,
            k: c - 5,
            rule,
            j_sizes,
        }
    }

    fn c(&self) -> i64 {
        self.k + 5
    }

    pub fn j_size(&self, n: u32) -> i64 {
        self.j_sizes
            .get(n as usize)
            .copied()
            .unwrap_or_else(|| j_set(n).len() as i64)
    }

    pub fn ell(&self, n: u32, m: u32, a: Shifted) -> i64 {
        match self.rule {
            EllRule::Constant(v) => v,
            EllRule::Explicit => {
                let (n, m) = (n as i64, m as i64);
                if a.is_half_integer() {
                    if (n, m) == (1, 0) && a.alpha == QBeta::ratio(1, 2) {
                        return self.k + 4;
                    }
                    // 4α is an integer here
                    let four_a = (a.alpha.a * num_rational::Ratio::from_integer(4)).to_integer() as i64;
                    self.c() + 3 - 4 * (n + m) - four_a
                } else {
                    let x = 2.0 * (n as f64 + m as f64 + a.value(self.delta));
                    self.c() - 2 * x.floor() as i64
                }
            }
        }
    }

    pub fn kk(&self, n: u32, m: u32, a: Shifted) -> i64 {
        self.ell(n, m, a) - self.j_size(n) - 4 * n as i64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub alpha: f64,
    pub alpha_prime: f64,
    #[serde(rename = "N")]
    pub big_n: u32,
    pub m: u32,
    pub m_prime: Option<u32>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionResult {
    pub id: &'static str,
    pub statement: &'static str,
    pub evaluated: usize,
    pub failed: usize,
    pub witnesses: Vec<Witness>,
}

impl ConditionResult {
    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KEntry {
    pub n: u32,
    pub m: u32,
    pub alpha_prime: f64,
    pub ell: i64,
    pub k: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub n0: u32,
    pub delta: f64,
    pub k: i64,
    pub conditions: Vec<ConditionResult>,
    pub k_table: Vec<KEntry>,
    pub k_nonnegative: bool,
    pub linear_pass: bool,
    pub nonlinear_pass: bool,
    pub note: String,
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        self.linear_pass && self.nonlinear_pass
    }
}

const MAX_WITNESSES: usize = 8;

struct Tally {
    results: Vec<ConditionResult>,
}

impl Tally {
    fn check(&mut self, idx: usize, ok: bool, w: impl FnOnce() -> Witness) {
        let r = &mut self.results[idx];
        r.evaluated += 1;
        if !ok {
            r.failed += 1;
            if r.witnesses.len() < MAX_WITNESSES {
                r.witnesses.push(w());
            }
        }
    }
}

const CONDITIONS: [(&str, &str); 12] = [
    ("linear-1", "l(n-1,m+1,a') >= l(n,m,a') - 4 for n >= 2"),
    ("linear-2", "l(n,m,a'-1/2) >= l(n,m,a') - 2 for a' in (1/2,1), a+N >= 2"),
    ("linear-3", "l(n-1,m,a'+1/2) >= l(n,m,a') - 2 for a' in (0,1/2), n >= 2"),
    ("linear-4", "l(1,m-1,a'+1/2) >= l(1,m,a') + 2 for a' in (0,1/2), m >= 1"),
    ("linear-5", "k >= l(1,0,a') - 2 for a' in (1/2,1), a != 1/2"),
    ("nonlinear-1", "l(n,m',a') >= l(n,m,a') for m' < m"),
    ("nonlinear-2", "l(1,m',1/2+-d) >= l(n,m,a')/2 + 1 for m' <= m, a'+n-1 < beta"),
    ("nonlinear-3", "l(1,m',1/2+-d) >= l(n,m,a') + 3 for m' <= m, a'+n-1 > beta"),
    ("nonlinear-4", "l(n,m,a'-1/2) >= l(n,m,a') + 2 for a' in (1/2,1)"),
    ("nonlinear-5", "l(n-1,m,a'+1/2) >= l(n,m,a') + 2 for a' in (0,1/2), n >= 2"),
    ("nonlinear-6", "k >= l(1,m,a') - 2 for a' > beta"),
    ("nonlinear-7", "l(1,0,1-d), l(2,0,d) >= l(1,m,a') + 2 for a' > beta, m >= 1"),
];

/// Evaluates every schedule inequality over the weight set. Failures are
/// reported with witnesses, never raised.
pub fn check_conditions(sched: &DerivativeSchedule) -> ConditionReport {
    let n0 = sched.n0;
    let delta = sched.delta;
    let ws = weight_set(n0);
    let half = QBeta::ratio(1, 2);
    let b = beta();
    let mut t = Tally {
        results: CONDITIONS
            .iter()
            .map(|&(id, statement)| ConditionResult {
                id,
                statement,
                evaluated: 0,
                failed: 0,
                witnesses: Vec::new(),
            })
            .collect(),
    };
    let mut k_table = Vec::new();

    for (w, s) in ws.shifted(delta) {
        let ap = s.value(delta);
        let alpha = w.alpha.to_f64();
        let big_n = w.n;
        for m in 0..big_n {
            let n = big_n - m;
            let l = sched.ell(n, m, s);
            k_table.push(KEntry {
                n,
                m,
                alpha_prime: ap,
                ell: l,
                k: sched.kk(n, m, s),
            });
            let wit = |mp: Option<u32>, lhs: f64, rhs: f64| Witness {
                alpha,
                alpha_prime: ap,
                big_n,
                m,
                m_prime: mp,
                lhs,
                rhs,
            };
            let low = ap > 0.0 && ap < 0.5;
            let high = ap > 0.5 && ap < 1.0;
            let wide = alpha + big_n as f64 >= 2.0;

            if n >= 2 {
                let lhs = sched.ell(n - 1, m + 1, s);
                t.check(0, lhs >= l - 4, || wit(None, lhs as f64, (l - 4) as f64));
            }
            if high && wide {
                let lhs = sched.ell(n, m, s.offset(-half));
                t.check(1, lhs >= l - 2, || wit(None, lhs as f64, (l - 2) as f64));
            }
            if low && n >= 2 {
                let lhs = sched.ell(n - 1, m, s.offset(half));
                t.check(2, lhs >= l - 2, || wit(None, lhs as f64, (l - 2) as f64));
            }
            if low && n == 1 && m >= 1 {
                let lhs = sched.ell(1, m - 1, s.offset(half));
                t.check(3, lhs >= l + 2, || wit(None, lhs as f64, (l + 2) as f64));
            }
            if high && w.alpha != half && (n, m) == (1, 0) {
                t.check(4, sched.k >= l - 2, || wit(None, sched.k as f64, (l - 2) as f64));
            }
            for mp in 0..m {
                let lhs = sched.ell(n, mp, s);
                t.check(5, lhs >= l, || wit(Some(mp), lhs as f64, l as f64));
            }
            let reach = ap + n as f64 - 1.0;
            for mp in 0..=m {
                for sign in [-1i8, 1] {
                    let lhs = sched.ell(1, mp, Shifted::new(half, sign));
                    if reach < b {
                        let rhs = l as f64 / 2.0 + 1.0;
                        t.check(6, lhs as f64 >= rhs, || wit(Some(mp), lhs as f64, rhs));
                    } else {
                        t.check(7, lhs >= l + 3, || wit(Some(mp), lhs as f64, (l + 3) as f64));
                    }
                }
            }
            if high {
                let lhs = sched.ell(n, m, s.offset(-half));
                t.check(8, lhs >= l + 2, || wit(None, lhs as f64, (l + 2) as f64));
            }
            if low && n >= 2 {
                let lhs = sched.ell(n - 1, m, s.offset(half));
                t.check(9, lhs >= l + 2, || wit(None, lhs as f64, (l + 2) as f64));
            }
            if ap > b && n == 1 {
                t.check(10, sched.k >= l - 2, || wit(None, sched.k as f64, (l - 2) as f64));
                if m >= 1 {
                    let a = sched.ell(1, 0, Shifted::new(QBeta::int(1), -1));
                    let c = sched.ell(2, 0, Shifted::new(QBeta::int(0), 1));
                    let lhs = a.min(c);
                    t.check(11, lhs >= l + 2, || wit(None, lhs as f64, (l + 2) as f64));
                }
            }
        }
    }

    let conditions = t.results;
    let linear_pass = conditions[..5].iter().all(ConditionResult::passed);
    let nonlinear_pass = conditions[5..].iter().all(ConditionResult::passed);
    let k_nonnegative = k_table.iter().all(|e| e.k >= 0);
    let note = match (sched.rule, linear_pass && nonlinear_pass) {
        (EllRule::Explicit, true) => {
            "explicit schedule: compatible with the linear and the nonlinear conditions".into()
        }
        (EllRule::Explicit, false) => {
            let failing: Vec<&str> = conditions
                .iter()
                .filter(|c| !c.passed())
                .map(|c| c.id)
                .collect();
            format!("explicit schedule: NOT compatible; failing {}", failing.join(", "))
        }
        _ => "custom schedule".into(),
    };
    ConditionReport {
        n0,
        delta,
        k: sched.k,
        conditions,
        k_table,
        k_nonnegative,
        linear_pass,
        nonlinear_pass,
        note,
    }
}

/// Exponents of the lattice that the norm subtracts for a given weight,
/// i.e. those strictly below `bound`.
pub fn exponents_below(n0: u32, bound: f64) -> Vec<Exponent> {
    lattice(n0 + 1)
        .entries
        .into_iter()
        .filter(|e| e.value() < bound)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn has(ws: &WeightSet, a: f64, n: u32) -> bool {
        ws.pairs
            .iter()
            .any(|w| (w.alpha.to_f64() - a).abs() < 1e-12 && w.n == n)
    }

    #[test]
    fn weight_set_n0_1() {
        let ws = weight_set(1);
        assert_eq!(ws.pairs.len(), 2);
        assert!(has(&ws, beta(), 1));
        assert!(has(&ws, 0.5, 1));
    }

    #[test]
    fn weight_set_contains_endpoints() {
        for n0 in 1..=4 {
            let ws = weight_set(n0);
            for n in 1..=n0 {
                assert!(has(&ws, 0.5, n));
            }
            for n in 1..n0 {
                assert!(has(&ws, 1.0, n));
            }
            for (i, a) in ws.pairs.iter().enumerate() {
                for b in &ws.pairs[i + 1..] {
                    assert!(!(a.alpha == b.alpha && a.n == b.n), "duplicate {a:?}");
                }
                let v = a.alpha.to_f64();
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn k_values() {
        let ks: Vec<i64> = (1..=4)
            .map(|n0| DerivativeSchedule::explicit(n0, default_delta(n0)).unwrap().k)
            .collect();
        assert_eq!(ks, vec![3, 13, 24, 37]);
    }

    #[test]
    fn ell_examples() {
        let s = DerivativeSchedule::explicit(1, 0.05).unwrap();
        let ap = Shifted::new(QBeta::beta(), 1);
        assert_eq!(s.ell(1, 0, ap), 2);
        assert_eq!(s.ell(1, 0, Shifted::new(QBeta::ratio(1, 2), 1)), s.k + 4);
    }

    #[test]
    fn ell_constant_on_half_intervals() {
        for n0 in 1..=4 {
            let s = DerivativeSchedule::explicit(n0, default_delta(n0)).unwrap();
            let shifted: Vec<Shifted> = weight_set(n0)
                .shifted(s.delta)
                .into_iter()
                .map(|(_, a)| a)
                .filter(|a| !a.is_half_integer())
                .collect();
            for n in 1..=n0 {
                for m in 0..n0 {
                    for upper in [false, true] {
                        let vals: Vec<i64> = shifted
                            .iter()
                            .filter(|a| (a.value(s.delta) > 0.5) == upper)
                            .map(|&a| s.ell(n, m, a))
                            .collect();
                        assert!(vals.windows(2).all(|w| w[0] == w[1]));
                    }
                }
            }
        }
    }

    #[test]
    fn delta_validation() {
        assert!(validate_delta(1, 0.05).is_ok());
        // 3β − 3/2 sits 0.046 below ½
        assert!(validate_delta(2, 0.05).is_err());
        assert!(validate_delta(2, 0.02).is_ok());
        assert!(DerivativeSchedule::explicit(2, 0.2).is_err());
        for n0 in 1..=4 {
            assert!(validate_delta(n0, default_delta(n0)).is_ok());
        }
    }

    #[test]
    fn explicit_linear_pass_nonlinear_4_fails_at_half() {
        for n0 in 1..=4 {
            let s = DerivativeSchedule::explicit(n0, default_delta(n0)).unwrap();
            let r = check_conditions(&s);
            assert!(r.linear_pass, "{n0}: {:#?}", r.conditions);
            let c = r.conditions.iter().find(|c| c.id == "nonlinear-4").unwrap();
            assert_eq!(c.failed, 1, "{n0}");
            let w = &c.witnesses[0];
            assert_eq!((w.alpha, w.big_n, w.m), (0.5, 1, 0));
            assert_eq!(w.rhs - w.lhs, 2.0);
        }
    }

    #[test]
    fn zero_schedule_fails_nonlinear_3() {
        let s = DerivativeSchedule::constant(2, 0.05, 0);
        let r = check_conditions(&s);
        let c = r.conditions.iter().find(|c| c.id == "nonlinear-3").unwrap();
        assert!(!c.passed());
    }
}
