//! Exact lattice arithmetic in Q(β), the polynomial p and its relatives,
//! the index families behind the derived equations, weight sets and the
//! derivative-count schedule.

mod coercivity;
mod lattice;
mod poly;
mod qbeta;
mod schedule;

pub use coercivity::{coercivity_set, in_coercivity_set, Interval};
pub use lattice::{
    cascade_polynomials, i_set, index_sets, j_set, lattice, lattice_below, p_shifted, q_polynomial,
    q_tilde, CascadePolynomials, Exponent, ExponentLattice, IndexFamily,
};
pub use poly::{
    p_eval, p_exact, p_roots, p_shift_exact, p_tilde_exact, Coeff, ExactPolynomial, Poly,
    RealPolynomial,
};
pub use qbeta::{beta, QBeta, Rational};
pub use schedule::{
    check_conditions, default_delta, exponents_below, validate_delta, weight_set, ConditionReport,
    ConditionResult, DerivativeSchedule, EllRule, KEntry, Shifted, Weight, WeightRule, WeightSet,
    Witness,
};

/// Roots of p(· − shift) as floats, ascending.
pub fn p_roots_f64(shift: i64) -> [f64; 4] {
    let r = p_roots();
    [0, 1, 2, 3].map(|i| r[i].to_f64() + shift as f64)
}
