use serde::Serialize;

use tfe_core::exponents::{
    check_conditions, index_sets, lattice, weight_set, ConditionReport,
    DerivativeSchedule, ExponentLattice, IndexFamily, WeightSet,
};

use crate::output::{Outcome, Sink};

#[derive(Serialize)]
struct ScheduleReport {
    n0: u32,
    delta: f64,
    lattice: ExponentLattice,
    index_sets: Vec<IndexFamily>,
    weights: WeightSet,
    conditions: ConditionReport,
}

fn list(v: &[impl ToString]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

pub fn run(sink: &Sink) -> Outcome {
    let (n0, delta) = (sink.cfg.n0, sink.cfg.delta());
    let sched = DerivativeSchedule::explicit(n0, delta)?;
    let report = ScheduleReport {
        n0,
        delta,
        lattice: lattice(n0),
        index_sets: (1..=n0).map(index_sets).collect(),
        weights: weight_set(n0),
        conditions: check_conditions(&sched),
    };

    sink.say(format!("N0 = {n0}, delta = {delta}"));
    sink.say(format!("K_{n0} ({} entries): {}", report.lattice.len(), list(&report.lattice.entries)));
    for f in &report.index_sets {
        sink.say(format!("I_{} = {{{}}}  J_{} = {{{}}}", f.n, list(&f.i_n), f.n, list(&f.j_n)));
    }
    sink.say(format!("weights ({}):", report.weights.pairs.len()));
    for w in &report.weights.pairs {
        sink.say(format!("  alpha = {:<12} N = {}  {:?}", w.alpha.to_string(), w.n, w.rule));
    }
    let c = &report.conditions;
    sink.say(format!("k = {}", c.k));
    sink.say("  n  m  alpha'      l     k(n,m,alpha')");
    for e in &c.k_table {
        sink.say(format!("  {}  {}  {:<10.6}  {:<4}  {}", e.n, e.m, e.alpha_prime, e.ell, e.k));
    }
    for r in &c.conditions {
        let status = if r.passed() { "PASS" } else { "FAIL" };
        sink.say(format!("{status} {} ({} of {} fail): {}", r.id, r.failed, r.evaluated, r.statement));
        for w in &r.witnesses {
            sink.say(format!(
                "    alpha = {}, alpha' = {}, N = {}, m = {}, m' = {:?}: {} vs {}",
                w.alpha, w.alpha_prime, w.big_n, w.m, w.m_prime, w.lhs, w.rhs
            ));
        }
    }
    sink.say(format!("k >= 0 on every entry: {}", c.k_nonnegative));
    sink.say(&c.note);
    sink.report("schedule", &report)
}
