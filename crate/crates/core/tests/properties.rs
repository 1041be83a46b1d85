use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tfe_core::exponents::{
    i_set, j_set, lattice, p_eval, p_exact, p_roots_f64, q_tilde, Exponent, RealPolynomial,
};
use tfe_core::hodograph::{from_hodograph, to_hodograph, Series};
use tfe_core::linear_solver::{hardy_constant, hardy_ratio, solve_linear, BoundaryConfig, LinearProblem, Stepper};
use tfe_core::loggrid::{
    d_apply, extract_expansion, poly_of_d, roots_of_d, sobolev, synthesize, weighted_l2, Cutoff, GridFunction, LogGrid,
    SmoothFunction,
};
use tfe_core::operators::{m_apply, nonlinearity, pd_apply, pd_apply_slot_sum, velocity_tilde};

fn smooth(seed: u64, grid: LogGrid, lo: f64, hi: f64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SmoothFunction::random(&mut rng, lo, hi).sample(grid)
}

fn max_dev(a: &[f64], b: &[f64], lo: usize, hi: usize) -> f64 {
    (lo..hi).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
}

fn sup(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lattice_values_are_separated(n0 in 1u32..=8) {
        let v = lattice(n0).values();
        for w in v.windows(2) {
            prop_assert!(w[1] - w[0] > 1e-9);
        }
    }

    #[test]
    fn j_is_union_of_i(n in 1u32..=8) {
        let mut union: Vec<Exponent> = (1..=n).flat_map(i_set).collect();
        union.sort();
        prop_assert_eq!(union, j_set(n));
    }

    #[test]
    fn shifted_index_sets_nest(n in 2u32..=8) {
        let i_n = i_set(n);
        for e in i_set(n - 1) {
            prop_assert!(i_n.contains(&e.shift(1)), "{} + 1 missing from I_{}", e, n);
        }
    }

    #[test]
    fn p_factored_equals_expanded(z in -5.0f64..5.0) {
        let expanded = p_exact().to_real().eval(z);
        let factored: f64 = p_roots_f64(0).iter().map(|r| z - r).product();
        prop_assert!((expanded - factored).abs() <= 1e-12 * (1.0 + expanded.abs()));
        prop_assert!((p_eval(z, 0) - expanded).abs() <= 1e-12 * (1.0 + expanded.abs()));
    }

    /// [∏_{I_n}(D − i), x]v = −x q̃_n(D)v on polynomial test functions.
    #[test]
    fn commutator_identity(n in 2u32..=3, coeffs in prop::collection::vec(-1.0f64..1.0, 4)) {
        let g = LogGrid::new(-4.0, 0.5, 900).unwrap();
        let v = GridFunction::from_x_fn(g, |x| coeffs.iter().rev().fold(0.0, |a, c| a * x + c));
        let roots: Vec<f64> = i_set(n).iter().map(Exponent::value).collect();
        let xv = GridFunction::from_x_fn(g, |x| x).zip_with(&v, |a, b| a * b).unwrap();
        let lhs = roots_of_d(&xv, &roots).unwrap();
        let pv = roots_of_d(&v, &roots).unwrap();
        let qv = poly_of_d(&v, &q_tilde(n).to_real()).unwrap();
        let x = g.x_values();
        let (lo, hi) = (40, g.count - 40);
        let scale = (lo..hi).map(|i| lhs.values()[i].abs()).fold(1e-3, f64::max);
        for i in lo..hi {
            let rhs = x[i] * pv.values()[i] - x[i] * qv.values()[i];
            prop_assert!((lhs.values()[i] - rhs).abs() < 1e-6 * scale, "{} {}", lhs.values()[i], rhs);
        }
    }

    /// D(Du) − D²u is stencil truncation error: it falls by at least 2^2.5
    /// when the grid is refined.
    #[test]
    fn d_composes(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = SmoothFunction::random(&mut rng, -5.0, 2.0);
        let dev = |count: usize| {
            let g = LogGrid::new(-6.0, 3.0, count).unwrap();
            let u = f.sample(g);
            let dd = d_apply(&d_apply(&u, 1).unwrap(), 1).unwrap();
            let d2 = d_apply(&u, 2).unwrap();
            max_dev(dd.values(), d2.values(), 10, count - 10)
        };
        let (coarse, fine) = (dev(600), dev(1199));
        prop_assert!(fine < coarse / 2f64.powf(2.5), "{} -> {}", coarse, fine);
    }

    #[test]
    fn norms_homogeneous_and_ordered(seed in any::<u64>(), c in -5.0f64..5.0, alpha in -1.0f64..1.0, k in 0usize..4) {
        let g = LogGrid::new(-6.0, 3.0, 400).unwrap();
        let u = smooth(seed, g, -5.0, 2.0);
        let n = sobolev(&u, k, alpha).unwrap();
        let nc = sobolev(&u.scale(c), k, alpha).unwrap();
        prop_assert!((nc - c.abs() * n).abs() <= 1e-12 * (1.0 + nc));
        prop_assert!(weighted_l2(&u, alpha) <= sobolev(&u, k.max(1), alpha).unwrap() * (1.0 + 1e-12));
        let v = smooth(seed.wrapping_add(1), g, -5.0, 2.0);
        let sum = sobolev(&u.axpby(1.0, &v, 1.0).unwrap(), k, alpha).unwrap();
        prop_assert!(sum <= n + sobolev(&v, k, alpha).unwrap() + 1e-12);
    }

    #[test]
    fn scaling_duality(seed in any::<u64>(), shift in 1usize..40, alpha in -1.0f64..1.0) {
        // u(λx) with λ = e^{shift·h}: sample the same function on a shifted grid
        let g = LogGrid::new(-6.0, 3.0, 451).unwrap();
        let ln_l = shift as f64 * g.h();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = SmoothFunction::random(&mut rng, -4.0, 1.0);
        let scaled = GridFunction::from_fn(g, |s| f.eval(s + ln_l));
        let gs = LogGrid::new(g.s_min + ln_l, g.s_max + ln_l, g.count).unwrap();
        let direct = f.sample(gs);
        let lhs = weighted_l2(&scaled, alpha);
        let rhs = (alpha * ln_l).exp() * weighted_l2(&direct, alpha);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs));
    }

    #[test]
    fn synthesized_expansion_is_recovered(c in prop::collection::vec(-1.0f64..1.0, 2)) {
        let g = LogGrid::default();
        let coeffs = [(Exponent::ZERO, c[0]), (Exponent::BETA, c[1])];
        let u = synthesize(&coeffs, Cutoff::new(0.5, 5.0).unwrap(), g);
        let fit = extract_expansion(&u, 1, 0.1).unwrap();
        for (e, v) in coeffs {
            prop_assert!((fit.coefficient(e).unwrap() - v).abs() < 1e-10);
        }
    }

    #[test]
    fn hardy_below_analytic(seed in any::<u64>(), gamma in -1.0f64..0.5, gap in 0.3f64..1.5) {
        let g = LogGrid::new(-8.0, 4.0, 801).unwrap();
        let w = smooth(seed, g, -7.0, 3.0);
        let rho = gamma + gap;
        let r = hardy_ratio(&w, gamma, rho).unwrap();
        prop_assert!(r.is_finite() && r <= hardy_constant(gamma, rho) * 1.01, "{} > {}", r, hardy_constant(gamma, rho));
    }

    #[test]
    fn multilinearity(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0, slot in 0usize..5) {
        let g = LogGrid::new(-5.0, 2.0, 300).unwrap();
        let f: Vec<GridFunction> = (0..7).map(|k| smooth(seed.wrapping_add(k), g, -4.0, 1.0)).collect();
        let comb = f[5].axpby(a, &f[6], b).unwrap();
        let with = |v: &GridFunction| {
            let args: [&GridFunction; 5] = std::array::from_fn(|k| if k == slot { v } else { &f[k] });
            m_apply(args).unwrap()
        };
        let lhs = with(&comb);
        let rhs = with(&f[5]).axpby(a, &with(&f[6]), b).unwrap();
        prop_assert!(max_dev(lhs.values(), rhs.values(), 0, g.count) <= 1e-9 * (1.0 + sup(lhs.values())));
        let s3 = slot % 3;
        let with3 = |v: &GridFunction| {
            let args: [&GridFunction; 3] = std::array::from_fn(|k| if k == s3 { v } else { &f[k] });
            velocity_tilde(args).unwrap()
        };
        let lhs = with3(&comb);
        let rhs = with3(&f[5]).axpby(a, &with3(&f[6]), b).unwrap();
        prop_assert!(max_dev(lhs.values(), rhs.values(), 0, g.count) <= 1e-9 * (1.0 + sup(lhs.values())));
    }

    #[test]
    fn slot_sum_equivalence(seed in any::<u64>()) {
        let g = LogGrid::new(-8.0, 4.0, 601).unwrap();
        let u = smooth(seed, g, -6.0, 2.0);
        let a = pd_apply(&u).unwrap();
        let b = pd_apply_slot_sum(&u).unwrap();
        prop_assert!(max_dev(a.values(), b.values(), 0, g.count) <= 1e-9 * sup(a.values()).max(1e-12));
    }

    #[test]
    fn nonlinearity_has_no_linear_part(seed in any::<u64>()) {
        let g = LogGrid::new(-6.0, 3.0, 400).unwrap();
        let u = smooth(seed, g, -5.0, 2.0).scale(0.5);
        let e = 1e-5;
        let plus = nonlinearity(&u.scale(e)).unwrap();
        let minus = nonlinearity(&u.scale(-e)).unwrap();
        let deriv = sup(plus.axpby(1.0, &minus, -1.0).unwrap().values()) / (2.0 * e);
        prop_assert!(deriv <= 1e-7 * (1.0 + sobolev(&u, 4, 0.0).unwrap()), "{}", deriv);
    }

    #[test]
    fn nonlinearity_is_at_most_quintic(seed in any::<u64>()) {
        let g = LogGrid::new(-6.0, 3.0, 400).unwrap();
        let u = smooth(seed, g, -5.0, 2.0).map(f64::abs);
        let r = |e: f64| sup(nonlinearity(&u.scale(e)).unwrap().values()) / e.powi(5);
        // r(ε) − lim r = O(1/ε): successive gaps shrink geometrically
        let (r4, r5, r6) = (r(1e4), r(1e5), r(1e6));
        prop_assert!(r6.is_finite(), "{}", r6);
        prop_assert!((r5 - r6).abs() <= 0.2 * (r4 - r5).abs() + 1e-6 * r6, "{} {} {}", r4, r5, r6);
    }

    #[test]
    fn series_reciprocal_and_inverse(c in prop::collection::vec(-0.4f64..0.4, 4)) {
        let e = [Exponent::ZERO, Exponent::BETA, Exponent::new(1, 0), Exponent::new(0, 2)];
        let a = Series::from_terms(3, e.iter().copied().zip(c.iter().map(|v| v * 0.5)).chain([(Exponent::ZERO, 1.0)])).unwrap();
        let one = a.mul(&a.reciprocal().unwrap());
        prop_assert!((one.constant_term() - 1.0).abs() < 1e-14 && one.tail().max_abs() < 1e-12);
        let b = a.invert_scaled().unwrap();
        let id = a.mul(&b.compose_scaled(&a).unwrap());
        prop_assert!((id.constant_term() - 1.0).abs() < 1e-14 && id.tail().max_abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn hodograph_round_trip(seed in any::<u64>(), amp in 0.0f64..0.1) {
        let g = LogGrid::new(-12.0, 6.0, 1024).unwrap();
        let u = smooth(seed, g, -8.0, 3.0).scale(amp);
        let p = from_hodograph(&u, 0.0).unwrap();
        let back = to_hodograph(&p, g).unwrap();
        prop_assert!(max_dev(u.values(), back.values(), 0, g.count) <= 1e-6);
    }

    #[test]
    fn from_hodograph_is_monotone(seed in any::<u64>(), amp in 0.0f64..0.8) {
        let g = LogGrid::new(-10.0, 4.0, 500).unwrap();
        let u = smooth(seed, g, -8.0, 3.0);
        let u = u.scale(amp / sup(u.values()).max(1e-12));
        let p = from_hodograph(&u, 1.0).unwrap();
        prop_assert!(p.z.windows(2).all(|w| w[1] > w[0]) && p.z[0] > p.z0);
    }

    /// θ = 1, f = 0: |u|_{α−½} does not grow, α = −½ in the coercivity range.
    #[test]
    fn backward_euler_is_stable(seed in any::<u64>()) {
        let g = LogGrid::new(-10.0, 5.0, 301).unwrap();
        let st = Stepper::new(&p_exact().to_real(), g, 0.05, 1.0, BoundaryConfig::default()).unwrap();
        let u0 = smooth(seed, g, -8.0, 2.0);
        let zero = vec![0.0; g.count];
        let mut u = u0.values().to_vec();
        let mut e = weighted_l2(&u0, -1.0);
        for _ in 0..20 {
            u = st.step(&u, &zero, &zero, u0.values(), u0.values());
            let en = weighted_l2(&GridFunction::new(g, u.clone()).unwrap(), -1.0);
            prop_assert!(en <= e * (1.0 + 1e-9));
            e = en;
        }
    }

    #[test]
    fn solution_operator_is_linear(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let g = LogGrid::new(-10.0, 4.0, 256).unwrap();
        let (u, v) = (smooth(seed, g, -8.0, 2.0), smooth(seed ^ 0x55, g, -8.0, 2.0));
        let run = |init: GridFunction| {
            let mut prob = LinearProblem::new(RealPolynomial::from_roots(&p_roots_f64(0)), init);
            prob.dt = 0.01;
            prob.t_end = 0.2;
            solve_linear(&prob).unwrap().final_snapshot().clone()
        };
        let lhs = run(u.axpby(a, &v, b).unwrap());
        let rhs = run(u.clone()).axpby(a, &run(v.clone()), b).unwrap();
        prop_assert!(max_dev(lhs.values(), rhs.values(), 0, g.count) <= 1e-9 * (1.0 + sup(lhs.values())));
    }
}
