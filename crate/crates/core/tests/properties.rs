use core::f64::consts::E;

use proptest::prelude::*;
use riccati_core::classify::{
    classify_equation, extremity_conditions, terminal_state_menu, Case, CriteriaReport, Crosscheck, EquationClass, Flavor,
};
use riccati_core::expr::{make_family, parse, Coefficients, Expr, FamilyKind, FamilySpec};
use riccati_core::math::rel_diff;
use riccati_core::quad::sampled::{linear_nodes, log_nodes};
use riccati_core::quad::{cumulative_integral, GridConfig, IntegralVerdict, TailConfig};
use riccati_core::reproduce::{reproduce_auto, reproduce_from_u, Variant};
use riccati_core::riccati::{solve, weighted_residual, OperatorKind, SolverConfig};
use riccati_core::verify::{equation_residual, wronskian};
use riccati_core::GridFunction;

fn power_log(k: f64, lambda: f64, mu: f64) -> Coefficients {
    let mut s = FamilySpec::new(Expr::Const(1.0), E);
    s.k = k;
    s.lambda = lambda;
    s.mu = mu;
    make_family(FamilyKind::PowerLog, &s).unwrap()
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![(0.25f64..4.0).prop_map(Expr::Const), Just(Expr::Var)];
    leaf.prop_recursive(4, 24, 2, |inner| {
        let b = |e: Expr| Box::new(e);
        prop_oneof![
            inner.clone().prop_map(move |e| Expr::Neg(b(e))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Add(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Sub(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Mul(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Div(b(x), b(y))),
            (inner.clone(), 0u8..4).prop_map(move |(x, n)| Expr::Pow(b(x), b(Expr::Const(f64::from(n))))),
            inner.clone().prop_map(move |e| Expr::Exp(b(Expr::Div(b(e), b(Expr::Const(8.0)))))),
            inner.prop_map(move |e| Expr::Log(b(Expr::Add(b(Expr::Mul(b(e.clone()), b(e))), b(Expr::Const(1.0)))))),
        ]
    })
}

fn same(a: f64, b: f64) -> bool {
    a == b || rel_diff(a, b) <= 1e-12 || (a - b).abs() <= 1e-12
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn printed_expressions_parse_back(e in expr(), t in 0.1f64..5.0) {
        let text = e.to_string();
        let back = parse(&text).unwrap_or_else(|err| panic!("{text}: {err}"));
        match (e.eval(t), back.eval(t)) {
            (Ok(a), Ok(b)) => prop_assert!(same(a, b), "{text}: {a} vs {b}"),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{text}: {a:?} vs {b:?}"),
        }
    }

    #[test]
    fn power_family_matches_its_formula(k in 0.1f64..5.0, lambda in 1.0f64..4.0, mu in -2.0f64..2.0) {
        let c = power_log(k, lambda, mu);
        for t in log_nodes(E * 1.01, 1e6, 100) {
            let want = k / (t.powf(lambda) * t.ln().powf(mu));
            prop_assert!(rel_diff(c.q_at(t).unwrap(), want) <= 1e-12, "t = {t}");
        }
    }

    #[test]
    fn generators_solve_the_first_riccati_equation(b in -1.5f64..1.5, s in 0.2f64..2.0) {
        // p = e^{b t}, φ = s e^{t}: q - φ²/p - φ' must vanish
        let mut spec = FamilySpec::new(parse(&format!("exp({b}*t)")).unwrap(), 0.0);
        spec.phi = Some(parse(&format!("{s}*exp(t)")).unwrap());
        spec.dphi = Some(parse(&format!("{s}*exp(t)")).unwrap());
        let c = make_family(FamilyKind::R1Growing, &spec).unwrap();
        for t in linear_nodes(0.0, 3.0, 40) {
            let phi = s * t.exp();
            let q = c.q_at(t).unwrap();
            let r = q - phi * phi / c.p_at(t).unwrap() - phi;
            prop_assert!(r.abs() <= 1e-8 * q, "t = {t}: {r}");
        }
    }

    #[test]
    fn cumulative_integrals_add(split in 5usize..95, c in 0.1f64..3.0, w in 0.5f64..4.0) {
        let f = |t: f64| (c * t).sin() + 1.5 + t * t / 10.0;
        let nodes = linear_nodes(0.0, 10.0, 100);
        let whole = cumulative_integral(&f, &nodes, 1e-12).unwrap();
        let left = cumulative_integral(&f, &nodes[..=split], 1e-12).unwrap();
        let right = cumulative_integral(&f, &nodes[split..], 1e-12).unwrap();
        let sum = left.last() + right.last();
        prop_assert!(rel_diff(whole.last(), sum) <= 1e-10, "{} vs {sum}", whole.last());
        let g = |t: f64| w * (-(t - 5.0) * (t - 5.0)).exp();
        let mono = cumulative_integral(&g, &nodes, 1e-10).unwrap();
        prop_assert!(mono.values().windows(2).all(|p| p[1] >= p[0]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn criterion_and_its_equivalent_agree(k in 0.2f64..3.0, lambda in 1.5f64..3.5, mu in -1.5f64..1.5) {
        let c = power_log(k, lambda, mu);
        let class = classify_equation(&c, &TailConfig::default()).unwrap();
        prop_assume!(class.case == Case::CaseI);
        let r = extremity_conditions(&c, &class, &GridConfig::default()).unwrap();
        prop_assert_ne!(r.equivalence_crosscheck, Crosscheck::Fail);
    }

    #[test]
    fn ratio_estimates_are_linear_in_k(k in 0.2f64..3.0, f in 1.5f64..4.0, lambda in 2.0f64..3.0, mu in 0.0f64..1.5) {
        let est = |k: f64| {
            let c = power_log(k, lambda, mu);
            let class = classify_equation(&c, &TailConfig::default()).unwrap();
            extremity_conditions(&c, &class, &GridConfig::default()).unwrap()
        };
        let (a, b) = (est(k), est(k * f));
        for (x, y) in [(a.v_grow_ratio, b.v_grow_ratio), (a.u_decay_ratio, b.u_decay_ratio)] {
            if let (Some(x), Some(y)) = (x, y) {
                prop_assert!(x > 0.0 && x.is_finite());
                prop_assert!(rel_diff(y / x, f) <= 0.01, "{x} {y} {f}");
            }
        }
    }

    #[test]
    fn moderate_fixed_points_contract_and_keep_their_sign(k in 0.2f64..3.0, lambda in 2.6f64..4.0, mu in -0.5f64..1.0) {
        let c = power_log(k, lambda, mu);
        let cfg = SolverConfig::default();
        for kind in [OperatorKind::ModerateUI, OperatorKind::ModerateVI] {
            let sol = solve(&c, &kind, &cfg).unwrap();
            prop_assert!(sol.in_band);
            prop_assert!(sol.contraction_history.iter().skip(1).all(|&r| r <= 0.6), "{:?}", sol.contraction_history);
            let negative = kind == OperatorKind::ModerateUI;
            prop_assert!(sol.f.values().iter().all(|&v| (v < 0.0) == negative));
            let r = sol.residual(&c).unwrap();
            prop_assert!(weighted_residual(&r, &c, sol.start, sol.half_horizon()).unwrap() <= 50.0 * cfg.tol);

            let x = reproduce_auto(&sol, &c).unwrap();
            let w = sol.weights();
            let back = if kind == OperatorKind::ModerateUI { x.u() } else { x.v() };
            for (i, t) in x.nodes().iter().enumerate() {
                if let Some(j) = sol.f.nodes().iter().position(|s| s == t) {
                    prop_assert!((back[i] - sol.f.values()[j]).abs() * w[j] <= 10.0 * cfg.tol, "t = {t}");
                }
            }
            prop_assert!(equation_residual(&x, &c, sol.start, sol.half_horizon()).unwrap() <= 1e-4);
        }
    }

    #[test]
    fn constant_pair_has_a_fixed_wronskian_sign(k in 0.1f64..3.0, len in 2.0f64..8.0) {
        let mut spec = FamilySpec::new(Expr::Const(1.0), 0.0);
        spec.k = k;
        let c = make_family(FamilyKind::ConstantQ, &spec).unwrap();
        let nodes = linear_nodes(0.0, len, 200);
        let make = |s: f64| reproduce_from_u(&GridFunction::constant(&nodes, s * k).unwrap(), &c, Variant::Cumulative, 1.0).unwrap();
        // (principal, nonprincipal) = (decaying, growing)
        let w = wronskian(&make(-1.0), &make(1.0)).unwrap();
        prop_assert!(w.c < 0.0);
        prop_assert!(rel_diff(w.c, -2.0 * k) <= 1e-10);
        prop_assert!(w.rel_variation <= 1e-10);
    }
}

fn verdict(convergent: bool) -> IntegralVerdict {
    if convergent {
        IntegralVerdict::Convergent { value: 1.0, error_estimate: 0.0 }
    } else {
        IntegralVerdict::Divergent { evidence: String::new() }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn menus_never_mix_flavors(ip in any::<bool>(), iq in any::<bool>(), moderate in any::<bool>()) {
        let (ip, iq) = (verdict(ip), verdict(iq));
        let case = Case::from_verdicts(&ip, &iq);
        let class = EquationClass { ip, iq, case };
        let menu = terminal_state_menu(&class, &CriteriaReport::empty(verdict(moderate))).unwrap();
        prop_assert!(!menu.types.is_empty());
        let first = menu.types[0].flavor;
        prop_assert!(menu.types.iter().all(|t| t.flavor == first));
        if case == Case::CaseIII {
            prop_assert_eq!(first, Flavor::Moderate);
        }
    }
}

#[test]
fn case_is_stable_when_the_horizon_doubles() {
    let fixtures = [
        power_log(0.5, 2.0, 0.0),
        Coefficients::new(Expr::Const(1.0), parse("2/t^3").unwrap(), 1.0).unwrap(),
        Coefficients::new(parse("exp(t)").unwrap(), parse("exp(-2*t)").unwrap(), 0.0).unwrap(),
        Coefficients::new(Expr::Const(1.0), Expr::Const(1.0), 0.0).unwrap(),
    ];
    for c in &fixtures {
        let cfg = TailConfig::default();
        let doubled = TailConfig { horizon: 2.0 * cfg.horizon, ..cfg };
        let a = classify_equation(c, &cfg).unwrap().case;
        assert_ne!(a, Case::Unknown);
        assert_eq!(a, classify_equation(c, &doubled).unwrap().case);
    }
}

#[test]
fn solving_is_deterministic() {
    let c = power_log(2.0, 3.0, 0.0);
    let cfg = SolverConfig::default();
    let a = solve(&c, &OperatorKind::ModerateVI, &cfg).unwrap();
    let b = solve(&c, &OperatorKind::ModerateVI, &cfg).unwrap();
    assert_eq!(a.f, b.f);
    assert_eq!(a.contraction_history, b.contraction_history);
}
