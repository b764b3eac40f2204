use drinfeld_core::foliation::{
    chart_pullback_field, chart_pullback_form, delta_cone, expected_pullback_field, h_product,
    predicted_h_relation, pullback_derivation, saito_log_tangent_check, splitting_polynomial, theta_chart,
    verify_bracket_identity, verify_h_identity, verify_p_closed, verify_psi_is_omega, verify_splitting,
    SplittingOutcome,
};
use drinfeld_core::{Budget, ChartSubstitution, Fe, FieldTower, MPoly, Status};
use proptest::prelude::*;

#[test]
fn bracket_p_closed_and_saito() {
    let b = Budget::default();
    for q in [2, 3, 4, 5] {
        assert_eq!(verify_p_closed(q, &b).unwrap().status, Status::Pass, "p-closed q={q}");
    }
    for (n, q) in [(2, 2), (2, 3), (3, 2)] {
        assert_eq!(verify_bracket_identity(n, q, &b).unwrap().status, Status::Pass);
        assert_eq!(saito_log_tangent_check(n, q, &b).unwrap().status, Status::Pass);
        assert_eq!(verify_psi_is_omega(n, q, &b).unwrap().status, Status::Pass);
    }
}

#[test]
fn theta_brackets_directly() {
    let f = FieldTower::new(3, 1, 1).unwrap();
    let (t1, t2) = (theta_chart(&f, 2, 1), theta_chart(&f, 2, 2));
    assert_eq!(t1.lie_bracket(&t2), t2.sub(&t1));
    let d0 = delta_cone(&f, 3, 0);
    let x = MPoly::vars(&f, 3);
    // δ_0 is the Euler field: it multiplies a form of degree d by d.
    let cubic = &(&x[0] * &x[1]) * &x[2];
    assert_eq!(d0.apply(&cubic), cubic.scale(f.from_int(3)));
}

#[test]
fn h_relation_matches_the_sign_prediction() {
    let b = Budget::default();
    for (n, q) in [(1, 2), (1, 3), (2, 2), (2, 3), (3, 2), (2, 5), (3, 3)] {
        let r = verify_h_identity(n, q, &b).unwrap();
        assert_eq!(r.data["relation"], predicted_h_relation(q, n), "n={n} q={q}");
        assert_eq!(r.data["predicted_relation"], predicted_h_relation(q, n));
        assert_eq!(r.status == Status::Pass, predicted_h_relation(q, n) == "equal");
    }
    for (n, q) in [(2, 2), (2, 3), (3, 2), (3, 3)] {
        let r = chart_pullback_form(n, q, &b).unwrap();
        assert_eq!(r.data["alpha_n_vs_signed_h"], predicted_h_relation(q, n - 1), "n={n} q={q}");
    }
}

#[test]
fn predicted_relation_table() {
    assert_eq!(predicted_h_relation(2, 1), "equal");
    assert_eq!(predicted_h_relation(4, 5), "equal");
    assert_eq!(predicted_h_relation(3, 1), "negated");
    assert_eq!(predicted_h_relation(3, 2), "negated");
    assert_eq!(predicted_h_relation(3, 3), "equal");
    assert_eq!(predicted_h_relation(5, 4), "equal");
    assert_eq!(predicted_h_relation(5, 5), "negated");
}

#[test]
fn h_product_over_f2_in_two_variables() {
    // h_2 = (1 + s1)(1 + s1 s2)(1 + s1 + s1 s2)(1 + s2), written out by hand.
    let f = FieldTower::new(2, 1, 1).unwrap();
    let s = MPoly::vars(&f, 2);
    let one = MPoly::one(f.clone(), 2);
    let s12 = &s[0] * &s[1];
    let factors = [&one + &s[0], &one + &s12, &(&one + &s[0]) + &s12, &one + &s[1]];
    let oracle = factors.iter().fold(one.clone(), |acc, g| &acc * g);
    let h = h_product(&f, 2, 2);
    assert_eq!(h, oracle);
    assert_eq!(h.coeff(&[0, 0]), Fe::ONE);
    assert_eq!(h.degree(), Some(6));
}

#[test]
fn chart_fields_pass() {
    let b = Budget::default();
    for (n, q) in [(2, 2), (2, 3), (3, 2)] {
        for j in 1..=n {
            assert_eq!(chart_pullback_field(n, q, j, &b).unwrap().status, Status::Pass, "n={n} q={q} j={j}");
        }
    }
    assert!(chart_pullback_field(4, 2, 1, &b).is_err());
    assert!(chart_pullback_field(2, 2, 0, &b).is_err());
}

#[test]
fn splitting_outcomes() {
    let b = Budget::default();
    match splitting_polynomial(2, &b).unwrap() {
        SplittingOutcome::NoneWitness { candidates, points, refutations } => {
            assert_eq!((candidates, points), (64, 7));
            assert_eq!(refutations.len(), 64);
        }
        other => panic!("expected a NoneWitness over F_2, got {other:?}"),
    }
    let r = verify_splitting(2, &b).unwrap();
    assert_eq!(r.status, Status::Pass);
    assert_eq!(r.witness.unwrap()["kind"], "NoneWitness");
    for q in [3, 4, 5] {
        let r = verify_splitting(q, &b).unwrap();
        assert_eq!(r.status, Status::Pass, "q={q}");
        assert_eq!(r.data["f_degree"], r.data["g_degree"].as_u64().unwrap() * (q as u64 - 1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pullback_commutes_with_application(q in prop::sample::select(vec![2u32, 3]), j in 1u32..=2,
            terms in prop::collection::vec((prop::collection::vec(0u32..3, 2), 1u32..3), 1..5)) {
        let f = FieldTower::new(q, 1, 1).unwrap();
        let chart = ChartSubstitution::standard(&f, 2);
        let theta = theta_chart(&f, 2, j);
        let pulled = pullback_derivation(&theta, &chart).unwrap();
        prop_assert_eq!(&pulled, &expected_pullback_field(&f, 2, j));
        let g = MPoly::from_terms(f.clone(), 2, terms.into_iter().map(|(e, c)| (e, Fe::from_index(c % q))));
        let lhs = pulled.apply(&chart.pullback(&g).unwrap());
        let rhs = chart.pullback(&theta.apply(&g)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}
