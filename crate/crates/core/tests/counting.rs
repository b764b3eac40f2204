use drinfeld_core::counting::{
    fflag_count, gaussian_binomial, graph_closure_count, projective_count, projective_points, subspace_count,
    subspaces, verify_betti_b2, verify_fflag_count, verify_stratify_count, IncidenceGeometry,
};
use drinfeld_core::{q_number, Budget, FieldTower, Status};
use proptest::prelude::*;

#[test]
fn flag_counts() {
    let b = Budget::default();
    assert_eq!(fflag_count(2, 1, &b).unwrap(), 21);
    assert_eq!(graph_closure_count(2, 1, &b).unwrap(), 21);
    assert_eq!(fflag_count(3, 1, &b).unwrap(), 52);
    for (q, m) in [(2, 1), (2, 2), (3, 1), (2, 3), (4, 1)] {
        let r = verify_fflag_count(q, m, &b).unwrap();
        assert_eq!(r.status, Status::Pass, "q={q} m={m}");
    }
    assert!(verify_fflag_count(2, 4, &b).is_err());
}

#[test]
fn betti_numbers() {
    let r = verify_betti_b2(2).unwrap();
    assert_eq!(r.status, Status::Pass);
    assert_eq!(r.data["b2"], 51);
    assert_eq!(verify_betti_b2(3).unwrap().data["b2"], 171);
    assert!(verify_betti_b2(6).is_err());
}

#[test]
fn incidence_geometry_is_a_projective_space() {
    for (p, n) in [(2u32, 2usize), (3, 2), (2, 3)] {
        let f = FieldTower::new(p, 1, 1).unwrap();
        let g = IncidenceGeometry::new(&f, n).unwrap();
        let per = q_number(p as u64, n as u32) as usize;
        assert_eq!(g.points.len() as u64, projective_count(p as u64, n as u32));
        assert!(g.incidence.iter().all(|pts| pts.len() == per));
        assert!((0..g.points.len()).all(|i| g.through(i).len() == per));
    }
    let ext = FieldTower::new(2, 1, 2).unwrap();
    assert!(IncidenceGeometry::new(&ext, 2).is_err());
}

#[test]
fn stratum_sums() {
    let b = Budget::default();
    for n in 1..=3 {
        for q in [2, 3] {
            for m in 1..=3 {
                if q == 3 && n == 3 && m == 3 {
                    continue;
                }
                let r = verify_stratify_count(n, q, m, &b).unwrap();
                assert_eq!(r.status, Status::Pass);
                let s: u64 = r.data["strata"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).sum();
                assert_eq!(s, r.data["points"].as_u64().unwrap());
            }
        }
    }
}

#[test]
fn point_enumeration_respects_budget() {
    let t = FieldTower::new(2, 1, 4).unwrap();
    let tiny = Budget { max_points: 100, ..Budget::default() };
    assert!(projective_points(&t, 2, &tiny).is_err());
    assert_eq!(projective_points(&t, 2, &Budget::default()).unwrap().len(), 273);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gaussian_binomial_matches_enumeration(q in prop::sample::select(vec![2u32, 3]), n in 1usize..=4, k in 0usize..=4) {
        prop_assume!(k <= n && (q as u64).pow(n as u32) <= 81);
        let f = FieldTower::new(q, 1, 1).unwrap();
        prop_assert_eq!(subspaces(&f, n, k).len() as u128, gaussian_binomial(n as u32, k as u32, q as u64));
        prop_assert_eq!(gaussian_binomial(n as u32, k as u32, q as u64), gaussian_binomial(n as u32, (n - k) as u32, q as u64));
    }

    #[test]
    fn subspace_count_symmetry(q in 2u64..6, n in 1u32..6, c in 0u32..6) {
        prop_assume!(c <= n);
        prop_assert_eq!(subspace_count(n, c, q), gaussian_binomial(n + 1, c, q));
    }
}
