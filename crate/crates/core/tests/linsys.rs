use std::sync::Arc;

use drinfeld_core::counting::projective_points;
use drinfeld_core::cremona::psi_map;
use drinfeld_core::linsys::{
    degree_monomials, en_dimension_check, extension_degree, imposed_conditions_experiment,
    moving_singularity_check, rational_point_configuration, reducibility_probe, satisfies, solve_vanishing,
    vanishing_zero_checks, verify_reducibility, Condition, VanishingProblem,
};
use drinfeld_core::{binomial, Budget, Fe, FieldTower, MPoly, Status};
use proptest::prelude::*;

fn rational_points(q: u32) -> Vec<Vec<Fe>> {
    projective_points(&FieldTower::new(q, 1, 1).unwrap(), 2, &Budget::default()).unwrap()
}

fn problem(tower: &Arc<FieldTower>, degree: u32, pts: &[Vec<Fe>], mult: u32) -> VanishingProblem {
    VanishingProblem {
        nvars: 3,
        degree,
        tower: tower.clone(),
        conditions: pts.iter().map(|p| Condition { point: p.clone(), mult }).collect(),
    }
}

/// Rank of a list of polynomials via their coefficient vectors, by Gaussian elimination over F_q.
fn rank(polys: &[MPoly]) -> usize {
    let f = polys[0].field().clone();
    let mut monos: Vec<Vec<u32>> = polys.iter().flat_map(|p| p.terms().keys().map(|m| m.0.clone())).collect();
    monos.sort();
    monos.dedup();
    let mut rows: Vec<Vec<Fe>> = polys.iter().map(|p| monos.iter().map(|m| p.coeff(m)).collect()).collect();
    let mut r = 0;
    for col in 0..monos.len() {
        let Some(piv) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else { continue };
        rows.swap(r, piv);
        let inv = f.inv(rows[r][col]).unwrap();
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let k = f.mul(rows[i][col], inv);
                for j in 0..monos.len() {
                    let v = f.mul(k, rows[r][j]);
                    rows[i][j] = f.sub(rows[i][j], v);
                }
            }
        }
        r += 1;
    }
    r
}

#[test]
fn cubics_through_the_seven_points_are_spanned_by_psi() {
    let f = FieldTower::new(2, 1, 1).unwrap();
    let pts = rational_points(2);
    let sol = solve_vanishing(&problem(&f, 3, &pts, 1), &Budget::default()).unwrap();
    assert_eq!(sol.dimension, 3);
    assert!(sol.rational);
    let psi = psi_map(2, &f).components().to_vec();
    assert_eq!(rank(&psi), 3);
    let mut both = psi.clone();
    both.extend(sol.basis.iter().cloned());
    assert_eq!(rank(&both), 3);
    let conics = solve_vanishing(&problem(&f, 2, &pts, 1), &Budget::default()).unwrap();
    assert_eq!(conics.dimension, 0);
}

#[test]
fn monomial_and_extension_helpers() {
    assert_eq!(degree_monomials(3, 3).len(), 10);
    assert_eq!(degree_monomials(4, 2).len(), 10);
    assert_eq!(degree_monomials(3, 2)[0].0, vec![2, 0, 0]);
    assert_eq!(extension_degree(2, 3), 2);
    assert_eq!(extension_degree(2, 4), 3);
    assert_eq!(extension_degree(3, 8), 2);
}

#[test]
fn structural_checks_pass() {
    let b = Budget::default();
    for (n, c, q, dim) in [(2, 2, 2, 3), (3, 2, 2, 4), (3, 3, 2, 6), (2, 2, 3, 3)] {
        let r = en_dimension_check(n, c, q, &b).unwrap();
        assert_eq!(r.status, Status::Pass, "n={n} c={c} q={q}");
        assert_eq!(r.data["dimension"], dim);
        assert_eq!(dim as u64, binomial(n as u64 + 1, (n + 2 - c) as u64));
    }
    assert!(en_dimension_check(2, 0, 2, &b).is_err());
    assert_eq!(vanishing_zero_checks(2, &b).unwrap().status, Status::Pass);
    for (q, m) in [(2, 1), (2, 2), (3, 1)] {
        assert_eq!(moving_singularity_check(q, m, &b).unwrap().status, Status::Pass, "serre q={q} m={m}");
        assert_eq!(verify_reducibility(q, m, &b).unwrap().status, Status::Pass, "reducibility q={q} m={m}");
    }
}

#[test]
fn moving_singularity_multiplicities_over_f4() {
    let r = moving_singularity_check(2, 2, &Budget::default()).unwrap();
    let hist = r.data["multiplicities"].as_array().unwrap();
    let find = |rational: bool| hist.iter().find(|e| e["rational_point"] == rational).unwrap().clone();
    assert_eq!(find(false)["multiplicity"], 2);
    assert_eq!(find(false)["curves"], 14);
    assert_eq!(find(true)["multiplicity"], 3);
    assert_eq!(find(true)["curves"], 7);
}

#[test]
fn s0_splits_into_three_lines_over_f2() {
    let f = FieldTower::new(2, 1, 1).unwrap();
    let s0 = psi_map(2, &f).components()[0].clone();
    let factors = reducibility_probe(&s0).unwrap();
    assert_eq!(factors.len(), 3);
    assert!(factors.iter().all(|(l, k)| *k == 1 && l[0].is_zero()));
}

#[test]
fn imposed_conditions_examples() {
    let b = Budget::default();
    let f = FieldTower::new(2, 1, 1).unwrap();
    let one = vec![(vec![Fe::ONE, Fe::ZERO, Fe::ZERO], 2)];
    let r = imposed_conditions_experiment(3, &one, 1, &f, &b).unwrap();
    assert_eq!((r.data["h0_actual"].clone(), r.data["chi"].clone(), r.data["h1"].clone()), (2.into(), 2.into(), 0.into()));
    let all = rational_point_configuration(&f).unwrap();
    let r = imposed_conditions_experiment(3, &all, 3, &f, &b).unwrap();
    assert_eq!(r.data["h0_actual"], 3);
    assert_eq!(r.data["h1"], 0);
    assert_eq!(r.status, Status::Pass);
    for s in 0..5u32 {
        let r = imposed_conditions_experiment(3, &[], s, &f, &b).unwrap();
        assert_eq!(r.data["h0_actual"], binomial(s as u64 + 2, 2));
    }
    assert!(imposed_conditions_experiment(3, &[(vec![Fe::ZERO; 3], 2)], 1, &f, &b).is_err());
}

#[test]
fn galois_stable_conditions_have_rational_solutions() {
    // A point of P²(F_4) and its conjugate: the solution space descends to F_2.
    let f4 = FieldTower::new(2, 1, 2).unwrap();
    let w = f4.generator();
    let pt = vec![Fe::ONE, w, Fe::ZERO];
    let conj: Vec<Fe> = pt.iter().map(|&x| f4.frobenius_q(x, 1)).collect();
    let single = solve_vanishing(&problem(&f4, 1, std::slice::from_ref(&pt), 1), &Budget::default()).unwrap();
    assert_eq!(single.dimension, 2);
    assert!(!single.rational);
    let pair = solve_vanishing(&problem(&f4, 1, &[pt, conj], 1), &Budget::default()).unwrap();
    assert_eq!(pair.dimension, 1);
    assert!(pair.rational);
    assert_eq!(pair.basis[0].text(), "1*x2");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn extra_conditions_never_raise_the_dimension(mask in 0u32..(1 << 13), extra in 0usize..13, degree in 1u32..5) {
        let f = FieldTower::new(3, 1, 1).unwrap();
        let all = rational_points(3);
        let chosen: Vec<Vec<Fe>> = (0..13).filter(|i| mask & (1 << i) != 0).map(|i| all[i].clone()).collect();
        let mut more = chosen.clone();
        more.push(all[extra].clone());
        let b = Budget::default();
        let d0 = solve_vanishing(&problem(&f, degree, &chosen, 1), &b).unwrap();
        let d1 = solve_vanishing(&problem(&f, degree, &more, 1), &b).unwrap();
        prop_assert!(d1.dimension <= d0.dimension);
        // One point imposes at most one condition.
        prop_assert!(d0.dimension <= d1.dimension + 1);
        let free = binomial(degree as u64 + 2, 2) as usize;
        prop_assert!(d0.dimension + chosen.len() >= free);
        for g in &d1.basis {
            for p in &more {
                let c = Condition { point: p.clone(), mult: 1 };
                prop_assert!(satisfies(g, &f, &c).unwrap());
            }
        }
    }
}
