use std::sync::Arc;

use drinfeld_core::field::{factor_prime_power, norm_form, FieldTower};
use drinfeld_core::{Budget, Error, Fe};
use proptest::prelude::*;

const TOWERS: &[(u32, u32, u32)] = &[
    (2, 1, 1),
    (3, 1, 1),
    (5, 1, 1),
    (2, 2, 1),
    (2, 3, 1),
    (3, 2, 1),
    (2, 1, 2),
    (2, 1, 3),
    (2, 2, 2),
    (3, 1, 2),
    (2, 1, 4),
    (2, 2, 3),
    (3, 1, 3),
    (2, 4, 2),
];

fn tower(i: usize) -> Arc<FieldTower> {
    let (p, e, m) = TOWERS[i];
    FieldTower::new(p, e, m).unwrap()
}

/// Polynomial over F_p evaluated at x by Horner, coefficients low degree first.
fn has_root_mod_p(coeffs: &[u32], p: u32) -> bool {
    (0..p).any(|x| coeffs.iter().rev().fold(0, |acc, &c| (acc * x + c) % p) == 0)
}

#[test]
fn base_moduli_are_first_irreducible() {
    // Degree ≤ 3 polynomials are irreducible iff rootless; lexicographic order
    // compares the constant term first.
    for (p, e) in [(2u32, 2u32), (2, 3), (3, 2), (5, 2), (3, 3)] {
        let t = FieldTower::new(p, e, 1).unwrap();
        let modulus = t.base_modulus().to_vec();
        assert_eq!(modulus.len() as u32, e + 1);
        assert_eq!(modulus[e as usize], 1);
        assert!(!has_root_mod_p(&modulus, p));
        let mut expected = None;
        'search: for idx in 0..p.pow(e) {
            let mut c = vec![0; e as usize + 1];
            let mut r = idx;
            // Enumerate with the constant term most significant.
            for k in (0..e as usize).rev() {
                c[k] = r % p;
                r /= p;
            }
            c[e as usize] = 1;
            if c[0] != 0 && !has_root_mod_p(&c, p) {
                expected = Some(c);
                break 'search;
            }
        }
        assert_eq!(Some(modulus), expected, "p={p} e={e}");
    }
}

#[test]
fn f4_and_f8_examples() {
    let f4 = FieldTower::new(2, 2, 1).unwrap();
    assert_eq!(f4.base_modulus(), &[1, 1, 1]);
    let t = f4.generator();
    assert_eq!(f4.text(f4.mul(t, t)), "[1,1]");
    let f8 = FieldTower::new(2, 1, 3).unwrap();
    // [1,0,1] < [1,1,0] as low-degree-first words, so x^3+x^2+1 wins over x^3+x+1.
    assert_eq!(f8.ext_modulus(), &[1, 0, 1, 1]);
    let u = f8.generator();
    let u3 = f8.pow(u, 3);
    assert_eq!(u3, f8.add(f8.mul(u, u), Fe::ONE));
}

#[test]
fn rejects_bad_parameters() {
    assert!(matches!(FieldTower::new(4, 1, 1), Err(Error::Usage(_))));
    assert!(matches!(FieldTower::new(1, 1, 1), Err(Error::Usage(_))));
    let tiny = Budget { max_field_size: 100, ..Budget::default() };
    assert!(matches!(FieldTower::with_budget(2, 1, 7, &tiny), Err(Error::Resource(_))));
    assert_eq!(factor_prime_power(81), Some((3, 4)));
    assert_eq!(factor_prime_power(12), None);
}

#[test]
fn frobenius_is_an_automorphism_fixing_the_base() {
    for i in 0..TOWERS.len() {
        let t = tower(i);
        if t.size() > 256 {
            continue;
        }
        let mut seen = std::collections::BTreeSet::new();
        for x in t.elements() {
            let fx = t.frobenius_q(x, 1);
            assert!(seen.insert(fx.index()), "Frobenius not injective on {:?}", TOWERS[i]);
            assert_eq!(t.frobenius_q(x, t.m()), x);
            assert_eq!(fx == x, t.is_in_base(x));
            assert_eq!(t.pow(t.qth_root(x), t.q() as u64), x);
            for y in t.elements().step_by(7) {
                assert_eq!(t.frobenius_q(t.add(x, y), 1), t.add(fx, t.frobenius_q(y, 1)));
                assert_eq!(t.frobenius_q(t.mul(x, y), 1), t.mul(fx, t.frobenius_q(y, 1)));
            }
        }
    }
}

#[test]
fn base_elements_are_shared_across_towers() {
    let small = FieldTower::new(2, 2, 1).unwrap();
    let big = FieldTower::new(2, 2, 3).unwrap();
    assert!(big.contains(&small));
    for a in small.elements() {
        for b in small.elements() {
            assert_eq!(small.mul(a, b), big.mul(a, b));
            assert_eq!(small.add(a, b), big.add(a, b));
        }
    }
}

#[test]
fn encode_decode_round_trip() {
    for i in 0..TOWERS.len() {
        let t = tower(i);
        for x in t.elements().take(300) {
            assert_eq!(t.decode(&t.encode(x)).unwrap(), x);
        }
    }
}

#[test]
fn norm_form_of_f9_power_basis() {
    let t = FieldTower::new(3, 1, 2).unwrap();
    let u = t.generator();
    let n = norm_form(&t, &[Fe::ONE, u]).unwrap();
    assert_eq!(n.field().m(), 1);
    assert_eq!(n.degree(), Some(2));
    // The norm form is anisotropic: its only zero in F_3^2 is the origin.
    let base = t.base();
    for a in base.elements() {
        for b in base.elements() {
            let v = n.evaluate(&base, &[a, b]).unwrap();
            assert_eq!(v.is_zero(), a.is_zero() && b.is_zero());
        }
    }
    assert!(matches!(norm_form(&t, &[Fe::ONE, Fe::ONE]), Err(Error::Degenerate(_))));
}

fn elem(t: &FieldTower) -> impl Strategy<Value = Fe> {
    (0..t.size()).prop_map(Fe::from_index)
}

fn tower_and_three() -> impl Strategy<Value = (usize, Fe, Fe, Fe)> {
    (0..TOWERS.len()).prop_flat_map(|i| {
        let t = tower(i);
        (Just(i), elem(&t), elem(&t), elem(&t))
    })
}

proptest! {
    #[test]
    fn field_axioms((i, a, b, c) in tower_and_three()) {
        let t = tower(i);
        prop_assert_eq!(t.add(a, b), t.add(b, a));
        prop_assert_eq!(t.mul(a, b), t.mul(b, a));
        prop_assert_eq!(t.add(t.add(a, b), c), t.add(a, t.add(b, c)));
        prop_assert_eq!(t.mul(t.mul(a, b), c), t.mul(a, t.mul(b, c)));
        prop_assert_eq!(t.mul(a, t.add(b, c)), t.add(t.mul(a, b), t.mul(a, c)));
        prop_assert_eq!(t.add(a, t.neg(a)), Fe::ZERO);
        prop_assert_eq!(t.sub(t.add(a, b), b), a);
        if !a.is_zero() {
            prop_assert_eq!(t.mul(a, t.inv(a).unwrap()), Fe::ONE);
            prop_assert_eq!(t.pow(a, t.size() as u64 - 1), Fe::ONE);
        } else {
            prop_assert!(t.inv(a).is_none());
        }
    }

    #[test]
    fn from_int_is_a_ring_map(i in 0..TOWERS.len(), x in -50i64..50, y in -50i64..50) {
        let t = tower(i);
        prop_assert_eq!(t.from_int(x + y), t.add(t.from_int(x), t.from_int(y)));
        prop_assert_eq!(t.from_int(x * y), t.mul(t.from_int(x), t.from_int(y)));
    }
}

/// A root of x^3 + x + 1 in F_8, found by search.
fn root_of_u3_u_1(f8: &FieldTower) -> Fe {
    f8.elements()
        .find(|&u| f8.pow(u, 3) == f8.add(u, Fe::ONE))
        .expect("x^3+x+1 splits in F_8")
}

#[test]
fn f8_examples_with_u_cubed_equal_u_plus_1() {
    use drinfeld_core::moore::{moore_det, stratum_of_point};
    use drinfeld_core::MPoly;
    let f8 = FieldTower::new(2, 1, 3).unwrap();
    let u = root_of_u3_u_1(&f8);
    assert_ne!(u, f8.generator());
    let pt = [Fe::ONE, u, f8.mul(u, u)];
    let x = MPoly::vars(&f8.base(), 3);
    assert!(!moore_det(&x).evaluate(&f8, &pt).unwrap().is_zero());
    assert_eq!(stratum_of_point(&f8, &pt).unwrap(), 0);
    for x in f8.elements() {
        assert_eq!(f8.pow(f8.qth_root(x), 2), x);
    }
}
