//! Moore determinants Δ_q, their product formula and derivative identity, the
//! generators of the strata Z_c, and the stratum of a point.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use serde_json::Value;

use crate::counting::projective_points;
use crate::error::{Error, Result};
use crate::field::{factor_prime_power, Fe, FieldTower};
use crate::linalg;
use crate::mpoly::{det_poly_matrix, MPoly};
use crate::report::{obj, CheckReport};
use crate::{q_number, Budget};

/// The tower F_{q^m} for a prime power q.
pub fn tower_for(q: u32, m: u32, budget: &Budget) -> Result<Arc<FieldTower>> {
    let (p, e) = factor_prime_power(q as u64).ok_or_else(|| Error::Usage(format!("{q} is not a prime power")))?;
    FieldTower::with_budget(p, e, m, budget)
}

/// Δ_q(w_1..w_n) = det(w_j^{q^i}); q is the base field size of the arguments' tower.
pub fn moore_det(args: &[MPoly]) -> MPoly {
    assert!(!args.is_empty(), "Moore determinant of no arguments");
    let q = args[0].field().q() as u64;
    let rows: Vec<Vec<MPoly>> = (0..args.len() as u32)
        .map(|i| args.iter().map(|w| w.pow(q.pow(i))).collect())
        .collect();
    det_poly_matrix(&rows)
}

/// ∏_{i} ∏_{a ∈ F_q^{i-1}} (a_1 w_1 + ... + a_{i-1} w_{i-1} + w_i).
pub fn moore_product(args: &[MPoly]) -> MPoly {
    assert!(!args.is_empty(), "Moore product of no arguments");
    let field = args[0].field().clone();
    let q = field.q();
    let mut acc = MPoly::one(field.clone(), args[0].nvars());
    for i in 0..args.len() {
        for idx in 0..(q as u64).pow(i as u32) {
            let mut form = args[i].clone();
            let mut r = idx;
            for w in &args[..i] {
                let a = Fe::from_index((r % q as u64) as u32);
                r /= q as u64;
                if !a.is_zero() {
                    form = &form + &w.scale(a);
                }
            }
            acc = &acc * &form;
        }
    }
    acc
}

fn moore_or_one(args: &[MPoly], field: &Arc<FieldTower>, nvars: usize) -> MPoly {
    if args.is_empty() {
        MPoly::one(field.clone(), nvars)
    } else {
        moore_det(args)
    }
}

pub fn verify_moore_identity(q: u32, n: u32, budget: &Budget) -> Result<CheckReport> {
    let deg = q_number(q as u64, n);
    budget.check_degree("Moore determinant", deg)?;
    let f = tower_for(q, 1, budget)?;
    let mut r = CheckReport::new("moore.identity").param("q", q).param("n", n).with_tower(&f);
    let w = MPoly::vars(&f, n as usize);
    let det = moore_det(&w);
    let prod = moore_product(&w);
    r.set_data("degree", deg);
    r.set_data("terms", det.num_terms());
    r.require(det.degree() == Some(deg as u32), || obj([("degree", det.degree().into())]));
    r.require(det == prod, || obj([("difference", (&det - &prod).text().into())]));
    Ok(r)
}

pub fn verify_partial_identity(q: u32, n: u32, budget: &Budget) -> Result<CheckReport> {
    budget.check_degree("Moore determinant", q_number(q as u64, n))?;
    let f = tower_for(q, 1, budget)?;
    let mut r = CheckReport::new("moore.partial").param("q", q).param("n", n).with_tower(&f);
    let nv = n as usize;
    let w = MPoly::vars(&f, nv);
    let det = moore_det(&w);
    for i in 0..nv {
        let lhs = det.partial(i);
        let hat: Vec<MPoly> = w.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, x)| x.clone()).collect();
        let mut rhs = moore_or_one(&hat, &f, nv).pow(q as u64);
        if i % 2 == 1 {
            rhs = -&rhs;
        }
        r.require(lhs == rhs, || {
            obj([("variable", (i + 1).into()), ("difference", (&lhs - &rhs).text().into())])
        });
    }
    Ok(r)
}

/// Subsets of {0..n-1} of size k in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// {Δ_q(x_Î) : |I| = c-1} in P^n, ordered lexicographically in I.
pub fn z_c_generators(n: usize, c: usize, field: &Arc<FieldTower>) -> Result<Vec<MPoly>> {
    if c == 0 || c > n + 1 {
        return Err(Error::Usage(format!("codimension {c} is outside 1..={}", n + 1)));
    }
    let x = MPoly::vars(field, n + 1);
    Ok(combinations(n + 1, c - 1)
        .into_iter()
        .map(|omit| {
            let keep: Vec<MPoly> = (0..=n).filter(|i| !omit.contains(i)).map(|i| x[i].clone()).collect();
            moore_det(&keep)
        })
        .collect())
}

/// The i with x ∈ Z_i − Z_{i+1}: (n+1) − rank of the Frobenius-row matrix.
pub fn stratum_of_point(tower: &FieldTower, point: &[Fe]) -> Result<usize> {
    if point.iter().all(|x| x.is_zero()) {
        return Err(Error::Usage("the zero vector is not a projective point".into()));
    }
    let n1 = point.len();
    let rows = (0..n1 as u32)
        .map(|j| point.iter().map(|&x| tower.frobenius_q(x, j)).collect())
        .collect();
    Ok(n1 - linalg::rank(tower, rows))
}

/// Whether the point lies in the Drinfeld half-space.
pub fn in_omega(tower: &FieldTower, point: &[Fe]) -> Result<bool> {
    Ok(stratum_of_point(tower, point)? == 0)
}

/// Stratum ≥ c ⟺ all Z_c generators vanish, on every point of P^n(F_{q^m}).
pub fn verify_strata_dual(n: u32, q: u32, m: u32, budget: &Budget) -> Result<CheckReport> {
    let ext = tower_for(q, m, budget)?;
    let base = ext.base();
    let nu = n as usize;
    let total = crate::counting::projective_count(ext.size() as u64, n);
    budget.check_points("projective points", total)?;
    let mut r = CheckReport::new("moore.strata-dual")
        .param("n", n)
        .param("q", q)
        .param("m", m)
        .with_tower(&ext);
    let gens: Vec<Vec<MPoly>> = (1..=nu + 1).map(|c| z_c_generators(nu, c, &base)).collect::<Result<_>>()?;
    let mut counts = alloc::vec![0u64; nu + 1];
    for pt in projective_points(&ext, nu, budget)? {
        let s = stratum_of_point(&ext, &pt)?;
        counts[s] += 1;
        for (ci, g) in gens.iter().enumerate() {
            let c = ci + 1;
            let mut vanish = true;
            for f in g {
                if !f.evaluate(&ext, &pt)?.is_zero() {
                    vanish = false;
                    break;
                }
            }
            if vanish != (s >= c) {
                r.fail(obj([
                    ("point", Value::Array(pt.iter().map(|&x| ext.encode(x)).collect())),
                    ("stratum", s.into()),
                    ("c", c.into()),
                    ("generators_vanish", vanish.into()),
                ]));
            }
        }
    }
    let sum: u64 = counts.iter().sum();
    r.require(sum == total, || obj([("sum", sum.into()), ("expected", total.into())]));
    if m <= n {
        r.require(counts[0] == 0, || obj([("omega", counts[0].into())]));
    }
    r.set_data("strata", Value::from(counts));
    r.set_data("points", total);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_2_of_two_variables() {
        let f = FieldTower::new(2, 1, 1).unwrap();
        let w = MPoly::vars(&f, 2);
        let d = moore_det(&w);
        assert_eq!(d.text(), "1*x0^2*x1+1*x0*x1^2");
    }

    #[test]
    fn zc_counts() {
        let f = FieldTower::new(2, 1, 1).unwrap();
        let g = z_c_generators(3, 2, &f).unwrap();
        assert_eq!(g.len(), 4);
        assert!(g.iter().all(|p| p.degree() == Some(7)));
    }
}
