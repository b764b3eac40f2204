//! Linear systems of plane and space forms cut out by vanishing conditions
//! with multiplicity, solved by exact elimination.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use serde_json::Value;

use crate::counting::{dot, normalize, projective_points, span_points, subspaces};
use crate::cremona::{point_json, psi_map};
use crate::error::{Error, Result};
use crate::field::{Fe, FieldTower};
use crate::linalg;
use crate::moore::{tower_for, z_c_generators};
use crate::mpoly::{binomial_mod_p, MPoly, Mono};
use crate::report::{obj, CheckReport};
use crate::{binomial, q_number, Budget};

#[derive(Clone, Debug)]
pub struct Condition {
    pub point: Vec<Fe>,
    /// Required multiplicity r: all Hasse derivatives of order < r vanish.
    pub mult: u32,
}

#[derive(Clone, Debug)]
pub struct VanishingProblem {
    pub nvars: usize,
    pub degree: u32,
    /// Field of the condition points. Solutions are sought over its base F_q.
    pub tower: Arc<FieldTower>,
    pub conditions: Vec<Condition>,
}

#[derive(Clone, Debug)]
pub struct SolutionSpace {
    pub dimension: usize,
    pub basis: Vec<MPoly>,
    /// False when the echelon basis has entries outside F_q; the basis is then over the point field.
    pub rational: bool,
}

/// Degree-d monomials in decreasing term order.
pub fn degree_monomials(nvars: usize, d: u32) -> Vec<Mono> {
    fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Mono>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(Mono(cur.clone()));
            return;
        }
        for a in 0..=left {
            cur[i] = a;
            rec(i + 1, left - a, cur, out);
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        return out;
    }
    rec(0, d, &mut vec![0; nvars], &mut out);
    out.sort();
    out.reverse();
    out
}

/// Multi-indices with |α| = k.
pub fn multi_indices(nvars: usize, k: u32) -> Vec<Vec<u32>> {
    degree_monomials(nvars, k).into_iter().map(|m| m.0).collect()
}

/// Whether every Hasse derivative of order < r of f vanishes at the point.
pub fn satisfies(f: &MPoly, at: &FieldTower, cond: &Condition) -> Result<bool> {
    for k in 0..cond.mult {
        for alpha in multi_indices(f.nvars(), k) {
            if !f.hasse(&alpha).evaluate(at, &cond.point)?.is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Smallest M with q^M > d.
pub fn extension_degree(q: u32, d: u64) -> u32 {
    let mut m = 1;
    while (q as u64).pow(m) <= d {
        m += 1;
    }
    m
}

pub fn solve_vanishing(problem: &VanishingProblem, budget: &Budget) -> Result<SolutionSpace> {
    let t = &problem.tower;
    let p = t.p() as u64;
    let monos = degree_monomials(problem.nvars, problem.degree);
    let mut rows: Vec<Vec<Fe>> = Vec::new();
    for cond in &problem.conditions {
        if cond.point.len() != problem.nvars {
            return Err(Error::Usage(format!("condition point has {} coordinates, expected {}", cond.point.len(), problem.nvars)));
        }
        for k in 0..cond.mult {
            for alpha in multi_indices(problem.nvars, k) {
                let row = monos
                    .iter()
                    .map(|m| {
                        if m.0.iter().zip(&alpha).any(|(a, b)| a < b) {
                            return Fe::ZERO;
                        }
                        let b = m.0.iter().zip(&alpha).fold(1, |acc, (&a, &k)| acc * binomial_mod_p(a as u64, k as u64, p) % p);
                        if b == 0 {
                            return Fe::ZERO;
                        }
                        m.0.iter().zip(&alpha).zip(&cond.point).fold(t.from_int(b as i64), |acc, ((&a, &k), &x)| {
                            t.mul(acc, t.pow(x, (a - k) as u64))
                        })
                    })
                    .collect();
                rows.push(row);
            }
        }
    }
    budget.check_points("condition matrix entries", rows.len() as u64 * monos.len() as u64)?;
    let null = linalg::nullspace(t, rows, monos.len());
    let (echelon, _) = linalg::rref(t, null);
    let rational = echelon.iter().flatten().all(|&x| t.is_in_base(x));
    let field = if rational { t.base() } else { t.clone() };
    let basis = echelon
        .iter()
        .map(|v| {
            let terms: Vec<_> = monos.iter().zip(v).map(|(m, &c)| (m.0.clone(), c)).collect();
            MPoly::from_terms(field.clone(), problem.nvars, terms)
        })
        .collect();
    Ok(SolutionSpace { dimension: echelon.len(), basis, rational })
}

/// F_{q^M}-points of all rational codimension-c subspaces of P^n.
pub fn subspace_conditions(n: usize, c: usize, ext: &Arc<FieldTower>) -> Vec<Condition> {
    let base = ext.base();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for basis in subspaces(&base, n + 1, n + 1 - c) {
        for pt in span_points(ext, &basis) {
            let key: Vec<u32> = pt.iter().map(|x| x.index()).collect();
            if seen.insert(key) {
                out.push(Condition { point: pt, mult: 1 });
            }
        }
    }
    out
}

fn coefficient_rows(polys: &[MPoly], monos: &[Mono]) -> Vec<Vec<Fe>> {
    polys.iter().map(|f| monos.iter().map(|m| f.coeff(&m.0)).collect()).collect()
}

fn recheck(r: &mut CheckReport, sol: &SolutionSpace, ext: &FieldTower, conds: &[Condition]) -> Result<()> {
    for f in &sol.basis {
        for c in conds {
            if !satisfies(f, ext, c)? {
                r.fail(obj([("basis_element", f.text().into()), ("point", point_json(ext, &c.point))]));
                return Ok(());
            }
        }
    }
    Ok(())
}

pub fn en_dimension_check(n: u32, c: u32, q: u32, budget: &Budget) -> Result<CheckReport> {
    if c < 1 || c > n + 1 {
        return Err(Error::Usage(format!("codimension {c} is outside 1..={}", n + 1)));
    }
    let d = q_number(q as u64, n + 2 - c);
    budget.check_degree("Eagon–Northcott degree", d)?;
    let big_m = extension_degree(q, d);
    let ext = tower_for(q, big_m, budget)?;
    let base = ext.base();
    let nu = n as usize;
    let conds = subspace_conditions(nu, c as usize, &ext);
    let prob = VanishingProblem { nvars: nu + 1, degree: d as u32, tower: ext.clone(), conditions: conds };
    let sol = solve_vanishing(&prob, budget)?;
    let expected = binomial(n as u64 + 1, (n + 2 - c) as u64) as usize;
    let mut r = CheckReport::new("linsys.en-dimension")
        .param("n", n)
        .param("c", c)
        .param("q", q)
        .with_tower(&ext);
    r.set_data("degree", d);
    r.set_data("extension_degree", big_m);
    r.set_data("condition_points", prob.conditions.len());
    r.set_data("dimension", sol.dimension);
    r.set_data("expected", expected);
    r.set_data("basis", Value::Array(sol.basis.iter().map(|f| f.text().into()).collect()));
    r.require(sol.dimension == expected, || obj([("dimension", sol.dimension.into()), ("expected", expected.into())]));
    r.require(sol.rational, || obj([("basis", "not defined over F_q".into())]));
    recheck(&mut r, &sol, &ext, &prob.conditions)?;

    let gens = z_c_generators(nu, c as usize, &base)?;
    let monos = degree_monomials(nu + 1, d as u32);
    let a = coefficient_rows(&sol.basis, &monos);
    let b = coefficient_rows(&gens, &monos);
    let ra = linalg::rank(&ext, a.clone());
    let rb = linalg::rank(&ext, b.clone());
    let rab = linalg::rank(&ext, a.into_iter().chain(b).collect());
    r.set_data("moore_minor_rank", rb);
    r.require(ra == rb && rb == rab, || {
        obj([("basis_rank", ra.into()), ("minor_rank", rb.into()), ("joint_rank", rab.into())])
    });
    Ok(r)
}

/// Degree-(q²−1) forms on Z₂ and degree-(q−1) forms on Z₃ in P³.
pub fn vanishing_zero_checks(q: u32, budget: &Budget) -> Result<CheckReport> {
    let base = tower_for(q, 1, budget)?;
    let mut r = CheckReport::new("linsys.vanishing").param("n", 3).param("q", q).with_tower(&base);
    let q64 = q as u64;
    for (c, d) in [(2usize, q64 * q64 - 1), (3usize, q64 - 1)] {
        let big_m = extension_degree(q, d);
        let ext = tower_for(q, big_m, budget)?;
        r.add_tower(&ext);
        let conds = subspace_conditions(3, c, &ext);
        let npts = conds.len();
        let prob = VanishingProblem { nvars: 4, degree: d as u32, tower: ext.clone(), conditions: conds };
        let sol = solve_vanishing(&prob, budget)?;
        r.set_data(
            &format!("Z{c}"),
            obj([
                ("degree", d.into()),
                ("extension_degree", big_m.into()),
                ("condition_points", npts.into()),
                ("dimension", sol.dimension.into()),
            ]),
        );
        r.require(sol.dimension == 0, || obj([("Z", c.into()), ("degree", d.into()), ("dimension", sol.dimension.into())]));
    }
    Ok(r)
}

/// Points of P² whose coordinates lie in the degree-m subfield of `ext`.
fn subfield_points(ext: &FieldTower, m: u32, budget: &Budget) -> Result<Vec<Vec<Fe>>> {
    Ok(projective_points(ext, 2, budget)?
        .into_iter()
        .filter(|pt| pt.iter().all(|&x| ext.frobenius_q(x, m) == x))
        .collect())
}

fn hasse_multiplicity(f: &MPoly, at: &FieldTower, point: &[Fe], cap: u32) -> Result<u32> {
    for k in 0..=cap {
        for alpha in multi_indices(f.nvars(), k) {
            if !f.hasse(&alpha).evaluate(at, point)?.is_zero() {
                return Ok(k);
            }
        }
    }
    Ok(cap + 1)
}

fn is_rational(t: &FieldTower, pt: &[Fe]) -> bool {
    pt.iter().all(|&x| t.is_in_base(x))
}

/// Members a·s₀ + b·s₁ + c·s₂ of |I_Z(q+1)| with [a,b,c] ∈ P²(F_{q^m}); singular
/// points are searched over P²(F_{q^{2m}}).
pub fn moving_singularity_check(q: u32, m: u32, budget: &Budget) -> Result<CheckReport> {
    if m == 0 || m > 3 {
        return Err(Error::Usage(format!("m must be in 1..=3, got {m}")));
    }
    let ext = tower_for(q, 2 * m, budget)?;
    let base = ext.base();
    let s = psi_map(2, &base).components().to_vec();
    let curves = subfield_points(&ext, m, budget)?;
    let search = projective_points(&ext, 2, budget)?;
    budget.check_points("curve/point pairs", curves.len() as u64 * search.len() as u64)?;
    let mut r = CheckReport::new("linsys.serre").param("q", q).param("m", m).with_tower(&ext);

    // Values of s_i and ∂_k s_i at each search point.
    let partials: Vec<Vec<MPoly>> = s.iter().map(|f| (0..3).map(|k| f.partial(k)).collect()).collect();
    let mut table = Vec::with_capacity(search.len());
    for pt in &search {
        let mut row = [[Fe::ZERO; 4]; 3];
        for i in 0..3 {
            row[i][0] = s[i].evaluate(&ext, pt)?;
            for k in 0..3 {
                row[i][k + 1] = partials[i][k].evaluate(&ext, pt)?;
            }
        }
        table.push(row);
    }

    let mut images: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
    let mut mult_hist: BTreeMap<(bool, u32), u64> = BTreeMap::new();
    for (ci, abc) in curves.iter().enumerate() {
        let mut sing = Vec::new();
        for (pi, row) in table.iter().enumerate() {
            let all_zero = (0..4).all(|slot| {
                (0..3).fold(Fe::ZERO, |acc, i| ext.add(acc, ext.mul(abc[i], row[i][slot]))).is_zero()
            });
            if all_zero {
                sing.push(pi);
            }
        }
        let root: Vec<Fe> = abc.iter().map(|&a| ext.qth_root(a)).collect();
        let root = normalize(&ext, &root).expect("nonzero");
        let ok = sing.len() == 1 && search[sing[0]] == root;
        r.require(ok, || {
            obj([
                ("curve", point_json(&ext, abc)),
                ("expected", point_json(&ext, &root)),
                ("singular", Value::Array(sing.iter().map(|&i| point_json(&ext, &search[i])).collect())),
            ])
        });
        let key: Vec<u32> = root.iter().map(|x| x.index()).collect();
        if let Some(prev) = images.insert(key, ci) {
            r.fail(obj([
                ("curves", Value::Array(vec![point_json(&ext, &curves[prev]), point_json(&ext, abc)])),
                ("shared_point", point_json(&ext, &root)),
            ]));
        }
        let f = (0..3).fold(MPoly::zero(ext.clone(), 3), |acc, i| &acc + &s[i].lift_to(&ext).scale(abc[i]));
        let mu = hasse_multiplicity(&f, &ext, &root, q + 1)?;
        *mult_hist.entry((is_rational(&ext, &root), mu)).or_insert(0) += 1;
    }
    r.set_data("curves", curves.len());
    r.set_data("search_points", search.len());
    r.set_data("search_extension_degree", 2 * m);
    r.set_data(
        "multiplicities",
        Value::Array(
            mult_hist
                .iter()
                .map(|(&(rat, mu), &n)| obj([("rational_point", rat.into()), ("multiplicity", mu.into()), ("curves", n.into())]))
                .collect(),
        ),
    );
    for (&(rat, mu), &n) in &mult_hist {
        let expected = if rat { q + 1 } else { q };
        r.require(mu == expected, || {
            obj([("rational_point", rat.into()), ("multiplicity", mu.into()), ("expected", expected.into()), ("curves", n.into())])
        });
    }
    Ok(r)
}

/// Every normalized rational linear form dividing f, with multiplicity.
pub fn reducibility_probe(f: &MPoly) -> Result<Vec<(Vec<Fe>, u32)>> {
    if f.nvars() != 3 || !f.is_homogeneous() {
        return Err(Error::Usage("reducibility probe needs a homogeneous form in 3 variables".into()));
    }
    let t = f.field().clone();
    let base = t.base();
    let x = MPoly::vars(&t, 3);
    let mut out = Vec::new();
    for l in projective_points(&base, 2, &Budget::default())?.into_iter().rev() {
        let form = (0..3).fold(MPoly::zero(t.clone(), 3), |acc, i| &acc + &x[i].scale(l[i]));
        let mut g = f.clone();
        let mut k = 0;
        while !g.is_zero() {
            match g.exact_divide(&form) {
                Ok(h) => {
                    g = h;
                    k += 1;
                }
                Err(Error::NotDivisible { .. }) => break,
                Err(e) => return Err(e),
            }
        }
        if k > 0 {
            out.push((l, k));
        }
    }
    Ok(out)
}

/// s₀ splits into q+1 rational lines; for each member over F_{q^m}, a rational
/// line divides it exactly when it passes through the singular point.
pub fn verify_reducibility(q: u32, m: u32, budget: &Budget) -> Result<CheckReport> {
    let ext = tower_for(q, m, budget)?;
    let base = ext.base();
    let s = psi_map(2, &base).components().to_vec();
    let mut r = CheckReport::new("linsys.reducibility").param("q", q).param("m", m).with_tower(&ext);
    let f0 = reducibility_probe(&s[0])?;
    let total: u32 = f0.iter().map(|(_, k)| k).sum();
    r.require(f0.len() == q as usize + 1 && total == q + 1, || {
        obj([("s0_factors", Value::Array(f0.iter().map(|(l, k)| obj([("line", point_json(&base, l)), ("mult", (*k).into())])).collect()))])
    });
    let curves = projective_points(&ext, 2, budget)?;
    let lines = projective_points(&base, 2, budget)?;
    let mut reducible = 0u64;
    for abc in &curves {
        let f = (0..3).fold(MPoly::zero(ext.clone(), 3), |acc, i| &acc + &s[i].lift_to(&ext).scale(abc[i]));
        let root: Vec<Fe> = abc.iter().map(|&a| ext.qth_root(a)).collect();
        let factors = reducibility_probe(&f)?;
        if !factors.is_empty() {
            reducible += 1;
        }
        for l in &lines {
            let through = dot(&ext, l, &root).is_zero();
            let divides = factors.iter().any(|(fl, _)| fl == l);
            r.require(through == divides, || {
                obj([
                    ("curve", point_json(&ext, abc)),
                    ("line", point_json(&base, l)),
                    ("through_singular_point", through.into()),
                    ("divides", divides.into()),
                ])
            });
        }
    }
    r.set_data("members", curves.len());
    r.set_data("with_rational_line_factor", reducible);
    Ok(r)
}

/// h⁰ of degree-s forms with multiplicity q_i − 1 at P_i, χ = binom(s+2,2) − Σ binom(q_i,2), h¹ = h⁰ − χ.
pub fn imposed_conditions_experiment(
    d: u32,
    points: &[(Vec<Fe>, u32)],
    s: u32,
    tower: &Arc<FieldTower>,
    budget: &Budget,
) -> Result<CheckReport> {
    let conds: Vec<Condition> = points
        .iter()
        .filter(|(_, qi)| *qi >= 2)
        .map(|(pt, qi)| Condition { point: pt.clone(), mult: qi - 1 })
        .collect();
    if points.iter().any(|(pt, _)| pt.iter().all(|x| x.is_zero()) || pt.len() != 3) {
        return Err(Error::Usage("points must be nonzero vectors with 3 coordinates".into()));
    }
    if points.iter().any(|(_, qi)| *qi == 0) {
        return Err(Error::Usage("curve multiplicities must be at least 1".into()));
    }
    let prob = VanishingProblem { nvars: 3, degree: s, tower: tower.clone(), conditions: conds };
    let sol = solve_vanishing(&prob, budget)?;
    let chi = binomial(s as u64 + 2, 2) as i64 - points.iter().map(|(_, qi)| binomial(*qi as u64, 2) as i64).sum::<i64>();
    let h0 = sol.dimension as i64;
    let h1 = h0 - chi;
    let candidate = h1 > 0 && s + 2 >= d;
    let mut r = CheckReport::new("linsys.appendix")
        .param("d", d)
        .param("s", s)
        .param("q", tower.q())
        .param("m", tower.m())
        .with_tower(tower);
    r.params.insert(
        "points".into(),
        Value::Array(points.iter().map(|(pt, qi)| obj([("point", point_json(tower, pt)), ("mult", (*qi).into())])).collect()),
    );
    r.set_data("h0_actual", h0);
    r.set_data("chi", chi);
    r.set_data("h1", h1);
    r.set_data("rational_basis", sol.rational);
    r.set_data("candidate", candidate);
    r.set_data("note", "evidence for the imposed-conditions questions, not an answer to them");
    recheck(&mut r, &sol, tower, &prob.conditions)?;
    Ok(r)
}

/// The rational points of P² with curve multiplicity 2 each.
pub fn rational_point_configuration(tower: &Arc<FieldTower>) -> Result<Vec<(Vec<Fe>, u32)>> {
    Ok(projective_points(&tower.base(), 2, &Budget::default())?.into_iter().map(|p| (p, 2)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_counts() {
        assert_eq!(degree_monomials(3, 3).len(), 10);
        assert_eq!(degree_monomials(4, 7).len(), 120);
        assert_eq!(degree_monomials(2, 0).len(), 1);
    }

    #[test]
    fn two_points_give_a_line() {
        let t = FieldTower::new(2, 1, 1).unwrap();
        let conds = vec![
            Condition { point: vec![Fe::ONE, Fe::ZERO, Fe::ZERO], mult: 1 },
            Condition { point: vec![Fe::ZERO, Fe::ONE, Fe::ZERO], mult: 1 },
        ];
        let prob = VanishingProblem { nvars: 3, degree: 1, tower: t, conditions: conds };
        let sol = solve_vanishing(&prob, &Budget::default()).unwrap();
        assert_eq!(sol.dimension, 1);
        assert_eq!(sol.basis[0].text(), "1*x2");
    }
}
