//! The inseparable Cremona map ψ, Frobenius maps and their composition laws.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use serde_json::Value;

use crate::counting::{normalize, projective_points, stratify_count};
use crate::error::{Error, Result};
use crate::field::{Fe, FieldTower};
use crate::moore::{moore_det, stratum_of_point, tower_for};
use crate::mpoly::MPoly;
use crate::report::{obj, CheckReport};
use crate::{q_number, Budget};

pub const SIGN_CONVENTION: &str = "psi_i = (-1)^i * Delta_q(x_0..^x_i..x_n)";

/// A tuple of homogeneous polynomials of one degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMap {
    components: Vec<MPoly>,
}

impl RationalMap {
    pub fn new(components: Vec<MPoly>) -> Result<RationalMap> {
        let first = components.first().ok_or_else(|| Error::Usage("map without components".into()))?;
        if components.iter().all(MPoly::is_zero) {
            return Err(Error::Usage("all components are zero".into()));
        }
        let deg = components.iter().find_map(MPoly::degree);
        for c in &components {
            if c.nvars() != first.nvars() || **c.field() != **first.field() {
                return Err(Error::Usage("components live in different rings".into()));
            }
            if !c.is_homogeneous() || (!c.is_zero() && c.degree() != deg) {
                return Err(Error::Usage(format!("component {} is not homogeneous of degree {deg:?}", c)));
            }
        }
        Ok(RationalMap { components })
    }

    pub fn components(&self) -> &[MPoly] {
        &self.components
    }

    pub fn nvars(&self) -> usize {
        self.components[0].nvars()
    }

    pub fn degree(&self) -> u32 {
        self.components.iter().find_map(MPoly::degree).unwrap_or(0)
    }

    /// self ∘ inner, by raw substitution.
    pub fn compose(&self, inner: &RationalMap) -> Result<RationalMap> {
        let comps = self
            .components
            .iter()
            .map(|c| c.substitute(&inner.components))
            .collect::<Result<Vec<_>>>()?;
        RationalMap::new(comps)
    }

    /// Image of a normalized point with coordinates in `at`.
    pub fn apply(&self, at: &FieldTower, point: &[Fe]) -> Result<Vec<Fe>> {
        let vals = self
            .components
            .iter()
            .map(|c| c.evaluate(at, point))
            .collect::<Result<Vec<_>>>()?;
        normalize(at, &vals).ok_or_else(|| Error::Indeterminacy { point: point_text(at, point) })
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.components.iter().map(MPoly::to_json).collect())
    }
}

pub fn point_json(t: &FieldTower, point: &[Fe]) -> Value {
    Value::Array(point.iter().map(|&x| t.encode(x)).collect())
}

pub fn point_text(t: &FieldTower, point: &[Fe]) -> String {
    serde_json::to_string(&point_json(t, point)).expect("plain JSON value")
}

/// ψ_i = (−1)^i Δ_q(x_0, .., x̂_i, .., x_n).
pub fn psi_map(n: usize, field: &Arc<FieldTower>) -> RationalMap {
    let x = MPoly::vars(field, n + 1);
    let comps = (0..=n)
        .map(|i| {
            let hat: Vec<MPoly> = (0..=n).filter(|&k| k != i).map(|k| x[k].clone()).collect();
            let d = moore_det(&hat);
            if i % 2 == 1 {
                -&d
            } else {
                d
            }
        })
        .collect();
    RationalMap { components: comps }
}

/// Fr^j: x_i ↦ x_i^{q^j}.
pub fn frobenius_map(n: usize, field: &Arc<FieldTower>, j: u32) -> RationalMap {
    let qj = (field.q() as u64).pow(j);
    RationalMap { components: MPoly::vars(field, n + 1).iter().map(|x| x.pow(qj)).collect() }
}

/// Equality as maps: every cross-minor f_i g_j − f_j g_i vanishes.
pub fn proj_equal(f: &RationalMap, g: &RationalMap) -> CheckReport {
    let mut r = CheckReport::new("cremona.proj-equal");
    if f.components.len() != g.components.len() || f.nvars() != g.nvars() {
        r.fail(obj([("arity", "mismatch".into())]));
        return r;
    }
    let n = f.components.len();
    for i in 0..n {
        for j in i + 1..n {
            let minor = &(&f.components[i] * &g.components[j]) - &(&f.components[j] * &g.components[i]);
            r.require(minor.is_zero(), || obj([("i", i.into()), ("j", j.into()), ("minor", minor.text().into())]));
        }
    }
    r
}

pub fn verify_proj_equal(f: &RationalMap, g: &RationalMap) -> CheckReport {
    let mut r = proj_equal(f, g).with_tower(f.components[0].field());
    r.params.insert("f".into(), f.to_json());
    r.params.insert("g".into(), g.to_json());
    r
}

fn psi_tower(n: u32, q: u32, budget: &Budget) -> Result<Arc<FieldTower>> {
    if n == 0 {
        return Err(Error::Usage("n must be at least 1".into()));
    }
    budget.check_degree("psi component", q_number(q as u64, n))?;
    tower_for(q, 1, budget)
}

pub fn verify_graph_relations(n: u32, q: u32, budget: &Budget) -> Result<CheckReport> {
    let f = psi_tower(n, q, budget)?;
    let nu = n as usize;
    let psi = psi_map(nu, &f);
    let x = MPoly::vars(&f, nu + 1);
    let mut r = CheckReport::new("cremona.graph").param("n", n).param("q", q).with_tower(&f);
    r.set_data("sign_convention", SIGN_CONVENTION);
    for j in 0..n {
        let qj = (q as u64).pow(j);
        let mut s = MPoly::zero(f.clone(), nu + 1);
        for (xi, pi) in x.iter().zip(psi.components()) {
            s = &s + &(&xi.pow(qj) * pi);
        }
        r.require(s.is_zero(), || obj([("j", j.into()), ("sum", s.text().into())]));
    }
    Ok(r)
}

pub fn verify_psi_squared(n: u32, q: u32, budget: &Budget) -> Result<CheckReport> {
    let f = psi_tower(n, q, budget)?;
    let d = q_number(q as u64, n);
    budget.check_degree("psi composed with psi", d * d)?;
    let nu = n as usize;
    let psi = psi_map(nu, &f);
    let comp = psi.compose(&psi)?;
    let fr = frobenius_map(nu, &f, n - 1);
    let mut r = proj_equal(&comp, &fr);
    r.check_id = "cremona.psi-squared".into();
    r = r.param("n", n).param("q", q).with_tower(&f);
    r.set_data("sign_convention", SIGN_CONVENTION);
    r.set_data("composite_degree", comp.degree());
    r.set_data("frobenius_degree", fr.degree());
    r.set_data(
        "inseparable_degree_note",
        format!("Fr^{} on P^{n} has degree q^(n(n-1)) = {}; not computed for psi", n - 1, (q as u64).pow(n * (n - 1))),
    );
    let quotients: Option<Vec<MPoly>> = comp
        .components()
        .iter()
        .zip(fr.components())
        .map(|(a, b)| a.exact_divide(b).ok())
        .collect();
    match quotients {
        Some(qs) if qs.windows(2).all(|w| w[0] == w[1]) => {
            let h = &qs[0];
            r.set_data("common_factor_degree", h.degree().map_or(Value::Null, Value::from));
            r.set_data("common_factor_terms", h.num_terms());
            r.set_data("common_factor", h.text());
            if n == 2 {
                let locus = measure_zero_locus(h, q, 3, budget)?;
                r.set_data("common_factor_locus_over_F_q3", locus);
            }
        }
        _ => r.set_data("common_factor", Value::Null),
    }
    Ok(r)
}

/// Zeros of h on P^2(F_{q^m}) compared with the F_{q^m}-points of rational lines.
fn measure_zero_locus(h: &MPoly, q: u32, m: u32, budget: &Budget) -> Result<Value> {
    let ext = tower_for(q, m, budget)?;
    let mut zeros = 0u64;
    let mut on_lines = 0u64;
    let mut agree = true;
    for pt in projective_points(&ext, 2, budget)? {
        let z = h.evaluate(&ext, &pt)?.is_zero();
        let l = stratum_of_point(&ext, &pt)? >= 1;
        zeros += u64::from(z);
        on_lines += u64::from(l);
        agree &= z == l;
    }
    Ok(obj([
        ("zeros", zeros.into()),
        ("rational_line_points", on_lines.into()),
        ("equal", agree.into()),
    ]))
}

pub fn verify_phi_bar(n: u32, q: u32, budget: &Budget) -> Result<CheckReport> {
    let f = psi_tower(n, q, budget)?;
    let nu = n as usize;
    let nv = 2 * (nu + 1);
    let v = MPoly::vars(&f, nv);
    let (x, y) = v.split_at(nu + 1);
    let q64 = q as u64;
    let mut r = CheckReport::new("cremona.phi-bar").param("n", n).param("q", q).with_tower(&f);
    for j in 0..n {
        let mut rel = MPoly::zero(f.clone(), nv);
        let mut rhs = MPoly::zero(f.clone(), nv);
        let outer = q64.pow(n - 1 - j);
        for i in 0..=nu {
            rel = &rel + &(&x[i].pow(q64.pow(j)) * &y[i]);
            rhs = &rhs + &(&y[i].pow(outer) * &x[i].pow(q64.pow(n - 1)));
        }
        let lhs = rel.pow(outer);
        r.require(lhs == rhs, || obj([("j", j.into()), ("difference", (&lhs - &rhs).text().into())]));
    }
    Ok(r)
}

pub fn verify_omega_endomorphism(n: u32, q: u32, m: u32, budget: &Budget) -> Result<CheckReport> {
    let f = psi_tower(n, q, budget)?;
    let ext = tower_for(q, m, budget)?;
    let nu = n as usize;
    let psi = psi_map(nu, &f);
    let full = moore_det(&MPoly::vars(&f, nu + 1));
    let mut r = CheckReport::new("cremona.omega")
        .param("n", n)
        .param("q", q)
        .param("m", m)
        .with_tower(&ext);
    let mut omega = 0u64;
    let mut images = BTreeSet::new();
    for pt in projective_points(&ext, nu, budget)? {
        if full.evaluate(&ext, &pt)?.is_zero() {
            continue;
        }
        omega += 1;
        match psi.apply(&ext, &pt) {
            Err(_) => r.fail(obj([("undefined_at", point_json(&ext, &pt))])),
            Ok(img) => {
                let inside = !full.evaluate(&ext, &img)?.is_zero();
                r.require(inside, || obj([("point", point_json(&ext, &pt)), ("image_outside_omega", point_json(&ext, &img))]));
                images.insert(img);
            }
        }
    }
    let oracle = stratify_count(n, q, m, budget)?[0];
    r.set_data("omega", omega);
    r.require(omega == oracle, || obj([("omega", omega.into()), ("stratum_zero", oracle.into())]));
    if omega == 0 {
        r.vacuous(&format!("Omega(F_{}^{m}) is empty", q));
        return Ok(r);
    }
    r.set_data("distinct_images", images.len());
    r.require(images.len() as u64 == omega, || {
        obj([("points", omega.into()), ("distinct_images", images.len().into())])
    });
    Ok(r)
}

/// ψ undefined exactly on stratum ≥ 2.
pub fn verify_indeterminacy(n: u32, q: u32, m: u32, budget: &Budget) -> Result<CheckReport> {
    let f = psi_tower(n, q, budget)?;
    let ext = tower_for(q, m, budget)?;
    let psi = psi_map(n as usize, &f);
    let mut r = CheckReport::new("cremona.indeterminacy")
        .param("n", n)
        .param("q", q)
        .param("m", m)
        .with_tower(&ext);
    let mut undefined = 0u64;
    for pt in projective_points(&ext, n as usize, budget)? {
        let bad = matches!(psi.apply(&ext, &pt), Err(Error::Indeterminacy { .. }));
        let z2 = stratum_of_point(&ext, &pt)? >= 2;
        undefined += u64::from(bad);
        r.require(bad == z2, || obj([("point", point_json(&ext, &pt)), ("undefined", bad.into()), ("in_z2", z2.into())]));
    }
    r.set_data("undefined_points", undefined);
    Ok(r)
}

/// σ(x, y) = (y^q, x) on P¹×P¹, variables ordered x0, x1, y0, y1.
pub fn flop_map(field: &Arc<FieldTower>) -> Vec<MPoly> {
    let v = MPoly::vars(field, 4);
    let q = field.q() as u64;
    vec![v[2].pow(q), v[3].pow(q), v[0].clone(), v[1].clone()]
}

fn bidegree(f: &MPoly) -> Option<(u32, u32)> {
    let mut it = f.terms().keys().map(|m| (m.0[0] + m.0[1], m.0[2] + m.0[3]));
    let first = it.next()?;
    it.all(|b| b == first).then_some(first)
}

pub fn flop_local_model(q: u32, m: u32, budget: &Budget) -> Result<CheckReport> {
    if m == 0 || m > 3 {
        return Err(Error::Usage(format!("flop model is checked for 1 ≤ m ≤ 3, got {m}")));
    }
    let f = tower_for(q, 1, budget)?;
    let ext = tower_for(q, m, budget)?;
    let sigma = flop_map(&f);
    let v = MPoly::vars(&f, 4);
    let mut r = CheckReport::new("cremona.flop").param("q", q).param("m", m).with_tower(&ext);
    for a in 0..=2u32 {
        for b in 0..=2u32 {
            for i in 0..=a {
                for j in 0..=b {
                    let mono = MPoly::monomial(f.clone(), 4, vec![i, a - i, j, b - j], Fe::ONE);
                    let pulled = mono.substitute(&sigma)?;
                    let got = bidegree(&pulled);
                    r.require(got == Some((b, q * a)), || {
                        obj([("bidegree", Value::from(vec![a, b])), ("pullback", pulled.text().into())])
                    });
                }
            }
        }
    }
    let twice: Vec<MPoly> = sigma.iter().map(|c| c.substitute(&sigma)).collect::<Result<_>>()?;
    let q64 = q as u64;
    let expected: Vec<MPoly> = v.iter().map(|x| x.pow(q64)).collect();
    r.require(twice == expected, || {
        Value::Array(twice.iter().map(|c| Value::from(c.text())).collect())
    });
    let line = projective_points(&ext, 1, budget)?;
    let fr = |p: &[Fe]| -> Vec<Fe> { normalize(&ext, &p.iter().map(|&x| ext.frobenius_q(x, 1)).collect::<Vec<_>>()).expect("nonzero") };
    let step = |x: &[Fe], y: &[Fe]| -> (Vec<Fe>, Vec<Fe>) { (fr(y), x.to_vec()) };
    let mut pairs = 0u64;
    for x in &line {
        for y in &line {
            let (x1, y1) = step(x, y);
            let (x2, y2) = step(&x1, &y1);
            pairs += 1;
            r.require(x2 == fr(x) && y2 == fr(y), || {
                obj([("x", point_json(&ext, x)), ("y", point_json(&ext, y))])
            });
        }
    }
    r.set_data("points_checked", pairs);
    Ok(r)
}
