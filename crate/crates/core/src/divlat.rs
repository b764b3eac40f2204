//! Divisor classes with rational coefficients on the blow-up of P² at its
//! F_q-points, and a coarse ledger for the wonderful blow-up of P³.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde_json::{Map, Value};

use crate::counting::IncidenceGeometry;
use crate::error::{Error, Result};
use crate::moore::tower_for;
use crate::report::{obj, CheckReport};
use crate::{q_number, Budget};

pub type Q = Ratio<i64>;

fn qi(x: i64) -> Q {
    Q::from_integer(x)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LatticeKind {
    /// Basis H, E_0..E_{N-1} with N = q²+q+1.
    Surface { q: u32 },
    /// Coarse basis H, D², D³; only B·H² products are defined.
    Threefold { q: u32 },
}

#[derive(Debug, PartialEq, Eq)]
pub struct Lattice {
    kind: LatticeKind,
    basis: Vec<String>,
    /// Surface only: the rational points on each rational line.
    lines: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivClass {
    lattice: Arc<Lattice>,
    coeffs: Vec<Q>,
}

pub fn surface_lattice(q: u32) -> Result<Arc<Lattice>> {
    let f = tower_for(q, 1, &Budget::default())?;
    let geo = IncidenceGeometry::new(&f, 2)?;
    let n = geo.points.len();
    let mut basis = vec![String::from("H")];
    basis.extend((0..n).map(|i| format!("E{i}")));
    Ok(Arc::new(Lattice { kind: LatticeKind::Surface { q }, basis, lines: geo.incidence }))
}

pub fn threefold_lattice(q: u32) -> Arc<Lattice> {
    Arc::new(Lattice {
        kind: LatticeKind::Threefold { q },
        basis: vec!["H".into(), "D2".into(), "D3".into()],
        lines: Vec::new(),
    })
}

impl Lattice {
    pub fn kind(&self) -> &LatticeKind {
        &self.kind
    }

    pub fn basis(&self) -> &[String] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Number of rational lines (surface) or 0.
    pub fn num_lines(&self) -> usize {
        self.lines.len()
    }

    pub fn lines(&self) -> &[Vec<usize>] {
        &self.lines
    }
}

/// Convenience constructors bound to a lattice.
pub trait LatticeExt {
    fn zero(&self) -> DivClass;
    fn basis_class(&self, i: usize) -> DivClass;
    fn h(&self) -> DivClass;
    /// Sum of all exceptional classes E_i (surface).
    fn e_total(&self) -> DivClass;
    fn line_class(&self, l: usize) -> DivClass;
    /// Σ L̃_i (surface).
    fn b_tilde(&self) -> DivClass;
    fn class(&self, coeffs: Vec<Q>) -> Result<DivClass>;
}

impl LatticeExt for Arc<Lattice> {
    fn zero(&self) -> DivClass {
        DivClass { lattice: self.clone(), coeffs: vec![Q::zero(); self.rank()] }
    }

    fn basis_class(&self, i: usize) -> DivClass {
        let mut c = self.zero();
        c.coeffs[i] = Q::one();
        c
    }

    fn h(&self) -> DivClass {
        self.basis_class(0)
    }

    fn e_total(&self) -> DivClass {
        let mut c = self.zero();
        for x in c.coeffs.iter_mut().skip(1) {
            *x = Q::one();
        }
        c
    }

    /// L̃ = H − Σ_{P ∈ L} E_P.
    fn line_class(&self, l: usize) -> DivClass {
        let mut c = self.h();
        for &p in &self.lines[l] {
            c.coeffs[1 + p] -= Q::one();
        }
        c
    }

    fn b_tilde(&self) -> DivClass {
        (0..self.num_lines()).fold(self.zero(), |acc, l| acc.add(&self.line_class(l)))
    }

    fn class(&self, coeffs: Vec<Q>) -> Result<DivClass> {
        if coeffs.len() != self.rank() {
            return Err(Error::Usage(format!("class needs {} coefficients, got {}", self.rank(), coeffs.len())));
        }
        Ok(DivClass { lattice: self.clone(), coeffs })
    }
}

impl DivClass {
    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    fn same(&self, other: &DivClass) {
        assert!(self.lattice == other.lattice, "classes on different lattices");
    }

    pub fn add(&self, other: &DivClass) -> DivClass {
        self.same(other);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        DivClass { lattice: self.lattice.clone(), coeffs }
    }

    pub fn sub(&self, other: &DivClass) -> DivClass {
        self.add(&other.scale(qi(-1)))
    }

    pub fn scale(&self, k: Q) -> DivClass {
        DivClass { lattice: self.lattice.clone(), coeffs: self.coeffs.iter().map(|a| a * k).collect() }
    }

    pub fn scale_int(&self, k: i64) -> DivClass {
        self.scale(qi(k))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Whether only the H coefficient is nonzero.
    fn is_h_multiple(&self) -> bool {
        self.coeffs.iter().skip(1).all(Zero::is_zero)
    }

    /// Surface intersection pairing.
    pub fn intersect(&self, other: &DivClass) -> Result<Q> {
        if self.lattice != other.lattice {
            return Err(Error::Usage("intersecting classes on different lattices".into()));
        }
        match self.lattice.kind {
            LatticeKind::Surface { .. } => {
                let mut acc = self.coeffs[0] * other.coeffs[0];
                for (a, b) in self.coeffs.iter().zip(&other.coeffs).skip(1) {
                    acc -= a * b;
                }
                Ok(acc)
            }
            LatticeKind::Threefold { .. } => Err(Error::NoRule("two-fold products on the threefold".into())),
        }
    }

    /// self · H² on the threefold.
    pub fn dot_h2(&self) -> Result<Q> {
        match self.lattice.kind {
            LatticeKind::Threefold { .. } => Ok(self.coeffs[0]),
            LatticeKind::Surface { .. } => Err(Error::NoRule("B·H² on a surface".into())),
        }
    }

    /// Name → coefficient for the nonzero coefficients.
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (name, c) in self.lattice.basis.iter().zip(&self.coeffs) {
            if !c.is_zero() {
                m.insert(name.clone(), Value::from(c.to_string()));
            }
        }
        Value::Object(m)
    }
}

/// a·b·c on the threefold; defined only when two factors are multiples of H.
pub fn triple(a: &DivClass, b: &DivClass, c: &DivClass) -> Result<Q> {
    if !matches!(a.lattice.kind, LatticeKind::Threefold { .. }) || a.lattice != b.lattice || b.lattice != c.lattice {
        return Err(Error::Usage("triple products need three threefold classes".into()));
    }
    let hs = [a, b, c].iter().filter(|x| x.is_h_multiple()).count();
    if hs < 2 {
        return Err(Error::NoRule(format!("{} · {} · {}", a.to_json(), b.to_json(), c.to_json())));
    }
    let (rest, h1, h2) = if !b.is_h_multiple() {
        (b, a, c)
    } else if !c.is_h_multiple() {
        (c, a, b)
    } else {
        (a, b, c)
    };
    Ok(rest.coeffs[0] * h1.coeffs[0] * h2.coeffs[0])
}

fn qs(x: Q) -> Value {
    Value::from(x.to_string())
}

pub fn verify_surface_ledger(q: u32) -> Result<CheckReport> {
    let lat = surface_lattice(q)?;
    let qq = q as i64;
    let n = qq * qq + qq + 1;
    let h = lat.h();
    let e = lat.e_total();
    let bt = lat.b_tilde();
    let mut r = CheckReport::new("lattice.surface").param("q", q);

    for l in 0..lat.num_lines() {
        let lt = lat.line_class(l);
        let self_int = lt.intersect(&lt)?;
        r.require(self_int == qi(-qq), || obj([("line", l.into()), ("self_intersection", qs(self_int))]));
        r.require(h.intersect(&lt)? == qi(1), || obj([("line", l.into()), ("H.L", "not 1".into())]));
        for l2 in l + 1..lat.num_lines() {
            let meet = lat.lines[l].iter().filter(|p| lat.lines[l2].contains(p)).count() as i64;
            let v = lt.intersect(&lat.line_class(l2))?;
            r.require(v == qi(1 - meet) && v.is_zero(), || {
                obj([("lines", Value::from(vec![l, l2])), ("product", qs(v)), ("common_points", meet.into())])
            });
        }
    }

    // (a)
    let lhs = h.scale_int(n);
    let rhs = bt.add(&e.scale_int(qq + 1));
    r.require(lhs == rhs, || obj([("item", "a".into()), ("difference", lhs.sub(&rhs).to_json())]));

    // (b)
    let k = h.scale_int(-3).add(&e);
    let d = bt.add(&e);
    let seqs = [
        ("omega", h.scale_int(-(qq + 2)).add(&e.scale_int(2)), h.scale_int(qq - 1).sub(&e), k.clone()),
        (
            "omega_log_b",
            h.scale_int(qq * qq - 1).sub(&e.scale_int(qq - 1)),
            h.scale_int(qq - 1).sub(&e),
            k.add(&bt),
        ),
        (
            "omega_log_d",
            h.scale_int(qq * qq - 1).sub(&e.scale_int(qq - 1)),
            h.scale_int(qq - 1),
            k.add(&d),
        ),
    ];
    for (name, sub, quot, total) in &seqs {
        let s = sub.add(quot);
        r.require(s == *total, || obj([("item", "b".into()), ("sequence", (*name).into()), ("difference", s.sub(total).to_json())]));
    }

    // (c)
    let h2 = h.scale_int(qq + 1).sub(&e);
    let h3 = h.clone();
    let kd = k.add(&d);
    let target = h.scale_int(qq + 2).sub(&e).scale_int(qq - 1);
    r.require(kd == target, || obj([("item", "c".into()), ("difference", kd.sub(&target).to_json())]));
    let via_hc = h2.add(&h3).scale_int(qq - 1);
    r.require(kd == via_hc, || obj([("item", "c".into()), ("H_c", kd.sub(&via_hc).to_json())]));
    let h1 = h.scale_int(n).sub(&bt).sub(&e.scale_int(qq + 1));
    r.require(h1.is_zero(), || obj([("item", "c".into()), ("H1", h1.to_json())]));

    // (d)
    let m = h.scale_int(qq * qq - 1).sub(&e.scale_int(qq - 1));
    let m2 = m.intersect(&m)?;
    let mh = m.intersect(&h)?;
    r.require(m2 > Q::zero() && mh > Q::zero(), || obj([("item", "d".into()), ("M2", qs(m2)), ("MH", qs(mh))]));
    let l0 = lat.line_class(0);
    let ml = m.intersect(&l0)?;
    let quot = h.scale_int(qq - 1).sub(&e);
    let ql = quot.intersect(&l0)?;
    r.require(ml.is_zero() && ql == qi(-2), || obj([("item", "d".into()), ("M.L", qs(ml)), ("quotient.L", qs(ql))]));

    // (e)
    let mut h2_l = Vec::new();
    for i in 0..n as usize {
        let v = h2.intersect(&lat.basis_class(1 + i))?;
        r.require(v >= Q::zero(), || obj([("item", "e".into()), ("E", i.into()), ("product", qs(v))]));
    }
    for l in 0..lat.num_lines() {
        let v = h2.intersect(&lat.line_class(l))?;
        h2_l.push(v);
        r.require(v.is_zero(), || obj([("item", "e".into()), ("line", l.into()), ("product", qs(v))]));
    }

    let mut classes = Map::new();
    classes.insert("K".into(), k.to_json());
    classes.insert("M".into(), m.to_json());
    classes.insert("H2".into(), h2.to_json());
    classes.insert("KplusD".into(), kd.to_json());
    r.set_data("classes", Value::Object(classes));
    r.set_data("M2", qs(m2));
    r.set_data("MH", qs(mh));
    r.set_data("K2", qs(k.intersect(&k)?));
    r.set_data("line_self_intersection", qs(l0.intersect(&l0)?));
    r.set_data("scope", "nonnegative against E_i and strict transforms of rational lines only");
    Ok(r)
}

/// Solves A x = b over Q; free variables are set to 0.
fn solve_rational(mut a: Vec<Vec<Q>>, mut b: Vec<Q>) -> Option<Vec<Q>> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(found) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, found);
        b.swap(r, found);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= inv;
        }
        b[r] *= inv;
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c];
                let pr = a[r].clone();
                for (x, y) in a[i].iter_mut().zip(&pr) {
                    *x -= f * y;
                }
                let br = b[r];
                b[i] -= f * br;
            }
        }
        pivots.push(c);
        r += 1;
    }
    if b[r..].iter().any(|x| !x.is_zero()) {
        return None;
    }
    let mut x = vec![Q::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = b[i];
    }
    Some(x)
}

/// P(E_Y) = E + Σ c_i L̃_i with P(E_Y)·L̃_j = 0.
pub fn pullback_of_ey(lat: &Arc<Lattice>) -> Result<DivClass> {
    let e = lat.e_total();
    let nl = lat.num_lines();
    let lines: Vec<DivClass> = (0..nl).map(|l| lat.line_class(l)).collect();
    let mut a = vec![vec![Q::zero(); nl]; nl];
    let mut b = vec![Q::zero(); nl];
    for j in 0..nl {
        for i in 0..nl {
            a[j][i] = lines[i].intersect(&lines[j])?;
        }
        b[j] = -e.intersect(&lines[j])?;
    }
    let c = solve_rational(a, b).ok_or(Error::NotPushforward)?;
    Ok(lines.iter().zip(&c).fold(e, |acc, (l, &ci)| acc.add(&l.scale(ci))))
}

/// λ with class ≡ λ·P(E_Y) modulo the span of the L̃_i.
pub fn contract_pushforward(class: &DivClass) -> Result<Q> {
    let lat = class.lattice();
    if !matches!(lat.kind, LatticeKind::Surface { .. }) {
        return Err(Error::Usage("pushforward is defined on the surface lattice".into()));
    }
    let p = pullback_of_ey(lat)?;
    let nl = lat.num_lines();
    let gens: Vec<DivClass> = core::iter::once(p).chain((0..nl).map(|l| lat.line_class(l))).collect();
    let rank = lat.rank();
    let a: Vec<Vec<Q>> = (0..rank).map(|row| gens.iter().map(|g| g.coeffs[row]).collect()).collect();
    let x = solve_rational(a, class.coeffs.clone()).ok_or(Error::NotPushforward)?;
    Ok(x[0])
}

pub fn verify_pushforward(q: u32) -> Result<CheckReport> {
    let lat = surface_lattice(q)?;
    let qq = q as i64;
    let n = qq * qq + qq + 1;
    let h = lat.h();
    let e = lat.e_total();
    let mut r = CheckReport::new("lattice.pushforward").param("q", q);
    let p = pullback_of_ey(&lat)?;
    for l in 0..lat.num_lines() {
        let v = p.intersect(&lat.line_class(l))?;
        r.require(v.is_zero(), || obj([("line", l.into()), ("P.L", qs(v))]));
    }
    r.set_data("pullback_E_Y", p.to_json());
    let cases = [
        ("M", h.scale_int(qq * qq - 1).sub(&e.scale_int(qq - 1)), Q::new(qq * qq - qq, n)),
        ("quotient", h.scale_int(qq - 1).sub(&e), Q::new(-(qq + 2), n)),
        ("line", lat.line_class(0), Q::zero()),
    ];
    let mut got = Map::new();
    for (name, class, expected) in cases {
        let lam = contract_pushforward(&class)?;
        got.insert(name.into(), qs(lam));
        r.require(lam == expected, || obj([("class", name.into()), ("lambda", qs(lam)), ("expected", qs(expected))]));
    }
    r.set_data("lambda", Value::Object(got));
    Ok(r)
}

/// H_c = ((q^{n+2−c}−1)/(q−1)) H − Σ_{i=0}^{n−c} ((q^{i+1}−1)/(q−1)) D^{i+c}, with
/// `d(k)` giving the class of D^k.
fn h_c(q: u64, n: u32, c: u32, h: &DivClass, d: &dyn Fn(u32) -> DivClass) -> DivClass {
    let mut acc = h.scale_int(q_number(q, n + 2 - c) as i64);
    if c <= n {
        for i in 0..=(n - c) {
            acc = acc.sub(&d(i + c).scale_int(q_number(q, i + 1) as i64));
        }
    }
    acc
}

pub fn threefold_ledger(q: u32, p: u32) -> Result<CheckReport> {
    let (pp, _) = crate::field::factor_prime_power(q as u64).ok_or_else(|| Error::Usage(format!("{q} is not a prime power")))?;
    if pp != p {
        return Err(Error::Usage(format!("q={q} is not a power of p={p}")));
    }
    let lat = threefold_lattice(q);
    let q64 = q as u64;
    let qq = q as i64;
    let h = lat.h();
    let d2 = lat.basis_class(1);
    let d3 = lat.basis_class(2);
    // D¹ from the relation H_1 ∼ 0.
    let d1 = h
        .scale_int(q_number(q64, 4) as i64)
        .sub(&d2.scale_int(q_number(q64, 2) as i64))
        .sub(&d3.scale_int(q_number(q64, 3) as i64));
    let d = |k: u32| match k {
        1 => d1.clone(),
        2 => d2.clone(),
        3 => d3.clone(),
        _ => lat.zero(),
    };
    let mut r = CheckReport::new("lattice.threefold").param("q", q).param("p", p);
    r.set_data("scope", "coarse ledger: only B·H² products are defined");

    // (a) K = −(n+1)H + Σ i D^{i+1}
    let k = h.scale_int(-4).add(&d2).add(&d3.scale_int(2));
    let kv: Vec<Q> = k.coeffs().to_vec();
    r.require(kv == [qi(-4), qi(1), qi(2)], || obj([("item", "a".into()), ("K", k.to_json())]));

    // (b)
    let normal = h
        .scale_int(q_number(q64, 3) as i64 + 1)
        .sub(&d2.scale_int(q_number(q64, 1) as i64 + 1))
        .sub(&d3.scale_int(q_number(q64, 2) as i64 + 1));
    let c1_route = k.scale_int(-1).sub(&normal);
    let c1 = h.scale_int(-(qq - 1) * (qq + 2)).add(&d3.scale_int(qq)).add(&d2);
    r.require(c1_route == c1, || obj([("item", "b".into()), ("route", c1_route.to_json()), ("closed", c1.to_json())]));
    let piece1 = h.scale_int(-(qq - 1)).add(&d3);
    let piece2 = h.scale_int(-(qq * qq - 1)).add(&d3.scale_int(qq - 1)).add(&d2);
    let pieces = piece1.add(&piece2);
    r.require(pieces == c1, || obj([("item", "b".into()), ("pieces", pieces.to_json())]));
    for (name, piece) in [("sub", &piece1), ("quotient", &piece2)] {
        let s = piece.dot_h2()?;
        r.require(s < Q::zero(), || obj([("item", "b".into()), ("piece", name.into()), ("slope", qs(s))]));
    }

    // (c)
    let kt = k.sub(&c1.scale_int(p as i64 - 1));
    r.set_data("K_minus_p_minus_1_c1", kt.to_json());
    if p == 2 && q == 2 {
        r.require(kt.is_zero(), || obj([("item", "c".into()), ("K-(p-1)c1", kt.to_json())]));
    }

    // (d)
    let l_formula = {
        let mut acc = h.scale_int(((q64.pow(3) + q64 - 2) / (q64 - 1)) as i64);
        for i in 1..=2u32 {
            acc = acc.sub(&d(i + 1).scale_int(((q64.pow(i) + q64 - 2) / (q64 - 1)) as i64));
        }
        acc
    };
    let l_literal = h.scale_int(qq * qq + qq + 2).sub(&d3.scale_int(qq + 2)).sub(&d2.scale_int(2));
    r.require(l_formula == l_literal, || obj([("item", "d".into()), ("formula", l_formula.to_json())]));
    let slope = triple(&l_literal, &h, &h)?;
    r.require(slope == qi(qq * qq + qq + 2) && slope > Q::zero(), || obj([("item", "d".into()), ("slope", qs(slope))]));
    r.set_data("slope", qs(slope));
    let twisted = l_literal.sub(&d1).dot_h2()?;
    r.require(twisted < Q::zero(), || obj([("item", "d".into()), ("L(-D1).H2", qs(twisted))]));
    r.set_data("L_minus_D1_slope", qs(twisted));

    // Restriction to the strict transform of a rational plane lands in the surface ledger.
    let surf = surface_lattice(q)?;
    let restrict = |c: &DivClass| {
        surf.h()
            .scale(c.coeffs[0])
            .add(&surf.b_tilde().scale(c.coeffs[1]))
            .add(&surf.e_total().scale(c.coeffs[2]))
    };
    let lr = restrict(&l_literal);
    let expect = surf.h().scale_int(qq + 1).sub(&surf.e_total()).scale_int(-qq);
    r.require(lr == expect, || obj([("item", "d".into()), ("restriction", lr.to_json())]));

    // (e)
    let total_d = d1.add(&d2).add(&d3);
    let kd = k.add(&total_d);
    let sum = (1..=3).fold(lat.zero(), |acc, c| acc.add(&h_c(q64, 3, c + 1, &h, &d)));
    let rhs = sum.scale_int(qq - 1);
    r.require(kd == rhs, || obj([("item", "e".into()), ("K+D", kd.to_json()), ("sum", rhs.to_json())]));
    r.require(h_c(q64, 3, 1, &h, &d).is_zero(), || obj([("item", "e".into()), ("H1", "nonzero".into())]));

    let mut classes = Map::new();
    classes.insert("K".into(), k.to_json());
    classes.insert("c1detF2".into(), c1.to_json());
    classes.insert("L".into(), l_literal.to_json());
    classes.insert("D1".into(), d1.to_json());
    r.set_data("classes", Value::Object(classes));
    r.set_data("basis", Value::from(lat.basis().to_vec()));
    Ok(r)
}

/// a(S) = (m+1)/d − 1 and whether a > −1.
pub fn cone_discrepancy(m: i64, d: i64) -> Result<(Q, bool)> {
    if m < 1 || d < 1 {
        return Err(Error::Usage(format!("need m, d ≥ 1, got m={m}, d={d}")));
    }
    let a = Q::new(m + 1, d) - Q::one();
    Ok((a, a > qi(-1)))
}

pub fn verify_discrepancy(m: i64, d: i64) -> Result<CheckReport> {
    let (a, klt) = cone_discrepancy(m, d)?;
    let mut r = CheckReport::new("lattice.discrepancy").param("m", m).param("d", d);
    r.set_data("discrepancy", qs(a));
    r.set_data("klt", klt);
    r.require(klt, || obj([("discrepancy", qs(a))]));
    Ok(r)
}
