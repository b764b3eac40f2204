//! Sparse multivariate polynomials over a tower field, and derivations.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use serde_json::Value;

use crate::error::{Error, Result};
use crate::field::{Fe, FieldTower};

/// Exponent vector, ordered by total degree and then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn divides(&self, other: &Mono) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone)]
pub struct MPoly {
    field: Arc<FieldTower>,
    nvars: usize,
    terms: BTreeMap<Mono, Fe>,
}

impl PartialEq for MPoly {
    fn eq(&self, other: &Self) -> bool {
        *self.field == *other.field && self.nvars == other.nvars && self.terms == other.terms
    }
}

impl Eq for MPoly {}

impl fmt::Debug for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MPoly({})", self.text())
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text())
    }
}

/// binom(a, b) mod p by Lucas' theorem.
pub fn binomial_mod_p(mut a: u64, mut b: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    while b > 0 {
        let (ai, bi) = (a % p, b % p);
        if bi > ai {
            return 0;
        }
        let mut num = 1u64;
        let mut den = 1u64;
        for j in 0..bi {
            num = num * ((ai - j) % p) % p;
            den = den * ((j + 1) % p) % p;
        }
        acc = acc * num % p * mod_pow(den, p - 2, p) % p;
        a /= p;
        b /= p;
    }
    acc
}

fn mod_pow(mut b: u64, mut k: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while k > 0 {
        if k & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        k >>= 1;
    }
    acc
}

impl MPoly {
    pub fn zero(field: Arc<FieldTower>, nvars: usize) -> MPoly {
        MPoly { field, nvars, terms: BTreeMap::new() }
    }

    pub fn constant(field: Arc<FieldTower>, nvars: usize, c: Fe) -> MPoly {
        MPoly::monomial(field, nvars, vec![0; nvars], c)
    }

    pub fn one(field: Arc<FieldTower>, nvars: usize) -> MPoly {
        MPoly::constant(field, nvars, Fe::ONE)
    }

    pub fn var(field: Arc<FieldTower>, nvars: usize, i: usize) -> MPoly {
        let mut e = vec![0; nvars];
        e[i] = 1;
        MPoly::monomial(field, nvars, e, Fe::ONE)
    }

    /// All coordinate variables x_0..x_{nvars-1}.
    pub fn vars(field: &Arc<FieldTower>, nvars: usize) -> Vec<MPoly> {
        (0..nvars).map(|i| MPoly::var(field.clone(), nvars, i)).collect()
    }

    pub fn monomial(field: Arc<FieldTower>, nvars: usize, exps: Vec<u32>, c: Fe) -> MPoly {
        assert_eq!(exps.len(), nvars, "exponent vector length");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Mono(exps), c);
        }
        MPoly { field, nvars, terms }
    }

    /// Builds a polynomial from (exponents, coefficient) pairs, summing repeats.
    pub fn from_terms(
        field: Arc<FieldTower>,
        nvars: usize,
        terms: impl IntoIterator<Item = (Vec<u32>, Fe)>,
    ) -> MPoly {
        let mut p = MPoly::zero(field, nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length");
            p.add_term(Mono(e), c);
        }
        p
    }

    pub fn field(&self) -> &Arc<FieldTower> {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Mono, Fe> {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exps: &[u32]) -> Fe {
        self.terms.get(&Mono(exps.to_vec())).copied().unwrap_or(Fe::ZERO)
    }

    /// Total degree; None for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Mono::degree).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(Mono::degree);
        match degs.next() {
            None => true,
            Some(d) => degs.all(|x| x == d),
        }
    }

    /// Largest power of x_i dividing every term (0 for the zero polynomial).
    pub fn valuation(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m.0[i]).min().unwrap_or(0)
    }

    fn add_term(&mut self, mono: Mono, c: Fe) {
        if c.is_zero() {
            return;
        }
        let f = &self.field;
        match self.terms.get_mut(&mono) {
            Some(v) => {
                *v = f.add(*v, c);
                if v.is_zero() {
                    self.terms.remove(&mono);
                }
            }
            None => {
                self.terms.insert(mono, c);
            }
        }
    }

    fn check_compatible(&self, other: &MPoly) {
        assert!(
            *self.field == *other.field && self.nvars == other.nvars,
            "polynomials over different rings: {:?}/{} vs {:?}/{}",
            self.field,
            self.nvars,
            other.field,
            other.nvars
        );
    }

    pub fn scale(&self, c: Fe) -> MPoly {
        if c.is_zero() {
            return MPoly::zero(self.field.clone(), self.nvars);
        }
        let terms = self.terms.iter().map(|(m, &v)| (m.clone(), self.field.mul(v, c))).collect();
        MPoly { field: self.field.clone(), nvars: self.nvars, terms }
    }

    /// Multiplies by the monomial x^exps.
    pub fn shift(&self, exps: &[u32]) -> MPoly {
        let terms = self
            .terms
            .iter()
            .map(|(m, &v)| (Mono(m.0.iter().zip(exps).map(|(a, b)| a + b).collect()), v))
            .collect();
        MPoly { field: self.field.clone(), nvars: self.nvars, terms }
    }

    /// f^{p^i}: coefficients raised to p^i and exponents multiplied by p^i.
    fn frobenius_p(&self, i: u32) -> MPoly {
        let pk = (self.field.p() as u64).pow(i);
        let terms = self
            .terms
            .iter()
            .map(|(m, &c)| (Mono(m.0.iter().map(|&a| a * pk as u32).collect()), self.field.pow(c, pk)))
            .collect();
        MPoly { field: self.field.clone(), nvars: self.nvars, terms }
    }

    pub fn pow(&self, k: u64) -> MPoly {
        let p = self.field.p() as u64;
        let mut acc = MPoly::one(self.field.clone(), self.nvars);
        let mut rest = k;
        let mut i = 0;
        while rest > 0 {
            let d = rest % p;
            if d > 0 {
                let fr = self.frobenius_p(i);
                for _ in 0..d {
                    acc = &acc * &fr;
                }
            }
            rest /= p;
            i += 1;
        }
        acc
    }

    /// Exact quotient f/g; the error carries the remainder when g does not divide f.
    pub fn exact_divide(&self, g: &MPoly) -> Result<MPoly> {
        self.check_compatible(g);
        let (glead, gc) = g.terms.iter().next_back().ok_or_else(|| Error::Degenerate("division by zero polynomial".into()))?;
        let ginv = self.field.inv(*gc).expect("leading coefficient is nonzero");
        let mut rem = self.clone();
        let mut quot = MPoly::zero(self.field.clone(), self.nvars);
        let mut stuck = MPoly::zero(self.field.clone(), self.nvars);
        while let Some((lead, &c)) = rem.terms.iter().next_back() {
            let lead = lead.clone();
            if glead.divides(&lead) {
                let e: Vec<u32> = lead.0.iter().zip(&glead.0).map(|(a, b)| a - b).collect();
                let qc = self.field.mul(c, ginv);
                let step = g.shift(&e).scale(qc);
                rem = &rem - &step;
                quot.add_term(Mono(e), qc);
            } else {
                rem.terms.remove(&lead);
                stuck.add_term(lead, c);
            }
        }
        if stuck.is_zero() {
            Ok(quot)
        } else {
            Err(Error::NotDivisible { remainder: Box::new(stuck) })
        }
    }

    pub fn partial(&self, i: usize) -> MPoly {
        let mut alpha = vec![0; self.nvars];
        alpha[i] = 1;
        self.hasse(&alpha)
    }

    /// Hasse derivative D^(α): x^a ↦ binom(a, α) x^{a-α}.
    pub fn hasse(&self, alpha: &[u32]) -> MPoly {
        assert_eq!(alpha.len(), self.nvars, "multi-index length");
        let p = self.field.p() as u64;
        let mut out = MPoly::zero(self.field.clone(), self.nvars);
        for (m, &c) in &self.terms {
            if m.0.iter().zip(alpha).any(|(a, b)| a < b) {
                continue;
            }
            let b = m
                .0
                .iter()
                .zip(alpha)
                .fold(1u64, |acc, (&a, &k)| acc * binomial_mod_p(a as u64, k as u64, p) % p);
            if b == 0 {
                continue;
            }
            let e = m.0.iter().zip(alpha).map(|(a, b)| a - b).collect();
            out.add_term(Mono(e), self.field.mul(c, self.field.from_int(b as i64)));
        }
        out
    }

    /// Value at a point whose coordinates live in `at`, which must contain the coefficient field.
    pub fn evaluate(&self, at: &FieldTower, point: &[Fe]) -> Result<Fe> {
        if point.len() != self.nvars {
            return Err(Error::Usage(format!(
                "evaluating a {}-variable polynomial at a point with {} coordinates",
                self.nvars,
                point.len()
            )));
        }
        if !at.contains(&self.field) {
            return Err(Error::Usage(format!("{:?} does not contain {:?}", at, self.field)));
        }
        let mut acc = Fe::ZERO;
        for (m, &c) in &self.terms {
            let mut v = c;
            for (&x, &a) in point.iter().zip(&m.0) {
                if a > 0 {
                    v = at.mul(v, at.pow(x, a as u64));
                    if v.is_zero() {
                        break;
                    }
                }
            }
            acc = at.add(acc, v);
        }
        Ok(acc)
    }

    /// f(images_0, ..., images_{n-1}).
    pub fn substitute(&self, images: &[MPoly]) -> Result<MPoly> {
        if images.len() != self.nvars {
            return Err(Error::Usage(format!(
                "substituting {} images into a {}-variable polynomial",
                images.len(),
                self.nvars
            )));
        }
        let Some(first) = images.first() else {
            return Ok(self.clone());
        };
        let (tf, tn) = (first.field.clone(), first.nvars);
        if images.iter().any(|g| *g.field != *tf || g.nvars != tn) || !tf.contains(&self.field) {
            return Err(Error::Usage("substitution images live in incompatible rings".into()));
        }
        let mut cache: BTreeMap<(usize, u32), MPoly> = BTreeMap::new();
        let mut out = MPoly::zero(tf.clone(), tn);
        for (m, &c) in &self.terms {
            let mut t = MPoly::constant(tf.clone(), tn, c);
            for (i, &a) in m.0.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                let pw = cache.entry((i, a)).or_insert_with(|| images[i].pow(a as u64));
                t = &t * pw;
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// The same polynomial over `base`; fails if a coefficient is outside it.
    pub fn restrict_to(&self, base: &Arc<FieldTower>) -> Result<MPoly> {
        if !self.field.contains(base) {
            return Err(Error::Usage(format!("{:?} is not a subfield of {:?}", base, self.field)));
        }
        if let Some((m, &c)) = self.terms.iter().find(|(_, &c)| c.index() >= base.size()) {
            return Err(Error::Degenerate(format!(
                "coefficient {} of {:?} lies outside {:?}",
                self.field.text(c),
                m.0,
                base
            )));
        }
        Ok(MPoly { field: base.clone(), nvars: self.nvars, terms: self.terms.clone() })
    }

    /// The same polynomial viewed over an extension.
    pub fn lift_to(&self, ext: &Arc<FieldTower>) -> MPoly {
        assert!(ext.contains(&self.field), "{:?} does not contain {:?}", ext, self.field);
        MPoly { field: ext.clone(), nvars: self.nvars, terms: self.terms.clone() }
    }

    /// Canonical text form: terms in decreasing term order, "coef*x0^a0*..." joined by "+".
    pub fn text(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::with_capacity(self.terms.len());
        for (m, &c) in self.terms.iter().rev() {
            let mut s = self.field.text(c);
            for (i, &a) in m.0.iter().enumerate() {
                match a {
                    0 => {}
                    1 => s.push_str(&format!("*x{i}")),
                    _ => s.push_str(&format!("*x{i}^{a}")),
                }
            }
            parts.push(s);
        }
        parts.join("+")
    }

    /// JSON array of [exponents, "coef"] in canonical order.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .rev()
                .map(|(m, &c)| Value::Array(vec![Value::from(m.0.clone()), Value::from(self.field.text(c))]))
                .collect(),
        )
    }

    /// Inverse of `to_json`; coefficients may be element encodings or their text.
    pub fn from_json(field: &Arc<FieldTower>, nvars: usize, v: &Value) -> Result<MPoly> {
        let bad = || Error::Usage(format!("expected a list of [exponents, coefficient] terms, got {v}"));
        let mut p = MPoly::zero(field.clone(), nvars);
        for term in v.as_array().ok_or_else(bad)? {
            let pair = term.as_array().filter(|a| a.len() == 2).ok_or_else(bad)?;
            let exps = pair[0]
                .as_array()
                .filter(|a| a.len() == nvars)
                .ok_or_else(bad)?
                .iter()
                .map(|x| x.as_u64().map(|k| k as u32).ok_or_else(bad))
                .collect::<Result<Vec<u32>>>()?;
            let c = match &pair[1] {
                Value::String(s) => {
                    let parsed: Value = serde_json::from_str(s).map_err(|_| bad())?;
                    field.decode(&parsed)?
                }
                other => field.decode(other)?,
            };
            p.add_term(Mono(exps), c);
        }
        Ok(p)
    }
}

impl Add for &MPoly {
    type Output = MPoly;
    fn add(self, rhs: &MPoly) -> MPoly {
        self.check_compatible(rhs);
        let mut out = self.clone();
        for (m, &c) in &rhs.terms {
            out.add_term(m.clone(), c);
        }
        out
    }
}

impl Sub for &MPoly {
    type Output = MPoly;
    fn sub(self, rhs: &MPoly) -> MPoly {
        self.check_compatible(rhs);
        let mut out = self.clone();
        for (m, &c) in &rhs.terms {
            out.add_term(m.clone(), self.field.neg(c));
        }
        out
    }
}

impl Neg for &MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        let terms = self.terms.iter().map(|(m, &c)| (m.clone(), self.field.neg(c))).collect();
        MPoly { field: self.field.clone(), nvars: self.nvars, terms }
    }
}

impl Mul for &MPoly {
    type Output = MPoly;
    fn mul(self, rhs: &MPoly) -> MPoly {
        self.check_compatible(rhs);
        let f = &self.field;
        let mut out = MPoly::zero(f.clone(), self.nvars);
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &rhs.terms {
                let e = ma.0.iter().zip(&mb.0).map(|(a, b)| a + b).collect();
                out.add_term(Mono(e), f.mul(ca, cb));
            }
        }
        out
    }
}

/// Determinant of a square polynomial matrix: cofactor expansion up to size 5,
/// fraction-free elimination above.
pub fn det_poly_matrix(m: &[Vec<MPoly>]) -> MPoly {
    let n = m.len();
    assert!(n > 0 && m.iter().all(|r| r.len() == n), "square nonempty matrix");
    if n <= 5 {
        cofactor_det(m)
    } else {
        bareiss_det(m)
    }
}

pub fn cofactor_det(m: &[Vec<MPoly>]) -> MPoly {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = MPoly::zero(m[0][0].field.clone(), m[0][0].nvars);
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<MPoly>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, x)| x.clone()).collect())
            .collect();
        let t = &m[0][j] * &cofactor_det(&minor);
        acc = if j % 2 == 0 { &acc + &t } else { &acc - &t };
    }
    acc
}

fn bareiss_det(m: &[Vec<MPoly>]) -> MPoly {
    let n = m.len();
    let field = m[0][0].field.clone();
    let nv = m[0][0].nvars;
    let mut a: Vec<Vec<MPoly>> = m.to_vec();
    let mut prev = MPoly::one(field.clone(), nv);
    let mut negate = false;
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    negate = !negate;
                }
                None => return MPoly::zero(field, nv),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&a[i][j] * &a[k][k]) - &(&a[i][k] * &a[k][j]);
                a[i][j] = num.exact_divide(&prev).expect("Bareiss division is exact");
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if negate {
        -&d
    } else {
        d
    }
}

/// A derivation, given by its values on the coordinates.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Derivation {
    coeffs: Vec<MPoly>,
}

impl Derivation {
    pub fn new(coeffs: Vec<MPoly>) -> Derivation {
        let n = coeffs.len();
        assert!(n > 0, "derivation needs coefficients");
        assert!(
            coeffs.iter().all(|c| c.nvars == n && *c.field == *coeffs[0].field),
            "coefficients must share field and arity"
        );
        Derivation { coeffs }
    }

    pub fn coeffs(&self) -> &[MPoly] {
        &self.coeffs
    }

    pub fn nvars(&self) -> usize {
        self.coeffs.len()
    }

    pub fn apply(&self, f: &MPoly) -> MPoly {
        let mut acc = MPoly::zero(f.field.clone(), f.nvars);
        for (i, c) in self.coeffs.iter().enumerate() {
            let d = f.partial(i);
            if !d.is_zero() && !c.is_zero() {
                acc = &acc + &(c * &d);
            }
        }
        acc
    }

    pub fn lie_bracket(&self, other: &Derivation) -> Derivation {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| &self.apply(b) - &other.apply(a))
            .collect();
        Derivation { coeffs }
    }

    /// D^[p]: coefficient i is D applied p times to x_i.
    pub fn p_power(&self, p: u32) -> Derivation {
        let n = self.nvars();
        let field = self.coeffs[0].field.clone();
        let coeffs = (0..n)
            .map(|i| {
                let mut f = MPoly::var(field.clone(), n, i);
                for _ in 0..p {
                    f = self.apply(&f);
                }
                f
            })
            .collect();
        Derivation { coeffs }
    }

    pub fn sub(&self, other: &Derivation) -> Derivation {
        Derivation { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect() }
    }

    pub fn neg(&self) -> Derivation {
        Derivation { coeffs: self.coeffs.iter().map(|a| -a).collect() }
    }
}

/// A polynomial map between affine charts, acting on polynomials by pullback.
#[derive(Clone, Debug)]
pub struct ChartSubstitution {
    images: Vec<MPoly>,
}

impl ChartSubstitution {
    pub fn new(images: Vec<MPoly>) -> Result<ChartSubstitution> {
        if images.is_empty() || images.iter().any(MPoly::is_zero) {
            return Err(Error::Usage("chart images must be nonzero".into()));
        }
        Ok(ChartSubstitution { images })
    }

    /// t_i ↦ s_1 ⋯ s_i (variables indexed from 0).
    pub fn standard(field: &Arc<FieldTower>, n: usize) -> ChartSubstitution {
        let images = (0..n)
            .map(|i| {
                let e = (0..n).map(|j| u32::from(j <= i)).collect();
                MPoly::monomial(field.clone(), n, e, Fe::ONE)
            })
            .collect();
        ChartSubstitution { images }
    }

    pub fn images(&self) -> &[MPoly] {
        &self.images
    }

    pub fn pullback(&self, f: &MPoly) -> Result<MPoly> {
        f.substitute(&self.images)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> Arc<FieldTower> {
        FieldTower::new(2, 1, 1).unwrap()
    }

    #[test]
    fn text_form() {
        let f = f2();
        let x = MPoly::vars(&f, 2);
        let p = &(&x[0] * &x[0]) + &(&x[1] + &MPoly::one(f.clone(), 2));
        assert_eq!(p.text(), "1*x0^2+1*x1+1");
        assert_eq!(MPoly::zero(f, 2).text(), "0");
    }

    #[test]
    fn division_examples() {
        let f = f2();
        let x = MPoly::vars(&f, 2);
        let xy = &x[0] * &x[1];
        let num = &(&xy * &x[0]) + &(&xy * &x[1]);
        assert_eq!(num.exact_divide(&xy).unwrap(), &x[0] + &x[1]);
        let err = x[0].exact_divide(&x[1]).unwrap_err();
        assert!(matches!(err, Error::NotDivisible { .. }));
    }

    #[test]
    fn lucas() {
        assert_eq!(binomial_mod_p(3, 2, 2), 1);
        assert_eq!(binomial_mod_p(4, 2, 2), 0);
        assert_eq!(binomial_mod_p(10, 3, 3), 120 % 3);
        assert_eq!(binomial_mod_p(7, 9, 5), 0);
    }
}
