//! Finite field towers F_p ⊂ F_q ⊂ F_{q^m}.
//!
//! An element of F_{q^m} is stored as the integer Σ_j c_j q^j, where each
//! coefficient c_j ∈ F_q is itself Σ_k d_k p^k. The elements of F_q are
//! therefore the integers below q in every tower sharing (p, e), which is what
//! makes "lies in F_q" a structural test and lets polynomials over F_q be
//! evaluated at points of any extension without conversion.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::mpoly::MPoly;
use crate::Budget;

/// A field element. Only meaningful together with its [`FieldTower`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fe(u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    pub fn index(self) -> u32 {
        self.0
    }

    pub fn from_index(i: u32) -> Fe {
        Fe(i)
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

trait Coeffs {
    fn size(&self) -> u32;
    fn add(&self, a: u32, b: u32) -> u32;
    fn sub(&self, a: u32, b: u32) -> u32;
    fn mul(&self, a: u32, b: u32) -> u32;
    /// The element at position `rank` of the coefficient order used for
    /// choosing moduli.
    fn lex(&self, rank: u32) -> u32;
}

struct PrimeCoeffs(u32);

impl Coeffs for PrimeCoeffs {
    fn size(&self) -> u32 {
        self.0
    }
    fn add(&self, a: u32, b: u32) -> u32 {
        (a + b) % self.0
    }
    fn sub(&self, a: u32, b: u32) -> u32 {
        (a + self.0 - b) % self.0
    }
    fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.0 as u64) as u32
    }
    fn lex(&self, rank: u32) -> u32 {
        rank
    }
}

struct TableCoeffs<'a> {
    p: u32,
    e: u32,
    exp: &'a [u32],
    log: &'a [u32],
}

impl Coeffs for TableCoeffs<'_> {
    fn size(&self) -> u32 {
        self.exp.len() as u32 + 1
    }
    fn add(&self, a: u32, b: u32) -> u32 {
        digit_add(self.p, a, b)
    }
    fn sub(&self, a: u32, b: u32) -> u32 {
        digit_add(self.p, a, digit_neg(self.p, b))
    }
    fn mul(&self, a: u32, b: u32) -> u32 {
        table_mul(self.exp, self.log, a, b)
    }
    // Coefficient lists compare lowest degree first, so the lowest digit is
    // the most significant one for ordering purposes.
    fn lex(&self, rank: u32) -> u32 {
        let mut out = 0;
        let mut r = rank;
        for k in (0..self.e).rev() {
            out += (r % self.p) * self.p.pow(k);
            r /= self.p;
        }
        out
    }
}

fn digit_add(p: u32, mut a: u32, mut b: u32) -> u32 {
    if p == 2 {
        return a ^ b;
    }
    let mut out = 0;
    let mut place = 1;
    while a > 0 || b > 0 {
        out += ((a % p + b % p) % p) * place;
        a /= p;
        b /= p;
        place *= p;
    }
    out
}

fn digit_neg(p: u32, mut a: u32) -> u32 {
    if p == 2 {
        return a;
    }
    let mut out = 0;
    let mut place = 1;
    while a > 0 {
        out += ((p - a % p) % p) * place;
        a /= p;
        place *= p;
    }
    out
}

fn table_mul(exp: &[u32], log: &[u32], a: u32, b: u32) -> u32 {
    if a == 0 || b == 0 {
        return 0;
    }
    let n1 = exp.len() as u64;
    exp[((log[a as usize] as u64 + log[b as usize] as u64) % n1) as usize]
}

/// Remainder of `a` modulo the monic polynomial `g`.
fn poly_rem<C: Coeffs>(c: &C, a: &[u32], g: &[u32]) -> Vec<u32> {
    let dg = g.len() - 1;
    let mut r = a.to_vec();
    if r.len() <= dg {
        return r;
    }
    for k in (dg..r.len()).rev() {
        let lead = r[k];
        if lead == 0 {
            continue;
        }
        for i in 0..=dg {
            let t = c.mul(lead, g[i]);
            r[k - dg + i] = c.sub(r[k - dg + i], t);
        }
    }
    r.truncate(dg);
    r
}

fn poly_mulmod<C: Coeffs>(c: &C, a: &[u32], b: &[u32], modulus: &[u32]) -> Vec<u32> {
    let mut prod = vec![0u32; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if y != 0 {
                prod[i + j] = c.add(prod[i + j], c.mul(x, y));
            }
        }
    }
    let mut r = poly_rem(c, &prod, modulus);
    r.resize(modulus.len() - 1, 0);
    r
}

fn to_digits(mut x: u64, base: u64, n: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push((x % base) as u32);
        x /= base;
    }
    out
}

fn from_digits(d: &[u32], base: u64) -> u32 {
    d.iter().rev().fold(0u64, |acc, &x| acc * base + x as u64) as u32
}

/// Trial division by every monic polynomial of degree ≤ deg/2.
fn is_irreducible<C: Coeffs>(c: &C, f: &[u32]) -> bool {
    let d = f.len() - 1;
    let s = c.size() as u64;
    for k in 1..=d / 2 {
        for idx in 0..s.pow(k as u32) {
            let mut g = to_digits(idx, s, k);
            g.push(1);
            if poly_rem(c, f, &g).iter().all(|&x| x == 0) {
                return false;
            }
        }
    }
    true
}

/// Lexicographically first monic irreducible polynomial of degree `d`,
/// coefficients compared from the constant term upwards.
fn first_irreducible<C: Coeffs>(c: &C, d: usize) -> Vec<u32> {
    let s = c.size() as u64;
    let mut rank: u64 = 0;
    loop {
        let mut f: Vec<u32> = to_digits(rank, s, d).into_iter().rev().map(|r| c.lex(r)).collect();
        f.push(1);
        if is_irreducible(c, &f) {
            return f;
        }
        rank += 1;
    }
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn is_prime(p: u64) -> bool {
    p >= 2 && prime_factors(p) == [p]
}

/// Splits a prime power into (p, e).
pub fn factor_prime_power(q: u64) -> Option<(u32, u32)> {
    let f = prime_factors(q);
    if f.len() != 1 {
        return None;
    }
    let p = f[0];
    let mut e = 0;
    let mut r = q;
    while r > 1 {
        r /= p;
        e += 1;
    }
    Some((p as u32, e))
}

/// exp/log tables from a slow multiplication, using the first primitive element.
fn build_tables(size: u64, mul: impl Fn(u32, u32) -> u32) -> (Vec<u32>, Vec<u32>) {
    let n1 = size - 1;
    let primes = prime_factors(n1);
    let pow = |x: u32, mut k: u64| {
        let mut acc = 1u32;
        let mut b = x;
        while k > 0 {
            if k & 1 == 1 {
                acc = mul(acc, b);
            }
            b = mul(b, b);
            k >>= 1;
        }
        acc
    };
    let g = (1..size as u32)
        .find(|&g| primes.iter().all(|&r| pow(g, n1 / r) != 1))
        .expect("finite fields have primitive elements");
    let mut exp = Vec::with_capacity(n1 as usize);
    let mut log = vec![u32::MAX; size as usize];
    let mut x = 1u32;
    for i in 0..n1 as u32 {
        exp.push(x);
        log[x as usize] = i;
        x = mul(x, g);
    }
    (exp, log)
}

/// Arithmetic context for F_p ⊂ F_q = F_{p^e} ⊂ F_{q^m}.
pub struct FieldTower {
    p: u32,
    e: u32,
    m: u32,
    q: u32,
    size: u32,
    base_modulus: Vec<u32>,
    ext_modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl fmt::Debug for FieldTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldTower(p={}, e={}, m={})", self.p, self.e, self.m)
    }
}

impl PartialEq for FieldTower {
    fn eq(&self, other: &Self) -> bool {
        (self.p, self.e, self.m) == (other.p, other.e, other.m)
    }
}

impl Eq for FieldTower {}

impl FieldTower {
    pub fn new(p: u32, e: u32, m: u32) -> Result<Arc<FieldTower>> {
        Self::with_budget(p, e, m, &Budget::default())
    }

    pub fn with_budget(p: u32, e: u32, m: u32, budget: &Budget) -> Result<Arc<FieldTower>> {
        if !is_prime(p as u64) {
            return Err(Error::Usage(format!("{p} is not prime")));
        }
        if e == 0 || m == 0 {
            return Err(Error::Usage(format!("degrees must be positive, got e={e}, m={m}")));
        }
        let size = (p as u64).checked_pow(e * m).filter(|&s| s <= budget.max_field_size);
        let Some(size) = size else {
            return Err(Error::Resource(format!(
                "field of size {p}^{} exceeds the budget of {} elements",
                e * m,
                budget.max_field_size
            )));
        };
        let q = (p as u64).pow(e);

        let prime = PrimeCoeffs(p);
        let base_modulus = first_irreducible(&prime, e as usize);
        let (bexp, blog) = build_tables(q, |a, b| {
            let da = to_digits(a as u64, p as u64, e as usize);
            let db = to_digits(b as u64, p as u64, e as usize);
            from_digits(&poly_mulmod(&prime, &da, &db, &base_modulus), p as u64)
        });
        if m == 1 {
            return Ok(Arc::new(FieldTower {
                p,
                e,
                m,
                q: q as u32,
                size: size as u32,
                base_modulus,
                ext_modulus: vec![0, 1],
                exp: bexp,
                log: blog,
            }));
        }
        let fq = TableCoeffs { p, e, exp: &bexp, log: &blog };
        let ext_modulus = first_irreducible(&fq, m as usize);
        let (exp, log) = build_tables(size, |a, b| {
            let da = to_digits(a as u64, q, m as usize);
            let db = to_digits(b as u64, q, m as usize);
            from_digits(&poly_mulmod(&fq, &da, &db, &ext_modulus), q)
        });
        Ok(Arc::new(FieldTower {
            p,
            e,
            m,
            q: q as u32,
            size: size as u32,
            base_modulus,
            ext_modulus,
            exp,
            log,
        }))
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn e(&self) -> u32 {
        self.e
    }
    pub fn m(&self) -> u32 {
        self.m
    }
    pub fn q(&self) -> u32 {
        self.q
    }
    /// |F_{q^m}|.
    pub fn size(&self) -> u32 {
        self.size
    }
    /// Coefficients over F_p, constant term first, monic of degree e.
    pub fn base_modulus(&self) -> &[u32] {
        &self.base_modulus
    }
    /// Coefficients in F_q (as element indices), constant term first, monic of degree m.
    pub fn ext_modulus(&self) -> &[u32] {
        &self.ext_modulus
    }

    /// The tower (p, e, 1) holding the coefficients of this one.
    pub fn base(&self) -> Arc<FieldTower> {
        FieldTower::new(self.p, self.e, 1).expect("base field is smaller than the tower")
    }

    /// Whether polynomials over `other` can be evaluated at points of `self`.
    pub fn contains(&self, other: &FieldTower) -> bool {
        self.p == other.p && self.e == other.e && (other.m == 1 || other.m == self.m)
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> + Clone {
        (0..self.size).map(Fe)
    }

    /// The elements of F_q inside this tower.
    pub fn base_elements(&self) -> impl Iterator<Item = Fe> + Clone {
        (0..self.q).map(Fe)
    }

    pub fn is_in_base(&self, x: Fe) -> bool {
        x.0 < self.q
    }

    /// Image of an integer under Z → F_p.
    pub fn from_int(&self, k: i64) -> Fe {
        Fe(k.rem_euclid(self.p as i64) as u32)
    }

    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        Fe(digit_add(self.p, a.0, b.0))
    }

    pub fn neg(&self, a: Fe) -> Fe {
        Fe(digit_neg(self.p, a.0))
    }

    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        Fe(table_mul(&self.exp, &self.log, a.0, b.0))
    }

    pub fn inv(&self, a: Fe) -> Option<Fe> {
        if a.0 == 0 {
            return None;
        }
        let n1 = self.exp.len() as u32;
        Some(Fe(self.exp[((n1 - self.log[a.0 as usize]) % n1) as usize]))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Option<Fe> {
        self.inv(b).map(|ib| self.mul(a, ib))
    }

    pub fn pow(&self, a: Fe, k: u64) -> Fe {
        if k == 0 {
            return Fe::ONE;
        }
        if a.0 == 0 {
            return Fe::ZERO;
        }
        let n1 = self.exp.len() as u64;
        let l = self.log[a.0 as usize] as u64;
        Fe(self.exp[((l * (k % n1)) % n1) as usize])
    }

    /// x^{q^i}.
    pub fn frobenius_q(&self, x: Fe, i: u32) -> Fe {
        if x.0 == 0 {
            return x;
        }
        let n1 = self.exp.len() as u64;
        let mut k: u64 = 1 % n1;
        for _ in 0..(i % self.m) {
            k = (k * self.q as u64) % n1;
        }
        let l = self.log[x.0 as usize] as u64;
        Fe(self.exp[((l * k) % n1) as usize])
    }

    /// The unique y with y^q = x.
    pub fn qth_root(&self, x: Fe) -> Fe {
        self.frobenius_q(x, self.m - 1)
    }

    /// Coordinates of x over F_q, constant term first.
    pub fn coefficients(&self, x: Fe) -> Vec<Fe> {
        to_digits(x.0 as u64, self.q as u64, self.m as usize)
            .into_iter()
            .map(Fe)
            .collect()
    }

    pub fn from_coefficients(&self, c: &[Fe]) -> Fe {
        let d: Vec<u32> = c.iter().map(|x| x.0).collect();
        Fe(from_digits(&d, self.q as u64))
    }

    /// The class of the generator of F_{q^m} over F_q (or of F_q over F_p when m = 1).
    pub fn generator(&self) -> Fe {
        if self.m > 1 {
            Fe(self.q)
        } else if self.e > 1 {
            Fe(self.p)
        } else {
            self.exp.get(1).map(|&x| Fe(x)).unwrap_or(Fe::ONE)
        }
    }

    fn encode_base(&self, c: u32) -> Value {
        if self.e == 1 {
            Value::from(c)
        } else {
            Value::from(to_digits(c as u64, self.p as u64, self.e as usize))
        }
    }

    /// Nested little-endian coefficient lists; single-entry levels collapse.
    pub fn encode(&self, x: Fe) -> Value {
        if self.m == 1 {
            return self.encode_base(x.0);
        }
        Value::Array(
            to_digits(x.0 as u64, self.q as u64, self.m as usize)
                .into_iter()
                .map(|c| self.encode_base(c))
                .collect(),
        )
    }

    pub fn text(&self, x: Fe) -> String {
        serde_json::to_string(&self.encode(x)).expect("plain JSON value")
    }

    fn decode_base(&self, v: &Value) -> Result<u32> {
        let digit = |v: &Value| -> Result<u32> {
            v.as_u64()
                .filter(|&d| d < self.p as u64)
                .map(|d| d as u32)
                .ok_or_else(|| Error::Usage(format!("bad F_{} digit {v}", self.p)))
        };
        if self.e == 1 {
            return digit(v);
        }
        let arr = v
            .as_array()
            .filter(|a| a.len() == self.e as usize)
            .ok_or_else(|| Error::Usage(format!("expected {} F_p digits, got {v}", self.e)))?;
        let d = arr.iter().map(digit).collect::<Result<Vec<_>>>()?;
        Ok(from_digits(&d, self.p as u64))
    }

    pub fn decode(&self, v: &Value) -> Result<Fe> {
        if self.m == 1 {
            return self.decode_base(v).map(Fe);
        }
        let arr = v
            .as_array()
            .filter(|a| a.len() == self.m as usize)
            .ok_or_else(|| Error::Usage(format!("expected {} F_q coefficients, got {v}", self.m)))?;
        let c = arr.iter().map(|x| self.decode_base(x)).collect::<Result<Vec<_>>>()?;
        Ok(Fe(from_digits(&c, self.q as u64)))
    }

    /// Tower parameters and moduli, for reports.
    pub fn describe(&self) -> Value {
        let mut map = serde_json::Map::new();
        map.insert("p".into(), self.p.into());
        map.insert("e".into(), self.e.into());
        map.insert("m".into(), self.m.into());
        map.insert("base_modulus".into(), Value::from(self.base_modulus.clone()));
        map.insert(
            "ext_modulus".into(),
            Value::Array(self.ext_modulus.iter().map(|&c| self.encode_base(c)).collect()),
        );
        Value::Object(map)
    }
}

/// N(u_1..u_r) = ∏_{i<r} Fr^i(Σ u_j b_j) for a basis of F_{q^r} over F_q,
/// returned as a polynomial over F_q.
pub fn norm_form(tower: &Arc<FieldTower>, basis: &[Fe]) -> Result<MPoly> {
    let r = tower.m() as usize;
    if basis.len() != r {
        return Err(Error::Usage(format!("need {r} basis elements, got {}", basis.len())));
    }
    let base = tower.base();
    let rows: Vec<Vec<Fe>> = basis.iter().map(|&b| tower.coefficients(b)).collect();
    if crate::linalg::rank(&base, rows) < r {
        return Err(Error::Degenerate("basis is linearly dependent over F_q".into()));
    }
    let mut n = MPoly::one(tower.clone(), r);
    for i in 0..r as u32 {
        let mut lin = MPoly::zero(tower.clone(), r);
        for (j, &b) in basis.iter().enumerate() {
            lin = &lin + &MPoly::var(tower.clone(), r, j).scale(tower.frobenius_q(b, i));
        }
        n = &n * &lin;
    }
    for (mono, &c) in n.terms() {
        if !tower.is_in_base(c) {
            return Err(Error::Degenerate(format!(
                "norm coefficient {} of {:?} is not in F_q",
                tower.text(c),
                mono
            )));
        }
    }
    n.restrict_to(&base)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f4_modulus_and_products() {
        let f4 = FieldTower::new(2, 2, 1).unwrap();
        assert_eq!(f4.base_modulus(), &[1, 1, 1]);
        let t = f4.generator();
        assert_eq!(f4.mul(t, t), f4.add(t, Fe::ONE));
        assert_eq!(f4.text(f4.add(t, Fe::ONE)), "[1,1]");
    }

    #[test]
    fn f8_modulus_is_first_in_low_degree_order() {
        let f8 = FieldTower::new(2, 1, 3).unwrap();
        assert_eq!(f8.ext_modulus(), &[1, 0, 1, 1]);
    }

    #[test]
    fn rejects_composite_and_oversized() {
        assert!(matches!(FieldTower::new(4, 1, 1), Err(Error::Usage(_))));
        assert!(matches!(FieldTower::new(2, 1, 21), Err(Error::Resource(_))));
    }

    #[test]
    fn decode_round_trip() {
        let t = FieldTower::new(2, 2, 2).unwrap();
        for x in t.elements() {
            assert_eq!(t.decode(&t.encode(x)).unwrap(), x);
        }
    }
}
