//! Exact arithmetic in F_q, q = p^r, as polynomial residues mod a fixed
//! irreducible.
//!
//! The modulus for a given (p, r) is deterministic: the lexicographically
//! least monic irreducible of degree r over F_p, comparing coefficient
//! tuples from the highest non-leading degree down. For (3, 2) this is
//! g^2 + 1, for (5, 2) it is g^2 + 2.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Shared description of F_{p^r}: the prime, the degree, and the modulus.
///
/// Elements hold an `Arc` to their params; mixing elements of different
/// fields panics, mirroring the contract violation it is.
#[derive(Debug, PartialEq, Eq)]
pub struct FieldParams {
    p: u64,
    r: usize,
    /// Monic modulus, ascending coefficients, length r + 1, last entry 1.
    modulus: Vec<u64>,
}

impl FieldParams {
    /// The field F_{p^r} with the canonical modulus.
    ///
    /// Requires p an odd prime and r >= 2.
    pub fn new(p: u64, r: usize) -> Result<Arc<Self>> {
        if p < 3 || !is_prime(p) {
            return Err(Error::InvalidParams(format!("p = {p} must be an odd prime")));
        }
        if r < 2 {
            return Err(Error::InvalidParams(format!(
                "extension degree r = {r} must be at least 2"
            )));
        }
        let modulus = least_irreducible(p, r);
        Ok(Arc::new(FieldParams { p, r, modulus }))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn q(&self) -> u64 {
        self.p.pow(self.r as u32)
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// The modulus rendered in the element grammar, e.g. "g^2+1".
    pub fn modulus_string(&self) -> String {
        poly_string(&self.modulus)
    }
}

/// An element of F_{p^r}: coordinates in the basis 1, g, ..., g^{r-1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldElem {
    field: Arc<FieldParams>,
    coeffs: Vec<u64>,
}

/// Constructors live on the params so call sites read `field.elem(..)`.
pub trait FieldCtor {
    fn zero(&self) -> FieldElem;
    fn one(&self) -> FieldElem;
    /// Scalar embedding of an integer residue.
    fn scalar(&self, c: u64) -> FieldElem;
    /// The generator g.
    fn gen(&self) -> FieldElem;
    /// From coordinates (missing trailing coordinates are zero).
    fn elem(&self, coeffs: &[u64]) -> FieldElem;
}

impl FieldCtor for Arc<FieldParams> {
    fn zero(&self) -> FieldElem {
        self.elem(&[])
    }

    fn one(&self) -> FieldElem {
        self.elem(&[1])
    }

    fn scalar(&self, c: u64) -> FieldElem {
        self.elem(&[c])
    }

    fn gen(&self) -> FieldElem {
        self.elem(&[0, 1])
    }

    fn elem(&self, coeffs: &[u64]) -> FieldElem {
        assert!(coeffs.len() <= self.r, "too many coordinates");
        let mut c = vec![0u64; self.r];
        for (i, &x) in coeffs.iter().enumerate() {
            c[i] = x % self.p;
        }
        FieldElem {
            field: Arc::clone(self),
            coeffs: c,
        }
    }
}

impl FieldElem {
    pub fn field(&self) -> &Arc<FieldParams> {
        &self.field
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0] == 1 && self.coeffs[1..].iter().all(|&c| c == 0)
    }

    fn assert_same_field(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.field, &other.field) || self.field == other.field,
            "elements of different fields"
        );
    }

    /// Multiplicative inverse via extended Euclid on the residue polynomial.
    pub fn inv(&self) -> Result<FieldElem> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let p = self.field.p;
        let inv = poly_mod_inverse(&self.coeffs, &self.field.modulus, p)
            .expect("nonzero residue invertible mod irreducible");
        Ok(self.field.elem(&inv))
    }

    /// Square-and-multiply power; k >= 0.
    pub fn pow(&self, mut k: u64) -> FieldElem {
        let mut base = self.clone();
        let mut acc = self.field.one();
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        acc
    }

    /// Render in the coefficient grammar: descending powers of g, digits
    /// 0..p-1, e.g. "2*g^2+g+1". Zero renders as "0".
    pub fn to_grammar_string(&self) -> String {
        poly_string(&self.coeffs)
    }

    /// True when the grammar rendering has more than one monomial and so
    /// needs parentheses inside a series term.
    pub fn is_compound(&self) -> bool {
        self.coeffs.iter().filter(|&&c| c != 0).count() > 1
    }

    /// Parse the coefficient grammar (no surrounding parentheses).
    pub fn parse(field: &Arc<FieldParams>, s: &str) -> Result<FieldElem> {
        let mut coeffs = vec![0u64; field.r];
        for mono in s.split('+') {
            let mono = mono.trim();
            if mono.is_empty() {
                return Err(Error::Parse(format!("empty monomial in '{s}'")));
            }
            let (c, k) = parse_monomial(mono, field.p)?;
            if k >= field.r {
                return Err(Error::Parse(format!("degree {k} too large in '{s}'")));
            }
            coeffs[k] = (coeffs[k] + c) % field.p;
        }
        Ok(field.elem(&coeffs))
    }
}

/// One monomial: `digit`, `g`, `g^k`, `digit*g`, or `digit*g^k`.
fn parse_monomial(mono: &str, p: u64) -> Result<(u64, usize)> {
    let bad = || Error::Parse(format!("bad monomial '{mono}'"));
    match mono.find('g') {
        None => {
            let c: u64 = mono.parse().map_err(|_| bad())?;
            if c >= p {
                return Err(Error::Parse(format!("digit {c} out of range for p = {p}")));
            }
            Ok((c, 0))
        }
        Some(gi) => {
            let (head, tail) = mono.split_at(gi);
            let c = if head.is_empty() {
                1
            } else {
                let head = head.strip_suffix('*').ok_or_else(bad)?;
                let c: u64 = head.parse().map_err(|_| bad())?;
                if c >= p {
                    return Err(Error::Parse(format!("digit {c} out of range for p = {p}")));
                }
                c
            };
            let k = match &tail[1..] {
                "" => 1,
                exp => {
                    let exp = exp.strip_prefix('^').ok_or_else(bad)?;
                    exp.parse().map_err(|_| bad())?
                }
            };
            Ok((c, k))
        }
    }
}

/// Print an F_p-polynomial in g, descending degree.
fn poly_string(coeffs: &[u64]) -> String {
    let mut parts = Vec::new();
    for (k, &c) in coeffs.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let part = match (k, c) {
            (0, c) => format!("{c}"),
            (1, 1) => "g".to_string(),
            (1, c) => format!("{c}*g"),
            (k, 1) => format!("g^{k}"),
            (k, c) => format!("{c}*g^{k}"),
        };
        parts.push(part);
    }
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join("+")
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_grammar_string())
    }
}

macro_rules! elem_binop {
    ($trait:ident, $method:ident, $imp:expr) => {
        impl $trait for &FieldElem {
            type Output = FieldElem;
            fn $method(self, rhs: &FieldElem) -> FieldElem {
                self.assert_same_field(rhs);
                #[allow(clippy::redundant_closure_call)]
                ($imp)(self, rhs)
            }
        }
        impl $trait for FieldElem {
            type Output = FieldElem;
            fn $method(self, rhs: FieldElem) -> FieldElem {
                $trait::$method(&self, &rhs)
            }
        }
    };
}

elem_binop!(Add, add, |a: &FieldElem, b: &FieldElem| {
    let p = a.field.p;
    let coeffs: Vec<u64> = a
        .coeffs
        .iter()
        .zip(&b.coeffs)
        .map(|(&x, &y)| (x + y) % p)
        .collect();
    FieldElem {
        field: Arc::clone(&a.field),
        coeffs,
    }
});

elem_binop!(Sub, sub, |a: &FieldElem, b: &FieldElem| {
    let p = a.field.p;
    let coeffs: Vec<u64> = a
        .coeffs
        .iter()
        .zip(&b.coeffs)
        .map(|(&x, &y)| (x + p - y) % p)
        .collect();
    FieldElem {
        field: Arc::clone(&a.field),
        coeffs,
    }
});

elem_binop!(Mul, mul, |a: &FieldElem, b: &FieldElem| {
    let p = a.field.p;
    let prod = poly_mul(&a.coeffs, &b.coeffs, p);
    let red = poly_rem(&prod, &a.field.modulus, p);
    a.field.elem(&red)
});

impl Div for &FieldElem {
    type Output = FieldElem;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &FieldElem) -> FieldElem {
        self * &rhs.inv().expect("division by zero")
    }
}

impl Neg for &FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        let p = self.field.p;
        let coeffs: Vec<u64> = self.coeffs.iter().map(|&x| (p - x) % p).collect();
        FieldElem {
            field: Arc::clone(&self.field),
            coeffs,
        }
    }
}

impl Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        -&self
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

// ---- polynomial arithmetic over F_p (ascending coefficient vectors) ----

fn poly_trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    poly_trim(&mut out);
    out
}

/// Remainder of a by the monic polynomial m.
fn poly_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    poly_trim(&mut a);
    let dm = m.len() - 1;
    while a.len() > dm {
        let lead = a[a.len() - 1];
        let shift = a.len() - 1 - dm;
        for (j, &mc) in m.iter().enumerate() {
            let idx = shift + j;
            a[idx] = (a[idx] + p * lead - (lead * mc) % p) % p;
        }
        poly_trim(&mut a);
    }
    a
}

/// Inverse of a mod the monic irreducible m, by extended Euclid.
fn poly_mod_inverse(a: &[u64], m: &[u64], p: u64) -> Option<Vec<u64>> {
    // Invariants: r0 = s0 * a (mod m), r1 = s1 * a (mod m).
    let mut r0 = m.to_vec();
    let mut r1 = a.to_vec();
    poly_trim(&mut r1);
    let mut s0: Vec<u64> = Vec::new();
    let mut s1: Vec<u64> = vec![1];
    while !r1.is_empty() {
        let (q, rem) = poly_divmod(&r0, &r1, p);
        let qs1 = poly_mul(&q, &s1, p);
        let s2 = poly_sub(&s0, &qs1, p);
        r0 = std::mem::replace(&mut r1, rem);
        s0 = std::mem::replace(&mut s1, s2);
    }
    if r0.len() != 1 {
        return None; // gcd not a unit
    }
    let scale = mod_inverse(r0[0], p);
    let mut out = s0.iter().map(|&c| (c * scale) % p).collect::<Vec<_>>();
    out = poly_rem(&out, m, p);
    Some(out)
}

fn poly_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out: Vec<u64> = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    poly_trim(&mut out);
    out
}

fn poly_divmod(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let mut rem = a.to_vec();
    poly_trim(&mut rem);
    let db = b.len() - 1;
    let binv = mod_inverse(b[db], p);
    if rem.len() <= db {
        return (Vec::new(), rem);
    }
    let mut quot = vec![0u64; rem.len() - db];
    while rem.len() > db {
        let lead = (rem[rem.len() - 1] * binv) % p;
        let shift = rem.len() - 1 - db;
        quot[shift] = lead;
        for (j, &bc) in b.iter().enumerate() {
            let idx = shift + j;
            rem[idx] = (rem[idx] + p * lead - (lead * bc) % p) % p;
        }
        poly_trim(&mut rem);
    }
    poly_trim(&mut quot);
    (quot, rem)
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    // Fermat; p is prime and a != 0 mod p.
    let mut acc = 1u64;
    let mut base = a % p;
    let mut k = p - 2;
    while k > 0 {
        if k & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        k >>= 1;
    }
    acc
}

/// Lexicographically least monic irreducible of degree r over F_p.
///
/// Candidates are ordered by the integer whose base-p digits are the
/// non-leading coefficients (most significant digit = degree r-1).
/// Irreducibility is by trial division against every monic polynomial of
/// degree 1..=r/2.
fn least_irreducible(p: u64, r: usize) -> Vec<u64> {
    let total = p.pow(r as u32);
    for v in 0..total {
        let mut cand = vec![0u64; r + 1];
        cand[r] = 1;
        let mut x = v;
        for coeff in cand.iter_mut().take(r) {
            *coeff = x % p;
            x /= p;
        }
        if is_irreducible(&cand, p) {
            return cand;
        }
    }
    unreachable!("an irreducible of every degree exists over F_p")
}

fn is_irreducible(m: &[u64], p: u64) -> bool {
    let deg = m.len() - 1;
    for d in 1..=deg / 2 {
        // All monic divisor candidates of degree d.
        let total = p.pow(d as u32);
        for v in 0..total {
            let mut div = vec![0u64; d + 1];
            div[d] = 1;
            let mut x = v;
            for coeff in div.iter_mut().take(d) {
                *coeff = x % p;
                x /= p;
            }
            let (_, rem) = poly_divmod(m, &div, p);
            if rem.is_empty() {
                return false;
            }
        }
    }
    true
}
