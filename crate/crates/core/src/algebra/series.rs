//! Laurent polynomials and precision-capped power series over F_q in u.
//!
//! A `Series` is a finite support map from exponents to nonzero
//! coefficients, plus a precision marker. `Exact` support is fully
//! authoritative. `KnownBelow(n)` means coefficients at exponents < n are
//! authoritative and everything from n up is unknown; no term at an
//! exponent >= n is ever stored. Every predicate that would need unknown
//! coefficients fails with `InsufficientPrecision` rather than guessing.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::algebra::field::{FieldCtor, FieldElem, FieldParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    Exact,
    KnownBelow(i64),
}

impl Precision {
    fn min(self, other: Precision) -> Precision {
        match (self, other) {
            (Precision::Exact, o) => o,
            (s, Precision::Exact) => s,
            (Precision::KnownBelow(a), Precision::KnownBelow(b)) => {
                Precision::KnownBelow(a.min(b))
            }
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Precision::Exact)
    }
}

/// Valuation of a series: the least exponent with nonzero coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Series {
    field: Arc<FieldParams>,
    terms: BTreeMap<i64, FieldElem>,
    prec: Precision,
}

impl Series {
    pub fn zero(field: &Arc<FieldParams>) -> Series {
        Series {
            field: Arc::clone(field),
            terms: BTreeMap::new(),
            prec: Precision::Exact,
        }
    }

    pub fn one(field: &Arc<FieldParams>) -> Series {
        Series::monomial(field, field.one(), 0)
    }

    pub fn monomial(field: &Arc<FieldParams>, coeff: FieldElem, exp: i64) -> Series {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exp, coeff);
        }
        Series {
            field: Arc::clone(field),
            terms,
            prec: Precision::Exact,
        }
    }

    /// u^k.
    pub fn u_pow(field: &Arc<FieldParams>, exp: i64) -> Series {
        Series::monomial(field, field.one(), exp)
    }

    /// Scalar constant.
    pub fn constant(field: &Arc<FieldParams>, c: u64) -> Series {
        Series::monomial(field, field.scalar(c), 0)
    }

    pub fn from_terms<I>(field: &Arc<FieldParams>, iter: I) -> Series
    where
        I: IntoIterator<Item = (i64, FieldElem)>,
    {
        let mut s = Series::zero(field);
        for (exp, c) in iter {
            s.add_term(exp, c);
        }
        s
    }

    pub fn field(&self) -> &Arc<FieldParams> {
        &self.field
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &FieldElem)> {
        self.terms.iter().map(|(&e, c)| (e, c))
    }

    pub fn support_len(&self) -> usize {
        self.terms.len()
    }

    fn add_term(&mut self, exp: i64, c: FieldElem) {
        if let Precision::KnownBelow(n) = self.prec {
            if exp >= n {
                return;
            }
        }
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    e.insert(sum);
                }
            }
        }
    }

    /// Lower the precision cap to `KnownBelow(n)`, dropping capped terms.
    pub fn truncated(mut self, n: i64) -> Series {
        self.prec = self.prec.min(Precision::KnownBelow(n));
        if let Precision::KnownBelow(k) = self.prec {
            self.terms.retain(|&e, _| e < k);
        }
        self
    }

    /// Exactly zero (empty support with exact precision).
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.prec.is_exact()
    }

    pub fn is_one(&self) -> bool {
        self.prec.is_exact()
            && self.terms.len() == 1
            && self.terms.get(&0).is_some_and(|c| c.is_one())
    }

    /// Assert the series is exactly zero, respecting precision: errors if
    /// the support is empty but coefficients beyond a cap are unknown.
    pub fn check_zero(&self) -> Result<bool> {
        if !self.terms.is_empty() {
            return Ok(false);
        }
        match self.prec {
            Precision::Exact => Ok(true),
            Precision::KnownBelow(n) => Err(Error::InsufficientPrecision(format!(
                "support empty but coefficients from u^{n} on are unknown"
            ))),
        }
    }

    /// Least exponent with nonzero coefficient; errors when the support is
    /// empty but a precision cap leaves that undecidable.
    pub fn valuation(&self) -> Result<Valuation> {
        if let Some((&e, _)) = self.terms.iter().next() {
            return Ok(Valuation::Finite(e));
        }
        match self.prec {
            Precision::Exact => Ok(Valuation::Infinite),
            Precision::KnownBelow(n) => Err(Error::InsufficientPrecision(format!(
                "valuation undecidable: no support below the cap u^{n}"
            ))),
        }
    }

    /// Lower bound on the valuation usable for precision bookkeeping:
    /// min stored exponent, else the cap, else +infinity for exact zero.
    fn valuation_floor(&self) -> Valuation {
        if let Some((&e, _)) = self.terms.iter().next() {
            Valuation::Finite(e)
        } else {
            match self.prec {
                Precision::Exact => Valuation::Infinite,
                Precision::KnownBelow(n) => Valuation::Finite(n),
            }
        }
    }

    /// True iff no nonzero coefficient sits at a negative exponent.
    /// Requires the region below 0 to be authoritative.
    pub fn is_integral(&self) -> Result<bool> {
        if let Precision::KnownBelow(n) = self.prec {
            if n < 0 {
                return Err(Error::InsufficientPrecision(format!(
                    "integrality needs coefficients below u^0 but only those below u^{n} are known"
                )));
            }
        }
        Ok(self.terms.keys().next().is_none_or(|&e| e >= 0))
    }

    /// Coefficient at an exponent; errors if that exponent is capped.
    pub fn coeff(&self, exp: i64) -> Result<FieldElem> {
        if let Precision::KnownBelow(n) = self.prec {
            if exp >= n {
                return Err(Error::InsufficientPrecision(format!(
                    "coefficient of u^{exp} unknown beyond cap u^{n}"
                )));
            }
        }
        Ok(self
            .terms
            .get(&exp)
            .cloned()
            .unwrap_or_else(|| self.field.zero()))
    }

    /// The part supported strictly below u^n, as an exact series.
    /// Errors if coefficients below n are not authoritative.
    pub fn reduced_below(&self, n: i64) -> Result<Series> {
        if let Precision::KnownBelow(k) = self.prec {
            if k < n {
                return Err(Error::InsufficientPrecision(format!(
                    "reduction mod u^{n} needs coefficients below u^{n}, have below u^{k}"
                )));
            }
        }
        Ok(Series {
            field: Arc::clone(&self.field),
            terms: self
                .terms
                .iter()
                .filter(|(&e, _)| e < n)
                .map(|(&e, c)| (e, c.clone()))
                .collect(),
            prec: Precision::Exact,
        })
    }

    /// Substitute u -> u^p, coefficients unchanged.
    pub fn frobenius(&self) -> Series {
        let p = self.field.p() as i64;
        let prec = match self.prec {
            Precision::Exact => Precision::Exact,
            Precision::KnownBelow(n) => Precision::KnownBelow(p * n),
        };
        Series {
            field: Arc::clone(&self.field),
            terms: self.terms.iter().map(|(&e, c)| (p * e, c.clone())).collect(),
            prec,
        }
    }

    pub fn scale(&self, c: &FieldElem) -> Series {
        if c.is_zero() {
            return Series::zero(&self.field);
        }
        Series {
            field: Arc::clone(&self.field),
            terms: self.terms.iter().map(|(&e, x)| (e, x * c)).collect(),
            prec: self.prec,
        }
    }

    /// Multiply by u^k.
    pub fn shift(&self, k: i64) -> Series {
        let prec = match self.prec {
            Precision::Exact => Precision::Exact,
            Precision::KnownBelow(n) => Precision::KnownBelow(n + k),
        };
        Series {
            field: Arc::clone(&self.field),
            terms: self.terms.iter().map(|(&e, c)| (e + k, c.clone())).collect(),
            prec,
        }
    }

    pub fn add(&self, other: &Series) -> Series {
        assert!(
            Arc::ptr_eq(&self.field, &other.field) || self.field == other.field,
            "series over different fields"
        );
        let prec = self.prec.min(other.prec);
        let mut out = Series {
            field: Arc::clone(&self.field),
            terms: BTreeMap::new(),
            prec,
        };
        for (&e, c) in &self.terms {
            out.add_term(e, c.clone());
        }
        for (&e, c) in &other.terms {
            out.add_term(e, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Series) -> Series {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Series {
        Series {
            field: Arc::clone(&self.field),
            terms: self.terms.iter().map(|(&e, c)| (e, -c)).collect(),
            prec: self.prec,
        }
    }

    pub fn mul(&self, other: &Series) -> Series {
        assert!(
            Arc::ptr_eq(&self.field, &other.field) || self.field == other.field,
            "series over different fields"
        );
        // Multiplication by exact zero is exact zero regardless of the
        // other factor's cap.
        if self.is_zero() || other.is_zero() {
            return Series::zero(&self.field);
        }
        // Neither factor is exact zero here, so each valuation floor is
        // finite (min stored exponent, or the cap for empty capped support).
        let va = self.valuation_floor().finite().expect("nonzero series");
        let vb = other.valuation_floor().finite().expect("nonzero series");
        let cap_a = match other.prec {
            Precision::Exact => None,
            Precision::KnownBelow(n) => Some(va + n),
        };
        let cap_b = match self.prec {
            Precision::Exact => None,
            Precision::KnownBelow(n) => Some(vb + n),
        };
        let prec = match (cap_a, cap_b) {
            (None, None) => Precision::Exact,
            (Some(x), None) => Precision::KnownBelow(x),
            (None, Some(y)) => Precision::KnownBelow(y),
            (Some(x), Some(y)) => Precision::KnownBelow(x.min(y)),
        };
        let mut out = Series {
            field: Arc::clone(&self.field),
            terms: BTreeMap::new(),
            prec,
        };
        for (&ea, ca) in &self.terms {
            for (&eb, cb) in &other.terms {
                out.add_term(ea + eb, ca * cb);
            }
        }
        out
    }

    /// Multiplicative inverse.
    ///
    /// A single-term exact series inverts exactly. Otherwise the result is
    /// capped: at -val(f) + work_prec, and additionally at what the input's
    /// own cap supports.
    pub fn inverse(&self, work_prec: i64) -> Result<Series> {
        let val = match self.valuation()? {
            Valuation::Infinite => return Err(Error::DivisionByZero),
            Valuation::Finite(v) => v,
        };
        let lead = self.terms.get(&val).expect("valuation term present");
        let lead_inv = lead.inv()?;
        if self.terms.len() == 1 && self.prec.is_exact() {
            return Ok(Series::monomial(&self.field, lead_inv, -val));
        }
        // Write f = c u^v (1 + h), val(h) >= 1; invert the unit part by
        // solving g_k = -sum_{j>=1} h_j g_{k-j} term by term.
        let cap = match self.prec {
            Precision::Exact => work_prec,
            // Input known below n: unit part known below n - val, and so is
            // its inverse; overall cap -val + min(work_prec, n - 2 val + val)
            Precision::KnownBelow(n) => work_prec.min(n - val),
        };
        if cap <= 0 {
            return Err(Error::InsufficientPrecision(format!(
                "inverse needs positive working precision, have {cap}"
            )));
        }
        // h coefficients: h_j = f_{val + j} / (c) for j >= 1.
        let mut h = vec![self.field.zero(); cap as usize];
        for (&e, c) in &self.terms {
            let j = e - val;
            if j >= 1 && j < cap {
                h[j as usize] = c * &lead_inv;
            }
        }
        let mut g = vec![self.field.zero(); cap as usize];
        g[0] = self.field.one();
        for k in 1..cap as usize {
            let mut acc = self.field.zero();
            for j in 1..=k {
                if !h[j].is_zero() && !g[k - j].is_zero() {
                    acc = &acc + &(&h[j] * &g[k - j]);
                }
            }
            g[k] = -&acc;
        }
        let mut out = Series {
            field: Arc::clone(&self.field),
            terms: BTreeMap::new(),
            prec: Precision::KnownBelow(-val + cap),
        };
        for (k, c) in g.into_iter().enumerate() {
            out.add_term(-val + k as i64, &c * &lead_inv);
        }
        Ok(out)
    }

    /// Exact rendering in the series grammar; errors on capped input.
    pub fn to_grammar_string(&self) -> Result<String> {
        if !self.prec.is_exact() {
            return Err(Error::Precondition(
                "only exact series serialize to the text grammar".into(),
            ));
        }
        Ok(self.grammar_body())
    }

    fn grammar_body(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(&e, c)| {
                let cs = if c.is_compound() {
                    format!("({})", c.to_grammar_string())
                } else {
                    c.to_grammar_string()
                };
                if e == 0 {
                    cs
                } else if c.is_one() {
                    format!("u^{e}")
                } else {
                    format!("{cs}*u^{e}")
                }
            })
            .collect();
        parts.join(" + ")
    }

    /// Parse the series grammar; the result is exact.
    pub fn parse(field: &Arc<FieldParams>, s: &str) -> Result<Series> {
        let mut out = Series::zero(field);
        for term in s.split(" + ") {
            let term = term.trim();
            if term.is_empty() {
                return Err(Error::Parse(format!("empty term in '{s}'")));
            }
            let (coeff, exp) = parse_term(field, term)?;
            out.add_term(exp, coeff);
        }
        Ok(out)
    }
}

fn parse_term(field: &Arc<FieldParams>, term: &str) -> Result<(FieldElem, i64)> {
    let bad = || Error::Parse(format!("bad series term '{term}'"));
    // Split off a trailing u-power if present.
    let (coeff_part, exp) = if let Some(pos) = term.rfind("u^") {
        let exp: i64 = term[pos + 2..].parse().map_err(|_| bad())?;
        let head = &term[..pos];
        let head = head.strip_suffix('*').unwrap_or(head);
        (head.trim(), exp)
    } else {
        (term, 0)
    };
    let coeff = if coeff_part.is_empty() {
        field.one()
    } else if let Some(inner) = coeff_part.strip_prefix('(') {
        let inner = inner.strip_suffix(')').ok_or_else(bad)?;
        FieldElem::parse(field, inner)?
    } else {
        FieldElem::parse(field, coeff_part)?
    };
    Ok((coeff, exp))
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.prec {
            Precision::Exact => write!(f, "{}", self.grammar_body()),
            Precision::KnownBelow(n) => {
                if self.terms.is_empty() {
                    write!(f, "O(u^{n})")
                } else {
                    write!(f, "{} + O(u^{n})", self.grammar_body())
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::field::FieldParams;

    fn f9() -> Arc<FieldParams> {
        FieldParams::new(3, 2).unwrap()
    }

    #[test]
    fn laurent_times_u() {
        // (u^-1 + 1) * u = 1 + u
        let f = f9();
        let a = Series::u_pow(&f, -1).add(&Series::one(&f));
        let prod = a.mul(&Series::u_pow(&f, 1));
        let expect = Series::one(&f).add(&Series::u_pow(&f, 1));
        assert_eq!(prod, expect);
    }

    #[test]
    fn mul_by_exact_zero_is_exact() {
        let f = f9();
        let capped = Series::one(&f).truncated(5);
        let prod = capped.mul(&Series::zero(&f));
        assert!(prod.is_zero());
        assert_eq!(prod.precision(), Precision::Exact);
    }

    #[test]
    fn schoolbook_difference_of_squares() {
        // (1+u)(1-u) = 1 - u^2 over F_3, where -1 = 2.
        let f = f9();
        let one = Series::one(&f);
        let u = Series::u_pow(&f, 1);
        let prod = one.add(&u).mul(&one.sub(&u));
        let expect = one.sub(&Series::u_pow(&f, 2));
        assert_eq!(prod, expect);
        assert_eq!(prod.to_grammar_string().unwrap(), "1 + 2*u^2");
    }

    #[test]
    fn valuation_cases() {
        let f = f9();
        let s = Series::u_pow(&f, 2).add(&Series::u_pow(&f, 5));
        assert_eq!(s.valuation().unwrap(), Valuation::Finite(2));
        assert_eq!(Series::zero(&f).valuation().unwrap(), Valuation::Infinite);
        let capped_empty = Series::zero(&f).truncated(3);
        assert!(matches!(
            capped_empty.valuation(),
            Err(Error::InsufficientPrecision(_))
        ));
    }

    #[test]
    fn monomial_inverse_is_exact() {
        let f = f9();
        let inv = Series::u_pow(&f, 3).inverse(10).unwrap();
        assert_eq!(inv, Series::u_pow(&f, -3));
        assert!(inv.precision().is_exact());
    }

    #[test]
    fn geometric_inverse() {
        // (1+u)^{-1} = 1 + 2u + u^2 + 2u^3 + ... in F_3.
        let f = f9();
        let s = Series::one(&f).add(&Series::u_pow(&f, 1));
        let w = 8;
        let inv = s.inverse(w).unwrap();
        assert_eq!(inv.precision(), Precision::KnownBelow(w));
        for k in 0..w {
            let expect = if k % 2 == 0 { 1 } else { 2 };
            assert_eq!(inv.coeff(k).unwrap(), f.scalar(expect), "coefficient {k}");
        }
        // f * f^{-1} = 1 up to the guaranteed precision.
        let prod = s.mul(&inv);
        assert_eq!(prod.precision(), Precision::KnownBelow(w));
        assert!(prod.sub(&Series::one(&f)).terms.is_empty());
        assert!(Series::zero(&f).inverse(4).is_err());
    }

    #[test]
    fn frobenius_substitution() {
        // p = 3: u + g -> g + u^3, coefficients fixed.
        let f = f9();
        let s = Series::u_pow(&f, 1).add(&Series::monomial(&f, f.gen(), 0));
        let fs = s.frobenius();
        let expect = Series::u_pow(&f, 3).add(&Series::monomial(&f, f.gen(), 0));
        assert_eq!(fs, expect);
        // Constants are fixed; u^-1 -> u^-3.
        assert_eq!(Series::constant(&f, 2).frobenius(), Series::constant(&f, 2));
        assert_eq!(Series::u_pow(&f, -1).frobenius(), Series::u_pow(&f, -3));
    }

    #[test]
    fn integrality() {
        let f = f9();
        assert!(Series::one(&f)
            .add(&Series::u_pow(&f, 1))
            .is_integral()
            .unwrap());
        assert!(!Series::u_pow(&f, -1).is_integral().unwrap());
        // Exact cancellation decides integrality from the surviving support.
        let a = Series::u_pow(&f, -4).add(&Series::u_pow(&f, -1));
        let b = Series::u_pow(&f, -4)
            .neg()
            .add(&Series::u_pow(&f, -1).neg())
            .add(&Series::one(&f));
        assert!(a.add(&b).is_integral().unwrap());
        // Capped below zero is undecidable.
        let capped = Series::one(&f).truncated(-1);
        assert!(matches!(
            capped.is_integral(),
            Err(Error::InsufficientPrecision(_))
        ));
    }

    #[test]
    fn grammar_round_trip() {
        let f = f9();
        let s = Series::from_terms(
            &f,
            [
                (-2, f.elem(&[1, 1])),
                (0, f.scalar(2)),
                (3, f.one()),
            ],
        );
        let text = s.to_grammar_string().unwrap();
        assert_eq!(text, "(g+1)*u^-2 + 2 + u^3");
        assert_eq!(Series::parse(&f, &text).unwrap(), s);
        assert_eq!(Series::parse(&f, "0").unwrap(), Series::zero(&f));
        assert_eq!(Series::zero(&f).to_grammar_string().unwrap(), "0");
        let g_only = Series::monomial(&f, f.gen(), 5);
        let text = g_only.to_grammar_string().unwrap();
        assert_eq!(text, "g*u^5");
        assert_eq!(Series::parse(&f, &text).unwrap(), g_only);
    }

    #[test]
    fn capped_inverse_of_capped_input() {
        let f = f9();
        // Input known below 6 with valuation 1.
        let s = Series::u_pow(&f, 1).add(&Series::u_pow(&f, 2)).truncated(6);
        let inv = s.inverse(100).unwrap();
        // Cap limited by input knowledge: -1 + (6 - 1) = 4.
        assert_eq!(inv.precision(), Precision::KnownBelow(4));
        let prod = s.mul(&inv);
        assert!(prod.sub(&Series::one(&f)).terms.is_empty());
    }
}
