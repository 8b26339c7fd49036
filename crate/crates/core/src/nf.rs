//! Finite Conway normal forms `sum_i w^{y_i} r_i`.
//!
//! Exponents are themselves normal forms, so a [`Surreal`] is a finite
//! tree. Terms are kept with strictly decreasing exponents and nonzero
//! coefficients; every constructor and operator re-establishes that.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde_json::{json, Value};

use crate::config;
use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Surreal {
    terms: Vec<(Surreal, Scalar)>,
}

impl Surreal {
    pub fn zero() -> Self {
        Surreal { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_scalar(Scalar::one())
    }

    pub fn from_scalar(c: Scalar) -> Self {
        Self::monomial(Surreal::zero(), c)
    }

    pub fn from_rational(q: Rational) -> Self {
        Self::from_scalar(Scalar::Rat(q))
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_scalar(Scalar::from_int(n))
    }

    /// `c * w^y`.
    pub fn monomial(y: Surreal, c: Scalar) -> Self {
        if c.is_zero() {
            Surreal::zero()
        } else {
            Surreal { terms: vec![(y, c)] }
        }
    }

    /// The number `w`.
    pub fn omega() -> Self {
        Self::omega_pow(Surreal::one())
    }

    pub fn omega_pow(y: Surreal) -> Self {
        Self::monomial(y, Scalar::one())
    }

    /// `w^q` for a rational `q`.
    pub fn omega_rat(q: Rational) -> Self {
        Self::omega_pow(Surreal::from_rational(q))
    }

    /// `ln w`, represented as `w^{w^{-1}}`.
    pub fn lambda() -> Self {
        Self::omega_pow(Self::omega_rat(crate::scalar::int(-1)))
    }

    /// Builds a normal form from arbitrary terms, merging equal exponents.
    pub fn from_terms(terms: impl IntoIterator<Item = (Surreal, Scalar)>) -> Self {
        let mut map: BTreeMap<Surreal, Scalar> = BTreeMap::new();
        for (e, c) in terms {
            match map.get_mut(&e) {
                Some(acc) => *acc = &*acc + &c,
                None => {
                    map.insert(e, c);
                }
            }
        }
        let mut terms: Vec<_> = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.reverse();
        Surreal { terms }
    }

    pub fn terms(&self) -> &[(Surreal, Scalar)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Surreal, Scalar)> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading(&self) -> Option<(&Surreal, &Scalar)> {
        self.terms.first().map(|(e, c)| (e, c))
    }

    pub fn leading_exponent(&self) -> Option<&Surreal> {
        self.terms.first().map(|(e, _)| e)
    }

    pub fn signum(&self) -> i32 {
        self.terms.first().map_or(0, |(_, c)| c.signum())
    }

    /// Nesting depth: 0 for the number 0, one more than the deepest exponent otherwise.
    pub fn depth(&self) -> usize {
        self.terms.iter().map(|(e, _)| e.depth() + 1).max().unwrap_or(0)
    }

    pub fn check_depth(self) -> Result<Self> {
        let cap = config::depth_cap();
        if self.depth() > cap {
            Err(Error::Resource { what: "normal-form depth", cap })
        } else {
            Ok(self)
        }
    }

    /// The value as a real scalar, if there are no infinite or infinitesimal terms.
    pub fn as_scalar(&self) -> Option<Scalar> {
        match self.terms.as_slice() {
            [] => Some(Scalar::zero()),
            [(e, c)] if e.is_zero() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn as_rational(&self) -> Option<Rational> {
        self.as_scalar().and_then(|s| s.as_rational().cloned())
    }

    pub fn is_real(&self) -> bool {
        self.as_scalar().is_some()
    }

    /// Some exponent is positive.
    pub fn is_infinite(&self) -> bool {
        self.leading_exponent().is_some_and(|e| e.signum() > 0)
    }

    /// Every exponent is negative (0 counts as infinitesimal).
    pub fn is_infinitesimal(&self) -> bool {
        self.leading_exponent().is_none_or(|e| e.signum() < 0)
    }

    /// Splits `x` into purely infinite part, real part and infinitesimal part.
    pub fn decompose(&self) -> (Surreal, Scalar, Surreal) {
        let mut pi = Vec::new();
        let mut re = Scalar::zero();
        let mut eps = Vec::new();
        for (e, c) in &self.terms {
            match e.signum() {
                1 => pi.push((e.clone(), c.clone())),
                0 => re = c.clone(),
                _ => eps.push((e.clone(), c.clone())),
            }
        }
        (Surreal { terms: pi }, re, Surreal { terms: eps })
    }

    pub fn scale(&self, c: &Scalar) -> Surreal {
        if c.is_zero() {
            return Surreal::zero();
        }
        Surreal {
            terms: self.terms.iter().map(|(e, d)| (e.clone(), d * c)).filter(|(_, d)| !d.is_zero()).collect(),
        }
    }

    pub fn scale_rat(&self, q: &Rational) -> Surreal {
        self.scale(&Scalar::Rat(q.clone()))
    }

    /// Multiplies by `c * w^y`.
    pub fn mul_monomial(&self, y: &Surreal, c: &Scalar) -> Surreal {
        if c.is_zero() {
            return Surreal::zero();
        }
        Surreal {
            terms: self.terms.iter().map(|(e, d)| (e + y, d * c)).filter(|(_, d)| !d.is_zero()).collect(),
        }
    }

    /// Terms with exponent strictly above `t`.
    pub fn above(&self, t: &Surreal) -> Surreal {
        Surreal { terms: self.terms.iter().filter(|(e, _)| e > t).cloned().collect() }
    }

    /// Terms with exponent strictly below `t`.
    pub fn below(&self, t: &Surreal) -> Surreal {
        Surreal { terms: self.terms.iter().filter(|(e, _)| e < t).cloned().collect() }
    }

    /// Coefficient of `w^y` (zero if absent).
    pub fn coeff(&self, y: &Surreal) -> Scalar {
        self.terms.iter().find(|(e, _)| e == y).map_or_else(Scalar::zero, |(_, c)| c.clone())
    }

    pub fn powi(&self, n: u32) -> Surreal {
        let mut acc = Surreal::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn to_json(&self) -> Value {
        json!({
            "terms": self.terms.iter().map(|(e, c)| json!({
                "exp": e.to_json(),
                "coeff": c.to_string(),
            })).collect::<Vec<_>>()
        })
    }

    pub fn from_json(v: &Value) -> Result<Surreal> {
        let bad = || Error::Parse("malformed normal-form JSON".into());
        let terms = v.get("terms").and_then(Value::as_array).ok_or_else(bad)?;
        let mut out = Vec::with_capacity(terms.len());
        for t in terms {
            let e = Surreal::from_json(t.get("exp").ok_or_else(bad)?)?;
            let c: Scalar = t.get("coeff").and_then(Value::as_str).ok_or_else(bad)?.parse()?;
            out.push((e, c));
        }
        Ok(Surreal::from_terms(out))
    }

    /// Writes `w^y` using the canonical text syntax (`1` when `y = 0`).
    pub fn fmt_omega_power(y: &Surreal, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if y.is_zero() {
            return f.write_str("1");
        }
        match y.as_rational() {
            Some(q) if q == Rational::from_integer(1.into()) => f.write_str("w"),
            Some(q) if q.is_integer() => write!(f, "w^{q}"),
            _ => write!(f, "w^({y})"),
        }
    }
}

/// Scalar formatted as a multiplicative factor; sums are parenthesized.
pub(crate) fn fmt_factor(c: &Scalar, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let text = c.to_string();
    if text.contains(" + ") || text.contains(" - ") {
        write!(f, "({text})")
    } else {
        f.write_str(&text)
    }
}

/// Splits off a printable sign: `(negative, magnitude)`.
pub(crate) fn split_sign(c: &Scalar) -> (bool, Scalar) {
    let neg = match c {
        Scalar::Rat(r) => r < &Rational::from_integer(0.into()),
        Scalar::Sym(m) if m.len() == 1 => m.values().next().unwrap() < &Rational::from_integer(0.into()),
        Scalar::Sym(_) => false,
        Scalar::Float { value, .. } => *value < 0.0,
    };
    if neg {
        (true, -c)
    } else {
        (false, c.clone())
    }
}

impl fmt::Display for Surreal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let (neg, mag) = split_sign(c);
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if e.is_zero() {
                fmt_factor(&mag, f)?;
            } else if mag.is_one() {
                Surreal::fmt_omega_power(e, f)?;
            } else {
                fmt_factor(&mag, f)?;
                f.write_str("*")?;
                Surreal::fmt_omega_power(e, f)?;
            }
        }
        Ok(())
    }
}

impl Ord for Surreal {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.terms, &other.terms);
        let mut i = 0;
        loop {
            match (a.get(i), b.get(i)) {
                (None, None) => return Ordering::Equal,
                (Some((_, ca)), None) => return ca.signum().cmp(&0),
                (None, Some((_, cb))) => return 0.cmp(&cb.signum()),
                (Some((ea, ca)), Some((eb, cb))) => match ea.cmp(eb) {
                    Ordering::Greater => return ca.signum().cmp(&0),
                    Ordering::Less => return 0.cmp(&cb.signum()),
                    Ordering::Equal => {
                        if ca != cb {
                            return ca.cmp_value(cb);
                        }
                    }
                },
            }
            i += 1;
        }
    }
}

impl PartialOrd for Surreal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> Add<&'a Surreal> for &'a Surreal {
    type Output = Surreal;
    fn add(self, rhs: &Surreal) -> Surreal {
        let (a, b) = (&self.terms, &rhs.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = &a[i].1 + &b[j].1;
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Surreal { terms: out }
    }
}

impl Neg for &Surreal {
    type Output = Surreal;
    fn neg(self) -> Surreal {
        Surreal { terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }
}

impl<'a> Sub<&'a Surreal> for &'a Surreal {
    type Output = Surreal;
    fn sub(self, rhs: &Surreal) -> Surreal {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a Surreal> for &'a Surreal {
    type Output = Surreal;
    fn mul(self, rhs: &Surreal) -> Surreal {
        if self.is_zero() || rhs.is_zero() {
            return Surreal::zero();
        }
        if rhs.len() == 1 {
            return self.mul_monomial(&rhs.terms[0].0, &rhs.terms[0].1);
        }
        if self.len() == 1 {
            return rhs.mul_monomial(&self.terms[0].0, &self.terms[0].1);
        }
        Surreal::from_terms(
            self.terms.iter().flat_map(|(ea, ca)| rhs.terms.iter().map(move |(eb, cb)| (ea + eb, ca * cb))),
        )
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Surreal> for Surreal {
            type Output = Surreal;
            fn $m(self, rhs: Surreal) -> Surreal {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Surreal {
    type Output = Surreal;
    fn neg(self) -> Surreal {
        -&self
    }
}

impl From<i64> for Surreal {
    fn from(n: i64) -> Self {
        Surreal::from_int(n)
    }
}

impl From<Scalar> for Surreal {
    fn from(c: Scalar) -> Self {
        Surreal::from_scalar(c)
    }
}

/// Sum with the configured depth cap enforced.
pub fn nf_add(a: &Surreal, b: &Surreal) -> Result<Surreal> {
    (a + b).check_depth()
}

/// Product with the configured depth cap enforced.
pub fn nf_mul(a: &Surreal, b: &Surreal) -> Result<Surreal> {
    (a * b).check_depth()
}

pub fn nf_cmp(a: &Surreal, b: &Surreal) -> Ordering {
    a.cmp(b)
}

pub fn omega_pow(y: &Surreal) -> Surreal {
    Surreal::omega_pow(y.clone())
}

pub fn decompose(x: &Surreal) -> (Surreal, Scalar, Surreal) {
    x.decompose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn w(q: Rational) -> Surreal {
        Surreal::omega_rat(q)
    }

    #[test]
    fn termwise_sums() {
        let a = &Surreal::omega() + &Surreal::one();
        let b = &(-&Surreal::omega()) + &Surreal::one();
        assert_eq!(&a + &b, Surreal::from_int(2));
        let x = Surreal::from_terms([
            (Surreal::from_int(2), Scalar::one()),
            (Surreal::one(), Scalar::from_int(2)),
            (Surreal::zero(), Scalar::from_int(5)),
        ]);
        let y = Surreal::from_terms([
            (Surreal::one(), Scalar::from_int(-2)),
            (Surreal::from_int(-1), Scalar::one()),
        ]);
        assert_eq!((&x + &y).to_string(), "w^2 + 5 + w^-1");
    }

    #[test]
    fn products() {
        assert_eq!(&Surreal::omega() * &w(int(-1)), Surreal::one());
        let a = &Surreal::omega() + &Surreal::one();
        assert_eq!((&a * &a).to_string(), "w^2 + 2*w + 1");
        let s = &w(rat(1, 2)) + &Surreal::one();
        let d = &w(rat(1, 2)) - &Surreal::one();
        assert_eq!((&s * &d).to_string(), "w - 1");
    }

    #[test]
    fn ordering() {
        assert!(Surreal::omega() > Surreal::from_int(1000));
        assert!(&Surreal::omega() - &Surreal::one() < Surreal::omega());
        assert!(w(rat(1, 2)).scale(&Scalar::from_int(5)) < Surreal::omega());
        assert!(Surreal::lambda() < w(rat(1, 1000)));
        assert!(Surreal::lambda() > Surreal::from_int(1_000_000));
    }

    #[test]
    fn decomposition() {
        let x = &(&Surreal::omega() + &Surreal::from_int(3)) + &w(int(-1));
        let (p, r, e) = x.decompose();
        assert_eq!((p, r, e), (Surreal::omega(), Scalar::from_int(3), w(int(-1))));
        let y = &Surreal::omega_pow(Surreal::omega()).scale(&Scalar::from_int(2)) - &Surreal::from_int(7);
        let (p, r, e) = y.decompose();
        assert_eq!(p.to_string(), "2*w^(w)");
        assert_eq!(r, Scalar::from_int(-7));
        assert!(e.is_zero());
    }

    #[test]
    fn json_roundtrip() {
        let x = &Surreal::omega_pow(&Surreal::omega() + &Surreal::lambda())
            - &w(rat(-1, 2)).scale(&Scalar::ratio(3, 2));
        assert_eq!(Surreal::from_json(&x.to_json()).unwrap(), x);
    }

    #[test]
    fn depth_cap() {
        let mut x = Surreal::omega();
        for _ in 0..12 {
            x = Surreal::omega_pow(x);
        }
        assert!(matches!(nf_add(&x, &Surreal::one()), Err(Error::Resource { .. })));
    }
}
