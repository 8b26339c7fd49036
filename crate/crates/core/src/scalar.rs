//! Coefficients of normal forms and transseries.
//!
//! A [`Scalar`] is either an exact rational, an exact rational linear
//! combination of products of registry constants (`e`, `pi`, `sqrt(2)`,
//! `ln(2*pi)`, `Ei(1)`), or a float carrying an absolute error bound.
//! The registry constants are treated as algebraically independent, so the
//! exact representation is canonical and equality is structural.

use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::config;
use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Shorthand for the rational `n/d`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Scale down huge numerators/denominators before dividing.
            let nb = r.numer().bits() as i64;
            let db = r.denom().bits() as i64;
            let shift = (nb.max(db) - 900).max(0) as usize;
            let n = (r.numer() >> shift).to_f64().unwrap_or(f64::INFINITY);
            let d = (r.denom() >> shift).to_f64().unwrap_or(f64::INFINITY);
            if d == 0.0 {
                if r.is_negative() {
                    f64::NEG_INFINITY
                } else {
                    f64::INFINITY
                }
            } else {
                n / d
            }
        }
    }
}

/// Best rational approximation of a finite float (exact binary value).
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Symbolic constants allowed in exact coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constant {
    E,
    Pi,
    Sqrt2,
    Ln2Pi,
    Ei1,
}

impl Constant {
    pub const ALL: [Constant; 5] =
        [Constant::E, Constant::Pi, Constant::Sqrt2, Constant::Ln2Pi, Constant::Ei1];

    pub fn value(self) -> f64 {
        match self {
            Constant::E => std::f64::consts::E,
            Constant::Pi => std::f64::consts::PI,
            Constant::Sqrt2 => std::f64::consts::SQRT_2,
            Constant::Ln2Pi => 1.837_877_066_409_345_5,
            Constant::Ei1 => 1.895_117_816_355_936_8,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Constant::E => "e",
            Constant::Pi => "pi",
            Constant::Sqrt2 => "sqrt(2)",
            Constant::Ln2Pi => "ln(2*pi)",
            Constant::Ei1 => "Ei(1)",
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    /// `e` and `pi` take rational exponents, the others integer ones.
    fn rational_exponents(self) -> bool {
        matches!(self, Constant::E | Constant::Pi)
    }
}

type Exp = Ratio<i64>;

/// Product of registry constants raised to exponents.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConstMono([Exp; 5]);

impl ConstMono {
    pub fn unit() -> Self {
        ConstMono([Exp::zero(); 5])
    }

    pub fn single(c: Constant, e: Exp) -> (Self, Rational) {
        let mut m = Self::unit();
        m.0[c.index()] = e;
        m.normalize()
    }

    pub fn is_unit(&self) -> bool {
        self.0.iter().all(|e| e.is_zero())
    }

    pub fn exponent(&self, c: Constant) -> Exp {
        self.0[c.index()]
    }

    /// Folds even powers of `sqrt(2)` into a rational factor.
    fn normalize(mut self) -> (Self, Rational) {
        let s = self.0[Constant::Sqrt2.index()];
        debug_assert!(s.is_integer());
        let n = s.to_integer();
        let half = Integer::div_floor(&n, &2);
        self.0[Constant::Sqrt2.index()] = Exp::from_integer(n - 2 * half);
        let two = int(2);
        let factor = if half >= 0 {
            num_traits::pow(two, half as usize)
        } else {
            num_traits::pow(two, (-half) as usize).recip()
        };
        (self, factor)
    }

    fn mul(&self, other: &Self) -> (Self, Rational) {
        let mut out = self.clone();
        for i in 0..5 {
            out.0[i] += other.0[i];
        }
        out.normalize()
    }

    fn pow(&self, q: &Exp) -> Option<(Self, Rational)> {
        let mut out = self.clone();
        for c in Constant::ALL {
            let e = self.0[c.index()] * *q;
            if !c.rational_exponents() && !e.is_integer() {
                return None;
            }
            out.0[c.index()] = e;
        }
        Some(out.normalize())
    }

    fn value(&self) -> f64 {
        Constant::ALL
            .iter()
            .map(|&c| {
                let e = self.0[c.index()];
                if e.is_zero() {
                    1.0
                } else {
                    c.value().powf(*e.numer() as f64 / *e.denom() as f64)
                }
            })
            .product()
    }
}

impl fmt::Display for ConstMono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for c in Constant::ALL {
            let e = self.0[c.index()];
            if e.is_zero() {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            f.write_str(c.name())?;
            if e.is_one() {
                continue;
            }
            if e.is_integer() && e.is_positive() {
                write!(f, "^{}", e.numer())?;
            } else {
                write!(f, "^({e})")?;
            }
        }
        Ok(())
    }
}

/// Exact or error-bounded real coefficient.
#[derive(Clone, Debug)]
pub enum Scalar {
    Rat(Rational),
    Sym(BTreeMap<ConstMono, Rational>),
    Float { value: f64, err: f64 },
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Rat(Rational::zero())
    }

    pub fn one() -> Self {
        Scalar::Rat(Rational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Rat(int(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Scalar::Rat(rat(n, d))
    }

    pub fn constant(c: Constant) -> Self {
        Self::constant_pow(c, Exp::one())
    }

    /// `c^e`; panics if the exponent is not allowed for this constant.
    pub fn constant_pow(c: Constant, e: Exp) -> Self {
        assert!(c.rational_exponents() || e.is_integer(), "{} only takes integer exponents", c.name());
        let (m, factor) = ConstMono::single(c, e);
        Self::from_map([(m, factor)].into_iter().collect())
    }

    pub fn float(value: f64, err: f64) -> Self {
        Scalar::Float { value, err: err.abs() }
    }

    fn from_map(mut map: BTreeMap<ConstMono, Rational>) -> Self {
        map.retain(|_, c| !c.is_zero());
        if map.is_empty() {
            return Scalar::zero();
        }
        if map.len() == 1 {
            let (m, _) = map.iter().next().unwrap();
            if m.is_unit() {
                return Scalar::Rat(map.into_values().next().unwrap());
            }
        }
        Scalar::Sym(map)
    }

    fn to_map(&self) -> BTreeMap<ConstMono, Rational> {
        match self {
            Scalar::Rat(r) => {
                let mut m = BTreeMap::new();
                if !r.is_zero() {
                    m.insert(ConstMono::unit(), r.clone());
                }
                m
            }
            Scalar::Sym(m) => m.clone(),
            Scalar::Float { .. } => unreachable!("float scalars have no symbolic map"),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_zero(),
            Scalar::Sym(_) => false,
            Scalar::Float { value, .. } => *value == 0.0,
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Scalar::Rat(r) if r.is_one())
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, Scalar::Float { .. })
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Scalar::Rat(r) => Some(r),
            _ => None,
        }
    }

    /// Absolute error bound of the value (zero for exact scalars).
    pub fn error_bound(&self) -> f64 {
        match self {
            Scalar::Float { err, .. } => *err,
            _ => 0.0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Rat(r) => rational_to_f64(r),
            Scalar::Sym(m) => m.iter().map(|(k, c)| k.value() * rational_to_f64(c)).sum(),
            Scalar::Float { value, .. } => *value,
        }
    }

    fn as_float(&self) -> (f64, f64) {
        match self {
            Scalar::Float { value, err } => (*value, *err),
            other => {
                let v = other.to_f64();
                (v, v.abs() * f64::EPSILON)
            }
        }
    }

    /// Sign of the value: -1, 0 or 1. Symbolic sums are decided numerically.
    pub fn signum(&self) -> i32 {
        let s = match self {
            Scalar::Rat(r) => {
                if r.is_zero() {
                    0.0
                } else if r.is_positive() {
                    1.0
                } else {
                    -1.0
                }
            }
            other => other.to_f64(),
        };
        if s > 0.0 {
            1
        } else if s < 0.0 {
            -1
        } else {
            0
        }
    }

    pub fn cmp_value(&self, other: &Self) -> std::cmp::Ordering {
        (self - other).signum().cmp(&0)
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Result<Self> {
        match self {
            Scalar::Rat(r) => {
                if r.is_zero() {
                    Err(Error::DivisionByZero)
                } else {
                    Ok(Scalar::Rat(r.recip()))
                }
            }
            Scalar::Sym(m) if m.len() == 1 => {
                let (mono, c) = m.iter().next().unwrap();
                let (inv, factor) =
                    mono.pow(&Exp::from_integer(-1)).expect("integer exponents stay integral");
                Ok(Self::from_map([(inv, factor * c.recip())].into_iter().collect()))
            }
            Scalar::Sym(_) => self.float_fallback(|v| 1.0 / v, "reciprocal of a symbolic sum"),
            Scalar::Float { value, err } => {
                if *value == 0.0 {
                    return Err(Error::DivisionByZero);
                }
                let v = 1.0 / value;
                let e = if *err >= value.abs() {
                    f64::INFINITY
                } else {
                    err / (value.abs() * (value.abs() - err)) + v.abs() * f64::EPSILON
                };
                Ok(Scalar::float(v, e))
            }
        }
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.recip()?)
    }

    fn float_fallback(&self, f: impl Fn(f64) -> f64, what: &str) -> Result<Self> {
        if config::float_mode() {
            let (v, e) = self.as_float();
            let y = f(v);
            let slope = ((f(v + e) - y).abs()).max((f(v - e) - y).abs());
            Ok(Scalar::float(y, slope + y.abs() * 4.0 * f64::EPSILON))
        } else {
            Err(Error::Representation(format!("{what}: {self}")))
        }
    }

    pub fn powi(&self, n: i64) -> Result<Self> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut acc = Scalar::one();
        let mut base = self.clone();
        let mut e = n as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        Ok(acc)
    }

    /// `self^q` for rational `q`, exact when the result is representable.
    pub fn pow_rational(&self, q: &Rational) -> Result<Self> {
        if q.is_integer() {
            let n = q
                .to_integer()
                .to_i64()
                .ok_or(Error::Resource { what: "exponent size", cap: i64::MAX as usize })?;
            return self.powi(n);
        }
        let qe = match (q.numer().to_i64(), q.denom().to_i64()) {
            (Some(n), Some(d)) => Exp::new(n, d),
            _ => return self.float_fallback(|v| v.powf(rational_to_f64(q)), "power"),
        };
        match self {
            Scalar::Rat(r) => match rational_root(r, q) {
                Some(v) => Ok(Scalar::Rat(v)),
                None => self.float_fallback(|v| v.powf(rational_to_f64(q)), "irrational power"),
            },
            Scalar::Sym(m) if m.len() == 1 => {
                let (mono, c) = m.iter().next().unwrap();
                let root = rational_root(c, q);
                match (mono.pow(&qe), root) {
                    (Some((pm, factor)), Some(rc)) => {
                        Ok(Self::from_map([(pm, factor * rc)].into_iter().collect()))
                    }
                    _ => self.float_fallback(|v| v.powf(rational_to_f64(q)), "irrational power"),
                }
            }
            _ => self.float_fallback(|v| v.powf(rational_to_f64(q)), "power of a symbolic sum"),
        }
    }

    /// `e^self`.
    pub fn exp(&self) -> Result<Self> {
        match self {
            Scalar::Rat(r) => match (r.numer().to_i64(), r.denom().to_i64()) {
                (Some(n), Some(d)) => Ok(Self::constant_pow(Constant::E, Exp::new(n, d))),
                _ => self.float_fallback(f64::exp, "exponential"),
            },
            Scalar::Sym(m) => {
                // Rational part plus a rational multiple of ln(2*pi).
                let ln2pi = ConstMono::single(Constant::Ln2Pi, Exp::one()).0;
                let mut acc = Scalar::one();
                for (mono, c) in m {
                    if mono.is_unit() {
                        acc = &acc * &Scalar::Rat(c.clone()).exp()?;
                    } else if *mono == ln2pi {
                        acc = &acc
                            * &two_pi_pow(c).ok_or_else(|| Error::Representation(format!("(2*pi)^({c})")))?;
                    } else {
                        return self.float_fallback(f64::exp, "exponential of a symbolic sum");
                    }
                }
                Ok(acc)
            }
            Scalar::Float { .. } => self.float_fallback(f64::exp, "exponential"),
        }
    }

    /// Natural logarithm of a positive scalar, exact on `e^a (2 pi)^q`.
    pub fn ln(&self) -> Result<Self> {
        if self.signum() <= 0 {
            return Err(Error::Domain(format!("ln of non-positive {self}")));
        }
        match self {
            Scalar::Rat(r) if r.is_one() => Ok(Scalar::zero()),
            Scalar::Sym(m) if m.len() == 1 => {
                let (mono, c) = m.iter().next().unwrap();
                let ok_registry =
                    mono.exponent(Constant::Ln2Pi).is_zero() && mono.exponent(Constant::Ei1).is_zero();
                let q = mono.exponent(Constant::Pi);
                let q_rat = rat(*q.numer(), *q.denom());
                // c * sqrt(2)^s must equal 2^q.
                let s = mono.exponent(Constant::Sqrt2);
                let expected = if s.is_zero() {
                    rational_pow2(&q_rat)
                } else {
                    rational_pow2(&(q_rat.clone() - rat(1, 2)))
                };
                if ok_registry && expected.as_ref() == Some(c) {
                    let a = mono.exponent(Constant::E);
                    let mut out = Scalar::ratio(*a.numer(), *a.denom());
                    if !q.is_zero() {
                        out = &out + &(&Scalar::Rat(q_rat) * &Scalar::constant(Constant::Ln2Pi));
                    }
                    Ok(out)
                } else {
                    self.float_fallback(f64::ln, "logarithm")
                }
            }
            _ => self.float_fallback(f64::ln, "logarithm"),
        }
    }
}

/// `2^q` when it is rational (q integer).
fn rational_pow2(q: &Rational) -> Option<Rational> {
    if !q.is_integer() {
        return None;
    }
    let n = q.to_integer().to_i64()?;
    let p = num_traits::pow(int(2), n.unsigned_abs() as usize);
    Some(if n >= 0 { p } else { p.recip() })
}

/// `(2 pi)^q` for q in (1/2) Z.
fn two_pi_pow(q: &Rational) -> Option<Scalar> {
    let twice = q * int(2);
    if !twice.is_integer() {
        return None;
    }
    let n = twice.to_integer().to_i64()?;
    let pi = Scalar::constant_pow(Constant::Pi, Exp::new(n, 2));
    let sqrt2 = Scalar::constant_pow(Constant::Sqrt2, Exp::from_integer(n));
    Some(&pi * &sqrt2)
}

/// Exact `r^q` for rational `r >= 0` and rational `q`, if rational.
fn rational_root(r: &Rational, q: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    if r.is_zero() {
        return if q.is_positive() { Some(Rational::zero()) } else { None };
    }
    let d = q.denom().to_u32()?;
    let n = q.numer().to_i64()?;
    let root = |x: &BigInt| -> Option<BigInt> {
        let s = x.nth_root(d);
        if num_traits::pow(s.clone(), d as usize) == *x {
            Some(s)
        } else {
            None
        }
    };
    let base = Rational::new(root(r.numer())?, root(r.denom())?);
    let p = num_traits::pow(base, n.unsigned_abs() as usize);
    Some(if n >= 0 { p } else { p.recip() })
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => a == b,
            (Scalar::Sym(a), Scalar::Sym(b)) => a == b,
            (Scalar::Float { value: a, err: ea }, Scalar::Float { value: b, err: eb }) => {
                a.to_bits() == b.to_bits() && ea.to_bits() == eb.to_bits()
            }
            _ => false,
        }
    }
}

impl Eq for Scalar {}

impl Hash for Scalar {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Scalar::Rat(r) => {
                0u8.hash(state);
                r.hash(state)
            }
            Scalar::Sym(m) => {
                1u8.hash(state);
                m.hash(state)
            }
            Scalar::Float { value, err } => {
                2u8.hash(state);
                value.to_bits().hash(state);
                err.to_bits().hash(state)
            }
        }
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a + b),
            (Scalar::Float { .. }, _) | (_, Scalar::Float { .. }) => {
                let (a, ea) = self.as_float();
                let (b, eb) = rhs.as_float();
                let v = a + b;
                Scalar::float(v, ea + eb + v.abs() * f64::EPSILON)
            }
            _ => {
                let mut m = self.to_map();
                for (k, c) in rhs.to_map() {
                    *m.entry(k).or_insert_with(Rational::zero) += c;
                }
                Scalar::from_map(m)
            }
        }
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a * b),
            (Scalar::Float { .. }, _) | (_, Scalar::Float { .. }) => {
                let (a, ea) = self.as_float();
                let (b, eb) = rhs.as_float();
                let v = a * b;
                Scalar::float(v, a.abs() * eb + b.abs() * ea + ea * eb + v.abs() * f64::EPSILON)
            }
            _ => {
                let mut m: BTreeMap<ConstMono, Rational> = BTreeMap::new();
                for (ka, ca) in self.to_map() {
                    for (kb, cb) in rhs.to_map() {
                        let (k, factor) = ka.mul(&kb);
                        *m.entry(k).or_insert_with(Rational::zero) += &ca * &cb * factor;
                    }
                }
                Scalar::from_map(m)
            }
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Rat(r) => Scalar::Rat(-r),
            Scalar::Sym(m) => Scalar::Sym(m.iter().map(|(k, c)| (k.clone(), -c)).collect()),
            Scalar::Float { value, err } => Scalar::float(-value, *err),
        }
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &(-rhs)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl From<Rational> for Scalar {
    fn from(r: Rational) -> Self {
        Scalar::Rat(r)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rat(r) => write!(f, "{r}"),
            Scalar::Float { value, err } => write!(f, "{value:e}±{err:.1e}"),
            Scalar::Sym(m) => {
                let mut first = true;
                for (mono, c) in m {
                    let neg = c.is_negative();
                    let mag = c.abs();
                    if first {
                        if neg {
                            f.write_str("-")?;
                        }
                    } else {
                        f.write_str(if neg { " - " } else { " + " })?;
                    }
                    first = false;
                    if mono.is_unit() {
                        write!(f, "{mag}")?;
                    } else if mag.is_one() {
                        write!(f, "{mono}")?;
                    } else {
                        write!(f, "{mag}*{mono}")?;
                    }
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Scalar {
    type Err = Error;

    /// Parses the output of `Display`: rationals, registry products and
    /// sums of them, or `value±err` floats.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((v, e)) = s.split_once('±') {
            let value = v.trim().parse::<f64>().map_err(|e| Error::Parse(e.to_string()))?;
            let err = e.trim().parse::<f64>().map_err(|e| Error::Parse(e.to_string()))?;
            return Ok(Scalar::float(value, err));
        }
        let mut p = ScalarParser { src: s.as_bytes(), pos: 0 };
        let v = p.sum()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(Error::Parse(format!("trailing input in scalar {s:?}")));
        }
        Ok(v)
    }
}

struct ScalarParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl ScalarParser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(tok.as_bytes()) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Scalar> {
        let mut neg = self.eat("-");
        let mut acc = Scalar::zero();
        loop {
            let t = self.product()?;
            acc = if neg { &acc - &t } else { &acc + &t };
            if self.eat("+") {
                neg = false;
            } else if self.eat("-") {
                neg = true;
            } else {
                return Ok(acc);
            }
        }
    }

    fn product(&mut self) -> Result<Scalar> {
        let mut acc = self.factor()?;
        while self.eat("*") {
            let f = self.factor()?;
            acc = &acc * &f;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Scalar> {
        self.skip_ws();
        for c in Constant::ALL {
            if self.eat(c.name()) {
                let e = if self.eat("^") { self.exponent()? } else { Exp::one() };
                if !c.rational_exponents() && !e.is_integer() {
                    return Err(Error::Parse(format!("{} needs an integer exponent", c.name())));
                }
                return Ok(Scalar::constant_pow(c, e));
            }
        }
        let r = self.rational()?;
        Ok(Scalar::Rat(r))
    }

    fn exponent(&mut self) -> Result<Exp> {
        let paren = self.eat("(");
        let neg = self.eat("-");
        let r = self.rational()?;
        if paren && !self.eat(")") {
            return Err(Error::Parse("expected ')'".into()));
        }
        let n = r.numer().to_i64().ok_or_else(|| Error::Parse("exponent too large".into()))?;
        let d = r.denom().to_i64().ok_or_else(|| Error::Parse("exponent too large".into()))?;
        Ok(if neg { -Exp::new(n, d) } else { Exp::new(n, d) })
    }

    fn digits(&mut self) -> Option<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).ok()?.parse().ok()
    }

    fn rational(&mut self) -> Result<Rational> {
        let n =
            self.digits().ok_or_else(|| Error::Parse(format!("expected a number at byte {}", self.pos)))?;
        // A '/' directly followed by digits is part of the rational literal.
        let save = self.pos;
        if self.eat("/") {
            if let Some(d) = self.digits() {
                if d.is_zero() {
                    return Err(Error::DivisionByZero);
                }
                return Ok(Rational::new(n, d));
            }
            self.pos = save;
        }
        Ok(Rational::from_integer(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_field_ops() {
        let a = Scalar::ratio(3, 2);
        let b = Scalar::ratio(-1, 3);
        assert_eq!(&a + &b, Scalar::ratio(7, 6));
        assert_eq!(&a * &b, Scalar::ratio(-1, 2));
        assert_eq!(a.checked_div(&b).unwrap(), Scalar::ratio(-9, 2));
        assert_eq!(Scalar::zero().recip(), Err(Error::DivisionByZero));
    }

    #[test]
    fn constants_merge_exponents() {
        let e = Scalar::constant(Constant::E);
        let e2 = &e * &e;
        assert_eq!(e2, Scalar::constant_pow(Constant::E, Exp::from_integer(2)));
        assert_eq!(&e2 * &e.powi(-2).unwrap(), Scalar::one());
        let s2 = Scalar::constant(Constant::Sqrt2);
        assert_eq!(&s2 * &s2, Scalar::from_int(2));
    }

    #[test]
    fn exp_and_ln_of_registry_values() {
        assert_eq!(Scalar::one().exp().unwrap(), Scalar::constant(Constant::E));
        let half_ln2pi = &Scalar::ratio(1, 2) * &Scalar::constant(Constant::Ln2Pi);
        let root = half_ln2pi.exp().unwrap();
        assert!((root.to_f64() - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-14);
        assert_eq!(root.ln().unwrap(), half_ln2pi);
        let e3 = Scalar::constant_pow(Constant::E, Exp::new(3, 2));
        assert_eq!(e3.ln().unwrap(), Scalar::ratio(3, 2));
        assert!(matches!(Scalar::from_int(3).ln(), Err(Error::Representation(_))));
        assert!(matches!(Scalar::from_int(-3).ln(), Err(Error::Domain(_))));
    }

    #[test]
    fn rational_powers() {
        assert_eq!(Scalar::ratio(4, 9).pow_rational(&rat(1, 2)).unwrap(), Scalar::ratio(2, 3));
        assert_eq!(Scalar::ratio(8, 1).pow_rational(&rat(-2, 3)).unwrap(), Scalar::ratio(1, 4));
        assert!(Scalar::from_int(2).pow_rational(&rat(1, 2)).is_err());
    }

    #[test]
    fn symbolic_sign_and_display_roundtrip() {
        let s = &Scalar::constant(Constant::E) - &Scalar::from_int(3);
        assert_eq!(s.signum(), -1);
        for x in [
            s.clone(),
            Scalar::ratio(-7, 2),
            &Scalar::ratio(1, 2) * &Scalar::constant(Constant::Ln2Pi),
            &Scalar::constant(Constant::Sqrt2) * &Scalar::constant_pow(Constant::Pi, Exp::new(1, 2)),
            -&Scalar::constant(Constant::Ei1),
        ] {
            let text = x.to_string();
            assert_eq!(text.parse::<Scalar>().unwrap(), x, "{text}");
        }
    }

    #[test]
    fn float_mode_carries_bounds() {
        let f = &Scalar::float(1.0, 1e-10) + &Scalar::ratio(1, 3);
        assert!(f.error_bound() >= 1e-10);
        let g = &f * &Scalar::from_int(2);
        assert!(g.error_bound() >= 2e-10);
    }
}
