//! Evaluation of parsed expressions.
//!
//! Expressions in `w` evaluate to surreal normal forms (possibly infinite,
//! kept lazily), expressions in `x` to transseries. An `O(..)` marker turns
//! a surreal value into an [`Expansion`] with explicit tails.

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value as Json};
use surreal::genetic::{self, EiValue};
use surreal::scalar::int;
use surreal::special;
use surreal::stream::{factorial, SectoredStream};
use surreal::transseries::{definite_integral, GeneratorSet, Mono, Point, Transseries};
use surreal::{Constant, Error, Rational, Result, Scalar, Surreal};

use crate::expansion::Expansion;
use crate::parse::{BinOp, Expr, Func};

/// Error constant used for the genetic `Ei` at surreal points.
pub fn ei_constant() -> Scalar {
    Scalar::ratio(354, 100)
}

#[derive(Clone, Debug)]
pub struct Options {
    /// Terms shown per sector, and terms summed by `sum`.
    pub truncate: usize,
    /// Allow error-bounded floats where no exact value exists.
    pub float: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options { truncate: 8, float: false }
    }
}

#[derive(Clone, Debug)]
pub enum Value {
    Num(SectoredStream),
    Trunc(Expansion),
    Series(Transseries),
}

fn unsupported<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Unsupported(msg.into()))
}

impl Value {
    pub fn nf(x: Surreal) -> Value {
        Value::Num(SectoredStream::from_nf(x))
    }

    fn scalar(c: Scalar) -> Value {
        Value::nf(Surreal::from_scalar(c))
    }

    /// The value as a finite normal form without exponential factors.
    pub fn as_nf(&self) -> Option<Surreal> {
        match self {
            Value::Num(s) if s.is_zero() => Some(Surreal::zero()),
            Value::Num(s) => {
                let t = s.single()?;
                if t.atom().is_zero() {
                    t.as_finite().cloned()
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn as_real(&self) -> Option<Scalar> {
        self.as_nf().and_then(|x| x.as_scalar())
    }

    fn as_rational(&self) -> Option<Rational> {
        self.as_real().and_then(|c| c.as_rational().cloned())
    }

    fn as_series(&self) -> Result<Transseries> {
        match self {
            Value::Series(t) => Ok(t.clone()),
            Value::Trunc(e) => order_in_x(e),
            _ => match self.as_real() {
                Some(c) => Ok(Transseries::constant(c)),
                None => unsupported("mixing surreal values with the variable x"),
            },
        }
    }

    fn as_expansion(&self, n: usize) -> Result<Expansion> {
        match self {
            Value::Num(s) => Expansion::from_stream(s, n),
            Value::Trunc(e) => Ok(e.clone()),
            Value::Series(_) => unsupported("mixing surreal values with the variable x"),
        }
    }

    pub fn render(&self, n: usize) -> Result<String> {
        Ok(match self {
            Value::Num(s) => s.render(n, true)?,
            Value::Trunc(e) => e.render(n),
            Value::Series(t) => shorten(t, n).to_string(),
        })
    }

    pub fn to_json(&self, n: usize) -> Result<Json> {
        let text = self.render(n)?;
        Ok(match self {
            Value::Series(t) => json!({
                "kind": "transseries",
                "text": text,
                "series": shorten(t, n).to_json(),
            }),
            _ => {
                let e = self.as_expansion(n)?;
                let sectors: Vec<Json> = e
                    .sectors()
                    .map(|(atom, part)| {
                        let terms = part.body.terms();
                        let (terms, tail) = if terms.len() > n {
                            (&terms[..n], Some(terms[n].0.clone()))
                        } else {
                            (terms, part.tail.clone())
                        };
                        json!({
                            "atom": atom.to_json(),
                            "terms": terms.iter().map(|(y, c)| json!({
                                "exp": y.to_json(),
                                "coeff": c.to_string(),
                            })).collect::<Vec<_>>(),
                            "tail": tail.map(|t| t.to_json()),
                        })
                    })
                    .collect();
                json!({ "kind": "surreal", "text": text, "sectors": sectors })
            }
        })
    }
}

/// At most `n` terms, lowest degree first, with the cut moved to the first
/// dropped one.
fn shorten(t: &Transseries, n: usize) -> Transseries {
    if t.len() <= n {
        return t.clone();
    }
    let mut terms: Vec<(Mono, Scalar)> = t.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
    terms.sort_by_key(|(m, _)| t.degree(m));
    let cut = t.degree(&terms[n].0);
    terms.truncate(n);
    Transseries::from_terms(t.generators().clone(), terms, Some(cut))
}

fn min_cut(a: Option<&Rational>, b: Option<Rational>) -> Option<Rational> {
    match (a.cloned(), b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Exact value of a decimal literal such as `1.25e-3`.
pub fn decimal(text: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("malformed number {text}"));
    let (mant, exp) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (text, 0),
    };
    let (int_part, frac) = mant.split_once('.').unwrap_or((mant, ""));
    let digits = format!("{int_part}{frac}");
    let n: num_bigint::BigInt =
        if digits.is_empty() { return Err(bad()) } else { digits.parse().map_err(|_| bad())? };
    let shift = exp - frac.len() as i32;
    let ten = Rational::from_integer(10.into());
    let scale = num_traits::pow(ten, shift.unsigned_abs() as usize);
    let v = Rational::from_integer(n);
    Ok(if shift >= 0 { v * scale } else { v / scale })
}

struct Env<'a> {
    opts: &'a Options,
    vars: Vec<(String, Value)>,
}

/// Evaluates an expression.
pub fn eval(e: &Expr, opts: &Options) -> Result<Value> {
    Env { opts, vars: Vec::new() }.eval(e)
}

impl Env<'_> {
    fn eval(&mut self, e: &Expr) -> Result<Value> {
        match e {
            Expr::Num(s) => Ok(Value::nf(Surreal::from_rational(decimal(s)?))),
            Expr::Float(v, err) => {
                let v = v.parse::<f64>().map_err(|e| Error::Parse(e.to_string()))?;
                let err = err.parse::<f64>().map_err(|e| Error::Parse(e.to_string()))?;
                Ok(Value::scalar(Scalar::float(v, err)))
            }
            Expr::Name(n) => self.name(n),
            Expr::Neg(a) => Ok(neg(&self.eval(a)?)),
            Expr::Bin(op, a, b) => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                let n = self.opts.truncate;
                match op {
                    BinOp::Add => add(&a, &b, n),
                    BinOp::Sub => add(&a, &neg(&b), n),
                    BinOp::Mul => mul(&a, &b, n),
                    BinOp::Div => mul(&a, &recip(&b, n)?, n),
                }
            }
            Expr::Pow(a, b) => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                pow(&a, &b, self.opts.truncate)
            }
            Expr::Fact(a) => {
                let v = self.eval(a)?;
                let k = v
                    .as_rational()
                    .filter(|q| q.is_integer() && !q.is_negative())
                    .and_then(|q| q.to_integer().to_usize())
                    .ok_or_else(|| Error::Domain("factorial needs a non-negative integer".into()))?;
                if k > 100_000 {
                    return Err(Error::Resource { what: "factorial argument", cap: 100_000 });
                }
                Ok(Value::nf(Surreal::from_rational(factorial(k))))
            }
            Expr::Call(f, args) => self.call(*f, args),
            Expr::Bracket(l, r) => {
                let side = |env: &mut Self, xs: &[Expr]| -> Result<Vec<Surreal>> {
                    xs.iter()
                        .map(|x| {
                            env.eval(x)?.as_nf().ok_or_else(|| {
                                Error::Unsupported("bracket options must be finite normal forms".into())
                            })
                        })
                        .collect()
                };
                let (l, r) = (side(self, l)?, side(self, r)?);
                Ok(Value::nf(genetic::GeneticBracket::new(l, r)?.resolve()?))
            }
            Expr::Sum { var, from, body } => self.sum(var, from, body),
        }
    }

    fn name(&self, n: &str) -> Result<Value> {
        if let Some((_, v)) = self.vars.iter().rev().find(|(name, _)| name == n) {
            return Ok(v.clone());
        }
        Ok(match n {
            "w" => Value::nf(Surreal::omega()),
            "x" => Value::Series(Transseries::x()),
            "e" => Value::scalar(Scalar::constant(Constant::E)),
            "pi" => Value::scalar(Scalar::constant(Constant::Pi)),
            _ => return unsupported(format!("unknown name {n}")),
        })
    }

    fn call(&mut self, f: Func, args: &[Expr]) -> Result<Value> {
        let n = self.opts.truncate;
        if f == Func::Integrate {
            let g = self.eval(&args[0])?.as_series()?;
            let point = |env: &mut Self, e: &Expr| -> Result<Point> {
                let v = env.eval(e)?;
                let x = v
                    .as_nf()
                    .ok_or_else(|| Error::Unsupported("integration endpoints must be normal forms".into()))?;
                Point::from_surreal(&x)
            };
            let (a, b) = (point(self, &args[1])?, point(self, &args[2])?);
            return Ok(Value::Num(definite_integral(&g, &a, &b)?));
        }
        let v = self.eval(&args[0])?;
        match f {
            Func::Exp => exp(&v),
            Func::Ln => ln(&v),
            Func::Sqrt => sqrt(&v, n),
            Func::Ei => self.ei(&v),
            Func::Stirling => {
                if v.as_nf() == Some(Surreal::omega()) {
                    let s = special::stirling_at_omega()?;
                    Ok(Value::Num(SectoredStream::from_stream(s.series.scale(&s.factor).with_atom(s.atom))))
                } else {
                    unsupported("stirling is available at w only")
                }
            }
            Func::Lngamma => match &v {
                Value::Series(t) if *t == Transseries::x() => {
                    Ok(Value::Series(special::lngamma_transseries(n)))
                }
                _ if v.as_nf() == Some(Surreal::omega()) => {
                    Ok(Value::Num(SectoredStream::from_stream(special::lngamma_at_omega()?)))
                }
                _ => unsupported("lngamma is available at w and x only"),
            },
            Func::Order => order(&v),
            Func::Integrate => unreachable!(),
        }
    }

    fn ei(&self, v: &Value) -> Result<Value> {
        if let Value::Series(t) = v {
            if *t == Transseries::x() {
                return Ok(Value::Series(special::ei_transseries(self.opts.truncate)));
            }
            return unsupported("ei of a transseries other than x");
        }
        let x = v
            .as_nf()
            .ok_or_else(|| Error::Unsupported("ei of an expansion with exponential factors".into()))?;
        if x == Surreal::one() {
            return Ok(Value::scalar(Scalar::constant(Constant::Ei1)));
        }
        match genetic::genetic_ei(&x, &ei_constant())? {
            EiValue::Stream(s) => Ok(Value::Num(SectoredStream::from_stream(s))),
            EiValue::Interval { midpoint, radius } => {
                if !self.opts.float {
                    return Err(Error::Representation(format!(
                        "Ei({x}) has no exact form; the genetic value is {midpoint} ± {radius:.3e} (use --float)"
                    )));
                }
                let q = x.as_rational().expect("real argument");
                let v = special::fixed::to_f64(&special::fixed::ei(&q));
                Ok(Value::scalar(Scalar::float(v, v.abs() * 4.0 * f64::EPSILON)))
            }
        }
    }

    fn sum(&mut self, var: &str, from: &Expr, body: &Expr) -> Result<Value> {
        let start = self
            .eval(from)?
            .as_rational()
            .filter(|q| q.is_integer())
            .and_then(|q| q.to_integer().to_i64())
            .ok_or_else(|| Error::Domain("summation must start at an integer".into()))?;
        let n = self.opts.truncate;
        let mut acc = Value::nf(Surreal::zero());
        let mut next = None;
        for j in 0..=n as i64 {
            self.vars.push((var.to_string(), Value::nf(Surreal::from_int(start + j))));
            let term = self.eval(body);
            self.vars.pop();
            let term = term?;
            if j == n as i64 {
                next = Some(term);
            } else {
                acc = add(&acc, &term, n)?;
            }
        }
        let next = next.expect("loop runs n + 1 times");
        match (&acc, &next) {
            (Value::Series(_), _) | (_, Value::Series(_)) => {
                let (a, b) = (acc.as_series()?, next.as_series()?);
                if b.is_zero() {
                    return Ok(Value::Series(a));
                }
                let both = a.add(&b)?;
                let cut = b.terms().map(|(m, _)| both.degree(m)).min();
                let terms: Vec<_> = a.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
                Ok(Value::Series(Transseries::from_terms(
                    both.generators().clone(),
                    terms,
                    min_cut(a.cut(), cut),
                )))
            }
            _ => {
                let tail = next.as_expansion(n)?;
                if tail == Expansion::default() {
                    return Ok(acc);
                }
                let mut out = acc.as_expansion(n)?;
                for (atom, part) in tail.sectors() {
                    if let Some(l) = part.lead() {
                        out = out.add(&Expansion::order(atom.clone(), l));
                    }
                }
                Ok(Value::Trunc(out))
            }
        }
    }
}

fn neg(v: &Value) -> Value {
    match v {
        Value::Num(s) => Value::Num(s.neg()),
        Value::Trunc(e) => Value::Trunc(e.scale(&Scalar::from_int(-1))),
        Value::Series(t) => Value::Series(t.neg()),
    }
}

fn add(a: &Value, b: &Value, n: usize) -> Result<Value> {
    Ok(match (a, b) {
        (Value::Series(_), _) | (_, Value::Series(_)) => Value::Series(a.as_series()?.add(&b.as_series()?)?),
        (Value::Num(x), Value::Num(y)) => Value::Num(x.add(y)?),
        _ => Value::Trunc(a.as_expansion(n)?.add(&b.as_expansion(n)?)),
    })
}

fn mul(a: &Value, b: &Value, n: usize) -> Result<Value> {
    if let Some(c) = b.as_real() {
        return scale(a, &c);
    }
    if let Some(c) = a.as_real() {
        return scale(b, &c);
    }
    Ok(match (a, b) {
        (Value::Series(_), _) | (_, Value::Series(_)) => Value::Series(a.as_series()?.mul(&b.as_series()?)?),
        (Value::Num(x), Value::Num(y)) => Value::Num(x.mul(y)?),
        _ => Value::Trunc(a.as_expansion(n)?.mul(&b.as_expansion(n)?)),
    })
}

fn scale(v: &Value, c: &Scalar) -> Result<Value> {
    Ok(match v {
        Value::Num(s) => Value::Num(s.scale(c)),
        Value::Trunc(e) => Value::Trunc(e.scale(c)),
        Value::Series(t) => Value::Series(t.scale(c)),
    })
}

/// Reads a real `a + O(w^y)` as `a + O(x^y)`, so that printed transseries
/// with constant tails such as `O(1)` parse back.
fn order_in_x(e: &Expansion) -> Result<Transseries> {
    let mixed = || Error::Unsupported("mixing surreal values with the variable x".into());
    let sectors: Vec<_> = e.sectors().collect();
    let [(atom, part)] = sectors[..] else { return Err(mixed()) };
    let tail = part.tail.as_ref().and_then(|y| y.as_rational()).ok_or_else(mixed)?;
    if !atom.is_zero() {
        return Err(mixed());
    }
    let mono = |p: Rational| Mono { w: Rational::zero(), p, m: 0 };
    let mut terms = Vec::new();
    for (y, c) in part.body.terms() {
        terms.push((mono(y.as_rational().ok_or_else(mixed)?), c.clone()));
    }
    let gens = GeneratorSet::empty();
    let cut = Transseries::from_terms(gens.clone(), [], None).degree(&mono(tail));
    Ok(Transseries::from_terms(gens, terms, Some(cut)))
}

fn single_monomial(t: &Transseries) -> Option<(Mono, Scalar)> {
    if t.len() == 1 && t.is_exact() {
        t.dominant().map(|(m, c)| (m.clone(), c.clone()))
    } else {
        None
    }
}

fn recip(v: &Value, n: usize) -> Result<Value> {
    if let Some(c) = v.as_real() {
        return Ok(Value::scalar(c.recip()?));
    }
    match v {
        Value::Num(s) => match s.single() {
            Some(t) => Ok(Value::Num(SectoredStream::from_stream(t.inverse()?))),
            None if s.is_zero() => Err(Error::DivisionByZero),
            None => unsupported("reciprocal of a sum over several exponential sectors"),
        },
        Value::Series(t) => {
            if let Some((m, c)) = single_monomial(t) {
                if m.m == 0 {
                    let inv = Mono::new(-&m.w, -&m.p, 0);
                    return Ok(Value::Series(Transseries::monomial(inv, c.recip()?)));
                }
            }
            let (m, _) = t.dominant().ok_or(Error::DivisionByZero)?;
            let cut = -t.degree(m) + int(n as i64);
            Ok(Value::Series(t.inverse(cut)?))
        }
        Value::Trunc(_) => unsupported("division by a truncated expansion"),
    }
}

fn integer_power(v: &Value, k: i64, n: usize) -> Result<Value> {
    if k.unsigned_abs() > 1000 {
        return Err(Error::Resource { what: "integer power", cap: 1000 });
    }
    let base = if k < 0 { recip(v, n)? } else { v.clone() };
    let mut acc = Value::nf(Surreal::one());
    for _ in 0..k.unsigned_abs() {
        acc = mul(&acc, &base, n)?;
    }
    Ok(acc)
}

fn pow(a: &Value, b: &Value, n: usize) -> Result<Value> {
    if a.as_nf() == Some(Surreal::omega()) {
        let y = b.as_nf().ok_or_else(|| Error::Unsupported("w^y needs a finite normal form y".into()))?;
        return Ok(Value::nf(Surreal::omega_pow(y)));
    }
    let q = b
        .as_rational()
        .ok_or_else(|| Error::Unsupported("exponents other than w^y must be rational".into()))?;
    if let Some(c) = a.as_real() {
        return Ok(Value::scalar(c.pow_rational(&q)?));
    }
    if q.is_integer() {
        let k = q.to_integer().to_i64().ok_or(Error::Resource { what: "integer power", cap: 1000 })?;
        return integer_power(a, k, n);
    }
    match a {
        Value::Num(s) => match s.single() {
            Some(t) => Ok(Value::Num(SectoredStream::from_stream(t.pow_rational(&q)?))),
            None => unsupported("fractional power of a sum over several exponential sectors"),
        },
        Value::Series(t) => {
            let (m, c) = single_monomial(t).ok_or_else(|| {
                Error::Unsupported("fractional power of a transseries with several terms".into())
            })?;
            let logs = int(m.m as i64) * &q;
            let logs = logs
                .is_integer()
                .then(|| logs.to_integer().to_u32())
                .flatten()
                .ok_or_else(|| Error::Unsupported("fractional power of ln(x)".into()))?;
            let mono = Mono::new(&m.w * &q, &m.p * &q, logs);
            Ok(Value::Series(Transseries::monomial(mono, c.pow_rational(&q)?)))
        }
        Value::Trunc(_) => unsupported("fractional power of a truncated expansion"),
    }
}

fn exp(v: &Value) -> Result<Value> {
    match v {
        Value::Num(s) => match s.single() {
            Some(t) => Ok(Value::Num(SectoredStream::from_stream(t.exp()?))),
            None if s.is_zero() => Ok(Value::nf(Surreal::one())),
            None => unsupported("exponential of a sum over several exponential sectors"),
        },
        Value::Series(t) => {
            let x = Mono::new(Rational::zero(), Rational::one(), 0);
            let mut rate = Rational::zero();
            let mut constant = Scalar::zero();
            for (m, c) in t.terms() {
                if *m == x {
                    rate = c
                        .as_rational()
                        .cloned()
                        .ok_or_else(|| Error::Unsupported("exp(a*x) needs a rational rate a".into()))?;
                } else if *m == Mono::one() {
                    constant = c.clone();
                } else {
                    return unsupported(format!("exp of the transseries {t}"));
                }
            }
            if !t.is_exact() {
                return unsupported("exp of a truncated transseries");
            }
            let base = if rate.is_zero() {
                Transseries::constant(Scalar::one())
            } else {
                Transseries::exp_linear(rate)
            };
            Ok(Value::Series(base.scale(&constant.exp()?)))
        }
        Value::Trunc(_) => unsupported("exp of a truncated expansion"),
    }
}

fn ln(v: &Value) -> Result<Value> {
    match v {
        Value::Num(s) => match s.single() {
            Some(t) => Ok(Value::Num(SectoredStream::from_stream(t.ln()?))),
            None if s.is_zero() => Err(Error::Domain("ln 0".into())),
            None => unsupported("ln of a sum over several exponential sectors"),
        },
        Value::Series(t) => match single_monomial(t) {
            Some((m, c)) if m.w.is_zero() && m.m == 0 => {
                let logs = Transseries::ln_x().scale(&Scalar::Rat(m.p.clone()));
                Ok(Value::Series(logs.add(&Transseries::constant(c.ln()?))?))
            }
            _ => unsupported(format!("ln of the transseries {t}")),
        },
        Value::Trunc(_) => unsupported("ln of a truncated expansion"),
    }
}

fn sqrt(v: &Value, n: usize) -> Result<Value> {
    if let Some(r) = v.as_rational() {
        let half = Rational::new(1.into(), 2.into());
        if let Ok(c) = Scalar::Rat(r.clone()).pow_rational(&half) {
            return Ok(Value::scalar(c));
        }
        // r = 2 s^2 gives s sqrt(2).
        if let Ok(s) = Scalar::Rat(r / int(2)).pow_rational(&half) {
            return Ok(Value::scalar(&s * &Scalar::constant(Constant::Sqrt2)));
        }
    }
    pow(v, &Value::nf(Surreal::from_rational(Rational::new(1.into(), 2.into()))), n)
}

fn order(v: &Value) -> Result<Value> {
    match v {
        Value::Series(t) => {
            let (m, _) = single_monomial(t)
                .ok_or_else(|| Error::Unsupported("O(..) needs a single monomial".into()))?;
            Ok(Value::Series(Transseries::from_terms(t.generators().clone(), [], Some(t.degree(&m)))))
        }
        Value::Num(s) => {
            let t = s.single().filter(|t| t.as_finite().is_some_and(|x| x.len() == 1));
            let t = t.ok_or_else(|| Error::Unsupported("O(..) needs a single monomial".into()))?;
            let y = t.as_finite().unwrap().terms()[0].0.clone();
            Ok(Value::Trunc(Expansion::order(t.atom().clone(), y)))
        }
        Value::Trunc(_) => unsupported("O(..) of a truncated expansion"),
    }
}
