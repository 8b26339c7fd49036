//! Lazy grid-based normal forms.
//!
//! A [`TermStream`] stands for `e^A * S` where `A` is a purely infinite
//! normal form (the *atom*, possibly 0) and `S` is a normal form that may
//! have infinitely many terms. `S` is known through a generator that, for
//! any threshold `t`, returns exactly the terms of `S` with exponent above
//! `t`. The support certificate is an upper bound `lead` on the exponents
//! together with negative generators; grid level `N` is the threshold
//! `lead + N * step` with `step` the largest generator.
//!
//! Atoms are independent symbols: `e^A` is never rewritten as a power of
//! `w`. Streams with different atoms live side by side in a
//! [`SectoredStream`], ordered by atom first.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::config;
use crate::error::{Error, Result};
use crate::nf::Surreal;
use crate::scalar::{int, Rational, Scalar};

type Generator = dyn Fn(&Surreal) -> Result<Surreal> + Send + Sync;

/// Coefficient sequence `k -> c_k` of a one-variable series.
pub type Coeffs = Arc<dyn Fn(usize) -> Scalar + Send + Sync>;

enum Body {
    Finite(Surreal),
    Lazy(Box<Generator>),
}

struct Inner {
    lead: Option<Surreal>,
    gens: Vec<Surreal>,
    body: Body,
    memo: Mutex<Option<(Surreal, Surreal)>>,
}

/// Leading terms and the exponent of the first uncertified term.
pub type KnownTerms = (Vec<(Surreal, Scalar)>, Option<Surreal>);

#[derive(Clone)]
pub struct TermStream {
    atom: Surreal,
    inner: Arc<Inner>,
}

impl fmt::Debug for TermStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TermStream")
            .field("atom", &self.atom.to_string())
            .field("lead", &self.inner.lead.as_ref().map(|l| l.to_string()))
            .field("finite", &self.is_finite())
            .finish()
    }
}

fn minus_one() -> Surreal {
    Surreal::from_int(-1)
}

fn push_gen(gens: &mut Vec<Surreal>, g: Surreal) {
    if g.signum() < 0 && !gens.contains(&g) {
        gens.push(g);
    }
}

impl TermStream {
    pub fn zero() -> Self {
        Self::finite(Surreal::zero())
    }

    pub fn one() -> Self {
        Self::finite(Surreal::one())
    }

    pub fn finite(x: Surreal) -> Self {
        let lead = x.leading_exponent().cloned();
        let mut gens = Vec::new();
        if let Some(l) = &lead {
            for (e, _) in x.terms().iter().skip(1) {
                push_gen(&mut gens, e - l);
            }
        }
        TermStream {
            atom: Surreal::zero(),
            inner: Arc::new(Inner { lead, gens, body: Body::Finite(x), memo: Mutex::new(None) }),
        }
    }

    /// A stream from a generator returning all terms above a threshold.
    /// `lead` must bound every exponent; `gens` are negative grid steps.
    pub fn lazy<F>(lead: Option<Surreal>, gens: Vec<Surreal>, f: F) -> Self
    where
        F: Fn(&Surreal) -> Result<Surreal> + Send + Sync + 'static,
    {
        let mut clean = Vec::new();
        for g in gens {
            push_gen(&mut clean, g);
        }
        TermStream {
            atom: Surreal::zero(),
            inner: Arc::new(Inner {
                lead,
                gens: clean,
                body: Body::Lazy(Box::new(f)),
                memo: Mutex::new(None),
            }),
        }
    }

    /// `sum_k c_k w^{lead + k step}` for `step < 0`.
    pub fn power_series(lead: Surreal, step: Surreal, coeffs: Coeffs) -> Self {
        assert!(step.signum() < 0, "power_series needs a negative step");
        let (l, s) = (lead.clone(), step.clone());
        Self::lazy(Some(lead), vec![step], move |t| {
            let mut out = Vec::new();
            let mut e = l.clone();
            let mut k = 0usize;
            while &e > t {
                if k >= config::term_cap() {
                    return Err(Error::Resource { what: "series terms", cap: config::term_cap() });
                }
                out.push((e.clone(), coeffs(k)));
                e = &e + &s;
                k += 1;
            }
            Ok(Surreal::from_terms(out))
        })
    }

    pub fn with_atom(mut self, atom: Surreal) -> Self {
        self.atom = atom;
        self
    }

    pub fn atom(&self) -> &Surreal {
        &self.atom
    }

    pub fn lead(&self) -> Option<&Surreal> {
        self.inner.lead.as_ref()
    }

    pub fn generators(&self) -> &[Surreal] {
        &self.inner.gens
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.inner.body, Body::Finite(_))
    }

    pub fn as_finite(&self) -> Option<&Surreal> {
        match &self.inner.body {
            Body::Finite(x) => Some(x),
            Body::Lazy(_) => None,
        }
    }

    /// Known to be zero (a lazy stream may still turn out to vanish).
    pub fn is_zero(&self) -> bool {
        self.inner.lead.is_none() || self.as_finite().is_some_and(Surreal::is_zero)
    }

    /// Finest grid step: the largest generator, or -1 without generators.
    pub fn step(&self) -> Surreal {
        self.inner.gens.iter().max().cloned().unwrap_or_else(minus_one)
    }

    /// Coarsest grid step, used to scan for terms.
    pub fn coarse_step(&self) -> Surreal {
        let m = self.inner.gens.iter().min().cloned().unwrap_or_else(minus_one);
        if m > minus_one() {
            minus_one()
        } else {
            m
        }
    }

    /// Threshold of grid level `n`: `lead + n * step`.
    pub fn level_threshold(&self, n: usize) -> Option<Surreal> {
        let lead = self.lead()?;
        Some(lead + &self.step().scale_rat(&int(n as i64)))
    }

    /// All terms with exponent strictly above `t`, exact.
    pub fn above(&self, t: &Surreal) -> Result<Surreal> {
        let lead = match &self.inner.lead {
            None => return Ok(Surreal::zero()),
            Some(l) => l,
        };
        match &self.inner.body {
            Body::Finite(x) => Ok(x.above(t)),
            Body::Lazy(f) => {
                if lead <= t {
                    return Ok(Surreal::zero());
                }
                if let Some((mt, mv)) = &*self.inner.memo.lock().unwrap() {
                    if mt <= t {
                        return Ok(mv.above(t));
                    }
                }
                let v = f(t)?;
                if v.len() > config::term_cap() {
                    return Err(Error::Resource { what: "stream terms", cap: config::term_cap() });
                }
                let mut memo = self.inner.memo.lock().unwrap();
                let replace = match &*memo {
                    Some((mt, _)) => t < mt,
                    None => true,
                };
                if replace {
                    *memo = Some((t.clone(), v.clone()));
                }
                Ok(v)
            }
        }
    }

    /// Truncation to grid level `n`.
    pub fn to_level(&self, n: usize) -> Result<Surreal> {
        match self.level_threshold(n) {
            None => Ok(Surreal::zero()),
            Some(t) => self.above(&t),
        }
    }

    /// The first `n` terms; fewer if the stream is finite or the scan
    /// budget runs out before `n` terms appear.
    pub fn terms(&self, n: usize) -> Result<Vec<(Surreal, Scalar)>> {
        if let Some(x) = self.as_finite() {
            return Ok(x.terms().iter().take(n).cloned().collect());
        }
        let lead = match self.lead() {
            None => return Ok(Vec::new()),
            Some(l) => l.clone(),
        };
        let step = self.coarse_step();
        let budget = 4 * n + 64;
        let mut t = lead;
        for _ in 0..budget {
            t = &t + &step;
            let got = self.above(&t)?;
            if got.len() >= n {
                return Ok(got.into_terms().into_iter().take(n).collect());
            }
        }
        Ok(self.above(&t)?.into_terms())
    }

    /// Up to `n` leading terms and the exponent at or below which nothing
    /// was certified (`None` when the listed terms are the whole stream).
    /// When the stream needs more terms, the finer grid levels above the
    /// failing threshold are tried and the lowest certified one is kept.
    pub fn known_terms(&self, n: usize) -> Result<KnownTerms> {
        fn split(x: Surreal, n: usize) -> KnownTerms {
            let mut terms = x.into_terms();
            terms.truncate(n + 1);
            let tail = terms.pop().map(|p| p.0);
            (terms, tail)
        }
        if let Some(x) = self.as_finite() {
            let mut t: Vec<_> = x.terms().iter().take(n + 1).cloned().collect();
            let tail = if t.len() > n { t.pop().map(|p| p.0) } else { None };
            return Ok((t, tail));
        }
        let Some(lead) = self.lead().cloned() else { return Ok((Vec::new(), None)) };
        let step = self.coarse_step();
        let budget = 4 * n + 64;
        let mut t = lead;
        let mut last: Option<(Surreal, Surreal)> = None;
        for _ in 0..budget {
            let next = &t + &step;
            match self.above(&next) {
                Ok(x) if x.len() > n => return Ok(split(x, n)),
                Ok(x) => {
                    last = Some((next.clone(), x));
                    t = next;
                }
                Err(Error::NeedsMoreTerms(m)) => {
                    for level in 1..=budget {
                        let Some(lt) = self.level_threshold(level) else { break };
                        if lt >= t {
                            continue;
                        }
                        if lt <= next {
                            break;
                        }
                        match self.above(&lt) {
                            Ok(x) if x.len() > n => return Ok(split(x, n)),
                            Ok(x) => last = Some((lt, x)),
                            Err(Error::NeedsMoreTerms(_)) => break,
                            Err(e) => return Err(e),
                        }
                    }
                    return match last {
                        Some((t, x)) => Ok((x.into_terms(), Some(t))),
                        None => Err(Error::NeedsMoreTerms(m)),
                    };
                }
                Err(e) => return Err(e),
            }
        }
        Ok((self.above(&t)?.into_terms(), Some(t)))
    }

    /// Coefficient of `w^y`.
    pub fn coeff(&self, y: &Surreal) -> Result<Scalar> {
        let t = y + &self.coarse_step();
        Ok(self.above(&t)?.coeff(y))
    }

    /// First term, searched for within the scan budget.
    pub fn first_term(&self) -> Result<Option<(Surreal, Scalar)>> {
        Ok(self.terms(1)?.into_iter().next())
    }

    /// Same stream with `lead` replaced by the exponent of the first term.
    /// Lazy streams whose first term cannot be found are reported.
    pub fn tighten(&self) -> Result<TermStream> {
        if self.is_finite() {
            return Ok(self.clone());
        }
        match self.first_term()? {
            Some((e, _)) if Some(&e) == self.lead() => Ok(self.clone()),
            Some((e, _)) => {
                let me = self.clone();
                Ok(TermStream::lazy(Some(e), self.inner.gens.clone(), move |t| me.above(t))
                    .with_atom(self.atom.clone()))
            }
            None => Err(Error::NeedsMoreTerms("no term found within the scan budget".into())),
        }
    }

    pub fn neg(&self) -> TermStream {
        self.scale(&Scalar::from_int(-1))
    }

    pub fn scale(&self, c: &Scalar) -> TermStream {
        if c.is_zero() {
            return TermStream::zero().with_atom(self.atom.clone());
        }
        if let Some(x) = self.as_finite() {
            return TermStream::finite(x.scale(c)).with_atom(self.atom.clone());
        }
        let (me, c) = (self.clone(), c.clone());
        TermStream::lazy(self.inner.lead.clone(), self.inner.gens.clone(), move |t| {
            Ok(me.above(t)?.scale(&c))
        })
        .with_atom(self.atom.clone())
    }

    /// Multiplies by `c * w^y`.
    pub fn mul_monomial(&self, y: &Surreal, c: &Scalar) -> TermStream {
        if let Some(x) = self.as_finite() {
            return TermStream::finite(x.mul_monomial(y, c)).with_atom(self.atom.clone());
        }
        let (me, y2, c2) = (self.clone(), y.clone(), c.clone());
        TermStream::lazy(self.inner.lead.as_ref().map(|l| l + y), self.inner.gens.clone(), move |t| {
            Ok(me.above(&(t - &y2))?.mul_monomial(&y2, &c2))
        })
        .with_atom(self.atom.clone())
    }

    pub fn add(&self, other: &TermStream) -> Result<TermStream> {
        if self.atom != other.atom {
            return Err(Error::Unsupported(format!(
                "adding streams with different atoms e^({}) and e^({})",
                self.atom, other.atom
            )));
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(other.clone());
        }
        if let (Some(a), Some(b)) = (self.as_finite(), other.as_finite()) {
            return Ok(TermStream::finite(a + b).with_atom(self.atom.clone()));
        }
        let lead = self.lead().max(other.lead()).cloned();
        let mut gens = self.inner.gens.clone();
        for g in &other.inner.gens {
            push_gen(&mut gens, g.clone());
        }
        // Differences between the two leads keep both grids reachable.
        if let (Some(a), Some(b)) = (self.lead(), other.lead()) {
            push_gen(&mut gens, b - a);
            push_gen(&mut gens, a - b);
        }
        let (a, b) = (self.clone(), other.clone());
        Ok(TermStream::lazy(lead, gens, move |t| Ok(&a.above(t)? + &b.above(t)?))
            .with_atom(self.atom.clone()))
    }

    pub fn sub(&self, other: &TermStream) -> Result<TermStream> {
        self.add(&other.neg())
    }

    pub fn add_finite(&self, x: &Surreal) -> Result<TermStream> {
        self.add(&TermStream::finite(x.clone()).with_atom(self.atom.clone()))
    }

    pub fn mul(&self, other: &TermStream) -> TermStream {
        let atom = &self.atom + &other.atom;
        if self.is_zero() || other.is_zero() {
            return TermStream::zero().with_atom(atom);
        }
        if let (Some(a), Some(b)) = (self.as_finite(), other.as_finite()) {
            return TermStream::finite(a * b).with_atom(atom);
        }
        let la = self.lead().unwrap().clone();
        let lb = other.lead().unwrap().clone();
        let mut gens = self.inner.gens.clone();
        for g in &other.inner.gens {
            push_gen(&mut gens, g.clone());
        }
        let (a, b) = (self.clone(), other.clone());
        TermStream::lazy(Some(&la + &lb), gens, move |t| {
            let pa = a.above(&(t - &lb))?;
            let pb = b.above(&(t - &la))?;
            Ok((&pa * &pb).above(t))
        })
        .with_atom(atom)
    }

    /// `sum_k c_k self^k` for an infinitesimal stream (atom 0, lead < 0).
    pub fn series(&self, coeffs: Coeffs) -> Result<TermStream> {
        if !self.atom.is_zero() {
            return Err(Error::Domain("series argument carries an exponential atom".into()));
        }
        let c0 = coeffs(0);
        if self.is_zero() {
            return Ok(TermStream::finite(Surreal::from_scalar(c0)));
        }
        let eps = self.tighten()?;
        let le = eps.lead().unwrap().clone();
        if le.signum() >= 0 {
            return Err(Error::Domain(format!("series argument is not infinitesimal (lead w^({le}))")));
        }
        let mut gens = eps.inner.gens.clone();
        push_gen(&mut gens, le.clone());
        // Leading exponent of the result: the first k with c_k != 0.
        let mut lead = None;
        for k in 0..64usize {
            if !coeffs(k).is_zero() {
                lead = Some(le.scale_rat(&int(k as i64)));
                break;
            }
        }
        let lead = lead.unwrap_or_else(Surreal::zero);
        Ok(TermStream::lazy(Some(lead), gens, move |t| {
            let e = eps.above(t)?;
            let mut acc =
                if Surreal::zero() > *t { Surreal::from_scalar(coeffs(0)) } else { Surreal::zero() };
            let mut p = Surreal::one();
            let mut k = 1usize;
            loop {
                if &le.scale_rat(&int(k as i64)) <= t {
                    break;
                }
                if k > config::iteration_cap() {
                    return Err(Error::Resource { what: "series order", cap: config::iteration_cap() });
                }
                p = (&p * &e).above(t);
                if p.is_zero() {
                    break;
                }
                let c = coeffs(k);
                if !c.is_zero() {
                    acc = &acc + &p.scale(&c);
                }
                k += 1;
            }
            Ok(acc)
        }))
    }

    /// `exp(self)` for an infinitesimal stream.
    pub fn exp_series(&self) -> Result<TermStream> {
        self.series(Arc::new(|k| Scalar::Rat(inv_factorial(k))))
    }

    /// `ln(1 + self)` for an infinitesimal stream.
    pub fn ln1p_series(&self) -> Result<TermStream> {
        self.series(Arc::new(|k| {
            if k == 0 {
                Scalar::zero()
            } else {
                let s = if k % 2 == 1 { 1 } else { -1 };
                Scalar::ratio(s, k as i64)
            }
        }))
    }

    /// `(1 + self)^q` for an infinitesimal stream.
    pub fn binomial_series(&self, q: &Rational) -> Result<TermStream> {
        let q = q.clone();
        let table = Arc::new(Mutex::new(vec![Rational::one()]));
        self.series(Arc::new(move |k| {
            let mut tab = table.lock().unwrap();
            while tab.len() <= k {
                let j = tab.len() as i64;
                let next = &tab[tab.len() - 1] * (&q - int(j - 1)) / int(j);
                tab.push(next);
            }
            Scalar::Rat(tab[k].clone())
        }))
    }

    /// Splits `self = c * w^y * (1 + h)` with `h` infinitesimal.
    pub fn factor_leading(&self) -> Result<(Surreal, Scalar, TermStream)> {
        let (y, c) = match self.first_term()? {
            Some(t) => t,
            None if self.is_finite() => return Err(Error::DivisionByZero),
            None => {
                return Err(Error::NeedsMoreTerms("leading term not found".into()));
            }
        };
        let unit = self.mul_monomial(&-&y, &c.recip()?).with_atom(Surreal::zero());
        let h = unit.sub(&TermStream::one())?;
        let h = if h.is_finite() {
            h
        } else {
            match h.first_term()? {
                Some((e, _)) => {
                    let hh = h.clone();
                    TermStream::lazy(Some(e), h.inner.gens.clone(), move |t| hh.above(t))
                }
                None => {
                    return Err(Error::NeedsMoreTerms(
                        "cannot certify the remainder after the leading term".into(),
                    ))
                }
            }
        };
        Ok((y, c, h))
    }

    /// `1 / self`.
    pub fn inverse(&self) -> Result<TermStream> {
        let (y, c, h) = self.factor_leading()?;
        let geo = h.series(Arc::new(|k| Scalar::from_int(if k % 2 == 0 { 1 } else { -1 })))?;
        Ok(geo.mul_monomial(&-&y, &c.recip()?).with_atom(-&self.atom))
    }

    /// `self^q` for rational `q`; the leading coefficient must have an exact `q`-th power.
    pub fn pow_rational(&self, q: &Rational) -> Result<TermStream> {
        let (y, c, h) = self.factor_leading()?;
        let cq = c.pow_rational(q)?;
        let body = h.binomial_series(q)?;
        Ok(body.mul_monomial(&y.scale_rat(q), &cq).with_atom(self.atom.scale_rat(q)))
    }

    /// Natural logarithm. The leading exponent must be rational.
    pub fn ln(&self) -> Result<TermStream> {
        let (y, c, h) = self.factor_leading()?;
        if c.signum() <= 0 {
            return Err(Error::Domain("ln of a non-positive number".into()));
        }
        let q = y
            .as_rational()
            .ok_or_else(|| Error::Unsupported(format!("ln(w^({y})) with a non-rational exponent")))?;
        let head = &(&self.atom + &Surreal::lambda().scale_rat(&q)) + &Surreal::from_scalar(c.ln()?);
        h.ln1p_series()?.add_finite(&head)
    }

    /// `e^self`, with the purely infinite part kept as the atom.
    pub fn exp(&self) -> Result<TermStream> {
        let (atom, factor, series) = self.exp_parts()?;
        Ok(series.scale(&factor).with_atom(atom))
    }

    /// `e^self = e^atom * factor * series`.
    pub fn exp_parts(&self) -> Result<(Surreal, Scalar, TermStream)> {
        if !self.atom.is_zero() {
            return Err(Error::Unsupported("exponential of an exponential".into()));
        }
        let head = self.above(&Surreal::zero())?;
        let real = self.coeff(&Surreal::zero())?;
        let (atom, wpow) = split_infinite_part(&head)?;
        let me = self.clone();
        let tail = if let Some(x) = self.as_finite() {
            TermStream::finite(x.below(&Surreal::zero()))
        } else {
            let lazy = TermStream::lazy(Some(Surreal::zero()), self.inner.gens.clone(), move |t| {
                if t >= &Surreal::zero() {
                    Ok(Surreal::zero())
                } else {
                    Ok(me.above(t)?.below(&Surreal::zero()))
                }
            });
            match lazy.first_term()? {
                Some(_) => lazy.tighten()?,
                None => {
                    return Err(Error::NeedsMoreTerms(
                        "infinitesimal part has no term within the scan budget".into(),
                    ))
                }
            }
        };
        let series = tail.exp_series()?;
        let series = if wpow.is_zero() {
            series
        } else {
            series.mul_monomial(&Surreal::from_rational(wpow), &Scalar::one())
        };
        Ok((atom, real.exp()?, series))
    }
}

/// Splits the purely infinite part of an exponent into the atom and a
/// rational power of `w` coming from `q * ln w` terms.
fn split_infinite_part(head: &Surreal) -> Result<(Surreal, Rational)> {
    let lambda_exp = Surreal::omega_rat(int(-1));
    let mut atom = Vec::new();
    let mut q = Rational::zero();
    for (e, c) in head.terms() {
        if !e.is_infinitesimal() {
            atom.push((e.clone(), c.clone()));
        } else if *e == lambda_exp {
            match c.as_rational() {
                Some(r) => q += r,
                None => return Err(Error::Representation(format!("w^({c}) with an irrational exponent"))),
            }
        } else {
            return Err(Error::Unsupported(format!("exponential of the small infinite monomial w^({e})")));
        }
    }
    Ok((Surreal::from_terms(atom), q))
}

pub fn inv_factorial(k: usize) -> Rational {
    let mut f = Rational::one();
    for j in 2..=k {
        f /= int(j as i64);
    }
    f
}

pub fn factorial(k: usize) -> Rational {
    let mut f = Rational::one();
    for j in 2..=k {
        f *= int(j as i64);
    }
    f
}

/// `1 / a` as a stream.
pub fn nf_inverse(a: &Surreal) -> Result<TermStream> {
    if a.is_zero() {
        return Err(Error::DivisionByZero);
    }
    TermStream::finite(a.clone()).inverse()
}

/// `sum_k c_k eps^k` for an infinitesimal normal form `eps`.
pub fn eval_series_at_infinitesimal(coeffs: Coeffs, eps: &Surreal) -> Result<TermStream> {
    if !eps.is_infinitesimal() {
        return Err(Error::Domain(format!("{eps} is not infinitesimal")));
    }
    TermStream::finite(eps.clone()).series(coeffs)
}

/// Coefficients of a multivariate series, indexed by exponent vectors.
pub type MultiCoeffs = Arc<dyn Fn(&[usize]) -> Scalar + Send + Sync>;

/// Multivariate `sum c_{k_1..k_n} eps_1^{k_1} ... eps_n^{k_n}` over infinitesimals.
pub fn eval_multiseries(coeffs: MultiCoeffs, eps: &[Surreal]) -> Result<TermStream> {
    if let Some(e) = eps.iter().find(|e| !e.is_infinitesimal()) {
        return Err(Error::Domain(format!("{e} is not infinitesimal")));
    }
    let eps: Vec<Surreal> = eps.to_vec();
    let leads: Vec<Surreal> =
        eps.iter().map(|e| e.leading_exponent().cloned().unwrap_or_else(minus_one)).collect();
    let gens = leads.clone();
    Ok(TermStream::lazy(Some(Surreal::zero()), gens, move |t| {
        let n = eps.len();
        let mut powers: Vec<Vec<Surreal>> = Vec::with_capacity(n);
        for (e, l) in eps.iter().zip(&leads) {
            let mut ps = vec![Surreal::one()];
            if e.is_zero() {
                powers.push(ps);
                continue;
            }
            let mut k = 1i64;
            while &l.scale_rat(&int(k)) > t {
                if k as usize > config::iteration_cap() {
                    return Err(Error::Resource { what: "series order", cap: config::iteration_cap() });
                }
                let next = (ps.last().unwrap() * e).above(t);
                if next.is_zero() {
                    break;
                }
                ps.push(next);
                k += 1;
            }
            powers.push(ps);
        }
        let mut acc = Vec::new();
        let mut idx = vec![0usize; n];
        multi_rec(&coeffs, &powers, &leads, t, 0, Surreal::one(), Surreal::zero(), &mut idx, &mut acc);
        Ok(Surreal::from_terms(acc))
    }))
}

#[allow(clippy::too_many_arguments)]
fn multi_rec(
    coeffs: &MultiCoeffs,
    powers: &[Vec<Surreal>],
    leads: &[Surreal],
    t: &Surreal,
    i: usize,
    prod: Surreal,
    bound: Surreal,
    idx: &mut Vec<usize>,
    acc: &mut Vec<(Surreal, Scalar)>,
) {
    if i == powers.len() {
        let c = coeffs(idx);
        if !c.is_zero() {
            acc.extend(prod.scale(&c).above(t).into_terms());
        }
        return;
    }
    for (k, p) in powers[i].iter().enumerate() {
        let b = &bound + &leads[i].scale_rat(&int(k as i64));
        if k > 0 && &b <= t {
            break;
        }
        idx[i] = k;
        let next = (&prod * p).above(t);
        if next.is_zero() && k > 0 {
            break;
        }
        multi_rec(coeffs, powers, leads, t, i + 1, next, b, idx, acc);
    }
    idx[i] = 0;
}

/// `exp(x) = e^{Pi(x)} * e^{re(x)} * sum ∐(x)^k / k!`.
pub fn exp_nf(x: &Surreal) -> Result<(Surreal, Scalar, TermStream)> {
    TermStream::finite(x.clone()).exp_parts()
}

/// `ln(x) = q ln w + ln r + ln(1 + h)` for `x = r w^q (1 + h)`, `q` rational.
pub fn ln_nf(x: &Surreal) -> Result<TermStream> {
    if x.signum() <= 0 {
        return Err(Error::Domain(format!("ln of non-positive {x}")));
    }
    TermStream::finite(x.clone()).ln()
}

/// Returns the common truncation above `t` once the last half of `seq`
/// agrees there; otherwise asks for more terms.
pub fn conway_limit(seq: &[Surreal], t: &Surreal) -> Result<Surreal> {
    if seq.is_empty() {
        return Err(Error::NeedsMoreTerms("empty sequence".into()));
    }
    let tail = &seq[seq.len() / 2..];
    let last = tail.last().unwrap().above(t);
    if tail.iter().all(|s| s.above(t) == last) {
        Ok(last)
    } else {
        Err(Error::NeedsMoreTerms("coefficients have not stabilized".into()))
    }
}

/// Streams with distinct exponential atoms, kept in decreasing atom order.
#[derive(Clone, Debug, Default)]
pub struct SectoredStream {
    sectors: BTreeMap<Surreal, TermStream>,
}

impl SectoredStream {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_stream(s: TermStream) -> Self {
        let mut out = Self::zero();
        out.push(s).expect("same atom");
        out
    }

    pub fn from_nf(x: Surreal) -> Self {
        Self::from_stream(TermStream::finite(x))
    }

    /// Adds a stream into its sector.
    pub fn push(&mut self, s: TermStream) -> Result<()> {
        if s.is_zero() {
            return Ok(());
        }
        let key = s.atom().clone();
        let merged = match self.sectors.remove(&key) {
            Some(old) => old.add(&s)?,
            None => s,
        };
        if !(merged.is_finite() && merged.is_zero()) {
            self.sectors.insert(key, merged);
        }
        Ok(())
    }

    pub fn add(&self, other: &SectoredStream) -> Result<SectoredStream> {
        let mut out = self.clone();
        for s in other.sectors.values() {
            out.push(s.clone())?;
        }
        Ok(out)
    }

    pub fn neg(&self) -> SectoredStream {
        self.scale(&Scalar::from_int(-1))
    }

    pub fn sub(&self, other: &SectoredStream) -> Result<SectoredStream> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Scalar) -> SectoredStream {
        let mut out = SectoredStream::zero();
        for s in self.sectors.values() {
            out.push(s.scale(c)).expect("distinct atoms");
        }
        out
    }

    pub fn mul(&self, other: &SectoredStream) -> Result<SectoredStream> {
        let mut out = SectoredStream::zero();
        for a in self.sectors.values() {
            for b in other.sectors.values() {
                out.push(a.mul(b))?;
            }
        }
        Ok(out)
    }

    /// Sectors from the largest atom down.
    pub fn sectors(&self) -> impl Iterator<Item = &TermStream> {
        self.sectors.values().rev()
    }

    pub fn sector(&self, atom: &Surreal) -> Option<&TermStream> {
        self.sectors.get(atom)
    }

    pub fn is_zero(&self) -> bool {
        self.sectors.is_empty()
    }

    /// The value as a plain stream when there is a single sector.
    pub fn single(&self) -> Option<&TermStream> {
        if self.sectors.len() == 1 {
            self.sectors.values().next()
        } else {
            None
        }
    }

    /// Text form with at most `n` terms per sector. With `tail`, truncated
    /// sectors end in `O(..)` naming the first monomial not shown.
    pub fn render(&self, n: usize, tail: bool) -> Result<String> {
        let mut pieces = Vec::new();
        for s in self.sectors() {
            let (got, omitted) = s.known_terms(n)?;
            let body = Surreal::from_terms(got);
            let atom = s.atom();
            let exp = if atom.is_zero() { None } else { Some(format!("exp({atom})")) };
            let text = match &exp {
                None => body.to_string(),
                Some(e) if body == Surreal::one() => e.clone(),
                Some(e) if body == -&Surreal::one() => format!("-{e}"),
                Some(e) if body.len() == 1 => format!("{body}*{e}"),
                Some(e) => format!("{e}*({body})"),
            };
            pieces.push(text);
            if let (true, Some(y)) = (tail, omitted) {
                let mono = Surreal::omega_pow(y).to_string();
                pieces.push(match &exp {
                    None => format!("O({mono})"),
                    Some(e) if mono == "1" => format!("O({e})"),
                    Some(e) => format!("O({mono}*{e})"),
                });
            }
        }
        if pieces.is_empty() {
            return Ok("0".into());
        }
        let mut out = pieces[0].clone();
        for p in &pieces[1..] {
            match p.strip_prefix('-') {
                Some(rest) => {
                    out.push_str(" - ");
                    out.push_str(rest);
                }
                None => {
                    out.push_str(" + ");
                    out.push_str(p);
                }
            }
        }
        Ok(out)
    }

    /// Truncation of each sector above the given exponent threshold.
    pub fn above(&self, t: &Surreal) -> Result<Vec<(Surreal, Surreal)>> {
        self.sectors().map(|s| Ok((s.atom().clone(), s.above(t)?))).collect()
    }
}

/// Convenience: integer `k` as a scalar step used by callers building grids.
pub fn rational_multiple(x: &Surreal, k: i64) -> Surreal {
    x.scale_rat(&int(k))
}

pub fn rational_to_usize(q: &Rational) -> Option<usize> {
    if q.is_integer() && !q.is_negative() {
        q.to_integer().to_usize()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn w(n: i64) -> Surreal {
        Surreal::omega_rat(int(n))
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(nf_inverse(&Surreal::omega()).unwrap().to_level(3).unwrap(), w(-1));
        let a = &Surreal::one() - &w(-1);
        let inv = nf_inverse(&a).unwrap();
        let t: Vec<_> = inv.terms(4).unwrap();
        assert_eq!(t.len(), 4);
        assert!(t.iter().all(|(_, c)| c.is_one()));
        let b = &Surreal::omega() + &Surreal::one();
        let inv = nf_inverse(&b).unwrap();
        let three = Surreal::from_terms(inv.terms(3).unwrap());
        assert_eq!(three.to_string(), "w^-1 - w^-2 + w^-3");
        let prod = &three * &b;
        assert_eq!(prod.above(&Surreal::from_int(-3)), Surreal::one());
    }

    #[test]
    fn series_examples() {
        let geo = eval_series_at_infinitesimal(Arc::new(|_| Scalar::one()), &w(-1)).unwrap();
        assert_eq!(geo.to_level(3).unwrap().to_string(), "1 + w^-1 + w^-2");
        let c0 = eval_series_at_infinitesimal(Arc::new(|k| Scalar::from_int(k as i64 + 7)), &Surreal::zero())
            .unwrap();
        assert_eq!(c0.as_finite().unwrap(), &Surreal::from_int(7));
        let ln = TermStream::finite(w(-1)).ln1p_series().unwrap();
        assert_eq!(ln.to_level(3).unwrap().to_string(), "w^-1 - 1/2*w^-2 + 1/3*w^-3");
    }

    #[test]
    fn exp_and_ln() {
        let (a, s, t) = exp_nf(&Surreal::zero()).unwrap();
        assert!(a.is_zero() && s.is_one() && t.above(&Surreal::from_int(-5)).unwrap() == Surreal::one());
        let (a, s, _) = exp_nf(&(&Surreal::omega() + &Surreal::one())).unwrap();
        assert_eq!(a, Surreal::omega());
        assert_eq!(s, Scalar::constant(crate::Constant::E));
        let (_, _, t) = exp_nf(&w(-1)).unwrap();
        assert_eq!(t.to_level(3).unwrap().to_string(), "1 + w^-1 + 1/2*w^-2");
        assert!(ln_nf(&Surreal::one()).unwrap().above(&Surreal::from_int(-10)).unwrap().is_zero());
        let x = w(2).scale(&Scalar::constant(crate::Constant::E));
        let l = ln_nf(&x).unwrap();
        assert_eq!(
            l.above(&Surreal::from_int(-10)).unwrap(),
            &Surreal::lambda().scale_rat(&int(2)) + &Surreal::one()
        );
    }

    #[test]
    fn exp_ln_roundtrip() {
        // ln(exp(eps)) = eps for an infinitesimal eps.
        let eps = &w(-1).scale_rat(&rat(1, 2)) - &w(-3);
        let (_, _, e) = exp_nf(&eps).unwrap();
        let back = e.ln().unwrap();
        assert_eq!(back.above(&Surreal::from_int(-12)).unwrap(), eps);
    }

    #[test]
    fn multivariate_matches_product() {
        let e1 = w(-1);
        let e2 = Surreal::omega_rat(rat(-1, 2));
        let m = eval_multiseries(Arc::new(|_| Scalar::one()), &[e1.clone(), e2.clone()]).unwrap();
        let g1 = TermStream::finite(e1).series(Arc::new(|_| Scalar::one())).unwrap();
        let g2 = TermStream::finite(e2).series(Arc::new(|_| Scalar::one())).unwrap();
        let t = Surreal::from_int(-4);
        assert_eq!(m.above(&t).unwrap(), g1.mul(&g2).above(&t).unwrap());
    }

    #[test]
    fn sectors_sorted_by_atom() {
        let mut s = SectoredStream::zero();
        s.push(TermStream::one()).unwrap();
        s.push(TermStream::one().with_atom(Surreal::omega())).unwrap();
        let atoms: Vec<_> = s.sectors().map(|t| t.atom().to_string()).collect();
        assert_eq!(atoms, ["w", "0"]);
    }
}
