//! Level-one log-free transseries in a variable `x -> +inf`.
//!
//! A monomial is `x^p e^{-w x} (ln x)^m` with rational `w` and `p`. The
//! generator set `(lambda_j, beta_j)` fixes the degree `c w - p` with
//! `c = max(beta_j / lambda_j) + 1`; the degree increases along the grid,
//! so a series truncated to degree below `N` is a finite object. The
//! truncation is part of the value: results carry the degree below which
//! every coefficient is exact.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::borel::{borel_plane_integrate, FormalPowerSeries, Variable};
use crate::error::{Error, Result};
use crate::nf::Surreal;
use crate::scalar::{int, rational_to_f64, Rational, Scalar};
use crate::stream::{SectoredStream, TermStream};

/// One exponential generator `x^beta e^{-lambda x}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Generator {
    pub lambda: Rational,
    pub beta: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GeneratorSet {
    gens: Vec<Generator>,
}

impl GeneratorSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Validates `lambda > 0` and `0 < beta <= 1`.
    pub fn new(gens: Vec<Generator>) -> Result<Self> {
        for g in &gens {
            if !g.lambda.is_positive() {
                return Err(Error::Generator(format!("lambda = {} must be positive", g.lambda)));
            }
            if !g.beta.is_positive() || g.beta > Rational::one() {
                return Err(Error::Generator(format!("beta = {} must lie in (0, 1]", g.beta)));
            }
        }
        let mut out: Vec<Generator> = Vec::new();
        for g in gens {
            if !out.contains(&g) {
                out.push(g);
            }
        }
        Ok(GeneratorSet { gens: out })
    }

    /// The single generator `x e^{-x}`.
    pub fn unit() -> Self {
        Self::new(vec![Generator { lambda: Rational::one(), beta: Rational::one() }]).unwrap()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    /// `c = max(beta / lambda) + 1`.
    pub fn degree_constant(&self) -> Rational {
        self.gens.iter().map(|g| &g.beta / &g.lambda).max().unwrap_or_else(Rational::zero) + Rational::one()
    }

    fn union(&self, other: &GeneratorSet) -> GeneratorSet {
        let mut gens = self.gens.clone();
        for g in &other.gens {
            if !gens.contains(g) {
                gens.push(g.clone());
            }
        }
        GeneratorSet { gens }
    }
}

/// `x^p e^{-w x} (ln x)^m`. The order is dominance: larger means dominant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mono {
    pub w: Rational,
    pub p: Rational,
    pub m: u32,
}

impl Mono {
    pub fn new(w: Rational, p: Rational, m: u32) -> Self {
        Mono { w, p, m }
    }

    pub fn one() -> Self {
        Mono::new(Rational::zero(), Rational::zero(), 0)
    }

    pub fn degree(&self, c: &Rational) -> Rational {
        c * &self.w - &self.p
    }

    fn mul(&self, o: &Mono) -> Mono {
        Mono::new(&self.w + &o.w, &self.p + &o.p, self.m + o.m)
    }
}

impl Ord for Mono {
    fn cmp(&self, o: &Self) -> Ordering {
        o.w.cmp(&self.w).then_with(|| self.p.cmp(&o.p)).then_with(|| self.m.cmp(&o.m))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Display for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.p.is_zero() {
            parts.push(if self.p.is_one() {
                "x".to_string()
            } else if self.p.is_integer() {
                format!("x^{}", self.p)
            } else {
                format!("x^({})", self.p)
            });
        }
        if self.m > 0 {
            parts.push(if self.m == 1 { "ln(x)".into() } else { format!("ln(x)^{}", self.m) });
        }
        if !self.w.is_zero() {
            let a = -&self.w;
            parts.push(if a.is_one() {
                "exp(x)".into()
            } else if (-&a).is_one() {
                "exp(-x)".into()
            } else {
                format!("exp({a}*x)")
            });
        }
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join("*"))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transseries {
    gens: GeneratorSet,
    terms: BTreeMap<Mono, Scalar>,
    cut: Option<Rational>,
}

impl Transseries {
    pub fn zero() -> Self {
        Transseries { gens: GeneratorSet::empty(), terms: BTreeMap::new(), cut: None }
    }

    pub fn constant(c: Scalar) -> Self {
        Self::monomial(Mono::one(), c)
    }

    pub fn monomial(m: Mono, c: Scalar) -> Self {
        let gens = if m.w.is_zero() {
            GeneratorSet::empty()
        } else {
            GeneratorSet::new(vec![Generator { lambda: m.w.abs(), beta: Rational::one() }])
                .expect("nonzero weight")
        };
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Transseries { gens, terms, cut: None }
    }

    /// The variable `x`.
    pub fn x() -> Self {
        Self::monomial(Mono::new(Rational::zero(), Rational::one(), 0), Scalar::one())
    }

    /// `e^{a x}`.
    pub fn exp_linear(a: Rational) -> Self {
        Self::monomial(Mono::new(-a, Rational::zero(), 0), Scalar::one())
    }

    pub fn ln_x() -> Self {
        Self::monomial(Mono::new(Rational::zero(), Rational::zero(), 1), Scalar::one())
    }

    /// Builds a series from terms; coefficients of equal monomials add up.
    pub fn from_terms(
        gens: GeneratorSet,
        terms: impl IntoIterator<Item = (Mono, Scalar)>,
        cut: Option<Rational>,
    ) -> Self {
        let mut map: BTreeMap<Mono, Scalar> = BTreeMap::new();
        for (m, c) in terms {
            let e = map.entry(m).or_insert_with(Scalar::zero);
            *e = &*e + &c;
        }
        Transseries { gens, terms: map, cut }.normalized()
    }

    fn normalized(mut self) -> Self {
        self.terms.retain(|_, c| !c.is_zero());
        if let Some(n) = &self.cut {
            let c = self.gens.degree_constant();
            self.terms.retain(|m, _| &m.degree(&c) < n);
        }
        self
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.gens
    }

    /// Replaces the generator set (only allowed on exact series).
    pub fn with_generators(mut self, gens: GeneratorSet) -> Result<Self> {
        if self.cut.is_some() && gens != self.gens {
            return Err(Error::Generator("cannot change generators of a truncated series".into()));
        }
        self.gens = gens;
        Ok(self)
    }

    /// Degree bound below which coefficients are exact (`None`: exact sum).
    pub fn cut(&self) -> Option<&Rational> {
        self.cut.as_ref()
    }

    pub fn degree_constant(&self) -> Rational {
        self.gens.degree_constant()
    }

    pub fn degree(&self, m: &Mono) -> Rational {
        m.degree(&self.degree_constant())
    }

    /// Keeps monomials of degree below `n`.
    pub fn truncate(&self, n: Rational) -> Self {
        let n = match &self.cut {
            Some(c) if c < &n => c.clone(),
            _ => n,
        };
        Transseries { gens: self.gens.clone(), terms: self.terms.clone(), cut: Some(n) }.normalized()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.cut.is_none()
    }

    pub fn coeff(&self, m: &Mono) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_else(Scalar::zero)
    }

    /// Terms from the dominant monomial down.
    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Scalar)> {
        self.terms.iter().rev()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn dominant(&self) -> Option<(&Mono, &Scalar)> {
        self.terms.iter().next_back()
    }

    fn min_degree(&self) -> Rational {
        let c = self.degree_constant();
        self.terms
            .keys()
            .map(|m| m.degree(&c))
            .min()
            .or_else(|| self.cut.clone())
            .unwrap_or_else(Rational::zero)
    }

    fn merged_gens(&self, o: &Transseries) -> Result<GeneratorSet> {
        if self.gens == o.gens {
            return Ok(self.gens.clone());
        }
        let u = self.gens.union(&o.gens);
        let compatible = |t: &Transseries| t.cut.is_none() || t.gens.degree_constant() == u.degree_constant();
        if compatible(self) && compatible(o) {
            Ok(u)
        } else {
            Err(Error::Generator(
                "truncated series over different generator sets cannot be merged exactly".into(),
            ))
        }
    }

    pub fn add(&self, o: &Transseries) -> Result<Transseries> {
        let gens = self.merged_gens(o)?;
        let cut = min_cut(self.cut.clone(), o.cut.clone());
        let terms = self.terms.iter().chain(o.terms.iter()).map(|(m, c)| (m.clone(), c.clone()));
        Ok(Transseries::from_terms(gens, terms, cut))
    }

    pub fn neg(&self) -> Transseries {
        self.scale(&Scalar::from_int(-1))
    }

    pub fn sub(&self, o: &Transseries) -> Result<Transseries> {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &Scalar) -> Transseries {
        Transseries {
            gens: self.gens.clone(),
            terms: self.terms.iter().map(|(m, d)| (m.clone(), d * c)).collect(),
            cut: self.cut.clone(),
        }
        .normalized()
    }

    pub fn mul(&self, o: &Transseries) -> Result<Transseries> {
        let gens = self.merged_gens(o)?;
        let cut = min_cut(
            self.cut.as_ref().map(|n| n + o.min_degree()),
            o.cut.as_ref().map(|n| n + self.min_degree()),
        );
        let c = gens.degree_constant();
        let mut out: BTreeMap<Mono, Scalar> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                let m = ma.mul(mb);
                if let Some(n) = &cut {
                    if &m.degree(&c) >= n {
                        continue;
                    }
                }
                let e = out.entry(m).or_insert_with(Scalar::zero);
                *e = &*e + &(ca * cb);
            }
        }
        Ok(Transseries { gens, terms: out, cut }.normalized())
    }

    /// `1 / self`, exact below degree `cut` (or the limit the input allows).
    pub fn inverse(&self, cut: Rational) -> Result<Transseries> {
        let (m, c) = match self.dominant() {
            Some((m, c)) => (m.clone(), c.clone()),
            None => return Err(Error::DivisionByZero),
        };
        if m.m != 0 {
            return Err(Error::Unsupported("inverse of a series led by a log power".into()));
        }
        let inv_m = Mono::new(-&m.w, -&m.p, 0);
        let cinv = c.recip()?;
        let dm = self.degree(&m);
        let target = match &self.cut {
            Some(n) => min_cut(Some(cut), Some(n - &dm - &dm)).unwrap(),
            None => cut,
        };
        let unit = self.mul(&Transseries::monomial(inv_m.clone(), cinv.clone()))?;
        let h = unit.sub(&Transseries::constant(Scalar::one()))?;
        let h = h.truncate(&target + &dm);
        let hmin = if h.is_zero() { Rational::one() } else { h.min_degree() };
        if !hmin.is_positive() {
            return Err(Error::Precondition("remainder after the dominant term is not small".into()));
        }
        let mut acc = Transseries::constant(Scalar::one()).with_generators(h.gens.clone())?;
        let mut p = acc.clone();
        let mut k = 1i64;
        while &hmin * int(k) < &target + &dm {
            p = p.mul(&h.scale(&Scalar::from_int(-1)))?.truncate(&target + &dm);
            if p.is_zero() {
                break;
            }
            acc = acc.add(&p)?;
            k += 1;
        }
        let out = acc.truncate(&target + &dm).mul(&Transseries::monomial(inv_m, cinv))?;
        Ok(out.truncate(target))
    }

    pub fn diff(&self) -> Transseries {
        let mut out = Vec::new();
        for (m, c) in &self.terms {
            if !m.p.is_zero() {
                out.push((Mono::new(m.w.clone(), &m.p - int(1), m.m), c * &Scalar::Rat(m.p.clone())));
            }
            if m.m > 0 {
                out.push((Mono::new(m.w.clone(), &m.p - int(1), m.m - 1), c * &Scalar::from_int(m.m as i64)));
            }
            if !m.w.is_zero() {
                out.push((m.clone(), c * &Scalar::Rat(-&m.w)));
            }
        }
        Transseries::from_terms(self.gens.clone(), out, self.cut.clone())
    }

    /// Termwise antiderivative. Decaying parts get the zero constant,
    /// `x^{-1} -> ln x`, and each exponential sector `x^b e^{-a x} y(x)`
    /// is integrated through the Borel-plane recurrence.
    pub fn integrate(&self) -> Result<Transseries> {
        let c = self.degree_constant();
        let mut out: Vec<(Mono, Scalar)> = Vec::new();
        let mut cut = self.cut.as_ref().map(|n| n - int(1));
        let mut sectors: BTreeMap<(Rational, Rational), Vec<(Mono, Scalar)>> = BTreeMap::new();
        for (m, k) in &self.terms {
            if m.w.is_zero() {
                out.extend(integrate_power_log(&m.p, m.m, k)?);
            } else {
                if m.m != 0 {
                    return Err(Error::Unsupported(
                        "logarithms in exponentially weighted terms cannot be integrated".into(),
                    ));
                }
                let frac = &m.p - m.p.floor();
                sectors.entry((m.w.clone(), frac)).or_default().push((m.clone(), k.clone()));
            }
        }
        for ((w, _), terms) in sectors {
            let b = terms.iter().map(|(m, _)| m.p.clone()).max().unwrap() + int(1);
            // y(x) = sum_k y_k x^{-k-1} with x^b y(x) the sector sum.
            let mut y: BTreeMap<usize, Scalar> = BTreeMap::new();
            for (m, k) in &terms {
                let idx = (&b - &m.p - int(1)).to_integer().to_usize().expect("same sector");
                y.insert(idx, k.clone());
            }
            let y_len = y.keys().max().map_or(0, |k| k + 1);
            // Coefficients known exactly while the input is known.
            let known = |k: usize| -> bool {
                match &self.cut {
                    None => true,
                    Some(n) => &Mono::new(w.clone(), &b - int(k as i64 + 1), 0).degree(&c) < n,
                }
            };
            // Coefficients must be rational multiples of one common scalar.
            let unit = y.values().next().cloned().unwrap_or_else(Scalar::one);
            let mut ys = vec![Rational::zero(); y_len];
            for (k, s) in &y {
                match s.checked_div(&unit)?.as_rational() {
                    Some(q) => ys[*k] = q.clone(),
                    None => {
                        return Err(Error::Unsupported(
                            "exponential sector coefficients are not rational multiples of one scalar".into(),
                        ))
                    }
                }
            }
            let ys_gen = ys.clone();
            let yser = FormalPowerSeries::new(Variable::P, move |k| {
                ys_gen.get(k).cloned().unwrap_or_else(Rational::zero) / crate::stream::factorial(k)
            });
            let g = borel_plane_integrate(&yser, &w, &b)?;
            let sector_cut = match &self.cut {
                Some(n) => n.clone(),
                None => {
                    // Exact when the recurrence terminates; otherwise truncate.
                    let limit = y_len + 64;
                    let coeffs = g.coefficients(limit);
                    let tail_zero = coeffs[y_len..].iter().all(|c| c.is_zero());
                    if tail_zero {
                        Rational::from_integer(i64::MAX.into())
                    } else {
                        let default = Mono::new(w.clone(), &b - int(y_len as i64 + 1), 0).degree(&c)
                            + int(DEFAULT_EXTRA_DEGREE);
                        cut = min_cut(cut, Some(default.clone()));
                        default
                    }
                }
            };
            let mut k = 0usize;
            loop {
                let mono = Mono::new(w.clone(), &b - int(k as i64 + 1), 0);
                let deg = mono.degree(&c);
                if deg >= sector_cut || (self.cut.is_some() && !known(k)) {
                    break;
                }
                if self.cut.is_none()
                    && sector_cut == Rational::from_integer(i64::MAX.into())
                    && k >= y_len + 64
                {
                    break;
                }
                let gk = g.coeff(k) * crate::stream::factorial(k);
                if !gk.is_zero() {
                    out.push((mono, &Scalar::Rat(gk) * &unit));
                }
                k += 1;
                if k > crate::config::term_cap() {
                    return Err(Error::Resource {
                        what: "integration terms",
                        cap: crate::config::term_cap(),
                    });
                }
            }
        }
        Ok(Transseries::from_terms(self.gens.clone(), out, cut))
    }

    /// Dominance comparison: sign of the dominant coefficient of `self - o`.
    pub fn cmp_value(&self, o: &Transseries) -> Result<Ordering> {
        let d = self.sub(o)?;
        Ok(match d.dominant() {
            None => Ordering::Equal,
            Some((_, c)) => c.signum().cmp(&0),
        })
    }

    /// Exact value at a rational point; the series must be an exact finite sum.
    pub fn eval_finite(&self, x: &Rational) -> Result<Scalar> {
        if self.cut.is_some() {
            return Err(Error::NotApplicable(
                "a truncated asymptotic series has no exact value at a finite point".into(),
            ));
        }
        let xs = Scalar::Rat(x.clone());
        let mut acc = Scalar::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            if !m.p.is_zero() {
                if x.is_zero() && m.p.is_negative() {
                    return Err(Error::Domain(format!("x^{} at 0", m.p)));
                }
                v = &v * &xs.pow_rational(&m.p)?;
            }
            if m.m > 0 {
                v = &v * &xs.ln()?.powi(m.m as i64)?;
            }
            if !m.w.is_zero() {
                v = &v * &Scalar::Rat(-(&m.w * x)).exp()?;
            }
            acc = &acc + &v;
        }
        Ok(acc)
    }

    /// Floating-point value of the known terms at `x > 0`.
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                c.to_f64()
                    * x.powf(rational_to_f64(&m.p))
                    * x.ln().powi(m.m as i32)
                    * (-rational_to_f64(&m.w) * x).exp()
            })
            .sum()
    }

    /// Value at an infinite normal form, one sector per exponential weight.
    /// Each sector is exact above the exponent implied by the degree cut.
    pub fn eval_at(&self, x0: &Surreal) -> Result<SectoredStream> {
        if !x0.is_infinite() || x0.signum() <= 0 {
            return Err(Error::Domain(format!("{x0} is not positive infinite")));
        }
        let c = self.degree_constant();
        let y = x0.leading_exponent().unwrap().clone();
        let base = TermStream::finite(x0.clone());
        let ln = if self.terms.keys().any(|m| m.m > 0) { Some(base.ln()?) } else { None };
        let max_log = self.terms.keys().map(|m| m.m).max().unwrap_or(0);
        let mut sectors: BTreeMap<Rational, TermStream> = BTreeMap::new();
        for (m, k) in &self.terms {
            let mut s = if m.p.is_zero() { TermStream::one() } else { base.pow_rational(&m.p)? };
            for _ in 0..m.m {
                s = s.mul(ln.as_ref().unwrap());
            }
            if !m.w.is_zero() {
                let (atom, factor, series) = crate::stream::exp_nf(&x0.scale_rat(&-&m.w))?;
                s = s.mul(&series.scale(&factor).with_atom(atom));
            }
            let s = s.scale(k);
            let e = match sectors.remove(&m.w) {
                Some(prev) => prev.add(&s)?,
                None => s,
            };
            sectors.insert(m.w.clone(), e);
        }
        let mut out = SectoredStream::zero();
        for (w, s) in sectors {
            let s = match &self.cut {
                None => s,
                Some(n) => {
                    let known = &y.scale_rat(&(&c * &w - n))
                        + &Surreal::omega_rat(int(-1)).scale_rat(&int(max_log as i64));
                    guard_below(s, known)
                }
            };
            out.push(s)?;
        }
        Ok(out)
    }

    /// `x -> x + h`, reexpanded: `(x + h)^p = x^p sum_j binom(p, j) h^j x^{-j}`,
    /// `ln(x + h) = ln x + sum_j (-1)^{j+1} h^j x^{-j} / j` and
    /// `e^{-w (x + h)} = e^{-w h} e^{-w x}`. The result is exact below `cut`
    /// (or below the input's own cut when that is smaller).
    pub fn compose_shift(&self, h: &Rational, cut: Rational) -> Result<Transseries> {
        let out_cut = min_cut(self.cut.clone(), Some(cut)).unwrap();
        let c = self.degree_constant();
        let exact = |terms: Vec<(Mono, Scalar)>| Transseries::from_terms(self.gens.clone(), terms, None);
        let mut acc = exact(Vec::new()).truncate(out_cut.clone());
        for (m, k) in &self.terms {
            let room = &out_cut - m.degree(&c);
            let jmax = room.ceil().to_integer().to_usize().unwrap_or(0);
            let mut binom = Rational::one();
            let mut hp = Rational::one();
            let mut a = Vec::new();
            let mut l = vec![(Mono::new(int(0), int(0), 1), Scalar::one())];
            for j in 0..jmax {
                a.push((Mono::new(int(0), int(-(j as i64)), 0), Scalar::Rat(&binom * &hp)));
                if j > 0 {
                    let sign = if j % 2 == 1 { 1 } else { -1 };
                    l.push((
                        Mono::new(int(0), int(-(j as i64)), 0),
                        Scalar::Rat(&hp * int(sign) / int(j as i64)),
                    ));
                }
                binom = binom * (&m.p - int(j as i64)) / int(j as i64 + 1);
                hp *= h;
            }
            let mut prod = exact(a).truncate(room.clone());
            let log = exact(l);
            for _ in 0..m.m {
                prod = prod.mul(&log)?;
            }
            let shift = Scalar::Rat(-(&m.w * h)).exp()?;
            let mono = exact(vec![(Mono::new(m.w.clone(), m.p.clone(), 0), k * &shift)]);
            acc = acc.add(&prod.mul(&mono)?)?;
        }
        Ok(acc)
    }

    pub fn to_json(&self) -> Value {
        let single = match self.gens.generators() {
            [g] => Some(g.clone()),
            _ => None,
        };
        json!({
            "generators": self.gens.generators().iter().map(|g| json!({
                "lambda": g.lambda.to_string(),
                "beta": g.beta.to_string(),
            })).collect::<Vec<_>>(),
            "cut": self.cut.as_ref().map(|n| n.to_string()),
            "terms": self.terms().map(|(m, c)| {
                let mut t = json!({
                    "weight": m.w.to_string(),
                    "power": m.p.to_string(),
                    "log": m.m,
                    "coeff": c.to_string(),
                });
                if let Some(g) = &single {
                    let k = &m.w / &g.lambda;
                    if k.is_integer() {
                        let l = &g.beta * &k - &m.p;
                        t["k"] = json!(k.to_string());
                        t["l"] = json!(l.to_string());
                    }
                }
                t
            }).collect::<Vec<_>>(),
        })
    }
}

/// Extra degree kept when an exact input integrates to an infinite series.
pub const DEFAULT_EXTRA_DEGREE: i64 = 16;

fn min_cut(a: Option<Rational>, b: Option<Rational>) -> Option<Rational> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, None) => a,
        (None, b) => b,
    }
}

/// `int x^p (ln x)^m dx` with zero constant.
fn integrate_power_log(p: &Rational, m: u32, c: &Scalar) -> Result<Vec<(Mono, Scalar)>> {
    let zero = Rational::zero();
    if *p == int(-1) {
        let k = c.checked_div(&Scalar::from_int(m as i64 + 1))?;
        return Ok(vec![(Mono::new(zero, int(0), m + 1), k)]);
    }
    // x^{p+1} sum_j (-1)^j m!/(m-j)! ln^{m-j} / (p+1)^{j+1}
    let q = p + int(1);
    let mut out = Vec::new();
    let mut coef = c.checked_div(&Scalar::Rat(q.clone()))?;
    for j in 0..=m {
        out.push((Mono::new(zero.clone(), q.clone(), m - j), coef.clone()));
        let factor = Scalar::Rat(-(int((m - j) as i64)) / &q);
        coef = &coef * &factor;
    }
    Ok(out)
}

/// Wraps a stream so that queries below `known` report missing terms.
fn guard_below(s: TermStream, known: Surreal) -> TermStream {
    let atom = s.atom().clone();
    let lead = s.lead().cloned();
    let gens = s.generators().to_vec();
    TermStream::lazy(lead, gens, move |t| {
        if t < &known {
            Err(Error::NeedsMoreTerms(format!("series truncated: terms are exact only above w^({known})")))
        } else {
            s.above(t)
        }
    })
    .with_atom(atom)
}

/// An integration endpoint.
#[derive(Clone, Debug)]
pub enum Point {
    Finite(Rational),
    Infinite(Surreal),
}

impl Point {
    pub fn from_surreal(x: &Surreal) -> Result<Point> {
        if let Some(q) = x.as_rational() {
            Ok(Point::Finite(q))
        } else if x.is_infinite() && x.signum() > 0 {
            Ok(Point::Infinite(x.clone()))
        } else {
            Err(Error::Unsupported(format!("integration endpoint {x}")))
        }
    }
}

/// `F(b) - F(a)` with `F` the termwise antiderivative.
pub fn definite_integral(f: &Transseries, a: &Point, b: &Point) -> Result<SectoredStream> {
    let big_f = f.integrate()?;
    let at = |p: &Point| -> Result<SectoredStream> {
        match p {
            Point::Finite(q) => Ok(SectoredStream::from_nf(Surreal::from_scalar(big_f.eval_finite(q)?))),
            Point::Infinite(x) => big_f.eval_at(x),
        }
    };
    at(b)?.sub(&at(a)?)
}

/// Limit of a sequence in the transseries topology: every coefficient in
/// the inspected window must be constant over the last half of the sequence.
pub fn ts_converges(seq: &[Transseries]) -> Result<Transseries> {
    if seq.len() < 2 {
        return Err(Error::NeedsMoreTerms("at least two elements are needed".into()));
    }
    let tail = &seq[seq.len() / 2..];
    let last = tail.last().unwrap();
    for t in tail {
        if t.sub(last)?.terms.values().any(|c| !c.is_zero()) {
            return Err(Error::NeedsMoreTerms("coefficients have not become constant".into()));
        }
    }
    Ok(last.clone())
}

impl fmt::Display for Transseries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() && self.cut.is_none() {
            return f.write_str("0");
        }
        let mut first = true;
        for (m, c) in self.terms() {
            let (neg, mag) = crate::nf::split_sign(c);
            match (first, neg) {
                (true, true) => f.write_str("-")?,
                (true, false) => {}
                (false, true) => f.write_str(" - ")?,
                (false, false) => f.write_str(" + ")?,
            }
            first = false;
            if *m == Mono::one() {
                crate::nf::fmt_factor(&mag, f)?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                crate::nf::fmt_factor(&mag, f)?;
                write!(f, "*{m}")?;
            }
        }
        if let Some(n) = &self.cut {
            let w = self.dominant().map_or_else(Rational::zero, |(m, _)| m.w.clone());
            let p = &self.degree_constant() * &w - n;
            if !first {
                f.write_str(" + ")?;
            }
            write!(f, "O({})", Mono::new(w, p, 0))?;
        }
        Ok(())
    }
}

pub fn ts_add(a: &Transseries, b: &Transseries) -> Result<Transseries> {
    a.add(b)
}

pub fn ts_scale(c: &Scalar, a: &Transseries) -> Transseries {
    a.scale(c)
}

pub fn ts_mul(a: &Transseries, b: &Transseries) -> Result<Transseries> {
    a.mul(b)
}

pub fn ts_inverse(a: &Transseries, cut: Rational) -> Result<Transseries> {
    a.inverse(cut)
}

pub fn ts_diff(a: &Transseries) -> Transseries {
    a.diff()
}

pub fn ts_integrate(a: &Transseries) -> Result<Transseries> {
    a.integrate()
}

pub fn ts_cmp(a: &Transseries, b: &Transseries) -> Result<Ordering> {
    a.cmp_value(b)
}

pub fn ts_eval_at(a: &Transseries, x0: &Surreal) -> Result<SectoredStream> {
    a.eval_at(x0)
}
