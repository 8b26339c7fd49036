//! `{L | R}` brackets on the representable fragment.
//!
//! Dyadic brackets are resolved by the simplicity theorem. Brackets of the
//! shape `{x - y | x + y}` resolve to `x` when every exponent of `x` lies
//! above every exponent of `y`. The genetic `Ei` is built on both.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::nf::Surreal;
use crate::scalar::{int, rational_to_f64, Rational, Scalar};
use crate::stream::{exp_nf, factorial, TermStream};

/// `Some(j)` when `q = m / 2^j` in lowest terms.
pub fn dyadic_exponent(q: &Rational) -> Option<u64> {
    let d = q.denom();
    if d.is_zero() || (d & (d - BigInt::one())) != BigInt::zero() {
        return None;
    }
    Some(d.bits() - 1)
}

pub fn is_dyadic(q: &Rational) -> bool {
    dyadic_exponent(q).is_some()
}

/// Length of the sign expansion of a dyadic rational.
pub fn birthday(q: &Rational) -> Result<u64> {
    let j = dyadic_exponent(q).ok_or_else(|| Error::Unsupported(format!("{q} is not dyadic")))?;
    let a = q.abs();
    let whole =
        a.to_integer().to_u64().ok_or(Error::Resource { what: "birthday size", cap: u64::MAX as usize })?;
    Ok(if j == 0 { whole } else { whole + 1 + j })
}

/// Sign expansion of a dyadic rational (`true` for a plus).
pub fn sign_expansion(q: &Rational) -> Result<Vec<bool>> {
    let j = dyadic_exponent(q).ok_or_else(|| Error::Unsupported(format!("{q} is not dyadic")))?;
    let pos = !q.is_negative();
    let a = q.abs();
    let whole = a.to_integer().to_usize().unwrap_or(usize::MAX);
    let mut out = vec![pos; whole];
    if j == 0 {
        return Ok(out);
    }
    // One more step away from zero, then halving steps towards the target.
    let mut v = Rational::from_integer(a.to_integer()) + Rational::one();
    out.push(pos);
    let mut step = Rational::one();
    while v != a {
        step /= int(2);
        if v > a {
            v -= &step;
            out.push(!pos);
        } else {
            v += &step;
            out.push(pos);
        }
    }
    Ok(out)
}

/// The number denoted by a finite sign expansion.
pub fn from_sign_expansion(signs: &[bool]) -> Rational {
    let mut v = Rational::zero();
    let mut i = 0;
    while i < signs.len() && signs[i] == signs[0] {
        v += int(if signs[0] { 1 } else { -1 });
        i += 1;
    }
    let mut step = Rational::one();
    while i < signs.len() {
        step /= int(2);
        if signs[i] {
            v += &step;
        } else {
            v -= &step;
        }
        i += 1;
    }
    v
}

/// The simplest rational strictly between `lo` and `hi` (`None` = unbounded).
pub fn simplest_between(lo: Option<&Rational>, hi: Option<&Rational>) -> Result<Rational> {
    if let (Some(l), Some(h)) = (lo, hi) {
        if l >= h {
            return Err(Error::Precondition(format!("empty bracket: {l} is not below {h}")));
        }
    }
    let below_zero = lo.is_none_or(|l| l.is_negative());
    let above_zero = hi.is_none_or(|h| h.is_positive());
    if below_zero && above_zero {
        return Ok(Rational::zero());
    }
    if !below_zero {
        return Ok(simplest_positive(lo.unwrap(), hi));
    }
    let nl = hi.map(|h| -h);
    let nh = lo.map(|l| -l);
    Ok(-simplest_positive(nl.as_ref().unwrap(), nh.as_ref()))
}

/// Simplest number in `(lo, hi)` with `lo >= 0`.
fn simplest_positive(lo: &Rational, hi: Option<&Rational>) -> Rational {
    let n = Rational::from_integer(lo.floor().to_integer() + BigInt::one());
    match hi {
        None => n,
        Some(h) if &n < h => n,
        Some(h) => {
            let mut scale = Rational::one();
            loop {
                scale *= int(2);
                let m = (lo * &scale).floor() + Rational::one();
                let cand = m / &scale;
                if &cand < h {
                    return cand;
                }
            }
        }
    }
}

/// Simplest dyadic between finite option sets; empty sides are unbounded.
pub fn simplest_dyadic_between(left: &[Rational], right: &[Rational]) -> Result<Rational> {
    simplest_between(left.iter().max(), right.iter().min())
}

/// A bracket `{L | R}` of finitely many options; an empty side is unbounded.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneticBracket {
    pub left: Vec<Surreal>,
    pub right: Vec<Surreal>,
}

impl GeneticBracket {
    pub fn new(left: Vec<Surreal>, right: Vec<Surreal>) -> Result<Self> {
        for l in &left {
            for r in &right {
                if l >= r {
                    return Err(Error::Precondition(format!(
                        "left option {l} is not below right option {r}"
                    )));
                }
            }
        }
        Ok(GeneticBracket { left, right })
    }

    /// The simplest number between the options.
    pub fn resolve(&self) -> Result<Surreal> {
        let ls: Option<Vec<Rational>> = self.left.iter().map(Surreal::as_rational).collect();
        let rs: Option<Vec<Rational>> = self.right.iter().map(Surreal::as_rational).collect();
        if let (Some(ls), Some(rs)) = (ls, rs) {
            return simplest_dyadic_between(&ls, &rs).map(Surreal::from_rational);
        }
        if let ([l], [r]) = (self.left.as_slice(), self.right.as_slice()) {
            let half = Scalar::ratio(1, 2);
            let x = (l + r).scale(&half);
            let y = (r - l).scale(&half);
            let s = resolve_truncation_bracket(&TermStream::finite(x), &TermStream::finite(y), 0)?;
            return Ok(s.as_finite().cloned().expect("finite input"));
        }
        Err(Error::Unsupported(format!(
            "bracket {{{} | {}}} is outside the resolvable fragment",
            join(&self.left),
            join(&self.right)
        )))
    }
}

fn join(xs: &[Surreal]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// Certifies `{x - y | x + y} = x` when all monomials of `x` dominate all
/// monomials of `y` (ordering by atom, then by power of `w`). Lazy `x` is
/// inspected down to grid level `depth` when no certificate applies.
pub fn resolve_truncation_bracket(x: &TermStream, y: &TermStream, depth: usize) -> Result<TermStream> {
    let ymax = match y.first_term()? {
        Some((e, c)) if c.signum() > 0 => e,
        _ => return Err(Error::Precondition("the bracket radius must be positive".into())),
    };
    if !y.is_finite() {
        return Err(Error::Precondition("the bracket radius must be a finite normal form".into()));
    }
    if x.is_zero() {
        return Err(Error::Precondition("no monomials of x above the radius".into()));
    }
    match y.atom().cmp(x.atom()) {
        std::cmp::Ordering::Less => return Ok(x.clone()),
        std::cmp::Ordering::Greater => {
            return Err(Error::Precondition("the radius dominates x".into()));
        }
        std::cmp::Ordering::Equal => {}
    }
    if let Some(xf) = x.as_finite() {
        let (last, _) = xf.terms().last().expect("nonzero");
        return if *last > ymax {
            Ok(x.clone())
        } else {
            Err(Error::Precondition(format!(
                "exponent w^({last}) of x does not exceed the radius exponent w^({ymax})"
            )))
        };
    }
    let lead = x.lead().expect("nonzero").clone();
    let gap = &lead - &ymax;
    if gap.signum() > 0 {
        let gap_class = gap.leading_exponent().cloned().unwrap_or_default();
        let all_small = x.generators().iter().all(|g| g.leading_exponent().is_some_and(|e| *e < gap_class));
        if all_small && !x.generators().is_empty() {
            return Ok(x.clone());
        }
    }
    let probe = x.to_level(depth)?;
    if let Some((e, _)) = probe.terms().iter().find(|(e, _)| *e <= ymax) {
        return Err(Error::Precondition(format!(
            "x has the exponent w^({e}) at or below the radius exponent w^({ymax})"
        )));
    }
    Err(Error::NeedsMoreTerms(format!("exponent separation not certified down to grid level {depth}")))
}

/// Which option list a Taylor polynomial belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Classifies `p_n(x, x0)` given `f^{(j)}(x0)` for `j = 0..` and the sign of `x - x0`.
pub fn classify_taylor_option(derivs: &[Scalar], n: usize, dx_sign: i32) -> Result<Side> {
    let big_n =
        derivs.iter().enumerate().skip(n + 1).find(|(_, d)| !d.is_zero()).map(|(j, _)| j).ok_or_else(
            || {
                Error::NeedsMoreTerms(format!(
                    "all derivatives of order {}..{} vanish",
                    n + 1,
                    derivs.len().saturating_sub(1)
                ))
            },
        )?;
    let s = derivs[big_n].signum() * if big_n % 2 == 1 { dx_sign } else { dx_sign * dx_sign };
    Ok(if s > 0 { Side::Left } else { Side::Right })
}

/// Result of the genetic `Ei`.
#[derive(Clone, Debug)]
pub enum EiValue {
    /// Finite argument: `midpoint +- radius` contains `Ei(x)`.
    Interval { midpoint: Scalar, radius: f64 },
    /// Infinite argument: the normal form `e^x sum k!/x^{k+1}`, reexpanded.
    Stream(TermStream),
}

impl EiValue {
    pub fn bounds(&self) -> Option<(f64, f64)> {
        match self {
            EiValue::Interval { midpoint, radius } => {
                let m = midpoint.to_f64();
                let slack = m.abs() * 4.0 * f64::EPSILON;
                Some((m - radius - slack, m + radius + slack))
            }
            EiValue::Stream(_) => None,
        }
    }

    pub fn stream(&self) -> Option<&TermStream> {
        match self {
            EiValue::Stream(s) => Some(s),
            _ => None,
        }
    }
}

/// `sum_{k <= x} k! x^{-k-1}` for rational `x > 0`.
pub fn ei_least_term_sum(x: &Rational) -> Rational {
    let mut acc = Rational::zero();
    let xinv = x.recip();
    let mut term = xinv.clone();
    let mut k = 0i64;
    while &int(k) <= x {
        acc += &term;
        k += 1;
        term = term * int(k) * &xinv;
    }
    acc
}

/// The genetic `Ei(x)` for `x > 1`, with error constant `C`.
pub fn genetic_ei(x: &Surreal, c: &Scalar) -> Result<EiValue> {
    if x <= &Surreal::one() {
        return Err(Error::Domain(format!("Ei needs x > 1, got {x}")));
    }
    if let Some(q) = x.as_rational() {
        let lts = ei_least_term_sum(&q);
        let midpoint = &Scalar::Rat(q.clone()).exp()? * &Scalar::Rat(lts);
        let radius = c.to_f64() / rational_to_f64(&q).sqrt();
        return Ok(EiValue::Interval { midpoint, radius: radius * (1.0 + 1e-15) });
    }
    if !x.is_infinite() {
        return Err(Error::Unsupported(format!("Ei at the finite non-real point {x}")));
    }
    let (pi, re, eps) = x.decompose();
    let s = ei_stream(x)?;
    if re.is_zero() && eps.is_zero() {
        // {S - C x^{-1/2} | S + C x^{-1/2}} with S the full Conway sum.
        let y = radius_monomial(&pi, c)?;
        return Ok(EiValue::Stream(resolve_truncation_bracket(&s, &y, 16)?));
    }
    Ok(EiValue::Stream(s))
}

/// An upper bound `C' w^{-y/2}` for `C x^{-1/2}`, `x ~ r w^y`.
fn radius_monomial(pi: &Surreal, c: &Scalar) -> Result<TermStream> {
    let (y, r) = pi.leading().expect("infinite");
    let rf = r.to_f64();
    let bound = Rational::from_float(2.0 * c.to_f64().abs().max(1.0) / rf.sqrt())
        .ok_or_else(|| Error::Domain("radius is not finite".into()))?;
    Ok(TermStream::finite(Surreal::monomial(y.scale(&Scalar::ratio(-1, 2)), Scalar::Rat(bound))))
}

/// `e^x sum_k k! x^{-k-1}` at an infinite `x`, reexpanded about `Pi(x)`:
/// `e^x sum_n n! Pi^{-n-1} sum_{j<=n} (-d)^j / j!` with `d = x - Pi(x)`.
pub fn ei_stream(x: &Surreal) -> Result<TermStream> {
    let (pi, re, eps) = x.decompose();
    if pi.is_zero() {
        return Err(Error::Domain("Ei reexpansion needs an infinite argument".into()));
    }
    let delta = &Surreal::from_scalar(re) + &eps;
    let (y, _) = pi.leading().map(|(e, c)| (e.clone(), c.clone())).unwrap();
    let inv = TermStream::finite(pi.clone()).inverse()?;
    let neg_delta = -&delta;
    let mut gens = vec![-&y];
    gens.extend(inv.generators().iter().cloned());
    gens.extend(eps.terms().iter().map(|(e, _)| e.clone()));
    let yy = y.clone();
    let body = TermStream::lazy(Some(-&y), gens, move |t| {
        let mut acc = Surreal::zero();
        let mut q = Surreal::one();
        let mut dpow = Surreal::one();
        let mut pd = Surreal::zero();
        let mut n = 0usize;
        loop {
            let lead_n = yy.scale_rat(&int(-(n as i64) - 1));
            if &lead_n <= t {
                break;
            }
            if n > crate::config::iteration_cap() {
                return Err(Error::Resource { what: "Ei order", cap: crate::config::iteration_cap() });
            }
            let shift = yy.scale_rat(&int(n as i64));
            q = (&q * &inv.above(&(t + &shift))?).above(t);
            let cut = t - &lead_n;
            if n > 0 {
                dpow = (&dpow * &neg_delta).above(&cut).scale_rat(&int(n as i64).recip());
            }
            pd = &pd + &dpow;
            let term = (&q * &pd.above(&cut)).above(t);
            acc = &acc + &term.scale_rat(&factorial(n));
            n += 1;
        }
        Ok(acc)
    });
    let (atom, factor, series) = exp_nf(x)?;
    Ok(series.mul(&body).scale(&factor).with_atom(atom))
}

/// `Ei(x) - Ei(1)` at infinite `x`: the integral of `e^s / s` from 1.
pub fn ei_from_one(x: &Surreal, c: &Scalar) -> Result<crate::stream::SectoredStream> {
    let v = genetic_ei(x, c)?;
    let s = v.stream().ok_or_else(|| Error::NotApplicable("use the interval form for finite x".into()))?;
    let mut out = crate::stream::SectoredStream::from_stream(s.clone());
    out.push(TermStream::finite(Surreal::from_scalar(-Scalar::constant(crate::Constant::Ei1))))?;
    Ok(out)
}

/// Shared coefficient table for `k!` used by callers that build `Ei` series.
pub fn factorial_coeffs() -> crate::stream::Coeffs {
    Arc::new(|k| Scalar::Rat(factorial(k)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn bracket_examples() {
        assert_eq!(simplest_dyadic_between(&[], &[]).unwrap(), int(0));
        assert_eq!(simplest_dyadic_between(&[int(0)], &[int(1)]).unwrap(), rat(1, 2));
        assert_eq!(simplest_dyadic_between(&[int(3)], &[]).unwrap(), int(4));
        assert_eq!(simplest_dyadic_between(&[], &[int(-3)]).unwrap(), int(-4));
        assert_eq!(simplest_dyadic_between(&[rat(1, 3)], &[rat(1, 2)]).unwrap(), rat(3, 8));
        assert!(matches!(simplest_dyadic_between(&[int(1)], &[int(1)]), Err(Error::Precondition(_))));
    }

    #[test]
    fn birthdays() {
        assert_eq!(birthday(&int(0)).unwrap(), 0);
        assert_eq!(birthday(&rat(1, 2)).unwrap(), 2);
        assert_eq!(birthday(&int(-3)).unwrap(), 3);
        assert_eq!(birthday(&rat(-5, 4)).unwrap(), 4);
        assert!(birthday(&rat(1, 3)).is_err());
    }

    #[test]
    fn sign_expansions_roundtrip() {
        for n in -40..=40 {
            let q = rat(n, 8);
            let s = sign_expansion(&q).unwrap();
            assert_eq!(s.len() as u64, birthday(&q).unwrap());
            assert_eq!(from_sign_expansion(&s), q);
        }
    }

    #[test]
    fn truncation_examples() {
        let w = Surreal::omega();
        let b = GeneticBracket::new(vec![&w - &Surreal::one()], vec![&w + &Surreal::one()]).unwrap();
        assert_eq!(b.resolve().unwrap(), w);
        let x = &Surreal::omega_rat(int(2)) + &w;
        let y = Surreal::omega_rat(rat(1, 2));
        let b = GeneticBracket::new(vec![&x - &y], vec![&x + &y]).unwrap();
        assert_eq!(b.resolve().unwrap(), x);
        let bad =
            GeneticBracket::new(vec![&w - &w.scale_rat(&int(2))], vec![&w + &w.scale_rat(&int(2))]).unwrap();
        assert!(bad.resolve().is_err());
    }

    #[test]
    fn taylor_options() {
        let d = [Scalar::one(), Scalar::zero(), Scalar::zero(), Scalar::from_int(-6)];
        assert_eq!(classify_taylor_option(&d, 0, 1).unwrap(), Side::Right);
        assert_eq!(classify_taylor_option(&d, 0, -1).unwrap(), Side::Left);
        let e = [Scalar::one(), Scalar::one(), Scalar::zero()];
        assert_eq!(classify_taylor_option(&e, 0, -1).unwrap(), Side::Right);
        assert!(matches!(classify_taylor_option(&e, 1, 1), Err(Error::NeedsMoreTerms(_))));
    }

    #[test]
    fn ei_at_omega() {
        let v = genetic_ei(&Surreal::omega(), &Scalar::ratio(354, 100)).unwrap();
        let s = v.stream().unwrap();
        assert_eq!(s.atom(), &Surreal::omega());
        let t = s.terms(4).unwrap();
        let coeffs: Vec<_> = t.iter().map(|(_, c)| c.clone()).collect();
        assert_eq!(coeffs, [1, 1, 2, 6].map(Scalar::from_int));
        assert!(genetic_ei(&Surreal::one(), &Scalar::one()).is_err());
    }

    #[test]
    fn ei_interval_at_ten() {
        let v = genetic_ei(&Surreal::from_int(10), &Scalar::ratio(354, 100)).unwrap();
        let (lo, hi) = v.bounds().unwrap();
        // Ei(10) = 2492.228976241877...
        assert!(lo < 2492.228976241877 && 2492.228976241877 < hi);
    }
}
