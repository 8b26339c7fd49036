//! Borel transform, Gevrey-1 bounds, Padé continuation in the Borel plane
//! and Laplace resummation (ordinary and principal value).

use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::quad::{self, Estimate};
use crate::scalar::{int, rational_to_f64, Rational};
use crate::stream::factorial;

/// Which plane a power series lives in: `sum c_k x^{-k-1}` or `sum c_k p^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variable {
    InvX,
    P,
}

/// `|c_k| <= c k! rho^{-k}` on the inspected window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gevrey {
    pub c: f64,
    pub rho: f64,
}

type CoeffFn = Arc<dyn Fn(usize) -> Rational + Send + Sync>;

#[derive(Clone)]
pub struct FormalPowerSeries {
    var: Variable,
    gen: CoeffFn,
    gevrey: Option<Gevrey>,
}

impl fmt::Debug for FormalPowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FormalPowerSeries")
            .field("var", &self.var)
            .field("head", &self.coefficients(4))
            .field("gevrey", &self.gevrey)
            .finish()
    }
}

impl FormalPowerSeries {
    pub fn new(var: Variable, gen: impl Fn(usize) -> Rational + Send + Sync + 'static) -> Self {
        FormalPowerSeries { var, gen: Arc::new(gen), gevrey: None }
    }

    /// A finite coefficient list padded with zeros.
    pub fn from_coeffs(var: Variable, coeffs: Vec<Rational>) -> Self {
        Self::new(var, move |k| coeffs.get(k).cloned().unwrap_or_else(Rational::zero))
    }

    /// A series defined by a sequential recurrence; coefficients are cached.
    pub fn recurrence(
        var: Variable,
        next: impl Fn(usize, &[Rational]) -> Rational + Send + Sync + 'static,
    ) -> Self {
        let memo: Mutex<Vec<Rational>> = Mutex::new(Vec::new());
        Self::new(var, move |k| {
            let mut m = memo.lock().unwrap();
            while m.len() <= k {
                let n = m.len();
                let v = next(n, &m);
                m.push(v);
            }
            m[k].clone()
        })
    }

    pub fn variable(&self) -> Variable {
        self.var
    }

    pub fn gevrey(&self) -> Option<Gevrey> {
        self.gevrey
    }

    pub fn with_gevrey(mut self, g: Gevrey) -> Self {
        self.gevrey = Some(g);
        self
    }

    pub fn coeff(&self, k: usize) -> Rational {
        (self.gen)(k)
    }

    pub fn coefficients(&self, n: usize) -> Vec<Rational> {
        (0..n).map(|k| self.coeff(k)).collect()
    }
}

/// `c_k x^{-k-1} -> c_k p^k / k!`.
pub fn borel_transform(f: &FormalPowerSeries) -> Result<FormalPowerSeries> {
    if f.var != Variable::InvX {
        return Err(Error::Precondition("Borel transform expects a series in 1/x".into()));
    }
    let g = f.gen.clone();
    let mut out = FormalPowerSeries::new(Variable::P, move |k| g(k) / factorial(k));
    if let Some(gv) = f.gevrey {
        out.gevrey = Some(gv);
    }
    Ok(out)
}

/// `c_k p^k -> c_k k! x^{-k-1}`.
pub fn formal_laplace(f: &FormalPowerSeries) -> Result<FormalPowerSeries> {
    if f.var != Variable::P {
        return Err(Error::Precondition("formal Laplace transform expects a series in p".into()));
    }
    let g = f.gen.clone();
    let mut out = FormalPowerSeries::new(Variable::InvX, move |k| g(k) * factorial(k));
    out.gevrey = f.gevrey;
    Ok(out)
}

pub(crate) fn ln_abs_big(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits < 1000 {
        n.to_f64().unwrap().abs().ln()
    } else {
        let shift = bits - 900;
        (n.abs() >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
    }
}

pub(crate) fn ln_abs(q: &Rational) -> f64 {
    ln_abs_big(q.numer()) - ln_abs_big(q.denom())
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

fn slope_fit(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Fits `ln(|c_k| / k!) ~ ln C - k ln rho` over `k < depth` and returns the
/// envelope constant that makes the bound hold on every inspected index.
pub fn gevrey1_certificate(f: &FormalPowerSeries, depth: usize) -> Result<Gevrey> {
    if depth < 4 {
        return Err(Error::Precondition("Gevrey inspection needs at least 4 coefficients".into()));
    }
    let pts: Vec<(f64, f64)> = (0..depth)
        .filter_map(|k| {
            let c = f.coeff(k);
            (!c.is_zero()).then(|| (k as f64, ln_abs(&c) - ln_factorial(k)))
        })
        .collect();
    if pts.is_empty() {
        return Ok(Gevrey { c: 0.0, rho: 1.0 });
    }
    let half = depth as f64 / 2.0;
    let early: Vec<_> = pts.iter().copied().filter(|p| p.0 >= depth as f64 / 4.0 && p.0 < half).collect();
    let late: Vec<_> = pts.iter().copied().filter(|p| p.0 >= half).collect();
    let rho = match (slope_fit(&early), slope_fit(&late)) {
        (Some((se, _)), Some((sl, _))) => {
            let (re, rl) = ((-se).exp(), (-sl).exp());
            if rl < re / 1.5 {
                return Err(Error::NotGevrey(format!(
                    "growth rate rises from {re:.4} to {rl:.4} across the window"
                )));
            }
            rl.min(re.max(rl))
        }
        (_, Some((sl, _))) => (-sl).exp(),
        _ => slope_fit(&pts).map_or(1.0, |(s, _)| (-s).exp()),
    };
    if !(1e-3..=1e3).contains(&rho) || !rho.is_finite() {
        return Err(Error::NotGevrey(format!("fitted radius {rho:e} outside [1e-3, 1e3]")));
    }
    let lnc = pts.iter().map(|(k, u)| u + k * rho.ln()).fold(f64::NEG_INFINITY, f64::max);
    Ok(Gevrey { c: lnc.exp(), rho })
}

/// A pole of the continued Borel transform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pole {
    pub at: Complex64,
    pub residue: Complex64,
}

/// A diagonal Padé approximant `num / den` (ascending coefficients, `den[0] = 1`).
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuationModel {
    pub num: Vec<Rational>,
    pub den: Vec<Rational>,
    pub poles: Vec<Pole>,
}

fn horner_c(c: &[f64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn to_f64s(c: &[Rational]) -> Vec<f64> {
    c.iter().map(rational_to_f64).collect()
}

impl ContinuationModel {
    /// A model with no denominator.
    pub fn polynomial(num: Vec<Rational>) -> Self {
        ContinuationModel { num, den: vec![Rational::one()], poles: Vec::new() }
    }

    /// Builds the model and locates its poles.
    pub fn from_parts(num: Vec<Rational>, den: Vec<Rational>) -> Self {
        let poles = find_poles(&num, &den);
        ContinuationModel { num, den, poles }
    }

    pub fn eval(&self, p: f64) -> f64 {
        horner(&to_f64s(&self.num), p) / horner(&to_f64s(&self.den), p)
    }

    /// Taylor coefficients of `num / den` at 0.
    pub fn taylor(&self, n: usize) -> Vec<Rational> {
        let mut out: Vec<Rational> = Vec::with_capacity(n);
        for k in 0..n {
            let mut v = self.num.get(k).cloned().unwrap_or_else(Rational::zero);
            for j in 1..self.den.len().min(k + 1) {
                v -= &self.den[j] * &out[k - j];
            }
            out.push(v / &self.den[0]);
        }
        out
    }

    /// Poles with `|Im| <= 1e-9 (1 + |z|)` and positive real part.
    pub fn positive_axis_poles(&self) -> Vec<Pole> {
        self.poles
            .iter()
            .copied()
            .filter(|p| p.at.im.abs() <= 1e-9 * (1.0 + p.at.norm()) && p.at.re > 0.0)
            .collect()
    }

    fn max_pole(&self) -> f64 {
        self.poles.iter().map(|p| p.at.norm()).fold(0.0, f64::max)
    }
}

fn find_poles(num: &[Rational], den: &[Rational]) -> Vec<Pole> {
    let mut d = to_f64s(den);
    while d.len() > 1 && *d.last().unwrap() == 0.0 {
        d.pop();
    }
    let deg = d.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = d[deg];
    let monic: Vec<f64> = d.iter().map(|c| c / lead).collect();
    let mut roots: Vec<Complex64> = (0..deg)
        .map(|k| Complex64::new(0.4, 0.9).powu(k as u32) * (1.0 + monic[0].abs()).powf(1.0 / deg as f64))
        .collect();
    for _ in 0..2000 {
        let mut delta: f64 = 0.0;
        for i in 0..deg {
            let zi = roots[i];
            let mut denom = Complex64::new(1.0, 0.0);
            for (j, zj) in roots.iter().enumerate() {
                if j != i {
                    denom *= zi - zj;
                }
            }
            let step = horner_c(&monic, zi) / denom;
            roots[i] = zi - step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    let nf = to_f64s(num);
    let dprime: Vec<f64> = d.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect();
    roots
        .into_iter()
        .map(|z| {
            let z = if z.im.abs() < 1e-12 * (1.0 + z.norm()) { Complex64::new(z.re, 0.0) } else { z };
            Pole { at: z, residue: horner_c(&nf, z) / horner_c(&dprime, z) }
        })
        .collect()
}

/// Exact row reduction; free unknowns are set to zero.
fn solve_minimal(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>, unknowns: usize) -> Result<Vec<Rational>> {
    let rows = a.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..unknowns {
        let Some(p) = (r..rows).find(|&i| !a[i][col].is_zero()) else { continue };
        a.swap(r, p);
        b.swap(r, p);
        let inv = a[r][col].recip();
        for x in &mut a[r][col..] {
            *x = &*x * &inv;
        }
        b[r] = &b[r] * &inv;
        let pivot = a[r].clone();
        for i in 0..rows {
            if i != r && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for (x, p) in a[i][col..].iter_mut().zip(&pivot[col..]) {
                    *x -= &f * p;
                }
                let t = &f * &b[r];
                b[i] -= t;
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows {
            break;
        }
    }
    if b[r..].iter().any(|v| !v.is_zero()) {
        return Err(Error::Rank("Padé system is inconsistent".into()));
    }
    let mut x = vec![Rational::zero(); unknowns];
    for (i, &col) in pivots.iter().enumerate() {
        x[col] = b[i].clone();
    }
    Ok(x)
}

/// Diagonal `[m/m]` Padé approximant of a Borel-plane series.
pub fn pade_continue(f: &FormalPowerSeries, order: usize) -> Result<ContinuationModel> {
    if f.var != Variable::P {
        return Err(Error::Precondition("Padé continuation works in the Borel plane".into()));
    }
    let m = order;
    let c = f.coefficients(2 * m + 1);
    let a: Vec<Vec<Rational>> =
        (m + 1..=2 * m).map(|k| (1..=m).map(|j| c[k - j].clone()).collect()).collect();
    let b: Vec<Rational> = (m + 1..=2 * m).map(|k| -c[k].clone()).collect();
    let q_tail = if m == 0 { Vec::new() } else { solve_minimal(a, b, m)? };
    let mut den = vec![Rational::one()];
    den.extend(q_tail);
    let mut num: Vec<Rational> =
        (0..=m).map(|k| (0..=k).map(|j| &den[j] * &c[k - j]).fold(Rational::zero(), |s, t| s + t)).collect();
    while den.len() > 1 && den.last().unwrap().is_zero() {
        den.pop();
    }
    while num.len() > 1 && num.last().unwrap().is_zero() {
        num.pop();
    }
    let model = ContinuationModel::from_parts(num, den);
    if model.taylor(2 * m + 1) != c {
        return Err(Error::Rank("Padé model does not reproduce the input coefficients".into()));
    }
    Ok(model)
}

fn relative_tol(model: &ContinuationModel, x: f64, tol: f64) -> f64 {
    let scale = [0.0, 0.5, 1.0, 2.0]
        .iter()
        .map(|s| model.eval(s / x).abs())
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max)
        / x;
    tol * scale.max(1e-300)
}

/// `int_0^inf e^{-x p} model(p) dp` for a model without poles on `[0, inf)`.
pub fn laplace_quadrature(model: &ContinuationModel, x: f64, tol: f64) -> Result<Estimate> {
    if x <= 0.0 {
        return Err(Error::Domain(format!("Laplace transform at x = {x}")));
    }
    if let Some(p) = model.positive_axis_poles().first() {
        return Err(Error::PoleOnPositiveAxis(p.at.re));
    }
    let span = (50.0 / x).max(4.0 * model.max_pole());
    let t = relative_tol(model, x, tol);
    Ok(quad::integrate_to_infinity(|p| (-x * p).exp() * model.eval(p), 0.0, span, t))
}

/// Principal value (half-half lateral average) for simple poles on `(0, inf)`.
pub fn pv_laplace(model: &ContinuationModel, x: f64, tol: f64) -> Result<Estimate> {
    if x <= 0.0 {
        return Err(Error::Domain(format!("Laplace transform at x = {x}")));
    }
    let mut real: Vec<Pole> = model.positive_axis_poles();
    if real.is_empty() {
        return laplace_quadrature(model, x, tol);
    }
    real.sort_by(|a, b| a.at.re.total_cmp(&b.at.re));
    for w in real.windows(2) {
        if (w[1].at.re - w[0].at.re).abs() < 1e-6 * (1.0 + w[0].at.re) {
            return Err(Error::Unsupported("higher-order pole on the positive axis".into()));
        }
    }
    let t = relative_tol(model, x, tol);
    let f = |p: f64| (-x * p).exp() * model.eval(p);
    let mut value = 0.0;
    let mut error = 0.0;
    let mut lo = 0.0;
    for (i, pole) in real.iter().enumerate() {
        let p0 = pole.at.re;
        let mut delta = (p0 / 2.0).min(1.0);
        if i > 0 {
            delta = delta.min((p0 - real[i - 1].at.re) / 2.0);
        }
        if let Some(next) = real.get(i + 1) {
            delta = delta.min((next.at.re - p0) / 2.0);
        }
        let r = pole.residue.re * (-x * p0).exp();
        let g = |p: f64| f(p) - r / (p - p0);
        for (a, b, window) in [(lo, p0 - delta, false), (p0 - delta, p0, true), (p0, p0 + delta, true)] {
            if b > a {
                let e = if window { quad::integrate(g, a, b, t) } else { quad::integrate(f, a, b, t) };
                value += e.value;
                error += e.error;
            }
        }
        lo = p0 + delta;
    }
    let span = (50.0 / x).max(4.0 * model.max_pole());
    let tail = quad::integrate_to_infinity(f, lo, span, t);
    Ok(Estimate { value: value + tail.value, error: error + tail.error })
}

/// Borel summation route.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Pade,
    LeastTerm,
    Pv,
}

/// Borel sum of `f` (a series in `1/x`) at `x`.
pub fn borel_sum(f: &FormalPowerSeries, x: f64, method: Method, order: usize, tol: f64) -> Result<Estimate> {
    match method {
        Method::LeastTerm => {
            let rho = f.gevrey.map_or(1.0, |g| g.rho);
            let (v, k) = least_term_sum(f, rho, x)?;
            let next = f.coeff(k + 1);
            let err = (ln_abs(&next) - (k as f64 + 2.0) * x.ln()).exp();
            Ok(Estimate { value: v, error: if next.is_zero() { 0.0 } else { err } })
        }
        Method::Pade | Method::Pv => {
            let model = pade_continue(&borel_transform(f)?, order)?;
            if method == Method::Pade {
                laplace_quadrature(&model, x, tol)
            } else {
                pv_laplace(&model, x, tol)
            }
        }
    }
}

/// `sum_{k <= rho x} c_k x^{-k-1}` and the last index used.
pub fn least_term_sum(f: &FormalPowerSeries, rho: f64, x: f64) -> Result<(f64, usize)> {
    if f.var != Variable::InvX {
        return Err(Error::Precondition("least-term summation expects a series in 1/x".into()));
    }
    if x <= 1.0 {
        return Err(Error::Domain(format!("least-term summation needs x > 1, got {x}")));
    }
    let kmax = (rho * x).floor() as usize;
    let lx = x.ln();
    let mut s = 0.0;
    for k in 0..=kmax {
        let c = f.coeff(k);
        if c.is_zero() {
            continue;
        }
        let mag = (ln_abs(&c) - (k as f64 + 1.0) * lx).exp();
        s += if c.is_negative() { -mag } else { mag };
    }
    Ok((s, kmax))
}

/// Exact least-term sum at a rational point.
pub fn least_term_sum_exact(
    f: &FormalPowerSeries,
    rho: &Rational,
    x: &Rational,
) -> Result<(Rational, usize)> {
    if x <= &int(1) {
        return Err(Error::Domain(format!("least-term summation needs x > 1, got {x}")));
    }
    let kmax = (rho * x).floor().to_integer().to_usize().unwrap_or(0);
    let xinv = x.recip();
    let mut pow = xinv.clone();
    let mut s = Rational::zero();
    for k in 0..=kmax {
        s += f.coeff(k) * &pow;
        pow = &pow * &xinv;
    }
    Ok((s, kmax))
}

/// `sup_x |oracle(x) - least_term_sum(x)| / (e^{-rho x} x^b)` over the grid.
pub fn least_term_error_constant(
    oracle: &dyn Fn(f64) -> f64,
    f: &FormalPowerSeries,
    b: f64,
    rho: f64,
    grid: &[f64],
) -> Result<f64> {
    let mut ratios = Vec::with_capacity(grid.len());
    for &x in grid {
        let (s, _) = least_term_sum(f, rho, x)?;
        let r = (oracle(x) - s).abs() / ((-rho * x).exp() * x.powf(b));
        if !r.is_finite() {
            return Err(Error::NotApplicable(format!("error ratio is not finite at x = {x}")));
        }
        ratios.push(r);
    }
    sup_of(&ratios)
}

pub(crate) fn sup_of(ratios: &[f64]) -> Result<f64> {
    let sup = ratios.iter().copied().fold(0.0, f64::max);
    let n = ratios.len();
    if n >= 4
        && ratios[n - 1] == sup
        && ratios[n - 1] > 2.0 * ratios[n - 2]
        && ratios[n - 2] > 2.0 * ratios[n - 3]
    {
        return Err(Error::NotApplicable("error ratio grows without bound on the grid".into()));
    }
    Ok(sup)
}

/// Borel-plane antiderivative: with `f' = x^b e^{-a x} y(x)` and
/// `f = x^b e^{-a x} g(x)`, returns `G = B g` from `Y = B y` via
/// `(a + p) G' = (b - 1) G - Y'`, `G(0) = -Y(0)/a`.
pub fn borel_plane_integrate(y: &FormalPowerSeries, a: &Rational, b: &Rational) -> Result<FormalPowerSeries> {
    if y.var != Variable::P {
        return Err(Error::Precondition("Borel-plane integration expects a series in p".into()));
    }
    if a.is_zero() {
        return Err(Error::Domain("singular kernel: a = 0".into()));
    }
    let (a, b) = (a.clone(), b.clone());
    let yg = y.gen.clone();
    Ok(FormalPowerSeries::recurrence(Variable::P, move |k, prev| {
        if k == 0 {
            -yg(0) / &a
        } else {
            let j = k - 1;
            ((&b - int(1) - int(j as i64)) * &prev[j] - int(k as i64) * yg(k)) / (&a * int(k as i64))
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn factorial_series(alternating: bool) -> FormalPowerSeries {
        FormalPowerSeries::new(Variable::InvX, move |k| {
            let s = if alternating && k % 2 == 1 { -1 } else { 1 };
            factorial(k) * int(s)
        })
    }

    #[test]
    fn transforms() {
        let b = borel_transform(&factorial_series(false)).unwrap();
        assert!(b.coefficients(10).iter().all(|c| c.is_one()));
        let delta = FormalPowerSeries::from_coeffs(Variable::InvX, vec![int(1)]);
        assert_eq!(borel_transform(&delta).unwrap().coefficients(3), vec![int(1), int(0), int(0)]);
        let f = FormalPowerSeries::new(Variable::InvX, |k| rat(k as i64 + 3, 7));
        let back = formal_laplace(&borel_transform(&f).unwrap()).unwrap();
        assert_eq!(back.coefficients(32), f.coefficients(32));
    }

    #[test]
    fn gevrey_fits() {
        let g = gevrey1_certificate(&factorial_series(false), 40).unwrap();
        assert!((g.rho - 1.0).abs() < 1e-9 && (g.c - 1.0).abs() < 1e-9);
        let half = FormalPowerSeries::new(Variable::InvX, |k| {
            factorial(k) / Rational::from_integer(BigInt::from(2).pow(k as u32))
        });
        assert!((gevrey1_certificate(&half, 40).unwrap().rho - 2.0).abs() < 1e-9);
        let sq = FormalPowerSeries::new(Variable::InvX, |k| factorial(k) * factorial(k));
        assert!(matches!(gevrey1_certificate(&sq, 40), Err(Error::NotGevrey(_))));
    }

    #[test]
    fn pade_examples() {
        let geo = FormalPowerSeries::new(Variable::P, |_| int(1));
        let m = pade_continue(&geo, 4).unwrap();
        assert_eq!(m.den, vec![int(1), int(-1)]);
        assert_eq!(m.poles.len(), 1);
        assert!((m.poles[0].at.re - 1.0).abs() < 1e-12);
        let poly = FormalPowerSeries::from_coeffs(Variable::P, vec![int(1), int(2), int(3)]);
        let m = pade_continue(&poly, 3).unwrap();
        assert!(m.poles.is_empty());
        assert_eq!(m.num, vec![int(1), int(2), int(3)]);
    }

    #[test]
    fn laplace_examples() {
        let one = ContinuationModel::polynomial(vec![int(1)]);
        assert!((laplace_quadrature(&one, 4.0, 1e-12).unwrap().value - 0.25).abs() < 1e-13);
        let p = ContinuationModel::polynomial(vec![int(0), int(1)]);
        assert!((laplace_quadrature(&p, 4.0, 1e-12).unwrap().value - 1.0 / 16.0).abs() < 1e-13);
        let bad = ContinuationModel::from_parts(vec![int(1)], vec![int(1), int(-1)]);
        assert!(matches!(laplace_quadrature(&bad, 10.0, 1e-10), Err(Error::PoleOnPositiveAxis(_))));
        let good = ContinuationModel::from_parts(vec![int(1)], vec![int(1), int(1)]);
        let mut prev = f64::INFINITY;
        for x in [1.0, 2.0, 5.0, 10.0, 20.0] {
            let v = laplace_quadrature(&good, x, 1e-12).unwrap().value * (-x).exp();
            assert!(v < prev);
            prev = v;
        }
        let same = pv_laplace(&good, 3.0, 1e-12).unwrap().value;
        assert_eq!(same, laplace_quadrature(&good, 3.0, 1e-12).unwrap().value);
    }

    #[test]
    fn least_terms() {
        let f = factorial_series(false);
        assert_eq!(least_term_sum(&f, 1.0, 1.5).unwrap().1, 1);
        let (s, _) = least_term_sum_exact(&f, &int(1), &rat(3, 2)).unwrap();
        assert_eq!(s, rat(2, 3) + rat(4, 9));
        let poly = FormalPowerSeries::from_coeffs(Variable::InvX, vec![int(1), int(2)]);
        let c = least_term_error_constant(&|x| 1.0 / x + 2.0 / (x * x), &poly, 0.5, 1.0, &[2.0, 3.0, 4.0])
            .unwrap();
        assert_eq!(c, 0.0);
    }

    #[test]
    fn borel_plane_recurrence() {
        let y = FormalPowerSeries::from_coeffs(Variable::P, vec![int(1)]);
        let g = borel_plane_integrate(&y, &int(1), &int(1)).unwrap();
        assert_eq!(g.coefficients(4), vec![int(-1), int(0), int(0), int(0)]);
        let y = FormalPowerSeries::new(Variable::P, |k| rat(1, k as i64 + 2));
        let (a, b) = (rat(3, 2), rat(-1, 3));
        let g = borel_plane_integrate(&y, &a, &b).unwrap().coefficients(18);
        let yc = y.coefficients(18);
        for k in 0..16 {
            let lhs = &a * int(k as i64 + 1) * &g[k + 1] + int(k as i64) * &g[k];
            let rhs = (&b - int(1)) * &g[k] - int(k as i64 + 1) * &yc[k + 1];
            assert_eq!(lhs, rhs);
        }
        assert!(borel_plane_integrate(&y, &int(0), &b).is_err());
    }
}
