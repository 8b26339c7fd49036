//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line with the
//! measured quantities (`cargo test --test acceptance -- --nocapture`).

mod common;

use std::io::Write;
use std::time::Instant;

use common::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use surreal::borel::{self, FormalPowerSeries, Method, Variable};
use surreal::genetic::{self, EiValue, GeneticBracket};
use surreal::nf::{nf_add, nf_mul};
use surreal::scalar::{int, rat};
use surreal::special;
use surreal::stream::{factorial, nf_inverse};
use surreal::transseries::{definite_integral, GeneratorSet, Mono, Point, Transseries};
use surreal::{Constant, Rational, Scalar, Surreal};

fn report(n: u32, name: &str, ok: bool, detail: String) {
    // Written to the handle directly so the line survives libtest's output capture.
    let _ = writeln!(std::io::stderr(), "[{}] {n:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} ({name}) failed: {detail}");
}

#[test]
fn c01_field_axioms() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(1);
    let zero = Surreal::zero();
    let one = Surreal::one();
    let mut failures = 0;
    let mut inverses = 0;
    for _ in 0..10_000 {
        let a = random_nf(&mut rng, 3, 6);
        let b = random_nf(&mut rng, 3, 6);
        let c = random_nf(&mut rng, 3, 6);
        let ab = nf_add(&a, &b).unwrap();
        let ok = ab == nf_add(&b, &a).unwrap()
            && nf_add(&ab, &c).unwrap() == nf_add(&a, &nf_add(&b, &c).unwrap()).unwrap()
            && nf_mul(&a, &b).unwrap() == nf_mul(&b, &a).unwrap()
            && nf_mul(&nf_mul(&a, &b).unwrap(), &c).unwrap() == nf_mul(&a, &nf_mul(&b, &c).unwrap()).unwrap()
            && nf_mul(&a, &nf_add(&b, &c).unwrap()).unwrap()
                == nf_add(&nf_mul(&a, &b).unwrap(), &nf_mul(&a, &c).unwrap()).unwrap()
            && nf_add(&a, &zero).unwrap() == a
            && nf_mul(&a, &one).unwrap() == a
            && (&a - &a).is_zero();
        if !ok {
            failures += 1;
        }
        if !a.is_zero() {
            let inv = nf_inverse(&a).unwrap();
            let t = inv.level_threshold(10).unwrap();
            let head = inv.above(&t).unwrap();
            let residual = &(&a * &head) - &one;
            let bound = a.leading_exponent().unwrap() + &t;
            if residual.leading_exponent().is_some_and(|e| *e > bound) {
                failures += 1;
            }
            inverses += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        1,
        "normal-form field axioms",
        failures == 0 && secs < 30.0,
        format!("10000 triples, {inverses} inverse round trips, {failures} failures, {secs:.1}s"),
    );
}

#[test]
fn c02_ei_at_omega() {
    let c = Scalar::ratio(354, 100);
    let v = genetic::genetic_ei(&Surreal::omega(), &c).unwrap();
    let s = v.stream().unwrap();
    let terms = s.terms(12).unwrap();
    let mut ok = s.atom() == &Surreal::omega() && terms.len() == 12;
    for (k, (e, coeff)) in terms.iter().enumerate() {
        ok &= *e == Surreal::from_int(-(k as i64) - 1) && *coeff == Scalar::Rat(factorial(k));
    }
    let from_one = genetic::ei_from_one(&Surreal::omega(), &c).unwrap();
    let sectors: Vec<_> = from_one.sectors().collect();
    ok &= sectors.len() == 2
        && sectors[0].terms(12).unwrap() == terms
        && sectors[1].as_finite() == Some(&Surreal::from_scalar(-Scalar::constant(Constant::Ei1)));
    report(
        2,
        "Ei at omega",
        ok,
        format!("Ei(w) = exp(w)*({}) ..., Ei(1,w) subtracts Ei(1)", Surreal::from_terms(terms[..4].to_vec())),
    );
}

#[test]
fn c03_least_term_constant() {
    let start = Instant::now();
    let grid = special::half_grid(2, 40);
    let c = special::ei_least_term_constant(&grid).unwrap();
    let mut oracle_err: f64 = 0.0;
    for x in &grid {
        let xf = surreal::scalar::rational_to_f64(x);
        let precise = special::fixed::to_f64(&special::fixed::ei(x));
        let fast = special::ei_oracle(xf);
        oracle_err = oracle_err.max(((fast.value - precise) / precise).abs());
    }
    let rel = (c - 3.54).abs() / 3.54;
    let secs = start.elapsed().as_secs_f64();
    report(
        3,
        "least-term constant for Ei",
        (3.3..=3.8).contains(&c) && rel <= 0.03 && oracle_err < 1e-12 && secs < 10.0,
        format!("C = {c:.4} ({:.1}% from 3.54), oracle rel. error {oracle_err:.1e}, {secs:.2}s", 100.0 * rel),
    );
}

#[test]
fn c04_borel_sum() {
    let alt = FormalPowerSeries::new(Variable::InvX, |k| factorial(k) * int(if k % 2 == 0 { 1 } else { -1 }));
    let plain = FormalPowerSeries::new(Variable::InvX, factorial);
    let mut worst: f64 = 0.0;
    let mut worst_pv: f64 = 0.0;
    for x in [5.0, 10.0, 20.0] {
        let v = borel::borel_sum(&alt, x, Method::Pade, 8, 1e-12).unwrap().value;
        let oracle = special::e1_scaled(x);
        worst = worst.max(((v - oracle) / oracle).abs());
        let pv = borel::borel_sum(&plain, x, Method::Pv, 8, 1e-12).unwrap().value;
        let ei = special::ei_f64(x) * (-x).exp();
        worst_pv = worst_pv.max(((pv - ei) / ei).abs());
    }
    report(
        4,
        "Borel sum of the factorial series",
        worst < 1e-8 && worst_pv < 1e-8,
        format!("max rel. error vs e^x E1(x): {worst:.1e}; principal value vs e^-x Ei(x): {worst_pv:.1e}"),
    );
}

#[test]
fn c05_stirling() {
    let ts = special::lngamma_transseries(3);
    let ln_ok = [(-1, rat(1, 12)), (-3, rat(-1, 360)), (-5, rat(1, 1260))]
        .iter()
        .all(|(p, c)| ts.coeff(&Mono::new(int(0), int(*p), 0)) == Scalar::Rat(c.clone()));
    let st = special::stirling_at_omega().unwrap();
    let terms = st.series.terms(5).unwrap();
    let want = [rat(1, 1), rat(1, 12), rat(1, 288), rat(-139, 51840), rat(-571, 2488320)];
    let mut ok = ln_ok && terms.len() == 5;
    for (j, (e, c)) in terms.iter().enumerate() {
        ok &= *e == Surreal::from_rational(rat(-1, 2) - int(j as i64)) && *c == Scalar::Rat(want[j].clone());
    }
    ok &= special::stirling_coefficients(8)[..5] == want[..];
    let shown: Vec<String> = terms.iter().skip(1).map(|(_, c)| c.to_string()).collect();
    report(5, "Stirling reexpansion", ok, format!("w^-1..w^-4 coefficients: {}", shown.join(", ")));
}

#[test]
fn c06_integral_contract() {
    let e = Transseries::exp_linear(int(1)).with_generators(GeneratorSet::unit()).unwrap();
    let v = definite_integral(&e, &Point::Finite(int(0)), &Point::Infinite(Surreal::omega())).unwrap();
    let parts: Vec<_> = v.sectors().map(|s| (s.atom().clone(), s.as_finite().cloned())).collect();
    let exact = parts
        == vec![(Surreal::omega(), Some(Surreal::one())), (Surreal::zero(), Some(Surreal::from_int(-1)))];

    let mut rng = StdRng::seed_from_u64(6);
    let mut failed: Vec<String> = Vec::new();
    for i in 0..50 {
        let (f, g) = if i % 2 == 0 {
            (random_power_log(&mut rng, 8), random_power_log(&mut rng, 8))
        } else {
            (random_exponential(&mut rng, 8), random_exponential(&mut rng, 8))
        };
        for (name, ok) in integral_properties(&f, &g, &mut rng) {
            if !ok {
                failed.push(format!("pair {i} ({name})"));
            }
        }
    }
    report(
        6,
        "integral contract",
        exact && failed.is_empty(),
        format!(
            "int_0^w e^s ds = {}; (a)-(g) on 50 pairs: {}",
            v.render(8, false).unwrap_or_else(|e| e.to_string()),
            if failed.is_empty() { "all hold".into() } else { failed.join(", ") }
        ),
    );
}

fn agree(a: &Transseries, b: &Transseries) -> bool {
    let n = match (a.cut(), b.cut()) {
        (Some(x), Some(y)) => x.min(y).clone(),
        (Some(x), None) | (None, Some(x)) => x.clone(),
        (None, None) => return a == b,
    };
    a.truncate(n.clone()) == b.truncate(n)
}

fn constant_only(a: &Transseries) -> bool {
    a.terms().all(|(m, _)| *m == Mono::one())
}

fn integral_properties(f: &Transseries, g: &Transseries, rng: &mut StdRng) -> Vec<(&'static str, bool)> {
    let big_f = f.integrate().unwrap();
    let big_g = g.integrate().unwrap();
    let alpha = Scalar::Rat(small_rational(rng));
    let beta = Scalar::Rat(small_rational(rng));
    // (a) the integral is an antiderivative
    let a = agree(&big_f.diff(), f);
    // (b) linearity
    let lin = f.scale(&alpha).add(&g.scale(&beta)).unwrap().integrate().unwrap();
    let b = agree(&lin, &big_f.scale(&alpha).add(&big_g.scale(&beta)).unwrap());
    // (c) int f' = f up to a constant
    let c = constant_only(&f.diff().integrate().unwrap().sub(f).unwrap().truncate(f.cut().unwrap() - int(1)));
    // (d) additivity over w < w + 1 < w + w^(1/2)
    let pts = [
        Surreal::omega(),
        &Surreal::omega() + &Surreal::one(),
        &Surreal::omega() + &Surreal::omega_rat(rat(1, 2)),
    ];
    let p = |x: &Surreal| Point::Infinite(x.clone());
    let d = (|| -> surreal::Result<bool> {
        let i12 = definite_integral(f, &p(&pts[0]), &p(&pts[1]))?;
        let i23 = definite_integral(f, &p(&pts[1]), &p(&pts[2]))?;
        let i13 = definite_integral(f, &p(&pts[0]), &p(&pts[2]))?;
        Ok(sectors_agree_above(&i12.add(&i23)?, &i13, &known_threshold(&big_f)))
    })()
    .unwrap_or(false);
    // (e) integration by parts: int f'g + int fg' - fg is constant
    let e = (|| -> surreal::Result<bool> {
        let lhs = f.diff().mul(g)?.integrate()?.add(&f.mul(&g.diff())?.integrate()?)?;
        let r = lhs.sub(&f.mul(g)?)?;
        Ok(constant_only(&r))
    })()
    .unwrap_or(false);
    // (f) substitution s -> s + h
    let h = rat(1, 2);
    let fs = (|| -> surreal::Result<bool> {
        let cut = f.cut().unwrap().clone();
        let lhs = f.compose_shift(&h, cut.clone())?.integrate()?;
        let rhs = big_f.compose_shift(&h, cut)?;
        Ok(constant_only(&lhs.sub(&rhs)?))
    })()
    .unwrap_or(false);
    // (g) positivity on w < w + w^(1/2)
    let pos = if f.dominant().map(|(_, c)| c.signum() > 0).unwrap_or(false) { f.clone() } else { f.neg() };
    let gpos = (|| -> surreal::Result<bool> {
        let v = definite_integral(&pos, &p(&pts[0]), &p(&pts[2]))?;
        for s in v.sectors() {
            if let Some((_, c)) = s.first_term()? {
                return Ok(c.signum() > 0);
            }
        }
        Ok(false)
    })()
    .unwrap_or(false);
    vec![("a", a), ("b", b), ("c", c), ("d", d), ("e", e), ("f", fs), ("g", gpos)]
}

/// A threshold above which every sector of `F(x0)` is known for `x0 ~ w`.
fn known_threshold(big_f: &Transseries) -> Surreal {
    let c = big_f.degree_constant();
    let n = big_f.cut().cloned().unwrap_or_else(|| int(0));
    let w = big_f.terms().map(|(m, _)| m.w.clone()).max().unwrap_or_else(|| int(0));
    Surreal::from_rational(&c * &w - n + int(1))
}

#[test]
fn c07_truncation_brackets() {
    let mut rng = StdRng::seed_from_u64(7);
    let mut bad = 0;
    for _ in 0..1000 {
        let floor = rand::Rng::gen_range(&mut rng, -4i64..=2);
        let x = random_above(&mut rng, floor, 5);
        let y = random_below(&mut rng, floor, 4);
        let r = GeneticBracket::new(vec![&x - &y], vec![&x + &y]).and_then(|b| b.resolve());
        if r.as_ref() != Ok(&x) {
            bad += 1;
        }
    }
    report(7, "truncation-bracket law", bad == 0, format!("1000 brackets {{x-y | x+y}}, {bad} mismatches"));
}

#[test]
fn c08_genetic_vs_analytic() {
    let x0 = &Surreal::omega() + &Surreal::one();
    let ts = special::ei_transseries(14).eval_at(&x0).unwrap();
    let sector = ts.single().unwrap().clone();
    let EiValue::Stream(gen) = genetic::genetic_ei(&x0, &Scalar::ratio(354, 100)).unwrap() else {
        panic!("stream expected")
    };
    let t = gen.level_threshold(6).unwrap();
    let lhs = sector.above(&t).unwrap();
    let rhs = gen.above(&t).unwrap();
    let ok = sector.atom() == gen.atom() && lhs == rhs;
    report(
        8,
        "genetic vs analytic Ei at w+1",
        ok,
        format!("{} terms agree above w^({t}); atom {}", lhs.len(), gen.atom()),
    );
}

#[test]
fn c09_erfi() {
    let v = special::erfi_asymptotic(6.0);
    let q = special::erfi_integral_oracle(6.0);
    let rel = ((v - q.value) / q.value).abs();
    let g = special::erfi_g_transseries(10);
    let t_inv = Transseries::monomial(Mono::new(int(0), int(-1), 0), Scalar::ratio(1, 2));
    let residual = g.diff().add(&g).unwrap().add(&g.mul(&t_inv).unwrap()).unwrap().sub(&t_inv).unwrap();
    let f = special::erfi_transseries(10).unwrap();
    let deriv =
        f.diff().sub(&Transseries::monomial(Mono::new(int(-1), rat(-1, 2), 0), Scalar::ratio(1, 2))).unwrap();
    let ok = rel < 1e-6 && residual.is_zero() && deriv.is_zero() && g.len() == 10;
    report(
        9,
        "erfi expansion",
        ok,
        format!("x = 6: rel. error {rel:.1e} vs quadrature; ODE residual through 10 terms is zero"),
    );
}

#[test]
fn c10_lngamma() {
    let mut worst: f64 = 0.0;
    let mut lnfact = 0.0f64;
    for n in 2..=15u32 {
        lnfact += ((n - 1) as f64).ln();
        let v = special::lngamma_oracle(n as f64).unwrap().value;
        worst = worst.max((v - lnfact).abs());
    }
    let direct: f64 = (1..=50).map(|k| (k as f64).ln()).sum();
    let series = special::sum_ln_to_omega(6).unwrap().eval_f64(50.0);
    let diff = (direct - series).abs();
    report(
        10,
        "ln Gamma integral representation",
        worst < 1e-10 && diff < 1e-8,
        format!("max |oracle - ln (n-1)!| = {worst:.1e}; |sum ln k - series| at 50 = {diff:.1e}"),
    );
}

#[test]
fn c11_simplest_dyadic() {
    let start = Instant::now();
    let mut all: Vec<(Rational, u64)> = (0..=8usize)
        .flat_map(|len| {
            (0..1u32 << len).map(move |bits| (0..len).map(|i| bits >> i & 1 == 1).collect::<Vec<bool>>())
        })
        .map(|s| {
            let q = genetic::from_sign_expansion(&s);
            let b = genetic::birthday(&q).unwrap();
            (q, b)
        })
        .collect();
    all.sort_by_key(|(_, b)| *b);
    let ends: Vec<&Rational> = all.iter().filter(|(_, b)| *b <= 7).map(|(q, _)| q).collect();
    // Sorted by birthday, so the first number inside the bracket is the simplest.
    let search = |lo: Option<&Rational>, hi: Option<&Rational>| -> Option<Rational> {
        all.iter().map(|(q, _)| q).find(|q| lo.is_none_or(|l| *q > l) && hi.is_none_or(|h| *q < h)).cloned()
    };
    let mut pairs = 0;
    let mut bad = 0;
    for (i, l) in ends.iter().enumerate() {
        for r in &ends[i + 1..] {
            let (l, r) = if l < r { (*l, *r) } else { (*r, *l) };
            pairs += 1;
            if genetic::simplest_dyadic_between(std::slice::from_ref(l), std::slice::from_ref(r)).ok()
                != search(Some(l), Some(r))
            {
                bad += 1;
            }
        }
        pairs += 2;
        if genetic::simplest_dyadic_between(&[(*l).clone()], &[]).ok() != search(Some(l), None) {
            bad += 1;
        }
        if genetic::simplest_dyadic_between(&[], &[(*l).clone()]).ok() != search(None, Some(l)) {
            bad += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        11,
        "simplest dyadic vs exhaustive search",
        bad == 0 && secs < 60.0,
        format!("{pairs} brackets, {bad} mismatches, {secs:.1}s"),
    );
}
