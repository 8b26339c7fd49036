#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::Rng;
use surreal::scalar::{int, rat};
use surreal::stream::SectoredStream;
use surreal::transseries::{GeneratorSet, Mono, Transseries};
use surreal::{Rational, Scalar, Surreal};

pub fn small_rational(rng: &mut StdRng) -> Rational {
    let mut n = rng.gen_range(-9i64..=9);
    if n == 0 {
        n = 1;
    }
    rat(n, rng.gen_range(1i64..=4))
}

/// A normal form of depth at most `depth` with at most `max_terms` terms.
pub fn random_nf(rng: &mut StdRng, depth: usize, max_terms: usize) -> Surreal {
    if depth == 0 {
        return Surreal::zero();
    }
    let n = rng.gen_range(0..=max_terms);
    let terms = (0..n).map(|_| {
        let e = if depth == 1 { Surreal::zero() } else { random_exponent(rng, depth - 1) };
        (e, Scalar::Rat(small_rational(rng)))
    });
    Surreal::from_terms(terms.collect::<Vec<_>>())
}

fn random_exponent(rng: &mut StdRng, depth: usize) -> Surreal {
    if depth <= 1 || rng.gen_bool(0.5) {
        Surreal::from_rational(rat(rng.gen_range(-6i64..=6), rng.gen_range(1i64..=2)))
    } else {
        random_nf(rng, depth, 2)
    }
}

/// A nonzero normal form with every exponent strictly above `floor`.
pub fn random_above(rng: &mut StdRng, floor: i64, max_terms: usize) -> Surreal {
    loop {
        let n = rng.gen_range(1..=max_terms);
        let terms: Vec<_> = (0..n)
            .map(|_| {
                let e = if rng.gen_bool(0.25) {
                    &Surreal::omega() + &Surreal::from_int(rng.gen_range(-2i64..=2))
                } else {
                    Surreal::from_rational(rat(rng.gen_range(2 * floor + 1..=2 * floor + 12), 2))
                };
                (e, Scalar::Rat(small_rational(rng)))
            })
            .collect();
        let x = Surreal::from_terms(terms);
        if !x.is_zero() {
            return x;
        }
    }
}

/// A positive normal form with every exponent at or below `ceil`.
pub fn random_below(rng: &mut StdRng, ceil: i64, max_terms: usize) -> Surreal {
    let n = rng.gen_range(1..=max_terms);
    let mut terms: Vec<_> = (0..n)
        .map(|j| {
            let e = Surreal::from_rational(rat(
                2 * ceil - rng.gen_range(0i64..=6) - if j == 0 { 0 } else { 1 },
                2,
            ));
            (e, Scalar::Rat(small_rational(rng)))
        })
        .collect();
    terms[0].0 = Surreal::from_int(ceil);
    terms[0].1 = Scalar::Rat(small_rational(rng).abs_pos());
    Surreal::from_terms(terms)
}

trait AbsPos {
    fn abs_pos(self) -> Rational;
}

impl AbsPos for Rational {
    fn abs_pos(self) -> Rational {
        if self < int(0) {
            -self
        } else {
            self
        }
    }
}

/// Exponential-free transseries with logarithms.
pub fn random_power_log(rng: &mut StdRng, cut: i64) -> Transseries {
    let n = rng.gen_range(1..=5);
    let terms: Vec<_> = (0..n)
        .map(|_| {
            let p = rat(rng.gen_range(-8i64..=2), 2);
            let m = if rng.gen_bool(0.3) { rng.gen_range(1..=2) } else { 0 };
            (Mono::new(int(0), p, m), Scalar::Rat(small_rational(rng)))
        })
        .collect();
    Transseries::from_terms(GeneratorSet::unit(), terms, None).truncate(int(cut))
}

/// Log-free transseries with exponential weights in `{-1, 0, 1, 2}`.
pub fn random_exponential(rng: &mut StdRng, cut: i64) -> Transseries {
    let n = rng.gen_range(1..=5);
    let terms: Vec<_> = (0..n)
        .map(|_| {
            let w = rng.gen_range(-1i64..=2);
            let p = int(rng.gen_range(-4i64..=1));
            (Mono::new(int(w), p, 0), Scalar::Rat(small_rational(rng)))
        })
        .collect();
    Transseries::from_terms(GeneratorSet::unit(), terms, None).truncate(int(cut))
}

/// Compares two sectored values above `t` in every sector.
pub fn sectors_agree_above(a: &SectoredStream, b: &SectoredStream, t: &Surreal) -> bool {
    let diff = match a.sub(b) {
        Ok(d) => d,
        Err(_) => return false,
    };
    let ok = diff.sectors().all(|s| s.above(t).map(|v| v.is_zero()).unwrap_or(false));
    ok
}
