//! Adaptive Gauss–Kronrod (7/15) quadrature.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_64, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// An integral value with an absolute error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Interval count at which refinement stops.
pub const MAX_INTERVALS: usize = 4000;

/// `int_a^b f` to absolute tolerance `tol`, always refining the interval
/// with the largest error estimate.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Estimate {
    let (v, e) = gk15(&f, a, b);
    let mut parts = vec![(a, b, v, e)];
    let mut error = e;
    while error > tol && parts.len() < MAX_INTERVALS {
        let (i, _) = parts.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).unwrap();
        let (lo, hi, _, _) = parts[i];
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        parts.swap_remove(i);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
        error = parts.iter().map(|p| p.3).sum();
    }
    Estimate { value: parts.iter().map(|p| p.2).sum(), error: parts.iter().map(|p| p.3).sum() }
}

/// `int_a^inf f` for integrands decaying at least like `e^{-rate p}`:
/// `[a, a + span]` first, then doubling panels until they stop contributing.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, span: f64, tol: f64) -> Estimate {
    let mut est = integrate(&f, a, a + span, 0.5 * tol);
    let mut lo = a + span;
    let mut width = span;
    for _ in 0..60 {
        let panel = integrate(&f, lo, lo + width, 0.25 * tol);
        est.value += panel.value;
        est.error += panel.error;
        if panel.value.abs() <= 0.25 * tol.max(f64::MIN_POSITIVE) {
            est.error += panel.value.abs();
            return est;
        }
        lo += width;
        width *= 2.0;
    }
    est.error = f64::INFINITY;
    est
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_and_exponentials() {
        let e = integrate(|x| x * x, 0.0, 3.0, 1e-12);
        assert!((e.value - 9.0).abs() < 1e-12);
        let e = integrate(f64::sin, 0.0, std::f64::consts::PI, 1e-12);
        assert!((e.value - 2.0).abs() < 1e-12);
        let e = integrate_to_infinity(|x| (-x).exp(), 0.0, 10.0, 1e-13);
        assert!((e.value - 1.0).abs() < 1e-12);
        let e = integrate_to_infinity(|x| x * (-2.0 * x).exp(), 0.0, 5.0, 1e-13);
        assert!((e.value - 0.25).abs() < 1e-12);
    }
}
