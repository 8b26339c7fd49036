//! Subcommand bodies. Each returns the text to print on success.

use serde_json::json;
use surreal::borel::{self, FormalPowerSeries, Method, Variable};
use surreal::genetic::{self, EiValue};
use surreal::scalar::{rat, rational_to_f64};
use surreal::special;
use surreal::stream::factorial;
use surreal::{Rational, Scalar, Surreal};

use crate::eval::{self, ei_constant, Options, Value};
use crate::parse::{parse, Expr};
use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

fn show(v: &Value, opts: &Options, format: Format) -> Result<String, Failure> {
    Ok(match format {
        Format::Text => v.render(opts.truncate)?,
        Format::Json => serde_json::to_string_pretty(&v.to_json(opts.truncate)?).expect("valid json"),
    })
}

/// `eval <expr>`.
pub fn eval_expr(src: &str, opts: &Options, format: Format) -> Result<String, Failure> {
    let e = parse(src)?;
    show(&eval::eval(&e, opts)?, opts, format)
}

/// `bracket "{L|R}"`: like `eval`, but the input must be a bracket literal.
pub fn bracket(src: &str, opts: &Options, format: Format) -> Result<String, Failure> {
    let e = parse(src)?;
    if !matches!(e, Expr::Bracket(..)) {
        return Err(Failure::Usage(format!("expected a bracket {{L|R}}, got {e}")));
    }
    show(&eval::eval(&e, opts)?, opts, format)
}

fn float(v: f64, digits: Option<usize>) -> String {
    match digits {
        Some(d) => format!("{:.*e}", d.saturating_sub(1), v),
        None => format!("{v}"),
    }
}

/// `ei <x>`: the genetic interval at real `x > 1`, the expansion otherwise.
pub fn ei(src: &str, opts: &Options, format: Format, digits: Option<usize>) -> Result<String, Failure> {
    let x = eval::eval(&parse(src)?, opts)?;
    let real = x.as_nf().and_then(|n| n.as_rational().map(|q| (n, q)));
    let Some((n, q)) = real else {
        let v = eval::eval(&Expr::Call(crate::parse::Func::Ei, vec![parse(src)?]), opts)?;
        return show(&v, opts, format);
    };
    let EiValue::Interval { midpoint, radius } = genetic::genetic_ei(&n, &ei_constant())? else {
        unreachable!("real arguments give intervals")
    };
    let mid = midpoint.to_f64();
    let oracle = special::ei_oracle(rational_to_f64(&q));
    Ok(match format {
        Format::Text => format!(
            "Ei({q}) in [{}, {}]\nleast-term midpoint {} (C = {})\nquadrature {} ± {}",
            float(mid - radius, digits),
            float(mid + radius, digits),
            float(mid, digits),
            ei_constant().to_f64(),
            float(oracle.value, digits),
            float(oracle.error, Some(2)),
        ),
        Format::Json => serde_json::to_string_pretty(&json!({
            "kind": "interval",
            "x": q.to_string(),
            "midpoint": mid,
            "radius": radius,
            "constant": ei_constant().to_string(),
            "oracle": { "value": oracle.value, "error": oracle.error },
        }))
        .expect("valid json"),
    })
}

/// Evaluation points: `a,b,c` or `start:stop:step`.
pub fn parse_points(spec: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Usage(format!("bad point list {spec:?}; use a,b,c or start:stop:step"));
    let num = |s: &str| -> Result<f64, Failure> {
        eval::decimal(s.trim()).map(|q| rational_to_f64(&q)).map_err(|_| bad())
    };
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [one] => one.split(',').map(num).collect(),
        [a, b, h] => {
            let (a, b, h) = (num(a)?, num(b)?, num(h)?);
            if h <= 0.0 || b < a {
                return Err(bad());
            }
            let n = ((b - a) / h + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| a + i as f64 * h).collect())
        }
        _ => Err(bad()),
    }
}

/// Coefficients `c_k` from an expression in `k`, for `k < n`.
pub fn coefficients(spec: &str, n: usize) -> Result<Vec<Rational>, Failure> {
    let body = parse(spec)?;
    let opts = Options::default();
    (0..n)
        .map(|k| {
            let e = substitute(&body, "k", k as i64);
            let v = eval::eval(&e, &opts)?;
            v.as_nf()
                .and_then(|x| x.as_rational())
                .ok_or_else(|| Failure::Usage(format!("coefficient {k} of {spec:?} is not rational")))
        })
        .collect()
}

fn substitute(e: &Expr, var: &str, k: i64) -> Expr {
    let lit = if k < 0 { Expr::Neg(Box::new(Expr::Num((-k).to_string()))) } else { Expr::Num(k.to_string()) };
    let go = |x: &Expr| Box::new(substitute(x, var, k));
    match e {
        Expr::Name(n) if n == var => lit,
        Expr::Neg(a) => Expr::Neg(go(a)),
        Expr::Bin(op, a, b) => Expr::Bin(*op, go(a), go(b)),
        Expr::Pow(a, b) => Expr::Pow(go(a), go(b)),
        Expr::Fact(a) => Expr::Fact(go(a)),
        Expr::Call(f, args) => Expr::Call(*f, args.iter().map(|a| substitute(a, var, k)).collect()),
        Expr::Bracket(l, r) => Expr::Bracket(
            l.iter().map(|a| substitute(a, var, k)).collect(),
            r.iter().map(|a| substitute(a, var, k)).collect(),
        ),
        Expr::Sum { var: v, from, body } if v != var => {
            Expr::Sum { var: v.clone(), from: go(from), body: go(body) }
        }
        Expr::Sum { var: v, from, body } => Expr::Sum { var: v.clone(), from: go(from), body: body.clone() },
        other => other.clone(),
    }
}

pub struct BorelRequest<'a> {
    pub coeffs: &'a str,
    pub at: &'a [f64],
    pub method: Method,
    pub order: usize,
    pub tol: f64,
}

/// `borel sum`: a CSV (or JSON) sweep of `x, value, error`.
pub fn borel_sum(req: &BorelRequest, format: Format, digits: Option<usize>) -> Result<String, Failure> {
    let xmax = req.at.iter().cloned().fold(0.0, f64::max);
    let n = (2 * req.order + 2).max(xmax.ceil() as usize * 4 + 8).max(64);
    let cs = coefficients(req.coeffs, n)?;
    let mut f = FormalPowerSeries::from_coeffs(Variable::InvX, cs);
    if req.method == Method::LeastTerm {
        if let Ok(g) = borel::gevrey1_certificate(&f, n - 1) {
            f = f.with_gevrey(g);
        }
    }
    let mut rows = Vec::new();
    for &x in req.at {
        let est = borel::borel_sum(&f, x, req.method, req.order, req.tol)?;
        rows.push((x, est.value, est.error));
    }
    Ok(match format {
        Format::Text => {
            let mut out = String::from("x,value,error\n");
            for (x, v, e) in rows {
                out.push_str(&format!("{x},{},{}\n", float(v, digits), float(e, Some(3))));
            }
            out
        }
        Format::Json => serde_json::to_string_pretty(&json!({
            "kind": "borel",
            "method": method_name(req.method),
            "rows": rows.iter().map(|(x, v, e)| json!({"x": x, "value": v, "error": e})).collect::<Vec<_>>(),
        }))
        .expect("valid json"),
    })
}

pub fn method_name(m: Method) -> &'static str {
    match m {
        Method::Pade => "pade",
        Method::LeastTerm => "least-term",
        Method::Pv => "pv",
    }
}

/// `special ei-at-omega`.
pub fn ei_at_omega(terms: usize, format: Format) -> Result<String, Failure> {
    let opts = Options { truncate: terms, ..Options::default() };
    eval_expr("ei(w)", &opts, format)
}

/// `special stirling`.
pub fn stirling(terms: usize, format: Format) -> Result<String, Failure> {
    let opts = Options { truncate: terms, ..Options::default() };
    eval_expr("stirling(w)", &opts, format)
}

/// One line per check and whether all of them passed.
pub fn selftest() -> (String, bool) {
    let checks: Vec<(&str, Result<String, String>)> = vec![
        ("bracket {0|1}", expect_eval("{0|1}", 8, "1/2")),
        ("integral of exp(x) over [0, w]", expect_eval("integrate(exp(x), 0, w)", 8, "exp(w) - 1")),
        ("Ei(w) coefficients", ei_coefficients(12)),
        ("Stirling coefficients", stirling_check()),
        ("Borel sum of (-1)^k k! at x = 10", borel_check()),
        ("ln Gamma(10)", lngamma_check()),
    ];
    let mut out = String::new();
    let mut ok = true;
    for (name, r) in checks {
        let (tag, detail) = match r {
            Ok(d) => ("PASS", d),
            Err(d) => {
                ok = false;
                ("FAIL", d)
            }
        };
        out.push_str(&format!("[{tag}] {name}: {detail}\n"));
    }
    (out, ok)
}

fn expect_eval(src: &str, n: usize, want: &str) -> Result<String, String> {
    let opts = Options { truncate: n, ..Options::default() };
    let got = eval_expr(src, &opts, Format::Text).map_err(|e| e.to_string())?;
    if got == want {
        Ok(got)
    } else {
        Err(format!("got {got}, expected {want}"))
    }
}

fn ei_coefficients(n: usize) -> Result<String, String> {
    let v = genetic::genetic_ei(&Surreal::omega(), &ei_constant()).map_err(|e| e.to_string())?;
    let s = v.stream().ok_or("expected a stream")?;
    let terms = s.terms(n).map_err(|e| e.to_string())?;
    for (k, (y, c)) in terms.iter().enumerate() {
        let want_y = Surreal::from_int(-(k as i64) - 1);
        if *y != want_y || *c != Scalar::Rat(factorial(k)) {
            return Err(format!("term {k} is {c}*w^({y})"));
        }
    }
    Ok(format!("{} terms equal k!", terms.len()))
}

fn stirling_check() -> Result<String, String> {
    let got = special::stirling_coefficients(4);
    let want = [rat(1, 1), rat(1, 12), rat(1, 288), rat(-139, 51840), rat(-571, 2488320)];
    if got[..] == want[..] {
        Ok(got.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(", "))
    } else {
        Err(format!("{got:?}"))
    }
}

fn borel_check() -> Result<String, String> {
    let f = FormalPowerSeries::new(Variable::InvX, |k| if k % 2 == 0 { factorial(k) } else { -factorial(k) });
    let est = borel::borel_sum(&f, 10.0, Method::Pade, 8, 1e-12).map_err(|e| e.to_string())?;
    let want = special::e1_scaled(10.0);
    let rel = ((est.value - want) / want).abs();
    if rel < 1e-8 {
        Ok(format!("relative error {rel:.1e} against e^x E1(x)"))
    } else {
        Err(format!("value {} against {want}", est.value))
    }
}

fn lngamma_check() -> Result<String, String> {
    let g = special::lngamma_oracle(10.0).map_err(|e| e.to_string())?;
    let want = (362_880f64).ln();
    let err = (g.value - want).abs();
    if err < 1e-10 {
        Ok(format!("error {err:.1e}"))
    } else {
        Err(format!("{} against {want}", g.value))
    }
}

/// Reads a positive integer cap from the environment.
pub fn env_cap(name: &str) -> Result<Option<usize>, Failure> {
    match std::env::var(name) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| Failure::Usage(format!("{name} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}
