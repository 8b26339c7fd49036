use std::process::Command;

use surreal::borel::Method;
use surreal_cli::commands::{self, BorelRequest, Format};
use surreal_cli::eval::{eval, Options};
use surreal_cli::parse::parse;

const CORPUS: &[&str] = &[
    "1/2",
    "{0|1}",
    "{1, 3/2 | 2}",
    "{ | 0}",
    "{w - 1 | w + 1}",
    "w^(1/2) + 3",
    "(w + 1)^2 - w^2",
    "1/(1 - w^-1)",
    "exp(w) - 1",
    "exp(-w)*(w + 1)",
    "exp(w^-1)",
    "ln(w)",
    "ln(w + 1)",
    "integrate(exp(x), 0, w)",
    "integrate(x^-1, 1, w)",
    "integrate(exp(-x), 0, w)",
    "ei(w)",
    "ei(w + 1)",
    "stirling(w)",
    "lngamma(w)",
    "sum(k>=0) k!*w^(-k-1)",
    "exp(w)*(w^-1 + w^-2 + 2*w^-3) + O(w^-4*exp(w))",
    "sqrt(2)*pi^(1/2)",
    "1/2*ln(2*pi)",
    "x^2*exp(-x) + 1/x",
    "ei(x)",
    "lngamma(x)",
    "sum(k>=0) (k!)*x^(-k-1)*exp(-x)",
    "ln(2*pi*x^2)",
];

fn opts(n: usize) -> Options {
    Options { truncate: n, float: false }
}

fn render(src: &str, n: usize) -> String {
    eval(&parse(src).unwrap(), &opts(n)).and_then(|v| v.render(n)).unwrap_or_else(|e| panic!("{src}: {e}"))
}

#[test]
fn documented_examples() {
    assert_eq!(render("{0|1}", 8), "1/2");
    assert_eq!(render("integrate(exp(x),0,w)", 8), "exp(w) - 1");
    assert_eq!(render("ei(w)", 3), "exp(w)*(w^-1 + w^-2 + 2*w^-3) + O(w^-4*exp(w))");
    assert_eq!(render("w^(1/2)+3", 8), "w^(1/2) + 3");
    assert_eq!(render("ei(w) - exp(w)*sum(k>=0) k!*w^(-k-1)", 6), "O(w^-7*exp(w))");
    assert!(render("stirling(w)", 3)
        .ends_with("+ 1/288*pi^(1/2)*sqrt(2)*w^(-5/2)) + O(w^(-7/2)*exp(w^(1 + w^-1) - w))"));
}

#[test]
fn syntax_trees_survive_printing() {
    for src in CORPUS {
        let e = parse(src).unwrap();
        assert_eq!(parse(&e.to_string()).unwrap(), e, "{src}");
    }
}

#[test]
fn rendered_values_reparse_to_themselves() {
    for n in [3, 6] {
        for src in CORPUS {
            let once = render(src, n);
            let twice = render(&once, n);
            assert_eq!(twice, once, "{src} at {n} terms");
        }
    }
}

#[test]
fn json_output_matches_the_schema() {
    let schema: serde_json::Value = serde_json::from_str(include_str!("../../../docs/schema.json")).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let mut outputs = Vec::new();
    for src in CORPUS {
        outputs.push(commands::eval_expr(src, &opts(4), Format::Json).unwrap());
    }
    outputs.push(commands::ei("10", &opts(4), Format::Json, None).unwrap());
    outputs.push(commands::stirling(5, Format::Json).unwrap());
    let at = [5.0, 10.0];
    let req = BorelRequest { coeffs: "(-1)^k*k!", at: &at, method: Method::Pade, order: 8, tol: 1e-10 };
    outputs.push(commands::borel_sum(&req, Format::Json, None).unwrap());
    for text in outputs {
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{text}\n{errors:?}");
    }
}

#[test]
fn borel_sweep_matches_the_exponential_integral() {
    let at = commands::parse_points("5:20:5").unwrap();
    assert_eq!(at, vec![5.0, 10.0, 15.0, 20.0]);
    let req = BorelRequest { coeffs: "(-1)^k*k!", at: &at, method: Method::Pade, order: 8, tol: 1e-12 };
    let csv = commands::borel_sum(&req, Format::Text, None).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,value,error"));
    for (line, x) in lines.zip(&at) {
        let v: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        let want = surreal::special::e1_scaled(*x);
        assert!(((v - want) / want).abs() < 1e-8, "{line}");
    }
}

fn run_bin(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_surreal")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn binary_exit_codes() {
    let (code, out, _) = run_bin(&["eval", "{0|1}"]);
    assert_eq!((code, out.trim()), (0, "1/2"));
    let (code, out, _) = run_bin(&["--truncate", "3", "eval", "ei(w)"]);
    assert_eq!((code, out.trim()), (0, "exp(w)*(w^-1 + w^-2 + 2*w^-3) + O(w^-4*exp(w))"));
    let (code, _, err) = run_bin(&["eval", "1 +* 2"]);
    assert_eq!(code, 2);
    assert!(err.contains("1:4"), "{err}");
    assert_eq!(run_bin(&["eval", "x + w"]).0, 3);
    assert_eq!(run_bin(&["eval", "ln(-w)"]).0, 5);
    assert_eq!(run_bin(&["bracket", "1/2"]).0, 1);
    let (code, out, _) = run_bin(&["special", "stirling", "--terms", "2", "--format", "json"]);
    assert_eq!(code, 0);
    assert!(out.contains("\"kind\": \"surreal\""));
    let (code, out, _) = run_bin(&["selftest"]);
    assert_eq!(code, 0, "{out}");
    assert!(!out.contains("FAIL"));
}

#[test]
fn depth_cap_comes_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_surreal"))
        .args(["eval", "1"])
        .env("SURREAL_DEPTH_CAP", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn tails_multiply() {
    let e = parse("(1 + O(w^-1))*(1 + O(w^-1))").unwrap();
    assert_eq!(eval(&e, &opts(4)).unwrap().render(4).unwrap(), "1 + O(w^-1)");
}

#[test]
fn truncated_integrands_keep_their_known_terms() {
    assert_eq!(render("integrate(sum(k>=0) x^(-k)*exp(x), w, w+1)", 2), "(-1 + e)*exp(w) + O(w^-1*exp(w))");
}
