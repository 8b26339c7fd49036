//! Expression syntax: an LL(1) recursive descent parser and a printer that
//! produces text the parser maps back to the same tree.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | 'sum' '(' name '>=' expr ')' term | power
//! power   := postfix ('^' unary)?
//! postfix := primary '!'*
//! primary := number ('±' number)? | name | name '(' args ')'
//!          | '(' expr ')' | '{' list '|' list '}'
//! ```

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Built-in functions with fixed arity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Ln,
    Sqrt,
    Ei,
    Stirling,
    Lngamma,
    Integrate,
    /// `O(m)`: an order marker for everything at or below `m`.
    Order,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "ei" | "Ei" => Func::Ei,
            "stirling" => Func::Stirling,
            "lngamma" => Func::Lngamma,
            "integrate" => Func::Integrate,
            "O" => Func::Order,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Ei => "ei",
            Func::Stirling => "stirling",
            Func::Lngamma => "lngamma",
            Func::Integrate => "integrate",
            Func::Order => "O",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Integrate => 3,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    /// Decimal literal, kept as written.
    Num(String),
    /// `value±error` literal.
    Float(String, String),
    Name(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Fact(Box<Expr>),
    Call(Func, Vec<Expr>),
    Bracket(Vec<Expr>, Vec<Expr>),
    Sum {
        var: String,
        from: Box<Expr>,
        body: Box<Expr>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at {}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for SyntaxError {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Sym(&'static str),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(s) => write!(f, "number {s}"),
            Tok::Ident(s) => write!(f, "name {s}"),
            Tok::Sym(s) => write!(f, "'{s}'"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

const SYMBOLS: [&str; 13] = [">=", "+", "-", "*", "/", "^", "!", "(", ")", "{", "}", "|", ","];

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, SyntaxError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            // An exponent only when digits follow, so `2e` stays `2 e`.
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            out.push((Tok::Num(src[start..i].to_string()), start));
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
            continue;
        }
        if src[i..].starts_with('±') {
            out.push((Tok::Sym("±"), start));
            i += '±'.len_utf8();
            continue;
        }
        match SYMBOLS.iter().find(|s| src[i..].starts_with(**s)) {
            Some(s) => {
                out.push((Tok::Sym(s), start));
                i += s.len();
            }
            None => {
                let ch = src[i..].chars().next().unwrap();
                return Err(error_at(src, start, format!("unexpected character {ch:?}")));
            }
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

fn error_at(src: &str, offset: usize, message: String) -> SyntaxError {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    SyntaxError { line, column, message }
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.is(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn fail<T>(&self, message: String) -> Result<T, SyntaxError> {
        Err(error_at(self.src, self.toks[self.pos].1, message))
    }

    fn expect(&mut self, s: &str) -> Result<(), SyntaxError> {
        if self.eat(s) {
            Ok(())
        } else {
            self.fail(format!("expected '{s}', found {}", self.peek()))
        }
    }

    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        let mut acc = self.term()?;
        loop {
            let op = if self.eat("+") {
                BinOp::Add
            } else if self.eat("-") {
                BinOp::Sub
            } else {
                return Ok(acc);
            };
            acc = Expr::Bin(op, Box::new(acc), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr, SyntaxError> {
        let mut acc = self.unary()?;
        loop {
            let op = if self.eat("*") {
                BinOp::Mul
            } else if self.eat("/") {
                BinOp::Div
            } else {
                return Ok(acc);
            };
            acc = Expr::Bin(op, Box::new(acc), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr, SyntaxError> {
        if self.eat("-") {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if matches!(self.peek(), Tok::Ident(s) if s == "sum") {
            self.bump();
            self.expect("(")?;
            let var = match self.bump() {
                Tok::Ident(v) => v,
                t => return self.fail(format!("expected a summation index, found {t}")),
            };
            self.expect(">=")?;
            let from = self.expr()?;
            self.expect(")")?;
            let body = self.term()?;
            return Ok(Expr::Sum { var, from: Box::new(from), body: Box::new(body) });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, SyntaxError> {
        let base = self.postfix()?;
        if self.eat("^") {
            return Ok(Expr::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn postfix(&mut self) -> Result<Expr, SyntaxError> {
        let mut e = self.primary()?;
        while self.eat("!") {
            e = Expr::Fact(Box::new(e));
        }
        Ok(e)
    }

    fn list(&mut self, end: &str) -> Result<Vec<Expr>, SyntaxError> {
        let mut out = Vec::new();
        if self.is(end) {
            return Ok(out);
        }
        loop {
            out.push(self.expr()?);
            if !self.eat(",") {
                return Ok(out);
            }
        }
    }

    fn primary(&mut self) -> Result<Expr, SyntaxError> {
        match self.bump() {
            Tok::Num(n) => {
                if self.eat("±") {
                    match self.bump() {
                        Tok::Num(e) => Ok(Expr::Float(n, e)),
                        t => self.fail(format!("expected an error bound, found {t}")),
                    }
                } else {
                    Ok(Expr::Num(n))
                }
            }
            Tok::Ident(name) => {
                if !self.is("(") {
                    return Ok(Expr::Name(name));
                }
                let at = self.pos - 1;
                let f = match Func::lookup(&name) {
                    Some(f) => f,
                    None => {
                        return Err(error_at(self.src, self.toks[at].1, format!("unknown function {name}")))
                    }
                };
                self.bump();
                let args = self.list(")")?;
                self.expect(")")?;
                if args.len() != f.arity() {
                    return Err(error_at(
                        self.src,
                        self.toks[at].1,
                        format!("{name} takes {} argument(s), got {}", f.arity(), args.len()),
                    ));
                }
                Ok(Expr::Call(f, args))
            }
            Tok::Sym("(") => {
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            Tok::Sym("{") => {
                let left = self.list("|")?;
                self.expect("|")?;
                let right = self.list("}")?;
                self.expect("}")?;
                Ok(Expr::Bracket(left, right))
            }
            t => {
                self.pos = self.pos.saturating_sub(1);
                self.fail(format!("expected an operand, found {t}"))
            }
        }
    }
}

/// Parses a complete expression.
pub fn parse(src: &str) -> Result<Expr, SyntaxError> {
    let toks = lex(src)?;
    let mut p = Parser { src, toks, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.fail(format!("unexpected {} after the expression", p.peek()));
    }
    Ok(e)
}

// Binding strength used by the printer. A `sum` swallows a whole product
// to its right, so it sits between the additive and multiplicative levels.
fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 10,
        Expr::Sum { .. } => 15,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 20,
        Expr::Neg(_) => 30,
        Expr::Pow(..) => 40,
        Expr::Fact(_) => 50,
        _ => 60,
    }
}

struct Wrap<'a>(&'a Expr, u8);

impl fmt::Display for Wrap<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if prec(self.0) < self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

fn join(f: &mut fmt::Formatter<'_>, xs: &[Expr]) -> fmt::Result {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(n) => f.write_str(n),
            Expr::Float(v, e) => write!(f, "{v}±{e}"),
            Expr::Name(n) => f.write_str(n),
            Expr::Neg(x) => write!(f, "-{}", Wrap(x, 30)),
            Expr::Bin(op, a, b) => {
                let (sym, p) = match op {
                    BinOp::Add => (" + ", 10),
                    BinOp::Sub => (" - ", 10),
                    BinOp::Mul => ("*", 20),
                    BinOp::Div => ("/", 20),
                };
                // Left operands may not end in a `sum` except at the additive level.
                let left = if p == 10 { 10 } else { 20 };
                write!(f, "{}{sym}{}", Wrap(a, left), Wrap(b, p + 1))
            }
            Expr::Pow(a, b) => write!(f, "{}^{}", Wrap(a, 50), Wrap(b, 30)),
            Expr::Fact(x) => write!(f, "{}!", Wrap(x, 50)),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                join(f, args)?;
                f.write_str(")")
            }
            Expr::Bracket(l, r) => {
                f.write_str("{")?;
                join(f, l)?;
                f.write_str(" | ")?;
                join(f, r)?;
                f.write_str("}")
            }
            Expr::Sum { var, from, body } => write!(f, "sum({var}>={from}) {}", Wrap(body, 20)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn num(s: &str) -> Box<Expr> {
        Box::new(Expr::Num(s.into()))
    }

    #[test]
    fn precedence() {
        let e = parse("w^(1/2)+3").unwrap();
        assert_eq!(
            e,
            Expr::Bin(
                BinOp::Add,
                Box::new(Expr::Pow(
                    Box::new(Expr::Name("w".into())),
                    Box::new(Expr::Bin(BinOp::Div, num("1"), num("2")))
                )),
                num("3")
            )
        );
        assert_eq!(parse("-2^2").unwrap(), Expr::Neg(Box::new(Expr::Pow(num("2"), num("2")))));
        assert_eq!(
            parse("w^-1*2").unwrap(),
            Expr::Bin(
                BinOp::Mul,
                Box::new(Expr::Pow(Box::new(Expr::Name("w".into())), Box::new(Expr::Neg(num("1"))))),
                num("2")
            )
        );
        assert_eq!(parse("1-2-3").unwrap().to_string(), "1 - 2 - 3");
        assert_eq!(parse("1-(2-3)").unwrap().to_string(), "1 - (2 - 3)");
        assert_eq!(parse("2^3^4").unwrap().to_string(), "2^3^4");
        assert_eq!(parse("(2^3)^4").unwrap().to_string(), "(2^3)^4");
    }

    #[test]
    fn brackets_sums_and_calls() {
        assert_eq!(
            parse("{0|1}").unwrap(),
            Expr::Bracket(vec![Expr::Num("0".into())], vec![Expr::Num("1".into())])
        );
        assert_eq!(parse("{ | }").unwrap(), Expr::Bracket(vec![], vec![]));
        let e = parse("integrate(exp(x),0,w)").unwrap();
        assert!(matches!(e, Expr::Call(Func::Integrate, ref a) if a.len() == 3));
        let s = parse("sum(k>=0) (k!)*x^(-k-1)*exp(-x) + 1").unwrap();
        assert!(matches!(s, Expr::Bin(BinOp::Add, ref a, _) if matches!(**a, Expr::Sum { .. })));
        assert_eq!(parse("1.5e-3±2e-10").unwrap(), Expr::Float("1.5e-3".into(), "2e-10".into()));
        assert_eq!(parse("2e3").unwrap(), Expr::Num("2e3".into()));
        assert!(parse("2e").is_err());
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse("1 +\n  * 2").unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
        let e = parse("foo(1)").unwrap_err();
        assert_eq!((e.line, e.column), (1, 1));
        assert!(parse("exp(1, 2)").is_err());
        assert!(parse("(1").is_err());
        assert!(parse("1 $ 2").is_err());
    }

    #[test]
    fn printing_round_trips() {
        for s in [
            "exp(w)*(w^-1 + w^-2 + 2*w^-3) + O(w^-4*exp(w))",
            "a*(sum(k>=0) k!*w^(-k-1))*b",
            "sum(k>=1) (a + b)",
            "-(a + b)*c",
            "--a",
            "(k + 1)!",
            "{a, b | c}",
            "1/2*ln(2*pi)",
            "a - -b",
            "w^-(1/2)",
        ] {
            let e = parse(s).unwrap();
            let again = parse(&e.to_string()).unwrap();
            assert_eq!(again, e, "{s} -> {e}");
        }
    }
}
