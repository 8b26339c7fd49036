//! Normal-form expansions carrying explicit `O(..)` tails, one per
//! exponential sector.

use std::collections::BTreeMap;

use surreal::stream::SectoredStream;
use surreal::{Result, Scalar, Surreal};

/// Known terms above the tail exponent; nothing is known at or below it.
#[derive(Clone, Debug, PartialEq)]
pub struct Part {
    pub body: Surreal,
    pub tail: Option<Surreal>,
}

impl Part {
    fn normalized(mut self) -> Part {
        if let Some(t) = &self.tail {
            self.body = self.body.above(t);
        }
        self
    }

    /// Largest exponent this part can contribute.
    pub fn lead(&self) -> Option<Surreal> {
        self.body.leading_exponent().cloned().or_else(|| self.tail.clone())
    }

    fn is_empty(&self) -> bool {
        self.body.is_zero() && self.tail.is_none()
    }
}

fn max_tail(a: Option<Surreal>, b: Option<Surreal>) -> Option<Surreal> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Sectors keyed by the exponential atom.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Expansion {
    sectors: BTreeMap<Surreal, Part>,
}

impl Expansion {
    /// `O(e^atom w^y)`.
    pub fn order(atom: Surreal, y: Surreal) -> Expansion {
        let mut out = Expansion::default();
        out.insert(atom, Part { body: Surreal::zero(), tail: Some(y) });
        out
    }

    /// The first `n` terms of each sector, with the next exponent as tail.
    pub fn from_stream(s: &SectoredStream, n: usize) -> Result<Expansion> {
        let mut out = Expansion::default();
        for sec in s.sectors() {
            let (terms, tail) = sec.known_terms(n)?;
            out.insert(sec.atom().clone(), Part { body: Surreal::from_terms(terms), tail });
        }
        Ok(out)
    }

    fn insert(&mut self, atom: Surreal, part: Part) {
        let merged = match self.sectors.remove(&atom) {
            Some(old) => Part { body: &old.body + &part.body, tail: max_tail(old.tail, part.tail) },
            None => part,
        }
        .normalized();
        if !merged.is_empty() {
            self.sectors.insert(atom, merged);
        }
    }

    pub fn sectors(&self) -> impl Iterator<Item = (&Surreal, &Part)> {
        self.sectors.iter().rev()
    }

    pub fn add(&self, o: &Expansion) -> Expansion {
        let mut out = self.clone();
        for (a, p) in &o.sectors {
            out.insert(a.clone(), p.clone());
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> Expansion {
        let mut out = Expansion::default();
        for (a, p) in &self.sectors {
            out.insert(a.clone(), Part { body: p.body.scale(c), tail: p.tail.clone() });
        }
        out
    }

    pub fn mul(&self, o: &Expansion) -> Expansion {
        let mut out = Expansion::default();
        for (a, p) in &self.sectors {
            for (b, q) in &o.sectors {
                let (lp, lq) = match (p.lead(), q.lead()) {
                    (Some(x), Some(y)) => (x, y),
                    _ => continue,
                };
                let t1 = p.tail.as_ref().map(|t| t + &lq);
                let t2 = q.tail.as_ref().map(|t| t + &lp);
                let part = Part { body: &p.body * &q.body, tail: max_tail(t1, t2) };
                out.insert(a + b, part);
            }
        }
        out
    }

    /// Text with at most `n` terms per sector; longer sectors get a new tail.
    pub fn render(&self, n: usize) -> String {
        let mut pieces = Vec::new();
        for (atom, part) in self.sectors() {
            let terms = part.body.terms();
            let (shown, tail) = if terms.len() > n {
                (Surreal::from_terms(terms[..n].to_vec()), Some(terms[n].0.clone()))
            } else {
                (part.body.clone(), part.tail.clone())
            };
            let exp = (!atom.is_zero()).then(|| format!("exp({atom})"));
            if !shown.is_zero() {
                pieces.push(match &exp {
                    None => shown.to_string(),
                    Some(e) if shown == Surreal::one() => e.clone(),
                    Some(e) if shown == -&Surreal::one() => format!("-{e}"),
                    Some(e) if shown.len() == 1 => format!("{shown}*{e}"),
                    Some(e) => format!("{e}*({shown})"),
                });
            }
            if let Some(y) = tail {
                let mono = Surreal::omega_pow(y).to_string();
                pieces.push(match &exp {
                    None => format!("O({mono})"),
                    Some(e) if mono == "1" => format!("O({e})"),
                    Some(e) => format!("O({mono}*{e})"),
                });
            }
        }
        join_signed(&pieces)
    }
}

/// Joins summands, turning a leading `-` into a binary minus.
pub fn join_signed(pieces: &[String]) -> String {
    let mut out = String::new();
    for (i, p) in pieces.iter().enumerate() {
        match (i, p.strip_prefix('-')) {
            (0, _) => out.push_str(p),
            (_, Some(rest)) => {
                out.push_str(" - ");
                out.push_str(rest);
            }
            (_, None) => {
                out.push_str(" + ");
                out.push_str(p);
            }
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(q: i64) -> Surreal {
        Surreal::omega_pow(Surreal::from_int(q))
    }

    #[test]
    fn tails_absorb_and_propagate() {
        let one = Expansion::order(Surreal::zero(), Surreal::from_int(-2));
        let x = Expansion::from_stream(&SectoredStream::from_nf(&w(0) + &w(-1)), 4).unwrap();
        let s = x.add(&one);
        assert_eq!(s.render(8), "1 + w^-1 + O(w^-2)");
        let sq = s.mul(&s);
        assert_eq!(sq.render(8), "1 + 2*w^-1 + O(w^-2)");
        let big = Expansion::order(Surreal::omega(), Surreal::from_int(-1));
        assert_eq!(big.render(8), "O(w^-1*exp(w))");
        assert_eq!(big.add(&s.scale(&Scalar::from_int(-1))).render(1), "O(w^-1*exp(w)) - 1 + O(w^-1)");
    }
}
