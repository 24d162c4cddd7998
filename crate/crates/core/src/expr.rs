//! Witt vector expressions.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary ('*' unary)*
//! unary := '-' unary | atom
//! atom  := w[a0,...] | integer | f(expr) | v(expr) | f1(expr) | teich(elem) | '(' expr ')'
//! ```
//!
//! A literal `w[a0,...,a(n-1)]` lives in W_n; its length fixes the level.
//! `f` is the Witt Frobenius on the same level, `v` maps W_n into W_{n+1} and
//! `f1` inverts it on elements with zero residue. `teich(a)` and bare
//! integers take the default level, integers adapt to the other operand.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::ring::FiniteRing;
use crate::witt::{Witt, WittRing};

#[derive(Clone, Debug)]
enum Value {
    Int(i64),
    W(WittRing, Witt),
}

pub struct Evaluator {
    ring: FiniteRing,
    default_level: usize,
    levels: HashMap<usize, WittRing>,
}

impl Evaluator {
    pub fn new(ring: &FiniteRing, default_level: usize) -> Self {
        Evaluator { ring: ring.clone(), default_level, levels: HashMap::new() }
    }

    fn witt(&mut self, n: usize) -> Result<WittRing> {
        if let Some(w) = self.levels.get(&n) {
            return Ok(w.clone());
        }
        let w = WittRing::new(&self.ring, n)?;
        self.levels.insert(n, w.clone());
        Ok(w)
    }

    /// Evaluates and returns the canonical `w[...]` form.
    pub fn eval(&mut self, src: &str) -> Result<String> {
        let mut p = Parser { src: src.as_bytes(), pos: 0 };
        let v = self.expr(&mut p)?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(Error::Parse(format!("unexpected input at offset {}", p.pos)));
        }
        let (w, x) = self.as_witt(v, None)?;
        Ok(w.format(x))
    }

    fn as_witt(&mut self, v: Value, level: Option<usize>) -> Result<(WittRing, Witt)> {
        match v {
            Value::W(w, x) => Ok((w, x)),
            Value::Int(k) => {
                let w = self.witt(level.unwrap_or(self.default_level))?;
                let x = w.from_int(k);
                Ok((w, x))
            }
        }
    }

    fn binary(&mut self, a: Value, b: Value, op: u8) -> Result<Value> {
        if let (Value::Int(x), Value::Int(y)) = (&a, &b) {
            let r = match op {
                b'+' => x.checked_add(*y),
                b'-' => x.checked_sub(*y),
                _ => x.checked_mul(*y),
            };
            return r.map(Value::Int).ok_or_else(|| Error::Parse("integer overflow".into()));
        }
        let level = match (&a, &b) {
            (Value::W(w, _), _) | (_, Value::W(w, _)) => w.level(),
            _ => unreachable!(),
        };
        let (wa, x) = self.as_witt(a, Some(level))?;
        let (wb, y) = self.as_witt(b, Some(level))?;
        if wa.level() != wb.level() {
            return Err(Error::LevelMismatch(wa.level(), wb.level()));
        }
        let r = match op {
            b'+' => wa.add(x, y),
            b'-' => wa.sub(x, y),
            _ => wa.mul(x, y),
        };
        Ok(Value::W(wa, r))
    }

    fn expr(&mut self, p: &mut Parser) -> Result<Value> {
        let mut acc = self.term(p)?;
        while let Some(op) = p.peek_op(b"+-") {
            p.pos += 1;
            let rhs = self.term(p)?;
            acc = self.binary(acc, rhs, op)?;
        }
        Ok(acc)
    }

    fn term(&mut self, p: &mut Parser) -> Result<Value> {
        let mut acc = self.unary(p)?;
        while p.peek_op(b"*").is_some() {
            p.pos += 1;
            let rhs = self.unary(p)?;
            acc = self.binary(acc, rhs, b'*')?;
        }
        Ok(acc)
    }

    fn unary(&mut self, p: &mut Parser) -> Result<Value> {
        if p.peek_op(b"-").is_some() {
            p.pos += 1;
            let v = self.unary(p)?;
            return self.binary(Value::Int(0), v, b'-');
        }
        self.atom(p)
    }

    fn atom(&mut self, p: &mut Parser) -> Result<Value> {
        p.skip_ws();
        let rest = &p.src[p.pos..];
        match rest.first() {
            None => Err(Error::Parse("unexpected end of expression".into())),
            Some(b'(') => {
                p.pos += 1;
                let v = self.expr(p)?;
                p.expect(b')')?;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = p.pos;
                while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                    p.pos += 1;
                }
                let s = std::str::from_utf8(&p.src[start..p.pos]).expect("ascii");
                s.parse().map(Value::Int).map_err(|_| Error::Parse(format!("bad integer {s:?}")))
            }
            Some(_) if rest.starts_with(b"w[") => {
                let end = p.matching(p.pos + 1, b'[', b']')?;
                let lit =
                    std::str::from_utf8(&p.src[p.pos..=end]).map_err(|e| Error::Parse(e.to_string()))?.to_string();
                p.pos = end + 1;
                let n = crate::witt::parse_witt_literal(&lit)?.len();
                let w = self.witt(n)?;
                let x = w.parse(&lit)?;
                Ok(Value::W(w, x))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = p.pos;
                while p.pos < p.src.len() && p.src[p.pos].is_ascii_alphanumeric() {
                    p.pos += 1;
                }
                let name = std::str::from_utf8(&p.src[start..p.pos]).expect("ascii").to_string();
                p.skip_ws();
                if p.src.get(p.pos) != Some(&b'(') {
                    return Err(Error::Parse(format!("expected '(' after {name}")));
                }
                if name == "teich" {
                    let end = p.matching(p.pos, b'(', b')')?;
                    let arg = std::str::from_utf8(&p.src[p.pos + 1..end]).expect("ascii").to_string();
                    p.pos = end + 1;
                    let a = self.ring.parse_elem(&arg)?;
                    let w = self.witt(self.default_level)?;
                    let x = w.teichmuller(a);
                    return Ok(Value::W(w, x));
                }
                p.pos += 1;
                let arg = self.expr(p)?;
                p.expect(b')')?;
                self.function(&name, arg)
            }
            Some(&c) => Err(Error::Parse(format!("unexpected character {:?}", c as char))),
        }
    }

    fn function(&mut self, name: &str, arg: Value) -> Result<Value> {
        let (w, x) = self.as_witt(arg, None)?;
        match name {
            "f" => Ok(Value::W(w.clone(), w.frobenius(x))),
            "v" => {
                let up = self.witt(w.level() + 1)?;
                let y = w.verschiebung(x, &up)?;
                Ok(Value::W(up, y.0))
            }
            "f1" => {
                if w.level() < 2 {
                    return Err(Error::LevelMismatch(w.level(), 2));
                }
                let down = self.witt(w.level() - 1)?;
                let y = down.f1(w.ideal_elem(x)?, &w)?;
                Ok(Value::W(down, y))
            }
            _ => Err(Error::Parse(format!("unknown function {name}"))),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek_op(&mut self, ops: &[u8]) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied().filter(|c| ops.contains(c))
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        self.skip_ws();
        if self.src.get(self.pos) != Some(&c) {
            return Err(Error::Parse(format!("expected {:?} at offset {}", c as char, self.pos)));
        }
        self.pos += 1;
        Ok(())
    }

    /// Index of the bracket closing the one at `open_at`.
    fn matching(&self, open_at: usize, open: u8, close: u8) -> Result<usize> {
        let mut depth = 0usize;
        for i in open_at..self.src.len() {
            let c = self.src[i];
            if c == open || (open != b'(' && c == b'(') {
                depth += 1;
            } else if c == close || (close != b')' && c == b')') {
                depth -= 1;
                if depth == 0 {
                    return Ok(i);
                }
            }
        }
        Err(Error::Parse("unbalanced brackets".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(ring: &str, n: usize, s: &str) -> Result<String> {
        Evaluator::new(&FiniteRing::parse(ring).unwrap(), n).eval(s)
    }

    #[test]
    fn examples() {
        assert_eq!(eval("GF(2)", 2, "w[1,0] + w[1,0]").unwrap(), "w[0,1]");
        assert_eq!(eval("GF(2)", 2, "f1(v(w[1,1]))").unwrap(), "w[1,1]");
        assert_eq!(eval("GF(2)", 3, "teich(1) * teich(1)").unwrap(), "w[1,0,0]");
        assert_eq!(eval("GF(2)", 3, "v(w[1,1])").unwrap(), "w[0,1,1]");
        assert_eq!(eval("GF(3)", 2, "2 * w[1,0] - w[2,0]").unwrap(), "w[0,1]");
        assert_eq!(eval("GF(2^2)", 1, "teich((0,1)) * teich((0,1))").unwrap(), "w[(1,1)]");
        assert_eq!(eval("GF(2)", 2, "f(w[1,1]) + -w[1,1]").unwrap(), "w[0,0]");
    }

    #[test]
    fn errors() {
        assert!(matches!(eval("GF(2)", 2, "w[1,0] + w[1]"), Err(Error::LevelMismatch(2, 1))));
        assert!(matches!(eval("GF(2)", 2, "f1(w[1,0])"), Err(Error::NotInIdeal)));
        assert!(matches!(eval("GF(2)", 2, "w[1,0] +"), Err(Error::Parse(_))));
        assert!(matches!(eval("GF(2)", 2, "g(w[1,0])"), Err(Error::Parse(_))));
    }
}
