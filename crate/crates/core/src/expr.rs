//! Arithmetic on constants for config coefficients: numbers, `pi`,
//! `Gamma(x)`, `Beta(x, y)`, `sqrt(x)`, `+ - * / ^` and parentheses.

use crate::error::{Error, Result};
use crate::special::{beta, gamma};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // exponent part, e.g. 1.5e-3
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
            let text = &src[start..i];
            let v = text
                .parse::<f64>()
                .map_err(|_| err(src, start, &format!("bad number {text:?}")))?;
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
            {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else if "+-*/^(),".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(err(src, i, &format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

fn err(src: &str, pos: usize, msg: &str) -> Error {
    Error::Config(format!("in expression {src:?} at column {}: {msg}", pos + 1))
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.src.len())
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<()> {
        if self.eat(op) {
            Ok(())
        } else {
            Err(err(self.src, self.here(), &format!("expected {op:?}")))
        }
    }

    fn expr(&mut self) -> Result<f64> {
        let mut v = self.term()?;
        loop {
            if self.eat('+') {
                v += self.term()?;
            } else if self.eat('-') {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<f64> {
        let mut v = self.unary()?;
        loop {
            if self.eat('*') {
                v *= self.unary()?;
            } else if self.eat('/') {
                v /= self.unary()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<f64> {
        if self.eat('-') {
            Ok(-self.unary()?)
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<f64> {
        let base = self.atom()?;
        if self.eat('^') {
            Ok(base.powf(self.unary()?))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<f64> {
        let at = self.here();
        match self.toks.get(self.pos).map(|(_, t)| t.clone()) {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(v)
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let v = self.expr()?;
                self.expect(')')?;
                Ok(v)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "pi" => Ok(std::f64::consts::PI),
                    "Gamma" | "sqrt" => {
                        self.expect('(')?;
                        let x = self.expr()?;
                        self.expect(')')?;
                        if name == "sqrt" {
                            if x < 0.0 {
                                return Err(err(self.src, at, "sqrt of a negative number"));
                            }
                            Ok(x.sqrt())
                        } else {
                            Ok(gamma(x))
                        }
                    }
                    "Beta" => {
                        self.expect('(')?;
                        let x = self.expr()?;
                        self.expect(',')?;
                        let y = self.expr()?;
                        self.expect(')')?;
                        if x <= 0.0 || y <= 0.0 {
                            return Err(err(self.src, at, "Beta needs positive arguments"));
                        }
                        Ok(beta(x, y))
                    }
                    other => Err(err(
                        self.src,
                        at,
                        &format!("unknown name {other:?} (allowed: pi, Gamma, Beta, sqrt)"),
                    )),
                }
            }
            _ => Err(err(self.src, at, "expected a number, name or '('")),
        }
    }
}

/// Evaluates a constant expression.
pub fn eval(src: &str) -> Result<f64> {
    let toks = tokenize(src)?;
    let mut p = Parser { src, toks, pos: 0 };
    let v = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(err(src, p.here(), "trailing input"));
    }
    if !v.is_finite() {
        return Err(Error::Config(format!("expression {src:?} is not finite")));
    }
    Ok(v)
}
