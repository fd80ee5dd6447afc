//! Recursive-descent parser for the ASCII expression grammar:
//!
//! ```text
//! expr     := term (('+'|'-') term)*
//! term     := factor (('*'|'/') factor)*
//! factor   := '-' factor | base ('^' rational)?
//! base     := number | ident | '(' expr ')' | func '(' expr ')'
//! func     := sin | cos | exp | log | sqrt
//! rational := ['-'] int ['/' int] | '(' rational ')'
//! ```
//!
//! Identifiers must be chart coordinates or `pi`. Whitespace is ignored.

use super::ScalarExpr;
use crate::error::ParseError;
use num_rational::Rational64;

pub fn parse_expr(text: &str, idents: &[String]) -> Result<ScalarExpr, ParseError> {
    let mut p = Parser {
        bytes: text.as_bytes(),
        pos: 0,
        idents,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    idents: &'a [String],
}

const FUNCS: [&str; 5] = ["sin", "cos", "exp", "log", "sqrt"];

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> ParseError {
        ParseError {
            offset: self.pos,
            message: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, b: u8) -> Result<(), ParseError> {
        if self.eat(b) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", b as char)))
        }
    }

    fn expr(&mut self) -> Result<ScalarExpr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    terms.push(self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    terms.push(ScalarExpr::neg(self.term()?));
                }
                _ => break,
            }
        }
        Ok(ScalarExpr::add_all(terms))
    }

    fn term(&mut self) -> Result<ScalarExpr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = ScalarExpr::mul(acc, self.factor()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    acc = ScalarExpr::quot(acc, self.factor()?);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<ScalarExpr, ParseError> {
        if self.eat(b'-') {
            return Ok(ScalarExpr::neg(self.factor()?));
        }
        let base = self.base()?;
        if self.eat(b'^') {
            let r = self.rational()?;
            return Ok(ScalarExpr::pow(base, r));
        }
        Ok(base)
    }

    fn rational(&mut self) -> Result<Rational64, ParseError> {
        if self.eat(b'(') {
            let r = self.rational()?;
            self.expect(b')')?;
            return Ok(r);
        }
        let neg = self.eat(b'-');
        let n = self.integer()?;
        // a bare `a/b` exponent only when a digit follows, so that
        // `x^2/(...)` keeps its meaning as a quotient
        let d = if self.peek() == Some(b'/')
            && self
                .bytes
                .get(self.pos + 1)
                .is_some_and(u8::is_ascii_digit)
        {
            self.pos += 1;
            let d = self.integer()?;
            if d == 0 {
                return Err(self.err("zero denominator in exponent"));
            }
            d
        } else {
            1
        };
        let r = Rational64::new(n, d);
        Ok(if neg { -r } else { r })
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected integer"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse::<i64>()
            .map_err(|_| self.err("integer out of range"))
    }

    fn base(&mut self) -> Result<ScalarExpr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            _ => Err(self.err("expected number, identifier or '('")),
        }
    }

    fn number(&mut self) -> Result<ScalarExpr, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let mut frac_len = 0usize;
        if self.bytes.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            let fs = self.pos;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            frac_len = self.pos - fs;
            if frac_len == 0 {
                return Err(self.err("digits expected after decimal point"));
            }
        }
        let mut has_exp = false;
        if matches!(self.bytes.get(self.pos), Some(b'e') | Some(b'E')) {
            // scientific notation only when followed by a valid exponent
            let save = self.pos;
            self.pos += 1;
            if matches!(self.bytes.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            let ds = self.pos;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == ds {
                self.pos = save;
            } else {
                has_exp = true;
            }
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        if has_exp || frac_len > 15 || self.pos - start > 17 {
            let x: f64 = text
                .parse()
                .map_err(|_| self.err("malformed numeric literal"))?;
            return Ok(ScalarExpr::float(x));
        }
        if frac_len == 0 {
            let n: i64 = text.parse().map_err(|_| self.err("integer out of range"))?;
            return Ok(ScalarExpr::int(n));
        }
        let digits: String = text.chars().filter(|c| *c != '.').collect();
        let n: i64 = digits
            .parse()
            .map_err(|_| self.err("numeric literal out of range"))?;
        Ok(ScalarExpr::rational(n, 10i64.pow(frac_len as u32)))
    }

    fn ident(&mut self) -> Result<ScalarExpr, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        if FUNCS.contains(&name) {
            self.expect(b'(')?;
            let arg = self.expr()?;
            self.expect(b')')?;
            return Ok(match name {
                "sin" => ScalarExpr::sin(arg),
                "cos" => ScalarExpr::cos(arg),
                "exp" => ScalarExpr::exp(arg),
                "log" => ScalarExpr::log(arg),
                "sqrt" => ScalarExpr::sqrt(arg),
                _ => unreachable!(),
            });
        }
        if name == "pi" {
            return Ok(ScalarExpr::pi());
        }
        if self.idents.iter().any(|i| i == name) {
            return Ok(ScalarExpr::var(name));
        }
        Err(ParseError {
            offset: start,
            message: format!("unknown identifier `{name}`"),
        })
    }
}
