//! Expression grammar:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' '-'? integer)?
//! atom    := number | 'pi' | variable | func '(' expr ')' | '(' expr ')'
//! variable:= 'x' digits            (x0, x1, ...)
//! func    := exp | log | ln | sqrt | sin | cos | tan | atan | arctan | abs
//! ```
//!
//! `-x^2` parses as `-(x^2)`. Exponents are integer literals only. Whitespace
//! is ignored. Decimal literals that are not machine numbers (e.g. `0.1`) are
//! enclosed by their two neighbouring doubles for interval evaluation.

use thiserror::Error;

use super::dag::{DagBuilder, ExprDag, NodeId};
use crate::interval::{Interval, StdFn};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdentifier { pos: usize, name: String },
}

/// Parses `text`; the arity is one more than the largest variable index (0 if none).
pub fn parse_expr(text: &str) -> Result<ExprDag, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        builder: DagBuilder::new(),
        arity: 0,
    };
    let root = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    let arity = p.arity;
    Ok(p.builder.finish(root, arity))
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    builder: DagBuilder,
    arity: usize,
}

impl Parser<'_> {
    fn syntax(&self, message: &str) -> ParseError {
        ParseError::Syntax {
            pos: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.syntax(&format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<NodeId, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                let rhs = self.term()?;
                lhs = self.builder.add(lhs, rhs);
            } else if self.eat(b'-') {
                let rhs = self.term()?;
                lhs = self.builder.sub(lhs, rhs);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<NodeId, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                let rhs = self.unary()?;
                lhs = self.builder.mul(lhs, rhs);
            } else if self.eat(b'/') {
                let rhs = self.unary()?;
                lhs = self.builder.div(lhs, rhs);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<NodeId, ParseError> {
        if self.eat(b'-') {
            let inner = self.unary()?;
            return Ok(self.builder.neg(inner));
        }
        self.power()
    }

    fn power(&mut self) -> Result<NodeId, ParseError> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let negative = self.eat(b'-');
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.syntax("expected an integer exponent"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let n: i32 = digits
            .parse()
            .map_err(|_| ParseError::Syntax {
                pos: start,
                message: "exponent out of range".into(),
            })?;
        Ok(self.builder.powi(base, if negative { -n } else { n }))
    }

    fn atom(&mut self) -> Result<NodeId, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(_) => Err(self.syntax("unexpected character")),
            None => Err(self.syntax("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<NodeId, ParseError> {
        let start = self.pos;
        let s = self.src;
        let mut i = self.pos;
        while i < s.len() && (s[i].is_ascii_digit() || s[i] == b'.') {
            i += 1;
        }
        if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
            let mut j = i + 1;
            if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
                j += 1;
            }
            if j < s.len() && s[j].is_ascii_digit() {
                while j < s.len() && s[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        let text = std::str::from_utf8(&s[start..i]).unwrap();
        let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
            pos: start,
            message: format!("invalid number `{text}`"),
        })?;
        if !value.is_finite() {
            return Err(ParseError::Syntax {
                pos: start,
                message: format!("number `{text}` overflows"),
            });
        }
        self.pos = i;
        Ok(if literal_is_exact(text, value) {
            self.builder.constant(value)
        } else {
            self.builder.constant_enclosed(value, Interval::around(value))
        })
    }

    fn identifier(&mut self) -> Result<NodeId, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if name == "pi" {
            let pi = std::f64::consts::PI;
            let enclosure = Interval::new(pi, pi.next_up()).unwrap();
            return Ok(self.builder.constant_enclosed(pi, enclosure));
        }
        if let Some(idx) = name.strip_prefix('x') {
            if !idx.is_empty() && idx.bytes().all(|b| b.is_ascii_digit()) {
                let i: usize = idx.parse().map_err(|_| ParseError::UnknownIdentifier {
                    pos: start,
                    name: name.to_string(),
                })?;
                self.arity = self.arity.max(i + 1);
                return Ok(self.builder.var(i));
            }
        }
        if let Ok(f) = name.parse::<StdFn>() {
            self.expect(b'(')?;
            let arg = self.expr()?;
            self.expect(b')')?;
            return Ok(self.builder.apply(f, arg));
        }
        Err(ParseError::UnknownIdentifier {
            pos: start,
            name: name.to_string(),
        })
    }
}

/// True when the decimal literal denotes exactly the parsed double: integers
/// below 2^53, or literals whose fractional part is a short binary fraction.
fn literal_is_exact(text: &str, value: f64) -> bool {
    if text.contains(['e', 'E']) {
        return value.fract() == 0.0 && value.abs() < 9.007_199_254_740_992e15;
    }
    let frac = text.split_once('.').map(|(_, f)| f.trim_end_matches('0')).unwrap_or("");
    if frac.is_empty() {
        return value.abs() < 9.007_199_254_740_992e15;
    }
    // The literal is exact iff the double is a k-bit binary fraction whose
    // shortest decimal form has the same digits.
    let k = frac.len() as i32;
    if k > 20 {
        return false;
    }
    let scaled = value * 2f64.powi(k);
    scaled.fract() == 0.0 && scaled.abs() < 9.007_199_254_740_992e15 && {
        let repr = format!("{value}");
        let rfrac = repr.split_once('.').map(|(_, f)| f).unwrap_or("");
        rfrac == frac
    }
}
