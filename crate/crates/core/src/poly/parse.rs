//! Recursive-descent parser for polynomial expressions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*      divisors must be nonzero constants
//! unary  := ('+' | '-') unary | power
//! power  := atom ('^' integer)?
//! atom   := number | 'x' index | 'y' index | '(' expr ')'
//! number := digits ('.' digits)?
//! ```
//!
//! Whitespace is ignored between tokens. Error positions are 0-based byte offsets.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::Polynomial;
use crate::error::{Error, Result};

/// Parses `src` with variables `x1..xm` and `y1..ym`, mapped to indices `0..m` and `m..2m`.
///
/// With `base_dim = None` only `x` variables are accepted and any index is allowed.
pub fn parse_polynomial(src: &str, base_dim: Option<usize>) -> Result<Polynomial> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, base_dim };
    p.skip_ws();
    if p.peek().is_none() {
        return Err(p.error("empty expression"));
    }
    let out = p.expr()?;
    p.skip_ws();
    if let Some(c) = p.peek() {
        return Err(p.error(&format!("unexpected '{}'", c as char)));
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    base_dim: Option<usize>,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Parse { position: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = &acc + &self.term()?;
            } else if self.eat(b'-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = &acc * &self.unary()?;
            } else if self.eat(b'/') {
                let at = self.pos;
                let d = self.unary()?;
                match d.as_constant() {
                    Some(c) if !c.is_zero() => acc = acc.scale(&(BigRational::one() / c)),
                    Some(_) => return Err(Error::Parse { position: at, message: "division by zero".into() }),
                    None => {
                        return Err(Error::Parse { position: at, message: "division by a non-constant".into() })
                    }
                }
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Polynomial> {
        if self.eat(b'-') {
            return Ok(-&self.unary()?);
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if self.eat(b'^') {
            self.skip_ws();
            let start = self.pos;
            let digits = self.digits();
            if digits.is_empty() {
                return Err(self.error("expected a nonnegative integer exponent"));
            }
            let e: u32 = digits
                .parse()
                .map_err(|_| Error::Parse { position: start, message: "exponent too large".into() })?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn digits(&mut self) -> String {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn atom(&mut self) -> Result<Polynomial> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c @ (b'x' | b'y')) => {
                let at = self.pos;
                self.pos += 1;
                let digits = self.digits();
                if digits.is_empty() {
                    return Err(self.error("expected a variable index"));
                }
                let idx: usize = digits
                    .parse()
                    .map_err(|_| Error::Parse { position: at, message: "variable index too large".into() })?;
                if idx == 0 {
                    return Err(Error::Parse { position: at, message: "variable indices start at 1".into() });
                }
                let var = match (c, self.base_dim) {
                    (b'x', Some(m)) if idx > m => {
                        return Err(Error::Parse { position: at, message: format!("x{idx} exceeds dimension {m}") })
                    }
                    (b'x', _) => idx - 1,
                    (_, None) => {
                        return Err(Error::Parse { position: at, message: "fiber variables need a base dimension".into() })
                    }
                    (_, Some(m)) if idx > m => {
                        return Err(Error::Parse { position: at, message: format!("y{idx} exceeds dimension {m}") })
                    }
                    (_, Some(m)) => m + idx - 1,
                };
                Ok(Polynomial::var(var))
            }
            Some(c) => Err(self.error(&format!("unexpected '{}'", c as char))),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Polynomial> {
        let start = self.pos;
        let int = self.digits();
        let mut frac = String::new();
        if self.peek() == Some(b'.') {
            self.pos += 1;
            frac = self.digits();
        }
        if int.is_empty() && frac.is_empty() {
            return Err(Error::Parse { position: start, message: "malformed number".into() });
        }
        let all = format!("{int}{frac}");
        let num: BigInt = all.parse().expect("digits only");
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        Ok(Polynomial::constant(BigRational::new(num, den)))
    }
}
