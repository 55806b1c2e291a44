//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr     := term (("+" | "-") term)*
//! term     := unary (("*" | "/") unary)*
//! unary    := "-" unary | power
//! power    := atom ("^" exponent)?
//! exponent := "-" exponent | power
//! atom     := number | "t" | "x"N | "y"N | func "(" expr ")" | "(" expr ")"
//! ```

use thiserror::Error;

use super::{Expr, Func, Var, MAX_DIM, Q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("variable `{name}` at byte {offset} is out of range for dimension {n}")]
    IndexOutOfRange { offset: usize, name: String, n: usize },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { offset: usize, name: String },
    #[error("division by zero at byte {offset}")]
    DivisionByZero { offset: usize },
    #[error("exponent at byte {offset} is not a constant")]
    NonConstantExponent { offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::IndexOutOfRange { offset, .. }
            | ParseError::UnknownFunction { offset, .. }
            | ParseError::DivisionByZero { offset }
            | ParseError::NonConstantExponent { offset } => *offset,
        }
    }
}

/// Parse `text` as an expression over `t, x1..xn, y1..yn`.
pub fn parse(text: &str, n: usize) -> Result<Expr, ParseError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, n };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax(format!("unexpected `{}`", p.src[p.pos] as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n: usize,
}

impl Parser<'_> {
    fn syntax(&self, message: String) -> ParseError {
        ParseError::Syntax { offset: self.pos, message }
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

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat(b'+') {
                terms.push(self.term()?);
            } else if self.eat(b'-') {
                terms.push(-self.term()?);
            } else {
                return Ok(Expr::add_all(terms));
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                let rhs = self.unary()?;
                acc = acc * rhs;
            } else if self.peek() == Some(b'/') {
                let at = self.pos;
                self.pos += 1;
                let rhs = self.unary()?;
                if rhs.is_zero() {
                    return Err(ParseError::DivisionByZero { offset: at });
                }
                acc = acc / rhs;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            Ok(-self.unary()?)
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            self.skip_ws();
            let at = self.pos;
            let e = self.exponent()?;
            match e.as_num() {
                Some(q) => Ok(base.pow_q(q)),
                None => Err(ParseError::NonConstantExponent { offset: at }),
            }
        } else {
            Ok(base)
        }
    }

    fn exponent(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            Ok(-self.exponent()?)
        } else {
            self.power()
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(self.syntax("unexpected end of input".into())),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.syntax("expected `)`".into()));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            Some(c) => Err(self.syntax(format!("unexpected `{}`", c as char))),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let mut digits = String::new();
        let mut scale = 0u32;
        let mut seen_dot = false;
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_digit() {
                digits.push(c as char);
                if seen_dot {
                    scale += 1;
                }
            } else if c == b'.' && !seen_dot {
                seen_dot = true;
            } else {
                break;
            }
            self.pos += 1;
        }
        if digits.is_empty() {
            self.pos = start;
            return Err(self.syntax("malformed number".into()));
        }
        let num: num_bigint::BigInt = digits.parse().expect("ascii digits");
        let den = num_bigint::BigInt::from(10u32).pow(scale);
        Ok(Expr::num(Q::from_bigint(num, den)))
    }

    fn identifier(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii identifier");
        if name == "t" {
            return Ok(Expr::t());
        }
        let bytes = name.as_bytes();
        if (bytes[0] == b'x' || bytes[0] == b'y') && bytes.len() > 1 && bytes[1..].iter().all(u8::is_ascii_digit) {
            let idx: usize = name[1..].parse().unwrap_or(usize::MAX);
            if idx == 0 || idx > self.n || idx > MAX_DIM {
                return Err(ParseError::IndexOutOfRange { offset: start, name: name.to_string(), n: self.n });
            }
            return Ok(Expr::var(if bytes[0] == b'x' { Var::X(idx) } else { Var::Y(idx) }));
        }
        let func = match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "ln" => Some(Func::Ln),
            "sqrt" => None,
            _ => return Err(ParseError::UnknownFunction { offset: start, name: name.to_string() }),
        };
        if !self.eat(b'(') {
            return Err(self.syntax(format!("expected `(` after `{name}`")));
        }
        let arg = self.expr()?;
        if !self.eat(b')') {
            return Err(self.syntax("expected `)`".into()));
        }
        Ok(match func {
            Some(f) => Expr::apply(f, &arg),
            None => arg.sqrt(),
        })
    }
}
