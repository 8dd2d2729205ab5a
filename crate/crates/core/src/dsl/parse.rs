//! Recursive-descent parser for metric expressions.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' exponent)?
//! exponent := signed_int ('^' exponent)? | '(' signed_int ')' ('^' exponent)?
//! atom  := number | 'i' | var | func '(' expr ')' | '(' expr ')'
//! ```

use num_complex::Complex64;

use super::expr::{Expr, Func, Var};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64, bool),
    Ident(String),
    Op(char),
    End,
}

impl Tok {
    fn describe(&self, src: &str, start: usize, end: usize) -> String {
        match self {
            Tok::End => "end of input".into(),
            _ => format!("`{}`", &src[start..end]),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    /// Next token with its byte span.
    fn next(&mut self) -> Result<(Tok, usize, usize)> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let Some(c) = rest.chars().next() else {
            return Ok((Tok::End, start, start));
        };
        if c.is_ascii_digit() || c == '.' {
            let bytes = rest.as_bytes();
            let mut i = 0;
            let mut integral = true;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                integral = false;
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    integral = false;
                    i = j;
                }
            }
            let text = &rest[..i];
            let value: f64 = text.parse().map_err(|_| Error::Syntax {
                offset: start,
                expected: vec!["number".into()],
                found: format!("`{}`", text),
            })?;
            self.pos = start + i;
            return Ok((Tok::Num(value, integral), start, self.pos));
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let len = rest
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                .unwrap_or(rest.len());
            self.pos = start + len;
            return Ok((Tok::Ident(rest[..len].to_string()), start, self.pos));
        }
        if "+-*/^(),".contains(c) {
            self.pos = start + 1;
            return Ok((Tok::Op(c), start, self.pos));
        }
        Err(Error::Syntax {
            offset: start,
            expected: vec!["expression".into()],
            found: format!("`{}`", c),
        })
    }
}

struct Parser<'a> {
    src: &'a str,
    lexer: Lexer<'a>,
    tok: Tok,
    start: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self> {
        let mut lexer = Lexer { src, pos: 0 };
        let (tok, start, end) = lexer.next()?;
        Ok(Parser {
            src,
            lexer,
            tok,
            start,
            end,
        })
    }

    fn bump(&mut self) -> Result<()> {
        let (tok, start, end) = self.lexer.next()?;
        self.tok = tok;
        self.start = start;
        self.end = end;
        Ok(())
    }

    fn unexpected(&self, expected: &[&str]) -> Error {
        Error::Syntax {
            offset: self.start,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.tok.describe(self.src, self.start, self.end),
        }
    }

    fn expect(&mut self, op: char) -> Result<()> {
        if self.tok == Tok::Op(op) {
            self.bump()
        } else {
            Err(self.unexpected(&[&format!("`{}`", op)]))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.tok {
                Tok::Op('+') => {
                    self.bump()?;
                    lhs = Expr::add(lhs, self.term()?);
                }
                Tok::Op('-') => {
                    self.bump()?;
                    lhs = Expr::sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.tok {
                Tok::Op('*') => {
                    self.bump()?;
                    lhs = Expr::mul(lhs, self.unary()?);
                }
                Tok::Op('/') => {
                    self.bump()?;
                    lhs = Expr::div(lhs, self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.tok == Tok::Op('-') {
            self.bump()?;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.tok == Tok::Op('^') {
            self.bump()?;
            let e = self.exponent()?;
            return Ok(Expr::pow(base, e));
        }
        Ok(base)
    }

    fn signed_int(&mut self) -> Result<i64> {
        let mut sign = 1i64;
        match self.tok {
            Tok::Op('-') => {
                sign = -1;
                self.bump()?;
            }
            Tok::Op('+') => self.bump()?,
            _ => {}
        }
        match self.tok {
            Tok::Num(v, true) if v <= i32::MAX as f64 => {
                self.bump()?;
                Ok(sign * v as i64)
            }
            _ => Err(self.unexpected(&["integer exponent"])),
        }
    }

    fn exponent(&mut self) -> Result<i32> {
        let offset = self.start;
        let base = if self.tok == Tok::Op('(') {
            self.bump()?;
            let v = self.signed_int()?;
            self.expect(')')?;
            v
        } else {
            self.signed_int()?
        };
        let value = if self.tok == Tok::Op('^') {
            self.bump()?;
            let e = self.exponent()?;
            if e < 0 {
                return Err(Error::Syntax {
                    offset,
                    expected: vec!["integer exponent".into()],
                    found: "fractional power".into(),
                });
            }
            base.checked_pow(e as u32)
        } else {
            Some(base)
        };
        value.and_then(|v| i32::try_from(v).ok()).ok_or_else(|| Error::Syntax {
            offset,
            expected: vec!["exponent within i32".into()],
            found: "overflowing exponent".into(),
        })
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.tok.clone() {
            Tok::Num(v, _) => {
                self.bump()?;
                Ok(Expr::Num(Complex64::new(v, 0.0)))
            }
            Tok::Op('(') => {
                self.bump()?;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let offset = self.start;
                self.bump()?;
                if let Some(f) = Func::from_name(&name) {
                    return self.call(f, offset);
                }
                if name == "i" {
                    return Ok(Expr::I);
                }
                if let Some(v) = variable(&name) {
                    return Ok(Expr::Var(v));
                }
                Err(Error::UnknownIdentifier { name, offset })
            }
            _ => Err(self.unexpected(&["number", "identifier", "`(`", "`-`"])),
        }
    }

    fn call(&mut self, f: Func, offset: usize) -> Result<Expr> {
        self.expect('(')?;
        let mut args = Vec::new();
        if self.tok != Tok::Op(')') {
            args.push(self.expr()?);
            while self.tok == Tok::Op(',') {
                self.bump()?;
                args.push(self.expr()?);
            }
        }
        self.expect(')')?;
        if args.len() != 1 {
            return Err(Error::Arity {
                func: f.name().into(),
                expected: 1,
                found: args.len(),
                offset,
            });
        }
        Ok(Expr::call(f, args.pop().expect("one argument")))
    }
}

fn variable(name: &str) -> Option<Var> {
    let (ctor, digits): (fn(usize) -> Var, &str) = if let Some(d) = name.strip_prefix("eta") {
        (Var::Eta, d)
    } else {
        let d = name.strip_prefix('z')?;
        (Var::Z, d)
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
        return None;
    }
    let k: usize = digits.parse().ok()?;
    Some(ctor(k - 1))
}

pub fn parse(text: &str) -> Result<Expr> {
    let mut p = Parser::new(text)?;
    if p.tok == Tok::End {
        return Err(p.unexpected(&["expression"]));
    }
    let e = p.expr()?;
    if p.tok != Tok::End {
        return Err(p.unexpected(&["operator", "end of input"]));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn product_with_conj() {
        let e = parse("z1*conj(z1)").unwrap();
        assert_eq!(e, Expr::mul(Expr::z(0), Expr::call(Func::Conj, Expr::z(0))));
    }

    #[test]
    fn nested_exp_parses() {
        let e = parse("exp(2*(z1*conj(z1)+z2*conj(z2))/2)").unwrap();
        let v = e.eval_at(&[c(0.5, 0.0), c(0.0, 0.5)], &[]).unwrap();
        assert!((v - c(0.5f64.exp(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn fractional_power_is_rejected() {
        match parse("eta1^(1/2)").unwrap_err() {
            Error::Syntax { offset, expected, .. } => {
                assert_eq!(offset, 7);
                assert_eq!(expected, vec!["`)`".to_string()]);
            }
            e => panic!("unexpected error {e:?}"),
        }
        assert!(matches!(parse("eta1^0.5"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn precedence() {
        let at = |s: &str| parse(s).unwrap().eval_at(&[c(2.0, 0.0)], &[]).unwrap();
        assert_eq!(at("-z1^2"), c(-4.0, 0.0));
        assert_eq!(at("2^3^2"), c(512.0, 0.0));
        assert_eq!(at("1-2-3"), c(-4.0, 0.0));
        assert_eq!(at("8/2/2"), c(2.0, 0.0));
        assert_eq!(at("z1^-1"), c(0.5, 0.0));
        assert_eq!(at("z1^(-2)"), c(0.25, 0.0));
        assert_eq!(at("2*i*i"), c(-2.0, 0.0));
        assert_eq!(at("1.5e1 + 0"), c(15.0, 0.0));
    }

    #[test]
    fn error_kinds() {
        assert!(matches!(parse("foo(z1)"), Err(Error::UnknownIdentifier { .. })));
        assert!(matches!(parse("z0"), Err(Error::UnknownIdentifier { .. })));
        assert!(matches!(parse("sqrt(z1, z2)"), Err(Error::Arity { found: 2, .. })));
        assert!(matches!(parse(""), Err(Error::Syntax { offset: 0, .. })));
        assert!(matches!(parse("z1 +"), Err(Error::Syntax { offset: 4, .. })));
        assert!(matches!(parse("(z1"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn display_reparses() {
        let src = "-(z1 - 0.25*conj(z2))^3 / (1 + abs2(eta1)) + exp(-i*z1) - 2^(-1)";
        let e = parse(src).unwrap();
        let again = parse(&e.to_string()).unwrap();
        assert_eq!(e, again);
    }
}
