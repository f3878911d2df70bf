//! Recursive-descent parser for the one-variable expression grammar:
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := ('-' | '+') unary | factor
//! factor   := base ('^' exponent)?
//! base     := number | 'x' | func '(' expr ')' | '(' expr ')'
//! func     := exp | log | sqrt | sinh | cosh | tanh
//! exponent := integer | '(' ['-'] integer ['/' ['-'] integer] ')'
//! ```
//!
//! Unary minus binds looser than `^`, so `-x^2` is `-(x^2)`.

use super::ast::{Expression, Func, Ratio};
use super::ExprError;

pub fn parse(text: &str) -> Result<Expression, ExprError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("end of input or operator"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, expected: &str) -> ExprError {
        let found = match self.src.get(self.pos) {
            Some(&c) => format!("'{}'", c as char),
            None => "end of input".to_string(),
        };
        ExprError::Syntax {
            offset: self.pos,
            message: format!("expected {expected}, found {found}"),
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

    fn expect(&mut self, c: u8) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("'{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expression, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = lhs.add(&self.term()?);
            } else if self.eat(b'-') {
                lhs = lhs.sub(&self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expression, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = lhs.mul(&self.unary()?);
            } else if self.eat(b'/') {
                lhs = lhs.div(&self.unary()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expression, ExprError> {
        if self.eat(b'-') {
            Ok(self.unary()?.neg())
        } else if self.eat(b'+') {
            self.unary()
        } else {
            self.factor()
        }
    }

    fn factor(&mut self) -> Result<Expression, ExprError> {
        let base = self.base()?;
        if self.eat(b'^') {
            let p = self.exponent()?;
            Ok(base.pow(p))
        } else {
            Ok(base)
        }
    }

    fn integer(&mut self) -> Result<i64, ExprError> {
        let neg = self.eat(b'-');
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("integer"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let v: i64 = digits.parse().map_err(|_| ExprError::Syntax {
            offset: start,
            message: "integer exponent out of range".to_string(),
        })?;
        Ok(if neg { -v } else { v })
    }

    fn exponent(&mut self) -> Result<Ratio, ExprError> {
        if self.eat(b'(') {
            let num = self.integer()?;
            let den = if self.eat(b'/') {
                let at = self.pos;
                let d = self.integer()?;
                if d == 0 {
                    return Err(ExprError::Syntax {
                        offset: at,
                        message: "expected nonzero denominator in exponent".to_string(),
                    });
                }
                d
            } else {
                1
            };
            self.expect(b')')?;
            Ok(Ratio::new(num, den))
        } else {
            if self.peek() == Some(b'-') {
                return Err(self.error("integer or '(' (wrap negative exponents in parentheses)"));
            }
            Ok(Ratio::integer(self.integer()?))
        }
    }

    fn base(&mut self) -> Result<Expression, ExprError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let word = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                if word == "x" {
                    return Ok(Expression::var());
                }
                match Func::from_name(word) {
                    Some(func) => {
                        self.expect(b'(')?;
                        let arg = self.expr()?;
                        self.expect(b')')?;
                        Ok(Expression::call(func, &arg))
                    }
                    None => {
                        self.pos = start;
                        Err(self.error("'x', a number, '(' or one of exp, log, sqrt, sinh, cosh, tanh"))
                    }
                }
            }
            _ => Err(self.error("'x', a number, '(' or a function name")),
        }
    }

    fn number(&mut self) -> Result<Expression, ExprError> {
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
        match text.parse::<f64>() {
            Ok(v) => {
                self.pos = i;
                Ok(Expression::constant(v))
            }
            Err(_) => Err(ExprError::Syntax {
                offset: start,
                message: format!("expected number, found '{text}'"),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprlang::ExtReal;

    #[test]
    fn parses_quartic() {
        let e = parse("x^4+2*x^2-1").unwrap();
        assert_eq!(e.eval_f64(1.0), 2.0);
    }

    #[test]
    fn sinh_over_cosh_is_tanh() {
        let e = parse("sinh(x)/cosh(x)").unwrap();
        for &x in &[-2.0, -0.3, 0.0, 0.7, 3.1] {
            assert!((e.eval_f64(x) - f64::tanh(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn half_power_of_negative_is_undefined() {
        let e = parse("x^(1/2)").unwrap();
        assert_eq!(e.evaluate(-1.0), ExtReal::Undefined);
        assert_eq!(e.eval_f64(4.0), 2.0);
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let e = parse("-x^2").unwrap();
        assert_eq!(e.eval_f64(3.0), -9.0);
        let g = parse("exp(-x^2)").unwrap();
        assert!((g.eval_f64(1.0) - (-1.0f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn scientific_numbers_and_negative_exponents() {
        let e = parse("2.5e-1*x^(-2) + .5").unwrap();
        assert!((e.eval_f64(0.5) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match parse("x^4 + * 2") {
            Err(ExprError::Syntax { offset, message }) => {
                assert_eq!(offset, 6);
                assert!(message.starts_with("expected"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        match parse("sin(x)") {
            Err(ExprError::Syntax { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("unexpected {other:?}"),
        }
        match parse("(x+1") {
            Err(ExprError::Syntax { offset, message }) => {
                assert_eq!(offset, 4);
                assert!(message.contains("')'"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("x^(1/0)").is_err());
        assert!(parse("x^1.5").is_err());
    }

    #[test]
    fn display_round_trips() {
        for src in [
            "x^4+2*x^2-1",
            "(x-1)/(x+1)",
            "-x^2*exp(-x^2/2)",
            "x*1.4142135623730951/sqrt(x^2+2)",
            "x^(-3/2) - (-2)^2 + x/(-x)",
            "tanh(x)^(1/3)",
        ] {
            let e = parse(src).unwrap();
            let back = parse(&e.to_string()).unwrap();
            for &x in &[0.3, 1.7, 2.9] {
                let (a, b) = (e.eval_f64(x), back.eval_f64(x));
                assert!((a - b).abs() <= 1e-15 * a.abs().max(1.0), "{src} -> {e}");
            }
        }
    }
}
