//! Expression language for the generating function: parsing, exact symbolic
//! derivatives up to third order, evaluation with in-band exceptional
//! values, and location of simple zeros and poles on an interval.

mod ast;
mod parser;
mod roots;

pub use ast::{ExtReal, Expression, Func, Ratio};
pub use parser::parse;
pub use roots::{
    locate_poles, locate_roots, locate_zeros_of, ResolutionWarning, Root, RootKind, RootSet,
    DEFAULT_SCAN_POINTS,
};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("derivative order {0} not in 1..=3")]
    InvalidOrder(usize),
    #[error("invalid interval [{0}, {1}] or scan resolution")]
    InvalidInterval(f64, f64),
    #[error("{kind:?} at x = {location} is not simple (derivative indicator {indicator:e})")]
    SimplicityViolation {
        location: f64,
        kind: RootKind,
        indicator: f64,
    },
}

/// Symbolic derivative of order 1, 2 or 3.
pub fn differentiate(f: &Expression, order: usize) -> Result<Expression, ExprError> {
    if !(1..=3).contains(&order) {
        return Err(ExprError::InvalidOrder(order));
    }
    Ok(f.nth_derivative(order))
}

/// A function together with its first three exact derivatives.
#[derive(Debug, Clone, Serialize)]
pub struct ParsedFunction {
    pub base: Expression,
    #[serde(skip)]
    pub d1: Expression,
    #[serde(skip)]
    pub d2: Expression,
    #[serde(skip)]
    pub d3: Expression,
}

impl ParsedFunction {
    pub fn new(base: Expression) -> ParsedFunction {
        let d1 = base.derivative();
        let d2 = d1.derivative();
        let d3 = d2.derivative();
        ParsedFunction { base, d1, d2, d3 }
    }

    pub fn parse(text: &str) -> Result<ParsedFunction, ExprError> {
        Ok(ParsedFunction::new(parse(text)?))
    }

    /// `k`-th derivative (`0..=3`) at `x`; NaN for undefined.
    #[inline]
    pub fn eval(&self, k: usize, x: f64) -> f64 {
        match k {
            0 => self.base.eval_f64(x),
            1 => self.d1.eval_f64(x),
            2 => self.d2.eval_f64(x),
            3 => self.d3.eval_f64(x),
            _ => panic!("derivative order {k} not cached"),
        }
    }

    /// `[f, f', f'', f''']` at `x`.
    pub fn jet(&self, x: f64) -> [f64; 4] {
        [self.eval(0, x), self.eval(1, x), self.eval(2, x), self.eval(3, x)]
    }

    pub fn derivative_expr(&self, k: usize) -> &Expression {
        match k {
            0 => &self.base,
            1 => &self.d1,
            2 => &self.d2,
            3 => &self.d3,
            _ => panic!("derivative order {k} not cached"),
        }
    }

    /// The function `1/f`.
    pub fn reciprocal(&self) -> ParsedFunction {
        ParsedFunction::new(self.base.recip())
    }

    /// The function `a*f`.
    pub fn scaled(&self, a: f64) -> ParsedFunction {
        ParsedFunction::new(Expression::constant(a).mul(&self.base))
    }

    /// The first derivative as a function in its own right (derivatives up
    /// to second order are exact; the third is computed on demand).
    pub fn derivative_function(&self) -> ParsedFunction {
        ParsedFunction {
            base: self.d1.clone(),
            d1: self.d2.clone(),
            d2: self.d3.clone(),
            d3: self.d3.derivative(),
        }
    }
}

impl std::fmt::Display for ParsedFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.base.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn central_difference(e: &Expression, x: f64, h: f64) -> f64 {
        (e.eval_f64(x + h) - e.eval_f64(x - h)) / (2.0 * h)
    }

    #[test]
    fn gaussian_derivative_matches_difference_oracle() {
        let f = ParsedFunction::parse("exp(-x^2)").unwrap();
        let oracle = central_difference(&f.base, 1.0, 1e-5);
        // frozen from the oracle above: -2/e
        assert!((oracle - (-0.7357588823428847)).abs() < 1e-9);
        assert!((f.eval(1, 1.0) - (-0.7357588823428847)).abs() < 1e-12);
    }

    #[test]
    fn orders_out_of_range_rejected() {
        let e = parse("x").unwrap();
        assert_eq!(differentiate(&e, 0), Err(ExprError::InvalidOrder(0)));
        assert_eq!(differentiate(&e, 4), Err(ExprError::InvalidOrder(4)));
        assert!(differentiate(&e, 3).is_ok());
    }

    #[test]
    fn cached_derivatives_of_quartic() {
        let f = ParsedFunction::parse("x^4+2*x^2-1").unwrap();
        assert_eq!(f.jet(1.0), [2.0, 8.0, 16.0, 24.0]);
    }
}
