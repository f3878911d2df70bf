use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Serialize, Serializer};

/// Elementary functions understood by the expression language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Exp => v.exp(),
            Func::Log => {
                if v > 0.0 {
                    v.ln()
                } else {
                    f64::NAN
                }
            }
            Func::Sqrt => {
                if v >= 0.0 {
                    v.sqrt()
                } else {
                    f64::NAN
                }
            }
            Func::Sinh => v.sinh(),
            Func::Cosh => v.cosh(),
            Func::Tanh => v.tanh(),
        }
    }
}

/// Reduced rational exponent `num/den` with `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ratio {
    num: i64,
    den: i64,
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Ratio {
    /// Panics if `den == 0`.
    pub fn new(num: i64, den: i64) -> Ratio {
        assert!(den != 0, "zero denominator in rational exponent");
        let g = gcd(num, den).max(1);
        let s = if den < 0 { -1 } else { 1 };
        Ratio {
            num: s * num / g,
            den: s * den / g,
        }
    }

    pub fn integer(n: i64) -> Ratio {
        Ratio { num: n, den: 1 }
    }

    pub fn num(self) -> i64 {
        self.num
    }

    pub fn den(self) -> i64 {
        self.den
    }

    pub fn is_integer(self) -> bool {
        self.den == 1
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    fn minus_one(self) -> Ratio {
        Ratio::new(self.num - self.den, self.den)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            if self.num < 0 {
                write!(f, "({})", self.num)
            } else {
                write!(f, "{}", self.num)
            }
        } else {
            write!(f, "({}/{})", self.num, self.den)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Const(f64),
    Var,
    Neg(Expression),
    Add(Expression, Expression),
    Sub(Expression, Expression),
    Mul(Expression, Expression),
    Div(Expression, Expression),
    Pow(Expression, Ratio),
    Call(Func, Expression),
}

/// Immutable expression tree in one real variable `x`.
///
/// Subtrees are reference counted, so cloning is cheap and derivatives
/// share structure with the expression they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression(Arc<Node>);

/// Result of evaluating an expression at a real point.
///
/// Division of a nonzero value by zero yields a signed infinity. The zero
/// in the denominator is always taken as `+0`, so the sign is that of the
/// numerator: `(x-1)/(x+1)` at `x = -1` gives `-inf`, the limit from the
/// right. `0/0`, logarithms and even roots of negative numbers, and any
/// operation on an undefined value give [`ExtReal::Undefined`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
    NegInf,
    Undefined,
}

impl ExtReal {
    pub fn from_f64(v: f64) -> ExtReal {
        if v.is_nan() {
            ExtReal::Undefined
        } else if v == f64::INFINITY {
            ExtReal::PosInf
        } else if v == f64::NEG_INFINITY {
            ExtReal::NegInf
        } else {
            ExtReal::Finite(v)
        }
    }

    /// IEEE view; `Undefined` maps to NaN.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => f64::INFINITY,
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Undefined => f64::NAN,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_undefined(self) -> bool {
        matches!(self, ExtReal::Undefined)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInf => write!(f, "inf"),
            ExtReal::NegInf => write!(f, "-inf"),
            ExtReal::Undefined => write!(f, "undefined"),
        }
    }
}

fn divide(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        if a == 0.0 || a.is_nan() {
            f64::NAN
        } else {
            a.signum() * f64::INFINITY
        }
    } else {
        a / b
    }
}

fn rational_power(base: f64, p: Ratio) -> f64 {
    if p.is_integer() {
        let n = p.num();
        if n >= 0 {
            return powi_exact(base, n as u64);
        }
        return divide(1.0, powi_exact(base, n.unsigned_abs()));
    }
    let e = p.to_f64();
    if base >= 0.0 {
        if base == 0.0 && e < 0.0 {
            return f64::INFINITY;
        }
        base.powf(e)
    } else if p.den() % 2 == 1 {
        // odd root of a negative number stays real
        let mag = (-base).powf(e);
        if p.num() % 2 == 0 {
            mag
        } else {
            -mag
        }
    } else {
        f64::NAN
    }
}

fn powi_exact(base: f64, n: u64) -> f64 {
    if n <= i32::MAX as u64 {
        base.powi(n as i32)
    } else {
        base.powf(n as f64)
    }
}

impl Expression {
    pub(crate) fn node(&self) -> &Node {
        &self.0
    }

    fn wrap(node: Node) -> Expression {
        Expression(Arc::new(node))
    }

    pub fn constant(v: f64) -> Expression {
        Expression::wrap(Node::Const(v))
    }

    pub fn var() -> Expression {
        Expression::wrap(Node::Var)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    fn is_const(&self, v: f64) -> bool {
        self.as_const() == Some(v)
    }

    pub fn neg(&self) -> Expression {
        match self.node() {
            Node::Const(c) => Expression::constant(-c),
            Node::Neg(a) => a.clone(),
            _ => Expression::wrap(Node::Neg(self.clone())),
        }
    }

    pub fn add(&self, rhs: &Expression) -> Expression {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expression::constant(a + b),
            (Some(a), _) if a == 0.0 => rhs.clone(),
            (_, Some(b)) if b == 0.0 => self.clone(),
            _ => match rhs.node() {
                Node::Neg(r) => Expression::wrap(Node::Sub(self.clone(), r.clone())),
                _ => Expression::wrap(Node::Add(self.clone(), rhs.clone())),
            },
        }
    }

    pub fn sub(&self, rhs: &Expression) -> Expression {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expression::constant(a - b),
            (Some(a), _) if a == 0.0 => rhs.neg(),
            (_, Some(b)) if b == 0.0 => self.clone(),
            _ => match rhs.node() {
                Node::Neg(r) => Expression::wrap(Node::Add(self.clone(), r.clone())),
                _ => Expression::wrap(Node::Sub(self.clone(), rhs.clone())),
            },
        }
    }

    pub fn mul(&self, rhs: &Expression) -> Expression {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expression::constant(a * b),
            (Some(a), _) | (_, Some(a)) if a == 0.0 => Expression::constant(0.0),
            (Some(a), _) if a == 1.0 => rhs.clone(),
            (_, Some(b)) if b == 1.0 => self.clone(),
            (Some(a), _) if a == -1.0 => rhs.neg(),
            (_, Some(b)) if b == -1.0 => self.neg(),
            // keep constants on the left so they fold with each other
            (None, Some(_)) => Expression::wrap(Node::Mul(rhs.clone(), self.clone())),
            _ => Expression::wrap(Node::Mul(self.clone(), rhs.clone())),
        }
    }

    pub fn div(&self, rhs: &Expression) -> Expression {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) if b != 0.0 => Expression::constant(a / b),
            (Some(a), _) if a == 0.0 => Expression::constant(0.0),
            (_, Some(b)) if b == 1.0 => self.clone(),
            (_, Some(b)) if b == -1.0 => self.neg(),
            _ => Expression::wrap(Node::Div(self.clone(), rhs.clone())),
        }
    }

    pub fn pow(&self, p: Ratio) -> Expression {
        if p.num() == 0 {
            return Expression::constant(1.0);
        }
        if p == Ratio::integer(1) {
            return self.clone();
        }
        if let Some(c) = self.as_const() {
            let v = rational_power(c, p);
            if v.is_finite() {
                return Expression::constant(v);
            }
        }
        if let Node::Pow(inner, q) = self.node() {
            // (u^q)^p = u^(pq) only when q is an odd-denominator integer power
            // chain that cannot change the domain; restrict to integer q, p.
            if q.is_integer() && p.is_integer() {
                return inner.pow(Ratio::integer(q.num() * p.num()));
            }
        }
        Expression::wrap(Node::Pow(self.clone(), p))
    }

    pub fn powi(&self, n: i64) -> Expression {
        self.pow(Ratio::integer(n))
    }

    pub fn call(func: Func, arg: &Expression) -> Expression {
        if let Some(c) = arg.as_const() {
            let v = func.apply(c);
            if v.is_finite() {
                return Expression::constant(v);
            }
        }
        Expression::wrap(Node::Call(func, arg.clone()))
    }

    pub fn exp(&self) -> Expression {
        Expression::call(Func::Exp, self)
    }
    pub fn ln(&self) -> Expression {
        Expression::call(Func::Log, self)
    }
    pub fn sqrt(&self) -> Expression {
        Expression::call(Func::Sqrt, self)
    }
    pub fn sinh(&self) -> Expression {
        Expression::call(Func::Sinh, self)
    }
    pub fn cosh(&self) -> Expression {
        Expression::call(Func::Cosh, self)
    }
    pub fn tanh(&self) -> Expression {
        Expression::call(Func::Tanh, self)
    }

    /// `1/self`, flipping quotients and negating integer powers so that
    /// the reciprocal of a reciprocal is the original expression.
    pub fn recip(&self) -> Expression {
        match self.node() {
            Node::Div(a, b) if a.is_const(1.0) => b.clone(),
            Node::Div(a, b) => b.div(a),
            Node::Pow(a, p) if p.is_integer() => a.pow(Ratio::integer(-p.num())),
            Node::Neg(a) => a.recip().neg(),
            _ => Expression::constant(1.0).div(self),
        }
    }

    /// Evaluate in IEEE arithmetic with the in-band conventions of
    /// [`ExtReal`]; NaN stands for the undefined marker.
    pub fn eval_f64(&self, x: f64) -> f64 {
        match self.node() {
            Node::Const(c) => *c,
            Node::Var => x,
            Node::Neg(a) => -a.eval_f64(x),
            Node::Add(a, b) => a.eval_f64(x) + b.eval_f64(x),
            Node::Sub(a, b) => a.eval_f64(x) - b.eval_f64(x),
            Node::Mul(a, b) => a.eval_f64(x) * b.eval_f64(x),
            Node::Div(a, b) => divide(a.eval_f64(x), b.eval_f64(x)),
            Node::Pow(a, p) => rational_power(a.eval_f64(x), *p),
            Node::Call(f, a) => f.apply(a.eval_f64(x)),
        }
    }

    pub fn evaluate(&self, x: f64) -> ExtReal {
        ExtReal::from_f64(self.eval_f64(x))
    }

    /// Exact symbolic first derivative with respect to `x`.
    pub fn derivative(&self) -> Expression {
        match self.node() {
            Node::Const(_) => Expression::constant(0.0),
            Node::Var => Expression::constant(1.0),
            Node::Neg(a) => a.derivative().neg(),
            Node::Add(a, b) => a.derivative().add(&b.derivative()),
            Node::Sub(a, b) => a.derivative().sub(&b.derivative()),
            Node::Mul(a, b) => {
                let da = a.derivative();
                let db = b.derivative();
                da.mul(b).add(&a.mul(&db))
            }
            Node::Div(a, b) => {
                let da = a.derivative();
                let db = b.derivative();
                if db.is_const(0.0) {
                    return da.div(b);
                }
                // a'/b - a b'/b^2
                da.div(b).sub(&a.mul(&db).div(&b.powi(2)))
            }
            Node::Pow(a, p) => {
                let da = a.derivative();
                let coeff = Expression::constant(p.to_f64());
                coeff.mul(&a.pow(p.minus_one())).mul(&da)
            }
            Node::Call(f, a) => {
                let da = a.derivative();
                let outer = match f {
                    Func::Exp => self.clone(),
                    Func::Log => a.recip(),
                    Func::Sqrt => Expression::constant(0.5).div(self),
                    Func::Sinh => a.cosh(),
                    Func::Cosh => a.sinh(),
                    Func::Tanh => a.cosh().powi(-2),
                };
                outer.mul(&da)
            }
        }
    }

    /// k-th derivative, `k = 0` returning a clone.
    pub fn nth_derivative(&self, k: usize) -> Expression {
        let mut e = self.clone();
        for _ in 0..k {
            e = e.derivative();
        }
        e
    }

    /// Number of nodes in the tree, shared subtrees counted once per use.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Const(_) | Node::Var => 1,
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => 1 + a.size(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self.node() {
            Node::Add(..) | Node::Sub(..) => 1,
            Node::Mul(..) | Node::Div(..) => 2,
            Node::Neg(..) => 3,
            Node::Pow(..) => 4,
            Node::Const(c) if *c < 0.0 => 3,
            Node::Const(_) | Node::Var | Node::Call(..) => 5,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

fn fmt_number(v: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if v.is_finite() {
        // shortest representation that parses back to the same f64
        write!(f, "{v:?}")
    } else if v.is_nan() {
        write!(f, "(0/0)")
    } else if v > 0.0 {
        write!(f, "(1/0)")
    } else {
        write!(f, "(-1/0)")
    }
}

/// Prints text accepted by [`crate::exprlang::parse`] that denotes the same
/// function.
impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => fmt_number(*c, f),
            Node::Var => write!(f, "x"),
            Node::Neg(a) => {
                write!(f, "-")?;
                a.fmt_child(f, 4)
            }
            Node::Add(a, b) => {
                a.fmt_child(f, 1)?;
                write!(f, " + ")?;
                b.fmt_child(f, 2)
            }
            Node::Sub(a, b) => {
                a.fmt_child(f, 1)?;
                write!(f, " - ")?;
                b.fmt_child(f, 2)
            }
            Node::Mul(a, b) => {
                a.fmt_child(f, 2)?;
                write!(f, "*")?;
                b.fmt_child(f, 4)
            }
            Node::Div(a, b) => {
                a.fmt_child(f, 2)?;
                write!(f, "/")?;
                b.fmt_child(f, 4)
            }
            Node::Pow(a, p) => {
                a.fmt_child(f, 5)?;
                write!(f, "^{p}")
            }
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

impl Serialize for Expression {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident) => {
        impl $tr<&Expression> for &Expression {
            type Output = Expression;
            fn $method(self, rhs: &Expression) -> Expression {
                Expression::$method(self, rhs)
            }
        }
        impl $tr<Expression> for Expression {
            type Output = Expression;
            fn $method(self, rhs: Expression) -> Expression {
                Expression::$method(&self, &rhs)
            }
        }
        impl $tr<&Expression> for Expression {
            type Output = Expression;
            fn $method(self, rhs: &Expression) -> Expression {
                Expression::$method(&self, rhs)
            }
        }
        impl $tr<f64> for Expression {
            type Output = Expression;
            fn $method(self, rhs: f64) -> Expression {
                Expression::$method(&self, &Expression::constant(rhs))
            }
        }
        impl $tr<Expression> for f64 {
            type Output = Expression;
            fn $method(self, rhs: Expression) -> Expression {
                Expression::$method(&Expression::constant(self), &rhs)
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        Expression::neg(&self)
    }
}

impl Neg for &Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        Expression::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expression {
        Expression::var()
    }

    #[test]
    fn quartic_value() {
        let e = x().powi(4) + 2.0 * x().powi(2) - 1.0;
        assert_eq!(e.eval_f64(1.0), 2.0);
    }

    #[test]
    fn division_side_convention() {
        let e = (x() - 1.0) / (x() + 1.0);
        assert_eq!(e.evaluate(-1.0), ExtReal::NegInf);
        let r = x() / x();
        assert_eq!(r.evaluate(0.0), ExtReal::Undefined);
    }

    #[test]
    fn domain_errors_are_undefined() {
        assert!(x().ln().evaluate(0.0).is_undefined());
        assert!(x().ln().evaluate(-2.0).is_undefined());
        assert!(x().sqrt().evaluate(-1.0).is_undefined());
        assert!(x().pow(Ratio::new(1, 2)).evaluate(-4.0).is_undefined());
        assert_eq!(x().pow(Ratio::new(1, 3)).eval_f64(-8.0), -2.0);
    }

    #[test]
    fn derivative_of_sinh() {
        let d = x().sinh().derivative();
        assert_eq!(d.eval_f64(0.0), 1.0);
    }

    #[test]
    fn second_derivative_of_quartic() {
        let e = x().powi(4) + 2.0 * x().powi(2) - 1.0;
        let d2 = e.nth_derivative(2);
        assert!((d2.eval_f64(1.0) - 16.0).abs() < 1e-14);
    }

    #[test]
    fn ratio_reduces() {
        let r = Ratio::new(4, -6);
        assert_eq!((r.num(), r.den()), (-2, 3));
    }

    #[test]
    fn constant_folding_keeps_trees_small() {
        let e = (x() * 0.0) + 3.0 * 2.0;
        assert_eq!(e.as_const(), Some(6.0));
    }
}
