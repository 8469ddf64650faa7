//! Scalar data on the ambient space: a small arithmetic expression language
//! over the coordinates `x`, `y`.
//!
//! Evaluation never hands back a non-finite number. `log` of a non-positive
//! argument, `sqrt` of a negative one, division by zero and any other
//! operation that would produce NaN or an infinity raise an [`EvalError`]
//! carrying the offending point.
//!
//! The [`fmt::Display`] impl is the canonical printer: it inserts only the
//! parentheses the grammar needs, and parsing its output gives back the same
//! tree.

mod parser;

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gasket::PrefractalGraph;
use crate::par;

pub use parser::ParseError;

/// Default number of interior samples per edge in [`validate_positive`].
pub const DEFAULT_SAMPLES_PER_EDGE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constant {
    Pi,
    E,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func1 {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func2 {
    Min,
    Max,
}

impl Func1 {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Self::Sin,
            "cos" => Self::Cos,
            "exp" => Self::Exp,
            "log" => Self::Log,
            "sqrt" => Self::Sqrt,
            "abs" => Self::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Self::Sin => "sin",
            Self::Cos => "cos",
            Self::Exp => "exp",
            Self::Log => "log",
            Self::Sqrt => "sqrt",
            Self::Abs => "abs",
        }
    }
}

impl Func2 {
    fn from_name(name: &str) -> Option<Self> {
        match name {
            "min" => Some(Self::Min),
            "max" => Some(Self::Max),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Self::Min => "min",
            Self::Max => "max",
        }
    }
}

/// Expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldExpr {
    Num(f64),
    Var(Var),
    Const(Constant),
    Neg(Box<FieldExpr>),
    Binary(BinOp, Box<FieldExpr>, Box<FieldExpr>),
    Call1(Func1, Box<FieldExpr>),
    Call2(Func2, Box<FieldExpr>, Box<FieldExpr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    LogNonPositive,
    SqrtNegative,
    DivisionByZero,
    NonFinite,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::LogNonPositive => "log of a non-positive number",
            Self::SqrtNegative => "sqrt of a negative number",
            Self::DivisionByZero => "division by zero",
            Self::NonFinite => "non-finite result",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("domain error: {kind} at {point:?}")]
pub struct EvalError {
    pub kind: DomainKind,
    pub point: Vec<f64>,
}

impl FieldExpr {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parser::parse(text)
    }

    /// Evaluate at an ambient point; missing coordinates read as 0.
    pub fn eval(&self, p: &[f64]) -> Result<f64, EvalError> {
        let x = p.first().copied().unwrap_or(0.0);
        let y = p.get(1).copied().unwrap_or(0.0);
        self.eval_xy(x, y).map_err(|kind| EvalError { kind, point: p.to_vec() })
    }

    fn eval_xy(&self, x: f64, y: f64) -> Result<f64, DomainKind> {
        let v = match self {
            Self::Num(v) => *v,
            Self::Var(Var::X) => x,
            Self::Var(Var::Y) => y,
            Self::Const(Constant::Pi) => std::f64::consts::PI,
            Self::Const(Constant::E) => std::f64::consts::E,
            Self::Neg(a) => -a.eval_xy(x, y)?,
            Self::Binary(op, a, b) => {
                let a = a.eval_xy(x, y)?;
                let b = b.eval_xy(x, y)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div if b == 0.0 => return Err(DomainKind::DivisionByZero),
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Self::Call1(func, a) => {
                let a = a.eval_xy(x, y)?;
                match func {
                    Func1::Sin => a.sin(),
                    Func1::Cos => a.cos(),
                    Func1::Exp => a.exp(),
                    Func1::Log if a <= 0.0 => return Err(DomainKind::LogNonPositive),
                    Func1::Log => a.ln(),
                    Func1::Sqrt if a < 0.0 => return Err(DomainKind::SqrtNegative),
                    Func1::Sqrt => a.sqrt(),
                    Func1::Abs => a.abs(),
                }
            }
            Self::Call2(func, a, b) => {
                let a = a.eval_xy(x, y)?;
                let b = b.eval_xy(x, y)?;
                match func {
                    Func2::Min => a.min(b),
                    Func2::Max => a.max(b),
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(DomainKind::NonFinite)
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Self::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Self::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Self::Neg(_) => 3,
            Self::Binary(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

fn write_num(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    let a = v.abs();
    if a != 0.0 && !(1e-5..1e16).contains(&a) {
        write!(f, "{v:e}")
    } else {
        write!(f, "{v}")
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &FieldExpr, min_prec: u8) -> fmt::Result {
    if child.precedence() < min_prec {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for FieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Num(v) if v.is_sign_negative() => {
                f.write_str("(")?;
                write_num(f, *v)?;
                f.write_str(")")
            }
            Self::Num(v) => write_num(f, *v),
            Self::Var(Var::X) => f.write_str("x"),
            Self::Var(Var::Y) => f.write_str("y"),
            Self::Const(Constant::Pi) => f.write_str("pi"),
            Self::Const(Constant::E) => f.write_str("e"),
            Self::Neg(a) => {
                f.write_str("-")?;
                write_child(f, a, 3)
            }
            Self::Binary(op, a, b) => {
                let (sym, prec) = match op {
                    BinOp::Add => ("+", 1),
                    BinOp::Sub => ("-", 1),
                    BinOp::Mul => ("*", 2),
                    BinOp::Div => ("/", 2),
                    BinOp::Pow => ("^", 4),
                };
                if *op == BinOp::Pow {
                    // right-associative; the exponent may be a negation
                    write_child(f, a, 5)?;
                    write!(f, " ^ ")?;
                    write_child(f, b, 3)
                } else {
                    write_child(f, a, prec)?;
                    write!(f, " {sym} ")?;
                    write_child(f, b, prec + 1)
                }
            }
            Self::Call1(func, a) => write!(f, "{}({a})", func.name()),
            Self::Call2(func, a, b) => write!(f, "{}({a}, {b})", func.name()),
        }
    }
}

/// A parsed right-hand side or boundary expression.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    expr: FieldExpr,
}

impl ScalarField {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        Ok(Self {
            expr: FieldExpr::parse(text)?,
        })
    }

    pub fn constant(c: f64) -> Self {
        Self { expr: FieldExpr::Num(c) }
    }

    pub fn expr(&self) -> &FieldExpr {
        &self.expr
    }

    pub fn eval(&self, p: &[f64]) -> Result<f64, EvalError> {
        self.expr.eval(p)
    }

    /// `self + c`, as a new field.
    pub fn shifted(&self, c: f64) -> Self {
        if c == 0.0 {
            return self.clone();
        }
        Self {
            expr: FieldExpr::Binary(BinOp::Add, Box::new(self.expr.clone()), Box::new(FieldExpr::Num(c))),
        }
    }

    /// Canonical text; parses back to the same tree.
    pub fn canonical(&self) -> String {
        self.expr.to_string()
    }

    /// Values at every vertex of `g`, in id order.
    pub fn at_vertices(&self, g: &PrefractalGraph) -> Result<Vec<f64>, EvalError> {
        par::try_map_range(g.vertex_count(), |v| self.eval(g.coords(v)))
    }

    /// Values at every vertex, rejecting any that is not strictly positive.
    pub fn positive_at_vertices(&self, g: &PrefractalGraph) -> Result<Vec<f64>> {
        let values = self.at_vertices(g)?;
        if let Some(v) = values.iter().position(|&f| f <= 0.0) {
            return Err(Error::NonPositive {
                value: values[v],
                point: g.coords(v).to_vec(),
            });
        }
        Ok(values)
    }
}

impl From<FieldExpr> for ScalarField {
    fn from(expr: FieldExpr) -> Self {
        Self { expr }
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr.fmt(f)
    }
}

/// Sampled lower envelope of a field over the prefractal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivityReport {
    pub min_sampled: f64,
    pub argmin: Vec<f64>,
    pub sample_count: usize,
}

impl PositivityReport {
    pub fn is_positive(&self) -> bool {
        self.min_sampled > 0.0
    }
}

/// Evaluate `field` at every vertex and at `samples_per_edge` equispaced
/// interior points of every edge, and report the smallest value seen.
///
/// This is a heuristic certificate: positivity between samples is not proven.
pub fn validate_positive(field: &ScalarField, g: &PrefractalGraph, samples_per_edge: usize) -> Result<PositivityReport> {
    if samples_per_edge == 0 {
        return Err(Error::InvalidArgument("samples_per_edge must be at least 1".into()));
    }
    let at_vertices = field.at_vertices(g)?;
    let m = samples_per_edge;
    let per_edge = par::try_map_range(g.edge_count(), |e| {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for k in 1..=m {
            let p = g.edge_point(e, g.h() * k as f64 / (m + 1) as f64);
            let v = field.eval(&p)?;
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, p));
            }
        }
        Ok::<_, EvalError>(best.expect("at least one sample"))
    })?;

    let mut min_sampled = f64::INFINITY;
    let mut argmin = Vec::new();
    for (v, &value) in at_vertices.iter().enumerate() {
        if value < min_sampled {
            min_sampled = value;
            argmin = g.coords(v).to_vec();
        }
    }
    for (value, p) in per_edge {
        if value < min_sampled {
            min_sampled = value;
            argmin = p;
        }
    }
    Ok(PositivityReport {
        min_sampled,
        argmin,
        sample_count: g.vertex_count() + g.edge_count() * m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gasket::build_prefractal;

    fn eval(text: &str, x: f64, y: f64) -> f64 {
        FieldExpr::parse(text).unwrap().eval(&[x, y]).unwrap()
    }

    #[test]
    fn parses_constants_and_sums() {
        assert_eq!(FieldExpr::parse("1").unwrap(), FieldExpr::Num(1.0));
        assert_eq!(
            FieldExpr::parse("1 + x").unwrap(),
            FieldExpr::Binary(BinOp::Add, Box::new(FieldExpr::Num(1.0)), Box::new(FieldExpr::Var(Var::X)))
        );
    }

    #[test]
    fn evaluates_examples() {
        assert_eq!(eval("1", 0.3, 0.7), 1.0);
        assert_eq!(eval("x+y", 0.25, 0.5), 0.75);
        assert_eq!(eval("2*(x^2 + y^2)^0.5", 0.75, 0.0), 1.5);
        assert!((eval("exp(x)", 0.5, 0.0) - 1.648_721_270_700_128_2).abs() < 1e-15);
        assert!((eval("sin(pi/2) + log(e)", 0.0, 0.0) - 2.0).abs() < 1e-15);
        assert_eq!(eval("min(x, y) + max(x, y)", 1.0, 2.0), 3.0);
        assert_eq!(eval("abs(-3) + sqrt(4)", 0.0, 0.0), 5.0);
        assert!((eval("cos(0) * 1.5e-1", 0.0, 0.0) - 0.15).abs() < 1e-16);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval("-2^2", 0.0, 0.0), -4.0);
        assert_eq!(eval("2^3^2", 0.0, 0.0), 512.0);
        assert_eq!(eval("2^-1", 0.0, 0.0), 0.5);
        assert_eq!(eval("8 - 3 - 2", 0.0, 0.0), 3.0);
        assert_eq!(eval("8 / 4 / 2", 0.0, 0.0), 1.0);
        assert_eq!(eval("1 + 2 * 3", 0.0, 0.0), 7.0);
        assert_eq!(eval("(1 + 2) * 3", 0.0, 0.0), 9.0);
        assert_eq!(eval("--x", 2.0, 0.0), 2.0);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let err = FieldExpr::parse("1 + * x").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { offset: 4, .. }), "{err}");
        let err = FieldExpr::parse("(1 + x").unwrap_err();
        assert_eq!(err.offset(), 6);
        let err = FieldExpr::parse("1 $ 2").unwrap_err();
        assert_eq!(err.offset(), 2);
        let err = FieldExpr::parse("1 + z").unwrap_err();
        assert!(matches!(err, ParseError::UnknownIdentifier { offset: 4, ref name } if name == "z"));
        assert!(FieldExpr::parse("min(1)").is_err());
        assert!(FieldExpr::parse("1 2").is_err());
        assert!(FieldExpr::parse("").is_err());
    }

    #[test]
    fn domain_errors() {
        let kind = |t: &str| FieldExpr::parse(t).unwrap().eval(&[0.0, 0.0]).unwrap_err().kind;
        assert_eq!(kind("log(x)"), DomainKind::LogNonPositive);
        assert_eq!(kind("sqrt(x - 1)"), DomainKind::SqrtNegative);
        assert_eq!(kind("1 / x"), DomainKind::DivisionByZero);
        assert_eq!(kind("exp(1000)"), DomainKind::NonFinite);
        assert_eq!(kind("(-1)^0.5"), DomainKind::NonFinite);
        let err = FieldExpr::parse("log(x)").unwrap().eval(&[-1.0, 2.0]).unwrap_err();
        assert_eq!(err.point, vec![-1.0, 2.0]);
    }

    #[test]
    fn canonical_printing() {
        let cases = [
            ("1+x", "1 + x"),
            ("(1+x)*2", "(1 + x) * 2"),
            ("2*(x^2+y^2)^0.5", "2 * (x ^ 2 + y ^ 2) ^ 0.5"),
            ("-(x+1)", "-(x + 1)"),
            ("(-x)^2", "(-x) ^ 2"),
            ("2^-x", "2 ^ -x"),
            ("(2^3)^2", "(2 ^ 3) ^ 2"),
            ("1-(2-3)", "1 - (2 - 3)"),
            ("min(x,y)", "min(x, y)"),
            ("1e-20 + 3e20", "1e-20 + 3e20"),
        ];
        for (src, want) in cases {
            let e = FieldExpr::parse(src).unwrap();
            assert_eq!(e.to_string(), want);
            assert_eq!(FieldExpr::parse(&e.to_string()).unwrap(), e);
        }
    }

    #[test]
    fn shifted_field() {
        let f = ScalarField::parse("1 + x").unwrap().shifted(0.125);
        assert_eq!(f.eval(&[0.5, 0.0]).unwrap(), 1.625);
        assert_eq!(f.canonical(), "1 + x + 0.125");
        let g = ScalarField::parse("x").unwrap();
        assert_eq!(g.shifted(0.0), g);
    }

    #[test]
    fn positivity_examples() {
        let g2 = build_prefractal(2, 2).unwrap();
        let one = ScalarField::parse("1").unwrap();
        let r = validate_positive(&one, &g2, 4).unwrap();
        assert_eq!(r.min_sampled, 1.0);
        assert_eq!(r.sample_count, 15 + 27 * 4);

        let g1 = build_prefractal(2, 1).unwrap();
        let r = validate_positive(&ScalarField::parse("x - 10").unwrap(), &g1, 4).unwrap();
        assert!(r.min_sampled < 0.0);
        assert!(!r.is_positive());

        let r = validate_positive(&ScalarField::parse("1 + x").unwrap(), &g2, 8).unwrap();
        assert_eq!(r.min_sampled, 1.0);
        assert_eq!(r.argmin, vec![0.0, 0.0]);

        assert!(validate_positive(&one, &g1, 0).is_err());
        let err = validate_positive(&ScalarField::parse("log(x)").unwrap(), &g1, 2).unwrap_err();
        assert!(matches!(err, Error::Eval(_)));
    }

    #[test]
    fn positive_at_vertices_rejects() {
        let g = build_prefractal(2, 1).unwrap();
        let err = ScalarField::parse("x - 0.25").unwrap().positive_at_vertices(&g).unwrap_err();
        assert!(matches!(err, Error::NonPositive { .. }));
    }
}
