//! Scalar expressions in chart coordinates `x1 .. x{dim}`.
//!
//! Grammar (`^` binds tighter than unary minus, which binds tighter than
//! `*` and `/`):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' '-'? integer)?
//! primary := number | 'x' index | func '(' expr ')' | '(' expr ')'
//! func    := 'sin' | 'cos' | 'exp' | 'ln'
//! ```
//!
//! Exponents are integer literals so that [`Expr::differentiate`] stays closed
//! on the language.

mod diff;
mod parse;

use std::fmt;

pub use parse::parse;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { position: usize, name: String },

    #[error("variable x{index} at position {position} exceeds dimension {dim}")]
    VariableOutOfRange {
        position: usize,
        index: usize,
        dim: usize,
    },

    #[error("domain error in `{subexpr}`: {reason}")]
    Domain { subexpr: String, reason: String },

    #[error("point has {got} coordinates, expression needs at least {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

impl ExprError {
    /// Character offset of a parse error, if the error came from the parser.
    pub fn position(&self) -> Option<usize> {
        match self {
            ExprError::Syntax { position, .. }
            | ExprError::UnknownIdentifier { position, .. }
            | ExprError::VariableOutOfRange { position, .. } => Some(*position),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            _ => return None,
        })
    }
}

/// Expression tree. Variables are stored zero-based: `Var(0)` prints as `x1`.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Neg(Box<Expr>),
    Func(Func, Box<Expr>),
}

impl Expr {
    pub fn constant(v: f64) -> Self {
        Expr::Const(v)
    }

    pub fn var(index: usize) -> Self {
        Expr::Var(index)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 1.0)
    }

    /// Largest variable index used, zero-based.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.max_var().max(b.max_var())
            }
            Expr::Pow(a, _) | Expr::Neg(a) | Expr::Func(_, a) => a.max_var(),
        }
    }

    pub fn sum(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
            _ if a.is_zero() => b,
            _ if b.is_zero() => a,
            _ => Expr::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn difference(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
            _ if b.is_zero() => a,
            _ if a.is_zero() => Expr::negate(b),
            _ => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn product(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
            _ if a.is_zero() || b.is_zero() => Expr::Const(0.0),
            _ if a.is_one() => b,
            _ if b.is_one() => a,
            _ => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn quotient(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) if *y != 0.0 => Expr::Const(x / y),
            _ if a.is_zero() && !b.is_zero() => Expr::Const(0.0),
            _ if b.is_one() => a,
            _ => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn power(base: Expr, exponent: i32) -> Expr {
        match (&base, exponent) {
            (_, 0) => Expr::Const(1.0),
            (_, 1) => base,
            (Expr::Const(c), n) if *c != 0.0 || n > 0 => Expr::Const(c.powi(n)),
            _ => Expr::Pow(Box::new(base), exponent),
        }
    }

    pub fn negate(a: Expr) -> Expr {
        match a {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn apply(func: Func, a: Expr) -> Expr {
        Expr::Func(func, Box::new(a))
    }

    /// Evaluates at `point`, reporting division by zero, logarithms of
    /// non-positive values and non-finite results instead of producing them.
    pub fn evaluate(&self, point: &[f64]) -> Result<f64, ExprError> {
        if let Some(max) = self.max_var() {
            if max >= point.len() {
                return Err(ExprError::DimensionMismatch {
                    expected: max + 1,
                    got: point.len(),
                });
            }
        }
        self.eval(point)
    }

    fn eval(&self, point: &[f64]) -> Result<f64, ExprError> {
        let domain = |reason: &str| ExprError::Domain {
            subexpr: self.to_string(),
            reason: reason.to_string(),
        };
        let value = match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => point[*i],
            Expr::Add(a, b) => a.eval(point)? + b.eval(point)?,
            Expr::Sub(a, b) => a.eval(point)? - b.eval(point)?,
            Expr::Mul(a, b) => a.eval(point)? * b.eval(point)?,
            Expr::Div(a, b) => {
                let den = b.eval(point)?;
                if den == 0.0 {
                    return Err(domain("division by zero"));
                }
                a.eval(point)? / den
            }
            Expr::Pow(a, n) => {
                let base = a.eval(point)?;
                if base == 0.0 && *n < 0 {
                    return Err(domain("zero raised to a negative power"));
                }
                base.powi(*n)
            }
            Expr::Neg(a) => -a.eval(point)?,
            Expr::Func(f, a) => {
                let v = a.eval(point)?;
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Ln => {
                        if v <= 0.0 {
                            return Err(domain("logarithm of a non-positive value"));
                        }
                        v.ln()
                    }
                }
            }
        };
        if !value.is_finite() {
            return Err(domain("non-finite value"));
        }
        Ok(value)
    }
}

fn is_atom(e: &Expr) -> bool {
    matches!(e, Expr::Var(_) | Expr::Func(..)) || matches!(e, Expr::Const(c) if *c >= 0.0)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if *c < 0.0 => write!(f, "(-{:?})", -c),
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, n) if is_atom(a) => write!(f, "{a}^{n}"),
            Expr::Pow(a, n) => write!(f, "({a})^{n}"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Func(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}
