//! Expression language for chart-based fields.
//!
//! Grammar: identifiers `x1..x9`, decimal literals, infix `+ - * / ^`,
//! unary minus, calls `name(expr)` and parentheses. Rational literals are
//! written as quotients (`1/3`). Evaluation works over plain floats or over
//! [`Jet`]s, which gives exact derivatives of every supported function.

mod jet;
mod parse;

use std::fmt;
use std::sync::Arc;

pub use jet::{dot, fma_into, Jet, MAX_ORDER, MAX_VARS};
pub(crate) use jet::cutoff_value;

/// Evaluation outside a function's domain.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct DomainError(pub String);

impl DomainError {
    pub fn new(msg: impl Into<String>) -> Self {
        DomainError(msg.into())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("function `{name}` takes {expected} argument(s), got {found} (offset {offset})")]
    Arity { name: String, expected: usize, found: usize, offset: usize },
    #[error("domain error: {0}")]
    Domain(#[from] DomainError),
    #[error("point has {found} coordinates, expression expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Tanh,
    Atan,
    /// Smooth cutoff, 1 on |u| ≤ 1/3 and 0 on |u| ≥ 2/3.
    Cutoff,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Tanh => "tanh",
            Func::Atan => "atan",
            Func::Cutoff => "cutoff",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "tanh" => Func::Tanh,
            "atan" => Func::Atan,
            "cutoff" => Func::Cutoff,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Const(f64),
    Var(usize),
    Neg(Arc<Node>),
    Bin(BinOp, Arc<Node>, Arc<Node>),
    Call(Func, Arc<Node>),
}

impl Node {
    fn is_const(&self) -> Option<f64> {
        match self {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    fn constant_value(&self) -> Option<f64> {
        match self {
            Node::Const(c) => Some(*c),
            Node::Var(_) => None,
            Node::Neg(a) => a.constant_value().map(|v| -v),
            Node::Bin(op, a, b) => {
                let (a, b) = (a.constant_value()?, b.constant_value()?);
                Some(match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                })
            }
            Node::Call(f, a) => {
                let a = a.constant_value()?;
                apply_f64(*f, a).ok()
            }
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Node::Const(_) => None,
            Node::Var(i) => Some(*i),
            Node::Neg(a) | Node::Call(_, a) => a.max_var(),
            Node::Bin(_, a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }
}

/// Scalar types an [`Expression`] can be evaluated over.
pub trait Scalar: Clone {
    fn lift(template: &Self, c: f64) -> Self;
    fn val(&self) -> f64;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn div(&self, o: &Self) -> Result<Self, DomainError>;
    fn powf(&self, r: f64) -> Result<Self, DomainError>;
    fn apply(&self, f: Func) -> Result<Self, DomainError>;
    fn all_finite(&self) -> bool;
}

fn apply_f64(f: Func, x: f64) -> Result<f64, DomainError> {
    Ok(match f {
        Func::Sin => x.sin(),
        Func::Cos => x.cos(),
        Func::Tan => {
            if x.cos().abs() < 1e-300 {
                return Err(DomainError::new("tan at a pole"));
            }
            x.tan()
        }
        Func::Exp => x.exp(),
        Func::Log => {
            if x <= 0.0 {
                return Err(DomainError::new(format!("log of nonpositive value {x}")));
            }
            x.ln()
        }
        Func::Sqrt => {
            if x < 0.0 {
                return Err(DomainError::new(format!("sqrt of negative value {x}")));
            }
            x.sqrt()
        }
        Func::Tanh => x.tanh(),
        Func::Atan => x.atan(),
        Func::Cutoff => cutoff_value(x),
    })
}

impl Scalar for f64 {
    fn lift(_: &Self, c: f64) -> Self {
        c
    }
    fn val(&self) -> f64 {
        *self
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div(&self, o: &Self) -> Result<Self, DomainError> {
        if *o == 0.0 {
            return Err(DomainError::new("division by zero"));
        }
        Ok(self / o)
    }
    fn powf(&self, r: f64) -> Result<Self, DomainError> {
        if r.fract() == 0.0 && r.abs() <= i32::MAX as f64 {
            if *self == 0.0 && r < 0.0 {
                return Err(DomainError::new("negative power of zero"));
            }
            return Ok(self.powi(r as i32));
        }
        if *self < 0.0 || (*self == 0.0 && r < 0.0) {
            return Err(DomainError::new(format!("power {r} of value {self}")));
        }
        Ok(f64::powf(*self, r))
    }
    fn apply(&self, f: Func) -> Result<Self, DomainError> {
        apply_f64(f, *self)
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Jet {
    fn lift(t: &Self, c: f64) -> Self {
        Jet::constant(t.nvars(), t.order(), c)
    }
    fn val(&self) -> f64 {
        self.value()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div(&self, o: &Self) -> Result<Self, DomainError> {
        Ok(self * &o.recip()?)
    }
    fn powf(&self, r: f64) -> Result<Self, DomainError> {
        Jet::powf(self, r)
    }
    fn apply(&self, f: Func) -> Result<Self, DomainError> {
        match f {
            Func::Sin => Ok(self.sin()),
            Func::Cos => Ok(self.cos()),
            Func::Tan => self.tan(),
            Func::Exp => Ok(self.exp()),
            Func::Log => self.ln(),
            Func::Sqrt => self.sqrt(),
            Func::Tanh => Ok(self.tanh()),
            Func::Atan => Ok(self.atan()),
            Func::Cutoff => Ok(self.cutoff()),
        }
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

/// A parsed scalar expression over the coordinates `x1..xn`.
#[derive(Clone, Debug)]
pub struct Expression {
    dim: usize,
    root: Arc<Node>,
}

impl PartialEq for Expression {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.root == other.root
    }
}

impl Expression {
    pub fn parse(text: &str, dim: usize) -> Result<Expression, ExprError> {
        let root = parse::parse(text, dim)?;
        Ok(Expression { dim, root: Arc::new(root) })
    }

    pub fn constant(dim: usize, c: f64) -> Expression {
        Expression { dim, root: Arc::new(Node::Const(c)) }
    }

    /// The coordinate `x_{var+1}` (zero-based `var`).
    pub fn var(dim: usize, var: usize) -> Expression {
        assert!(var < dim);
        Expression { dim, root: Arc::new(Node::Var(var)) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Re-labels the expression as living in `dim` coordinates.
    pub fn with_dim(&self, dim: usize) -> Expression {
        if let Some(m) = self.root.max_var() {
            assert!(m < dim, "expression uses x{} which exceeds dimension {dim}", m + 1);
        }
        Expression { dim, root: self.root.clone() }
    }

    pub fn as_constant(&self) -> Option<f64> {
        self.root.constant_value()
    }

    pub fn is_zero(&self) -> bool {
        self.root.is_const() == Some(0.0)
    }

    fn from_node(dim: usize, node: Node) -> Expression {
        Expression { dim, root: Arc::new(node) }
    }

    fn binary(op: BinOp, a: &Expression, b: &Expression) -> Expression {
        let dim = a.dim.max(b.dim);
        let (ca, cb) = (a.root.is_const(), b.root.is_const());
        match (op, ca, cb) {
            (BinOp::Add, Some(0.0), _) => return b.with_dim(dim),
            (BinOp::Add | BinOp::Sub, _, Some(0.0)) => return a.with_dim(dim),
            (BinOp::Mul, Some(0.0), _) | (BinOp::Mul, _, Some(0.0)) => {
                return Expression::constant(dim, 0.0)
            }
            (BinOp::Mul, Some(1.0), _) => return b.with_dim(dim),
            (BinOp::Mul | BinOp::Div | BinOp::Pow, _, Some(1.0)) => return a.with_dim(dim),
            (_, Some(x), Some(y)) if op != BinOp::Pow && op != BinOp::Div => {
                let v = match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    _ => x * y,
                };
                return Expression::constant(dim, v);
            }
            _ => {}
        }
        Expression::from_node(dim, Node::Bin(op, a.root.clone(), b.root.clone()))
    }

    pub fn call(&self, f: Func) -> Expression {
        Expression::from_node(self.dim, Node::Call(f, self.root.clone()))
    }

    pub fn exp(&self) -> Expression {
        if self.is_zero() {
            return Expression::constant(self.dim, 1.0);
        }
        self.call(Func::Exp)
    }

    pub fn pow(&self, e: f64) -> Expression {
        Expression::binary(BinOp::Pow, self, &Expression::constant(self.dim, e))
    }

    /// Replaces `x_{var+1}` by `with`.
    pub fn substitute(&self, var: usize, with: &Expression) -> Expression {
        fn go(n: &Arc<Node>, var: usize, with: &Arc<Node>) -> Arc<Node> {
            match &**n {
                Node::Var(i) if *i == var => with.clone(),
                Node::Const(_) | Node::Var(_) => n.clone(),
                Node::Neg(a) => Arc::new(Node::Neg(go(a, var, with))),
                Node::Call(f, a) => Arc::new(Node::Call(*f, go(a, var, with))),
                Node::Bin(op, a, b) => Arc::new(Node::Bin(*op, go(a, var, with), go(b, var, with))),
            }
        }
        Expression { dim: self.dim.max(with.dim), root: go(&self.root, var, &with.root) }
    }

    /// Evaluates over any [`Scalar`]; `vars` are the coordinate values.
    pub fn eval_scalar<S: Scalar>(&self, vars: &[S], template: &S) -> Result<S, ExprError> {
        if vars.len() < self.dim {
            return Err(ExprError::DimensionMismatch { expected: self.dim, found: vars.len() });
        }
        eval_node(&self.root, vars, template)
    }

    pub fn eval(&self, p: &[f64]) -> Result<f64, ExprError> {
        self.eval_scalar(p, &0.0)
    }

    /// Value and partial derivatives up to `order` at `p`.
    pub fn eval_jet(&self, p: &[f64], order: usize) -> Result<Jet, ExprError> {
        if p.len() != self.dim {
            return Err(ExprError::DimensionMismatch { expected: self.dim, found: p.len() });
        }
        let seeds = Jet::seed(p, order);
        let template = Jet::constant(p.len(), order, 0.0);
        self.eval_scalar(&seeds, &template)
    }
}

fn eval_node<S: Scalar>(n: &Node, vars: &[S], t: &S) -> Result<S, ExprError> {
    let out = match n {
        Node::Const(c) => S::lift(t, *c),
        Node::Var(i) => vars[*i].clone(),
        Node::Neg(a) => eval_node(a, vars, t)?.neg(),
        Node::Call(f, a) => eval_node(a, vars, t)?.apply(*f)?,
        Node::Bin(op, a, b) => {
            if *op == BinOp::Pow {
                let base = eval_node(a, vars, t)?;
                match b.constant_value() {
                    Some(r) => base.powf(r)?,
                    None => {
                        let e = eval_node(b, vars, t)?;
                        if base.val() <= 0.0 {
                            return Err(DomainError::new("variable exponent needs a positive base").into());
                        }
                        e.mul(&base.apply(Func::Log)?).apply(Func::Exp)?
                    }
                }
            } else {
                let x = eval_node(a, vars, t)?;
                let y = eval_node(b, vars, t)?;
                match op {
                    BinOp::Add => x.add(&y),
                    BinOp::Sub => x.sub(&y),
                    BinOp::Mul => x.mul(&y),
                    BinOp::Div => x.div(&y)?,
                    BinOp::Pow => unreachable!(),
                }
            }
        }
    };
    if !out.all_finite() {
        return Err(DomainError::new("non-finite value").into());
    }
    Ok(out)
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(&self.root, f)
    }
}

fn write_node(n: &Node, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match n {
        Node::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => write!(f, "(-{})", -c),
        Node::Const(c) => write!(f, "{c}"),
        Node::Var(i) => write!(f, "x{}", i + 1),
        Node::Neg(a) => {
            write!(f, "(-")?;
            write_node(a, f)?;
            write!(f, ")")
        }
        Node::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_node(a, f)?;
            write!(f, ")")
        }
        Node::Bin(op, a, b) => {
            let sym = match op {
                BinOp::Add => "+",
                BinOp::Sub => "-",
                BinOp::Mul => "*",
                BinOp::Div => "/",
                BinOp::Pow => "^",
            };
            write!(f, "(")?;
            write_node(a, f)?;
            write!(f, " {sym} ")?;
            write_node(b, f)?;
            write!(f, ")")
        }
    }
}

macro_rules! expr_binop {
    ($trait:ident, $method:ident, $op:expr) => {
        impl std::ops::$trait<&Expression> for &Expression {
            type Output = Expression;
            fn $method(self, o: &Expression) -> Expression {
                Expression::binary($op, self, o)
            }
        }
        impl std::ops::$trait<Expression> for Expression {
            type Output = Expression;
            fn $method(self, o: Expression) -> Expression {
                Expression::binary($op, &self, &o)
            }
        }
        impl std::ops::$trait<f64> for &Expression {
            type Output = Expression;
            fn $method(self, o: f64) -> Expression {
                Expression::binary($op, self, &Expression::constant(self.dim, o))
            }
        }
        impl std::ops::$trait<&Expression> for f64 {
            type Output = Expression;
            fn $method(self, o: &Expression) -> Expression {
                Expression::binary($op, &Expression::constant(o.dim, self), o)
            }
        }
    };
}

expr_binop!(Add, add, BinOp::Add);
expr_binop!(Sub, sub, BinOp::Sub);
expr_binop!(Mul, mul, BinOp::Mul);
expr_binop!(Div, div, BinOp::Div);

impl std::ops::Neg for &Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        match self.root.is_const() {
            Some(c) => Expression::constant(self.dim, -c),
            None => Expression::from_node(self.dim, Node::Neg(self.root.clone())),
        }
    }
}
