use std::fmt;

use num_complex::Complex64;

use crate::ad::jet::Jet;
use crate::error::{Error, Result};

/// Coordinate variable, 0-based internally (`z1` is `Z(0)`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Z(usize),
    Eta(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Conj,
    Abs2,
    Sqrt,
    Exp,
    Log,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Conj => "conj",
            Func::Abs2 => "abs2",
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "conj" => Func::Conj,
            "abs2" => Func::Abs2,
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "log" => Func::Log,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Complex64),
    I,
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

/// Arithmetic needed to evaluate an [`Expr`]. Partial operations return
/// `None` at singular arguments.
pub trait Scalar: Clone {
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn conj(&self) -> Self;
    fn div(&self, o: &Self) -> Option<Self>;
    fn powi(&self, e: i32) -> Option<Self>;
    fn sqrt(&self) -> Option<Self>;
    fn exp(&self) -> Option<Self>;
    fn ln(&self) -> Option<Self>;
    fn is_finite(&self) -> bool;
}

fn nonzero(z: Complex64) -> bool {
    z.norm() >= f64::MIN_POSITIVE
}

impl Scalar for Complex64 {
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
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn div(&self, o: &Self) -> Option<Self> {
        nonzero(*o).then(|| self / o)
    }
    fn powi(&self, e: i32) -> Option<Self> {
        if e < 0 && !nonzero(*self) {
            return None;
        }
        Some(Complex64::powi(self, e))
    }
    fn sqrt(&self) -> Option<Self> {
        nonzero(*self).then(|| Complex64::sqrt(*self))
    }
    fn exp(&self) -> Option<Self> {
        Some(Complex64::exp(*self))
    }
    fn ln(&self) -> Option<Self> {
        nonzero(*self).then(|| Complex64::ln(*self))
    }
    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl Scalar for Jet {
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
    fn conj(&self) -> Self {
        Jet::conj(self)
    }
    fn div(&self, o: &Self) -> Option<Self> {
        Some(self * &o.recip()?)
    }
    fn powi(&self, e: i32) -> Option<Self> {
        Jet::powi(self, e)
    }
    fn sqrt(&self) -> Option<Self> {
        Jet::sqrt(self)
    }
    fn exp(&self) -> Option<Self> {
        Some(Jet::exp(self))
    }
    fn ln(&self) -> Option<Self> {
        Jet::ln(self)
    }
    fn is_finite(&self) -> bool {
        Jet::is_finite(self)
    }
}

impl Expr {
    pub fn real(x: f64) -> Expr {
        Expr::Num(Complex64::new(x, 0.0))
    }

    pub fn num(c: Complex64) -> Expr {
        Expr::Num(c)
    }

    pub fn z(k: usize) -> Expr {
        Expr::Var(Var::Z(k))
    }

    pub fn eta(k: usize) -> Expr {
        Expr::Var(Var::Eta(k))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn pow(a: Expr, e: i32) -> Expr {
        Expr::Pow(Box::new(a), e)
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
        terms.into_iter().reduce(Expr::add).unwrap_or_else(|| Expr::real(0.0))
    }

    /// Evaluates with `var` supplying coordinate values and `constant`
    /// lifting literals into the scalar type.
    pub fn eval<S: Scalar>(&self, var: &dyn Fn(Var) -> S, constant: &dyn Fn(Complex64) -> S) -> Result<S> {
        let out = match self {
            Expr::Num(c) => constant(*c),
            Expr::I => constant(Complex64::new(0.0, 1.0)),
            Expr::Var(v) => var(*v),
            Expr::Neg(a) => a.eval(var, constant)?.neg(),
            Expr::Add(a, b) => a.eval(var, constant)?.add(&b.eval(var, constant)?),
            Expr::Sub(a, b) => a.eval(var, constant)?.sub(&b.eval(var, constant)?),
            Expr::Mul(a, b) => a.eval(var, constant)?.mul(&b.eval(var, constant)?),
            Expr::Div(a, b) => {
                let den = b.eval(var, constant)?;
                a.eval(var, constant)?.div(&den).ok_or_else(|| self.domain())?
            }
            Expr::Pow(a, e) => a.eval(var, constant)?.powi(*e).ok_or_else(|| self.domain())?,
            Expr::Call(f, a) => {
                let x = a.eval(var, constant)?;
                match f {
                    Func::Conj => x.conj(),
                    Func::Abs2 => x.mul(&x.conj()),
                    Func::Sqrt => x.sqrt().ok_or_else(|| self.domain())?,
                    Func::Exp => x.exp().ok_or_else(|| self.domain())?,
                    Func::Log => x.ln().ok_or_else(|| self.domain())?,
                }
            }
        };
        if !out.is_finite() {
            return Err(self.domain());
        }
        Ok(out)
    }

    /// Plain complex evaluation at coordinates `z`, `eta`.
    pub fn eval_at(&self, z: &[Complex64], eta: &[Complex64]) -> Result<Complex64> {
        self.check_bound(z.len(), eta.len())?;
        self.eval(
            &|v| match v {
                Var::Z(k) => z[k],
                Var::Eta(k) => eta[k],
            },
            &|c| c,
        )
    }

    fn domain(&self) -> Error {
        Error::Domain { expr: self.to_string() }
    }

    /// Fails with `UnboundVariable` if a variable index exceeds the given counts.
    pub fn check_bound(&self, nz: usize, neta: usize) -> Result<()> {
        let mut bad = None;
        self.visit_vars(&mut |v| {
            let ok = match v {
                Var::Z(k) => k < nz,
                Var::Eta(k) => k < neta,
            };
            if !ok && bad.is_none() {
                bad = Some(v);
            }
        });
        match bad {
            Some(v) => Err(Error::UnboundVariable(Expr::Var(v).to_string())),
            None => Ok(()),
        }
    }

    pub fn visit_vars(&self, f: &mut dyn FnMut(Var)) {
        match self {
            Expr::Num(_) | Expr::I => {}
            Expr::Var(v) => f(*v),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.visit_vars(f),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
        }
    }

    pub fn mentions_eta(&self) -> bool {
        let mut found = false;
        self.visit_vars(&mut |v| found |= matches!(v, Var::Eta(_)));
        found
    }

    /// Replaces variables for which `f` returns a replacement.
    pub fn substitute(&self, f: &dyn Fn(Var) -> Option<Expr>) -> Expr {
        let s = |e: &Expr| Box::new(e.substitute(f));
        match self {
            Expr::Num(_) | Expr::I => self.clone(),
            Expr::Var(v) => f(*v).unwrap_or_else(|| self.clone()),
            Expr::Neg(a) => Expr::Neg(s(a)),
            Expr::Add(a, b) => Expr::Add(s(a), s(b)),
            Expr::Sub(a, b) => Expr::Sub(s(a), s(b)),
            Expr::Mul(a, b) => Expr::Mul(s(a), s(b)),
            Expr::Div(a, b) => Expr::Div(s(a), s(b)),
            Expr::Pow(a, e) => Expr::Pow(s(a), *e),
            Expr::Call(g, a) => Expr::Call(*g, s(a)),
        }
    }
}

fn fmt_real(x: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if x < 0.0 || (x == 0.0 && x.is_sign_negative()) {
        write!(f, "(-{})", -x)
    } else {
        write!(f, "{}", x)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) if c.im == 0.0 => fmt_real(c.re, f),
            Expr::Num(c) => {
                write!(f, "(")?;
                fmt_real(c.re, f)?;
                write!(f, " + ")?;
                fmt_real(c.im, f)?;
                write!(f, "*i)")
            }
            Expr::I => write!(f, "i"),
            Expr::Var(Var::Z(k)) => write!(f, "z{}", k + 1),
            Expr::Var(Var::Eta(k)) => write!(f, "eta{}", k + 1),
            Expr::Neg(a) => write!(f, "(-{})", a),
            Expr::Add(a, b) => write!(f, "({} + {})", a, b),
            Expr::Sub(a, b) => write!(f, "({} - {})", a, b),
            Expr::Mul(a, b) => write!(f, "({} * {})", a, b),
            Expr::Div(a, b) => write!(f, "({} / {})", a, b),
            Expr::Pow(a, e) if *e < 0 => write!(f, "({}^({}))", a, e),
            Expr::Pow(a, e) => write!(f, "({}^{})", a, e),
            Expr::Call(g, a) => write!(f, "{}({})", g.name(), a),
        }
    }
}
