//! Scalar expression trees over named coordinates.
//!
//! Immutable trees with exact symbolic differentiation, light simplification
//! (constant folding and 0/1 identities, nothing canonical), and evaluation
//! at real or complex points. Rational exponents are stored exactly so that
//! half-integer powers from norms and Gram-Schmidt differentiate exactly.

mod eval;
mod parse;

pub use eval::{Evaluator, Scalar, EPS_DEN};
pub use parse::parse_expr;

use num_rational::Rational64;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constant {
    Rat(Rational64),
    Float(f64),
    Pi,
}

/// Path integral of a closed 1-form from a fixed base point, along
/// axis-parallel segments. Differentiates exactly to the form components;
/// evaluates by midpoint quadrature.
#[derive(Debug, PartialEq)]
pub struct PathIntegral {
    pub coords: Vec<String>,
    pub form: Vec<ScalarExpr>,
    pub base: Vec<f64>,
    pub steps: usize,
}

#[derive(Debug, PartialEq)]
pub enum Expr {
    Const(Constant),
    Var(String),
    Sum(Vec<ScalarExpr>),
    Prod(Vec<ScalarExpr>),
    Quot(ScalarExpr, ScalarExpr),
    Pow(ScalarExpr, Rational64),
    Neg(ScalarExpr),
    Sin(ScalarExpr),
    Cos(ScalarExpr),
    Exp(ScalarExpr),
    Log(ScalarExpr),
    PathIntegral(PathIntegral),
}

/// Shared immutable expression tree. Cloning is cheap; subtrees are shared,
/// which the evaluators exploit via pointer-keyed caches.
#[derive(Debug, Clone)]
pub struct ScalarExpr(Arc<Expr>);

impl PartialEq for ScalarExpr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}

fn rat(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

impl ScalarExpr {
    pub(crate) fn node(&self) -> &Expr {
        &self.0
    }

    pub(crate) fn ptr(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    fn wrap(e: Expr) -> Self {
        ScalarExpr(Arc::new(e))
    }

    pub fn int(n: i64) -> Self {
        Self::rational(n, 1)
    }

    pub fn rational(n: i64, d: i64) -> Self {
        Self::wrap(Expr::Const(Constant::Rat(rat(n, d))))
    }

    pub fn float(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite constant");
        Self::wrap(Expr::Const(Constant::Float(x)))
    }

    pub fn pi() -> Self {
        Self::wrap(Expr::Const(Constant::Pi))
    }

    pub fn var(name: &str) -> Self {
        Self::wrap(Expr::Var(name.to_string()))
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn is_zero(&self) -> bool {
        matches!(
            self.node(),
            Expr::Const(Constant::Rat(r)) if *r.numer() == 0
        ) || matches!(self.node(), Expr::Const(Constant::Float(x)) if *x == 0.0)
    }

    pub fn is_one(&self) -> bool {
        matches!(
            self.node(),
            Expr::Const(Constant::Rat(r)) if *r.numer() == 1 && *r.denom() == 1
        ) || matches!(self.node(), Expr::Const(Constant::Float(x)) if *x == 1.0)
    }

    fn as_const(&self) -> Option<Constant> {
        match self.node() {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// n-ary sum with flattening, zero removal and constant folding.
    pub fn add_all<I: IntoIterator<Item = ScalarExpr>>(terms: I) -> Self {
        let mut out: Vec<ScalarExpr> = Vec::new();
        let mut crat = rat(0, 1);
        let mut cfloat = 0.0f64;
        let mut has_float = false;
        let push = |e: ScalarExpr,
                        out: &mut Vec<ScalarExpr>,
                        crat: &mut Rational64,
                        cfloat: &mut f64,
                        has_float: &mut bool| {
            match e.node() {
                Expr::Const(Constant::Rat(r)) => *crat += *r,
                Expr::Const(Constant::Float(x)) => {
                    *cfloat += *x;
                    *has_float = true;
                }
                _ => out.push(e),
            }
        };
        for t in terms {
            if let Expr::Sum(children) = t.node() {
                for c in children {
                    push(c.clone(), &mut out, &mut crat, &mut cfloat, &mut has_float);
                }
            } else {
                push(t, &mut out, &mut crat, &mut cfloat, &mut has_float);
            }
        }
        if has_float {
            let total = cfloat + (*crat.numer() as f64) / (*crat.denom() as f64);
            if total != 0.0 || out.is_empty() {
                out.push(Self::float(total));
            }
        } else if crat != rat(0, 1) || out.is_empty() {
            out.push(Self::wrap(Expr::Const(Constant::Rat(crat))));
        }
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            Self::wrap(Expr::Sum(out))
        }
    }

    pub fn add(a: ScalarExpr, b: ScalarExpr) -> Self {
        Self::add_all([a, b])
    }

    pub fn sub(a: ScalarExpr, b: ScalarExpr) -> Self {
        Self::add_all([a, Self::neg(b)])
    }

    /// n-ary product with flattening, unit removal, zero annihilation and
    /// constant folding.
    pub fn mul_all<I: IntoIterator<Item = ScalarExpr>>(factors: I) -> Self {
        let mut out: Vec<ScalarExpr> = Vec::new();
        let mut crat = rat(1, 1);
        let mut cfloat = 1.0f64;
        let mut has_float = false;
        for f in factors {
            let children: Vec<ScalarExpr> = if let Expr::Prod(cs) = f.node() {
                cs.clone()
            } else {
                vec![f]
            };
            for c in children {
                match c.node() {
                    Expr::Const(Constant::Rat(r)) => {
                        if *r.numer() == 0 {
                            return Self::zero();
                        }
                        crat *= *r;
                    }
                    Expr::Const(Constant::Float(x)) => {
                        if *x == 0.0 {
                            return Self::zero();
                        }
                        cfloat *= *x;
                        has_float = true;
                    }
                    _ => out.push(c),
                }
            }
        }
        if has_float {
            let total = cfloat * (*crat.numer() as f64) / (*crat.denom() as f64);
            if total != 1.0 || out.is_empty() {
                out.insert(0, Self::float(total));
            }
        } else if crat != rat(1, 1) || out.is_empty() {
            out.insert(0, Self::wrap(Expr::Const(Constant::Rat(crat))));
        }
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            Self::wrap(Expr::Prod(out))
        }
    }

    pub fn mul(a: ScalarExpr, b: ScalarExpr) -> Self {
        Self::mul_all([a, b])
    }

    pub fn quot(num: ScalarExpr, den: ScalarExpr) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        if den.is_one() {
            return num;
        }
        if let (Some(Constant::Rat(a)), Some(Constant::Rat(b))) = (num.as_const(), den.as_const())
        {
            if *b.numer() != 0 {
                return Self::wrap(Expr::Const(Constant::Rat(a / b)));
            }
        }
        Self::wrap(Expr::Quot(num, den))
    }

    pub fn pow(base: ScalarExpr, exponent: Rational64) -> Self {
        if exponent == rat(0, 1) {
            return Self::one();
        }
        if exponent == rat(1, 1) {
            return base;
        }
        if base.is_one() {
            return Self::one();
        }
        if base.is_zero() && exponent > rat(0, 1) {
            return Self::zero();
        }
        if let Expr::Pow(inner, r) = base.node() {
            return Self::pow(inner.clone(), *r * exponent);
        }
        if let Some(Constant::Rat(r)) = base.as_const() {
            if exponent.is_integer() {
                let e = *exponent.numer();
                if e.unsigned_abs() <= 16 {
                    let p = r.pow(e.unsigned_abs() as i32);
                    if e >= 0 {
                        return Self::wrap(Expr::Const(Constant::Rat(p)));
                    } else if *p.numer() != 0 {
                        return Self::wrap(Expr::Const(Constant::Rat(p.recip())));
                    }
                }
            }
        }
        Self::wrap(Expr::Pow(base, exponent))
    }

    pub fn powi(base: ScalarExpr, e: i64) -> Self {
        Self::pow(base, rat(e, 1))
    }

    pub fn sqrt(base: ScalarExpr) -> Self {
        Self::pow(base, rat(1, 2))
    }

    pub fn neg(e: ScalarExpr) -> Self {
        match e.node() {
            Expr::Const(Constant::Rat(r)) => Self::wrap(Expr::Const(Constant::Rat(-r))),
            Expr::Const(Constant::Float(x)) => Self::float(-x),
            Expr::Neg(inner) => inner.clone(),
            _ => Self::wrap(Expr::Neg(e)),
        }
    }

    pub fn sin(e: ScalarExpr) -> Self {
        if e.is_zero() {
            return Self::zero();
        }
        Self::wrap(Expr::Sin(e))
    }

    pub fn cos(e: ScalarExpr) -> Self {
        if e.is_zero() {
            return Self::one();
        }
        Self::wrap(Expr::Cos(e))
    }

    pub fn exp(e: ScalarExpr) -> Self {
        if e.is_zero() {
            return Self::one();
        }
        Self::wrap(Expr::Exp(e))
    }

    pub fn log(e: ScalarExpr) -> Self {
        if e.is_one() {
            return Self::zero();
        }
        Self::wrap(Expr::Log(e))
    }

    pub fn path_integral(
        coords: Vec<String>,
        form: Vec<ScalarExpr>,
        base: Vec<f64>,
        steps: usize,
    ) -> Self {
        assert_eq!(coords.len(), form.len());
        assert_eq!(coords.len(), base.len());
        Self::wrap(Expr::PathIntegral(PathIntegral {
            coords,
            form,
            base,
            steps,
        }))
    }

    /// Exact symbolic derivative with respect to one coordinate.
    pub fn differentiate(&self, var: &str) -> ScalarExpr {
        let mut memo: HashMap<usize, ScalarExpr> = HashMap::new();
        self.diff_memo(var, &mut memo)
    }

    fn diff_memo(&self, var: &str, memo: &mut HashMap<usize, ScalarExpr>) -> ScalarExpr {
        if let Some(hit) = memo.get(&self.ptr()) {
            return hit.clone();
        }
        let d = match self.node() {
            Expr::Const(_) => Self::zero(),
            Expr::Var(v) => {
                if v == var {
                    Self::one()
                } else {
                    Self::zero()
                }
            }
            Expr::Sum(ts) => Self::add_all(ts.iter().map(|t| t.diff_memo(var, memo))),
            Expr::Prod(fs) => Self::add_all((0..fs.len()).map(|i| {
                let mut parts: Vec<ScalarExpr> = Vec::with_capacity(fs.len());
                for (j, f) in fs.iter().enumerate() {
                    if i == j {
                        parts.push(f.diff_memo(var, memo));
                    } else {
                        parts.push(f.clone());
                    }
                }
                Self::mul_all(parts)
            })),
            Expr::Quot(a, b) => {
                let da = a.diff_memo(var, memo);
                let db = b.diff_memo(var, memo);
                Self::quot(
                    Self::sub(Self::mul(da, b.clone()), Self::mul(a.clone(), db)),
                    Self::powi(b.clone(), 2),
                )
            }
            Expr::Pow(b, r) => {
                let db = b.diff_memo(var, memo);
                Self::mul_all([
                    Self::wrap(Expr::Const(Constant::Rat(*r))),
                    Self::pow(b.clone(), r - rat(1, 1)),
                    db,
                ])
            }
            Expr::Neg(e) => Self::neg(e.diff_memo(var, memo)),
            Expr::Sin(e) => Self::mul(Self::cos(e.clone()), e.diff_memo(var, memo)),
            Expr::Cos(e) => Self::neg(Self::mul(Self::sin(e.clone()), e.diff_memo(var, memo))),
            Expr::Exp(e) => Self::mul(Self::exp(e.clone()), e.diff_memo(var, memo)),
            Expr::Log(e) => Self::quot(e.diff_memo(var, memo), e.clone()),
            Expr::PathIntegral(pi) => pi
                .coords
                .iter()
                .position(|c| c == var)
                .map(|i| pi.form[i].clone())
                .unwrap_or_else(Self::zero),
        };
        memo.insert(self.ptr(), d.clone());
        d
    }

    /// Capture-free substitution of a variable by an expression.
    pub fn substitute(&self, var: &str, replacement: &ScalarExpr) -> ScalarExpr {
        let mut memo: HashMap<usize, ScalarExpr> = HashMap::new();
        self.subst_memo(var, replacement, &mut memo)
    }

    fn subst_memo(
        &self,
        var: &str,
        rep: &ScalarExpr,
        memo: &mut HashMap<usize, ScalarExpr>,
    ) -> ScalarExpr {
        if let Some(hit) = memo.get(&self.ptr()) {
            return hit.clone();
        }
        let s = match self.node() {
            Expr::Const(_) => self.clone(),
            Expr::Var(v) => {
                if v == var {
                    rep.clone()
                } else {
                    self.clone()
                }
            }
            Expr::Sum(ts) => Self::add_all(ts.iter().map(|t| t.subst_memo(var, rep, memo))),
            Expr::Prod(fs) => Self::mul_all(fs.iter().map(|f| f.subst_memo(var, rep, memo))),
            Expr::Quot(a, b) => Self::quot(
                a.subst_memo(var, rep, memo),
                b.subst_memo(var, rep, memo),
            ),
            Expr::Pow(b, r) => Self::pow(b.subst_memo(var, rep, memo), *r),
            Expr::Neg(e) => Self::neg(e.subst_memo(var, rep, memo)),
            Expr::Sin(e) => Self::sin(e.subst_memo(var, rep, memo)),
            Expr::Cos(e) => Self::cos(e.subst_memo(var, rep, memo)),
            Expr::Exp(e) => Self::exp(e.subst_memo(var, rep, memo)),
            Expr::Log(e) => Self::log(e.subst_memo(var, rep, memo)),
            Expr::PathIntegral(pi) => {
                assert!(
                    !pi.coords.iter().any(|c| c == var),
                    "substitution into a path-integral coordinate is not supported"
                );
                Self::wrap(Expr::PathIntegral(PathIntegral {
                    coords: pi.coords.clone(),
                    form: pi
                        .form
                        .iter()
                        .map(|f| f.subst_memo(var, rep, memo))
                        .collect(),
                    base: pi.base.clone(),
                    steps: pi.steps,
                }))
            }
        };
        memo.insert(self.ptr(), s.clone());
        s
    }

    /// Light value-preserving simplification: rebuilds through the smart
    /// constructors, preserving subtree sharing.
    pub fn simplify(&self) -> ScalarExpr {
        let mut memo: HashMap<usize, ScalarExpr> = HashMap::new();
        self.simplify_memo(&mut memo)
    }

    fn simplify_memo(&self, memo: &mut HashMap<usize, ScalarExpr>) -> ScalarExpr {
        if let Some(hit) = memo.get(&self.ptr()) {
            return hit.clone();
        }
        let s = match self.node() {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Sum(ts) => Self::add_all(ts.iter().map(|t| t.simplify_memo(memo))),
            Expr::Prod(fs) => Self::mul_all(fs.iter().map(|f| f.simplify_memo(memo))),
            Expr::Quot(a, b) => Self::quot(a.simplify_memo(memo), b.simplify_memo(memo)),
            Expr::Pow(b, r) => Self::pow(b.simplify_memo(memo), *r),
            Expr::Neg(e) => Self::neg(e.simplify_memo(memo)),
            Expr::Sin(e) => Self::sin(e.simplify_memo(memo)),
            Expr::Cos(e) => Self::cos(e.simplify_memo(memo)),
            Expr::Exp(e) => Self::exp(e.simplify_memo(memo)),
            Expr::Log(e) => Self::log(e.simplify_memo(memo)),
            Expr::PathIntegral(_) => self.clone(),
        };
        memo.insert(self.ptr(), s.clone());
        s
    }

    /// Number of distinct nodes reachable from this expression.
    pub fn node_count(&self) -> usize {
        let mut seen: std::collections::HashSet<usize> = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.ptr()) {
                continue;
            }
            match e.node() {
                Expr::Sum(ts) | Expr::Prod(ts) => stack.extend(ts.iter().cloned()),
                Expr::Quot(a, b) => {
                    stack.push(a.clone());
                    stack.push(b.clone());
                }
                Expr::Pow(b, _) => stack.push(b.clone()),
                Expr::Neg(e) | Expr::Sin(e) | Expr::Cos(e) | Expr::Exp(e) | Expr::Log(e) => {
                    stack.push(e.clone())
                }
                Expr::PathIntegral(pi) => stack.extend(pi.form.iter().cloned()),
                Expr::Const(_) | Expr::Var(_) => {}
            }
        }
        seen.len()
    }

    /// Collects variable names occurring in the expression.
    pub fn variables(&self) -> std::collections::BTreeSet<String> {
        let mut out = std::collections::BTreeSet::new();
        let mut seen: std::collections::HashSet<usize> = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.ptr()) {
                continue;
            }
            match e.node() {
                Expr::Var(v) => {
                    out.insert(v.clone());
                }
                Expr::Sum(ts) | Expr::Prod(ts) => stack.extend(ts.iter().cloned()),
                Expr::Quot(a, b) => {
                    stack.push(a.clone());
                    stack.push(b.clone());
                }
                Expr::Pow(b, _) => stack.push(b.clone()),
                Expr::Neg(e) | Expr::Sin(e) | Expr::Cos(e) | Expr::Exp(e) | Expr::Log(e) => {
                    stack.push(e.clone())
                }
                Expr::PathIntegral(pi) => {
                    stack.extend(pi.form.iter().cloned());
                    for c in &pi.coords {
                        out.insert(c.clone());
                    }
                }
                Expr::Const(_) => {}
            }
        }
        out
    }
}

impl std::ops::Add for &ScalarExpr {
    type Output = ScalarExpr;
    fn add(self, rhs: &ScalarExpr) -> ScalarExpr {
        ScalarExpr::add(self.clone(), rhs.clone())
    }
}

impl std::ops::Sub for &ScalarExpr {
    type Output = ScalarExpr;
    fn sub(self, rhs: &ScalarExpr) -> ScalarExpr {
        ScalarExpr::sub(self.clone(), rhs.clone())
    }
}

impl std::ops::Mul for &ScalarExpr {
    type Output = ScalarExpr;
    fn mul(self, rhs: &ScalarExpr) -> ScalarExpr {
        ScalarExpr::mul(self.clone(), rhs.clone())
    }
}

impl std::ops::Div for &ScalarExpr {
    type Output = ScalarExpr;
    fn div(self, rhs: &ScalarExpr) -> ScalarExpr {
        ScalarExpr::quot(self.clone(), rhs.clone())
    }
}

impl std::ops::Neg for &ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        ScalarExpr::neg(self.clone())
    }
}

// Printing: precedence levels chosen so that print-then-parse returns a
// structurally equal tree.
//   0 sum, 1 term (product/quotient), 2 factor (negation/power), 3 atom
impl ScalarExpr {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        match self.node() {
            Expr::Const(Constant::Rat(r)) => {
                if *r.denom() == 1 {
                    if *r.numer() < 0 && prec > 1 {
                        write!(f, "({})", r.numer())
                    } else {
                        write!(f, "{}", r.numer())
                    }
                } else if *r.numer() < 0 || prec > 1 {
                    write!(f, "({}/{})", r.numer(), r.denom())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Expr::Const(Constant::Float(x)) => {
                if *x < 0.0 && prec > 1 {
                    write!(f, "({:e})", x)
                } else {
                    write!(f, "{:e}", x)
                }
            }
            Expr::Const(Constant::Pi) => write!(f, "pi"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Sum(ts) => {
                let parens = prec > 0;
                if parens {
                    write!(f, "(")?;
                }
                for (i, t) in ts.iter().enumerate() {
                    if let Expr::Neg(inner) = t.node() {
                        write!(f, "{}", if i == 0 { "-" } else { " - " })?;
                        inner.fmt_prec(f, 2)?;
                    } else {
                        if i > 0 {
                            write!(f, " + ")?;
                        }
                        t.fmt_prec(f, 1)?;
                    }
                }
                if parens {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Expr::Prod(fs) => {
                let parens = prec > 1;
                if parens {
                    write!(f, "(")?;
                }
                for (i, t) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    t.fmt_prec(f, 2)?;
                }
                if parens {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Expr::Quot(a, b) => {
                let parens = prec > 1;
                if parens {
                    write!(f, "(")?;
                }
                a.fmt_prec(f, 1)?;
                write!(f, "/")?;
                b.fmt_prec(f, 2)?;
                if parens {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Expr::Pow(b, r) => {
                b.fmt_prec(f, 3)?;
                if r.is_integer() {
                    if *r.numer() >= 0 {
                        write!(f, "^{}", r.numer())
                    } else {
                        write!(f, "^({})", r.numer())
                    }
                } else {
                    write!(f, "^({}/{})", r.numer(), r.denom())
                }
            }
            Expr::Neg(e) => {
                let parens = prec > 2;
                if parens {
                    write!(f, "(")?;
                }
                write!(f, "-")?;
                e.fmt_prec(f, 2)?;
                if parens {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Expr::Sin(e) => write!(f, "sin({e})"),
            Expr::Cos(e) => write!(f, "cos({e})"),
            Expr::Exp(e) => write!(f, "exp({e})"),
            Expr::Log(e) => write!(f, "log({e})"),
            Expr::PathIntegral(pi) => {
                write!(f, "pathint[")?;
                for (i, c) in pi.coords.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{c}: {}", pi.form[i])?;
                }
                write!(f, "]")
            }
        }
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}
