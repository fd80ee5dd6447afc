//! Evaluation of expression trees at real or complex points.
//!
//! Real and complex evaluation share one generic code path, so a complex
//! evaluation restricted to the real axis reproduces the real result exactly.

use super::{Constant, Expr, PathIntegral, ScalarExpr};
use crate::error::EvalError;
use num_complex::Complex64;
use num_rational::Rational64;
use std::collections::HashMap;

/// Denominator floor: evaluation errors out instead of returning huge values
/// near singular loci.
pub const EPS_DEN: f64 = 1e-12;

/// Scalar field over which expressions can be evaluated.
pub trait Scalar:
    Copy
    + PartialEq
    + std::fmt::Debug
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
    + Send
    + Sync
{
    fn from_f64(x: f64) -> Self;
    fn modulus(self) -> f64;
    fn real_part(self) -> f64;
    fn imag_part(self) -> f64;
    fn is_finite_value(self) -> bool;
    fn sin_value(self) -> Self;
    fn cos_value(self) -> Self;
    fn exp_value(self) -> Self;
    fn ln_value(self) -> Result<Self, EvalError>;
    fn pow_rational(self, r: Rational64) -> Result<Self, EvalError>;
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn real_part(self) -> f64 {
        self
    }
    fn imag_part(self) -> f64 {
        0.0
    }
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
    fn sin_value(self) -> Self {
        self.sin()
    }
    fn cos_value(self) -> Self {
        self.cos()
    }
    fn exp_value(self) -> Self {
        self.exp()
    }
    fn ln_value(self) -> Result<Self, EvalError> {
        if self <= EPS_DEN {
            Err(EvalError::LogDomain(self))
        } else {
            Ok(self.ln())
        }
    }
    fn pow_rational(self, r: Rational64) -> Result<Self, EvalError> {
        if r.is_integer() {
            let e = *r.numer();
            if e < 0 && self.abs() < EPS_DEN {
                return Err(EvalError::DenominatorFloor);
            }
            if e.unsigned_abs() <= i32::MAX as u64 {
                return Ok(self.powi(e as i32));
            }
            return Ok(self.powf(e as f64));
        }
        if self < 0.0 {
            return Err(EvalError::NegativeFractionalPower(self));
        }
        let rf = *r.numer() as f64 / *r.denom() as f64;
        if rf < 0.0 && self < EPS_DEN {
            return Err(EvalError::DenominatorFloor);
        }
        Ok(self.powf(rf))
    }
}

impl Scalar for Complex64 {
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn real_part(self) -> f64 {
        self.re
    }
    fn imag_part(self) -> f64 {
        self.im
    }
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn sin_value(self) -> Self {
        self.sin()
    }
    fn cos_value(self) -> Self {
        self.cos()
    }
    fn exp_value(self) -> Self {
        self.exp()
    }
    fn ln_value(self) -> Result<Self, EvalError> {
        if self.norm() < EPS_DEN {
            return Err(EvalError::LogDomain(0.0));
        }
        if self.re < 0.0 && self.im.abs() < EPS_DEN * (1.0 + self.re.abs()) {
            return Err(EvalError::BranchCut);
        }
        Ok(self.ln())
    }
    fn pow_rational(self, r: Rational64) -> Result<Self, EvalError> {
        if r.is_integer() {
            let e = *r.numer();
            if e < 0 && self.norm() < EPS_DEN {
                return Err(EvalError::DenominatorFloor);
            }
            if e.unsigned_abs() <= i32::MAX as u64 {
                return Ok(self.powi(e as i32));
            }
        }
        // principal branch; refuse points hugging the cut
        if self.re < 0.0 && self.im.abs() < EPS_DEN * (1.0 + self.re.abs()) {
            return Err(EvalError::BranchCut);
        }
        let rf = *r.numer() as f64 / *r.denom() as f64;
        if rf < 0.0 && self.norm() < EPS_DEN {
            return Err(EvalError::DenominatorFloor);
        }
        Ok(self.powf(rf))
    }
}

/// Point-bound evaluator with a pointer-keyed cache, so shared subtrees are
/// evaluated once. Create one per point, evaluate many expressions with it.
pub struct Evaluator<'a, T: Scalar> {
    names: &'a [String],
    values: &'a [T],
    cache: HashMap<usize, T>,
}

impl<'a, T: Scalar> Evaluator<'a, T> {
    pub fn new(names: &'a [String], values: &'a [T]) -> Self {
        assert_eq!(names.len(), values.len());
        Evaluator {
            names,
            values,
            cache: HashMap::new(),
        }
    }

    fn lookup(&self, name: &str) -> Result<T, EvalError> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
            .ok_or_else(|| EvalError::UnknownVariable(name.to_string()))
    }

    pub fn eval(&mut self, e: &ScalarExpr) -> Result<T, EvalError> {
        if let Some(v) = self.cache.get(&e.ptr()) {
            return Ok(*v);
        }
        let v = match e.node() {
            Expr::Const(Constant::Rat(r)) => {
                T::from_f64(*r.numer() as f64 / *r.denom() as f64)
            }
            Expr::Const(Constant::Float(x)) => T::from_f64(*x),
            Expr::Const(Constant::Pi) => T::from_f64(std::f64::consts::PI),
            Expr::Var(name) => self.lookup(name)?,
            Expr::Sum(ts) => {
                let mut acc = T::from_f64(0.0);
                for t in ts {
                    acc = acc + self.eval(t)?;
                }
                acc
            }
            Expr::Prod(fs) => {
                let mut acc = T::from_f64(1.0);
                for f in fs {
                    acc = acc * self.eval(f)?;
                }
                acc
            }
            Expr::Quot(a, b) => {
                let den = self.eval(b)?;
                if den.modulus() < EPS_DEN {
                    return Err(EvalError::DenominatorFloor);
                }
                self.eval(a)? / den
            }
            Expr::Pow(b, r) => self.eval(b)?.pow_rational(*r)?,
            Expr::Neg(x) => -self.eval(x)?,
            Expr::Sin(x) => self.eval(x)?.sin_value(),
            Expr::Cos(x) => self.eval(x)?.cos_value(),
            Expr::Exp(x) => self.eval(x)?.exp_value(),
            Expr::Log(x) => self.eval(x)?.ln_value()?,
            Expr::PathIntegral(pi) => T::from_f64(self.eval_path_integral(pi)?),
        };
        if !v.is_finite_value() {
            return Err(EvalError::NonFinite);
        }
        self.cache.insert(e.ptr(), v);
        Ok(v)
    }

    /// Midpoint-rule line integral along axis-parallel segments from the base
    /// point to the current point's coordinates.
    fn eval_path_integral(&mut self, pi: &PathIntegral) -> Result<f64, EvalError> {
        let n = pi.coords.len();
        let mut target = vec![0.0f64; n];
        for (i, c) in pi.coords.iter().enumerate() {
            let v = self.lookup(c)?;
            if v.imag_part().abs() > 1e-9 {
                return Err(EvalError::ComplexPathIntegral);
            }
            target[i] = v.real_part();
        }
        let mut total = 0.0;
        let mut point = pi.base.clone();
        for leg in 0..n {
            let lo = pi.base[leg];
            let hi = target[leg];
            if lo == hi {
                point[leg] = hi;
                continue;
            }
            let dx = (hi - lo) / pi.steps as f64;
            for s in 0..pi.steps {
                point[leg] = lo + (s as f64 + 0.5) * dx;
                let mut ev: Evaluator<'_, f64> = Evaluator::new(&pi.coords, &point);
                total += ev.eval(&pi.form[leg])? * dx;
            }
            point[leg] = hi;
        }
        Ok(total)
    }
}

impl ScalarExpr {
    pub fn eval_real(&self, names: &[String], values: &[f64]) -> Result<f64, EvalError> {
        Evaluator::new(names, values).eval(self)
    }

    pub fn eval_complex(
        &self,
        names: &[String],
        values: &[Complex64],
    ) -> Result<Complex64, EvalError> {
        Evaluator::new(names, values).eval(self)
    }
}
