//! Dense single-variable polynomials, in `u` (inputs of the transform) or
//! `z` (its outputs).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::exppoly::ExpPoly;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    U,
    Z,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::U => "u",
            Var::Z => "z",
        }
    }
}

/// `c₀ + c₁x + … + c_d x^d`; the leading coefficient is nonzero unless the
/// polynomial is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleVarPoly<R> {
    var: Var,
    coeffs: Vec<R>,
}

impl<R: Scalar> SingleVarPoly<R> {
    pub fn new(var: Var, mut coeffs: Vec<R>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { var, coeffs }
    }

    pub fn zero_in(var: Var) -> Self {
        Self {
            var,
            coeffs: Vec::new(),
        }
    }

    /// `c·x^degree`.
    pub fn monomial(var: Var, degree: usize, c: R) -> Self {
        let mut coeffs = vec![R::zero(); degree + 1];
        coeffs[degree] = c;
        Self::new(var, coeffs)
    }

    pub fn var(&self) -> Var {
        self.var
    }

    pub fn with_var(mut self, var: Var) -> Self {
        self.var = var;
        self
    }

    pub fn coeffs(&self) -> &[R] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> R {
        self.coeffs.get(i).cloned().unwrap_or_else(R::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn scale(&self, c: &R) -> Self {
        Self::new(self.var, self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    pub fn map_coeffs<S: Scalar>(&self, f: impl Fn(&R) -> S) -> SingleVarPoly<S> {
        SingleVarPoly::new(self.var, self.coeffs.iter().map(f).collect())
    }

    pub fn eval(&self, x: &R) -> R {
        self.coeffs
            .iter()
            .rev()
            .fold(R::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    /// Variable of a binary result: a zero operand adopts the other's tag.
    fn join_var(&self, other: &Self) -> Var {
        if self.coeffs.is_empty() {
            other.var
        } else {
            self.var
        }
    }
}

impl SingleVarPoly<ExpPoly> {
    /// Substitutes a numeric time into every coefficient.
    pub fn eval_at_time(&self, t: f64) -> SingleVarPoly<Complex64> {
        self.map_coeffs(|c| c.eval_complex(t))
    }
}

impl SingleVarPoly<Complex64> {
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n)
            .map(|i| (self.coeff(i) - other.coeff(i)).norm())
            .fold(0.0, f64::max)
    }
}

impl<R: Scalar> Add for SingleVarPoly<R> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        &self + &rhs
    }
}

impl<R: Scalar> Add for &SingleVarPoly<R> {
    type Output = SingleVarPoly<R>;
    fn add(self, rhs: &SingleVarPoly<R>) -> SingleVarPoly<R> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        SingleVarPoly::new(
            self.join_var(rhs),
            (0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect(),
        )
    }
}

impl<R: Scalar> Sub for SingleVarPoly<R> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        &self - &rhs
    }
}

impl<R: Scalar> Sub for &SingleVarPoly<R> {
    type Output = SingleVarPoly<R>;
    fn sub(self, rhs: &SingleVarPoly<R>) -> SingleVarPoly<R> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        SingleVarPoly::new(
            self.join_var(rhs),
            (0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect(),
        )
    }
}

impl<R: Scalar> Mul for SingleVarPoly<R> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl<R: Scalar> Mul for &SingleVarPoly<R> {
    type Output = SingleVarPoly<R>;
    fn mul(self, rhs: &SingleVarPoly<R>) -> SingleVarPoly<R> {
        let var = self.join_var(rhs);
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return SingleVarPoly::zero_in(var);
        }
        let mut out = vec![R::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        SingleVarPoly::new(var, out)
    }
}

impl<R: Scalar> Mul<Complex64> for SingleVarPoly<R>
where
    R: Mul<Complex64, Output = R>,
{
    type Output = Self;
    fn mul(self, c: Complex64) -> Self {
        let var = self.var;
        SingleVarPoly::new(var, self.coeffs.into_iter().map(|a| a * c).collect())
    }
}

impl<R: Scalar> Neg for SingleVarPoly<R> {
    type Output = Self;
    fn neg(self) -> Self {
        SingleVarPoly {
            var: self.var,
            coeffs: self.coeffs.into_iter().map(|c| -c).collect(),
        }
    }
}

impl<R: Scalar> Zero for SingleVarPoly<R> {
    fn zero() -> Self {
        Self::zero_in(Var::U)
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl<R: Scalar> One for SingleVarPoly<R> {
    fn one() -> Self {
        Self::new(Var::U, vec![R::one()])
    }
}

impl<R: Scalar> Scalar for SingleVarPoly<R> {
    fn from_ratio(num: i64, den: i64) -> Self {
        Self::new(Var::U, vec![R::from_ratio(num, den)])
    }
}

impl<R: Scalar + fmt::Display> fmt::Display for SingleVarPoly<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x = self.var.name();
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mono = match i {
                0 => String::new(),
                1 => x.to_string(),
                _ => format!("{x}^{i}"),
            };
            match (c.is_one(), mono.is_empty()) {
                (true, false) => write!(f, "{mono}")?,
                (_, true) => write!(f, "({c})")?,
                (false, false) => write!(f, "({c})·{mono}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
