//! Dense univariate polynomials in the time variable `t` with exact rational
//! coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::{rational_to_f64, JsonCoeff, Rational, Scalar};

/// `c₀ + c₁t + … + c_d t^d`, stored without trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct TPoly {
    coeffs: Vec<Rational>,
}

impl TPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// The polynomial `t`.
    pub fn t() -> Self {
        Self::monomial(Rational::one(), 1)
    }

    pub fn monomial(c: Rational, degree: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); degree + 1];
        coeffs[degree] = c;
        Self::new(coeffs)
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Rational::from_int(c)).collect())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// `∫₀ᵗ p(s) ds`.
    pub fn integrate(&self) -> Self {
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(Rational::zero());
        for (i, c) in self.coeffs.iter().enumerate() {
            out.push(c / Rational::from_int(i as i64 + 1));
        }
        Self::new(out)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rational::from_int(i as i64))
                .collect(),
        )
    }

    pub fn eval(&self, t: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * t + c)
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * t + rational_to_f64(c))
    }

    /// Number of nonzero coefficients.
    pub fn term_count(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }
}

impl Zero for TPoly {
    fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl One for TPoly {
    fn one() -> Self {
        Self::constant(Rational::one())
    }
}

impl Add for TPoly {
    type Output = TPoly;
    fn add(self, rhs: TPoly) -> TPoly {
        &self + &rhs
    }
}

impl Add for &TPoly {
    type Output = TPoly;
    fn add(self, rhs: &TPoly) -> TPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        TPoly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for TPoly {
    type Output = TPoly;
    fn sub(self, rhs: TPoly) -> TPoly {
        &self - &rhs
    }
}

impl Sub for &TPoly {
    type Output = TPoly;
    fn sub(self, rhs: &TPoly) -> TPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        TPoly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for TPoly {
    type Output = TPoly;
    fn mul(self, rhs: TPoly) -> TPoly {
        &self * &rhs
    }
}

impl Mul for &TPoly {
    type Output = TPoly;
    fn mul(self, rhs: &TPoly) -> TPoly {
        if self.is_zero() || rhs.is_zero() {
            return TPoly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        TPoly::new(out)
    }
}

impl Neg for TPoly {
    type Output = TPoly;
    fn neg(self) -> TPoly {
        TPoly::new(self.coeffs.into_iter().map(|c| -c).collect())
    }
}

impl Scalar for TPoly {
    fn from_ratio(num: i64, den: i64) -> Self {
        TPoly::constant(Rational::from_ratio(num, den))
    }
}

impl JsonCoeff for TPoly {
    fn to_json(&self) -> Value {
        let coeffs: Vec<Value> = self.coeffs.iter().map(JsonCoeff::to_json).collect();
        serde_json::json!({ "tpoly": coeffs })
    }

    fn from_json(v: &Value) -> Result<Self> {
        let list = v
            .get("tpoly")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse(format!("expected {{\"tpoly\": [...]}}, got {v}")))?;
        Ok(TPoly::new(
            list.iter()
                .map(Rational::from_json)
                .collect::<Result<Vec<_>>>()?,
        ))
    }
}

/// Writes `a·x^i` terms as `3/2 t^2 - t + 1` style text (ascending degree).
pub(crate) fn fmt_rational_terms(
    f: &mut fmt::Formatter<'_>,
    terms: &[(usize, &Rational)],
    var: &str,
) -> fmt::Result {
    if terms.is_empty() {
        return write!(f, "0");
    }
    for (n, (i, c)) in terms.iter().enumerate() {
        let neg = c.is_negative();
        let mag = c.abs();
        match (n, neg) {
            (0, true) => write!(f, "-")?,
            (0, false) => {}
            (_, true) => write!(f, " - ")?,
            (_, false) => write!(f, " + ")?,
        }
        let unit = mag.is_one();
        match i {
            0 => write!(f, "{mag}")?,
            1 if unit => write!(f, "{var}")?,
            1 => write!(f, "{mag} {var}")?,
            _ if unit => write!(f, "{var}^{i}")?,
            _ => write!(f, "{mag} {var}^{i}")?,
        }
    }
    Ok(())
}

impl fmt::Display for TPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<(usize, &Rational)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .collect();
        fmt_rational_terms(f, &terms, "t")
    }
}
