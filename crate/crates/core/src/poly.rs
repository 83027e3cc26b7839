//! The commutative algebra of trace polynomials over a [`Scalar`] ring, and
//! its two evaluation maps: onto matrix-valued functions, and onto
//! single-variable polynomials by fixing the trace variables.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::monomial::TraceMonomial;
use crate::scalar::{JsonCoeff, Scalar, ToComplex};
use crate::single_var::{SingleVarPoly, Var};

/// Finitely supported map monomial → nonzero coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct TracePolynomial<R> {
    terms: BTreeMap<TraceMonomial, R>,
}

impl<R: Scalar> TracePolynomial<R> {
    pub fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::constant(R::one())
    }

    pub fn constant(c: R) -> Self {
        Self::term(TraceMonomial::one(), c)
    }

    pub fn term(m: TraceMonomial, c: R) -> Self {
        let mut out = Self::zero();
        out.add_term(m, c);
        out
    }

    pub fn monomial(m: TraceMonomial) -> Self {
        Self::term(m, R::one())
    }

    /// `u^k`.
    pub fn u(k: u32) -> Self {
        Self::monomial(TraceMonomial::u(k))
    }

    /// `v_l`.
    pub fn v(l: u32) -> Self {
        Self::monomial(TraceMonomial::v(l))
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (TraceMonomial, R)>) -> Self {
        let mut out = Self::zero();
        for (m, c) in terms {
            out.add_term(m, c);
        }
        out
    }

    /// Accumulates `c·m`, dropping the entry if it cancels.
    pub fn add_term(&mut self, m: TraceMonomial, c: R) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&m) {
            None => {
                self.terms.insert(m, c);
            }
            Some(old) => {
                let sum = old + c;
                if !sum.is_zero() {
                    self.terms.insert(m, sum);
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TraceMonomial, &R)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (TraceMonomial, R)> {
        self.terms.into_iter()
    }

    pub fn coeff(&self, m: &TraceMonomial) -> R {
        self.terms.get(m).cloned().unwrap_or_else(R::zero)
    }

    pub fn scale(&self, c: &R) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, a)| (m.clone(), a.clone() * c.clone())))
    }

    pub fn map_coeffs<S: Scalar>(&self, f: impl Fn(&R) -> S) -> TracePolynomial<S> {
        TracePolynomial::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }

    pub fn map_monomials(&self, f: impl Fn(&TraceMonomial) -> TraceMonomial) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, c)| (f(m), c.clone())))
    }

    /// Independent of `u`.
    pub fn is_scalar(&self) -> bool {
        self.terms.keys().all(TraceMonomial::is_scalar)
    }

    /// Largest trace degree present, `None` for zero.
    pub fn max_grade(&self) -> Option<u32> {
        self.terms.keys().map(TraceMonomial::trace_degree).max()
    }

    pub fn grades(&self) -> Vec<u32> {
        let mut gs: Vec<u32> = self.terms.keys().map(TraceMonomial::trace_degree).collect();
        gs.sort_unstable();
        gs.dedup();
        gs
    }

    /// The homogeneous component of trace degree `k`.
    pub fn grade_part(&self, k: u32) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.trace_degree() == k)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn is_homogeneous(&self, k: u32) -> bool {
        self.terms.keys().all(|m| m.trace_degree() == k)
    }

    /// Trace evaluation: `v_j ↦ values[j-1]`, `u` left free.
    pub fn trace_eval(&self, values: &[R]) -> Result<SingleVarPoly<R>> {
        let mut coeffs: Vec<R> = Vec::new();
        for (m, c) in &self.terms {
            let mut acc = c.clone();
            for (l, mult) in m.traces() {
                let value = values
                    .get(l as usize - 1)
                    .ok_or(Error::MissingTraceValue(l))?;
                for _ in 0..mult {
                    acc = acc * value.clone();
                }
            }
            let k = m.u_power() as usize;
            if coeffs.len() <= k {
                coeffs.resize(k + 1, R::zero());
            }
            coeffs[k] = coeffs[k].clone() + acc;
        }
        Ok(SingleVarPoly::new(Var::U, coeffs))
    }

    /// The map that sets every trace variable to 1.
    pub fn trace_eval_ones(&self) -> SingleVarPoly<R> {
        let ones = vec![R::one(); self.max_trace_power() as usize];
        self.trace_eval(&ones).expect("every trace power supplied")
    }

    /// Sum of the coefficients: the value at `u = 1, v = 1`.
    pub fn eval_ones(&self) -> R {
        self.terms.values().fold(R::zero(), |acc, c| acc + c.clone())
    }

    pub fn max_trace_power(&self) -> u32 {
        self.terms
            .keys()
            .filter_map(|m| m.traces().next_back().map(|(l, _)| l))
            .max()
            .unwrap_or(0)
    }
}

impl<R: Scalar + ToComplex> TracePolynomial<R> {
    pub fn to_complex(&self) -> TracePolynomial<Complex64> {
        self.map_coeffs(ToComplex::to_complex)
    }

    /// `p_N(U) = p(U, tr U, tr U², …)` with the normalized trace.
    pub fn evaluate_matrix(&self, u: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        let n = u.nrows();
        if n == 0 || u.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: "nonempty square matrix".into(),
                got: format!("{}x{}", u.nrows(), u.ncols()),
            });
        }
        let max_u = self.terms.keys().map(|m| m.u_power()).max().unwrap_or(0);
        let max_pow = max_u.max(self.max_trace_power()) as usize;
        let mut powers = Vec::with_capacity(max_pow + 1);
        powers.push(DMatrix::<Complex64>::identity(n, n));
        for i in 1..=max_pow {
            let next = &powers[i - 1] * u;
            powers.push(next);
        }
        let inv_n = 1.0 / n as f64;
        let traces: Vec<Complex64> = powers.iter().map(|p| p.trace() * inv_n).collect();

        let mut out = DMatrix::<Complex64>::zeros(n, n);
        for (m, c) in &self.terms {
            let mut scalar = c.to_complex();
            for (l, mult) in m.traces() {
                scalar *= traces[l as usize].powu(mult);
            }
            out.zip_apply(&powers[m.u_power() as usize], |o, p| *o += scalar * p);
        }
        Ok(out)
    }
}

impl<R: Scalar> Default for TracePolynomial<R> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<R: Scalar> Add for &TracePolynomial<R> {
    type Output = TracePolynomial<R>;
    fn add(self, rhs: &TracePolynomial<R>) -> TracePolynomial<R> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<R: Scalar> Add for TracePolynomial<R> {
    type Output = TracePolynomial<R>;
    fn add(mut self, rhs: TracePolynomial<R>) -> TracePolynomial<R> {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl<R: Scalar> Sub for &TracePolynomial<R> {
    type Output = TracePolynomial<R>;
    fn sub(self, rhs: &TracePolynomial<R>) -> TracePolynomial<R> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl<R: Scalar> Sub for TracePolynomial<R> {
    type Output = TracePolynomial<R>;
    fn sub(self, rhs: TracePolynomial<R>) -> TracePolynomial<R> {
        &self - &rhs
    }
}

impl<R: Scalar> Mul for &TracePolynomial<R> {
    type Output = TracePolynomial<R>;
    fn mul(self, rhs: &TracePolynomial<R>) -> TracePolynomial<R> {
        let mut out = TracePolynomial::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<R: Scalar> Mul for TracePolynomial<R> {
    type Output = TracePolynomial<R>;
    fn mul(self, rhs: TracePolynomial<R>) -> TracePolynomial<R> {
        &self * &rhs
    }
}

impl<R: Scalar> Neg for TracePolynomial<R> {
    type Output = TracePolynomial<R>;
    fn neg(self) -> TracePolynomial<R> {
        TracePolynomial {
            terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect(),
        }
    }
}

impl<R: Scalar> Zero for TracePolynomial<R> {
    fn zero() -> Self {
        TracePolynomial::zero()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl<R: Scalar> One for TracePolynomial<R> {
    fn one() -> Self {
        TracePolynomial::one()
    }
}

impl<R: Scalar + fmt::Display> fmt::Display for TracePolynomial<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                if m.is_one() {
                    format!("({c})")
                } else if c.is_one() {
                    m.to_string()
                } else {
                    format!("({c})*{m}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl<R: Scalar + JsonCoeff> TracePolynomial<R> {
    /// `{"terms":[{"u":k,"traces":{"l":m,…},"coeff":…}]}`, terms in
    /// monomial order.
    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let traces: Map<String, Value> = m
                    .traces()
                    .map(|(l, mult)| (l.to_string(), json!(mult)))
                    .collect();
                json!({ "u": m.u_power(), "traces": traces, "coeff": c.to_json() })
            })
            .collect();
        json!({ "terms": terms })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("trace polynomial JSON: {what}"));
        let terms = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing \"terms\" array"))?;
        let mut out = Self::zero();
        for term in terms {
            let u = term
                .get("u")
                .and_then(Value::as_u64)
                .ok_or_else(|| bad("term without integer \"u\""))? as u32;
            let mut factors = Vec::new();
            if let Some(traces) = term.get("traces") {
                let traces = traces.as_object().ok_or_else(|| bad("\"traces\" not an object"))?;
                for (l, m) in traces {
                    let l: u32 = l.parse().map_err(|_| bad("trace power not an integer"))?;
                    if l == 0 {
                        return Err(bad("trace power 0"));
                    }
                    let m = m.as_u64().ok_or_else(|| bad("multiplicity not an integer"))? as u32;
                    factors.push((l, m));
                }
            }
            let coeff = R::from_json(term.get("coeff").ok_or_else(|| bad("term without \"coeff\""))?)?;
            out.add_term(TraceMonomial::from_factors(u, factors), coeff);
        }
        Ok(out)
    }
}

impl<R: Scalar + JsonCoeff> Serialize for TracePolynomial<R> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de, R: Scalar + JsonCoeff> Deserialize<'de> for TracePolynomial<R> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(deserializer)?;
        Self::from_json(&v).map_err(serde::de::Error::custom)
    }
}

/// `u² − 2u·v₁ + 2v₁² − v₂`, which vanishes identically on `U(2)` by
/// Cayley–Hamilton but not on `U(N)` for `N > 2`.
pub fn cayley_hamilton_u2<R: Scalar>() -> TracePolynomial<R> {
    TracePolynomial::from_terms([
        (TraceMonomial::u(2), R::one()),
        (TraceMonomial::new(1, &[1]), R::from_int(-2)),
        (TraceMonomial::new(0, &[1, 1]), R::from_int(2)),
        (TraceMonomial::v(2), R::from_int(-1)),
    ])
}
