//! Exponential polynomials `Σ_r e^{r t/2} b_r(t)` with [`TPoly`] bodies.
//!
//! This ring holds every coefficient produced by the large-N transforms and
//! their inverses: decays `e^{-kt/2}` from the heat semigroup, growths
//! `e^{+kt/2}` from inverting it. Whole half-integer rates keep it exact.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::scalar::{Rational, Scalar};
use crate::single_var::SingleVarPoly;
use crate::tpoly::TPoly;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ExpPoly {
    /// rate `r` (meaning `e^{r t/2}`) → nonzero body.
    parts: BTreeMap<i64, TPoly>,
}

impl ExpPoly {
    /// `e^{rate·t/2} · body`.
    pub fn new(rate: i64, body: TPoly) -> Self {
        let mut parts = BTreeMap::new();
        if !body.is_zero() {
            parts.insert(rate, body);
        }
        Self { parts }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(0, TPoly::constant(c))
    }

    pub fn from_tpoly(body: TPoly) -> Self {
        Self::new(0, body)
    }

    /// `e^{rate·t/2}`.
    pub fn exp_half(rate: i64) -> Self {
        Self::new(rate, TPoly::one())
    }

    pub fn parts(&self) -> impl Iterator<Item = (i64, &TPoly)> {
        self.parts.iter().map(|(&r, b)| (r, b))
    }

    pub fn body(&self, rate: i64) -> TPoly {
        self.parts.get(&rate).cloned().unwrap_or_else(TPoly::zero)
    }

    /// If `self` is a single `e^{r t/2}·c` with rational `c ≠ 0`, its inverse.
    pub fn unit_inverse(&self) -> Option<Self> {
        let mut parts = self.parts.iter();
        let (&rate, body) = parts.next()?;
        if parts.next().is_some() || body.degree() != Some(0) {
            return None;
        }
        let c = body.coeff(0);
        Some(Self::new(-rate, TPoly::constant(Rational::one() / c)))
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        self.parts
            .iter()
            .map(|(&r, b)| (r as f64 * t / 2.0).exp() * b.eval_f64(t))
            .fold(0.0, |acc, x| acc + x)
    }

    pub fn eval_complex(&self, t: f64) -> Complex64 {
        Complex64::new(self.eval_f64(t), 0.0)
    }

    fn insert_add(&mut self, rate: i64, body: TPoly) {
        let slot = self.parts.entry(rate).or_insert_with(TPoly::zero);
        *slot = &*slot + &body;
        if slot.is_zero() {
            self.parts.remove(&rate);
        }
    }
}

/// Renders `e^{r t/2}` in lowest terms: `e^{-t}`, `e^{-3t/2}`, `e^{2t}`.
pub fn fmt_rate(rate: i64) -> String {
    let (num, den) = if rate % 2 == 0 { (rate / 2, 1) } else { (rate, 2) };
    let sign = if num < 0 { "-" } else { "" };
    let mag = num.unsigned_abs();
    let head = if mag == 1 { String::new() } else { mag.to_string() };
    if den == 1 {
        format!("e^{{{sign}{head}t}}")
    } else {
        format!("e^{{{sign}{head}t/{den}}}")
    }
}

/// Renders `e^{x}` for a rational exponent; `x = 0` gives the empty string.
pub fn fmt_exponent(x: &Rational) -> String {
    if x.is_zero() {
        String::new()
    } else {
        format!("e^{{{x}}}")
    }
}

/// Regroups `Σ_d c_d x^d` as `Σ_r e^{r t/2}·(Σ_d b_{d,r}(t) x^d)`, fastest
/// growth first.
pub fn split_by_rate(p: &SingleVarPoly<ExpPoly>) -> Vec<(i64, SingleVarPoly<TPoly>)> {
    let mut groups: BTreeMap<i64, Vec<TPoly>> = BTreeMap::new();
    let len = p.coeffs().len();
    for (d, c) in p.coeffs().iter().enumerate() {
        for (rate, body) in c.parts() {
            groups.entry(rate).or_insert_with(|| vec![TPoly::zero(); len])[d] = body.clone();
        }
    }
    groups
        .into_iter()
        .rev()
        .map(|(rate, coeffs)| (rate, SingleVarPoly::new(p.var(), coeffs)))
        .collect()
}

/// Exact value at a rational time as `Σ e^{x}·(polynomial)`, one group per
/// distinct exponent `x = r t/2`, largest first. Empty groups are dropped.
pub fn split_at_time(p: &SingleVarPoly<ExpPoly>, t: &Rational) -> Vec<(Rational, SingleVarPoly<Rational>)> {
    let mut groups: Vec<(Rational, SingleVarPoly<Rational>)> = Vec::new();
    for (rate, body) in split_by_rate(p) {
        let x = Rational::from_int(rate) * t / Rational::from_int(2);
        let value = body.map_coeffs(|b| b.eval(t));
        match groups.iter_mut().find(|(y, _)| *y == x) {
            Some((_, acc)) => *acc = &*acc + &value,
            None => groups.push((x, value)),
        }
    }
    groups.retain(|(_, v)| !v.is_zero());
    groups.sort_by(|a, b| b.0.cmp(&a.0));
    groups
}

/// `e^{-1}·(z^2 + (-1)·z) + …` for the output of [`split_at_time`].
pub fn fmt_at_time(groups: &[(Rational, SingleVarPoly<Rational>)]) -> String {
    if groups.is_empty() {
        return "0".into();
    }
    groups
        .iter()
        .map(|(x, body)| match fmt_exponent(x) {
            e if e.is_empty() => format!("{body}"),
            e => format!("{e}·({body})"),
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

/// Same three-step rendering for the symbolic groups of [`split_by_rate`].
pub fn fmt_by_rate(groups: &[(i64, SingleVarPoly<TPoly>)]) -> String {
    if groups.is_empty() {
        return "0".into();
    }
    groups
        .iter()
        .map(|(rate, body)| match rate {
            0 => format!("{body}"),
            r => format!("{}·({body})", fmt_rate(*r)),
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

impl Zero for ExpPoly {
    fn zero() -> Self {
        Self::default()
    }

    fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }
}

impl One for ExpPoly {
    fn one() -> Self {
        Self::exp_half(0)
    }
}

impl Add for ExpPoly {
    type Output = ExpPoly;
    fn add(mut self, rhs: ExpPoly) -> ExpPoly {
        for (r, b) in rhs.parts {
            self.insert_add(r, b);
        }
        self
    }
}

impl Sub for ExpPoly {
    type Output = ExpPoly;
    fn sub(self, rhs: ExpPoly) -> ExpPoly {
        self + (-rhs)
    }
}

impl Mul for ExpPoly {
    type Output = ExpPoly;
    fn mul(self, rhs: ExpPoly) -> ExpPoly {
        let mut out = ExpPoly::zero();
        for (ra, a) in &self.parts {
            for (rb, b) in &rhs.parts {
                out.insert_add(ra + rb, a * b);
            }
        }
        out
    }
}

impl Neg for ExpPoly {
    type Output = ExpPoly;
    fn neg(self) -> ExpPoly {
        ExpPoly {
            parts: self.parts.into_iter().map(|(r, b)| (r, -b)).collect(),
        }
    }
}

impl Scalar for ExpPoly {
    fn from_ratio(num: i64, den: i64) -> Self {
        ExpPoly::constant(Rational::from_ratio(num, den))
    }
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "0");
        }
        for (n, (&rate, body)) in self.parts.iter().rev().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            match (rate, body.term_count()) {
                (0, _) => write!(f, "{body}")?,
                (_, 1) if body.is_one() => write!(f, "{}", fmt_rate(rate))?,
                _ => write!(f, "{}·({body})", fmt_rate(rate))?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_add_under_multiplication() {
        let a = ExpPoly::new(-2, TPoly::t());
        let b = ExpPoly::exp_half(2);
        assert_eq!(a * b, ExpPoly::from_tpoly(TPoly::t()));
    }

    #[test]
    fn cancellation_is_exact() {
        let a = ExpPoly::new(-1, TPoly::from_ints(&[1, 3]));
        assert!((a.clone() - a).is_zero());
    }

    #[test]
    fn regrouping_by_rate() {
        use crate::single_var::Var;
        // e^{-t}(z² − t z)
        let p = SingleVarPoly::new(
            Var::Z,
            vec![ExpPoly::zero(), ExpPoly::new(-2, TPoly::from_ints(&[0, -1])), ExpPoly::exp_half(-2)],
        );
        let groups = split_by_rate(&p);
        assert_eq!(groups.len(), 1);
        assert_eq!(fmt_by_rate(&groups), "e^{-t}·(z^2 + (-t)·z)");
        let at_one = split_at_time(&p, &Rational::one());
        assert_eq!(fmt_at_time(&at_one), "e^{-1}·(z^2 + (-1)·z)");
        assert_eq!(fmt_at_time(&split_at_time(&p, &Rational::zero())), "z^2");
    }

    #[test]
    fn unit_inverse() {
        let a = ExpPoly::new(-3, TPoly::from_ints(&[2]));
        let inv = a.unit_inverse().unwrap();
        assert!((a * inv).is_one());
        assert!(ExpPoly::new(0, TPoly::t()).unit_inverse().is_none());
    }

    #[test]
    fn numeric_evaluation() {
        let a = ExpPoly::new(-2, TPoly::from_ints(&[1, -1]));
        let t: f64 = 0.7;
        assert!((a.eval_f64(t) - (-t).exp() * (1.0 - t)).abs() < 1e-15);
    }

    #[test]
    fn display_rates() {
        assert_eq!(fmt_rate(-2), "e^{-t}");
        assert_eq!(fmt_rate(-3), "e^{-3t/2}");
        assert_eq!(fmt_rate(4), "e^{2t}");
        assert_eq!(fmt_rate(-1), "e^{-t/2}");
        let a = ExpPoly::new(-2, TPoly::from_ints(&[0, -1]));
        assert_eq!(a.to_string(), "e^{-t}·(-t)");
    }
}
