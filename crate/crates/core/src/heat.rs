//! The heat semigroup on trace polynomials.
//!
//! In the large-N limit `e^{t𝒟/2}` acts on grade `k` as
//! `e^{−kt/2}·e^{t𝒟̃/2}`, and `e^{t𝒟̃/2}` has polynomial-in-`t` output. The
//! [`HeatEngine`] computes it on `u^k` and `v_k` by the integral recursion
//!
//! ```text
//! E(u^k) = u^k − Σ_{m=1}^{k−1} m ∫₀ᵗ E(u^m)·E(v_{k−m}) ds
//! E(v_k) = v_k − Σ_{m=1}^{k−1} m ∫₀ᵗ E(v_m)·E(v_{k−m}) ds
//! ```
//!
//! and extends it multiplicatively across scalar factors, which is exact
//! because `𝒟` is a derivation there. At finite N the grade blocks of
//! `𝒟_N` are exponentiated numerically.

use std::collections::HashMap;
use std::fmt;
use std::sync::RwLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::exppoly::{fmt_rate, ExpPoly};
use crate::monomial::TraceMonomial;
use crate::ops::{coords_in, operator_matrix, GradedOperatorMatrix, OperatorTag};
use crate::poly::TracePolynomial;
use crate::scalar::{Rational, Scalar, ToComplex};
use crate::single_var::{SingleVarPoly, Var};
use crate::tpoly::TPoly;

/// Largest grade [`heat_finite_n`] exponentiates by default (block
/// dimension 272).
pub const DEFAULT_BLOCK_CAP: u32 = 12;

/// `Σ_k e^{−kt/2}·r_k(t, u, v)` with each `r_k` homogeneous of grade `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct SemigroupValue {
    components: Vec<(u32, TracePolynomial<TPoly>)>,
}

impl SemigroupValue {
    /// Builds from `(grade, body)` pairs; bodies of equal grade are summed and
    /// zero bodies dropped.
    pub fn new(components: impl IntoIterator<Item = (u32, TracePolynomial<TPoly>)>) -> Self {
        let mut by_grade: std::collections::BTreeMap<u32, TracePolynomial<TPoly>> = Default::default();
        for (k, body) in components {
            let slot = by_grade.entry(k).or_default();
            *slot = &*slot + &body;
        }
        Self {
            components: by_grade.into_iter().filter(|(_, b)| !b.is_zero()).collect(),
        }
    }

    pub fn components(&self) -> &[(u32, TracePolynomial<TPoly>)] {
        &self.components
    }

    pub fn body(&self, k: u32) -> TracePolynomial<TPoly> {
        self.components
            .iter()
            .find(|(g, _)| *g == k)
            .map(|(_, b)| b.clone())
            .unwrap_or_default()
    }

    /// Bodies with a rational time substituted; the decays stay implicit.
    pub fn bodies_at(&self, t: &Rational) -> Vec<(u32, TracePolynomial<Rational>)> {
        self.components
            .iter()
            .map(|(k, b)| (*k, b.map_coeffs(|c| c.eval(t))))
            .collect()
    }

    /// The full value at a numeric time, decays included.
    pub fn evaluate(&self, t: f64) -> TracePolynomial<Complex64> {
        let mut out = TracePolynomial::zero();
        for (k, body) in &self.components {
            let decay = (-(*k as f64) * t / 2.0).exp();
            for (m, c) in body.terms() {
                out.add_term(m.clone(), Complex64::new(decay * c.eval_f64(t), 0.0));
            }
        }
        out
    }

    /// `π₀` of the value: every trace variable set to 1, as a polynomial in
    /// `z` with exponential-polynomial coefficients.
    pub fn trace_eval_ones(&self) -> SingleVarPoly<ExpPoly> {
        let mut out = SingleVarPoly::zero_in(Var::Z);
        for (k, body) in &self.components {
            let rate = -(*k as i64);
            let reduced = body.trace_eval_ones().map_coeffs(|c| ExpPoly::new(rate, c.clone()));
            out = &out + &reduced.with_var(Var::Z);
        }
        out
    }

    /// `{"grades":[{"k":2,"decay":"1","body":{…}}]}`; `decay` is `k/2`.
    pub fn to_json(&self) -> Value {
        let grades: Vec<Value> = self
            .components
            .iter()
            .map(|(k, body)| {
                json!({
                    "k": k,
                    "decay": Rational::new((*k).into(), 2.into()).to_string(),
                    "body": body.to_json(),
                })
            })
            .collect();
        json!({ "grades": grades })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("semigroup JSON: {what}"));
        let grades = v
            .get("grades")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing \"grades\" array"))?;
        let mut components = Vec::new();
        for g in grades {
            let k = g.get("k").and_then(Value::as_u64).ok_or_else(|| bad("grade without \"k\""))? as u32;
            let body = TracePolynomial::<TPoly>::from_json(g.get("body").ok_or_else(|| bad("grade without \"body\""))?)?;
            if !body.is_homogeneous(k) {
                return Err(bad("body not homogeneous of its grade"));
            }
            components.push((k, body));
        }
        Ok(Self::new(components))
    }
}

impl fmt::Display for SemigroupValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .components
            .iter()
            .map(|(k, body)| {
                if *k == 0 {
                    format!("({body})")
                } else {
                    format!("{}·({body})", fmt_rate(-(*k as i64)))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Which generator family a memo entry belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    U,
    V,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::U => "u",
            Kind::V => "v",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "u" => Some(Kind::U),
            "v" => Some(Kind::V),
            _ => None,
        }
    }
}

/// Large-N heat semigroup with a memo of `e^{t𝒟̃/2}(u^k)` and
/// `e^{t𝒟̃/2}(v_k)`. Entries are immutable once inserted, so concurrent
/// readers never observe partial values.
#[derive(Debug, Default)]
pub struct HeatEngine {
    memo: RwLock<HashMap<(Kind, u32), TracePolynomial<TPoly>>>,
}

impl HeatEngine {
    pub fn new() -> Self {
        Self::default()
    }

    /// Seeds the memo, e.g. from a cache file. Entries must be homogeneous of
    /// their grade.
    pub fn from_entries(entries: impl IntoIterator<Item = ((Kind, u32), TracePolynomial<TPoly>)>) -> Result<Self> {
        let mut memo = HashMap::new();
        for ((kind, k), body) in entries {
            if !body.is_homogeneous(k) {
                return Err(Error::InvalidConfig(format!(
                    "cached entry {}{k} is not homogeneous of grade {k}",
                    kind.as_str()
                )));
            }
            memo.insert((kind, k), body);
        }
        Ok(Self {
            memo: RwLock::new(memo),
        })
    }

    /// Memo contents sorted by key.
    pub fn entries(&self) -> Vec<((Kind, u32), TracePolynomial<TPoly>)> {
        let memo = self.memo.read().expect("memo poisoned");
        let mut out: Vec<_> = memo.iter().map(|(k, v)| (*k, v.clone())).collect();
        out.sort_by_key(|(k, _)| *k);
        out
    }

    fn get(&self, kind: Kind, k: u32) -> TracePolynomial<TPoly> {
        if k == 0 {
            return TracePolynomial::one();
        }
        if let Some(p) = self.memo.read().expect("memo poisoned").get(&(kind, k)) {
            return p.clone();
        }
        let value = self.compute(kind, k);
        self.memo
            .write()
            .expect("memo poisoned")
            .entry((kind, k))
            .or_insert(value)
            .clone()
    }

    fn compute(&self, kind: Kind, k: u32) -> TracePolynomial<TPoly> {
        let mut acc = match kind {
            Kind::U => TracePolynomial::u(k),
            Kind::V => TracePolynomial::v(k),
        };
        for m in 1..k {
            let prod = &self.get(kind, m) * &self.get(Kind::V, k - m);
            let integral = prod.map_coeffs(|c| c.integrate().scale(&Rational::from_int(m as i64)));
            acc = &acc - &integral;
        }
        acc
    }

    /// `e^{t𝒟̃/2}(u^k)`.
    pub fn tilde_exp_u(&self, k: u32) -> TracePolynomial<TPoly> {
        self.get(Kind::U, k)
    }

    /// `e^{t𝒟̃/2}(v_k)`.
    pub fn tilde_exp_v(&self, k: u32) -> TracePolynomial<TPoly> {
        self.get(Kind::V, k)
    }

    pub fn tilde_exp_monomial(&self, m: &TraceMonomial) -> TracePolynomial<TPoly> {
        let mut out = self.tilde_exp_u(m.u_power());
        for (l, mult) in m.traces() {
            let factor = self.tilde_exp_v(l);
            for _ in 0..mult {
                out = &out * &factor;
            }
        }
        out
    }

    /// `e^{t𝒟/2} p` with symbolic `t`.
    pub fn heat_limit(&self, p: &TracePolynomial<Rational>) -> SemigroupValue {
        SemigroupValue::new(p.terms().map(|(m, c)| {
            let image = self.tilde_exp_monomial(m).scale(&TPoly::constant(c.clone()));
            (m.trace_degree(), image)
        }))
    }

    /// `π₀ ∘ e^{t𝒟/2}` on an arbitrary trace polynomial.
    pub fn limit_transform(&self, p: &TracePolynomial<Rational>) -> SingleVarPoly<ExpPoly> {
        self.heat_limit(p).trace_eval_ones()
    }

    /// `𝒢^t(u^k) = e^{−kt/2}·π₀ e^{t𝒟̃/2}(u^k)`.
    pub fn transform_u_power(&self, k: u32) -> SingleVarPoly<ExpPoly> {
        let rate = -(k as i64);
        self.tilde_exp_u(k)
            .trace_eval_ones()
            .map_coeffs(|c| ExpPoly::new(rate, c.clone()))
            .with_var(Var::Z)
    }

    /// The free Hall transform `p ↦ q_t` on polynomials in `u` whose
    /// coefficients may themselves depend on `t`.
    pub fn free_hall_transform(&self, p: &SingleVarPoly<ExpPoly>) -> SingleVarPoly<ExpPoly> {
        let mut out = SingleVarPoly::zero_in(Var::Z);
        for (k, c) in p.coeffs().iter().enumerate() {
            if !c.is_zero() {
                out = &out + &self.transform_u_power(k as u32).scale(c);
            }
        }
        out
    }

    pub fn free_hall_rational(&self, p: &SingleVarPoly<Rational>) -> SingleVarPoly<ExpPoly> {
        self.free_hall_transform(&p.map_coeffs(|c| ExpPoly::constant(c.clone())))
    }

    /// The transform at a numeric time, for inputs with float coefficients.
    pub fn free_hall_numeric(&self, p: &SingleVarPoly<Complex64>, t: f64) -> SingleVarPoly<Complex64> {
        let mut out = SingleVarPoly::zero_in(Var::Z);
        for (k, c) in p.coeffs().iter().enumerate() {
            if *c != Complex64::zero() {
                let image = self.transform_u_power(k as u32).eval_at_time(t);
                out = &out + &image.scale(c);
            }
        }
        out
    }

    /// Solves `𝒢^t(p) = q` by back-substitution from the top degree. The
    /// image of `u^d` is `e^{−dt/2} z^d` plus lower terms, so each step
    /// divides by an exponential unit.
    pub fn inverse_free_hall(&self, q: &SingleVarPoly<ExpPoly>) -> SingleVarPoly<ExpPoly> {
        let mut residual = q.clone().with_var(Var::Z);
        let mut coeffs = vec![ExpPoly::zero(); q.coeffs().len()];
        while let Some(d) = residual.degree() {
            let a = residual.coeff(d) * ExpPoly::exp_half(d as i64);
            residual = &residual - &self.transform_u_power(d as u32).scale(&a);
            debug_assert!(residual.degree().map_or(true, |r| r < d));
            coeffs[d] = a;
        }
        SingleVarPoly::new(Var::U, coeffs)
    }

    /// `ν_k(t)`, the large-N limit of `E[tr U^k]` under `ρ_t`.
    pub fn biane_moment(&self, k: u32) -> ExpPoly {
        ExpPoly::new(-(k as i64), self.tilde_exp_v(k).eval_ones())
    }

    pub fn moment_table(&self, kmax: u32) -> MomentTable {
        MomentTable {
            bodies: (1..=kmax).map(|k| self.tilde_exp_v(k).eval_ones()).collect(),
        }
    }
}

/// `ν_k(t) = e^{−kt/2}·b_k(t)` for `k = 1..=kmax`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentTable {
    bodies: Vec<TPoly>,
}

impl MomentTable {
    pub fn kmax(&self) -> u32 {
        self.bodies.len() as u32
    }

    /// Body `b_k`; `k` starts at 1.
    pub fn body(&self, k: u32) -> &TPoly {
        &self.bodies[k as usize - 1]
    }

    pub fn moment(&self, k: u32) -> ExpPoly {
        ExpPoly::new(-(k as i64), self.body(k).clone())
    }

    pub fn eval(&self, k: u32, t: f64) -> f64 {
        (-(k as f64) * t / 2.0).exp() * self.body(k).eval_f64(t)
    }
}

/// `e^{t𝒟̃/2}` on grade `k` as the finite sum `Σ_{n≤k} (t/2)^n 𝒟̃^n / n!`,
/// entries in `ℚ[t]`. The returned matrix is tagged [`OperatorTag::DTilde`]
/// but holds the exponential, not the generator.
pub fn nilpotent_exp_oracle(k: u32) -> Result<GradedOperatorMatrix<TPoly>> {
    let generator = operator_matrix::<Rational>(OperatorTag::DTilde, k)?;
    let dim = generator.dim();
    let mut power = DenseMatrix::<Rational>::identity(dim);
    let mut entries = DenseMatrix::<TPoly>::zeros(dim, dim);
    let mut factorial = Rational::one();
    for n in 0..=k {
        if n > 0 {
            power = power.matmul(&generator.entries);
            factorial = factorial * Rational::from_int(2 * n as i64);
        }
        if power.is_zero() {
            break;
        }
        for i in 0..dim {
            for j in 0..dim {
                let c = &power[(i, j)];
                if !c.is_zero() {
                    let term = TPoly::monomial(c / &factorial, n as usize);
                    entries[(i, j)] = &entries[(i, j)] + &term;
                }
            }
        }
    }
    if !power.is_zero() && !power.matmul(&generator.entries).is_zero() {
        return Err(Error::NilpotencyFailure(k));
    }
    Ok(GradedOperatorMatrix {
        grade: k,
        tag: OperatorTag::DTilde,
        basis: generator.basis,
        entries,
    })
}

fn block_exponential(k: u32, t: f64, n: u32) -> Result<(Vec<TraceMonomial>, DMatrix<f64>)> {
    let op = operator_matrix::<f64>(OperatorTag::DN(n), k)?;
    let dim = op.dim();
    let a = DMatrix::from_fn(dim, dim, |i, j| op.entries[(i, j)] * t / 2.0);
    Ok((op.basis, a.exp()))
}

/// `e^{t𝒟_N/2} p` with numeric `t`, exponentiating each grade block.
pub fn heat_finite_n<R: Scalar + ToComplex>(
    p: &TracePolynomial<R>,
    t: f64,
    n: u32,
    cap: u32,
) -> Result<TracePolynomial<Complex64>> {
    if n == 0 {
        return Err(Error::ZeroN);
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidConfig(format!("time must be non-negative, got {t}")));
    }
    let p = p.to_complex();
    let mut out = TracePolynomial::zero();
    for k in p.grades() {
        if k > cap {
            return Err(Error::GradeTooLarge { grade: k, cap });
        }
        let (basis, e) = block_exponential(k, t, n)?;
        let coords = coords_in(&basis, k, &p.grade_part(k))?;
        for (i, m) in basis.iter().enumerate() {
            let c: Complex64 = (0..basis.len()).map(|j| coords[j] * e[(i, j)]).sum();
            out.add_term(m.clone(), c);
        }
    }
    Ok(out)
}

/// `E_{ρ_t^N}[p]` for a scalar trace polynomial: the heat flow evaluated at
/// the identity.
pub fn expect_finite<R: Scalar + ToComplex>(p: &TracePolynomial<R>, t: f64, n: u32) -> Result<Complex64> {
    if !p.is_scalar() {
        return Err(Error::NotScalar);
    }
    Ok(heat_finite_n(p, t, n, DEFAULT_BLOCK_CAP)?.eval_ones())
}

/// `E[tr(U^k)²] − E[tr U^k]²` under `ρ_t^N`. This is the holomorphic
/// variance, so it may be negative.
pub fn variance_finite(k: u32, t: f64, n: u32) -> Result<f64> {
    let v = TracePolynomial::<Rational>::v(k);
    let second = expect_finite(&(&v * &v), t, n)?;
    let first = expect_finite(&v, t, n)?;
    Ok((second - first * first).re)
}

/// Numeric value of an `e^{−kt/2}`-weighted grade block at time `t`, used
/// to compare finite-N output against the limit.
pub fn limit_grade_at(value: &SemigroupValue, k: u32, t: f64) -> TracePolynomial<Complex64> {
    let decay = (-(k as f64) * t / 2.0).exp();
    value
        .body(k)
        .map_coeffs(|c| Complex64::new(decay * c.eval_f64(t), 0.0))
}

/// `e^{t'𝒟̃/2}` applied to a rational trace polynomial at a rational time,
/// per grade; used to check the semigroup law on bodies.
pub fn tilde_heat_at(engine: &HeatEngine, p: &TracePolynomial<Rational>, t: &Rational) -> TracePolynomial<Rational> {
    let mut out = TracePolynomial::zero();
    for (_, body) in engine.heat_limit(p).bodies_at(t) {
        out = &out + &body;
    }
    out
}

/// The grade-`k` basis exponentiated by `nilpotent_exp_oracle`, applied to
/// a monomial; convenience for oracle comparisons.
pub fn oracle_image(oracle: &GradedOperatorMatrix<TPoly>, m: &TraceMonomial) -> Result<TracePolynomial<TPoly>> {
    oracle.apply(&TracePolynomial::monomial(m.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn tp(c: &[(i64, i64)]) -> TPoly {
        TPoly::new(c.iter().map(|&(n, d)| q(n, d)).collect())
    }

    #[test]
    fn base_cases_and_u_squared() {
        let e = HeatEngine::new();
        assert_eq!(e.tilde_exp_u(1), TracePolynomial::u(1));
        let expect = TracePolynomial::from_terms([
            (TraceMonomial::u(2), TPoly::one()),
            (TraceMonomial::new(1, &[1]), -TPoly::t()),
        ]);
        assert_eq!(e.tilde_exp_u(2), expect);
    }

    #[test]
    fn u_cubed() {
        let e = HeatEngine::new();
        let expect = TracePolynomial::from_terms([
            (TraceMonomial::u(3), TPoly::one()),
            (TraceMonomial::new(2, &[1]), tp(&[(0, 1), (-2, 1)])),
            (TraceMonomial::new(1, &[2]), tp(&[(0, 1), (-1, 1)])),
            (TraceMonomial::new(1, &[1, 1]), tp(&[(0, 1), (0, 1), (3, 2)])),
        ]);
        assert_eq!(e.tilde_exp_u(3), expect);
    }

    #[test]
    fn moments() {
        let e = HeatEngine::new();
        assert_eq!(e.biane_moment(1), ExpPoly::exp_half(-1));
        assert_eq!(e.biane_moment(2), ExpPoly::new(-2, tp(&[(1, 1), (-1, 1)])));
        assert_eq!(e.biane_moment(4), ExpPoly::new(-4, tp(&[(1, 1), (-6, 1), (8, 1), (-8, 3)])));
    }

    #[test]
    fn transform_and_inverse_small() {
        let e = HeatEngine::new();
        let q2 = e.free_hall_rational(&SingleVarPoly::monomial(Var::U, 2, Rational::one()));
        assert_eq!(q2.coeff(2), ExpPoly::exp_half(-2));
        assert_eq!(q2.coeff(1), ExpPoly::new(-2, -TPoly::t()));

        let z2 = SingleVarPoly::monomial(Var::Z, 2, ExpPoly::one());
        let p = e.inverse_free_hall(&z2);
        assert_eq!(p.coeff(2), ExpPoly::exp_half(2));
        assert_eq!(p.coeff(1), ExpPoly::new(1, TPoly::t()));
        assert_eq!(p.var(), Var::U);
    }

    #[test]
    fn oracle_grade_two() {
        let oracle = nilpotent_exp_oracle(2).unwrap();
        let image = oracle_image(&oracle, &TraceMonomial::u(2)).unwrap();
        assert_eq!(image, HeatEngine::new().tilde_exp_u(2));
        let id = nilpotent_exp_oracle(1).unwrap();
        assert_eq!(id.entries, DenseMatrix::identity(2));
    }

    #[test]
    fn finite_n_u_squared_closed_form() {
        let p = TracePolynomial::<Rational>::u(2);
        for &(t, n) in &[(1.0, 2u32), (0.25, 8)] {
            let out = heat_finite_n(&p, t, n, DEFAULT_BLOCK_CAP).unwrap();
            let x = t / n as f64;
            let a = (-t).exp() * x.cosh();
            let b = -(-t).exp() * n as f64 * x.sinh();
            assert!((out.coeff(&TraceMonomial::u(2)).re - a).abs() < 1e-13);
            assert!((out.coeff(&TraceMonomial::new(1, &[1])).re - b).abs() < 1e-13);
        }
    }

    #[test]
    fn finite_expectations() {
        let v2 = TracePolynomial::<Rational>::v(2);
        let e = expect_finite(&v2, 1.0, 2).unwrap();
        let closed = (-1.0f64).exp() * (0.5f64.cosh() - 2.0 * 0.5f64.sinh());
        assert!((e.re - closed).abs() < 1e-13, "{e}");
        assert!(matches!(expect_finite(&TracePolynomial::<Rational>::u(1), 1.0, 2), Err(Error::NotScalar)));
        assert!(variance_finite(2, 0.0, 5).unwrap().abs() < 1e-15);
        let cap = heat_finite_n(&TracePolynomial::<Rational>::u(3), 1.0, 2, 2);
        assert!(matches!(cap, Err(Error::GradeTooLarge { grade: 3, cap: 2 })));
    }

    #[test]
    fn json_round_trip() {
        let e = HeatEngine::new();
        let v = e.heat_limit(&(&TracePolynomial::u(2) + &TracePolynomial::v(1)));
        let json = v.to_json();
        assert_eq!(json["grades"][0]["decay"], "1/2");
        assert_eq!(json["grades"][1]["decay"], "1");
        assert_eq!(SemigroupValue::from_json(&json).unwrap(), v);
        assert_eq!(v.to_string(), "e^{-t/2}·(v1) + e^{-t}·(u^2 + (-t)*u*v1)");
    }
}
