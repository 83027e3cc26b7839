//! The intertwining operators on trace polynomials.
//!
//! `𝒟` is the large-N generator, `𝓛` the `1/N²` correction, and
//! `𝒟_N = 𝒟 − 𝓛/N²` satisfies `Δ_N(p_N) = (𝒟_N p)_N` on `U(N)`. `T` is the
//! grading operator (trace degree times identity) and `𝒟̃ = 𝒟 + T` drops the
//! diagonal part of `𝒟`; it strictly raises the number of trace factors,
//! hence is nilpotent on each graded block.
//!
//! All operators act term by term with integer coefficients on monomials:
//!
//! * `𝒟(u^k) = −k u^k − 2 Σ_{m<k} m u^m v_{k−m}`,
//!   `𝒟(v_k) = −k v_k − 2 Σ_{m<k} m v_m v_{k−m}`, and `𝒟` is a derivation
//!   across scalar factors.
//! * `𝓛(u^k v_{l₁}⋯v_{l_M}) = 2 Σ_{i<j} l_i l_j (v_{l_i}, v_{l_j} ↦ v_{l_i+l_j})
//!   + 2 Σ_i k l_i (u^k, v_{l_i} ↦ u^{k+l_i})`.

use std::fmt;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::monomial::{grade_basis, TraceMonomial};
use crate::poly::TracePolynomial;
use crate::scalar::Scalar;

type Action = Vec<(TraceMonomial, i64)>;

fn push_times(out: &mut Action, factor: &TraceMonomial, action: &[(TraceMonomial, i64)], scale: i64) {
    for (m, c) in action {
        out.push((m.mul(factor), c * scale));
    }
}

/// `𝒟(u^k)` (or `𝒟̃(u^k)` without the diagonal term).
fn d_u_power(k: u32, diagonal: bool) -> Action {
    let mut out = Vec::new();
    if diagonal && k > 0 {
        out.push((TraceMonomial::u(k), -(k as i64)));
    }
    for m in 1..k {
        out.push((TraceMonomial::new(m, &[k - m]), -2 * m as i64));
    }
    out
}

/// `𝒟(v_k)` (or `𝒟̃(v_k)` without the diagonal term).
fn d_trace(k: u32, diagonal: bool) -> Action {
    let mut out = Vec::new();
    if diagonal {
        out.push((TraceMonomial::v(k), -(k as i64)));
    }
    for m in 1..k {
        out.push((TraceMonomial::new(0, &[m, k - m]), -2 * m as i64));
    }
    out
}

fn d_monomial(mono: &TraceMonomial, diagonal: bool) -> Action {
    let mut out = Vec::new();
    let scalar = mono.scalar_part();
    push_times(&mut out, &scalar, &d_u_power(mono.u_power(), diagonal), 1);
    let u_part = TraceMonomial::u(mono.u_power());
    for (l, mult) in mono.traces() {
        let rest = scalar.without_trace(l).expect("factor present").mul(&u_part);
        push_times(&mut out, &rest, &d_trace(l, diagonal), mult as i64);
    }
    out
}

fn l_monomial(mono: &TraceMonomial) -> Action {
    let mut out = Vec::new();
    let k = mono.u_power() as i64;
    let factors: Vec<(u32, u32)> = mono.traces().collect();
    for (i, &(a, ma)) in factors.iter().enumerate() {
        let (a64, ma64) = (a as i64, ma as i64);
        // Merge a pair of equal traces v_a·v_a → v_{2a}.
        if ma >= 2 {
            let merged = mono
                .without_trace(a)
                .and_then(|m| m.without_trace(a))
                .expect("two factors present")
                .with_trace(2 * a);
            out.push((merged, a64 * a64 * ma64 * (ma64 - 1)));
        }
        for &(b, mb) in &factors[i + 1..] {
            let merged = mono
                .without_trace(a)
                .and_then(|m| m.without_trace(b))
                .expect("both factors present")
                .with_trace(a + b);
            out.push((merged, 2 * a64 * b as i64 * ma64 * mb as i64));
        }
        if k > 0 {
            let absorbed = mono.without_trace(a).expect("factor present");
            let absorbed = absorbed.with_u_power(mono.u_power() + a);
            out.push((absorbed, 2 * k * a64 * ma64));
        }
    }
    out
}

fn apply_action<R: Scalar>(p: &TracePolynomial<R>, action: impl Fn(&TraceMonomial) -> Action) -> TracePolynomial<R> {
    let mut out = TracePolynomial::zero();
    for (m, c) in p.terms() {
        for (image, a) in action(m) {
            out.add_term(image, c.clone() * R::from_int(a));
        }
    }
    out
}

pub fn apply_d<R: Scalar>(p: &TracePolynomial<R>) -> TracePolynomial<R> {
    apply_action(p, |m| d_monomial(m, true))
}

pub fn apply_l<R: Scalar>(p: &TracePolynomial<R>) -> TracePolynomial<R> {
    apply_action(p, l_monomial)
}

/// `𝒟 − 𝓛/N²`.
pub fn apply_dn<R: Scalar>(p: &TracePolynomial<R>, n: u32) -> Result<TracePolynomial<R>> {
    if n == 0 {
        return Err(Error::ZeroN);
    }
    let n2 = i64::from(n) * i64::from(n);
    Ok(&apply_d(p) - &apply_l(p).scale(&R::from_ratio(1, n2)))
}

pub fn apply_d_tilde<R: Scalar>(p: &TracePolynomial<R>) -> TracePolynomial<R> {
    apply_action(p, |m| d_monomial(m, false))
}

pub fn apply_t<R: Scalar>(p: &TracePolynomial<R>) -> TracePolynomial<R> {
    apply_action(p, |m| vec![(m.clone(), m.trace_degree() as i64)])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OperatorTag {
    D,
    L,
    /// `𝒟_N` for the given matrix size.
    DN(u32),
    DTilde,
    T,
}

impl OperatorTag {
    pub fn apply<R: Scalar>(self, p: &TracePolynomial<R>) -> Result<TracePolynomial<R>> {
        Ok(match self {
            OperatorTag::D => apply_d(p),
            OperatorTag::L => apply_l(p),
            OperatorTag::DN(n) => apply_dn(p, n)?,
            OperatorTag::DTilde => apply_d_tilde(p),
            OperatorTag::T => apply_t(p),
        })
    }
}

impl fmt::Display for OperatorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorTag::D => write!(f, "D"),
            OperatorTag::L => write!(f, "L"),
            OperatorTag::DN(n) => write!(f, "D_N({n})"),
            OperatorTag::DTilde => write!(f, "D_tilde"),
            OperatorTag::T => write!(f, "T"),
        }
    }
}

/// An operator restricted to the span of `grade_basis(grade)`. Column `j`
/// holds the coordinates of the operator applied to `basis[j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedOperatorMatrix<R> {
    pub grade: u32,
    pub tag: OperatorTag,
    pub basis: Vec<TraceMonomial>,
    pub entries: DenseMatrix<R>,
}

impl<R: Scalar> GradedOperatorMatrix<R> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of(&self, m: &TraceMonomial) -> Option<usize> {
        self.basis.binary_search(m).ok()
    }

    /// Coordinates of a polynomial homogeneous of this grade.
    pub fn coords(&self, p: &TracePolynomial<R>) -> Result<Vec<R>> {
        coords_in(&self.basis, self.grade, p)
    }

    pub fn from_coords(&self, coords: &[R]) -> TracePolynomial<R> {
        TracePolynomial::from_terms(self.basis.iter().cloned().zip(coords.iter().cloned()))
    }

    pub fn apply(&self, p: &TracePolynomial<R>) -> Result<TracePolynomial<R>> {
        Ok(self.from_coords(&self.entries.mul_vec(&self.coords(p)?)))
    }
}

impl<R: Scalar + fmt::Display> GradedOperatorMatrix<R> {
    /// CSV with canonical monomial labels on both axes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row\\col");
        for m in &self.basis {
            out.push(',');
            out.push_str(&m.to_string());
        }
        out.push('\n');
        for (i, m) in self.basis.iter().enumerate() {
            out.push_str(&m.to_string());
            for c in self.entries.row(i) {
                out.push(',');
                out.push_str(&c.to_string());
            }
            out.push('\n');
        }
        out
    }
}

pub(crate) fn coords_in<R: Scalar>(basis: &[TraceMonomial], grade: u32, p: &TracePolynomial<R>) -> Result<Vec<R>> {
    let mut coords = vec![R::zero(); basis.len()];
    for (m, c) in p.terms() {
        let i = basis.binary_search(m).map_err(|_| Error::GradeEscape {
            operator: "coordinates".into(),
            grade,
            escaped: m.trace_degree(),
        })?;
        coords[i] = c.clone();
    }
    Ok(coords)
}

pub fn operator_matrix<R: Scalar>(tag: OperatorTag, k: u32) -> Result<GradedOperatorMatrix<R>> {
    let basis = grade_basis(k);
    let mut entries = DenseMatrix::zeros(basis.len(), basis.len());
    for (j, m) in basis.iter().enumerate() {
        let image = tag.apply(&TracePolynomial::<R>::monomial(m.clone()))?;
        for (out, c) in image.terms() {
            let i = basis.binary_search(out).map_err(|_| Error::GradeEscape {
                operator: tag.to_string(),
                grade: k,
                escaped: out.trace_degree(),
            })?;
            entries[(i, j)] = c.clone();
        }
    }
    Ok(GradedOperatorMatrix {
        grade: k,
        tag,
        basis,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    type P = TracePolynomial<Rational>;

    fn q(n: i64) -> Rational {
        Rational::from_int(n)
    }

    fn mono(k: u32, traces: &[u32]) -> TraceMonomial {
        TraceMonomial::new(k, traces)
    }

    #[test]
    fn d_examples() {
        assert_eq!(apply_d(&P::u(1)), P::u(1).scale(&q(-1)));
        assert_eq!(apply_d(&P::v(1)), P::v(1).scale(&q(-1)));
        let expect = P::from_terms([(mono(2, &[]), q(-2)), (mono(1, &[1]), q(-2))]);
        assert_eq!(apply_d(&P::u(2)), expect);
        let p = P::monomial(mono(0, &[1, 2]));
        let expect = P::from_terms([(mono(0, &[1, 2]), q(-3)), (mono(0, &[1, 1, 1]), q(-2))]);
        assert_eq!(apply_d(&p), expect);
    }

    #[test]
    fn l_examples() {
        for (k, l) in [(1u32, 1u32), (2, 3), (3, 2)] {
            let p = P::monomial(mono(k, &[l]));
            let expect = P::term(TraceMonomial::u(k + l), q(2 * k as i64 * l as i64));
            assert_eq!(apply_l(&p), expect);
        }
        assert!(apply_l(&P::u(2)).is_zero());
        let p = P::monomial(mono(0, &[2, 2]));
        assert_eq!(apply_l(&p), P::term(TraceMonomial::v(4), q(8)));
    }

    #[test]
    fn dn_second_worked_example() {
        // 𝒟_N(u²v₂) = 𝒟(u²)v₂ + u²𝒟(v₂) − (8/N²)u⁴
        let p = P::monomial(mono(2, &[2]));
        for n in [1u32, 2, 3, 7] {
            let leading = &(&apply_d(&P::u(2)) * &P::v(2)) + &(&P::u(2) * &apply_d(&P::v(2)));
            let expect = &leading - &P::term(TraceMonomial::u(4), Rational::from_ratio(8, (n * n) as i64));
            assert_eq!(apply_dn(&p, n).unwrap(), expect);
        }
        assert!(matches!(apply_dn(&p, 0), Err(Error::ZeroN)));
    }

    #[test]
    fn tilde_and_grading() {
        assert!(apply_d_tilde(&P::u(1)).is_zero());
        assert!(apply_d_tilde(&P::v(1)).is_zero());
        assert_eq!(apply_d_tilde(&P::u(2)), P::term(mono(1, &[1]), q(-2)));
        let p = P::monomial(mono(2, &[2, 2]));
        assert_eq!(apply_t(&p), p.scale(&q(6)));
    }

    #[test]
    fn small_matrices() {
        let d1 = operator_matrix::<Rational>(OperatorTag::D, 1).unwrap();
        assert_eq!(d1.entries, DenseMatrix::identity(2).scale(&q(-1)));

        let l2 = operator_matrix::<Rational>(OperatorTag::L, 2).unwrap();
        // basis [u², u·v₁, v₂, v₁²]
        let mut expect = DenseMatrix::zeros(4, 4);
        expect[(0, 1)] = q(2);
        expect[(2, 3)] = q(2);
        assert_eq!(l2.entries, expect);

        for k in 0..=6 {
            let t = operator_matrix::<Rational>(OperatorTag::T, k).unwrap();
            assert_eq!(t.entries, DenseMatrix::identity(t.dim()).scale(&q(k as i64)));
        }
    }

    #[test]
    fn csv_labels() {
        let l2 = operator_matrix::<Rational>(OperatorTag::L, 2).unwrap();
        let csv = l2.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "row\\col,u^2,u*v1,v2,v1^2");
        assert_eq!(lines.next().unwrap(), "u^2,0,2,0,0");
    }
}
