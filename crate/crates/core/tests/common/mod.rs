#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use tracecalc::{grade_basis, Rational, RationalTracePoly, Scalar, TraceMonomial};

pub fn monomial() -> impl Strategy<Value = TraceMonomial> {
    (0u32..4, proptest::collection::vec(1u32..5, 0..4)).prop_map(|(u, traces)| TraceMonomial::new(u, &traces))
}

pub fn rational() -> impl Strategy<Value = Rational> {
    (-6i64..7, 1i64..5).prop_map(|(n, d)| Rational::from_ratio(n, d))
}

pub fn poly() -> impl Strategy<Value = RationalTracePoly> {
    proptest::collection::vec((monomial(), rational()), 0..5).prop_map(RationalTracePoly::from_terms)
}

pub fn scalar_poly() -> impl Strategy<Value = RationalTracePoly> {
    proptest::collection::vec((monomial(), rational()), 0..4)
        .prop_map(|terms| RationalTracePoly::from_terms(terms.into_iter().map(|(m, c)| (m.scalar_part(), c))))
}

/// Random polynomial whose terms all have grade at most `max_grade`.
pub fn random_poly(rng: &mut impl Rng, max_grade: u32, terms: usize) -> RationalTracePoly {
    let pool: Vec<TraceMonomial> = (0..=max_grade).flat_map(grade_basis).collect();
    RationalTracePoly::from_terms((0..terms).map(|_| {
        let m = pool[rng.gen_range(0..pool.len())].clone();
        (m, Rational::from_ratio(rng.gen_range(-9..10), rng.gen_range(1..6)))
    }))
}

/// Random polynomial homogeneous of grade `k`.
pub fn random_homogeneous(rng: &mut impl Rng, k: u32, terms: usize) -> RationalTracePoly {
    let basis = grade_basis(k);
    RationalTracePoly::from_terms((0..terms).map(|_| {
        (
            basis[rng.gen_range(0..basis.len())].clone(),
            Rational::from_ratio(rng.gen_range(-9..10), rng.gen_range(1..6)),
        )
    }))
}

pub fn rel_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}
