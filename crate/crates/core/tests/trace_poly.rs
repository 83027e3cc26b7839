mod common;

use common::{monomial, poly, rational, rel_diff, scalar_poly};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use tracecalc::lab::random_unitary;
use tracecalc::{cayley_hamilton_u2, grade_basis, partitions, Rational, RationalTracePoly, TPoly, TraceMonomial};

/// Partitions of `n` into parts at most `max`, by direct recursion.
fn count_partitions(n: u32, max: u32) -> usize {
    if n == 0 {
        return 1;
    }
    (1..=max.min(n)).map(|part| count_partitions(n - part, part)).sum()
}

#[test]
fn basis_sizes_match_partition_counts() {
    for k in 0..=12 {
        let expected: usize = (0..=k).map(|k0| count_partitions(k - k0, k - k0)).sum();
        let basis = grade_basis(k);
        assert_eq!(basis.len(), expected, "grade {k}");
        assert_eq!(partitions(k).len(), count_partitions(k, k));
        let mut sorted = basis.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), basis.len(), "duplicates in grade {k}");
        assert!(basis.iter().all(|m| m.trace_degree() == k));
    }
}

#[test]
fn grade_two_basis_order() {
    let names: Vec<String> = grade_basis(2).iter().map(ToString::to_string).collect();
    assert_eq!(names, ["u^2", "u*v1", "v2", "v1^2"]);
}

#[test]
fn grading_is_additive_up_to_degree_eight() {
    for a in 0..=8 {
        for b in 0..=8 - a {
            for m1 in grade_basis(a) {
                for m2 in grade_basis(b) {
                    assert_eq!(m1.mul(&m2).trace_degree(), a + b);
                }
            }
        }
    }
}

#[test]
fn cayley_hamilton_kernel() {
    let p = cayley_hamilton_u2::<Rational>();
    for seed in 0..10 {
        let u2 = random_unitary(2, seed).unwrap();
        assert!(p.evaluate_matrix(&u2).unwrap().norm() < 1e-12);
        let u3 = random_unitary(3, 100 + seed).unwrap();
        assert!(p.evaluate_matrix(&u3).unwrap().norm() > 1e-3);
    }
}

#[test]
fn evaluation_of_u_and_traces() {
    let u = random_unitary(4, 1).unwrap();
    let tr = |m: &DMatrix<Complex64>| m.trace() / 4.0;
    let p = RationalTracePoly::u(2) * RationalTracePoly::v(3);
    let expected = &u * &u * tr(&(&u * &u * &u));
    assert!(rel_diff(&p.evaluate_matrix(&u).unwrap(), &expected) < 1e-13);
    let one = RationalTracePoly::one().evaluate_matrix(&u).unwrap();
    assert_eq!(one, DMatrix::identity(4, 4));
}

fn seeded_unitary(n: usize, seed: u64) -> DMatrix<Complex64> {
    random_unitary(n, seed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms_hold_exactly(p in poly(), q in poly(), r in poly()) {
        prop_assert_eq!(&p * &q, &q * &p);
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
        prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
        prop_assert!((&p - &p).is_zero());
    }

    #[test]
    fn json_round_trip(p in poly()) {
        prop_assert_eq!(RationalTracePoly::from_json(&p.to_json()).unwrap(), p);
    }

    #[test]
    fn monomial_display_round_trip(m in monomial()) {
        prop_assert_eq!(m.to_string().parse::<TraceMonomial>().unwrap(), m);
    }

    #[test]
    fn tpoly_integration_inverts_derivative(coeffs in proptest::collection::vec(rational(), 0..6)) {
        let p = TPoly::new(coeffs);
        prop_assert_eq!(p.integrate().derivative(), p);
    }

    #[test]
    fn evaluation_is_multiplicative_with_a_scalar_factor(
        p in scalar_poly(), q in poly(), n in 1usize..=8, seed in 0u64..1000
    ) {
        let u = seeded_unitary(n, seed);
        let lhs = (&p * &q).evaluate_matrix(&u).unwrap();
        let rhs = p.evaluate_matrix(&u).unwrap() * q.evaluate_matrix(&u).unwrap();
        prop_assert!(rel_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn evaluation_is_conjugation_equivariant(p in poly(), n in 1usize..=8, seed in 0u64..1000) {
        let u = seeded_unitary(n, seed);
        let v = seeded_unitary(n, seed + 5000);
        let conj = &v * &u * v.adjoint();
        let lhs = p.evaluate_matrix(&conj).unwrap();
        let rhs = &v * p.evaluate_matrix(&u).unwrap() * v.adjoint();
        prop_assert!(rel_diff(&lhs, &rhs) < 1e-12);
    }
}
