use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tracecalc::heat::HeatEngine;
use tracecalc::series::{
    expand_phi_st, expand_phi_tt, pde_residual, psi_series, rho_series, FormalSeries, Pde, UPoly,
};

type Series = FormalSeries<Complex64>;

fn max_diff(a: &Series, b: &Series) -> f64 {
    (0..=a.order().max(b.order())).map(|k| (a.coeff(k) - b.coeff(k)).norm()).fold(0.0, f64::max)
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn random_series(rng: &mut ChaCha8Rng, k: usize, linear: (f64, f64), decay: f64) -> Series {
    let sign = if rng.gen() { 1.0 } else { -1.0 };
    let mut coeffs = vec![0.0, sign * rng.gen_range(linear.0..linear.1)];
    coeffs.extend((2..=k).map(|n| rng.gen_range(-0.5..0.5) * decay.powi(n as i32 - 1)));
    Series::from_real(k, &coeffs)
}

#[test]
fn reversion_of_random_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let k = 16;
    for _ in 0..50 {
        let f = random_series(&mut rng, k, (1.0, 2.0), 0.5);
        let g = f.revert().unwrap();
        assert!(max_diff(&f.compose(&g).unwrap(), &Series::z(k)) < 1e-12);
        assert!(max_diff(&g.compose(&f).unwrap(), &Series::z(k)) < 1e-12);
    }
}

/// With |f₁| near 1/2 the inverse has coefficients up to ~1e9 at K = 16, so
/// the residual is only small relative to them.
#[test]
fn reversion_of_badly_scaled_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let k = 16;
    for _ in 0..50 {
        let f = random_series(&mut rng, k, (0.5, 1.5), 1.0);
        let g = f.revert().unwrap();
        let scale = g.max_magnitude(0, k).max(1.0);
        assert!(max_diff(&f.compose(&g).unwrap(), &Series::z(k)) / scale < 1e-13);
    }
}

#[test]
fn reversion_closed_forms() {
    let k = 12;
    assert_eq!(Series::z(k).revert().unwrap(), Series::z(k));

    // z/(1 − z) ↦ w/(1 + w)
    let mut geo = vec![0.0];
    geo.extend((1..=k).map(|_| 1.0));
    let expected: Vec<f64> = (0..=k).map(|n| if n == 0 { 0.0 } else { (-1f64).powi(n as i32 - 1) }).collect();
    assert!(max_diff(&Series::from_real(k, &geo).revert().unwrap(), &Series::from_real(k, &expected)) < 1e-13);

    // z·e^{az} ↦ Σ (−an)^{n−1}/n! wⁿ, a = 0.7
    let a: f64 = 0.7;
    let f: Vec<f64> = (0..=k).map(|n| if n == 0 { 0.0 } else { a.powi(n as i32 - 1) / factorial(n as u32 - 1) }).collect();
    let f = Series::from_real(k, &f);
    let lagrange: Vec<f64> = (0..=k)
        .map(|n| if n == 0 { 0.0 } else { (-a * n as f64).powi(n as i32 - 1) / factorial(n as u32) })
        .collect();
    let g = f.revert().unwrap();
    assert!(max_diff(&g, &Series::from_real(k, &lagrange)) < 1e-10);
    assert!(max_diff(&f.compose(&g).unwrap(), &Series::z(k)) < 1e-12);
}

#[test]
fn reversion_needs_a_linear_term() {
    assert!(Series::from_real(4, &[0.0, 0.0, 1.0]).revert().is_err());
}

fn coeffs(p: &UPoly) -> Vec<Complex64> {
    p.coeffs().to_vec()
}

#[test]
fn low_order_polynomials() {
    for t in [0.0, 0.5, 1.0, 2.0] {
        let ps = expand_phi_tt(t, 4).unwrap();
        let e = |x: f64| Complex64::new(x.exp(), 0.0);
        let expected_p2 = [Complex64::new(0.0, 0.0), e(t / 2.0) * t, e(t)];
        assert!(coeffs(&ps[0]).iter().zip([Complex64::new(0.0, 0.0), e(t / 2.0)]).all(|(a, b)| (a - b).norm() < 1e-13));
        assert!(coeffs(&ps[1]).iter().zip(expected_p2).all(|(a, b)| (a - b).norm() < 1e-12));
    }
}

#[test]
fn time_zero_gives_pure_powers() {
    for ps in [expand_phi_tt(0.0, 8).unwrap(), expand_phi_st(1.5, 0.0, 8).unwrap()] {
        for (i, p) in ps.iter().enumerate() {
            let k = i + 1;
            assert_eq!(p.degree(), Some(k));
            for j in 0..=k {
                let target = if j == k { 1.0 } else { 0.0 };
                assert!((p.coeff(j) - target).norm() < 1e-12, "k={k} j={j}");
            }
        }
    }
}

#[test]
fn two_paths_agree_on_the_diagonal() {
    for t in [0.5, 1.0, 1.7] {
        let explicit = expand_phi_tt(t, 10).unwrap();
        let reverted = expand_phi_st(t, t, 10).unwrap();
        for (a, b) in explicit.iter().zip(&reverted) {
            assert!(a.max_abs_diff(b) < 1e-10);
        }
    }
}

#[test]
fn degree_and_leading_coefficient() {
    for p in expand_phi_st(1.0, 0.5, 8).unwrap().iter().zip(1..) {
        assert_eq!(p.0.degree(), Some(p.1));
    }
    for t in [0.5, 1.0] {
        for (i, p) in expand_phi_tt(t, 8).unwrap().iter().enumerate() {
            let k = (i + 1) as f64;
            let lead = p.coeff(i + 1);
            assert!((lead.re / (k * t / 2.0).exp() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn forward_transform_of_p_k_is_z_to_the_k() {
    let engine = HeatEngine::new();
    for t in [0.5, 1.0] {
        for (i, p) in expand_phi_tt(t, 8).unwrap().iter().enumerate() {
            let image = engine.free_hall_numeric(p, t);
            for d in 0..=i + 1 {
                let target = if d == i + 1 { 1.0 } else { 0.0 };
                assert!((image.coeff(d) - target).norm() < 1e-9, "t={t} k={} d={d}", i + 1);
            }
        }
    }
}

#[test]
fn parameter_domain_is_enforced() {
    assert!(expand_phi_st(0.4, 1.0, 4).is_err());
    assert!(expand_phi_st(1.0, -0.1, 4).is_err());
    assert!(expand_phi_st(0.6, 1.0, 4).is_ok());
}

#[test]
fn rho_series_coefficients() {
    let engine = HeatEngine::new();
    let at_zero = rho_series(&engine, 0.0, 10).unwrap();
    assert_eq!(at_zero.coeff(0).norm(), 0.0);
    assert!((1..=10).all(|k| (at_zero.coeff(k) - 1.0).norm() < 1e-15));
    for s in [0.3, 1.0, 2.5] {
        let rho = rho_series(&engine, s, 6).unwrap();
        assert!((rho.coeff(1).re - (-s / 2.0).exp()).abs() < 1e-15);
        assert!((rho.coeff(2).re - (-s).exp() * (1.0 - s)).abs() < 1e-15);
    }
}

#[test]
fn psi_series_coefficients() {
    let engine = HeatEngine::new();
    for t in [0.5, 1.0] {
        let psi = psi_series(&engine, t, t, 8).unwrap();
        assert!((psi.coeff(1) - 1.0).norm() < 1e-13);
    }
    // At t = 0 every p_k is u^k, so the series is ρ itself.
    let s = 1.2;
    let psi = psi_series(&engine, s, 0.0, 8).unwrap();
    let rho = rho_series(&engine, s, 8).unwrap();
    assert!(max_diff(&psi, &rho) < 1e-12);

    let short = psi_series(&engine, 1.0, 0.8, 6).unwrap();
    let long = psi_series(&engine, 1.0, 0.8, 12).unwrap();
    assert!((0..=6).all(|k| (short.coeff(k) - long.coeff(k)).norm() < 1e-12));
}

#[test]
fn pde_reports() {
    let engine = HeatEngine::new();
    let phi = pde_residual(&engine, Pde::Phi, 1.0, 0.0, 8).unwrap();
    assert!(phi.max_initial() < 1e-8);

    // Literal ρ equation at order z: ν₁′(s) + s ν₁(s)² = −½e^{−s/2} + s e^{−s}.
    for s in [0.5, 1.0, 2.0] {
        let rho = pde_residual(&engine, Pde::Rho, s, s, 6).unwrap();
        let expected = (-0.5 * (-s / 2.0).exp() + s * (-s).exp()).abs();
        assert!((rho.residual[1] - expected).abs() < 1e-6, "s={s}: {}", rho.residual[1]);
        assert!(rho.flagged().contains(&1));
    }

    let psi = pde_residual(&engine, Pde::Psi, 1.0, 0.5, 6).unwrap();
    assert_eq!(psi.residual.len(), 6);
    assert_eq!(psi.initial.len(), 7);
    assert!(psi.to_csv().starts_with("pde,s,t,kind,k,magnitude,flagged\npsi,1,0.5,residual,0,"));
}
