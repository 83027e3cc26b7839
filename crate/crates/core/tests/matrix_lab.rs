use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tracecalc::heat::expect_finite;
use tracecalc::lab::kernel::fill_powers;
use tracecalc::lab::{
    experiment_csv, laplacian_fd, mc_estimate, mc_l2_distance, mc_multi, onb, random_matrix, random_unitary, sample_bm,
    verify_magic, BrownianConfig, ExperimentRow, Group, SampleStats, EXPERIMENT_HEADER,
};
use tracecalc::validation::loglog_slope;
use tracecalc::{apply_dn, cayley_hamilton_u2, ComplexTracePoly, Rational, RationalTracePoly};

fn cfg(group: Group, n: usize, t: f64, h: f64, paths: usize, seed: u64) -> BrownianConfig {
    BrownianConfig { group, n, t, h, paths, seed }
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[test]
fn bases_are_orthonormal() {
    for n in 1..=6 {
        let u = onb(Group::Unitary, n).unwrap();
        let gl = onb(Group::General, n).unwrap();
        assert_eq!(u.len(), n * n);
        assert_eq!(gl.len(), 2 * n * n);
        assert!(u.gram_defect() < 1e-13);
        assert!(gl.gram_defect() < 1e-13);
        for x in &u.elements {
            assert_eq!(x.adjoint(), -x.clone());
        }
        for (x, y) in u.elements.iter().zip(&gl.elements[n * n..]) {
            assert_eq!(&(x * Complex64::i()), y);
        }
    }
    let u1 = onb(Group::Unitary, 1).unwrap();
    assert_eq!(u1.elements, vec![DMatrix::from_element(1, 1, Complex64::i())]);
    assert!(onb(Group::Unitary, 0).is_err());
}

#[test]
fn summation_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for n in [1usize, 2, 3, 5, 8] {
        for _ in 0..10 {
            let a = random_matrix(n, &mut rng);
            let b = random_matrix(n, &mut rng);
            let r = verify_magic(n, &a, &b).unwrap();
            assert!(r.iter().all(|x| *x < 1e-12), "N={n}: {r:?}");
        }
    }
    let a = DMatrix::from_element(1, 1, Complex64::new(0.3, -2.0));
    assert!(verify_magic(1, &a, &a).unwrap()[2] < 1e-15);
    assert!(verify_magic(2, &a, &a).is_err());
}

fn rel(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn finite_difference_laplacian() {
    for n in 1..=4 {
        let id = DMatrix::identity(n, n);
        let lap = laplacian_fd(&RationalTracePoly::u(1), &id, 1e-3).unwrap();
        assert!(rel(&lap, &(-id.clone())) <= 1e-5, "N={n}");
    }

    let p = RationalTracePoly::u(2) * RationalTracePoly::v(2);
    let u = random_unitary(3, 42).unwrap();
    let exact = apply_dn(&p, 3).unwrap().to_complex().evaluate_matrix(&u).unwrap();
    assert!(rel(&laplacian_fd(&p, &u, 1e-3).unwrap(), &exact) <= 1e-4);

    let ch = cayley_hamilton_u2::<Rational>();
    let u2 = random_unitary(2, 43).unwrap();
    assert!(laplacian_fd(&ch, &u2, 1e-3).unwrap().norm() < 1e-6);

    assert!(laplacian_fd(&p, &u, 0.1).is_err());
    assert!(laplacian_fd(&p, &u, 1e-6).is_err());
}

#[test]
fn zero_time_paths_stay_at_the_identity() {
    for group in [Group::Unitary, Group::General] {
        for z in sample_bm(&cfg(group, 3, 0.0, 0.1, 5, 0)).unwrap() {
            assert_eq!(z, DMatrix::identity(3, 3));
        }
    }
}

#[test]
fn unitary_endpoints_stay_unitary() {
    for z in sample_bm(&cfg(Group::Unitary, 5, 3.0, 0.01, 10, 1)).unwrap() {
        let defect = (z.adjoint() * &z - DMatrix::identity(5, 5)).norm();
        assert!(defect < 1e-8, "{defect}");
    }
}

#[test]
fn statistics_do_not_depend_on_the_worker_count() {
    let config = cfg(Group::General, 4, 1.0, 0.05, 300, 9);
    let p = RationalTracePoly::u(2).to_complex() + RationalTracePoly::v(1).to_complex();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| mc_estimate(&config, "obs", &p).unwrap())
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one.mean.re.to_bits(), four.mean.re.to_bits());
    assert_eq!(one.mean.im.to_bits(), four.mean.im.to_bits());
    assert_eq!(one.variance.to_bits(), four.variance.to_bits());
    assert_eq!(one, four);
}

#[test]
fn constant_observable() {
    let stats = mc_estimate(&cfg(Group::Unitary, 3, 1.0, 0.1, 50, 2), "one", &ComplexTracePoly::one()).unwrap();
    assert!((stats.mean - 1.0).norm() < 1e-14);
    assert!(stats.variance < 1e-28);
}

#[test]
fn u1_first_moment() {
    let stats = mc_estimate(&cfg(Group::Unitary, 1, 1.0, 0.1, 100_000, 3), "tr", &ComplexTracePoly::u(1)).unwrap();
    assert!(stats.within(c((-0.5f64).exp()), 3.0), "{stats:?}");
}

#[test]
fn unitary_first_moment_for_several_sizes() {
    for (n, t) in [(1usize, 0.7), (2, 1.0), (4, 1.5)] {
        let stats =
            mc_estimate(&cfg(Group::Unitary, n, t, 0.01, 4000, 100 + n as u64), "tr", &ComplexTracePoly::u(1)).unwrap();
        assert!(stats.within(c((-t / 2.0).exp()), 3.0), "N={n}: {stats:?}");
    }
}

#[test]
fn u2_second_moment_with_step_halving() {
    let exact = expect_finite(&RationalTracePoly::v(2), 1.0, 2).unwrap();
    let p = ComplexTracePoly::u(2);
    let coarse = mc_estimate(&cfg(Group::Unitary, 2, 1.0, 0.02, 20_000, 5), "tr2", &p).unwrap();
    let fine = mc_estimate(&cfg(Group::Unitary, 2, 1.0, 0.01, 20_000, 6), "tr2", &p).unwrap();
    assert!(coarse.within(exact, 3.0), "{coarse:?} vs {exact}");
    assert!(fine.within(exact, 3.0), "{fine:?} vs {exact}");
}

#[test]
fn holomorphic_moments_on_gl_have_mean_one() {
    for n in [1usize, 3] {
        let config = cfg(Group::General, n, 1.0, 0.05, 4000, 7);
        let stats = mc_multi(&config, &["k1", "k2", "k3"], |z, powers| {
            fill_powers(z, 3, powers);
            (1..=3).map(|k| powers[k].tr()).collect()
        })
        .unwrap();
        for s in stats {
            assert!(s.within(c(1.0), 3.0), "N={n}: {s:?}");
        }
    }
}

#[test]
fn l2_distance_edge_cases() {
    let config = cfg(Group::General, 3, 1.0, 0.1, 200, 8);
    let id = ComplexTracePoly::one();
    let zero = ComplexTracePoly::zero();
    let f = ComplexTracePoly::u(2);
    assert_eq!(mc_l2_distance(&f, &f, &config).unwrap().mean, c(0.0));
    let unit = mc_l2_distance(&id, &zero, &config).unwrap();
    assert!((unit.mean - 1.0).norm() < 1e-14);
    let unitary = cfg(Group::Unitary, 3, 1.0, 0.1, 10, 8);
    assert!(mc_l2_distance(&id, &zero, &unitary).is_err());
}

fn variance_slope(group: Group, ns: &[usize], paths: usize, deviation_from_one: bool) -> Vec<f64> {
    let mut per_k = vec![Vec::new(); 3];
    for &n in ns {
        let config = cfg(group, n, 1.0, 0.05, paths, 10 + n as u64);
        let stats = mc_multi(&config, &["k1", "k2", "k3"], |z, powers| {
            fill_powers(z, 3, powers);
            (1..=3)
                .map(|k| {
                    let x = powers[k].tr();
                    if deviation_from_one {
                        c((x - 1.0).norm_sqr())
                    } else {
                        x
                    }
                })
                .collect()
        })
        .unwrap();
        for (k, s) in stats.iter().enumerate() {
            per_k[k].push(if deviation_from_one { s.mean.re } else { s.variance });
        }
    }
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    per_k.iter().map(|ys| loglog_slope(&xs, ys)).collect()
}

#[test]
fn unitary_trace_variance_decays_like_inverse_n_squared() {
    for (k, slope) in variance_slope(Group::Unitary, &[4, 8, 16, 32], 1000, false).iter().enumerate() {
        assert!((slope + 2.0).abs() <= 0.5, "k={}: slope {slope}", k + 1);
    }
}

#[test]
fn gl_trace_deviation_decays_like_inverse_n_squared() {
    for (k, slope) in variance_slope(Group::General, &[4, 8, 16, 32], 1000, true).iter().enumerate() {
        assert!((slope + 2.0).abs() <= 0.5, "k={}: slope {slope}", k + 1);
    }
}

#[test]
fn experiment_rows() {
    let stats = SampleStats::from_samples("x", &[c(1.0), c(3.0)]);
    assert_eq!(stats.variance, 2.0);
    assert_eq!(stats.stderr, 1.0);
    let row = ExperimentRow {
        experiment: "trace".into(),
        cfg: cfg(Group::Unitary, 4, 1.0, 0.3, 2, 5),
        k: 1,
        stats,
    };
    let csv = experiment_csv(&[row]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(EXPERIMENT_HEADER));
    assert_eq!(lines.next(), Some("trace,u,4,1,1,2,0.25,2e0,0e0,2e0,1e0,5"));
}
