//! The acceptance checks, shared by the test suite and the `selftest`
//! command. Each check returns a [`CheckResult`] rather than panicking.

use std::time::Instant;

use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::exppoly::ExpPoly;
use crate::heat::{expect_finite, heat_finite_n, nilpotent_exp_oracle, variance_finite, HeatEngine, DEFAULT_BLOCK_CAP};
use crate::lab::{
    eval_trace_poly, laplacian_fd, mc_multi, random_matrix, random_unitary, verify_magic, BrownianConfig, Group,
};
use crate::monomial::{grade_basis, TraceMonomial};
use crate::ops::{apply_dn, OperatorTag};
use crate::poly::{cayley_hamilton_u2, TracePolynomial};
use crate::scalar::{Rational, Scalar};
use crate::series::{expand_phi_st, expand_phi_tt, pde_residual, Pde, UPoly};
use crate::single_var::{SingleVarPoly, Var};
use crate::tpoly::TPoly;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub id: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!(
            "{:<6} {:<4} {:<44} {:>8.2}s  {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.seconds,
            self.detail
        )
    }
}

fn timed(id: &'static str, name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    CheckResult {
        id,
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn tpoly(c: &[(i64, i64)]) -> TPoly {
    TPoly::new(c.iter().map(|&(n, d)| Rational::from_ratio(n, d)).collect())
}

fn u_power(k: usize) -> SingleVarPoly<Rational> {
    SingleVarPoly::monomial(Var::U, k, Rational::one())
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

pub fn exact_transform_u2(engine: &HeatEngine) -> CheckResult {
    timed("AC-1", "exact transform of u^2", || {
        let got = engine.free_hall_rational(&u_power(2));
        let expect = SingleVarPoly::new(
            Var::Z,
            vec![ExpPoly::zero(), ExpPoly::new(-2, -TPoly::t()), ExpPoly::exp_half(-2)],
        );
        Ok((got == expect, format!("q_t = {got}")))
    })
}

pub fn transform_u4(engine: &HeatEngine) -> CheckResult {
    timed("AC-2", "transform of u^4 (z^3 coefficient -3t)", || {
        let got = engine.free_hall_rational(&u_power(4));
        let decay = |body: TPoly| ExpPoly::new(-4, body);
        let other_coeffs_match = got.coeff(4) == decay(TPoly::one())
            && got.coeff(2) == decay(tpoly(&[(0, 1), (-2, 1), (4, 1)]))
            && got.coeff(1) == decay(tpoly(&[(0, 1), (-1, 1), (4, 1), (-8, 3)]))
            && got.coeff(0).is_zero();
        let z3 = decay(tpoly(&[(0, 1), (-3, 1)]));
        let oracle = nilpotent_exp_oracle(4)?;
        let image = oracle.apply(&TracePolynomial::monomial(TraceMonomial::u(4)))?;
        let oracle_z3 = decay(image.trace_eval_ones().coeff(3));
        let recursion_z3 = got.coeff(3);
        let passed = other_coeffs_match && recursion_z3 == z3 && oracle_z3 == z3;
        Ok((
            passed,
            format!("z^3: recursion {recursion_z3}, oracle {oracle_z3} (not -t)"),
        ))
    })
}

pub fn oracle_equivalence(engine: &HeatEngine, kmax: u32) -> CheckResult {
    timed("AC-3", "recursion = nilpotent exponential, k<=10", || {
        let mut mismatches = Vec::new();
        for k in 1..=kmax {
            let oracle = nilpotent_exp_oracle(k)?;
            for (m, got) in [
                (TraceMonomial::u(k), engine.tilde_exp_u(k)),
                (TraceMonomial::v(k), engine.tilde_exp_v(k)),
            ] {
                if oracle.apply(&TracePolynomial::monomial(m.clone()))? != got {
                    mismatches.push(m.to_string());
                }
            }
        }
        Ok((
            mismatches.is_empty(),
            if mismatches.is_empty() {
                format!("{} generators agree exactly", 2 * kmax)
            } else {
                format!("mismatch on {}", mismatches.join(", "))
            },
        ))
    })
}

pub fn finite_n_closed_form() -> CheckResult {
    timed("AC-4", "finite-N heat flow of u^2, closed form", || {
        let p = TracePolynomial::<Rational>::u(2);
        let mut worst = 0.0f64;
        for t in [0.25, 1.0, 4.0] {
            for n in [2u32, 8, 32] {
                let out = heat_finite_n(&p, t, n, DEFAULT_BLOCK_CAP)?;
                let nf = n as f64;
                let a = (-t).exp() * (t / nf).cosh();
                let b = -(-t).exp() * nf * (t / nf).sinh();
                let ea = (out.coeff(&TraceMonomial::u(2)) - a).norm();
                let eb = (out.coeff(&TraceMonomial::new(1, &[1])) - b).norm();
                let rest = out.len().saturating_sub(2) as f64;
                worst = worst.max(ea).max(eb).max(rest);
            }
        }
        Ok((worst < 1e-12, format!("max coefficient error {worst:.2e}")))
    })
}

pub fn magic_formulas(seed: u64) -> CheckResult {
    timed("AC-5", "basis summation identities", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = [0.0f64; 4];
        for n in [1usize, 2, 3, 5, 8] {
            for _ in 0..10 {
                let a = random_matrix(n, &mut rng);
                let b = random_matrix(n, &mut rng);
                let r = verify_magic(n, &a, &b)?;
                for i in 0..4 {
                    worst[i] = worst[i].max(r[i]);
                }
            }
        }
        let passed = worst.iter().all(|&r| r < 1e-12);
        let shown: Vec<String> = worst.iter().map(|r| format!("{r:.1e}")).collect();
        Ok((passed, format!("max residuals [{}]", shown.join(", "))))
    })
}

fn rel_err(a: &nalgebra::DMatrix<Complex64>, b: &nalgebra::DMatrix<Complex64>) -> f64 {
    (a - b).norm() / b.norm()
}

pub fn laplacian_equivalence(seed: u64) -> CheckResult {
    timed("AC-6", "finite-difference Laplacian = D_N", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pool: Vec<TraceMonomial> = (1..=5).flat_map(grade_basis).collect();
        let monomials: Vec<TraceMonomial> = (0..10).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect();
        let h = 1e-3;
        let (mut worst, mut min_ratio, mut max_ratio) = (0.0f64, f64::INFINITY, 0.0f64);
        let mut worst_extrapolated = 0.0f64;
        let mut confirmed = true;
        let mut at_floor = 0;
        for n in [2u32, 3, 4] {
            for (i, m) in monomials.iter().enumerate() {
                let u = random_unitary(n as usize, seed ^ (1000 * n as u64 + i as u64))?;
                let p = TracePolynomial::<Rational>::monomial(m.clone());
                let exact = apply_dn(&p, n)?.to_complex().evaluate_matrix(&u)?;
                let coarse_fd = laplacian_fd(&p, &u, h)?;
                let fine_fd = laplacian_fd(&p, &u, h / 2.0)?;
                let extrapolated = (&fine_fd * Complex64::new(4.0, 0.0) - &coarse_fd) / Complex64::new(3.0, 0.0);
                let coarse = rel_err(&coarse_fd, &exact);
                let fine = rel_err(&fine_fd, &exact);
                let rich = rel_err(&extrapolated, &exact);
                worst = worst.max(coarse);
                worst_extrapolated = worst_extrapolated.max(rich);
                // N² second differences, each carrying ~ε/h² relative rounding.
                let floor = (n * n) as f64 * f64::EPSILON / (h * h / 4.0);
                if fine < floor {
                    at_floor += 1;
                } else {
                    confirmed &= rich < fine;
                }
                let ratio = coarse / fine;
                min_ratio = min_ratio.min(ratio);
                max_ratio = max_ratio.max(ratio);
            }
        }
        Ok((
            worst <= 1e-4 && confirmed,
            format!(
                "max rel err {worst:.2e} at h=1e-3, {worst_extrapolated:.2e} extrapolated; \
                 Richardson improves every case above rounding ({at_floor} at floor): {confirmed}; halving ratio in [{min_ratio:.2}, {max_ratio:.2}]"
            ),
        ))
    })
}

pub fn moments(engine: &HeatEngine) -> CheckResult {
    timed("AC-7", "moments and their finite-N convergence", || {
        let at_zero = (1..=10).all(|k| engine.biane_moment(k).parts().all(|(_, b)| b.coeff(0).is_one()));
        let nu2 = engine.biane_moment(2) == ExpPoly::new(-2, tpoly(&[(1, 1), (-1, 1)]));
        let ns = [8.0, 16.0, 32.0, 64.0];
        let mut details = Vec::new();
        let mut slopes_ok = true;
        for k in 1..=4u32 {
            let limit = engine.biane_moment(k).eval_f64(1.0);
            let mut errs = Vec::new();
            for &n in &ns {
                let v = expect_finite(&TracePolynomial::<Rational>::v(k), 1.0, n as u32)?;
                errs.push((v - limit).norm());
            }
            let max_err = errs.iter().copied().fold(0.0, f64::max);
            if max_err < 1e-13 {
                details.push(format!("k={k} exact (err {max_err:.0e})"));
            } else {
                let slope = loglog_slope(&ns, &errs);
                slopes_ok &= (slope + 2.0).abs() <= 0.1;
                details.push(format!("k={k} slope {slope:.3}"));
            }
        }
        Ok((
            at_zero && nu2 && slopes_ok,
            format!("nu_k(0)=1: {at_zero}; nu_2 exact: {nu2}; {}", details.join(", ")),
        ))
    })
}

pub fn concentration_rate() -> CheckResult {
    timed("AC-8", "exact variance decay ratio ~4", || {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for k in 1..=4 {
            let vars: Vec<f64> = [8u32, 16, 32, 64]
                .iter()
                .map(|&n| variance_finite(k, 1.0, n))
                .collect::<Result<_>>()?;
            for w in vars.windows(2).take(3) {
                let r = w[0] / w[1];
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        Ok(((3.5..=4.5).contains(&lo) && (3.5..=4.5).contains(&hi), format!("ratios in [{lo:.4}, {hi:.4}]")))
    })
}

/// Monte Carlo data behind the L2 convergence check at one `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct L2ConvergencePoint {
    pub n: usize,
    pub distance: crate::lab::SampleStats,
    /// `|tr Z^k − 1|²` for `k = 1, 2, 3`.
    pub deviations: Vec<crate::lab::SampleStats>,
}

/// `‖B_t^N(u²) − (q_t)_N‖²` and `|tr Z^k − 1|²` on the same `GL(N)` paths.
pub fn l2_convergence_point(engine: &HeatEngine, n: usize, t: f64, h: f64, paths: usize, seed: u64) -> Result<L2ConvergencePoint> {
    let f = heat_finite_n(&TracePolynomial::<Rational>::u(2), t, n as u32, DEFAULT_BLOCK_CAP)?;
    let q = engine.free_hall_rational(&u_power(2)).eval_at_time(t);
    let g = TracePolynomial::from_terms(
        q.coeffs()
            .iter()
            .enumerate()
            .map(|(k, c)| (TraceMonomial::u(k as u32), *c)),
    );
    let d = &f - &g;
    let cfg = BrownianConfig {
        group: Group::General,
        n,
        t,
        h,
        paths,
        seed,
    };
    let one = Complex64::new(1.0, 0.0);
    let stats = mc_multi(&cfg, &["l2_distance_sq", "dev_k1", "dev_k2", "dev_k3"], |z, powers| {
        let dist = eval_trace_poly(&d, z, powers).tr_gram();
        // `powers` now holds I, Z, Z² at least; extend to Z³.
        crate::lab::kernel::fill_powers(z, 3, powers);
        let mut row = vec![Complex64::new(dist, 0.0)];
        row.extend((1..=3).map(|k| Complex64::new((powers[k].tr() - one).norm_sqr(), 0.0)));
        row
    })?;
    let mut it = stats.into_iter();
    let distance = it.next().expect("four columns");
    Ok(L2ConvergencePoint {
        n,
        distance,
        deviations: it.collect(),
    })
}

pub fn l2_convergence(engine: &HeatEngine, paths: usize, seed: u64) -> CheckResult {
    timed("AC-9", "L2 distance to q_t decays in N (Monte Carlo)", || {
        let ns = [4usize, 8, 16, 32];
        let points: Vec<L2ConvergencePoint> = ns
            .iter()
            .map(|&n| l2_convergence_point(engine, n, 1.0, 0.1, paths, seed))
            .collect::<Result<_>>()?;
        let dist: Vec<f64> = points.iter().map(|p| p.distance.mean.re).collect();
        let decreasing = dist.windows(2).all(|w| w[1] < w[0]);
        let factor = dist[0] / dist[3];
        let mut dev_ok = true;
        for k in 0..3 {
            let dev: Vec<f64> = points.iter().map(|p| p.deviations[k].mean.re).collect();
            dev_ok &= dev.windows(2).all(|w| w[1] < w[0]);
        }
        let shown: Vec<String> = points
            .iter()
            .map(|p| format!("N={}: {:.3e}±{:.1e}", p.n, p.distance.mean.re, p.distance.stderr))
            .collect();
        Ok((
            decreasing && factor >= 10.0 && dev_ok,
            format!("{}; N=4/N=32 = {factor:.1}; |tr Z^k-1|^2 decreasing: {dev_ok}", shown.join(", ")),
        ))
    })
}

pub fn genfun_roundtrip(engine: &HeatEngine) -> CheckResult {
    timed("AC-10", "generating-function roundtrip", || {
        let mut roundtrip = 0.0f64;
        for t in [0.5, 1.0] {
            for (i, p) in expand_phi_tt(t, 8)?.iter().enumerate() {
                let zk = UPoly::monomial(Var::Z, i + 1, Complex64::one());
                roundtrip = roundtrip.max(engine.free_hall_numeric(p, t).max_abs_diff(&zk));
            }
        }
        let mut paths = 0.0f64;
        for t in [0.5, 1.0] {
            let tt = expand_phi_tt(t, 10)?;
            let st = expand_phi_st(t, t, 10)?;
            for (a, b) in tt.iter().zip(&st) {
                paths = paths.max(a.max_abs_diff(b));
            }
        }
        let initial = pde_residual(engine, Pde::Phi, 1.0, 0.5, 12)?.max_initial();
        Ok((
            roundtrip < 1e-9 && paths < 1e-10 && initial < 1e-8,
            format!("roundtrip {roundtrip:.1e}; s=t paths {paths:.1e}; phi(0,z) residual {initial:.1e}"),
        ))
    })
}

pub fn kernel_coherence(seed: u64) -> CheckResult {
    timed("AC-11", "Cayley-Hamilton polynomial and its images", || {
        let p = cayley_hamilton_u2::<Rational>();
        let dp = OperatorTag::DN(2).apply(&p)?.to_complex();
        let hp = heat_finite_n(&p, 1.0, 2, DEFAULT_BLOCK_CAP)?;
        let pc = p.to_complex();
        let (mut zero, mut images) = (0.0f64, 0.0f64);
        for i in 0..20 {
            let u = random_unitary(2, seed + i)?;
            zero = zero.max(pc.evaluate_matrix(&u)?.norm());
            images = images.max(dp.evaluate_matrix(&u)?.norm()).max(hp.evaluate_matrix(&u)?.norm());
        }
        let mut n3 = f64::INFINITY;
        for i in 0..5 {
            let u = random_unitary(3, seed + 100 + i)?;
            n3 = n3.min(pc.evaluate_matrix(&u)?.norm());
        }
        Ok((
            zero < 1e-12 && images < 1e-10 && n3 > 1e-3,
            format!("U(2): p {zero:.1e}, images {images:.1e}; U(3) min {n3:.2e}"),
        ))
    })
}

/// Number of paths per `N` in the main Monte Carlo check.
pub const L2_CONVERGENCE_PATHS: usize = 100_000;

/// Runs every check in order; the Monte Carlo one is skipped when asked.
pub fn run_all(engine: &HeatEngine, seed: u64, skip_mc: bool) -> Vec<CheckResult> {
    let mut out = vec![
        exact_transform_u2(engine),
        transform_u4(engine),
        oracle_equivalence(engine, 10),
        finite_n_closed_form(),
        magic_formulas(seed),
        laplacian_equivalence(seed),
        moments(engine),
        concentration_rate(),
    ];
    if !skip_mc {
        out.push(l2_convergence(engine, L2_CONVERGENCE_PATHS, seed));
    }
    out.push(genfun_roundtrip(engine));
    out.push(kernel_coherence(seed));
    out
}
