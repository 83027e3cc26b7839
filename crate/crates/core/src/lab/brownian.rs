//! Brownian motion on `U(N)` and `GL(N; ℂ)` by Lie–Euler steps
//! `U ← U·exp(√h ξ)`, `ξ = Σ_j g_j X_j` over an orthonormal basis, and
//! Monte Carlo estimators over the endpoints.
//!
//! Path `i` draws its normals from ChaCha8 stream `i` under the master
//! seed, and results are gathered in path order, so every estimate is
//! bit-identical for any worker count.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lab::basis::Group;
use crate::lab::kernel::{eval_trace_poly, CMat, ExpWorkspace};
use crate::poly::TracePolynomial;

/// Unitary paths are re-orthonormalized after this many steps.
pub const REORTHONORMALIZE_EVERY: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct BrownianConfig {
    pub group: Group,
    pub n: usize,
    pub t: f64,
    pub h: f64,
    pub paths: usize,
    pub seed: u64,
}

impl BrownianConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n == 0 {
            return Err(Error::ZeroN);
        }
        if !(self.t >= 0.0) || !self.t.is_finite() {
            return bad(format!("time must be finite and non-negative, got {}", self.t));
        }
        if !(self.h > 0.0) {
            return bad(format!("step must be positive, got {}", self.h));
        }
        if self.paths == 0 {
            return bad("need at least one path".into());
        }
        Ok(())
    }

    /// `ceil(t/h)`, ignoring rounding noise in the ratio.
    pub fn steps(&self) -> usize {
        if self.t == 0.0 {
            0
        } else {
            ((self.t / self.h) * (1.0 - 1e-12)).ceil() as usize
        }
    }

    /// The step actually taken, `t / steps`.
    pub fn effective_step(&self) -> f64 {
        match self.steps() {
            0 => 0.0,
            s => self.t / s as f64,
        }
    }
}

/// Per-worker state: RNG, increment, exponential scratch and the path.
struct PathSampler {
    group: Group,
    n: usize,
    steps: usize,
    sqrt_h: f64,
    seed: u64,
    exp: ExpWorkspace,
    xi: CMat,
    step: CMat,
    u: CMat,
    tmp: CMat,
    powers: Vec<CMat>,
}

impl PathSampler {
    fn new(cfg: &BrownianConfig) -> Self {
        let n = cfg.n;
        Self {
            group: cfg.group,
            n,
            steps: cfg.steps(),
            sqrt_h: cfg.effective_step().sqrt(),
            seed: cfg.seed,
            exp: ExpWorkspace::new(n),
            xi: CMat::zeros(n),
            step: CMat::zeros(n),
            u: CMat::zeros(n),
            tmp: CMat::zeros(n),
            powers: Vec::new(),
        }
    }

    /// Writes `scale·Σ g_j X_j` over the `u(N)` basis into `xi`, times `phase`
    /// and added to what is there. Normals are consumed in basis order.
    fn add_unitary_increment(&mut self, rng: &mut ChaCha8Rng, phase: Complex64) {
        let n = self.n;
        let diag = self.sqrt_h / (n as f64).sqrt();
        let off = self.sqrt_h / (2.0 * n as f64).sqrt();
        let i = Complex64::i();
        for j in 0..n {
            let g: f64 = rng.sample(StandardNormal);
            let v = self.xi.get(j, j) + phase * i * (g * diag);
            self.xi.set(j, j, v);
        }
        for j in 0..n {
            for k in j + 1..n {
                let g1: f64 = rng.sample(StandardNormal);
                let g2: f64 = rng.sample(StandardNormal);
                let upper = Complex64::new(g1, g2) * off;
                let lower = Complex64::new(-g1, g2) * off;
                let a = self.xi.get(j, k) + phase * upper;
                let b = self.xi.get(k, j) + phase * lower;
                self.xi.set(j, k, a);
                self.xi.set(k, j, b);
            }
        }
    }

    fn run(&mut self, index: usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        self.u.set_identity();
        for s in 1..=self.steps {
            self.xi.scale_real(0.0);
            self.add_unitary_increment(&mut rng, Complex64::new(1.0, 0.0));
            if self.group == Group::General {
                self.add_unitary_increment(&mut rng, Complex64::i());
            }
            self.exp.expm(&mut self.xi, &mut self.step);
            self.tmp.mul_into(&self.u, &self.step);
            std::mem::swap(&mut self.u, &mut self.tmp);
            if self.group == Group::Unitary && s % REORTHONORMALIZE_EVERY == 0 {
                self.u.reorthonormalize();
            }
        }
    }
}

/// Applies `f` to every endpoint, in parallel, returning results in path
/// order. `f` also receives a reusable buffer for matrix powers.
pub fn map_endpoints<T, F>(cfg: &BrownianConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&CMat, &mut Vec<CMat>) -> T + Sync,
{
    cfg.validate()?;
    Ok((0..cfg.paths)
        .into_par_iter()
        .map_init(
            || PathSampler::new(cfg),
            |s, i| {
                s.run(i);
                f(&s.u, &mut s.powers)
            },
        )
        .collect())
}

/// All endpoints as dense matrices; meant for small runs.
pub fn sample_bm(cfg: &BrownianConfig) -> Result<Vec<DMatrix<Complex64>>> {
    map_endpoints(cfg, |u, _| u.to_dmatrix())
}

/// A Brownian endpoint at `t = 4` on `U(N)`: a well-spread unitary for
/// identity checks (not Haar distributed).
pub fn random_unitary(n: usize, seed: u64) -> Result<DMatrix<Complex64>> {
    let cfg = BrownianConfig {
        group: Group::Unitary,
        n,
        t: 4.0,
        h: 0.02,
        paths: 1,
        seed,
    };
    Ok(sample_bm(&cfg)?.remove(0))
}

/// Entries i.i.d. standard complex Gaussian.
pub fn random_matrix(n: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub name: String,
    pub n: usize,
    pub mean: Complex64,
    /// `Σ|x − mean|²/(n − 1)`; zero for a single sample.
    pub variance: f64,
    pub stderr: f64,
}

impl SampleStats {
    /// Two-pass statistics, summed in sample order.
    pub fn from_samples(name: impl Into<String>, xs: &[Complex64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<Complex64>() / n as f64;
        let variance = if n > 1 {
            xs.iter().map(|x| (x - mean).norm_sqr()).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Self {
            name: name.into(),
            n,
            mean,
            variance,
            stderr: (variance / n as f64).sqrt(),
        }
    }

    /// Whether `target` lies within `k` standard errors of the mean.
    pub fn within(&self, target: Complex64, k: f64) -> bool {
        (self.mean - target).norm() <= k * self.stderr
    }
}

/// Several scalar observables evaluated on the same endpoints.
pub fn mc_multi<F>(cfg: &BrownianConfig, names: &[&str], f: F) -> Result<Vec<SampleStats>>
where
    F: Fn(&CMat, &mut Vec<CMat>) -> Vec<Complex64> + Sync,
{
    let rows = map_endpoints(cfg, |u, powers| f(u, powers))?;
    Ok(names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let column: Vec<Complex64> = rows.iter().map(|r| r[i]).collect();
            SampleStats::from_samples(*name, &column)
        })
        .collect())
}

/// Monte Carlo estimate of `E[tr p_N(U)]`; for a scalar `p` this is the
/// expectation of `p` itself.
pub fn mc_estimate(cfg: &BrownianConfig, name: &str, p: &TracePolynomial<Complex64>) -> Result<SampleStats> {
    let mut out = mc_multi(cfg, &[name], |u, powers| vec![eval_trace_poly(p, u, powers).tr()])?;
    Ok(out.remove(0))
}

/// Estimates `∫ tr((f−g)(Z)*(f−g)(Z)) dμ_t^N`.
pub fn mc_l2_distance(
    f: &TracePolynomial<Complex64>,
    g: &TracePolynomial<Complex64>,
    cfg: &BrownianConfig,
) -> Result<SampleStats> {
    if cfg.group != Group::General {
        return Err(Error::InvalidConfig("L² distance is taken over GL(N; C)".into()));
    }
    let d = f - g;
    let mut out = mc_multi(cfg, &["l2_distance_sq"], |z, powers| {
        vec![Complex64::new(eval_trace_poly(&d, z, powers).tr_gram(), 0.0)]
    })?;
    Ok(out.remove(0))
}

/// One row of the experiment CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRow {
    pub experiment: String,
    pub cfg: BrownianConfig,
    pub k: u32,
    pub stats: SampleStats,
}

pub const EXPERIMENT_HEADER: &str = "experiment,group,N,t,k,n_paths,h,mean_re,mean_im,variance,stderr,seed";

impl ExperimentRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:e},{:e},{:e},{:e},{}",
            self.experiment,
            self.cfg.group,
            self.cfg.n,
            self.cfg.t,
            self.k,
            self.stats.n,
            self.cfg.effective_step(),
            self.stats.mean.re,
            self.stats.mean.im,
            self.stats.variance,
            self.stats.stderr,
            self.cfg.seed
        )
    }
}

pub fn experiment_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from(EXPERIMENT_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}
