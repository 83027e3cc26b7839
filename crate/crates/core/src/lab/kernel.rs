//! Split real/imaginary square matrices for the Monte Carlo hot path.
//!
//! Storing the real and imaginary planes separately lets the inner loops of
//! the product run over contiguous `f64` rows, which the compiler
//! vectorizes; at `N = 32` this is several times faster than a generic
//! complex product.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::poly::TracePolynomial;

#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            re: vec![0.0; n * n],
            im: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        m.set_identity();
        m
    }

    pub fn set_identity(&mut self) {
        self.re.fill(0.0);
        self.im.fill(0.0);
        for i in 0..self.n {
            self.re[i * self.n + i] = 1.0;
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let k = i * self.n + j;
        Complex64::new(self.re[k], self.im[k])
    }

    pub fn set(&mut self, i: usize, j: usize, z: Complex64) {
        let k = i * self.n + j;
        self.re[k] = z.re;
        self.im[k] = z.im;
    }

    pub fn from_dmatrix(m: &DMatrix<Complex64>) -> Self {
        let n = m.nrows();
        assert_eq!(n, m.ncols(), "square matrix required");
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, m[(i, j)]);
            }
        }
        out
    }

    pub fn to_dmatrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn copy_from(&mut self, other: &Self) {
        self.re.copy_from_slice(&other.re);
        self.im.copy_from_slice(&other.im);
    }

    /// `self ← a·b`.
    pub fn mul_into(&mut self, a: &Self, b: &Self) {
        let n = self.n;
        self.re.fill(0.0);
        self.im.fill(0.0);
        for i in 0..n {
            let out_re = &mut self.re[i * n..(i + 1) * n];
            let out_im = &mut self.im[i * n..(i + 1) * n];
            for k in 0..n {
                let ar = a.re[i * n + k];
                let ai = a.im[i * n + k];
                let br = &b.re[k * n..(k + 1) * n];
                let bi = &b.im[k * n..(k + 1) * n];
                for j in 0..n {
                    out_re[j] += ar * br[j] - ai * bi[j];
                    out_im[j] += ar * bi[j] + ai * br[j];
                }
            }
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = Self::zeros(self.n);
        out.mul_into(self, rhs);
        out
    }

    /// `self ← self + c·x`.
    pub fn axpy(&mut self, c: Complex64, x: &Self) {
        for k in 0..self.re.len() {
            let (xr, xi) = (x.re[k], x.im[k]);
            self.re[k] += c.re * xr - c.im * xi;
            self.im[k] += c.re * xi + c.im * xr;
        }
    }

    pub fn scale_real(&mut self, c: f64) {
        self.re.iter_mut().for_each(|x| *x *= c);
        self.im.iter_mut().for_each(|x| *x *= c);
    }

    pub fn add_identity(&mut self, c: f64) {
        for i in 0..self.n {
            self.re[i * self.n + i] += c;
        }
    }

    /// Normalized trace.
    pub fn tr(&self) -> Complex64 {
        let n = self.n;
        let (mut r, mut i) = (0.0, 0.0);
        for d in 0..n {
            r += self.re[d * n + d];
            i += self.im[d * n + d];
        }
        Complex64::new(r, i) / n as f64
    }

    /// Maximum absolute column sum, an upper bound for the spectral norm
    /// up to `√N`.
    pub fn norm1(&self) -> f64 {
        let n = self.n;
        (0..n)
            .map(|j| (0..n).map(|i| self.re[i * n + j].hypot(self.im[i * n + j])).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `tr(A*A) = (1/N) Σ |a_ij|²`.
    pub fn tr_gram(&self) -> f64 {
        let s: f64 = self.re.iter().map(|x| x * x).sum::<f64>() + self.im.iter().map(|x| x * x).sum::<f64>();
        s / self.n as f64
    }

    /// `‖A*A − I‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for p in 0..n {
            for q in 0..n {
                let mut g = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    g += self.get(i, p).conj() * self.get(i, q);
                }
                if p == q {
                    g -= 1.0;
                }
                acc += g.norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Modified Gram–Schmidt on the columns, restoring unitarity lost to
    /// rounding.
    pub fn reorthonormalize(&mut self) {
        let n = self.n;
        for j in 0..n {
            for p in 0..j {
                let mut dot = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    dot += self.get(i, p).conj() * self.get(i, j);
                }
                for i in 0..n {
                    let v = self.get(i, j) - dot * self.get(i, p);
                    self.set(i, j, v);
                }
            }
            let norm = (0..n).map(|i| self.get(i, j).norm_sqr()).sum::<f64>().sqrt();
            for i in 0..n {
                let v = self.get(i, j) / norm;
                self.set(i, j, v);
            }
        }
    }
}

/// Scratch space for [`ExpWorkspace::expm`], reused across calls.
#[derive(Clone, Debug)]
pub struct ExpWorkspace {
    a2: CMat,
    a3: CMat,
    a4: CMat,
    block: CMat,
    tmp: CMat,
}

/// Taylor degree of the scaled exponential.
const TAYLOR_DEGREE: usize = 12;
/// Scaling target for the 1-norm; `0.5¹³/13! < 1e-13`.
const THETA: f64 = 0.5;

impl ExpWorkspace {
    pub fn new(n: usize) -> Self {
        Self {
            a2: CMat::zeros(n),
            a3: CMat::zeros(n),
            a4: CMat::zeros(n),
            block: CMat::zeros(n),
            tmp: CMat::zeros(n),
        }
    }

    /// `out ← exp(a)` by scaling and squaring with a degree-12 Taylor
    /// polynomial in Paterson–Stockmeyer form (5 products plus squarings).
    /// `a` is overwritten by its scaled copy.
    pub fn expm(&mut self, a: &mut CMat, out: &mut CMat) {
        let norm = a.norm1();
        let squarings = if norm > THETA {
            (norm / THETA).log2().ceil() as u32
        } else {
            0
        };
        a.scale_real(0.5f64.powi(squarings as i32));

        let mut coef = [0.0; TAYLOR_DEGREE + 1];
        coef[0] = 1.0;
        for k in 1..=TAYLOR_DEGREE {
            coef[k] = coef[k - 1] / k as f64;
        }

        self.a2.mul_into(a, a);
        self.a3.mul_into(&self.a2, a);
        self.a4.mul_into(&self.a2, &self.a2);
        // p = B₀ + A⁴(B₁ + A⁴B₂) with B_i = Σ_{j<4} c_{4i+j} A^j, plus c₁₂A⁴ in B₂.
        let one = Complex64::new(1.0, 0.0);
        self.fill_block(&coef[8..12], a);
        self.block.axpy(Complex64::new(coef[12], 0.0), &self.a4);
        self.tmp.mul_into(&self.a4, &self.block);
        self.fill_block(&coef[4..8], a);
        self.tmp.axpy(one, &self.block);
        out.mul_into(&self.a4, &self.tmp);
        self.fill_block(&coef[0..4], a);
        out.axpy(one, &self.block);

        for _ in 0..squarings {
            self.tmp.mul_into(out, out);
            out.copy_from(&self.tmp);
        }
    }

    /// `block ← c₀I + c₁A + c₂A² + c₃A³`.
    fn fill_block(&mut self, c: &[f64], a: &CMat) {
        self.block.set_identity();
        self.block.scale_real(c[0]);
        self.block.axpy(Complex64::new(c[1], 0.0), a);
        self.block.axpy(Complex64::new(c[2], 0.0), &self.a2);
        self.block.axpy(Complex64::new(c[3], 0.0), &self.a3);
    }
}

/// `p_N(A)` with the normalized trace, for trace polynomials with complex
/// coefficients. `powers` receives `I, A, A², …` as scratch.
pub fn eval_trace_poly(p: &TracePolynomial<Complex64>, a: &CMat, powers: &mut Vec<CMat>) -> CMat {
    let n = a.n();
    let max_u = p.terms().map(|(m, _)| m.u_power()).max().unwrap_or(0);
    let max_pow = max_u.max(p.max_trace_power()) as usize;
    fill_powers(a, max_pow, powers);
    let traces: Vec<Complex64> = powers[..=max_pow].iter().map(CMat::tr).collect();
    let mut out = CMat::zeros(n);
    for (m, c) in p.terms() {
        let mut scalar = *c;
        for (l, mult) in m.traces() {
            scalar *= traces[l as usize].powu(mult);
        }
        out.axpy(scalar, &powers[m.u_power() as usize]);
    }
    out
}

/// Makes `powers[0..=d]` hold `I, A, …, A^d`.
pub fn fill_powers(a: &CMat, d: usize, powers: &mut Vec<CMat>) {
    let n = a.n();
    while powers.len() < d + 1 {
        powers.push(CMat::zeros(n));
    }
    powers[0].set_identity();
    for i in 1..=d {
        let (lo, hi) = powers.split_at_mut(i);
        hi[0].mul_into(&lo[i - 1], a);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> CMat {
        let mut m = CMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale);
            }
        }
        m
    }

    #[test]
    fn product_matches_nalgebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random(7, 1.0, &mut rng);
        let b = random(7, 1.0, &mut rng);
        let diff = (a.mul(&b).to_dmatrix() - a.to_dmatrix() * b.to_dmatrix()).norm();
        assert!(diff < 1e-13);
    }

    #[test]
    fn exponential_matches_nalgebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (n, scale) in [(1, 0.3), (4, 0.1), (6, 1.5), (9, 3.0)] {
            let a = random(n, scale, &mut rng);
            let reference = a.to_dmatrix().exp();
            let mut ws = ExpWorkspace::new(n);
            let mut scaled = a.clone();
            let mut out = CMat::zeros(n);
            ws.expm(&mut scaled, &mut out);
            let err = (out.to_dmatrix() - &reference).norm() / reference.norm();
            assert!(err < 1e-13, "n={n} scale={scale}: {err}");
        }
    }

    #[test]
    fn gram_schmidt_restores_unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut a = random(5, 1.0, &mut rng);
        a.reorthonormalize();
        assert!(a.unitarity_defect() < 1e-13);
    }
}
