//! Truncated power series in `z` and the generating functions of the
//! two-parameter transform.
//!
//! `φ^{s,u}(t, z) = Σ_k p_k^{s,t}(u) z^k` collects the polynomials whose
//! transform is `z^k`. At `s = t` it has the closed form
//! `(1 − u z E(z))^{−1} − 1` with `E(z) = exp((t/2)(1+z)/(1−z))`; in general
//! it is recovered from the implicit identity
//! `φ(t, z e^{(s−t)(1+z)/(2(1−z))}) = (1 − u z e^{(s/2)(1+z)/(1−z)})^{−1} − 1`
//! by reverting the inner series.
//!
//! Cost: `mul` and `compose` step are `O(K²)` coefficient products, so
//! `compose` is `O(K³)` and `revert` `O(K⁴)`; all negligible at `K ≈ 16`.

use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::heat::HeatEngine;
use crate::scalar::Scalar;
use crate::single_var::{SingleVarPoly, Var};

/// Default truncation order.
pub const DEFAULT_ORDER: usize = 16;

/// Series coefficients: complex numbers or polynomials in `u`.
pub trait SeriesCoeff: Scalar {
    fn scale_c(&self, c: Complex64) -> Self;
    /// Size used in residual reports (largest coefficient modulus).
    fn magnitude(&self) -> f64;
}

impl SeriesCoeff for Complex64 {
    fn scale_c(&self, c: Complex64) -> Self {
        self * c
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

pub type UPoly = SingleVarPoly<Complex64>;

impl SeriesCoeff for UPoly {
    fn scale_c(&self, c: Complex64) -> Self {
        self.scale(&c)
    }
    fn magnitude(&self) -> f64 {
        self.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// `c₀ + c₁z + … + c_K z^K`, known modulo `z^{K+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FormalSeries<C> {
    coeffs: Vec<C>,
}

impl<C: SeriesCoeff> FormalSeries<C> {
    /// Pads with zeros or truncates to order `order`.
    pub fn new(order: usize, mut coeffs: Vec<C>) -> Self {
        coeffs.resize(order + 1, C::zero());
        Self { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::new(order, Vec::new())
    }

    pub fn constant(order: usize, c: C) -> Self {
        Self::new(order, vec![c])
    }

    /// The series `z`.
    pub fn z(order: usize) -> Self {
        Self::new(order, vec![C::zero(), C::one()])
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> C {
        self.coeffs.get(k).cloned().unwrap_or_else(C::zero)
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self::new(order, self.coeffs[..=order.min(self.order())].to_vec())
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let order = self.order().min(rhs.order());
        Self::new(order, (0..=order).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let order = self.order().min(rhs.order());
        Self::new(order, (0..=order).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let order = self.order().min(rhs.order());
        let mut out = vec![C::zero(); order + 1];
        for (i, a) in self.coeffs[..=order].iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs[..=order - i].iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self { coeffs: out }
    }

    pub fn scale_c(&self, c: Complex64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a.scale_c(c)).collect(),
        }
    }

    /// Product with a complex-coefficient series.
    pub fn mul_complex(&self, rhs: &FormalSeries<Complex64>) -> Self {
        let order = self.order().min(rhs.order());
        let mut out = vec![C::zero(); order + 1];
        for (i, a) in self.coeffs[..=order].iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs[..=order - i].iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.scale_c(*b);
            }
        }
        Self { coeffs: out }
    }

    /// `d/dz`, one order lower.
    pub fn derivative(&self) -> Self {
        let order = self.order().saturating_sub(1);
        Self::new(
            order,
            (1..=self.order())
                .map(|k| self.coeffs[k].scale_c(Complex64::new(k as f64, 0.0)))
                .collect(),
        )
    }

    /// `z·d/dz`, same order.
    pub fn z_derivative(&self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c.scale_c(Complex64::new(k as f64, 0.0)))
                .collect(),
        }
    }

    /// `f(g(z))` for `g(0) = 0`, by Horner's rule.
    pub fn compose(&self, g: &FormalSeries<Complex64>) -> Result<Self> {
        if g.coeff(0) != Complex64::zero() {
            return Err(Error::InvalidConfig("inner series must have zero constant term".into()));
        }
        let order = self.order().min(g.order());
        let mut acc = Self::constant(order, self.coeff(order));
        for n in (0..order).rev() {
            acc = acc.mul_complex(g);
            acc.coeffs[0] = acc.coeffs[0].clone() + self.coeff(n);
        }
        Ok(acc)
    }

    /// `(1 − f)^{−1} − 1 = Σ_{n≥1} fⁿ` for `f(0) = 0`.
    pub fn geometric_tail(&self) -> Self {
        let order = self.order();
        let mut power = self.clone();
        let mut out = self.clone();
        for _ in 2..=order {
            power = power.mul(self);
            out = out.add(&power);
        }
        out
    }

    /// Largest coefficient magnitude over orders `from..=to`.
    pub fn max_magnitude(&self, from: usize, to: usize) -> f64 {
        (from..=to.min(self.order()))
            .map(|k| self.coeffs[k].magnitude())
            .fold(0.0, f64::max)
    }
}

impl FormalSeries<Complex64> {
    pub fn from_real(order: usize, coeffs: &[f64]) -> Self {
        Self::new(order, coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Compositional inverse by the fixed-point update
    /// `g ← g − (f∘g − z)/f₁`, which fixes one more coefficient per step.
    pub fn revert(&self) -> Result<Self> {
        if self.coeff(0) != Complex64::zero() {
            return Err(Error::InvalidConfig("series to revert must have zero constant term".into()));
        }
        let f1 = self.coeff(1);
        if f1 == Complex64::zero() {
            return Err(Error::ZeroLinearCoefficient);
        }
        let order = self.order();
        let inv = f1.inv();
        let z = Self::z(order);
        let mut g = z.scale_c(inv);
        for _ in 1..order {
            let defect = self.compose(&g)?.sub(&z);
            g = g.sub(&defect.scale_c(inv));
        }
        Ok(g)
    }

    /// `exp(f)`, split as `e^{f₀}·exp(f − f₀)`.
    pub fn exp(&self) -> Self {
        let order = self.order();
        let mut e = vec![Complex64::zero(); order + 1];
        e[0] = Complex64::one();
        for n in 1..=order {
            let sum: Complex64 = (1..=n).map(|k| self.coeffs[k] * (k as f64) * e[n - k]).sum();
            e[n] = sum / n as f64;
        }
        let c0 = self.coeffs[0].exp();
        Self {
            coeffs: e.into_iter().map(|x| x * c0).collect(),
        }
    }

    /// `exp(a(1+z)/(1−z)) = e^a·exp(2a Σ_{n≥1} zⁿ)`.
    pub fn exp_mobius(a: f64, order: usize) -> Self {
        let mut h = vec![Complex64::new(a, 0.0)];
        h.extend((1..=order).map(|_| Complex64::new(2.0 * a, 0.0)));
        Self::new(order, h).exp()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::zero(), |acc, c| acc * z + c)
    }
}

impl<C: SeriesCoeff + fmt::Display> fmt::Display for FormalSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => format!("({c})"),
                1 => format!("({c})·z"),
                _ => format!("({c})·z^{k}"),
            })
            .collect();
        if parts.is_empty() {
            write!(f, "O(z^{})", self.order() + 1)
        } else {
            write!(f, "{} + O(z^{})", parts.join(" + "), self.order() + 1)
        }
    }
}

fn check_params(s: f64, t: f64) -> Result<()> {
    let ok = t >= 0.0 && (s == t || s > t / 2.0);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "need t ≥ 0 and either s = t or s > t/2 (got s = {s}, t = {t})"
        )))
    }
}

/// `(1 − u z e^{a(1+z)/(1−z)})^{−1} − 1` as a series with `u`-polynomial
/// coefficients.
fn geometric_in_u(a: f64, order: usize) -> FormalSeries<UPoly> {
    let e = FormalSeries::exp_mobius(a, order);
    let mut coeffs = vec![UPoly::zero_in(Var::U)];
    coeffs.extend((0..order).map(|k| UPoly::monomial(Var::U, 1, e.coeff(k))));
    FormalSeries::new(order, coeffs).geometric_tail()
}

fn series_to_list(phi: &FormalSeries<UPoly>) -> Vec<UPoly> {
    (1..=phi.order()).map(|k| phi.coeff(k).with_var(Var::U)).collect()
}

/// `φ^{t,u}(t, ·)` from the closed form.
pub fn phi_tt_series(t: f64, order: usize) -> Result<FormalSeries<UPoly>> {
    check_params(t, t)?;
    Ok(geometric_in_u(t / 2.0, order))
}

fn phi_st_unchecked(s: f64, t: f64, order: usize) -> Result<FormalSeries<UPoly>> {
    let w = FormalSeries::exp_mobius((s - t) / 2.0, order).mul(&FormalSeries::z(order));
    let z_of_w = w.revert()?;
    geometric_in_u(s / 2.0, order).compose(&z_of_w)
}

/// `φ^{s,u}(t, ·)` through reversion of `w(z) = z e^{(s−t)(1+z)/(2(1−z))}`.
pub fn phi_st_series(s: f64, t: f64, order: usize) -> Result<FormalSeries<UPoly>> {
    check_params(s, t)?;
    phi_st_unchecked(s, t, order)
}

/// `p_1^{t,t}, …, p_K^{t,t}`.
pub fn expand_phi_tt(t: f64, order: usize) -> Result<Vec<UPoly>> {
    Ok(series_to_list(&phi_tt_series(t, order)?))
}

/// `p_1^{s,t}, …, p_K^{s,t}`.
pub fn expand_phi_st(s: f64, t: f64, order: usize) -> Result<Vec<UPoly>> {
    Ok(series_to_list(&phi_st_series(s, t, order)?))
}

/// `ρ(s, z) = Σ_{k≤K} ν_k(s) zᵏ`.
pub fn rho_series(engine: &HeatEngine, s: f64, order: usize) -> Result<FormalSeries<Complex64>> {
    if !(s >= 0.0) {
        return Err(Error::InvalidConfig(format!("need s ≥ 0, got {s}")));
    }
    Ok(rho_unchecked(engine, s, order))
}

fn rho_unchecked(engine: &HeatEngine, s: f64, order: usize) -> FormalSeries<Complex64> {
    let table = engine.moment_table(order as u32);
    let mut coeffs = vec![Complex64::zero()];
    coeffs.extend((1..=order as u32).map(|k| Complex64::new(table.eval(k, s), 0.0)));
    FormalSeries::new(order, coeffs)
}

fn trace_with_moments(p: &UPoly, moments: &[f64]) -> Complex64 {
    p.coeffs()
        .iter()
        .enumerate()
        .map(|(j, c)| if j == 0 { *c } else { c * moments[j - 1] })
        .sum()
}

fn psi_from_phi(engine: &HeatEngine, phi: &FormalSeries<UPoly>, s: f64) -> FormalSeries<Complex64> {
    let order = phi.order();
    let table = engine.moment_table(order as u32);
    let moments: Vec<f64> = (1..=order as u32).map(|k| table.eval(k, s)).collect();
    FormalSeries::new(order, phi.coeffs().iter().map(|p| trace_with_moments(p, &moments)).collect())
}

/// `ψ^s(t, z) = Σ_k tr(p_k^{s,t}) zᵏ` with the trace taken against the
/// large-N moments `ν_j(s)`.
pub fn psi_series(engine: &HeatEngine, s: f64, t: f64, order: usize) -> Result<FormalSeries<Complex64>> {
    let phi = phi_st_series(s, t, order)?;
    Ok(psi_from_phi(engine, &phi, s))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pde {
    Rho,
    Psi,
    Phi,
}

impl Pde {
    pub fn name(self) -> &'static str {
        match self {
            Pde::Rho => "rho",
            Pde::Psi => "psi",
            Pde::Phi => "phi",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "rho" => Some(Pde::Rho),
            "psi" => Some(Pde::Psi),
            "phi" => Some(Pde::Phi),
            _ => None,
        }
    }
}

/// Step of the centered time difference in [`pde_residual`].
pub const FD_STEP: f64 = 1e-4;
/// Residual magnitude above which an order is flagged.
pub const FLAG_THRESHOLD: f64 = 1e-6;

/// Per-order magnitudes of a PDE residual and of its initial condition.
#[derive(Clone, Debug, PartialEq)]
pub struct PdeReport {
    pub which: Pde,
    pub s: f64,
    pub t: f64,
    pub order: usize,
    /// `residual[k]` is the size of the `zᵏ` coefficient, `k = 0..order`.
    pub residual: Vec<f64>,
    /// The initial condition's defect, orders `0..=order`.
    pub initial: Vec<f64>,
}

impl PdeReport {
    pub fn flagged(&self) -> Vec<usize> {
        self.residual
            .iter()
            .enumerate()
            .filter(|(_, r)| **r > FLAG_THRESHOLD)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn max_initial(&self) -> f64 {
        self.initial.iter().copied().fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("pde,s,t,kind,k,magnitude,flagged\n");
        for (kind, values) in [("residual", &self.residual), ("initial", &self.initial)] {
            for (k, r) in values.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{kind},{k},{r:e},{}\n",
                    self.which.name(),
                    self.s,
                    self.t,
                    *r > FLAG_THRESHOLD
                ));
            }
        }
        out
    }
}

fn magnitudes<C: SeriesCoeff>(f: &FormalSeries<C>, to: usize) -> Vec<f64> {
    (0..=to).map(|k| f.coeff(k).magnitude()).collect()
}

/// Substitutes the computed series into one of the three PDEs and reports
/// the residual through order `K − 1`, with time derivatives by centered
/// differences. Nothing is asserted.
///
/// * `rho`: `∂_s ρ + s ρ ∂_z ρ`, initial `ρ(0,z) − z/(1−z)`.
/// * `psi`: `∂_t ψ − z ψ ∂_z ψ`, initial `ψ^s(0,z) − ρ(s, e^{−s/2} z)`.
/// * `phi`: `∂_t φ − z ψ ∂_z φ`, initial `φ(0,z) − uz/(1−uz)`.
pub fn pde_residual(engine: &HeatEngine, which: Pde, s: f64, t: f64, order: usize) -> Result<PdeReport> {
    if order < 2 {
        return Err(Error::InvalidConfig("residual needs order ≥ 2".into()));
    }
    let h = FD_STEP;
    let top = order - 1;
    let (residual, initial) = match which {
        Pde::Rho => {
            if !(s >= 0.0) {
                return Err(Error::InvalidConfig(format!("need s ≥ 0, got {s}")));
            }
            let rho = rho_unchecked(engine, s, order);
            let ds = rho_unchecked(engine, s + h, order)
                .sub(&rho_unchecked(engine, s - h, order))
                .scale_c(Complex64::new(1.0 / (2.0 * h), 0.0));
            let transport = rho.mul(&rho.derivative()).scale_c(Complex64::new(s, 0.0));
            let r = ds.truncate(top).add(&transport);
            let rho0 = rho_unchecked(engine, 0.0, order);
            let geometric = FormalSeries::new(order, (0..=order).map(|k| Complex64::new(f64::from(k > 0), 0.0)).collect());
            (magnitudes(&r, top), magnitudes(&rho0.sub(&geometric), order))
        }
        Pde::Psi | Pde::Phi => {
            check_params(s, t)?;
            let phi = phi_st_unchecked(s, t, order)?;
            let psi = psi_from_phi(engine, &phi, s);
            let diff = Complex64::new(1.0 / (2.0 * h), 0.0);
            let phi_plus = phi_st_unchecked(s, t + h, order)?;
            let phi_minus = phi_st_unchecked(s, t - h, order)?;
            let initial_phi = phi_st_unchecked(s, 0.0, order)?;
            if which == Pde::Psi {
                let dt = psi_from_phi(engine, &phi_plus, s)
                    .sub(&psi_from_phi(engine, &phi_minus, s))
                    .scale_c(diff);
                let r = dt.sub(&psi.z_derivative().mul(&psi)).truncate(top);
                let psi0 = psi_from_phi(engine, &initial_phi, s);
                let rho = rho_unchecked(engine, s, order);
                let target = FormalSeries::new(
                    order,
                    (0..=order)
                        .map(|k| rho.coeff(k) * (-(k as f64) * s / 2.0).exp())
                        .collect(),
                );
                (magnitudes(&r, top), magnitudes(&psi0.sub(&target), order))
            } else {
                let dt = phi_plus.sub(&phi_minus).scale_c(diff);
                let r = dt.sub(&phi.z_derivative().mul_complex(&psi)).truncate(top);
                let target = FormalSeries::new(
                    order,
                    (0..=order)
                        .map(|k| {
                            if k == 0 {
                                UPoly::zero_in(Var::U)
                            } else {
                                UPoly::monomial(Var::U, k, Complex64::one())
                            }
                        })
                        .collect(),
                );
                (magnitudes(&r, top), magnitudes(&initial_phi.sub(&target), order))
            }
        }
    };
    Ok(PdeReport {
        which,
        s,
        t,
        order,
        residual,
        initial,
    })
}

/// The `p_k` table as CSV: `k, j, coeff_re, coeff_im` for the coefficient of
/// `u^j` in `p_k`, zero coefficients included up to degree `k`.
pub fn pk_table_csv(ps: &[UPoly]) -> String {
    let mut out = String::from("k,j,coeff_re,coeff_im\n");
    for (i, p) in ps.iter().enumerate() {
        let k = i + 1;
        for j in 0..=k {
            let c = p.coeff(j);
            out.push_str(&format!("{k},{j},{:e},{:e}\n", c.re, c.im));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn revert_identity_and_mobius() {
        let z = FormalSeries::<Complex64>::z(10);
        assert_eq!(z.revert().unwrap(), z);
        // z/(1−z) reverts to w/(1+w)
        let f = FormalSeries::from_real(10, &[0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        let g = f.revert().unwrap();
        for k in 1..=10 {
            let expect = if k % 2 == 1 { 1.0 } else { -1.0 };
            assert!((g.coeff(k) - c(expect)).norm() < 1e-12, "k={k}");
        }
        let flat = FormalSeries::from_real(4, &[0.0, 0.0, 1.0]);
        assert!(matches!(flat.revert(), Err(Error::ZeroLinearCoefficient)));
    }

    #[test]
    fn exp_matches_closed_form() {
        let e = FormalSeries::from_real(8, &[0.3, 1.0]).exp();
        let mut fact = 1.0;
        for k in 0..=8 {
            if k > 0 {
                fact *= k as f64;
            }
            assert!((e.coeff(k) - c(0.3f64.exp() / fact)).norm() < 1e-14);
        }
    }

    #[test]
    fn phi_tt_first_terms() {
        let t = 1.0;
        let ps = expand_phi_tt(t, 6).unwrap();
        assert!((ps[0].coeff(1) - c((t / 2.0).exp())).norm() < 1e-14);
        assert!(ps[0].coeff(0).norm() < 1e-15);
        assert!((ps[1].coeff(2) - c(t.exp())).norm() < 1e-13);
        assert!((ps[1].coeff(1) - c(t * (t / 2.0).exp())).norm() < 1e-13);
        let zero = expand_phi_tt(0.0, 6).unwrap();
        for (i, p) in zero.iter().enumerate() {
            assert_eq!(p, &UPoly::monomial(Var::U, i + 1, Complex64::one()));
        }
    }

    #[test]
    fn rho_residual_order_one() {
        let engine = HeatEngine::new();
        let s = 0.8;
        let report = pde_residual(&engine, Pde::Rho, s, 0.0, 8).unwrap();
        let expect = (-0.5 * (-s / 2.0).exp() + s * (-s).exp()).abs();
        assert!((report.residual[1] - expect).abs() < 1e-7);
        assert!(report.max_initial() < 1e-15);
    }

    #[test]
    fn parameter_domain() {
        assert!(expand_phi_st(0.2, 1.0, 4).is_err());
        assert!(expand_phi_st(1.0, 0.5, 4).is_ok());
    }

    #[test]
    fn pk_csv_shape() {
        let ps = expand_phi_tt(0.0, 2).unwrap();
        assert_eq!(pk_table_csv(&ps), "k,j,coeff_re,coeff_im\n1,0,0e0,0e0\n1,1,1e0,0e0\n2,0,0e0,0e0\n2,1,0e0,0e0\n2,2,1e0,0e0\n");
    }

    #[test]
    fn transform_of_pk_is_zk() {
        let engine = HeatEngine::new();
        for t in [0.5, 1.0] {
            for (i, p) in expand_phi_tt(t, 8).unwrap().iter().enumerate() {
                let q = engine.free_hall_numeric(p, t);
                let zk = UPoly::monomial(Var::Z, i + 1, Complex64::one());
                assert!(q.max_abs_diff(&zk) < 1e-10, "k={} t={t}: {}", i + 1, q.max_abs_diff(&zk));
            }
        }
    }
}
