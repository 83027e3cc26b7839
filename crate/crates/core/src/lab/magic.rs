//! The four basis-summation identities on `u(N)` and the finite-difference
//! Laplacian built from left-invariant derivatives.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lab::basis::{onb, Group};
use crate::poly::TracePolynomial;

type M = DMatrix<Complex64>;

fn tr(a: &M) -> Complex64 {
    a.trace() / a.nrows() as f64
}

/// Frobenius norms of the four defects
/// `ΣX_j² + I`, `ΣX_jAX_j + tr(A)I`, `Σtr(X_jA)X_j + A/N²` and
/// `Σtr(X_jA)tr(X_jB) + tr(AB)/N²`.
pub fn verify_magic(n: usize, a: &M, b: &M) -> Result<[f64; 4]> {
    for m in [a, b] {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: format!("{n}x{n}"),
                got: format!("{}x{}", m.nrows(), m.ncols()),
            });
        }
    }
    let basis = onb(Group::Unitary, n)?;
    let id = M::identity(n, n);
    let n2 = (n * n) as f64;
    let mut s1 = id.clone();
    let mut s2 = &id * tr(a);
    let mut s3 = a * Complex64::new(1.0 / n2, 0.0);
    let mut s4 = tr(&(a * b)) / n2;
    for x in &basis.elements {
        s1 += x * x;
        s2 += x * a * x;
        let xa = tr(&(x * a));
        s3 += x * xa;
        s4 += xa * tr(&(x * b));
    }
    Ok([s1.norm(), s2.norm(), s3.norm(), s4.norm()])
}

/// `Σ_j [p_N(Ue^{hX_j}) − 2p_N(U) + p_N(Ue^{−hX_j})]/h²` over the `u(N)`
/// basis, approximating `Δ_N p_N` at `U` to `O(h²)`.
pub fn laplacian_fd<R>(p: &TracePolynomial<R>, u: &M, h: f64) -> Result<M>
where
    R: crate::scalar::Scalar + crate::scalar::ToComplex,
{
    if !(1e-5..=1e-2).contains(&h) {
        return Err(Error::InvalidConfig(format!("finite-difference step {h} outside [1e-5, 1e-2]")));
    }
    let n = u.nrows();
    if n == 0 || u.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: "nonempty square matrix".into(),
            got: format!("{}x{}", u.nrows(), u.ncols()),
        });
    }
    let p = p.to_complex();
    let center = p.evaluate_matrix(u)?;
    let mut out = M::zeros(n, n);
    for x in &onb(Group::Unitary, n)?.elements {
        let hx = x * Complex64::new(h, 0.0);
        let forward = p.evaluate_matrix(&(u * hx.clone().exp()))?;
        let backward = p.evaluate_matrix(&(u * (-hx).exp()))?;
        out += forward + backward - &center * Complex64::new(2.0, 0.0);
    }
    Ok(out * Complex64::new(1.0 / (h * h), 0.0))
}
