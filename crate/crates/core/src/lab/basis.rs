//! Orthonormal bases of `u(N)` and `gl(N; ℂ)` for `⟨X, Y⟩_N = N·Re Tr(X*Y)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Group {
    /// `U(N)`, Lie algebra `u(N)`.
    Unitary,
    /// `GL(N; ℂ)`, Lie algebra `gl(N; ℂ) = u(N) ⊕ i·u(N)`.
    General,
}

impl Group {
    pub fn name(self) -> &'static str {
        match self {
            Group::Unitary => "u",
            Group::General => "gl",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Group {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "u" | "U" => Ok(Group::Unitary),
            "gl" | "GL" => Ok(Group::General),
            _ => Err(Error::Parse(format!("unknown group {s:?} (expected u or gl)"))),
        }
    }
}

pub fn inner(n: usize, x: &DMatrix<Complex64>, y: &DMatrix<Complex64>) -> f64 {
    n as f64 * (x.adjoint() * y).trace().re
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrthonormalBasis {
    pub group: Group,
    pub n: usize,
    pub elements: Vec<DMatrix<Complex64>>,
}

impl OrthonormalBasis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Largest entry of `Gram − I`.
    pub fn gram_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, x) in self.elements.iter().enumerate() {
            for (j, y) in self.elements.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((inner(self.n, x, y) - target).abs());
            }
        }
        worst
    }
}

/// Diagonal elements `iE_jj/√N`, then for each `j < k` the pair
/// `(E_jk − E_kj)/√(2N)`, `i(E_jk + E_kj)/√(2N)`. The `gl` basis appends `i`
/// times each of these.
pub fn onb(group: Group, n: usize) -> Result<OrthonormalBasis> {
    if n == 0 {
        return Err(Error::ZeroN);
    }
    let i = Complex64::i();
    let diag = 1.0 / (n as f64).sqrt();
    let off = 1.0 / (2.0 * n as f64).sqrt();
    let mut elements = Vec::with_capacity(n * n);
    for j in 0..n {
        let mut x = DMatrix::zeros(n, n);
        x[(j, j)] = i * diag;
        elements.push(x);
    }
    for j in 0..n {
        for k in j + 1..n {
            let mut x = DMatrix::zeros(n, n);
            x[(j, k)] = Complex64::new(off, 0.0);
            x[(k, j)] = Complex64::new(-off, 0.0);
            elements.push(x);
            let mut y = DMatrix::zeros(n, n);
            y[(j, k)] = i * off;
            y[(k, j)] = i * off;
            elements.push(y);
        }
    }
    if group == Group::General {
        let imaginary: Vec<_> = elements.iter().map(|x| x * i).collect();
        elements.extend(imaginary);
    }
    Ok(OrthonormalBasis { group, n, elements })
}
