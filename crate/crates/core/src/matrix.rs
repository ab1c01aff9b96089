//! Complex 2×2 matrices with a factored-out exponent.
//!
//! Products of many step matrices under a barrier grow like `e^{κΔx}` per
//! segment. Keeping `log` of a common scale beside the entries lets chains of
//! 10⁵ matrices be formed without overflow.

use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// The matrix `e^{scale_log} · [[m11, m12], [m21, m22]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMatrix2 {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
    pub scale_log: f64,
}

impl ComplexMatrix2 {
    pub fn new(m11: Complex64, m12: Complex64, m21: Complex64, m22: Complex64) -> Self {
        ComplexMatrix2 {
            m11,
            m12,
            m21,
            m22,
            scale_log: 0.0,
        }
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self::new(one, zero, zero, one)
    }

    /// Multiplies every entry by `c`.
    pub fn scaled(self, c: Complex64) -> Self {
        ComplexMatrix2 {
            m11: self.m11 * c,
            m12: self.m12 * c,
            m21: self.m21 * c,
            m22: self.m22 * c,
            scale_log: self.scale_log,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.m11, self.m12, self.m21, self.m22]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Determinant of the stored entries, without the scale factor.
    pub fn det_entries(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    /// `ln|det|` of the full matrix.
    pub fn ln_abs_det(&self) -> f64 {
        self.det_entries().norm().ln() + 2.0 * self.scale_log
    }

    /// Full determinant. May overflow for deep chains; prefer `ln_abs_det`.
    pub fn det(&self) -> Complex64 {
        self.det_entries() * (2.0 * self.scale_log).exp()
    }

    /// Entry `(row, col)` of the full matrix, 1-based.
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let e = match (row, col) {
            (1, 1) => self.m11,
            (1, 2) => self.m12,
            (2, 1) => self.m21,
            (2, 2) => self.m22,
            _ => panic!("index ({row}, {col}) out of range for a 2x2 matrix"),
        };
        e * self.scale_log.exp()
    }

    /// Divides out the largest entry magnitude into `scale_log`.
    pub fn renormalize(&mut self) {
        let big = self
            .m11
            .norm()
            .max(self.m12.norm())
            .max(self.m21.norm())
            .max(self.m22.norm());
        if big > 0.0 && big.is_finite() {
            let inv = 1.0 / big;
            self.m11 *= inv;
            self.m12 *= inv;
            self.m21 *= inv;
            self.m22 *= inv;
            self.scale_log += big.ln();
        }
    }

    /// Applies the matrix to a column vector, returning entries without scale.
    pub fn apply_entries(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.m11 * v[0] + self.m12 * v[1],
            self.m21 * v[0] + self.m22 * v[1],
        ]
    }
}

impl Mul for ComplexMatrix2 {
    type Output = ComplexMatrix2;

    fn mul(self, rhs: ComplexMatrix2) -> ComplexMatrix2 {
        ComplexMatrix2 {
            m11: self.m11 * rhs.m11 + self.m12 * rhs.m21,
            m12: self.m11 * rhs.m12 + self.m12 * rhs.m22,
            m21: self.m21 * rhs.m11 + self.m22 * rhs.m21,
            m22: self.m21 * rhs.m12 + self.m22 * rhs.m22,
            scale_log: self.scale_log + rhs.scale_log,
        }
    }
}

/// Running left-multiplication `M_n · … · M_1 · M_0` with renormalization
/// after every factor.
#[derive(Debug, Clone)]
pub struct ChainProduct {
    acc: Option<ComplexMatrix2>,
    count: usize,
}

impl Default for ChainProduct {
    fn default() -> Self {
        Self::new()
    }
}

impl ChainProduct {
    pub fn new() -> Self {
        ChainProduct { acc: None, count: 0 }
    }

    pub fn push(&mut self, m: ComplexMatrix2) -> Result<()> {
        let mut next = match self.acc {
            None => m,
            Some(acc) => m * acc,
        };
        next.renormalize();
        if !next.is_finite() || !next.scale_log.is_finite() {
            return Err(Error::Overflow { segment: self.count });
        }
        self.acc = Some(next);
        self.count += 1;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn finish(self) -> ComplexMatrix2 {
        self.acc.unwrap_or_else(ComplexMatrix2::identity)
    }
}

/// Product of `matrices` ordered `M_0..M_N`, returned as `M_N · … · M_0`.
pub fn chain_product(matrices: &[ComplexMatrix2]) -> Result<ComplexMatrix2> {
    if matrices.len() < 2 {
        return Err(Error::param(
            "matrices",
            format!("chain needs at least 2 factors, got {}", matrices.len()),
        ));
    }
    let mut chain = ChainProduct::new();
    for m in matrices {
        chain.push(*m)?;
    }
    Ok(chain.finish())
}
