//! Two-component spinors and 2×2 complex matrices (Pauli algebra).

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

pub type C64 = num_complex::Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Spinor value `(u₁, u₂)`.
pub type Spinor = [C64; 2];

#[inline]
pub fn spinor_norm(v: &Spinor) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

#[inline]
pub fn spinor_add(a: Spinor, b: Spinor) -> Spinor {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn spinor_sub(a: Spinor, b: Spinor) -> Spinor {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn spinor_scale(s: C64, a: Spinor) -> Spinor {
    [s * a[0], s * a[1]]
}

/// Dense 2×2 complex matrix, row major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[ZERO, ZERO], [ZERO, ZERO]]);
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);

    #[inline]
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    #[inline]
    pub fn diag(a: C64, d: C64) -> Self {
        Mat2([[a, ZERO], [ZERO, d]])
    }

    #[inline]
    pub fn scalar(s: C64) -> Self {
        Mat2::diag(s, s)
    }

    #[inline]
    pub fn real_diag(a: f64, d: f64) -> Self {
        Mat2::diag(C64::new(a, 0.0), C64::new(d, 0.0))
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[i][j]
    }

    /// Conjugate transpose.
    #[inline]
    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    #[inline]
    pub fn det(&self) -> C64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    #[inline]
    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.norm() == 0.0 {
            return None;
        }
        let m = &self.0;
        Some(Mat2([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]))
    }

    #[inline]
    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Mat2([[s * m[0][0], s * m[0][1]], [s * m[1][0], s * m[1][1]]])
    }

    #[inline]
    pub fn scale_re(&self, s: f64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    #[inline]
    pub fn apply(&self, v: &Spinor) -> Spinor {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    #[inline]
    pub fn column(&self, j: usize) -> Spinor {
        [self.0[0][j], self.0[1][j]]
    }

    /// Max-entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0f64, |a, z| a.max(z.norm()))
    }

    /// Eigenvalues via the characteristic polynomial.
    pub fn eigenvalues(&self) -> [C64; 2] {
        let t = self.trace();
        let d = self.det();
        let disc = (t * t - 4.0 * d).sqrt();
        [(t + disc) * 0.5, (t - disc) * 0.5]
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    #[inline]
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2([[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]])
    }
}

impl AddAssign for Mat2 {
    #[inline]
    fn add_assign(&mut self, o: Mat2) {
        *self = *self + o;
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    #[inline]
    fn sub(self, o: Mat2) -> Mat2 {
        self + (-o)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    #[inline]
    fn neg(self) -> Mat2 {
        self.scale_re(-1.0)
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    #[inline]
    fn mul(self, s: f64) -> Mat2 {
        self.scale_re(s)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    #[inline]
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

pub const SIGMA1: Mat2 = Mat2([[ZERO, ONE], [ONE, ZERO]]);
pub const SIGMA2: Mat2 = Mat2([[ZERO, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), ZERO]]);
pub const SIGMA3: Mat2 = Mat2([[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]]);

/// `v·σ = v₁σ₁ + v₂σ₂` for a real 2-vector.
#[inline]
pub fn dot_sigma(v: [f64; 2]) -> Mat2 {
    Mat2([
        [ZERO, C64::new(v[0], -v[1])],
        [C64::new(v[0], v[1]), ZERO],
    ])
}

/// Component selection masks `M₁ = diag(1,0)`, `M₂ = diag(0,1)`.
pub const M1: Mat2 = Mat2([[ONE, ZERO], [ZERO, ZERO]]);
pub const M2: Mat2 = Mat2([[ZERO, ZERO], [ZERO, ONE]]);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_algebra() {
        let id = Mat2::IDENTITY;
        for s in [SIGMA1, SIGMA2, SIGMA3] {
            assert!((s * s - id).max_abs() < 1e-15);
        }
        // σ₁σ₂ = iσ₃
        assert!((SIGMA1 * SIGMA2 - SIGMA3.scale(I)).max_abs() < 1e-15);
        assert!((dot_sigma([0.3, -0.7]) - (SIGMA1.scale_re(0.3) + SIGMA2.scale_re(-0.7))).max_abs() < 1e-15);
    }

    #[test]
    fn inverse_roundtrip() {
        let a = Mat2::new(C64::new(1.0, 2.0), C64::new(-0.5, 0.1), C64::new(0.3, 0.0), C64::new(2.0, -1.0));
        let inv = a.inverse().unwrap();
        assert!((a * inv - Mat2::IDENTITY).max_abs() < 1e-14);
        let ev = a.eigenvalues();
        assert!((ev[0] * ev[1] - a.det()).norm() < 1e-14);
    }
}
