//! Modified Bessel functions K₀, K₁ (and I₀, I₁) for positive real argument,
//! and the Dirac / Klein–Gordon Green's functions built from them.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spinor::{dot_sigma, Mat2, C64, SIGMA3};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Beyond this argument e^{-x} is replaced by an exact zero.
const UNDERFLOW_ARG: f64 = 700.0;

/// Series for x ≤ 2: returns (K₀, K₁, I₀, I₁).
fn small_series(x: f64) -> (f64, f64, f64, f64) {
    let y = 0.25 * x * x;
    let (mut i0, mut i1s) = (0.0, 0.0);
    let (mut s0, mut s1) = (0.0, 0.0);
    // t0 = y^k/(k!)², t1 = y^k/(k!(k+1)!), hk = H_k
    let (mut t0, mut t1, mut hk) = (1.0f64, 1.0f64, 0.0f64);
    for k in 0..60 {
        let kf = k as f64;
        let hk1 = hk + 1.0 / (kf + 1.0);
        i0 += t0;
        i1s += t1;
        s0 += hk * t0;
        s1 += (hk + hk1) * t1;
        if t0 < 1e-18 * i0 {
            break;
        }
        t0 *= y / ((kf + 1.0) * (kf + 1.0));
        t1 *= y / ((kf + 1.0) * (kf + 2.0));
        hk = hk1;
    }
    let i1 = 0.5 * x * i1s;
    let l = (0.5 * x).ln() + EULER_GAMMA;
    let k0 = -l * i0 + s0;
    let k1 = 1.0 / x + l * i1 - 0.25 * x * s1;
    (k0, k1, i0, i1)
}

/// Steed's continued fraction (Temme CF2) for x > 2: returns (eˣK₀, eˣK₁).
fn cf2_scaled(x: f64) -> (f64, f64) {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let (mut q1, mut q2) = (0.0f64, 1.0f64);
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..10_000 {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0 = (PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

fn check_arg(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("Bessel K requires finite x > 0, got {x}")));
    }
    Ok(())
}

/// (K₀(x), K₁(x)) without argument checks; x > 0.
#[inline]
pub fn k01(x: f64) -> (f64, f64) {
    if x <= 2.0 {
        let (k0, k1, _, _) = small_series(x);
        (k0, k1)
    } else if x > UNDERFLOW_ARG {
        (0.0, 0.0)
    } else {
        let (a, b) = cf2_scaled(x);
        let e = (-x).exp();
        (a * e, b * e)
    }
}

/// (eˣK₀(x), eˣK₁(x)); x > 0.
#[inline]
pub fn k01_scaled(x: f64) -> (f64, f64) {
    if x <= 2.0 {
        let (k0, k1, _, _) = small_series(x);
        let e = x.exp();
        (k0 * e, k1 * e)
    } else {
        cf2_scaled(x)
    }
}

pub fn bessel_k0(x: f64) -> Result<f64> {
    check_arg(x)?;
    Ok(k01(x).0)
}

pub fn bessel_k1(x: f64) -> Result<f64> {
    check_arg(x)?;
    Ok(k01(x).1)
}

pub fn bessel_k0_scaled(x: f64) -> Result<f64> {
    check_arg(x)?;
    Ok(k01_scaled(x).0)
}

pub fn bessel_k1_scaled(x: f64) -> Result<f64> {
    check_arg(x)?;
    Ok(k01_scaled(x).1)
}

/// (I₀(x), I₁(x)) for moderate x ≥ 0 (power series; used only inside near rules).
pub fn bessel_i01(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let (mut i0, mut i1s) = (0.0, 0.0);
    let (mut t0, mut t1) = (1.0f64, 1.0f64);
    for k in 0..400 {
        let kf = k as f64;
        i0 += t0;
        i1s += t1;
        if t0 < 1e-18 * i0 && kf > y.sqrt() {
            break;
        }
        t0 *= y / ((kf + 1.0) * (kf + 1.0));
        t1 *= y / ((kf + 1.0) * (kf + 2.0));
    }
    (i0, 0.5 * x * i1s)
}

/// Log-split of K₀: returns (I₀(x), K₀(x) + I₀(x)·ln x), the second entry smooth in x².
pub fn k0_log_split(x: f64) -> (f64, f64) {
    if x == 0.0 {
        return (1.0, std::f64::consts::LN_2 - EULER_GAMMA);
    }
    if x <= 2.0 {
        let y = 0.25 * x * x;
        let mut i0 = 0.0;
        let mut s0 = 0.0;
        let (mut t0, mut hk) = (1.0f64, 0.0f64);
        for k in 0..60 {
            let kf = k as f64;
            i0 += t0;
            s0 += hk * t0;
            if t0 < 1e-18 * i0 {
                break;
            }
            t0 *= y / ((kf + 1.0) * (kf + 1.0));
            hk += 1.0 / (kf + 1.0);
        }
        (i0, (std::f64::consts::LN_2 - EULER_GAMMA) * i0 + s0)
    } else {
        let (i0, _) = bessel_i01(x);
        (i0, k01(x).0 + i0 * x.ln())
    }
}

/// Region-dependent constants of the Green's function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreensParams {
    pub m_signed: f64,
    pub e: f64,
    pub omega: f64,
}

impl GreensParams {
    pub fn new(m_signed: f64, e: f64) -> Result<Self> {
        if !(e.abs() < m_signed.abs()) {
            return Err(Error::Precondition(format!(
                "|E| < |m| required (m={m_signed}, E={e})"
            )));
        }
        let omega = ((m_signed - e) * (m_signed + e)).sqrt();
        Ok(Self { m_signed, e, omega })
    }

    /// Same ω and E with the mass sign flipped (Ω₁ ↔ Ω₂).
    pub fn with_mass(&self, m_signed: f64) -> Self {
        Self { m_signed, ..*self }
    }
}

/// Dirac Green's kernel for separation d = x − y (r > 0, unchecked).
#[inline]
pub fn dirac_kernel(d: [f64; 2], p: &GreensParams) -> Mat2 {
    let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
    let (k0, k1) = k01(p.omega * r);
    dirac_kernel_from_bessel(d, r, k0, k1, p)
}

#[inline]
pub fn dirac_kernel_from_bessel(d: [f64; 2], r: f64, k0: f64, k1: f64, p: &GreensParams) -> Mat2 {
    let c = 1.0 / (2.0 * PI);
    let a = C64::new(0.0, c * p.omega * k1 / r);
    let ds = dot_sigma(d).scale(a);
    let diag = Mat2::real_diag(c * k0 * (p.m_signed + p.e), c * k0 * (-p.m_signed + p.e));
    ds + diag
}

/// G(x,y) = (1/2π)[iωK₁(ωr)(d·σ)/r + (mσ₃+E)K₀(ωr)], d = x−y.
pub fn greens_dirac(x: [f64; 2], y: [f64; 2], p: &GreensParams) -> Result<Mat2> {
    let d = [x[0] - y[0], x[1] - y[1]];
    let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
    if r == 0.0 {
        return Err(Error::Singularity("Green's function evaluated at x = y".into()));
    }
    Ok(dirac_kernel(d, p))
}

/// Klein–Gordon Green's function (1/2π)K₀(ω|x−y|).
pub fn greens_kg(x: [f64; 2], y: [f64; 2], omega: f64) -> Result<f64> {
    let r = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
    if r == 0.0 {
        return Err(Error::Singularity("Green's function evaluated at x = y".into()));
    }
    Ok(k01(omega * r).0 / (2.0 * PI))
}

/// ∇ₓ of the Klein–Gordon Green's function: −(ω/2π)K₁(ωr)(x−y)/r.
pub fn greens_kg_grad(x: [f64; 2], y: [f64; 2], omega: f64) -> Result<[f64; 2]> {
    let d = [x[0] - y[0], x[1] - y[1]];
    let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
    if r == 0.0 {
        return Err(Error::Singularity("Green's function evaluated at x = y".into()));
    }
    let f = -omega * k01(omega * r).1 / (2.0 * PI * r);
    Ok([f * d[0], f * d[1]])
}

/// The Dirac operator symbol pieces applied in residual checks: (mσ₃ − E).
pub fn mass_term(m_signed: f64, e: f64) -> Mat2 {
    SIGMA3.scale_re(m_signed) - Mat2::scalar(C64::new(e, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert!((bessel_k0(1.0).unwrap() - 0.421_024_438_240_708_34).abs() < 1e-15);
        assert!((bessel_k1(1.0).unwrap() - 0.601_907_230_197_234_6).abs() < 1e-15);
    }

    #[test]
    fn branches_agree_at_switch() {
        let (a0, a1, _, _) = small_series(2.0);
        let (b0, b1) = cf2_scaled(2.0);
        let e = (-2.0f64).exp();
        assert!((a0 - b0 * e).abs() < 1e-15 * a0);
        assert!((a1 - b1 * e).abs() < 1e-15 * a1);
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_k0(0.0).is_err());
        assert!(bessel_k1(-1.0).is_err());
        assert!(greens_kg([1.0, 1.0], [1.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn underflow_is_exact_zero() {
        assert_eq!(k01(800.0), (0.0, 0.0));
        assert!(k01_scaled(800.0).0 > 0.0);
    }

    #[test]
    fn log_split_consistent() {
        for &x in &[0.01, 0.5, 1.9, 2.1, 5.0] {
            let (i0, reg) = k0_log_split(x);
            let k0 = k01(x).0;
            assert!((reg - i0 * x.ln() - k0).abs() < 2e-15 * (1.0 + reg.abs()), "x={x}");
        }
    }
}
