//! Fourier-domain solution of the flat interface γ(t) = (t, 0).
//!
//! Convention: 𝓕f(ξ) = ∫ f(t) e^{−iξt} dt, f(t) = (1/2π) ∫ 𝓕f(ξ) e^{iξt} dξ.

use std::f64::consts::PI;

use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::operators::{mask_for_mass, Direction};
use crate::source::{Region, SourceSpec};
use crate::specfun::{dirac_kernel, GreensParams};
use crate::spinor::{Mat2, Spinor, C64, I, ONE, SIGMA1, SIGMA2, ZERO};

/// Below this distance from ±E, products are evaluated in pole-cancelled form.
const POLE_GUARD: f64 = 1e-6;

/// Flat-interface symbols for one (m, E).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymbolSet {
    pub m: f64,
    pub e: f64,
    pub omega: f64,
}

impl SymbolSet {
    pub fn new(m: f64, e: f64) -> Result<Self> {
        if !(e.abs() < m.abs()) || !m.is_finite() || !e.is_finite() {
            return Err(Error::Precondition(format!("|E| < |m| required (m={m}, E={e})")));
        }
        Ok(Self { m, e, omega: ((m - e) * (m + e)).sqrt() })
    }

    pub fn mask(&self) -> Mat2 {
        mask_for_mass(self.m)
    }

    /// Index of the component selected by M.
    fn k(&self) -> usize {
        if self.m > 0.0 {
            1
        } else {
            0
        }
    }

    fn root(&self, xi: C64) -> C64 {
        (xi * xi + self.omega * self.omega).sqrt()
    }

    /// 1/(2√(ξ²+ω²)), the symbol of 𝒮_ω.
    pub fn s(&self, xi: f64) -> f64 {
        0.5 / (xi * xi + self.omega * self.omega).sqrt()
    }

    /// −1/(ξ²−E²), the symbol of R.
    pub fn r(&self, xi: f64) -> f64 {
        -1.0 / ((xi - self.e) * (xi + self.e))
    }

    /// a₁ = 1 + (m/√(ξ²+ω²))σ₃.
    pub fn a1(&self, xi: f64) -> Mat2 {
        let q = self.m / (xi * xi + self.omega * self.omega).sqrt();
        Mat2::real_diag(1.0 + q, 1.0 - q)
    }

    /// a₂ = 1 − M·2im²/(ξ²−E²) (pole at ξ = ±E).
    pub fn a2(&self, xi: f64) -> Mat2 {
        self.a2_c(C64::new(xi, 0.0))
    }

    fn a2_c(&self, xi: C64) -> Mat2 {
        let g = ONE - C64::new(0.0, 2.0 * self.m * self.m) / (xi * xi - self.e * self.e);
        let mut d = [ONE, ONE];
        d[self.k()] = g;
        Mat2::diag(d[0], d[1])
    }

    /// a = a₁a₂ in the pole-free form.
    pub fn a(&self, xi: f64) -> Mat2 {
        self.a_c(C64::new(xi, 0.0))
    }

    fn a_c(&self, xi: C64) -> Mat2 {
        let q = self.root(xi);
        let am = self.m.abs();
        let free = ONE + am / q;
        let sel = (xi * xi - self.e * self.e - C64::new(0.0, 2.0 * self.m * self.m)) / (q * (q + am));
        let mut d = [free, free];
        d[self.k()] = sel;
        Mat2::diag(d[0], d[1])
    }

    /// a⁻¹ = (1−M)√/(√+|m|) + M(1+|m|/√)(1 + (2i+1)m²/(ξ²−E²−2im²)).
    pub fn a_inv(&self, xi: f64) -> Mat2 {
        self.a_inv_c(C64::new(xi, 0.0))
    }

    fn a_inv_c(&self, xi: C64) -> Mat2 {
        let q = self.root(xi);
        let am = self.m.abs();
        let m2 = self.m * self.m;
        let free = q / (q + am);
        let den = xi * xi - self.e * self.e - C64::new(0.0, 2.0 * m2);
        let sel = (ONE + am / q) * (ONE + C64::new(m2, 2.0 * m2) / den);
        let mut d = [free, free];
        d[self.k()] = sel;
        Mat2::diag(d[0], d[1])
    }

    /// a₁a₂ evaluated as the literal product away from ±E and in the
    /// cancelled form near the poles.
    pub fn a1a2(&self, xi: f64) -> Mat2 {
        if (xi.abs() - self.e.abs()).abs() < POLE_GUARD {
            self.a(xi)
        } else {
            self.a1(xi) * self.a2(xi)
        }
    }

    /// Klein–Gordon symbols (raw 1 − |m|/√, preconditioned raw·(1 − 2im²/(ξ²−E²))).
    pub fn kg(&self, xi: f64) -> (C64, C64) {
        let q = (xi * xi + self.omega * self.omega).sqrt();
        let am = self.m.abs();
        let raw = C64::new(1.0 - am / q, 0.0);
        let pre = C64::new((xi - self.e) * (xi + self.e), -2.0 * self.m * self.m) / (q * (q + am));
        (raw, pre)
    }
}

pub fn symbol_a1(xi: f64, m: f64, e: f64) -> Result<Mat2> {
    Ok(SymbolSet::new(m, e)?.a1(xi))
}

/// a₂ with an explicit mask (M₁ or M₂).
pub fn symbol_a2(xi: f64, m: f64, e: f64, mask: &Mat2) -> Result<Mat2> {
    SymbolSet::new(m, e)?;
    if (xi.abs() - e.abs()).abs() == 0.0 {
        return Err(Error::Singularity(format!("a₂ has a pole at ξ = {xi}")));
    }
    let g = C64::new(0.0, -2.0 * m * m / ((xi - e) * (xi + e)));
    Ok(Mat2::IDENTITY + mask.scale(g))
}

pub fn symbol_a_inv(xi: f64, m: f64, e: f64) -> Result<Mat2> {
    Ok(SymbolSet::new(m, e)?.a_inv(xi))
}

pub fn symbol_kg(xi: f64, m: f64, e: f64) -> Result<(C64, C64)> {
    Ok(SymbolSet::new(m, e)?.kg(xi))
}

/// Nodes and weights (including 1/2π) of the trapezoid rule on the deformed
/// contour ξ(s) = s − iδ·φ(s), for sources at distance ≥ ymin from the line.
pub fn deformed_contour(m: f64, e: f64, omega: f64, ymin: f64, direction: Direction) -> (Vec<C64>, Vec<C64>) {
    // singularities nearest the real axis: ±E (R̃), ±iω, and the zeros of ξ²−E²−2im²
    let pole = C64::new(e * e, 2.0 * m * m).sqrt();
    let delta = (0.4 * e.abs().min(omega).min(pole.im.abs())).min(0.5);
    let smax = if ymin.is_finite() { 40.0 / ymin + 4.0 * e.abs() } else { 1.0 };
    let h = 2.0 * PI / (40.0 / delta + 80.0);
    let n = (smax / h).ceil() as usize;
    // the kernel e^{iκ|t|}/(2iκ) has κ = ±E; Im κ → 0⁺ fixes the side
    let sgn = e.signum()
        * match direction {
            Direction::Outgoing => 1.0,
            Direction::Incoming => -1.0,
        };
    let ea = e.abs();
    let mut xi = Vec::with_capacity(2 * n + 1);
    let mut w = Vec::with_capacity(2 * n + 1);
    for k in -(n as i64)..=(n as i64) {
        let s = k as f64 * h;
        let z = s / ea;
        let g = (0.5 * (1.0 - z * z)).exp();
        let phi = z * g;
        let dphi = (1.0 - z * z) * g / ea;
        xi.push(C64::new(s, -sgn * delta * phi));
        w.push(C64::new(1.0, -sgn * delta * dphi) * (h / (2.0 * PI)));
    }
    (xi, w)
}

/// x₁-Fourier transform of G(x − y) at x₂ − y₂ = h for mass m_signed:
/// [ξσ₁ + i·sign(h)√σ₂ + (mσ₃ + E)] e^{−√|h|}/(2√).
fn greens_hat(xi: C64, h: f64, m_signed: f64, e: f64, omega: f64) -> Mat2 {
    let q = (xi * xi + omega * omega).sqrt();
    let f = (-q * h.abs()).exp() / (2.0 * q);
    let sg = if h >= 0.0 { 1.0 } else { -1.0 };
    (SIGMA1.scale(xi) + SIGMA2.scale(I * q * sg) + Mat2::real_diag(m_signed + e, -m_signed + e)).scale(f)
}

/// Exact solution of the flat single-interface problem for delta sources.
///
/// All inverse transforms run along ξ(s) = s − iδ·φ(s), φ(s) = (s/E)e^{(1−s²/E²)/2},
/// which passes the R̃ poles at ±E on the side selected by the radiation
/// condition; the integrand is analytic near this contour, so the trapezoid
/// rule converges geometrically.
#[derive(Clone, Debug)]
pub struct FlatOracle {
    pub sym: SymbolSet,
    pub sources: Vec<SourceSpec>,
    pub direction: Direction,
    xi: Vec<C64>,
    w: Vec<C64>,
    rho_hat: Vec<Spinor>,
    tau_hat: Vec<Spinor>,
    mu_hat: Vec<Spinor>,
}

impl FlatOracle {
    pub fn new(m: f64, e: f64, sources: &[SourceSpec], direction: Direction) -> Result<Self> {
        let sym = SymbolSet::new(m, e)?;
        if e == 0.0 {
            return Err(Error::Domain("E = 0 is outside the model".into()));
        }
        let mut ymin = f64::INFINITY;
        for s in sources {
            let y = s.location[1];
            if y.abs() < 1e-3 {
                return Err(Error::Validation("source within 1e-3 of the interface".into()));
            }
            let expected = if y > 0.0 { Region::Omega2 } else { Region::Omega1 };
            if s.region != expected {
                return Err(Error::Validation(format!("source at {:?} is not in {:?}", s.location, s.region)));
            }
            ymin = ymin.min(y.abs());
        }
        let (xi, w) = deformed_contour(m, e, sym.omega, ymin, direction);
        let v = crate::geometry::cobmat_v_unchecked([0.0, 1.0]);
        let lhs = v.adjoint() * SIGMA2.scale(I);
        let mut rho_hat = Vec::with_capacity(xi.len());
        let mut tau_hat = Vec::with_capacity(xi.len());
        let mut mu_hat = Vec::with_capacity(xi.len());
        for &z in &xi {
            let mut f = [ZERO; 2];
            for s in sources {
                // [[u_i]] = (Ω₂ side) − (Ω₁ side)
                let (ms, sign) = if s.region == Region::Omega2 { (m, 1.0) } else { (-m, -1.0) };
                let g = greens_hat(z, -s.location[1], ms, e, sym.omega);
                let ph = (-I * z * s.location[0]).exp() * sign;
                let u = g.apply(&s.amplitude);
                f[0] += ph * u[0];
                f[1] += ph * u[1];
            }
            let f = lhs.apply(&f);
            let r = sym.a_inv_c(z).apply(&f);
            let t = sym.a2_c(z).apply(&r);
            rho_hat.push(r);
            tau_hat.push(t);
            mu_hat.push(v.apply(&t));
        }
        Ok(Self { sym, sources: sources.to_vec(), direction, xi, w, rho_hat, tau_hat, mu_hat })
    }

    fn inverse(&self, hat: &[Spinor], t: f64) -> Spinor {
        let mut out = [ZERO; 2];
        for ((z, w), v) in self.xi.iter().zip(&self.w).zip(hat) {
            let e = (I * z * t).exp() * w;
            out[0] += e * v[0];
            out[1] += e * v[1];
        }
        out
    }

    pub fn rho(&self, t: f64) -> Spinor {
        self.inverse(&self.rho_hat, t)
    }

    pub fn tau(&self, t: f64) -> Spinor {
        self.inverse(&self.tau_hat, t)
    }

    pub fn mu(&self, t: f64) -> Spinor {
        self.inverse(&self.mu_hat, t)
    }

    /// ρ̃(ξ) for real ξ (closed form, no quadrature).
    pub fn rho_hat(&self, xi: f64) -> Spinor {
        let z = C64::new(xi, 0.0);
        let mut f = [ZERO; 2];
        for s in &self.sources {
            let (ms, sign) = if s.region == Region::Omega2 { (self.sym.m, 1.0) } else { (-self.sym.m, -1.0) };
            let g = greens_hat(z, -s.location[1], ms, self.sym.e, self.sym.omega);
            let u = g.apply(&s.amplitude);
            let ph = (-I * z * s.location[0]).exp() * sign;
            f[0] += ph * u[0];
            f[1] += ph * u[1];
        }
        let v = crate::geometry::cobmat_v_unchecked([0.0, 1.0]);
        let f = (v.adjoint() * SIGMA2.scale(I)).apply(&f);
        self.sym.a_inv(xi).apply(&f)
    }

    /// Incident field: sources in the region of x.
    pub fn incident(&self, x: [f64; 2]) -> Result<Spinor> {
        let region = if x[1] > 0.0 { Region::Omega2 } else { Region::Omega1 };
        let g = GreensParams::new(region.mass(self.sym.m), self.sym.e)?;
        let mut out = [ZERO; 2];
        for s in self.sources.iter().filter(|s| s.region == region) {
            let d = [x[0] - s.location[0], x[1] - s.location[1]];
            if d[0] == 0.0 && d[1] == 0.0 {
                return Err(Error::Singularity("field evaluated at a source".into()));
            }
            let u = dirac_kernel(d, &g).apply(&s.amplitude);
            out[0] += u[0];
            out[1] += u[1];
        }
        Ok(out)
    }

    /// Scattered field (1/2π)∫ e^{iξx₁} Ĝ(ξ; x₂) μ̃(ξ) dξ.
    pub fn scattered(&self, x: [f64; 2]) -> Result<Spinor> {
        if x[1].abs() < 1e-3 {
            return Err(Error::Validation("flat oracle field requires |x₂| ≥ 1e-3".into()));
        }
        let ms = if x[1] > 0.0 { self.sym.m } else { -self.sym.m };
        let mut out = [ZERO; 2];
        for ((z, w), v) in self.xi.iter().zip(&self.w).zip(&self.mu_hat) {
            let g = greens_hat(*z, x[1], ms, self.sym.e, self.sym.omega);
            let u = g.apply(v);
            let e = (I * z * x[0]).exp() * w;
            out[0] += e * u[0];
            out[1] += e * u[1];
        }
        Ok(out)
    }

    pub fn field(&self, x: [f64; 2]) -> Result<Spinor> {
        let a = self.incident(x)?;
        let b = self.scattered(x)?;
        Ok([a[0] + b[0], a[1] + b[1]])
    }
}

/// Solves a₁a₂ρ̃ = f̃ for uniformly sampled right-hand sides (spacing h) by FFT;
/// the samples are zero-padded to twice their length. Returns ρ at the samples.
pub fn flat_solve(rhs: &[Spinor], h: f64, m: f64, e: f64) -> Result<Vec<Spinor>> {
    let sym = SymbolSet::new(m, e)?;
    let n = rhs.len();
    if n < 2 || !(h > 0.0) {
        return Err(Error::Validation("flat_solve needs ≥ 2 samples and h > 0".into()));
    }
    let peak = rhs.iter().map(crate::spinor::spinor_norm).fold(0.0, f64::max);
    let ends = crate::spinor::spinor_norm(&rhs[0]).max(crate::spinor::spinor_norm(&rhs[n - 1]));
    if ends > 1e-12 * peak.max(f64::MIN_POSITIVE) {
        return Err(Error::Validation(format!(
            "right-hand side has not decayed at the grid ends ({ends:.2e} vs peak {peak:.2e})"
        )));
    }
    let nn = 2 * n;
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(nn);
    let inv = planner.plan_fft_inverse(nn);
    let mut comp = [vec![ZERO; nn], vec![ZERO; nn]];
    for (j, v) in rhs.iter().enumerate() {
        comp[0][j] = v[0];
        comp[1][j] = v[1];
    }
    fwd.process(&mut comp[0]);
    fwd.process(&mut comp[1]);
    for k in 0..nn {
        let kk = if k <= nn / 2 { k as f64 } else { k as f64 - nn as f64 };
        let xi = 2.0 * PI * kk / (nn as f64 * h);
        let r = sym.a_inv(xi).apply(&[comp[0][k], comp[1][k]]);
        comp[0][k] = r[0];
        comp[1][k] = r[1];
    }
    inv.process(&mut comp[0]);
    inv.process(&mut comp[1]);
    let s = 1.0 / nn as f64;
    Ok((0..n).map(|j| [comp[0][j] * s, comp[1][j] * s]).collect())
}
