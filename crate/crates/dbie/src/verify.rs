//! Self-checks of the flat-interface operators against their Fourier
//! multipliers: assembled matrices applied to windowed plane waves
//! f(t) = e^{−t²/2l²} e^{iξ₀t} are compared with σ(D)f computed by
//! quadrature of the closed-form symbol.

use std::f64::consts::PI;
use std::ops::Range;
use std::sync::Arc;

use faer::Mat;

use crate::error::Result;
use crate::geometry::{curve_catalog, Params};
use crate::kg::{kg_assemble_on, KgProblem};
use crate::mesh::{build_mesh, MeshOptions, PanelMesh, TruncationWindows};
use crate::operators::{
    assemble_l, assemble_p, assemble_two_mass_first, mask_for_mass, single_layer_self, Direction, Half, Resolvent,
    ResolventSpec, TwoMass,
};
use crate::oracle_flat::{deformed_contour, SymbolSet};
use crate::spinor::{Mat2, Spinor, C64, I, ONE, SIGMA1, SIGMA2, SIGMA3, ZERO};
use crate::system::{assemble_system_on, Discretization, ProblemSpec};

/// Windowed plane wave; 𝓕f(η) = l√(2π) e^{−l²(η−ξ₀)²/2}.
#[derive(Clone, Copy, Debug)]
pub struct Wave {
    pub xi0: f64,
    pub l: f64,
}

impl Wave {
    pub fn at(&self, t: f64) -> C64 {
        C64::new(0.0, self.xi0 * t).exp() * (-t * t / (2.0 * self.l * self.l)).exp()
    }

    pub fn hat(&self, eta: C64) -> C64 {
        let d = eta - self.xi0;
        (-d * d * (self.l * self.l / 2.0)).exp() * (self.l * (2.0 * PI).sqrt())
    }
}

/// Default probe waves: l = 4, ξ₀ ∈ {0, 0.3, 1.2, −2}.
pub fn probe_waves() -> Vec<Wave> {
    [0.0, 0.3, 1.2, -2.0].iter().map(|&xi0| Wave { xi0, l: 4.0 }).collect()
}

/// Flat mesh with I₁ = (−40, 40) and a 30-unit buffer, order 16.
pub fn flat_probe_mesh(e: f64) -> Result<PanelMesh> {
    let c = Arc::new(curve_catalog("flat", &Params::new())?);
    build_mesh(c, TruncationWindows::new((-40.0, 40.0), 30.0), &MeshOptions::new(16, 1.0).with_energy(e))
}

/// (η, w) for (1/2π)∫·dη on the real line.
fn real_line(w: Wave) -> Vec<(C64, C64)> {
    let h = 0.004;
    let n = (14.0 / (w.l * h)) as i64;
    (-n..=n).map(|k| (C64::new(w.xi0 + k as f64 * h, 0.0), C64::new(h / (2.0 * PI), 0.0))).collect()
}

/// Same on the contour passing ±E on the outgoing side.
fn contour(m: f64, e: f64, w: Wave) -> Vec<(C64, C64)> {
    let omega = ((m - e) * (m + e)).sqrt();
    let ymin = 40.0 / (w.xi0.abs() + 14.0 / w.l + 1.0);
    let (xi, wt) = deformed_contour(m, e, omega, ymin, Direction::Outgoing);
    xi.into_iter().zip(wt).collect()
}

/// (σ(D) f·v)(t).
fn multiplier(nodes: &[(C64, C64)], sym: &dyn Fn(C64) -> Mat2, w: Wave, v: Spinor, t: f64) -> Spinor {
    let mut out = [ZERO; 2];
    for &(eta, wt) in nodes {
        let a = sym(eta).apply(&v);
        let c = w.hat(eta) * (I * eta * t).exp() * wt;
        out[0] += a[0] * c;
        out[1] += a[1] * c;
    }
    out
}

/// Dense 2×2-block matrix applied to f·v on the column nodes.
fn apply_blocks(mat: &Mat<C64>, cols: Range<usize>, mesh: &PanelMesh, w: Wave, v: Spinor) -> Vec<Spinor> {
    let x: Vec<C64> = cols
        .flat_map(|j| {
            let f = w.at(mesh.s[j]);
            [f * v[0], f * v[1]]
        })
        .collect();
    (0..mat.nrows() / 2)
        .map(|r| {
            let mut o = [ZERO; 2];
            for (c, xc) in x.iter().enumerate() {
                o[0] += mat[(2 * r, c)] * xc;
                o[1] += mat[(2 * r + 1, c)] * xc;
            }
            o
        })
        .collect()
}

/// max |got − want| / max |want| over row nodes with |t| ≤ 20.
fn compare(mesh: &PanelMesh, rows: Range<usize>, got: &[Spinor], want: impl Fn(f64) -> Spinor) -> f64 {
    let mut err: f64 = 0.0;
    let mut peak: f64 = 0.0;
    for (r, a) in rows.enumerate() {
        let t = mesh.s[a];
        if t.abs() > 20.0 {
            continue;
        }
        let w = want(t);
        for k in 0..2 {
            err = err.max((got[r][k] - w[k]).norm());
            peak = peak.max(w[k].norm());
        }
    }
    err / peak
}

fn root(eta: C64, omega: f64) -> C64 {
    (eta * eta + omega * omega).sqrt()
}

fn worst(errs: impl IntoIterator<Item = f64>) -> f64 {
    errs.into_iter().fold(0.0, f64::max)
}

/// max ‖a₁a₂·a⁻¹ − I‖ on n midpoints of (−50, 50).
pub fn symbol_identity_error(m: f64, e: f64, n: usize) -> Result<f64> {
    let s = SymbolSet::new(m, e)?;
    let h = 100.0 / n as f64;
    Ok(worst((0..n).map(|k| {
        let xi = -50.0 + (k as f64 + 0.5) * h;
        (s.a1a2(xi) * s.a_inv(xi) - Mat2::IDENTITY).max_abs()
    })))
}

/// Single layer 𝒮_ω against 1/(2√(ξ²+ω²)).
pub fn single_layer_error(mesh: &PanelMesh, m: f64, e: f64) -> f64 {
    let omega = ((m - e) * (m + e)).sqrt();
    let s = single_layer_self(mesh, omega, mesh.i1_nodes());
    worst(probe_waves().into_iter().map(|w| {
        let f: Vec<C64> = mesh.s.iter().map(|&t| w.at(t)).collect();
        let got: Vec<Spinor> =
            (0..s.nrows()).map(|r| [(0..s.ncols()).map(|c| f[c] * s[(r, c)]).sum(), ZERO]).collect();
        let nodes = real_line(w);
        let sym = |eta: C64| Mat2::scalar(root(eta, omega).inv() * 0.5);
        compare(mesh, mesh.i1_nodes(), &got, |t| multiplier(&nodes, &sym, w, [ONE, ZERO], t))
    }))
}

/// Resolvent R against −1/(ξ²−E²).
pub fn resolvent_error(mesh: &PanelMesh, m: f64, e: f64) -> Result<f64> {
    let res = Resolvent::on_i1(mesh, ResolventSpec::outgoing(e))?;
    Ok(worst(probe_waves().into_iter().map(|w| {
        let f: Vec<C64> = mesh.i1_nodes().map(|j| w.at(mesh.s[j])).collect();
        let got: Vec<Spinor> = res.apply(Half::Full, &f).into_iter().map(|v| [v, ZERO]).collect();
        let nodes = contour(m, e, w);
        let sym = |eta: C64| Mat2::scalar(-(eta * eta - e * e).inv());
        compare(mesh, 0..mesh.total_nodes(), &got, |t| multiplier(&nodes, &sym, w, [ONE, ZERO], t))
    })))
}

/// Interface operator 𝓛 against a₁ for masses ±m.
pub fn interface_operator_error(mesh: &PanelMesh, m: f64, e: f64) -> Result<f64> {
    let mut errs = vec![];
    for ms in [m, -m] {
        let l = assemble_l(mesh, ms, e, 1.0)?;
        let omega = ((ms - e) * (ms + e)).sqrt();
        for w in probe_waves() {
            let v = [ONE, C64::new(0.3, -0.7)];
            let got = apply_blocks(&l.mat, 0..mesh.total_nodes(), mesh, w, v);
            let nodes = real_line(w);
            let sym = |eta: C64| {
                let q = root(eta, omega).inv() * ms;
                Mat2::diag(ONE + q, ONE - q)
            };
            errs.push(compare(mesh, mesh.i1_nodes(), &got, |t| multiplier(&nodes, &sym, w, v, t)));
        }
    }
    Ok(worst(errs))
}

/// Preconditioner 𝒫 against a₂ for masses ±m.
pub fn preconditioner_error(mesh: &PanelMesh, m: f64, e: f64) -> Result<f64> {
    let mut errs = vec![];
    for ms in [m, -m] {
        let mask = mask_for_mass(ms);
        let p = assemble_p(mesh, ms, &mask, ResolventSpec::outgoing(e))?;
        for w in probe_waves() {
            let v = [C64::new(0.2, 0.1), ONE];
            let got = apply_blocks(&p.mat, mesh.i1_nodes(), mesh, w, v);
            let nodes = contour(ms, e, w);
            let sym = |eta: C64| Mat2::IDENTITY - mask.scale(C64::new(0.0, 2.0 * ms * ms) / (eta * eta - e * e));
            errs.push(compare(mesh, 0..mesh.total_nodes(), &got, |t| multiplier(&nodes, &sym, w, v, t)));
        }
    }
    Ok(worst(errs))
}

/// Assembled Dirac system against a₁a₂ for masses ±m.
pub fn dirac_system_error(mesh: &PanelMesh, m: f64, e: f64) -> Result<f64> {
    let mut errs = vec![];
    for ms in [m, -m] {
        let spec = ProblemSpec::dirac(mesh.curve.clone(), ms, e, vec![], Discretization::new(mesh.order, 1.0));
        let sys = assemble_system_on(&spec, vec![mesh.clone()])?;
        let omega = ((ms - e) * (ms + e)).sqrt();
        let mask = mask_for_mass(ms);
        for w in probe_waves() {
            let v = [ONE, C64::new(-0.4, 0.5)];
            let got = apply_blocks(&sys.matrix, mesh.i1_nodes(), mesh, w, v);
            let nodes = contour(ms, e, w);
            let sym = |eta: C64| {
                let q = root(eta, omega).inv() * ms;
                Mat2::diag(ONE + q, ONE - q)
                    * (Mat2::IDENTITY - mask.scale(C64::new(0.0, 2.0 * ms * ms) / (eta * eta - e * e)))
            };
            errs.push(compare(mesh, mesh.i1_nodes(), &got, |t| multiplier(&nodes, &sym, w, v, t)));
        }
    }
    Ok(worst(errs))
}

/// First factor of the two-mass system against B(ξ); also checks the
/// complex-argument form used here against `TwoMass::symbol_b`.
pub fn two_mass_error(mesh: &PanelMesh, m1: f64, m2: f64, e: f64) -> Result<f64> {
    let tm = TwoMass::new(m1, m2, e)?;
    let f = assemble_two_mass_first(mesh, &tm);
    let sym = |eta: C64| {
        let (q1, q2) = (root(eta, tm.omega1).inv(), root(eta, tm.omega2).inv());
        Mat2::IDENTITY - SIGMA3.scale(eta * (q2 - q1) * 0.5) + SIGMA1.scale((q2 * tm.m2 + q1 * tm.m1) * 0.5)
            - SIGMA2.scale(I * (q2 - q1) * (0.5 * e))
    };
    let mut errs: Vec<f64> = [-1.0, 0.0, 0.7].iter().map(|&xi| (sym(C64::new(xi, 0.0)) - tm.symbol_b(xi)).max_abs()).collect();
    for w in probe_waves() {
        let v = [C64::new(0.5, 0.5), ONE];
        let got = apply_blocks(&f, 0..mesh.total_nodes(), mesh, w, v);
        let nodes = real_line(w);
        errs.push(compare(mesh, mesh.i1_nodes(), &got, |t| multiplier(&nodes, &sym, w, v, t)));
    }
    Ok(worst(errs))
}

/// max |det B(±E)| for the two-mass symbol.
pub fn two_mass_det_at_e(m1: f64, m2: f64, e: f64) -> Result<f64> {
    let tm = TwoMass::new(m1, m2, e)?;
    Ok(tm.symbol_b(e).det().norm().max(tm.symbol_b(-e).det().norm()))
}

/// KG system against (ξ²−E²−2im²)/(√(√+|m|)).
pub fn kg_system_error(mesh: &PanelMesh, m: f64, e: f64) -> Result<f64> {
    let p = KgProblem::new(mesh.curve.clone(), m, e, vec![], Discretization::new(mesh.order, 1.0));
    let sys = kg_assemble_on(&p, mesh.clone())?;
    let omega = p.omega();
    Ok(worst(probe_waves().into_iter().map(|w| {
        let f: Vec<C64> = mesh.i1_nodes().map(|j| w.at(mesh.s[j])).collect();
        let got: Vec<Spinor> = (0..sys.matrix.nrows())
            .map(|r| [(0..f.len()).map(|c| sys.matrix[(r, c)] * f[c]).sum(), ZERO])
            .collect();
        let nodes = contour(m, e, w);
        let sym = |eta: C64| {
            let q = root(eta, omega);
            Mat2::scalar((eta * eta - e * e - C64::new(0.0, 2.0 * m * m)) / (q * (q + m.abs())))
        };
        compare(mesh, mesh.i1_nodes(), &got, |t| multiplier(&nodes, &sym, w, [ONE, ZERO], t))
    })))
}
