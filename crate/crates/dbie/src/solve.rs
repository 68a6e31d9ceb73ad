//! Dense and iterative solution of the assembled systems, densities τ = 𝒫ρ and
//! μ = Vτ, Fourier coefficients and the density CSV.

use std::io::Write;
use std::path::Path;

use faer::linalg::solvers::Solve;
use faer::Mat;

use crate::error::{Error, Result};
use crate::mesh::PanelMesh;
use crate::operators::{apply_p, two_mass_mu, Half, Resolvent, TwoMass};
use crate::quad::{gauss_legendre, lagrange_basis};
use crate::spinor::{Spinor, C64, I, ZERO};
use crate::system::{preconditioner_coef, preconditioner_mask, resolvent_spec, LinearSystem, Model};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    Dense,
    Gmres { restart: usize, max_iter: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub method: Method,
    /// Required relative residual.
    pub tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { method: Method::Dense, tol: 1e-10 }
    }
}

/// Densities on one interface.
#[derive(Clone, Debug)]
pub struct InterfaceDensity {
    /// ρ on the I₁ nodes.
    pub rho: Vec<Spinor>,
    /// τ = 𝒫ρ and μ on all nodes (I₂).
    pub tau: Vec<Spinor>,
    pub mu: Vec<Spinor>,
}

#[derive(Clone, Debug)]
pub struct DensitySet {
    pub interfaces: Vec<InterfaceDensity>,
    pub residual: f64,
    /// 1-norm condition estimate (dense solves only).
    pub cond: Option<f64>,
    pub iterations: usize,
}

/// Conditioning threshold 1/(100·ε).
pub fn cond_limit() -> f64 {
    1.0 / (100.0 * f64::EPSILON)
}

fn one_norm(a: &Mat<C64>) -> f64 {
    (0..a.ncols()).map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn col(v: &[C64]) -> Mat<C64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

/// Higham's 1-norm estimate of ‖A⁻¹‖₁ from an LU factorization.
fn inverse_norm_estimate(lu: &faer::linalg::solvers::PartialPivLu<C64>, n: usize) -> f64 {
    let mut x = vec![C64::new(1.0 / n as f64, 0.0); n];
    let mut est = 0.0f64;
    let mut last = usize::MAX;
    for it in 0..5 {
        let y = lu.solve(col(&x));
        let ny: f64 = (0..n).map(|i| y[(i, 0)].norm()).sum();
        est = est.max(ny);
        let xi: Vec<C64> = (0..n)
            .map(|i| {
                let v = y[(i, 0)];
                let a = v.norm();
                if a == 0.0 {
                    C64::new(1.0, 0.0)
                } else {
                    v / a
                }
            })
            .collect();
        let z = lu.solve_adjoint(col(&xi));
        let (j, zmax) = (0..n).map(|i| (i, z[(i, 0)].norm())).fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        let zx: f64 = (0..n).map(|i| (z[(i, 0)].conj() * x[i]).re).sum();
        if it > 0 && (zmax <= zx || j == last) {
            break;
        }
        last = j;
        x = vec![ZERO; n];
        x[j] = C64::new(1.0, 0.0);
    }
    // alternating test vector guards against unlucky cancellation
    let b: Vec<C64> = (0..n)
        .map(|i| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            C64::new(s * (1.0 + i as f64 / (n.max(2) - 1) as f64), 0.0)
        })
        .collect();
    let y = lu.solve(col(&b));
    let alt = 2.0 * (0..n).map(|i| y[(i, 0)].norm()).sum::<f64>() / (3.0 * n as f64);
    est.max(alt)
}

fn residual(a: &Mat<C64>, x: &[C64], b: &[C64]) -> f64 {
    let nb = b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let ax = a * col(x);
    let nr = (0..b.len()).map(|i| (ax[(i, 0)] - b[i]).norm_sqr()).sum::<f64>().sqrt();
    if nb == 0.0 {
        nr
    } else {
        nr / nb
    }
}

/// Solution vector and condition estimate by partial-pivoting LU.
pub fn lu_solve(a: &Mat<C64>, b: &[C64], m: f64, e: f64) -> Result<(Vec<C64>, f64)> {
    let n = b.len();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::Validation("system must be square and match the right-hand side".into()));
    }
    if n == 0 {
        return Ok((vec![], 1.0));
    }
    let lu = a.partial_piv_lu();
    let cond = one_norm(a) * inverse_norm_estimate(&lu, n);
    if !cond.is_finite() || cond > cond_limit() {
        return Err(Error::Conditioning { m, e, cond });
    }
    let x = lu.solve(col(b));
    Ok(((0..n).map(|i| x[(i, 0)]).collect(), cond))
}

/// Restarted GMRES with modified Gram–Schmidt and Givens rotations.
pub fn gmres(
    apply: impl Fn(&[C64]) -> Vec<C64>,
    b: &[C64],
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> Result<(Vec<C64>, usize)> {
    let n = b.len();
    let nb = b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let mut x = vec![ZERO; n];
    if nb == 0.0 {
        return Ok((x, 0));
    }
    let restart = restart.max(1);
    let norm = |v: &[C64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut total = 0;
    while total < max_iter {
        let ax = apply(&x);
        let r: Vec<C64> = (0..n).map(|i| b[i] - ax[i]).collect();
        let beta = norm(&r);
        if beta <= tol * nb {
            return Ok((x, total));
        }
        let mut v: Vec<Vec<C64>> = vec![r.iter().map(|z| z / beta).collect()];
        let mut h = vec![vec![ZERO; restart]; restart + 1];
        let mut cs = vec![ZERO; restart];
        let mut sn = vec![ZERO; restart];
        let mut g = vec![ZERO; restart + 1];
        g[0] = C64::new(beta, 0.0);
        let mut k_used = 0;
        for k in 0..restart {
            total += 1;
            let mut w = apply(&v[k]);
            for (j, vj) in v.iter().enumerate() {
                let hjk: C64 = vj.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                h[j][k] = hjk;
                for (wi, vi) in w.iter_mut().zip(vj) {
                    *wi -= hjk * vi;
                }
            }
            let hn = norm(&w);
            h[k + 1][k] = C64::new(hn, 0.0);
            for j in 0..k {
                let t = cs[j].conj() * h[j][k] + sn[j].conj() * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let (a, bb) = (h[k][k], h[k + 1][k]);
            let d = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            let (c, s) = if d == 0.0 { (C64::new(1.0, 0.0), ZERO) } else { (a / d, bb / d) };
            cs[k] = c;
            sn[k] = s;
            h[k][k] = c.conj() * a + s.conj() * bb;
            h[k + 1][k] = ZERO;
            g[k + 1] = -s * g[k];
            g[k] = c.conj() * g[k];
            k_used = k + 1;
            if g[k + 1].norm() <= tol * nb || hn == 0.0 || total >= max_iter {
                break;
            }
            v.push(w.iter().map(|z| z / hn).collect());
        }
        let mut y = vec![ZERO; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, vi) in x.iter_mut().zip(&v[j]) {
                *xi += yj * vi;
            }
        }
    }
    let ax = apply(&x);
    let r: Vec<C64> = (0..n).map(|i| b[i] - ax[i]).collect();
    if norm(&r) <= tol * nb {
        Ok((x, total))
    } else {
        Err(Error::Numerical(format!("GMRES did not converge in {max_iter} iterations")))
    }
}

/// ρ ↦ (ρ, τ, μ) on every interface.
pub fn densities_from_rho(system: &LinearSystem, x: &[C64]) -> Result<Vec<InterfaceDensity>> {
    let spec = &system.spec;
    let mut out = vec![];
    for (k, mesh) in system.meshes.iter().enumerate() {
        let off = system.offsets[k];
        let rho: Vec<Spinor> = (0..mesh.n1()).map(|i| [x[off + 2 * i], x[off + 2 * i + 1]]).collect();
        let (tau, mu) = match spec.model {
            Model::Dirac { .. } => {
                let res = Resolvent::on_i1(mesh, resolvent_spec(spec))?;
                let tau = apply_p(&res, Half::Full, &preconditioner_mask(spec, k), preconditioner_coef(spec), &rho);
                let mu = tau.iter().enumerate().map(|(j, t)| mesh.v(j).apply(t)).collect();
                (tau, mu)
            }
            Model::TwoMass { m1, m2 } => {
                let mu = two_mass_mu(mesh, &TwoMass::new(m1, m2, spec.e)?, &rho)?;
                (mu.clone(), mu)
            }
        };
        out.push(InterfaceDensity { rho, tau, mu });
    }
    Ok(out)
}

/// Solves with dense LU (with a conditioning check) or GMRES.
pub fn solve_system(system: &LinearSystem, opts: &SolveOptions) -> Result<DensitySet> {
    let (m, e) = (system.spec.m(), system.spec.e);
    let (x, cond, iterations) = match opts.method {
        Method::Dense => {
            let (x, c) = lu_solve(&system.matrix, &system.rhs, m, e)?;
            (x, Some(c), 0)
        }
        Method::Gmres { restart, max_iter } => {
            let a = &system.matrix;
            let (x, it) = gmres(
                |v| {
                    let y = a * col(v);
                    (0..v.len()).map(|i| y[(i, 0)]).collect()
                },
                &system.rhs,
                opts.tol.min(1e-12),
                restart,
                max_iter,
            )?;
            (x, None, it)
        }
    };
    let res = residual(&system.matrix, &x, &system.rhs);
    if !(res <= opts.tol) {
        return Err(Error::Numerical(format!("relative residual {res:.3e} exceeds {:.1e}", opts.tol)));
    }
    Ok(DensitySet { interfaces: densities_from_rho(system, &x)?, residual: res, cond, iterations })
}

/// Dense solve with the given residual tolerance.
pub fn solve_dense(system: &LinearSystem, tol: f64) -> Result<DensitySet> {
    solve_system(system, &SolveOptions { method: Method::Dense, tol })
}

/// ∫_W f(s) e^{−iξs} ds for node values `values` starting at node `first`
/// (panel aligned), using the panel interpolants.
pub fn fourier_coeff(mesh: &PanelMesh, values: &[C64], first: usize, window: (f64, f64), xi: f64) -> Result<C64> {
    let p = mesh.order;
    if first % p != 0 || values.len() % p != 0 || first + values.len() > mesh.total_nodes() {
        return Err(Error::Validation("values must cover whole panels of the mesh".into()));
    }
    let (a, b) = window;
    let lo = mesh.s[first];
    let hi = mesh.s[first + values.len() - 1];
    let p0 = first / p;
    let p1 = p0 + values.len() / p;
    if !(a < b) || a < mesh.panels[p0].a - 1e-12 || b > mesh.panels[p1 - 1].b + 1e-12 {
        return Err(Error::Validation(format!("window [{a}, {b}] outside the density support [{lo}, {hi}]")));
    }
    let gl = mesh.gl();
    let bary = crate::quad::barycentric_weights(&gl.nodes);
    let mut basis = vec![0.0; p];
    let mut total = ZERO;
    for k in p0..p1 {
        let pan = &mesh.panels[k];
        let (u, v) = (pan.a.max(a), pan.b.min(b));
        if u >= v {
            continue;
        }
        let q = p + 8 + (xi.abs() * (v - u)).ceil() as usize;
        let rule = gauss_legendre(q);
        let st = (k - p0) * p;
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let s = 0.5 * (u + v) + 0.5 * (v - u) * x;
            lagrange_basis(&gl.nodes, &bary, pan.to_local(s), &mut basis);
            let f: C64 = basis.iter().zip(&values[st..st + p]).map(|(l, f)| f * *l).sum();
            total += f * (-I * xi * s).exp() * (0.5 * (v - u) * w);
        }
    }
    Ok(total)
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Density CSV: one row per node of every interface; ρ is written as zero
/// outside I₁.
pub fn write_density_csv(path: &Path, system: &LinearSystem, dens: &DensitySet) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::Io(e.to_string()))?);
    let mut out = String::from(
        "interface_id,s,rho_1_re,rho_1_im,rho_2_re,rho_2_im,tau_1_re,tau_1_im,tau_2_re,tau_2_im,mu_1_re,mu_1_im,mu_2_re,mu_2_im\n",
    );
    for (k, (mesh, d)) in system.meshes.iter().zip(&dens.interfaces).enumerate() {
        let i1 = mesh.i1_nodes();
        for j in 0..mesh.total_nodes() {
            let rho = if i1.contains(&j) { d.rho[j - i1.start] } else { [ZERO; 2] };
            let mut row = vec![(k + 1).to_string(), fmt(mesh.s[j])];
            for v in [rho, d.tau[j], d.mu[j]] {
                for c in v {
                    row.push(fmt(c.re));
                    row.push(fmt(c.im));
                }
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }
    }
    f.write_all(out.as_bytes()).map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

/// One parsed density CSV row.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityRow {
    pub interface: usize,
    pub s: f64,
    pub rho: Spinor,
    pub tau: Spinor,
    pub mu: Spinor,
}

pub fn read_density_csv(path: &Path) -> Result<Vec<DensityRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(e.to_string()))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Validation("empty density CSV".into()))?;
    if header.split(',').count() != 14 || !header.starts_with("interface_id,s,") {
        return Err(Error::Validation("density CSV header mismatch".into()));
    }
    let mut out = vec![];
    for (n, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 14 {
            return Err(Error::Validation(format!("density CSV row {} has {} fields", n + 2, f.len())));
        }
        let num = |i: usize| -> Result<f64> {
            f[i].parse::<f64>().map_err(|_| Error::Validation(format!("bad number in row {}, column {}", n + 2, i + 1)))
        };
        let sp = |i: usize| -> Result<Spinor> { Ok([C64::new(num(i)?, num(i + 1)?), C64::new(num(i + 2)?, num(i + 3)?)]) };
        out.push(DensityRow {
            interface: f[0].parse().map_err(|_| Error::Validation(format!("bad interface id in row {}", n + 2)))?,
            s: num(1)?,
            rho: sp(2)?,
            tau: sp(6)?,
            mu: sp(10)?,
        });
    }
    Ok(out)
}
