//! Incident, scattered and total fields and the physical diagnostics.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::{closest_on_panel, PanelMesh};
use crate::operators::layer::{offcurve_row, single_layer_row_self};
use crate::solve::{fourier_coeff, DensitySet};
use crate::source::Region;
use crate::specfun::dirac_kernel;
use crate::spinor::{dot_sigma, spinor_norm, Mat2, Spinor, C64, I, SIGMA3, ZERO};
use crate::system::{LinearSystem, Model, ProblemSpec};

/// Points closer than this to an interface are masked on grids.
pub const NEAR_ZONE: f64 = 1e-3;

/// Signed distance to an interface (positive on the side of its normal) and
/// the arclength of the closest point.
pub fn signed_distance(mesh: &PanelMesh, x: [f64; 2]) -> (f64, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    for (j, p) in mesh.points.iter().enumerate() {
        let d = (p[0] - x[0]).hypot(p[1] - x[1]);
        if d < best.1 {
            best = (j, d);
        }
    }
    let k = mesh.panel_of_node(best.0);
    let mut cand = (k, f64::INFINITY, 0.0);
    for q in k.saturating_sub(1)..(k + 2).min(mesh.panels.len()) {
        let (t, d) = closest_on_panel(mesh, q, x);
        if d < cand.1 {
            cand = (q, d, t);
        }
    }
    let (q, d, t) = cand;
    let mut basis = vec![0.0; mesh.order];
    let (p, tan) = mesh.interp_geometry(q, t, &mut basis);
    let n = [-tan[1], tan[0]];
    let side = (x[0] - p[0]) * n[0] + (x[1] - p[1]) * n[1];
    (if side >= 0.0 { d } else { -d }, mesh.panels[q].to_global(t))
}

/// Region of x and its distance to the nearest interface.
pub fn classify_point(meshes: &[PanelMesh], x: [f64; 2]) -> (Region, f64) {
    let sd: Vec<f64> = meshes.iter().map(|m| signed_distance(m, x).0).collect();
    let dist = sd.iter().map(|d| d.abs()).fold(f64::INFINITY, f64::min);
    let region = if meshes.len() == 1 {
        if sd[0] >= 0.0 {
            Region::Omega2
        } else {
            Region::Omega1
        }
    } else if sd[1] >= 0.0 {
        Region::Omega2
    } else if sd[0] < 0.0 {
        Region::Omega0
    } else {
        Region::Omega1
    };
    (region, dist)
}

/// Evaluates fields of a solved problem.
pub struct FieldEvaluator<'a> {
    pub spec: &'a ProblemSpec,
    pub meshes: &'a [PanelMesh],
    pub dens: &'a DensitySet,
}

impl<'a> FieldEvaluator<'a> {
    pub fn new(system: &'a LinearSystem, dens: &'a DensitySet) -> Self {
        Self { spec: &system.spec, meshes: &system.meshes, dens }
    }

    /// Interfaces whose densities radiate into a region.
    fn contributors(&self, region: Region) -> Vec<usize> {
        match (self.meshes.len(), region) {
            (1, Region::Omega0) => vec![],
            (1, _) => vec![0],
            (_, Region::Omega2) => vec![1],
            (_, Region::Omega1) => vec![0, 1],
            (_, Region::Omega0) => vec![0],
        }
    }

    pub fn region(&self, x: [f64; 2]) -> (Region, f64) {
        classify_point(self.meshes, x)
    }

    pub fn incident_in(&self, region: Region, x: [f64; 2]) -> Result<Spinor> {
        self.spec.incident_in(region, x)
    }

    /// Scattered field with the Green's function of the given region.
    pub fn scattered_in(&self, region: Region, x: [f64; 2]) -> Result<Spinor> {
        let g = self.spec.greens(region)?;
        let mut out = [ZERO; 2];
        for k in self.contributors(region) {
            let mesh = &self.meshes[k];
            let mu = &self.dens.interfaces[k].mu;
            offcurve_row(
                mesh,
                x,
                0..mesh.panels.len(),
                |y, _| dirac_kernel([x[0] - y[0], x[1] - y[1]], &g),
                |j, b: Mat2| {
                    let v = b.apply(&mu[j]);
                    out[0] += v[0];
                    out[1] += v[1];
                },
            );
        }
        Ok(out)
    }

    pub fn total_in(&self, region: Region, x: [f64; 2]) -> Result<Spinor> {
        let a = self.incident_in(region, x)?;
        let b = self.scattered_in(region, x)?;
        Ok([a[0] + b[0], a[1] + b[1]])
    }

    pub fn incident(&self, x: [f64; 2]) -> Result<Spinor> {
        self.incident_in(self.region(x).0, x)
    }

    pub fn scattered(&self, x: [f64; 2]) -> Result<Spinor> {
        self.scattered_in(self.region(x).0, x)
    }

    /// u = u_i + u_s with the region-correct Green's function.
    pub fn total(&self, x: [f64; 2]) -> Result<Spinor> {
        self.total_in(self.region(x).0, x)
    }

    /// One-sided limits at γ_k(s_i) from above and below, by quadratic
    /// extrapolation of u(γ ± δn̂) over δ ∈ {1e−2, 1e−3, 1e−4}.
    pub fn one_sided_limits(&self, k: usize, i: usize, scattered_only: bool) -> Result<(Spinor, Spinor)> {
        let mesh = &self.meshes[k];
        let (lo, hi) = self.spec.sides(k);
        let x = mesh.points[i];
        let n = mesh.normals[i];
        let deltas = [1e-2, 1e-3, 1e-4];
        let eval = |region: Region, sgn: f64| -> Result<Spinor> {
            let mut vals = [[ZERO; 2]; 3];
            for (v, &d) in vals.iter_mut().zip(&deltas) {
                let y = [x[0] + sgn * d * n[0], x[1] + sgn * d * n[1]];
                *v = if scattered_only { self.scattered_in(region, y)? } else { self.total_in(region, y)? };
            }
            Ok(extrapolate(&deltas, &vals))
        };
        Ok((eval(hi, 1.0)?, eval(lo, -1.0)?))
    }
}

/// Value at δ = 0 of the quadratic through three samples.
pub fn extrapolate(d: &[f64; 3], v: &[Spinor; 3]) -> Spinor {
    let l = |a: usize, b: usize, c: usize| d[b] * d[c] / ((d[a] - d[b]) * (d[a] - d[c]));
    let w = [l(0, 1, 2), l(1, 0, 2), l(2, 0, 1)];
    let mut out = [ZERO; 2];
    for (wi, vi) in w.iter().zip(v) {
        out[0] += vi[0] * *wi;
        out[1] += vi[1] * *wi;
    }
    out
}

/// Value and derivative at 0 of the interpolant through (d_k, v_k), d_k ≠ 0.
pub fn extrapolate_poly(d: &[f64], v: &[C64]) -> (C64, C64) {
    let mut val = ZERO;
    let mut der = ZERO;
    for k in 0..d.len() {
        let mut l = 1.0;
        let mut s = 0.0;
        for j in (0..d.len()).filter(|&j| j != k) {
            l *= -d[j] / (d[k] - d[j]);
            s -= 1.0 / d[j];
        }
        val += v[k] * l;
        der += v[k] * (l * s);
    }
    (val, der)
}

/// Max over probe nodes (I₁ nodes of every interface, `stride` apart) of
/// ‖[[u_i + u_s]]‖, from extrapolated one-sided limits.
pub fn jump_check(ev: &FieldEvaluator, stride: usize) -> Result<f64> {
    let mut probes = vec![];
    for (k, mesh) in ev.meshes.iter().enumerate() {
        for i in mesh.i1_nodes().step_by(stride.max(1)) {
            probes.push((k, i));
        }
    }
    let vals: Vec<f64> = probes
        .par_iter()
        .map(|&(k, i)| {
            let (a, b) = ev.one_sided_limits(k, i, false)?;
            Ok(spinor_norm(&[a[0] - b[0], a[1] - b[1]]))
        })
        .collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// Residual of [[u_s]] = 2mσ₃𝒮_ωμ + i(n̂·σ)μ at the given I₁ nodes of a
/// single-interface Dirac problem.
pub fn jump_identity_residual(ev: &FieldEvaluator, nodes: &[usize]) -> Result<f64> {
    let m = match ev.spec.model {
        Model::Dirac { m } if ev.meshes.len() == 1 => m,
        _ => return Err(Error::Validation("jump identity applies to one Dirac interface".into())),
    };
    let mesh = &ev.meshes[0];
    let omega = ((m - ev.spec.e) * (m + ev.spec.e)).sqrt();
    let mu = &ev.dens.interfaces[0].mu;
    let vals: Vec<f64> = nodes
        .par_iter()
        .map(|&i| {
            let (a, b) = ev.one_sided_limits(0, i, true)?;
            let mut row = vec![0.0; mesh.total_nodes()];
            single_layer_row_self(mesh, i, omega, &mut row);
            let mut s = [ZERO; 2];
            for (w, v) in row.iter().zip(mu) {
                s[0] += v[0] * *w;
                s[1] += v[1] * *w;
            }
            let lhs = SIGMA3.scale_re(2.0 * m).apply(&s);
            let rhs = dot_sigma(mesh.normals[i]).scale(I).apply(&mu[i]);
            let want = [lhs[0] + rhs[0], lhs[1] + rhs[1]];
            Ok(spinor_norm(&[a[0] - b[0] - want[0], a[1] - b[1] - want[1]]))
        })
        .collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// Fourth-order finite-difference Dirac residual (−iσ₁∂₁ − iσ₂∂₂ + m_sσ₃ − E)u at x.
pub fn pde_residual(ev: &FieldEvaluator, x: [f64; 2], h: f64) -> Result<Spinor> {
    let (region, _) = ev.region(x);
    let g = ev.spec.greens(region)?;
    let u = |y: [f64; 2]| ev.total_in(region, y);
    let d = |dir: [f64; 2]| -> Result<Spinor> {
        let at = |k: f64| u([x[0] + k * h * dir[0], x[1] + k * h * dir[1]]);
        let (a, b, c, e) = (at(-2.0)?, at(-1.0)?, at(1.0)?, at(2.0)?);
        let f = |j: usize| (a[j] - e[j] + (c[j] - b[j]) * 8.0) / (12.0 * h);
        Ok([f(0), f(1)])
    };
    let d1 = d([1.0, 0.0])?;
    let d2 = d([0.0, 1.0])?;
    let u0 = u(x)?;
    let s1 = crate::spinor::SIGMA1.scale(-I).apply(&d1);
    let s2 = crate::spinor::SIGMA2.scale(-I).apply(&d2);
    let mass = crate::specfun::mass_term(g.m_signed, g.e).apply(&u0);
    Ok([s1[0] + s2[0] + mass[0], s1[1] + s2[1] + mass[1]])
}

/// Which radiation condition to test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Radiation {
    /// (±∂_t − iE)u → 0
    Outgoing,
    /// (±∂_t + iE)u → 0
    Incoming,
}

/// |(±∂_t ∓' iE)u(γ(t) + r n̂(t))| at the probes, with + for t > 0 and − for
/// t < 0; ∂_t by fourth-order differences with step h along the offset curve.
pub fn radiation_diagnostic(
    mesh: &PanelMesh,
    field: impl Fn([f64; 2]) -> Result<Spinor>,
    e: f64,
    offset: f64,
    probes: &[f64],
    kind: Radiation,
    h: f64,
) -> Result<Vec<f64>> {
    let curve = &mesh.curve;
    let ft = curve.flat_tails;
    let mut out = vec![];
    for &t in probes {
        if t > ft.t_left.min(ft.t_right) && t < ft.t_left.max(ft.t_right) {
            return Err(Error::Validation(format!("probe t = {t} is not in a flat tail")));
        }
        let at = |s: f64| -> Result<Spinor> {
            let p = curve.eval(s)?;
            field([p.point[0] + offset * p.normal[0], p.point[1] + offset * p.normal[1]])
        };
        let (a, b, c, d) = (at(t - 2.0 * h)?, at(t - h)?, at(t + h)?, at(t + 2.0 * h)?);
        let u = at(t)?;
        let sg = if t >= 0.0 { 1.0 } else { -1.0 };
        let ie = match kind {
            Radiation::Outgoing => C64::new(0.0, -e),
            Radiation::Incoming => C64::new(0.0, e),
        };
        let r: Vec<C64> = (0..2)
            .map(|j| (a[j] - d[j] + (c[j] - b[j]) * 8.0) / (12.0 * h) * sg + ie * u[j])
            .collect();
        out.push(spinor_norm(&[r[0], r[1]]));
    }
    Ok(out)
}

/// Edge-mode branch of the two-interface asymptotics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// Right branch of Γ₁ (right-moving).
    Gamma1Right,
    /// Left branch of Γ₂ (left-moving).
    Gamma2Left,
}

/// Transverse edge-mode profile m e^{−m|δ|} ρ̂ · (1, e^{iφ})/√2 on Γ₁, or
/// (e^{−iφ}, −1)/√2 on Γ₂ (without the e^{±iEt} phase).
pub fn edge_mode_profile(delta: f64, m: f64, e: f64, phi: f64, rho_hat: C64, branch: Branch) -> Result<Spinor> {
    if !(m > 0.0) || !(e.abs() < m) {
        return Err(Error::Precondition(format!("m > 0 and |E| < m required (m={m}, E={e})")));
    }
    let a = rho_hat * (m * (-m * delta.abs()).exp() / 2f64.sqrt());
    Ok(match branch {
        Branch::Gamma1Right => [a, a * C64::new(0.0, phi).exp()],
        Branch::Gamma2Left => [a * C64::new(0.0, -phi).exp(), -a],
    })
}

/// Fourier transform over I₁ of one component of ρ.
pub fn rho_transform(mesh: &PanelMesh, rho: &[Spinor], comp: usize, xi: f64) -> Result<C64> {
    let vals: Vec<C64> = rho.iter().map(|v| v[comp]).collect();
    let st = mesh.i1_nodes().start;
    let w = mesh.windows.i1;
    fourier_coeff(mesh, &vals, st, (mesh.panels[mesh.i1_panels.start].a.max(w.0), w.1.min(mesh.panels[mesh.i1_panels.end - 1].b)), xi)
}

/// T_R = |ρ̃₁⁽¹⁾(E)|² / (|ρ̃₁⁽¹⁾(E)|² + |ρ̃₂⁽²⁾(−E)|²).
pub fn transmission_tr(meshes: &[PanelMesh], dens: &DensitySet, e: f64) -> Result<f64> {
    if meshes.len() != 2 || dens.interfaces.len() != 2 {
        return Err(Error::Validation("T_R needs a two-interface solution".into()));
    }
    let a = rho_transform(&meshes[0], &dens.interfaces[0].rho, 0, e)?.norm_sqr();
    let b = rho_transform(&meshes[1], &dens.interfaces[1].rho, 1, -e)?.norm_sqr();
    transmission_ratio(a, b)
}

/// a/(a + b) for squared amplitudes, with the undefined case reported.
pub fn transmission_ratio(a: f64, b: f64) -> Result<f64> {
    if a.sqrt() < 1e-12 && b.sqrt() < 1e-12 {
        return Err(Error::UndefinedTransmission(1e-12));
    }
    Ok(a / (a + b))
}

/// Rectangular lattice x = x0 + i·dx, y = y0 + j·dy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub dx: f64,
    pub dy: f64,
}

impl GridSpec {
    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        [self.x0 + i as f64 * self.dx, self.y0 + j as f64 * self.dy]
    }
}

/// Field samples; masked points hold NaN values and no region.
#[derive(Clone, Debug)]
pub struct FieldGrid {
    pub grid: GridSpec,
    pub ncomp: usize,
    /// Row-major (j outer, i inner), ncomp values per point.
    pub values: Vec<C64>,
    pub regions: Vec<Option<Region>>,
}

impl FieldGrid {
    pub fn get(&self, i: usize, j: usize) -> &[C64] {
        let k = (j * self.grid.nx + i) * self.ncomp;
        &self.values[k..k + self.ncomp]
    }
}

/// Total field on a grid, masking the near zone of every interface.
pub fn total_field_grid(ev: &FieldEvaluator, grid: GridSpec) -> Result<FieldGrid> {
    let pts: Vec<[f64; 2]> = (0..grid.ny).flat_map(|j| (0..grid.nx).map(move |i| grid.point(i, j))).collect();
    let vals: Vec<(Option<Region>, Spinor)> = pts
        .par_iter()
        .map(|&x| {
            let (region, dist) = ev.region(x);
            if dist < NEAR_ZONE || ev.spec.sources.iter().any(|s| s.location == x) {
                return Ok((None, [C64::new(f64::NAN, f64::NAN); 2]));
            }
            Ok((Some(region), ev.total_in(region, x)?))
        })
        .collect::<Result<_>>()?;
    Ok(FieldGrid {
        grid,
        ncomp: 2,
        values: vals.iter().flat_map(|(_, v)| [v[0], v[1]]).collect(),
        regions: vals.iter().map(|(r, _)| *r).collect(),
    })
}

pub const GRID_MAGIC: &[u8; 8] = b"DBIEGRID";

/// Binary grid: magic, nx, ny (u64 LE), x0, y0, dx, dy (f64 LE), ncomp (u64 LE),
/// then row-major complex128 payload (re, im per value).
pub fn write_grid(path: &Path, g: &FieldGrid) -> Result<()> {
    let mut buf = Vec::with_capacity(64 + 16 * g.values.len());
    buf.extend_from_slice(GRID_MAGIC);
    buf.extend_from_slice(&(g.grid.nx as u64).to_le_bytes());
    buf.extend_from_slice(&(g.grid.ny as u64).to_le_bytes());
    for v in [g.grid.x0, g.grid.y0, g.grid.dx, g.grid.dy] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf.extend_from_slice(&(g.ncomp as u64).to_le_bytes());
    for v in &g.values {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::Io(e.to_string()))?;
    f.write_all(&buf).map_err(|e| Error::Io(e.to_string()))
}

pub fn read_grid(path: &Path) -> Result<FieldGrid> {
    let mut buf = vec![];
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| Error::Io(e.to_string()))?;
    if buf.len() < 64 || &buf[..8] != GRID_MAGIC {
        return Err(Error::Validation("not a DBIEGRID file".into()));
    }
    let u = |o: usize| u64::from_le_bytes(buf[o..o + 8].try_into().unwrap()) as usize;
    let f = |o: usize| f64::from_le_bytes(buf[o..o + 8].try_into().unwrap());
    let grid = GridSpec { nx: u(8), ny: u(16), x0: f(24), y0: f(32), dx: f(40), dy: f(48) };
    let ncomp = u(56);
    let n = grid.nx.checked_mul(grid.ny).and_then(|v| v.checked_mul(ncomp));
    let n = n.ok_or_else(|| Error::Validation("grid dimensions overflow".into()))?;
    if buf.len() != 64 + 16 * n {
        return Err(Error::Validation(format!("grid payload has {} bytes, expected {}", buf.len() - 64, 16 * n)));
    }
    let values = (0..n).map(|k| C64::new(f(64 + 16 * k), f(72 + 16 * k))).collect();
    Ok(FieldGrid { grid, ncomp, values, regions: vec![None; grid.nx * grid.ny] })
}

/// Sweep CSV `param,value_re,value_im`.
pub fn write_param_csv(path: &Path, rows: &[(f64, C64)]) -> Result<()> {
    let mut s = String::from("param,value_re,value_im\n");
    for (p, v) in rows {
        s.push_str(&format!("{p:.16e},{:.16e},{:.16e}\n", v.re, v.im));
    }
    std::fs::write(path, s).map_err(|e| Error::Io(e.to_string()))
}

pub fn read_param_csv(path: &Path) -> Result<Vec<(f64, C64)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(e.to_string()))?;
    let mut lines = text.lines();
    if lines.next() != Some("param,value_re,value_im") {
        return Err(Error::Validation("sweep CSV header mismatch".into()));
    }
    lines
        .enumerate()
        .map(|(n, l)| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 3 {
                return Err(Error::Validation(format!("sweep CSV row {} has {} fields", n + 2, f.len())));
            }
            let p = |i: usize| {
                f[i].parse::<f64>().map_err(|_| Error::Validation(format!("bad number in row {}, column {}", n + 2, i + 1)))
            };
            Ok((p(0)?, C64::new(p(1)?, p(2)?)))
        })
        .collect()
}
