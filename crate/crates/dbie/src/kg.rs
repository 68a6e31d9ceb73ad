//! Klein–Gordon comparison model: (−Δ+ω²)u = f off Γ, [[∂ₙu]] = −2|m|u on Γ.
//!
//! u = u_i + 𝒮_ω μ with μ = (1+Q)ρ, Q = 2im²R, and
//! (1 − 2|m|𝒮_ω)(1+Q)ρ = 2|m| u_i∘γ. On Γ the density is μ = 2|m|u.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use faer::Mat;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{extrapolate_poly, signed_distance, FieldGrid, GridSpec, NEAR_ZONE};
use crate::geometry::Curve;
use crate::mesh::PanelMesh;
use crate::operators::layer::{offcurve_row, single_layer_self};
use crate::operators::{Direction, Half, Resolvent, ResolventSpec};
use crate::oracle_flat::deformed_contour;
use crate::solve::lu_solve;
use crate::source::{Region, SourceSpec};
use crate::specfun::k01;
use crate::spinor::{C64, I, ZERO};
use crate::system::{Discretization, ProblemSpec};

/// Scalar delta source.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KgSource {
    pub location: [f64; 2],
    pub amplitude: C64,
}

#[derive(Clone, Debug)]
pub struct KgProblem {
    pub curve: Arc<Curve>,
    pub m: f64,
    pub e: f64,
    pub sources: Vec<KgSource>,
    pub disc: Discretization,
    pub direction: Direction,
}

impl KgProblem {
    pub fn new(curve: Arc<Curve>, m: f64, e: f64, sources: Vec<KgSource>, disc: Discretization) -> Self {
        Self { curve, m, e, sources, disc, direction: Direction::Outgoing }
    }

    pub fn omega(&self) -> f64 {
        ((self.m - self.e) * (self.m + self.e)).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !self.e.is_finite() || self.e == 0.0 || !(self.e.abs() < self.m.abs()) {
            return Err(Error::Precondition(format!("0 < |E| < |m| required (m={}, E={})", self.m, self.e)));
        }
        if self.sources.iter().any(|s| !s.location.iter().all(|v| v.is_finite())) {
            return Err(Error::Validation("source location not finite".into()));
        }
        Ok(())
    }

    /// The Dirac problem with the same geometry, mass and sources; used for
    /// the mesh and truncation windows (same ω).
    fn dirac_proxy(&self) -> ProblemSpec {
        let sources = self
            .sources
            .iter()
            .map(|s| SourceSpec::new(s.location, [s.amplitude, ZERO], Region::Omega2))
            .collect();
        let mut p = ProblemSpec::dirac(self.curve.clone(), self.m.abs(), self.e, sources, self.disc.clone());
        p.direction = self.direction;
        p
    }

    pub fn build_mesh(&self) -> Result<PanelMesh> {
        self.validate()?;
        let mut meshes = self.dirac_proxy().build_meshes()?;
        Ok(meshes.remove(0))
    }

    /// u_i(x) = Σ a·K₀(ω|x − x₀|)/2π.
    pub fn incident(&self, x: [f64; 2]) -> Result<C64> {
        let w = self.omega();
        let mut out = ZERO;
        for s in &self.sources {
            let r = (x[0] - s.location[0]).hypot(x[1] - s.location[1]);
            if r == 0.0 {
                return Err(Error::Singularity("field evaluated at a source".into()));
            }
            out += s.amplitude * (k01(w * r).0 / (2.0 * PI));
        }
        Ok(out)
    }

    fn resolvent_spec(&self) -> ResolventSpec {
        ResolventSpec { e: self.e, direction: self.direction }
    }

    fn coef(&self) -> C64 {
        C64::new(0.0, 2.0 * self.m * self.m)
    }
}

#[derive(Clone, Debug)]
pub struct KgSystem {
    pub problem: KgProblem,
    pub mesh: PanelMesh,
    pub matrix: Mat<C64>,
    pub rhs: Vec<C64>,
}

/// Assembles (1 − 2|m|𝒮_ω)(1+Q) on the I₁ nodes.
pub fn kg_assemble(problem: &KgProblem) -> Result<KgSystem> {
    let mesh = problem.build_mesh()?;
    kg_assemble_on(problem, mesh)
}

pub fn kg_assemble_on(problem: &KgProblem, mesh: PanelMesh) -> Result<KgSystem> {
    problem.validate()?;
    let i1 = mesh.i1_nodes();
    let off = i1.start;
    let n1 = mesh.n1();
    let twom = 2.0 * problem.m.abs();
    let s = single_layer_self(&mesh, problem.omega(), i1.clone());
    let res = Resolvent::on_i1(&mesh, problem.resolvent_spec())?;
    let coef = problem.coef();
    let n2 = mesh.total_nodes();
    let rows: Vec<Vec<C64>> = (0..n1)
        .into_par_iter()
        .map(|r| {
            let mut x: Vec<C64> = (0..n2).map(|a| C64::new(-twom * s[(r, a)], 0.0)).collect();
            x[off + r] += 1.0;
            let mut y = vec![ZERO; n1];
            res.apply_transpose(Half::Full, &x, &mut y);
            for (c, v) in y.iter_mut().enumerate() {
                *v = *v * coef + x[off + c];
            }
            y
        })
        .collect();
    let matrix = Mat::from_fn(n1, n1, |r, c| rows[r][c]);
    let rhs = i1
        .map(|i| Ok(problem.incident(mesh.points[i])? * twom))
        .collect::<Result<Vec<_>>>()?;
    Ok(KgSystem { problem: problem.clone(), mesh, matrix, rhs })
}

#[derive(Clone, Debug)]
pub struct KgDensity {
    /// On the I₁ nodes.
    pub rho: Vec<C64>,
    /// μ = (1+Q)ρ on all nodes.
    pub mu: Vec<C64>,
    pub cond: f64,
}

pub fn kg_solve(sys: &KgSystem) -> Result<KgDensity> {
    let p = &sys.problem;
    let (rho, cond) = lu_solve(&sys.matrix, &sys.rhs, p.m, p.e)?;
    let res = Resolvent::on_i1(&sys.mesh, p.resolvent_spec())?;
    let r = res.apply(Half::Full, &rho);
    let off = sys.mesh.i1_nodes().start;
    let coef = p.coef();
    let mut mu: Vec<C64> = r.iter().map(|v| v * coef).collect();
    for (c, v) in rho.iter().enumerate() {
        mu[off + c] += v;
    }
    Ok(KgDensity { rho, mu, cond })
}

/// u = u_i + 𝒮_ω μ at x (continuous across Γ).
pub fn kg_field(sys: &KgSystem, dens: &KgDensity, x: [f64; 2]) -> Result<C64> {
    let w = sys.problem.omega();
    let c = 1.0 / (2.0 * PI);
    let mut out = sys.problem.incident(x)?;
    offcurve_row(
        &sys.mesh,
        x,
        0..sys.mesh.panels.len(),
        |y, _| c * k01(w * (x[0] - y[0]).hypot(x[1] - y[1])).0,
        |j, v: f64| out += dens.mu[j] * v,
    );
    Ok(out)
}

/// Field on a grid (one component), masking the near zone of Γ.
pub fn kg_field_grid(sys: &KgSystem, dens: &KgDensity, grid: GridSpec) -> Result<FieldGrid> {
    let pts: Vec<[f64; 2]> = (0..grid.ny).flat_map(|j| (0..grid.nx).map(move |i| grid.point(i, j))).collect();
    let vals: Vec<(Option<Region>, C64)> = pts
        .par_iter()
        .map(|&x| {
            let (d, _) = signed_distance(&sys.mesh, x);
            if d.abs() < NEAR_ZONE || sys.problem.sources.iter().any(|s| s.location == x) {
                return Ok((None, C64::new(f64::NAN, f64::NAN)));
            }
            let region = if d >= 0.0 { Region::Omega2 } else { Region::Omega1 };
            Ok((Some(region), kg_field(sys, dens, x)?))
        })
        .collect::<Result<_>>()?;
    Ok(FieldGrid {
        grid,
        ncomp: 1,
        values: vals.iter().map(|v| v.1).collect(),
        regions: vals.iter().map(|v| v.0).collect(),
    })
}

/// |[[∂ₙu]] + 2|m|u| at node i: one-sided values and normal derivatives
/// from degree-4 fits to u(γ ± kh n̂), k = 1..5.
pub fn kg_flux_residual(sys: &KgSystem, dens: &KgDensity, i: usize, h: f64) -> Result<f64> {
    let x = sys.mesh.points[i];
    let n = sys.mesh.normals[i];
    let side = |sg: f64| -> Result<(C64, C64)> {
        let d: Vec<f64> = (1..=5).map(|k| k as f64 * h).collect();
        let v = d
            .iter()
            .map(|&t| kg_field(sys, dens, [x[0] + sg * t * n[0], x[1] + sg * t * n[1]]))
            .collect::<Result<Vec<_>>>()?;
        let (u0, du) = extrapolate_poly(&d, &v);
        Ok((u0, du * sg))
    };
    let (ua, da) = side(1.0)?;
    let (ub, db) = side(-1.0)?;
    let u = (ua + ub) * 0.5;
    Ok((da - db + u * (2.0 * sys.problem.m.abs())).norm())
}

/// Tail of a curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tail {
    Left,
    Right,
}

/// Amplitude A of the outgoing edge mode μ ≈ A e^{±iE x₁} on the buffer
/// nodes of one tail (outside I₁, where μ is exactly a mode), by least
/// squares in the horizontal coordinate.
pub fn tail_mode_amplitude(mesh: &PanelMesh, mu: &[C64], e: f64, tail: Tail) -> Result<C64> {
    let (a, b) = mesh.windows.i1;
    let idx: Vec<usize> = (0..mesh.total_nodes())
        .filter(|&j| match tail {
            Tail::Left => mesh.s[j] < a,
            Tail::Right => mesh.s[j] > b,
        })
        .collect();
    if idx.is_empty() {
        return Err(Error::Validation("no buffer nodes on this tail".into()));
    }
    let sg = if tail == Tail::Right { 1.0 } else { -1.0 };
    let mut num = ZERO;
    let mut den = 0.0;
    for &j in &idx {
        num += mu[j] * (-I * sg * e * mesh.points[j][0]).exp() * mesh.w[j];
        den += mesh.w[j];
    }
    Ok(num / den)
}

/// Transmission through an obstacle for a source on one side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transmission {
    /// |A_far|² / (|A_far|² + |A_back|²)
    pub t: f64,
    /// (|A_far|² + |A_back|²) / |A_inc|²; equals 1 when no power is lost.
    pub balance: f64,
}

/// T from the obstacle solution and a reference solution on the straight
/// line through the obstacle's tails (same source): the back-scattered mode
/// is the difference of the two solutions on the source-side tail; the
/// incident amplitude is the reference's amplitude towards the obstacle.
pub fn kg_transmission(
    obst: (&PanelMesh, &[C64]),
    reference: (&PanelMesh, &[C64]),
    e: f64,
    source_side: Tail,
) -> Result<Transmission> {
    let far = if source_side == Tail::Right { Tail::Left } else { Tail::Right };
    let a_far = tail_mode_amplitude(obst.0, obst.1, e, far)?;
    let back = tail_mode_amplitude(obst.0, obst.1, e, source_side)? - tail_mode_amplitude(reference.0, reference.1, e, source_side)?;
    let inc = tail_mode_amplitude(reference.0, reference.1, e, far)?;
    let (f, b) = (a_far.norm_sqr(), back.norm_sqr());
    let t = crate::field::transmission_ratio(f, b)?;
    Ok(Transmission { t, balance: (f + b) / inc.norm_sqr() })
}

/// The same problem on the straight line through the curve's flat tails
/// (both tails must lie on one horizontal line).
pub fn kg_reference_problem(problem: &KgProblem) -> Result<KgProblem> {
    let c = &problem.curve;
    let ft = c.flat_tails;
    let (l, r) = (c.eval(ft.t_left)?, c.eval(ft.t_right)?);
    let horizontal = |a: f64| a.sin().abs() < 1e-10;
    if !horizontal(ft.angle_left) || !horizontal(ft.angle_right) || (l.point[1] - r.point[1]).abs() > 1e-8 {
        return Err(Error::Validation("transmission needs both tails on one horizontal line".into()));
    }
    let params = [("offset".to_string(), r.point[1])].into_iter().collect();
    let line = crate::geometry::curve_catalog("shifted_flat", &params)?;
    let mut p = problem.clone();
    p.curve = Arc::new(line);
    Ok(p)
}

/// Tail nearest to the sources (by horizontal position against the
/// midpoint of the deformation).
pub fn source_tail(problem: &KgProblem) -> Result<Tail> {
    let c = &problem.curve;
    let mid = 0.5 * (c.eval(c.flat_tails.t_left)?.point[0] + c.eval(c.flat_tails.t_right)?.point[0]);
    let x: f64 = problem.sources.iter().map(|s| s.location[0]).sum::<f64>();
    if problem.sources.is_empty() {
        return Err(Error::Validation("no sources".into()));
    }
    Ok(if x / problem.sources.len() as f64 >= mid { Tail::Right } else { Tail::Left })
}

/// Solves the problem and its straight-line reference and measures T.
pub fn kg_transmission_solve(problem: &KgProblem) -> Result<(KgSystem, KgDensity, Transmission)> {
    let sys = kg_assemble(problem)?;
    let dens = kg_solve(&sys)?;
    let rp = kg_reference_problem(problem)?;
    let rsys = kg_assemble(&rp)?;
    let rdens = kg_solve(&rsys)?;
    let t = kg_transmission((&sys.mesh, &dens.mu), (&rsys.mesh, &rdens.mu), problem.e, source_tail(problem)?)?;
    Ok((sys, dens, t))
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Density CSV in the Dirac schema: ρ and μ in component 1 (τ = μ), component 2 zero.
pub fn write_kg_density_csv(path: &Path, sys: &KgSystem, dens: &KgDensity) -> Result<()> {
    let mut out = String::from(
        "interface_id,s,rho_1_re,rho_1_im,rho_2_re,rho_2_im,tau_1_re,tau_1_im,tau_2_re,tau_2_im,mu_1_re,mu_1_im,mu_2_re,mu_2_im\n",
    );
    let i1 = sys.mesh.i1_nodes();
    for j in 0..sys.mesh.total_nodes() {
        let rho = if i1.contains(&j) { dens.rho[j - i1.start] } else { ZERO };
        let mut row = vec!["1".to_string(), fmt(sys.mesh.s[j])];
        for v in [rho, ZERO, dens.mu[j], ZERO, dens.mu[j], ZERO] {
            row.push(fmt(v.re));
            row.push(fmt(v.im));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::Io(e.to_string()))
}

/// One row of a KG energy sweep: field sample and transmission (NaN when
/// not measured or failed).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KgSweepRow {
    pub e: f64,
    pub value: C64,
    pub t: f64,
}

/// Sweep CSV `E,value_re,value_im,T`.
pub fn write_kg_sweep_csv(path: &Path, rows: &[KgSweepRow]) -> Result<()> {
    let mut s = String::from("E,value_re,value_im,T\n");
    for r in rows {
        s.push_str(&format!("{},{},{},{}\n", fmt(r.e), fmt(r.value.re), fmt(r.value.im), fmt(r.t)));
    }
    std::fs::write(path, s).map_err(|e| Error::Io(e.to_string()))
}

pub fn read_kg_sweep_csv(path: &Path) -> Result<Vec<KgSweepRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(e.to_string()))?;
    let mut lines = text.lines();
    if lines.next() != Some("E,value_re,value_im,T") {
        return Err(Error::Validation("KG sweep CSV header mismatch".into()));
    }
    lines
        .enumerate()
        .map(|(n, l)| {
            let f = l
                .split(',')
                .map(|v| v.parse::<f64>().map_err(|_| Error::Validation(format!("bad number in row {}", n + 2))))
                .collect::<Result<Vec<f64>>>()?;
            if f.len() != 4 {
                return Err(Error::Validation(format!("KG sweep CSV row {} has {} fields", n + 2, f.len())));
            }
            Ok(KgSweepRow { e: f[0], value: C64::new(f[1], f[2]), t: f[3] })
        })
        .collect()
}

/// Exact solution of the flat KG problem on {x₂ = 0}, by inverse transforms
/// along the same deformed contour as the Dirac oracle.
#[derive(Clone, Debug)]
pub struct KgFlatOracle {
    pub m: f64,
    pub e: f64,
    pub omega: f64,
    pub sources: Vec<KgSource>,
    xi: Vec<C64>,
    w: Vec<C64>,
    rho_hat: Vec<C64>,
    mu_hat: Vec<C64>,
}

impl KgFlatOracle {
    pub fn new(m: f64, e: f64, sources: &[KgSource], direction: Direction) -> Result<Self> {
        if !(e.abs() < m.abs()) || e == 0.0 {
            return Err(Error::Precondition(format!("0 < |E| < |m| required (m={m}, E={e})")));
        }
        let omega = ((m - e) * (m + e)).sqrt();
        let ymin = sources.iter().map(|s| s.location[1].abs()).fold(f64::INFINITY, f64::min);
        if ymin < 1e-3 {
            return Err(Error::Validation("source within 1e-3 of the interface".into()));
        }
        let (xi, w) = deformed_contour(m, e, omega, ymin, direction);
        let am = m.abs();
        let mut rho_hat = Vec::with_capacity(xi.len());
        let mut mu_hat = Vec::with_capacity(xi.len());
        for &z in &xi {
            let q = (z * z + omega * omega).sqrt();
            let f: C64 = sources
                .iter()
                .map(|s| s.amplitude * (-I * z * s.location[0]).exp() * (-q * s.location[1].abs()).exp() / (2.0 * q))
                .sum::<C64>()
                * (2.0 * am);
            let d = z * z - e * e;
            let pre = (d - C64::new(0.0, 2.0 * m * m)) / (q * (q + am));
            let r = f / pre;
            rho_hat.push(r);
            mu_hat.push(r * (d - C64::new(0.0, 2.0 * m * m)) / d);
        }
        Ok(Self { m, e, omega, sources: sources.to_vec(), xi, w, rho_hat, mu_hat })
    }

    fn inverse(&self, hat: &[C64], t: f64) -> C64 {
        self.xi.iter().zip(&self.w).zip(hat).map(|((z, w), v)| (I * z * t).exp() * w * v).sum()
    }

    pub fn rho(&self, t: f64) -> C64 {
        self.inverse(&self.rho_hat, t)
    }

    pub fn mu(&self, t: f64) -> C64 {
        self.inverse(&self.mu_hat, t)
    }

    pub fn field(&self, x: [f64; 2]) -> Result<C64> {
        if x[1].abs() < 1e-3 {
            return Err(Error::Validation("flat oracle field requires |x₂| ≥ 1e-3".into()));
        }
        let mut out = ZERO;
        for s in &self.sources {
            let r = (x[0] - s.location[0]).hypot(x[1] - s.location[1]);
            if r == 0.0 {
                return Err(Error::Singularity("field evaluated at a source".into()));
            }
            out += s.amplitude * (k01(self.omega * r).0 / (2.0 * PI));
        }
        for ((z, w), v) in self.xi.iter().zip(&self.w).zip(&self.mu_hat) {
            let q = (z * z + self.omega * self.omega).sqrt();
            out += (I * z * x[0]).exp() * w * v * (-q * x[1].abs()).exp() / (2.0 * q);
        }
        Ok(out)
    }
}
