//! Problem specification and assembly of the square systems indexed by I₁ nodes.

use std::sync::Arc;

use faer::Mat;

use crate::error::{Error, Result};
use crate::geometry::Curve;
use crate::mesh::{build_mesh, refine_for_separation, truncation_intervals, MeshOptions, PanelMesh, TruncationWindows};
use crate::operators::{
    add_identity_part, add_resolvent_product, assemble_k, assemble_l, assemble_two_mass, mask_for_mass, Direction,
    Half, Resolvent, ResolventSpec, TwoMass,
};
use crate::source::{Region, SourceSpec};
use crate::specfun::{dirac_kernel, GreensParams};
use crate::spinor::{dot_sigma, Mat2, Spinor, C64, I, ZERO};

/// Mass model: equal and opposite masses ±m, or m₂ above and −m₁ below.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Model {
    Dirac { m: f64 },
    TwoMass { m1: f64, m2: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Discretization {
    pub order: usize,
    pub max_panel: f64,
    /// Truncation tolerance for the automatic windows.
    pub trunc_tol: f64,
    /// Multiplies the automatic I₂ buffer.
    pub buffer_scale: f64,
    /// Explicit windows, one per interface (overrides the automatic choice).
    pub windows: Option<Vec<TruncationWindows>>,
}

impl Discretization {
    pub fn new(order: usize, max_panel: f64) -> Self {
        Self { order, max_panel, trunc_tol: 1e-12, buffer_scale: 1.0, windows: None }
    }
}

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub model: Model,
    pub e: f64,
    /// One curve (Γ) or two (Γ₁ below Γ₂).
    pub curves: Vec<Arc<Curve>>,
    pub sources: Vec<SourceSpec>,
    pub disc: Discretization,
    pub direction: Direction,
}

impl ProblemSpec {
    pub fn dirac(curve: Arc<Curve>, m: f64, e: f64, sources: Vec<SourceSpec>, disc: Discretization) -> Self {
        Self { model: Model::Dirac { m }, e, curves: vec![curve], sources, disc, direction: Direction::Outgoing }
    }

    pub fn pair(c1: Arc<Curve>, c2: Arc<Curve>, m: f64, e: f64, sources: Vec<SourceSpec>, disc: Discretization) -> Self {
        Self { model: Model::Dirac { m }, e, curves: vec![c1, c2], sources, disc, direction: Direction::Outgoing }
    }

    pub fn two_mass(curve: Arc<Curve>, m1: f64, m2: f64, e: f64, sources: Vec<SourceSpec>, disc: Discretization) -> Self {
        Self {
            model: Model::TwoMass { m1, m2 },
            e,
            curves: vec![curve],
            sources,
            disc,
            direction: Direction::Outgoing,
        }
    }

    /// Interface mass m (m₂ for the two-mass model).
    pub fn m(&self) -> f64 {
        match self.model {
            Model::Dirac { m } => m,
            Model::TwoMass { m2, .. } => m2,
        }
    }

    /// Smallest decay rate ω among the regions.
    pub fn omega_min(&self) -> f64 {
        let w = |m: f64| ((m - self.e) * (m + self.e)).max(0.0).sqrt();
        match self.model {
            Model::Dirac { m } => w(m.abs()),
            Model::TwoMass { m1, m2 } => w(m1.abs()).min(w(m2.abs())),
        }
    }

    /// Signed mass and Green's parameters of a region.
    pub fn greens(&self, region: Region) -> Result<GreensParams> {
        let ms = match (self.model, region) {
            (Model::Dirac { m }, r) => r.mass(m),
            (Model::TwoMass { m2, .. }, Region::Omega2) => m2,
            (Model::TwoMass { m1, .. }, Region::Omega1) => -m1,
            (Model::TwoMass { .. }, Region::Omega0) => {
                return Err(Error::Validation("the two-mass model has no region Ω₀".into()))
            }
        };
        GreensParams::new(ms, self.e)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.e.is_finite() || self.e == 0.0 {
            return Err(Error::Precondition(format!("E must be finite and nonzero (E={})", self.e)));
        }
        match self.model {
            Model::Dirac { m } => {
                if !(self.e.abs() < m.abs()) {
                    return Err(Error::Precondition(format!("|E| < |m| required (m={m}, E={})", self.e)));
                }
            }
            Model::TwoMass { m1, m2 } => {
                TwoMass::new(m1, m2, self.e)?;
                if self.curves.len() != 1 {
                    return Err(Error::Validation("the two-mass model has a single interface".into()));
                }
            }
        }
        if self.curves.is_empty() || self.curves.len() > 2 {
            return Err(Error::Validation("one or two interfaces required".into()));
        }
        if let Some(w) = &self.disc.windows {
            if w.len() != self.curves.len() {
                return Err(Error::Validation("one window per interface required".into()));
            }
        }
        if !(self.disc.buffer_scale > 0.0) {
            return Err(Error::Validation("buffer_scale must be positive".into()));
        }
        let two = self.curves.len() == 2;
        for s in &self.sources {
            if !s.location.iter().all(|v| v.is_finite()) {
                return Err(Error::Validation("source location not finite".into()));
            }
            if s.region == Region::Omega0 && !two {
                return Err(Error::Validation("region Ω₀ exists only with two interfaces".into()));
            }
        }
        Ok(())
    }

    pub fn mesh_options(&self) -> MeshOptions {
        MeshOptions::new(self.disc.order, self.disc.max_panel).with_energy(self.e)
    }

    /// Windows (automatic or explicit) and meshes of all interfaces.
    pub fn build_meshes(&self) -> Result<Vec<PanelMesh>> {
        self.validate()?;
        let opts = self.mesh_options();
        let locs: Vec<[f64; 2]> = self.sources.iter().map(|s| s.location).collect();
        let mut meshes = vec![];
        for (k, c) in self.curves.iter().enumerate() {
            let w = match &self.disc.windows {
                Some(w) => w[k],
                None => {
                    let w = truncation_intervals(c, &locs, self.omega_min(), self.e, self.disc.trunc_tol)?;
                    w.with_buffer(w.buffer * self.disc.buffer_scale)
                }
            };
            meshes.push(build_mesh(c.clone(), w, &opts)?);
        }
        if meshes.len() == 2 {
            refine_for_separation(&mut meshes, &opts)?;
        }
        for s in &self.sources {
            for m in &meshes {
                let d = m.points.iter().map(|p| (p[0] - s.location[0]).hypot(p[1] - s.location[1])).fold(f64::INFINITY, f64::min);
                if d < 1e-3 {
                    return Err(Error::Validation(format!("source {:?} lies within 1e-3 of an interface", s.location)));
                }
            }
        }
        Ok(meshes)
    }

    /// Regions below and above interface k.
    pub fn sides(&self, k: usize) -> (Region, Region) {
        if self.curves.len() == 1 {
            (Region::Omega1, Region::Omega2)
        } else if k == 0 {
            (Region::Omega0, Region::Omega1)
        } else {
            (Region::Omega1, Region::Omega2)
        }
    }

    /// Incident field from the sources of one region (delta sources).
    pub fn incident_in(&self, region: Region, x: [f64; 2]) -> Result<Spinor> {
        let mut out = [ZERO; 2];
        let mut g = None;
        for s in self.sources.iter().filter(|s| s.region == region) {
            let gp = match g {
                Some(gp) => gp,
                None => {
                    let gp = self.greens(region)?;
                    g = Some(gp);
                    gp
                }
            };
            let d = [x[0] - s.location[0], x[1] - s.location[1]];
            if d[0] == 0.0 && d[1] == 0.0 {
                return Err(Error::Singularity("field evaluated at a source".into()));
            }
            let u = dirac_kernel(d, &gp).apply(&s.amplitude);
            out[0] += u[0];
            out[1] += u[1];
        }
        Ok(out)
    }

    /// [[u_i]] = (upper side) − (lower side) at node j of interface k.
    pub fn incident_jump(&self, k: usize, x: [f64; 2]) -> Result<Spinor> {
        let (lo, hi) = self.sides(k);
        let a = self.incident_in(hi, x)?;
        let b = self.incident_in(lo, x)?;
        Ok([a[0] - b[0], a[1] - b[1]])
    }
}

/// Assembled square system.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub spec: ProblemSpec,
    pub meshes: Vec<PanelMesh>,
    pub matrix: Mat<C64>,
    pub rhs: Vec<C64>,
    /// Offset of each interface's unknowns (in scalar entries).
    pub offsets: Vec<usize>,
}

impl LinearSystem {
    pub fn size(&self) -> usize {
        self.rhs.len()
    }
}

/// Resolvent mask and coefficient of 𝒫_k for interface k of a Dirac problem.
pub fn preconditioner_mask(spec: &ProblemSpec, k: usize) -> Mat2 {
    let m = spec.m();
    let mk = mask_for_mass(m);
    if spec.curves.len() == 2 && k == 0 {
        Mat2::IDENTITY - mk
    } else {
        mk
    }
}

pub fn preconditioner_coef(spec: &ProblemSpec) -> C64 {
    let m = spec.m();
    C64::new(0.0, 2.0 * m * m)
}

pub fn resolvent_spec(spec: &ProblemSpec) -> ResolventSpec {
    ResolventSpec { e: spec.e, direction: spec.direction }
}

/// Right-hand side on the I₁ nodes of interface k.
pub fn assemble_rhs(spec: &ProblemSpec, meshes: &[PanelMesh], k: usize) -> Result<Vec<C64>> {
    let mesh = &meshes[k];
    let rotate = matches!(spec.model, Model::Dirac { .. });
    let mut out = Vec::with_capacity(2 * mesh.n1());
    for i in mesh.i1_nodes() {
        let jump = spec.incident_jump(k, mesh.points[i])?;
        let mut left = dot_sigma(mesh.normals[i]).scale(I);
        if rotate {
            left = mesh.v(i).adjoint() * left;
        }
        let v = left.apply(&jump);
        out.push(v[0]);
        out.push(v[1]);
    }
    Ok(out)
}

/// Builds meshes and the full system.
pub fn assemble_system(spec: &ProblemSpec) -> Result<LinearSystem> {
    let meshes = spec.build_meshes()?;
    assemble_system_on(spec, meshes)
}

/// Assembles on given meshes.
pub fn assemble_system_on(spec: &ProblemSpec, meshes: Vec<PanelMesh>) -> Result<LinearSystem> {
    spec.validate()?;
    if meshes.len() != spec.curves.len() {
        return Err(Error::Validation("one mesh per interface required".into()));
    }
    let e = spec.e;
    let n1: Vec<usize> = meshes.iter().map(|m| m.n1()).collect();
    let offsets: Vec<usize> = n1.iter().scan(0, |acc, &n| {
        let o = *acc;
        *acc += 2 * n;
        Some(o)
    }).collect();
    let size: usize = n1.iter().map(|n| 2 * n).sum();
    let mut matrix = Mat::<C64>::zeros(size, size);
    let mut rhs = Vec::with_capacity(size);
    match spec.model {
        Model::TwoMass { m1, m2 } => {
            let tm = TwoMass::new(m1, m2, e)?;
            let op = assemble_two_mass(&meshes[0], &tm)?;
            matrix = op.mat;
        }
        Model::Dirac { m } => {
            let rs = resolvent_spec(spec);
            let coef = preconditioner_coef(spec);
            let two = meshes.len() == 2;
            let res: Vec<Resolvent> = meshes.iter().map(|mm| Resolvent::on_i1(mm, rs)).collect::<Result<_>>()?;
            for l in 0..meshes.len() {
                // row block ℓ: 𝓛_ℓ𝒫_ℓ on the diagonal, 𝒦_j𝒫_j off it
                let sign = if two && l == 0 { -1.0 } else { 1.0 };
                let lop = assemble_l(&meshes[l], m, e, sign)?;
                let mut block = Mat::<C64>::zeros(2 * n1[l], size);
                for j in 0..meshes.len() {
                    let c = if j == l {
                        lop.mat.clone()
                    } else {
                        assemble_k(&meshes[l], &meshes[j], m, e, j + 1)?.mat
                    };
                    let mask = preconditioner_mask(spec, j);
                    add_identity_part(&mut block, offsets[j], &c, &meshes[j]);
                    add_resolvent_product(&mut block, offsets[j], &c, &mask, coef, &res[j], Half::Full);
                }
                for r in 0..2 * n1[l] {
                    for c in 0..size {
                        matrix[(offsets[l] + r, c)] = block[(r, c)];
                    }
                }
            }
        }
    }
    for k in 0..meshes.len() {
        rhs.extend(assemble_rhs(spec, &meshes, k)?);
    }
    Ok(LinearSystem { spec: spec.clone(), meshes, matrix, rhs, offsets })
}
