//! Truncation windows, piecewise-Legendre panel meshes and near-singular rules.

use std::collections::HashMap;
use std::ops::Range;
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};
use crate::geometry::{cobmat_v_unchecked, Curve, CurvePoint};
use crate::quad::{gauss_legendre, graded_rule, log_product_weights, GaussLegendre};
use crate::spinor::Mat2;

/// I₁ ⊂ I₂ arclength windows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationWindows {
    pub i1: (f64, f64),
    pub i2: (f64, f64),
    pub buffer: f64,
}

impl TruncationWindows {
    pub fn new(i1: (f64, f64), buffer: f64) -> Self {
        Self { i1, i2: (i1.0 - buffer, i1.1 + buffer), buffer }
    }

    pub fn with_buffer(&self, buffer: f64) -> Self {
        Self::new(self.i1, buffer)
    }
}

/// Nearest curve parameter to x (searching [a, b]) and the distance.
pub fn project_to_curve(curve: &Curve, x: [f64; 2], a: f64, b: f64) -> Result<(f64, f64)> {
    let n = 2000usize;
    let dist = |s: f64| -> Result<f64> {
        let p = curve.eval(s)?.point;
        Ok((p[0] - x[0]).hypot(p[1] - x[1]))
    };
    let mut best = (a, f64::INFINITY);
    for i in 0..=n {
        let s = a + (b - a) * i as f64 / n as f64;
        let d = dist(s)?;
        if d < best.1 {
            best = (s, d);
        }
    }
    let h = (b - a) / n as f64;
    let (mut lo, mut hi) = ((best.0 - h).max(a), (best.0 + h).min(b));
    for _ in 0..80 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if dist(m1)? < dist(m2)? {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let s = 0.5 * (lo + hi);
    Ok((s, dist(s)?))
}

/// Chooses I₁ to cover the source footprints and the curved part, padded by
/// log(1/tol)/ω, and I₂ = I₁ ± buffer.
pub fn truncation_intervals(
    curve: &Curve,
    sources: &[[f64; 2]],
    omega: f64,
    e: f64,
    tol: f64,
) -> Result<TruncationWindows> {
    truncation_intervals_with_margin(curve, sources, omega, e, tol, 0.0)
}

/// As [`truncation_intervals`], with I₁ additionally widened by `extra` on each side.
pub fn truncation_intervals_with_margin(
    curve: &Curve,
    sources: &[[f64; 2]],
    omega: f64,
    e: f64,
    tol: f64,
    extra: f64,
) -> Result<TruncationWindows> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Validation(format!("tol must lie in (0,1), got {tol}")));
    }
    if !(omega > 0.0) || !(e.abs() > 0.0) {
        return Err(Error::Validation("need ω > 0 and E ≠ 0".into()));
    }
    let (w0, w1) = curve.window();
    let ft = curve.flat_tails;
    let mut lo = ft.t_left.min(ft.t_right);
    let mut hi = ft.t_left.max(ft.t_right);
    let search = (lo - 200.0).max(w0 + 1.0)..(hi + 200.0).min(w1 - 1.0);
    for &x in sources {
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::Validation("source location not finite".into()));
        }
        // coarse search widened until the footprint is interior
        let mut a = search.start;
        let mut b = search.end;
        let (s, d) = loop {
            let (s, d) = project_to_curve(curve, x, a, b)?;
            if (s - a) > 1.0 && (b - s) > 1.0 {
                break (s, d);
            }
            if b - a > 0.9 * (w1 - w0) {
                return Err(Error::Validation("source too far from the interface window".into()));
            }
            a = (a - (b - a)).max(w0 + 1.0);
            b = (b + (b - a)).min(w1 - 1.0);
        };
        lo = lo.min(s - d);
        hi = hi.max(s + d);
    }
    let pad = (1.0 / tol).ln() / omega + extra;
    let i1 = (lo - pad, hi + pad);
    // chord-arc constant between buffer points and I₁
    let l = (1.0 / tol).ln() / omega;
    let mut c = 1.0f64;
    let probes: Vec<f64> = (1..=4).flat_map(|k| [i1.0 - l * k as f64, i1.1 + l * k as f64]).collect();
    for &s in &probes {
        if s <= w0 || s >= w1 {
            continue;
        }
        let p = curve.eval(s)?.point;
        for i in 0..=200 {
            let t = i1.0 + (i1.1 - i1.0) * i as f64 / 200.0;
            let q = curve.eval(t)?.point;
            c = c.min((p[0] - q[0]).hypot(p[1] - q[1]) / (s - t).abs());
        }
    }
    let buffer = (l / c.max(1e-3)).max(4.0 / e.abs());
    let w = TruncationWindows::new(i1, buffer);
    if w.i2.0 <= w0 || w.i2.1 >= w1 {
        return Err(Error::Validation("truncation window exceeds the curve window".into()));
    }
    Ok(w)
}

/// One Legendre panel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    /// Index of the first node.
    pub start: usize,
}

impl Panel {
    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    pub fn is_empty(&self) -> bool {
        self.b <= self.a
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn to_local(&self, s: f64) -> f64 {
        (s - self.center()) / (0.5 * self.len())
    }

    pub fn to_global(&self, x: f64) -> f64 {
        self.center() + 0.5 * self.len() * x
    }
}

/// Mesh construction options.
#[derive(Clone, Debug)]
pub struct MeshOptions {
    pub order: usize,
    pub max_panel: f64,
    /// Energy for the nodes-per-wavelength rule.
    pub energy: Option<f64>,
    pub nodes_per_wavelength: f64,
    pub geom_tol: f64,
    pub max_panels: usize,
    /// Panels are split while longer than this multiple of the distance to
    /// non-adjacent parts of the same curve (and of other meshes).
    pub proximity_ratio: f64,
}

impl MeshOptions {
    pub fn new(order: usize, max_panel: f64) -> Self {
        Self {
            order,
            max_panel,
            energy: None,
            nodes_per_wavelength: 10.0,
            geom_tol: 1e-12,
            max_panels: 20_000,
            proximity_ratio: 1.0,
        }
    }

    pub fn with_energy(mut self, e: f64) -> Self {
        self.energy = Some(e);
        self
    }
}

/// Piecewise-Legendre discretization of a truncated interface.
#[derive(Clone, Debug)]
pub struct PanelMesh {
    pub curve: Arc<Curve>,
    pub order: usize,
    pub panels: Vec<Panel>,
    pub windows: TruncationWindows,
    /// Node arclengths, weights and geometry.
    pub s: Vec<f64>,
    pub w: Vec<f64>,
    pub points: Vec<[f64; 2]>,
    pub tangents: Vec<[f64; 2]>,
    pub normals: Vec<[f64; 2]>,
    pub speeds: Vec<f64>,
    pub curvature: Vec<f64>,
    /// Panels lying in I₁ (contiguous).
    pub i1_panels: Range<usize>,
}

impl PanelMesh {
    pub fn total_nodes(&self) -> usize {
        self.s.len()
    }

    pub fn i1_nodes(&self) -> Range<usize> {
        self.i1_panels.start * self.order..self.i1_panels.end * self.order
    }

    pub fn n1(&self) -> usize {
        self.i1_nodes().len()
    }

    pub fn gl(&self) -> Arc<GaussLegendre> {
        gauss_legendre(self.order)
    }

    pub fn panel_of_node(&self, i: usize) -> usize {
        i / self.order
    }

    pub fn v(&self, i: usize) -> Mat2 {
        cobmat_v_unchecked(self.normals[i])
    }

    /// Panel containing arclength s (clamped to the mesh).
    pub fn panel_at(&self, s: f64) -> usize {
        let k = self.panels.partition_point(|p| p.b < s);
        k.min(self.panels.len() - 1)
    }

    pub fn from_breakpoints(
        curve: Arc<Curve>,
        breaks: &[f64],
        order: usize,
        windows: TruncationWindows,
    ) -> Result<Self> {
        let gl = gauss_legendre(order);
        let np = breaks.len() - 1;
        let mut panels = Vec::with_capacity(np);
        let n = np * order;
        let mut mesh = Self {
            curve: curve.clone(),
            order,
            panels: vec![],
            windows,
            s: Vec::with_capacity(n),
            w: Vec::with_capacity(n),
            points: Vec::with_capacity(n),
            tangents: Vec::with_capacity(n),
            normals: Vec::with_capacity(n),
            speeds: Vec::with_capacity(n),
            curvature: Vec::with_capacity(n),
            i1_panels: 0..0,
        };
        let (mut i1a, mut i1b) = (usize::MAX, 0);
        let tol = 1e-9 * (1.0 + windows.i1.0.abs().max(windows.i1.1.abs()));
        for k in 0..np {
            let (a, b) = (breaks[k], breaks[k + 1]);
            panels.push(Panel { a, b, start: k * order });
            if a >= windows.i1.0 - tol && b <= windows.i1.1 + tol {
                i1a = i1a.min(k);
                i1b = i1b.max(k + 1);
            }
            let h = 0.5 * (b - a);
            for (&x, &wq) in gl.nodes.iter().zip(&gl.weights) {
                let s = 0.5 * (a + b) + h * x;
                let f: CurvePoint = curve.eval(s)?;
                mesh.s.push(s);
                mesh.w.push(h * wq * f.speed);
                mesh.points.push(f.point);
                mesh.tangents.push(f.tangent);
                mesh.normals.push(f.normal);
                mesh.speeds.push(f.speed);
                mesh.curvature.push(f.curvature);
            }
        }
        if i1a == usize::MAX {
            return Err(Error::Validation("I₁ contains no panel".into()));
        }
        mesh.panels = panels;
        mesh.i1_panels = i1a..i1b;
        Ok(mesh)
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.panels.iter().map(|p| p.a).collect();
        b.push(self.panels.last().unwrap().b);
        b
    }

    /// Interpolated geometry (point, unit tangent) at local coordinate x of a panel.
    pub fn interp_geometry(&self, panel: usize, x: f64, basis: &mut [f64]) -> ([f64; 2], [f64; 2]) {
        let gl = self.gl();
        gl.lagrange(x, basis);
        let st = self.panels[panel].start;
        let (mut p, mut t) = ([0.0; 2], [0.0; 2]);
        for j in 0..self.order {
            let l = basis[j];
            p[0] += l * self.points[st + j][0];
            p[1] += l * self.points[st + j][1];
            t[0] += l * self.tangents[st + j][0];
            t[1] += l * self.tangents[st + j][1];
        }
        let tn = t[0].hypot(t[1]);
        (p, [t[0] / tn, t[1] / tn])
    }

    /// Max interpolation error of γ at off-node check points of each panel.
    pub fn geometry_errors(&self) -> Result<Vec<f64>> {
        let gl = self.gl();
        let mut basis = vec![0.0; self.order];
        let mut out = vec![];
        for (k, pan) in self.panels.iter().enumerate() {
            let mut err = 0.0f64;
            let mut checks: Vec<f64> = gl.nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
            checks.push(-1.0);
            checks.push(1.0);
            for &x in &checks {
                let (p, _) = self.interp_geometry(k, x, &mut basis);
                let q = self.curve.eval(pan.to_global(x))?.point;
                err = err.max((p[0] - q[0]).hypot(p[1] - q[1]));
            }
            out.push(err);
        }
        Ok(out)
    }

    /// Weighted sum Σ wᵢ over a node range.
    pub fn length(&self) -> f64 {
        self.w.iter().sum()
    }
}

fn initial_breaks(windows: &TruncationWindows, max_panel: f64) -> Vec<f64> {
    let mut b = vec![];
    let segs = [
        (windows.i2.0, windows.i1.0),
        (windows.i1.0, windows.i1.1),
        (windows.i1.1, windows.i2.1),
    ];
    for (k, &(lo, hi)) in segs.iter().enumerate() {
        let len = hi - lo;
        if len <= 0.0 {
            if k == 1 {
                b.push(lo);
            }
            continue;
        }
        let n = (len / max_panel - 1e-9).ceil().max(1.0) as usize;
        for i in 0..n {
            b.push(lo + len * i as f64 / n as f64);
        }
    }
    b.push(windows.i2.1);
    b.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    b
}

fn bisect(breaks: &[f64], split: &[bool]) -> Vec<f64> {
    let mut out = Vec::with_capacity(breaks.len() * 2);
    for k in 0..breaks.len() - 1 {
        out.push(breaks[k]);
        if split[k] {
            out.push(0.5 * (breaks[k] + breaks[k + 1]));
        }
    }
    out.push(*breaks.last().unwrap());
    out
}

/// Splits panels until adjacent length ratios are at most 2.
fn balance(mut breaks: Vec<f64>) -> Vec<f64> {
    loop {
        let n = breaks.len() - 1;
        let len: Vec<f64> = (0..n).map(|k| breaks[k + 1] - breaks[k]).collect();
        let mut split = vec![false; n];
        let mut any = false;
        for k in 0..n {
            let left = if k > 0 { len[k - 1] } else { f64::INFINITY };
            let right = if k + 1 < n { len[k + 1] } else { f64::INFINITY };
            if len[k] > 2.0 * left.min(right) * (1.0 + 1e-9) {
                split[k] = true;
                any = true;
            }
        }
        if !any {
            return breaks;
        }
        breaks = bisect(&breaks, &split);
    }
}

/// Builds a mesh of I₂ aligned with I₁ and refined until it resolves the curve.
pub fn build_mesh(curve: Arc<Curve>, windows: TruncationWindows, opts: &MeshOptions) -> Result<PanelMesh> {
    if !(4..=32).contains(&opts.order) {
        return Err(Error::Validation(format!("order must lie in [4, 32], got {}", opts.order)));
    }
    if !(opts.max_panel > 0.0) {
        return Err(Error::Validation("max_panel must be positive".into()));
    }
    let mut hmax = opts.max_panel;
    if let Some(e) = opts.energy {
        let lambda = 2.0 * std::f64::consts::PI / e.abs();
        hmax = hmax.min(opts.order as f64 * lambda / opts.nodes_per_wavelength);
    }
    let mut breaks = initial_breaks(&windows, hmax);
    for _ in 0..60 {
        if breaks.len() - 1 > opts.max_panels {
            return Err(Error::Resource(format!(
                "panel count {} exceeds cap {}",
                breaks.len() - 1,
                opts.max_panels
            )));
        }
        let mesh = PanelMesh::from_breakpoints(curve.clone(), &breaks, opts.order, windows)?;
        let errs = mesh.geometry_errors()?;
        let mut split: Vec<bool> = errs
            .iter()
            .zip(&mesh.panels)
            .map(|(&e, p)| e > opts.geom_tol * p.len().max(1.0))
            .collect();
        let prox = self_proximity(&mesh);
        for (k, d) in prox.iter().enumerate() {
            if mesh.panels[k].len() > opts.proximity_ratio * d {
                split[k] = true;
            }
        }
        if !split.iter().any(|&b| b) {
            let balanced = balance(breaks.clone());
            if balanced.len() == breaks.len() {
                return Ok(mesh);
            }
            breaks = balanced;
            continue;
        }
        breaks = balance(bisect(&breaks, &split));
    }
    Err(Error::Numerical("mesh refinement did not terminate".into()))
}

/// Distance from each panel to the non-neighbouring parts of its own curve.
fn self_proximity(mesh: &PanelMesh) -> Vec<f64> {
    let np = mesh.panels.len();
    let mut out = vec![f64::INFINITY; np];
    // bounding circles of panels
    let circ: Vec<([f64; 2], f64)> = (0..np)
        .map(|k| {
            let st = mesh.panels[k].start;
            let pts = &mesh.points[st..st + mesh.order];
            let c = pts[mesh.order / 2];
            let r = pts.iter().map(|p| (p[0] - c[0]).hypot(p[1] - c[1])).fold(0.0, f64::max);
            (c, r + 0.5 * mesh.panels[k].len() / mesh.order as f64)
        })
        .collect();
    for k in 0..np {
        let pk = mesh.panels[k];
        for j in 0..np {
            let pj = mesh.panels[j];
            // skip panels close in arclength
            let gap = (pj.a - pk.b).max(pk.a - pj.b);
            if gap < 1.5 * pk.len().max(pj.len()) {
                continue;
            }
            let (ck, rk) = circ[k];
            let (cj, rj) = circ[j];
            let d = (ck[0] - cj[0]).hypot(ck[1] - cj[1]) - rk - rj;
            if d < out[k] {
                out[k] = d.max(0.0);
            }
        }
    }
    out
}

/// Co-refines meshes of distinct curves so that panels are no longer than
/// `ratio` times their distance to the other curves.
pub fn refine_for_separation(meshes: &mut [PanelMesh], opts: &MeshOptions) -> Result<()> {
    for _ in 0..60 {
        let mut changed = false;
        let snapshot: Vec<PanelMesh> = meshes.to_vec();
        for (a, mesh) in meshes.iter_mut().enumerate() {
            let np = mesh.panels.len();
            let mut split = vec![false; np];
            for k in 0..np {
                let st = mesh.panels[k].start;
                let pts = &mesh.points[st..st + mesh.order];
                let mut d = f64::INFINITY;
                for (b, other) in snapshot.iter().enumerate() {
                    if a == b {
                        continue;
                    }
                    for q in &other.points {
                        for p in pts {
                            d = d.min((p[0] - q[0]).hypot(p[1] - q[1]));
                        }
                    }
                }
                if mesh.panels[k].len() > opts.proximity_ratio * d {
                    split[k] = true;
                }
            }
            if split.iter().any(|&b| b) {
                changed = true;
                let breaks = balance(bisect(&mesh.breakpoints(), &split));
                if breaks.len() - 1 > opts.max_panels {
                    return Err(Error::Resource("panel cap exceeded during separation refinement".into()));
                }
                *mesh = PanelMesh::from_breakpoints(mesh.curve.clone(), &breaks, mesh.order, mesh.windows)?;
            }
        }
        if !changed {
            return Ok(());
        }
    }
    Err(Error::Numerical("separation refinement did not terminate".into()))
}

type LogKey = (usize, u64);

fn log_cache() -> &'static RwLock<HashMap<LogKey, Arc<Vec<f64>>>> {
    static CACHE: OnceLock<RwLock<HashMap<LogKey, Arc<Vec<f64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Cached product weights λⱼ(x₀) on [−1, 1] for ∫ f log|x − x₀|.
pub fn cached_log_weights(order: usize, x0: f64) -> Arc<Vec<f64>> {
    let key = (order, x0.to_bits());
    if let Some(v) = log_cache().read().unwrap().get(&key) {
        return v.clone();
    }
    let v = Arc::new(log_product_weights(&gauss_legendre(order), x0));
    log_cache().write().unwrap().insert(key, v.clone());
    v
}

/// Physical product weights Wⱼ with ∫_panel f(s) log|s − s₀| ds ≈ Σ Wⱼ f(sⱼ).
pub fn panel_log_weights(panel: &Panel, order: usize, s0: f64) -> Vec<f64> {
    let h = 0.5 * panel.len();
    let x0 = panel.to_local(s0);
    let lam = cached_log_weights(order, x0);
    let gl = gauss_legendre(order);
    (0..order).map(|j| h * (h.ln() * gl.weights[j] + lam[j])).collect()
}

/// Auxiliary-node rule for one (target, source panel) pair, exact to
/// quadrature precision for p(t) + q(t)·log|t − t₀| integrands.
#[derive(Clone, Debug)]
pub struct NearQuadRule {
    pub target: usize,
    pub panel: usize,
    /// Auxiliary nodes (arclength) and weights.
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Lagrange basis of the panel at each auxiliary node (row-major, aux × order).
    pub interp: Vec<f64>,
    /// Interpolated geometry at the auxiliary nodes.
    pub points: Vec<[f64; 2]>,
    pub normals: Vec<[f64; 2]>,
}

impl NearQuadRule {
    /// Collapses a kernel sampled at the auxiliary nodes to per-node weights.
    pub fn node_weights(&self, order: usize, kernel: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut out = vec![0.0; order];
        for (a, (&s, &w)) in self.nodes.iter().zip(&self.weights).enumerate() {
            let kw = w * kernel(s);
            for j in 0..order {
                out[j] += kw * self.interp[a * order + j];
            }
        }
        out
    }
}

/// Graded rule toward the target's arclength on a source panel.
pub fn near_rule(mesh: &PanelMesh, target: usize, source_panel: usize) -> NearQuadRule {
    let pan = mesh.panels[source_panel];
    let x0 = pan.to_local(mesh.s[target]);
    graded_panel_rule(mesh, source_panel, x0, 0.0, target)
}

/// Graded rule on a panel toward local coordinate x0 with complex offset delta (local units).
pub fn graded_panel_rule(mesh: &PanelMesh, panel: usize, x0: f64, delta: f64, target: usize) -> NearQuadRule {
    let pan = mesh.panels[panel];
    let rule = graded_rule(-1.0, 1.0, x0, delta, 20);
    let gl = mesh.gl();
    let h = 0.5 * pan.len();
    let p = mesh.order;
    let na = rule.nodes.len();
    let mut interp = vec![0.0; na * p];
    let mut points = Vec::with_capacity(na);
    let mut normals = Vec::with_capacity(na);
    let mut weights = Vec::with_capacity(na);
    for (a, &x) in rule.nodes.iter().enumerate() {
        let row = &mut interp[a * p..(a + 1) * p];
        gl.lagrange(x, row);
        let (mut y, mut t, mut sp) = ([0.0; 2], [0.0; 2], 0.0);
        for j in 0..p {
            let k = pan.start + j;
            y[0] += row[j] * mesh.points[k][0];
            y[1] += row[j] * mesh.points[k][1];
            t[0] += row[j] * mesh.tangents[k][0];
            t[1] += row[j] * mesh.tangents[k][1];
            sp += row[j] * mesh.speeds[k];
        }
        let tn = t[0].hypot(t[1]);
        points.push(y);
        normals.push([-t[1] / tn, t[0] / tn]);
        weights.push(rule.weights[a] * h * sp);
    }
    NearQuadRule {
        target,
        panel,
        nodes: rule.nodes.iter().map(|&x| pan.to_global(x)).collect(),
        weights,
        interp,
        points,
        normals,
    }
}

/// Closest local coordinate on a panel (via interpolated geometry) and the distance.
pub fn closest_on_panel(mesh: &PanelMesh, panel: usize, x: [f64; 2]) -> (f64, f64) {
    let mut basis = vec![0.0; mesh.order];
    let mut d2 = |t: f64| {
        let (p, _) = mesh.interp_geometry(panel, t, &mut basis);
        (p[0] - x[0]).powi(2) + (p[1] - x[1]).powi(2)
    };
    let n = 48;
    let mut best = (-1.0, f64::INFINITY);
    for i in 0..=n {
        let t = -1.0 + 2.0 * i as f64 / n as f64;
        let v = d2(t);
        if v < best.1 {
            best = (t, v);
        }
    }
    let h = 2.0 / n as f64;
    let (mut lo, mut hi) = ((best.0 - h).max(-1.0), (best.0 + h).min(1.0));
    for _ in 0..60 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if d2(m1) < d2(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let t = 0.5 * (lo + hi);
    (t, d2(t).sqrt())
}

/// Graded rule on a panel toward the projection of an arbitrary point x.
pub fn near_rule_at_point(mesh: &PanelMesh, panel: usize, x: [f64; 2]) -> NearQuadRule {
    let (x0, d) = closest_on_panel(mesh, panel, x);
    let h = 0.5 * mesh.panels[panel].len();
    graded_panel_rule(mesh, panel, x0, d / h, usize::MAX)
}

/// Minimum distance from x to the nodes of a panel (cheap near-field test).
pub fn panel_node_distance(mesh: &PanelMesh, panel: usize, x: [f64; 2]) -> f64 {
    let st = mesh.panels[panel].start;
    mesh.points[st..st + mesh.order]
        .iter()
        .map(|p| (p[0] - x[0]).hypot(p[1] - x[1]))
        .fold(f64::INFINITY, f64::min)
}

/// Mesh summary for logs and metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshStats {
    pub panels: usize,
    pub nodes: usize,
    pub i1_nodes: usize,
    pub i1: (f64, f64),
    pub i2: (f64, f64),
    pub min_panel: f64,
    pub max_panel: f64,
}

impl PanelMesh {
    pub fn stats(&self) -> MeshStats {
        let lens = self.panels.iter().map(|p| p.len());
        MeshStats {
            panels: self.panels.len(),
            nodes: self.total_nodes(),
            i1_nodes: self.n1(),
            i1: self.windows.i1,
            i2: self.windows.i2,
            min_panel: lens.clone().fold(f64::INFINITY, f64::min),
            max_panel: lens.fold(0.0, f64::max),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{curve_catalog, Params};

    #[test]
    fn flat_mesh_counts() {
        let c = Arc::new(curve_catalog("flat", &Params::new()).unwrap());
        let w = TruncationWindows { i1: (-4.0, 4.0), i2: (-10.0, 10.0), buffer: 6.0 };
        let m = build_mesh(c, w, &MeshOptions::new(16, 2.0)).unwrap();
        assert_eq!(m.panels.len(), 10);
        assert_eq!(m.total_nodes(), 160);
        assert_eq!(m.n1(), 64);
        for p in &m.panels {
            let st = p.start;
            let sw: f64 = m.w[st..st + 16].iter().sum();
            assert!((sw - p.len()).abs() < 1e-12);
        }
    }

    #[test]
    fn windows_for_flat_source() {
        let c = curve_catalog("flat", &Params::new()).unwrap();
        let omega = 0.75f64.sqrt();
        let w = truncation_intervals(&c, &[[0.0, 2.0]], omega, 0.5, 1e-10).unwrap();
        let half = 2.0 + (1e10f64).ln() / omega;
        assert!(w.i1.1 >= half - 1e-6 && w.i1.0 <= -half + 1e-6);
        assert!((w.i1.0 + w.i1.1).abs() < 1e-6);
        assert!(w.i2.0 < w.i1.0 && w.i2.1 > w.i1.1);
    }

    #[test]
    fn order_and_panel_validation() {
        let c = Arc::new(curve_catalog("flat", &Params::new()).unwrap());
        let w = TruncationWindows::new((-4.0, 4.0), 6.0);
        assert!(build_mesh(c.clone(), w, &MeshOptions::new(3, 2.0)).is_err());
        let mut o = MeshOptions::new(8, 0.01);
        o.max_panels = 100;
        assert!(matches!(build_mesh(c, w, &o), Err(Error::Resource(_))));
    }
}
