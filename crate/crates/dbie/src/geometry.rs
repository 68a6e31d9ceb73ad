//! Interfaces Γ: smooth, asymptotically flat curves with arclength
//! parameterization, the rotation matrix V, and the curve catalog.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, GaussLegendre};
use crate::spinor::{dot_sigma, Mat2, C64, I, SIGMA3};

/// Frame data at one curve parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub point: [f64; 2],
    /// Unit tangent.
    pub tangent: [f64; 2],
    /// Unit normal, (tangent, normal) positively oriented, pointing into the upper region.
    pub normal: [f64; 2],
    /// |γ′| in the curve's own parameter.
    pub speed: f64,
    /// Signed curvature (positive for left turns).
    pub curvature: f64,
}

/// Graph families y = f(x) with analytic derivatives.
#[derive(Clone, Debug, PartialEq)]
pub enum GraphFn {
    GaussianBumpSum { amps: Vec<f64>, centers: Vec<f64>, widths: Vec<f64> },
    SinePacket { amp: f64, k: f64, center: f64, width: f64 },
    Hyperbola { a: f64, d: f64, sign: f64 },
    TanhPair { a: f64, b: f64, d: f64, upper: bool },
}

impl GraphFn {
    /// (f, f′, f″) at x.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        match self {
            GraphFn::GaussianBumpSum { amps, centers, widths } => {
                let (mut f, mut f1, mut f2) = (0.0, 0.0, 0.0);
                for ((&a, &c), &w) in amps.iter().zip(centers).zip(widths) {
                    let z = (x - c) / w;
                    let e = a * (-0.5 * z * z).exp();
                    f += e;
                    f1 += -z / w * e;
                    f2 += (z * z - 1.0) / (w * w) * e;
                }
                (f, f1, f2)
            }
            GraphFn::SinePacket { amp, k, center, width } => {
                let y = x - center;
                let g = (-0.5 * y * y / (width * width)).exp();
                let g1 = -y / (width * width) * g;
                let g2 = (y * y / width.powi(4) - 1.0 / (width * width)) * g;
                let (s, c) = (k * y).sin_cos();
                (
                    amp * s * g,
                    amp * (k * c * g + s * g1),
                    amp * (-k * k * s * g + 2.0 * k * c * g1 + s * g2),
                )
            }
            GraphFn::Hyperbola { a, d, sign } => {
                let q = (x * x + d * d).sqrt();
                (sign * a * q, sign * a * x / q, sign * a * d * d / (q * q * q))
            }
            GraphFn::TanhPair { a, b, d, upper } => {
                let z = x / b;
                let t = z.tanh();
                let sech2 = 1.0 - t * t;
                let f = a * x * t;
                let f1 = a * (t + z * sech2);
                let f2 = 2.0 * a / b * sech2 * (1.0 - z * t);
                if *upper {
                    (f, f1, f2)
                } else {
                    (-f - d, -f1, -f2)
                }
            }
        }
    }
}

/// Smoothed tangent-angle curve: piecewise-constant curvature (arcs and
/// segments) convolved with a logistic mollifier, mirror-symmetric about s = 0.
#[derive(Clone, Debug)]
pub struct TangentAngleCurve {
    /// (start, end, curvature) for s > 0; mirrored to s < 0.
    pieces: Vec<(f64, f64, f64)>,
    eps: f64,
    origin: [f64; 2],
    /// Positions at s = kΔ for s ∈ [0, s_end].
    table: Vec<[f64; 2]>,
    step: f64,
    s_end: f64,
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl TangentAngleCurve {
    fn new(pieces: Vec<(f64, f64, f64)>, eps: f64, x_center: f64) -> Self {
        let s_end = pieces.iter().map(|p| p.1).fold(0.0, f64::max) + 45.0 * eps;
        let mut c = Self {
            pieces,
            eps,
            origin: [0.0, 0.0],
            table: vec![],
            step: 0.25,
            s_end,
        };
        let n = (s_end / c.step).ceil() as usize;
        c.step = s_end / n as f64;
        let gl = gauss_legendre(24);
        let mut table = vec![[0.0, 0.0]];
        let mut p = [0.0, 0.0];
        for k in 0..n {
            let (a, b) = (k as f64 * c.step, (k + 1) as f64 * c.step);
            let (dx, dy) = c.integrate_unit(&gl, a, b);
            p = [p[0] + dx, p[1] + dy];
            table.push(p);
        }
        // baseline at y = 0, symmetry axis at x_center
        let y_end = table[n][1];
        c.origin = [x_center, -y_end];
        c.table = table;
        c
    }

    fn integrate_unit(&self, gl: &GaussLegendre, a: f64, b: f64) -> (f64, f64) {
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        let (mut x, mut y) = (0.0, 0.0);
        for (&t, &w) in gl.nodes.iter().zip(&gl.weights) {
            let th = self.theta(m + h * t);
            x += w * th.cos();
            y += w * th.sin();
        }
        (h * x, h * y)
    }

    fn all_pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.pieces
            .iter()
            .flat_map(|&(a, b, k)| [(a, b, k), (-b, -a, k)])
    }

    pub fn curvature(&self, s: f64) -> f64 {
        let e = self.eps;
        self.all_pieces()
            .map(|(a, b, k)| k * (logistic((s - a) / e) - logistic((s - b) / e)))
            .sum()
    }

    pub fn theta(&self, s: f64) -> f64 {
        let e = self.eps;
        self.all_pieces()
            .map(|(a, b, k)| {
                k * e
                    * (softplus((s - a) / e) - softplus((s - b) / e) - softplus(-a / e)
                        + softplus(-b / e))
            })
            .sum()
    }

    fn position(&self, s: f64) -> [f64; 2] {
        let sa = s.abs();
        let p = if sa >= self.s_end {
            let last = self.table[self.table.len() - 1];
            [last[0] + (sa - self.s_end), last[1]]
        } else {
            let k = ((sa / self.step).floor() as usize).min(self.table.len() - 2);
            let a = k as f64 * self.step;
            let gl = gauss_legendre(24);
            let (dx, dy) = self.integrate_unit(&gl, a, sa);
            [self.table[k][0] + dx, self.table[k][1] + dy]
        };
        let x = if s < 0.0 { -p[0] } else { p[0] };
        [self.origin[0] + x, self.origin[1] + p[1]]
    }

    /// Extent of the curved part in arclength.
    pub fn support(&self) -> f64 {
        self.pieces.iter().map(|p| p.1).fold(0.0, f64::max)
    }
}

/// Raw geometric description of an interface.
#[derive(Clone, Debug)]
pub enum Shape {
    /// γ(s) = origin + s·dir (already arclength).
    Line { origin: [f64; 2], dir: [f64; 2] },
    /// γ(x) = (x, f(x)).
    Graph(GraphFn),
    /// γ(u) = R(sin u, cos u), u ∈ (−π/2, π/2).
    Arc { radius: f64 },
    /// Arclength-native tangent-angle construction.
    TangentAngle(Arc<TangentAngleCurve>),
}

impl Shape {
    fn is_arclength(&self) -> bool {
        matches!(self, Shape::Line { .. } | Shape::TangentAngle(_))
    }

    pub fn raw_domain(&self) -> (f64, f64) {
        match self {
            Shape::Arc { .. } => (-0.5 * PI, 0.5 * PI),
            _ => (-RAW_EXTENT, RAW_EXTENT),
        }
    }

    /// Point, first and second derivative in the raw parameter.
    pub fn raw(&self, u: f64) -> ([f64; 2], [f64; 2], [f64; 2]) {
        match self {
            Shape::Line { origin, dir } => (
                [origin[0] + u * dir[0], origin[1] + u * dir[1]],
                *dir,
                [0.0, 0.0],
            ),
            Shape::Graph(g) => {
                let (f, f1, f2) = g.eval(u);
                ([u, f], [1.0, f1], [0.0, f2])
            }
            Shape::Arc { radius } => {
                let (s, c) = u.sin_cos();
                ([radius * s, radius * c], [radius * c, -radius * s], [-radius * s, -radius * c])
            }
            Shape::TangentAngle(t) => {
                let th = t.theta(u);
                let k = t.curvature(u);
                let (sn, cs) = th.sin_cos();
                (t.position(u), [cs, sn], [-k * sn, k * cs])
            }
        }
    }

    fn speed(&self, u: f64) -> f64 {
        match self {
            Shape::Graph(g) => g.eval(u).1.hypot(1.0),
            _ => {
                let (_, d1, _) = self.raw(u);
                d1[0].hypot(d1[1])
            }
        }
    }

    fn curvature(&self, u: f64) -> f64 {
        match self {
            Shape::Line { .. } => 0.0,
            Shape::TangentAngle(t) => t.curvature(u),
            Shape::Arc { radius } => -1.0 / radius,
            Shape::Graph(g) => {
                let (_, f1, f2) = g.eval(u);
                f2 / (1.0 + f1 * f1).powf(1.5)
            }
        }
    }
}

/// Half-width of the raw parameter window of non-periodic families.
pub const RAW_EXTENT: f64 = 2000.0;

/// Monotone table u ↔ s (arclength from u = 0).
#[derive(Clone, Debug)]
pub struct ArclengthTable {
    pub u: Vec<f64>,
    pub s: Vec<f64>,
}

impl ArclengthTable {
    fn build(shape: &Shape, tol: f64) -> Result<Self> {
        let (u0, u1) = shape.raw_domain();
        let gl = gauss_legendre(16);
        let seg = |a: f64, b: f64| gl.integrate(a, b, |u| shape.speed(u));
        // adaptive breakpoints on [0, u1] and [u0, 0]
        fn refine(
            seg: &dyn Fn(f64, f64) -> f64,
            a: f64,
            b: f64,
            tol: f64,
            depth: usize,
            out: &mut Vec<(f64, f64)>,
        ) {
            let m = 0.5 * (a + b);
            let whole = seg(a, b);
            let halves = seg(a, m) + seg(m, b);
            if (whole - halves).abs() <= tol * (b - a).max(1e-3) || depth > 40 {
                out.push((b, halves));
            } else {
                refine(seg, a, m, tol, depth + 1, out);
                refine(seg, m, b, tol, depth + 1, out);
            }
        }
        let init = 64usize;
        let mut right = vec![];
        for k in 0..init {
            let a = u1 * k as f64 / init as f64;
            let b = u1 * (k + 1) as f64 / init as f64;
            refine(&seg, a, b, tol, 0, &mut right);
        }
        let mut left = vec![];
        for k in 0..init {
            let a = u0 * k as f64 / init as f64;
            let b = u0 * (k + 1) as f64 / init as f64;
            // integrate from b (more negative) to a, record at b
            refine(&|x: f64, y: f64| seg(y, x), a, b, tol, 0, &mut left);
        }
        let mut us = vec![];
        let mut ss = vec![];
        let mut acc = 0.0;
        let mut lpts = vec![];
        for &(b, v) in &left {
            acc += v;
            lpts.push((b, acc));
        }
        for &(b, sacc) in lpts.iter().rev() {
            us.push(b);
            ss.push(-sacc);
        }
        us.push(0.0);
        ss.push(0.0);
        acc = 0.0;
        for &(b, v) in &right {
            acc += v;
            us.push(b);
            ss.push(acc);
        }
        for w in ss.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Numerical("arclength table not monotone".into()));
            }
        }
        Ok(Self { u: us, s: ss })
    }

    fn s_of_u(&self, shape: &Shape, u: f64) -> f64 {
        let k = match self.u.partition_point(|&x| x <= u) {
            0 => 0,
            k => (k - 1).min(self.u.len() - 2),
        };
        let gl = gauss_legendre(16);
        self.s[k] + gl.integrate(self.u[k], u, |v| shape.speed(v))
    }

    fn u_of_s(&self, shape: &Shape, s: f64, tol: f64) -> Result<f64> {
        let n = self.s.len();
        if s < self.s[0] || s > self.s[n - 1] {
            return Err(Error::Domain(format!(
                "arclength {s} outside [{}, {}]",
                self.s[0],
                self.s[n - 1]
            )));
        }
        let k = match self.s.partition_point(|&x| x <= s) {
            0 => 0,
            k => (k - 1).min(n - 2),
        };
        let (u0, u1, s0, s1) = (self.u[k], self.u[k + 1], self.s[k], self.s[k + 1]);
        // monotone cubic Hermite seed using du/ds = 1/speed at the ends
        let h = s1 - s0;
        let z = (s - s0) / h;
        let (d0, d1) = (h / shape.speed(u0), h / shape.speed(u1));
        let secant = u1 - u0;
        let (d0, d1) = (d0.min(3.0 * secant), d1.min(3.0 * secant));
        let (z2, z3) = (z * z, z * z * z);
        let mut u = (2.0 * z3 - 3.0 * z2 + 1.0) * u0
            + (z3 - 2.0 * z2 + z) * d0
            + (-2.0 * z3 + 3.0 * z2) * u1
            + (z3 - z2) * d1;
        u = u.clamp(u0, u1);
        let gl = gauss_legendre(16);
        let mut resid = f64::INFINITY;
        for _ in 0..50 {
            let f = s0 + gl.integrate(u0, u, |v| shape.speed(v)) - s;
            resid = f.abs();
            let du = f / shape.speed(u);
            u = (u - du).clamp(u0, u1);
            if du.abs() <= 1e-15 * (1.0 + u.abs()) {
                break;
            }
        }
        if resid > tol * (1.0 + s.abs()) {
            return Err(Error::Numerical(format!(
                "arclength inversion did not converge at s={s}: residual {resid:e}"
            )));
        }
        Ok(u)
    }
}

/// Straight-tail metadata.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlatTails {
    pub t_left: f64,
    pub t_right: f64,
    pub angle_left: f64,
    pub angle_right: f64,
}

/// A smooth interface Γ.
#[derive(Clone, Debug)]
pub struct Curve {
    pub label: String,
    shape: Shape,
    table: Option<Arc<ArclengthTable>>,
    /// Representable window in the curve's own parameter.
    window: (f64, f64),
    pub flat_tails: FlatTails,
    pub flat_tol: f64,
}

impl Curve {
    /// Curve in its raw parameterization (speed not necessarily 1).
    pub fn from_shape(label: &str, shape: Shape, flat_tol: f64) -> Result<Self> {
        let window = if shape.is_arclength() {
            (-RAW_EXTENT, RAW_EXTENT)
        } else {
            shape.raw_domain()
        };
        let mut c = Self {
            label: label.to_string(),
            shape,
            table: None,
            window,
            flat_tails: FlatTails { t_left: 0.0, t_right: 0.0, angle_left: 0.0, angle_right: 0.0 },
            flat_tol,
        };
        c.flat_tails = c.detect_flat_tails();
        Ok(c)
    }

    pub fn is_arclength(&self) -> bool {
        self.table.is_some() || self.shape.is_arclength()
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    fn raw_frame(&self, u: f64) -> CurvePoint {
        let (p, d1, d2) = self.shape.raw(u);
        let speed = d1[0].hypot(d1[1]);
        let t = [d1[0] / speed, d1[1] / speed];
        let curvature = (d1[0] * d2[1] - d1[1] * d2[0]) / (speed * speed * speed);
        CurvePoint { point: p, tangent: t, normal: [-t[1], t[0]], speed, curvature }
    }

    /// Frame at parameter t (arclength after reparameterization).
    pub fn eval(&self, t: f64) -> Result<CurvePoint> {
        if !(t >= self.window.0 && t <= self.window.1) {
            return Err(Error::Domain(format!(
                "parameter {t} outside curve window [{}, {}]",
                self.window.0, self.window.1
            )));
        }
        match &self.table {
            None => Ok(self.raw_frame(t)),
            Some(tab) => {
                let u = tab.u_of_s(&self.shape, t, 1e-12)?;
                let mut f = self.raw_frame(u);
                f.speed = 1.0;
                Ok(f)
            }
        }
    }

    /// Raw parameter corresponding to t (identity for native curves).
    pub fn raw_param(&self, t: f64) -> Result<f64> {
        match &self.table {
            None => Ok(t),
            Some(tab) => tab.u_of_s(&self.shape, t, 1e-12),
        }
    }

    /// Parameter t at raw parameter u.
    pub fn param_of_raw(&self, u: f64) -> f64 {
        match &self.table {
            None => u,
            Some(tab) => tab.s_of_u(&self.shape, u),
        }
    }

    fn detect_flat_tails(&self) -> FlatTails {
        // scan a sinh-graded grid of the raw window from the outside in
        let (u0, u1) = self.shape.raw_domain();
        let n = 40_000usize;
        let grid = |i: usize, lo: f64, hi: f64| -> f64 {
            let alpha = 8.0;
            let z = i as f64 / n as f64;
            let w = (alpha * z).sinh() / alpha.sinh();
            if lo == 0.0 {
                hi * w
            } else {
                lo * w
            }
        };
        let big = |u: f64| self.shape.curvature(u).abs() >= self.flat_tol;
        let mut ur = 0.0;
        for i in (0..=n).rev() {
            let u = grid(i, 0.0, u1);
            if big(u) {
                ur = grid((i + 1).min(n), 0.0, u1);
                break;
            }
        }
        let mut ul = 0.0;
        for i in (0..=n).rev() {
            let u = grid(i, u0, 0.0);
            if big(u) {
                ul = grid((i + 1).min(n), u0, 0.0);
                break;
            }
        }
        let angle = |u: f64| {
            let f = self.raw_frame(u);
            f.tangent[1].atan2(f.tangent[0])
        };
        FlatTails {
            t_left: self.param_of_raw(ul),
            t_right: self.param_of_raw(ur),
            angle_left: angle(ul),
            angle_right: angle(ur),
        }
    }
}

/// Reparameterizes by arclength (s = 0 at raw parameter 0).
pub fn arclength_reparam(curve: &Curve, tol: f64) -> Result<Curve> {
    if curve.is_arclength() {
        return Ok(curve.clone());
    }
    let table = ArclengthTable::build(&curve.shape, tol.min(1e-13))?;
    let n = table.s.len();
    let window = (table.s[0], table.s[n - 1]);
    let mut c = curve.clone();
    c.table = Some(Arc::new(table));
    c.window = window;
    c.flat_tails = c.detect_flat_tails();
    Ok(c)
}

/// Frame-consistent evaluation (spec-level entry point).
pub fn curve_eval(curve: &Curve, t: f64) -> Result<([f64; 2], [f64; 2], [f64; 2], f64)> {
    let f = curve.eval(t)?;
    Ok((f.point, f.tangent, f.normal, f.speed))
}

/// V = (1/√2)[[1, i n₁+n₂], [−i n₁+n₂, −1]].
pub fn cobmat_v(normal: [f64; 2]) -> Result<Mat2> {
    let nn = normal[0].hypot(normal[1]);
    if (nn - 1.0).abs() > 1e-10 {
        return Err(Error::Precondition(format!("normal must be unit length, |n| = {nn}")));
    }
    Ok(cobmat_v_unchecked(normal))
}

#[inline]
pub fn cobmat_v_unchecked(n: [f64; 2]) -> Mat2 {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    Mat2::new(
        C64::new(r, 0.0),
        C64::new(r * n[1], r * n[0]),
        C64::new(r * n[1], -r * n[0]),
        C64::new(-r, 0.0),
    )
}

/// V*(i n̂·σ)σ₃, the left factor of the interface equations.
#[inline]
pub fn left_frame(n: [f64; 2]) -> Mat2 {
    cobmat_v_unchecked(n).adjoint() * dot_sigma(n).scale(I) * SIGMA3
}

/// Rotation frames at a list of normals.
#[derive(Clone, Debug)]
pub struct RotationFrame {
    pub v: Vec<Mat2>,
    pub normal: Vec<[f64; 2]>,
}

impl RotationFrame {
    pub fn new(normals: &[[f64; 2]]) -> Result<Self> {
        let v = normals.iter().map(|&n| cobmat_v(n)).collect::<Result<Vec<_>>>()?;
        Ok(Self { v, normal: normals.to_vec() })
    }
}

/// Parameters of a catalog family.
pub type Params = BTreeMap<String, f64>;

fn param(p: &Params, key: &str, default: f64) -> f64 {
    p.get(key).copied().unwrap_or(default)
}

fn param_list(p: &Params, prefix: &str) -> Vec<f64> {
    let mut out = vec![];
    for i in 0.. {
        match p.get(&format!("{prefix}{i}")) {
            Some(&v) => out.push(v),
            None => break,
        }
    }
    out
}

fn finite_params(p: &Params) -> Result<()> {
    for (k, v) in p {
        if !v.is_finite() {
            return Err(Error::Validation(format!("parameter {k} is not finite")));
        }
    }
    Ok(())
}

/// Line-with-circular-loop cavity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CavityParams {
    pub radius: f64,
    pub neck_width: f64,
    pub neck_length: f64,
    pub corner: f64,
    pub smooth: f64,
    pub center: f64,
}

impl CavityParams {
    pub fn from_params(p: &Params) -> Self {
        Self {
            radius: param(p, "radius", 3.0),
            neck_width: param(p, "neck_width", 1.0),
            neck_length: param(p, "neck_length", 1.0),
            corner: param(p, "corner", 0.5),
            smooth: param(p, "smooth", 0.1),
            center: param(p, "center", 0.0),
        }
    }

    pub fn build(&self) -> Result<TangentAngleCurve> {
        let CavityParams { radius: r, neck_width: w, neck_length: l, corner: rc, smooth: e, center } =
            *self;
        if !(r > 0.0 && w > 0.0 && l >= 0.0 && rc > 0.0 && e > 0.0) {
            return Err(Error::Validation("cavity parameters must be positive".into()));
        }
        let sin_phi = (0.5 * w + rc) / (r + rc);
        if !(sin_phi < 0.95) {
            return Err(Error::Validation(format!(
                "cavity self-intersects: neck width {w} too large for radius {r}"
            )));
        }
        if e > 0.25 * rc.min(r) {
            return Err(Error::Validation("cavity smoothing too large for its corners".into()));
        }
        let phi = sin_phi.asin();
        let mut pieces = vec![];
        let mut s = 0.0;
        let mut push = |len: f64, k: f64, s: &mut f64| {
            if len > 0.0 && k != 0.0 {
                pieces.push((*s, *s + len, k));
            }
            *s += len;
        };
        push(r * (PI - phi), -1.0 / r, &mut s);
        push(rc * (0.5 * PI - phi), 1.0 / rc, &mut s);
        push(l, 0.0, &mut s);
        push(rc * 0.5 * PI, 1.0 / rc, &mut s);
        Ok(TangentAngleCurve::new(pieces, e, center))
    }
}

/// Builds a catalog curve (arclength parameterized).
pub fn curve_catalog(name: &str, params: &Params) -> Result<Curve> {
    finite_params(params)?;
    let tol = 1e-14;
    let flat_tol = param(params, "flat_tol", 1e-12);
    let c = match name {
        "flat" | "shifted_flat" => {
            let shift = param(params, "shift", 0.0);
            let offset = param(params, "offset", 0.0);
            Curve::from_shape(name, Shape::Line { origin: [shift, offset], dir: [1.0, 0.0] }, flat_tol)?
        }
        "gaussian_bump_sum" => {
            let amps = param_list(params, "amp");
            let centers = param_list(params, "center");
            let widths = param_list(params, "width");
            if amps.len() != centers.len() || amps.len() != widths.len() {
                return Err(Error::Validation("gaussian_bump_sum needs ampK/centerK/widthK".into()));
            }
            if widths.iter().any(|&w| !(w > 0.0)) {
                return Err(Error::Validation("bump widths must be positive".into()));
            }
            let g = GraphFn::GaussianBumpSum { amps, centers, widths };
            arclength_reparam(&Curve::from_shape(name, Shape::Graph(g), flat_tol)?, tol)?
        }
        "sine_packet" => {
            let width = param(params, "width", 2.0);
            if !(width > 0.0) {
                return Err(Error::Validation("sine_packet width must be positive".into()));
            }
            let g = GraphFn::SinePacket {
                amp: param(params, "amp", 0.5),
                k: param(params, "k", 2.0),
                center: param(params, "center", 0.0),
                width,
            };
            arclength_reparam(&Curve::from_shape(name, Shape::Graph(g), flat_tol)?, tol)?
        }
        "circular_cavity" => {
            let cav = CavityParams::from_params(params).build()?;
            Curve::from_shape(name, Shape::TangentAngle(Arc::new(cav)), flat_tol)?
        }
        "circle_arc" => {
            let radius = param(params, "radius", 1.0);
            if !(radius > 0.0) {
                return Err(Error::Validation("radius must be positive".into()));
            }
            Curve::from_shape(name, Shape::Arc { radius }, flat_tol)?
        }
        _ => {
            return Err(Error::Validation(format!("unknown curve family '{name}'")));
        }
    };
    Ok(c)
}

/// Two-interface catalog: returns (Γ₁, Γ₂).
pub fn curve_pair_catalog(name: &str, params: &Params) -> Result<(Curve, Curve)> {
    finite_params(params)?;
    let tol = 1e-14;
    let d = param(params, "d", 0.5);
    if !(d > 0.0) {
        return Err(Error::Validation("separation d must be positive".into()));
    }
    match name {
        "wedge_pair" => {
            let a = match params.get("theta") {
                Some(&th) => {
                    if !(th > 0.0 && th < 0.5 * PI) {
                        return Err(Error::Validation("theta must lie in (0, π/2)".into()));
                    }
                    th.tan()
                }
                None => param(params, "a", 0.5),
            };
            if !(a > 0.0) {
                return Err(Error::Validation("wedge slope must be positive".into()));
            }
            // curvature decays only algebraically along this family
            let flat_tol = param(params, "flat_tol", 1e-6);
            let mk = |sign: f64, label: &str| -> Result<Curve> {
                let g = GraphFn::Hyperbola { a, d, sign };
                arclength_reparam(&Curve::from_shape(label, Shape::Graph(g), flat_tol)?, tol)
            };
            Ok((mk(-1.0, "wedge_pair_1")?, mk(1.0, "wedge_pair_2")?))
        }
        "tangent_pair" => {
            let a = param(params, "a", 0.5);
            let b = param(params, "b", 1.0);
            if !(a > 0.0 && b > 0.0) {
                return Err(Error::Validation("tangent_pair needs a, b > 0".into()));
            }
            let flat_tol = param(params, "flat_tol", 1e-12);
            let mk = |upper: bool, label: &str| -> Result<Curve> {
                let g = GraphFn::TanhPair { a, b, d, upper };
                arclength_reparam(&Curve::from_shape(label, Shape::Graph(g), flat_tol)?, tol)
            };
            Ok((mk(false, "tangent_pair_1")?, mk(true, "tangent_pair_2")?))
        }
        "parallel_lines" => {
            let flat_tol = param(params, "flat_tol", 1e-12);
            let l1 = Curve::from_shape(
                "parallel_1",
                Shape::Line { origin: [0.0, -0.5 * d], dir: [1.0, 0.0] },
                flat_tol,
            )?;
            let l2 = Curve::from_shape(
                "parallel_2",
                Shape::Line { origin: [0.0, 0.5 * d], dir: [1.0, 0.0] },
                flat_tol,
            )?;
            Ok((l1, l2))
        }
        _ => Err(Error::Validation(format!("unknown curve pair family '{name}'"))),
    }
}

/// Sampled geometry checks of the Curve invariants.
#[derive(Clone, Debug)]
pub struct CurveReport {
    pub max_speed_defect: f64,
    pub max_normal_defect: f64,
    pub min_orientation: f64,
    pub chord_arc: f64,
}

/// Checks orientation, unit speed and the chord-arc constant on n samples of [a, b].
pub fn check_curve(curve: &Curve, a: f64, b: f64, n: usize) -> Result<CurveReport> {
    let pts: Vec<CurvePoint> = (0..n)
        .map(|i| curve.eval(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect::<Result<_>>()?;
    let mut rep = CurveReport {
        max_speed_defect: 0.0,
        max_normal_defect: 0.0,
        min_orientation: f64::INFINITY,
        chord_arc: f64::INFINITY,
    };
    for p in &pts {
        rep.max_speed_defect = rep.max_speed_defect.max((p.speed - 1.0).abs());
        rep.max_normal_defect = rep.max_normal_defect.max((p.normal[0].hypot(p.normal[1]) - 1.0).abs());
        let cross = p.tangent[0] * p.normal[1] - p.tangent[1] * p.normal[0];
        rep.min_orientation = rep.min_orientation.min(cross);
    }
    // chord-arc over a strided subsample (O(k²))
    let stride = (n / 2000).max(1);
    let h = (b - a) / (n - 1) as f64;
    for i in (0..n).step_by(stride) {
        for j in ((i + stride)..n).step_by(stride) {
            let d = (pts[i].point[0] - pts[j].point[0]).hypot(pts[i].point[1] - pts[j].point[1]);
            rep.chord_arc = rep.chord_arc.min(d / ((j - i) as f64 * h));
        }
    }
    Ok(rep)
}

/// Minimum sampled distance between two curves over parameter windows.
pub fn min_separation(c1: &Curve, c2: &Curve, w1: (f64, f64), w2: (f64, f64), n: usize) -> Result<f64> {
    let sample = |c: &Curve, w: (f64, f64)| -> Result<Vec<[f64; 2]>> {
        (0..n)
            .map(|i| Ok(c.eval(w.0 + (w.1 - w.0) * i as f64 / (n - 1) as f64)?.point))
            .collect()
    };
    let (p1, p2) = (sample(c1, w1)?, sample(c2, w2)?);
    let mut m = f64::INFINITY;
    for a in &p1 {
        for b in &p2 {
            m = m.min((a[0] - b[0]).hypot(a[1] - b[1]));
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(kv: &[(&str, f64)]) -> Params {
        kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn flat_line_frame() {
        let c = curve_catalog("flat", &Params::new()).unwrap();
        let f = c.eval(3.0).unwrap();
        assert_eq!(f.point, [3.0, 0.0]);
        assert_eq!(f.normal, [0.0, 1.0]);
        let s = curve_catalog("shifted_flat", &p(&[("shift", -60.0)])).unwrap();
        assert_eq!(s.eval(60.0).unwrap().point, [0.0, 0.0]);
    }

    #[test]
    fn wedge_lower_branch_at_origin() {
        let (g1, g2) = curve_pair_catalog("wedge_pair", &p(&[("a", 0.5), ("d", 1.0)])).unwrap();
        let f = g1.eval(0.0).unwrap();
        assert!((f.point[0]).abs() < 1e-14 && (f.point[1] + 0.5).abs() < 1e-14);
        assert!((g2.eval(0.0).unwrap().point[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn v_examples() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let v = cobmat_v([0.0, 1.0]).unwrap();
        let want = Mat2::real_diag(r, -r) + Mat2::new(C64::new(0.0, 0.0), C64::new(r, 0.0), C64::new(r, 0.0), C64::new(0.0, 0.0));
        assert!((v - want).max_abs() < 1e-15);
        let v = cobmat_v([1.0, 0.0]).unwrap();
        let want = Mat2::new(C64::new(r, 0.0), C64::new(0.0, r), C64::new(0.0, -r), C64::new(-r, 0.0));
        assert!((v - want).max_abs() < 1e-15);
        assert!(cobmat_v([1.0, 1.0]).is_err());
    }

    #[test]
    fn unknown_family_rejected() {
        assert!(matches!(curve_catalog("spiral", &Params::new()), Err(Error::Validation(_))));
        assert!(curve_catalog("circular_cavity", &p(&[("radius", 1.0), ("neck_width", 3.0)])).is_err());
    }

    #[test]
    fn cavity_is_symmetric_and_flat_outside() {
        let c = curve_catalog("circular_cavity", &Params::new()).unwrap();
        let a = c.eval(7.3).unwrap().point;
        let b = c.eval(-7.3).unwrap().point;
        assert!((a[0] + b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
        let far = c.eval(60.0).unwrap();
        assert!(far.point[1].abs() < 1e-12);
        assert!(far.tangent[0] > 1.0 - 1e-14);
        assert!(c.flat_tails.t_right < 40.0 && c.flat_tails.t_left > -40.0);
    }
}
