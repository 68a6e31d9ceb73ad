//! Gauss–Legendre rules, Legendre interpolation, logarithmic product
//! integration and graded composite rules for near-singular integrands.

use std::sync::{Arc, OnceLock};

/// Gauss–Legendre rule on [−1, 1] with barycentric interpolation weights.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub bary: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_and_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_and_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        let bary = barycentric_weights(&nodes);
        Self { nodes, weights, bary }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Lagrange basis values ℓⱼ(x) at x ∈ ℝ (exact δ at nodes).
    pub fn lagrange(&self, x: f64, out: &mut [f64]) {
        lagrange_basis(&self.nodes, &self.bary, x, out);
    }

    /// Maps the rule to [a, b]: (nodes, weights).
    pub fn mapped(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        (
            self.nodes.iter().map(|&x| c + h * x).collect(),
            self.weights.iter().map(|&w| h * w).collect(),
        )
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(c + h * x))
            .sum::<f64>()
            * h
    }
}

/// Cached Gauss–Legendre rules for n ≤ 128.
pub fn gauss_legendre(n: usize) -> Arc<GaussLegendre> {
    const MAXN: usize = 128;
    static CACHE: OnceLock<Vec<OnceLock<Arc<GaussLegendre>>>> = OnceLock::new();
    if n > MAXN {
        return Arc::new(GaussLegendre::new(n));
    }
    let table = CACHE.get_or_init(|| (0..=MAXN).map(|_| OnceLock::new()).collect());
    table[n].get_or_init(|| Arc::new(GaussLegendre::new(n))).clone()
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
pub fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = if (1.0 - x * x).abs() > 0.0 {
        nf * (x * p1 - p0) / (x * x - 1.0)
    } else {
        0.5 * nf * (nf + 1.0) * x.powi(n as i32 + 1)
    };
    (p1, d)
}

/// P_0(x), …, P_{n−1}(x).
pub fn legendre_values(n: usize, x: f64, out: &mut [f64]) {
    if n == 0 {
        return;
    }
    out[0] = 1.0;
    if n > 1 {
        out[1] = x;
    }
    for k in 1..n.saturating_sub(1) {
        let kf = k as f64;
        out[k + 1] = ((2.0 * kf + 1.0) * x * out[k] - kf * out[k - 1]) / (kf + 1.0);
    }
}

pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w: Vec<f64> = (0..n)
        .map(|j| {
            let mut p = 1.0;
            for k in 0..n {
                if k != j {
                    p *= nodes[j] - nodes[k];
                }
            }
            1.0 / p
        })
        .collect();
    let s = w.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    for v in &mut w {
        *v /= s;
    }
    w
}

pub fn lagrange_basis(nodes: &[f64], bary: &[f64], x: f64, out: &mut [f64]) {
    for (j, &xj) in nodes.iter().enumerate() {
        if x == xj {
            out.iter_mut().for_each(|v| *v = 0.0);
            out[j] = 1.0;
            return;
        }
    }
    let mut s = 0.0;
    for j in 0..nodes.len() {
        let t = bary[j] / (x - nodes[j]);
        out[j] = t;
        s += t;
    }
    for v in out.iter_mut() {
        *v /= s;
    }
}

/// Legendre log-moments Lₖ(x₀) = ∫₋₁¹ Pₖ(x) log|x − x₀| dx for k < n.
pub fn legendre_log_moments(n: usize, x0: f64) -> Vec<f64> {
    let mut out = vec![0.0; n];
    if n == 0 {
        return out;
    }
    let l0 = |x0: f64| -> f64 {
        let a = 1.0 - x0;
        let b = 1.0 + x0;
        let ta = if a == 0.0 { 0.0 } else { a * a.abs().ln() };
        let tb = if b == 0.0 { 0.0 } else { b * b.abs().ln() };
        ta + tb - 2.0
    };
    if x0.abs() < 1.0 {
        // Ferrers Q_n on the cut by forward recurrence.
        let mut q = vec![0.0; n + 1];
        q[0] = 0.5 * ((1.0 + x0) / (1.0 - x0)).ln();
        if n >= 1 {
            q[1] = x0 * q[0] - 1.0;
        }
        for k in 1..n {
            let kf = k as f64;
            q[k + 1] = ((2.0 * kf + 1.0) * x0 * q[k] - kf * q[k - 1]) / (kf + 1.0);
        }
        out[0] = l0(x0);
        for k in 1..n {
            out[k] = 2.0 * (q[k + 1] - q[k - 1]) / (2.0 * k as f64 + 1.0);
        }
    } else {
        // Analytic integrand: graded Gauss–Legendre toward the nearer endpoint.
        let e = x0.signum();
        let dist = (x0 - e).abs().max(1e-300);
        let rule = graded_rule(-1.0, 1.0, e, dist, 24);
        let mut p = vec![0.0; n];
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            legendre_values(n, x, &mut p);
            let lg = (x - x0).abs().ln();
            for k in 0..n {
                out[k] += w * p[k] * lg;
            }
        }
        out[0] = l0(x0);
    }
    out
}

/// Weights λⱼ with ∫₋₁¹ f(x) log|x − x₀| dx ≈ Σⱼ λⱼ f(xⱼ) exact for deg f < n
/// (product integration on the Gauss–Legendre nodes).
pub fn log_product_weights(gl: &GaussLegendre, x0: f64) -> Vec<f64> {
    let n = gl.len();
    let moments = legendre_log_moments(n, x0);
    let mut p = vec![0.0; n];
    let mut lam = vec![0.0; n];
    for j in 0..n {
        legendre_values(n, gl.nodes[j], &mut p);
        let mut s = 0.0;
        for k in 0..n {
            s += (2.0 * k as f64 + 1.0) * 0.5 * p[k] * moments[k];
        }
        lam[j] = gl.weights[j] * s;
    }
    lam
}

/// A composite quadrature rule on an interval.
#[derive(Debug, Clone, Default)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    fn push_gl(&mut self, gl: &GaussLegendre, a: f64, b: f64) {
        if b <= a {
            return;
        }
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        for (&x, &w) in gl.nodes.iter().zip(&gl.weights) {
            self.nodes.push(c + h * x);
            self.weights.push(h * w);
        }
    }
}

/// Composite Gauss–Legendre rule on [a, b] dyadically graded toward t0
/// (clamped to [a, b]); `delta` is the distance of the singularity from the
/// real axis (0 for an on-interval log singularity). Each sub-interval lies at
/// least its own length from the singularity, so q nodes per piece give
/// near machine precision for log-type and nearly-singular analytic integrands.
pub fn graded_rule(a: f64, b: f64, t0: f64, delta: f64, q: usize) -> Rule {
    let gl = gauss_legendre(q);
    let mut rule = Rule::default();
    let c = t0.clamp(a, b);
    let len = b - a;
    let floor = (1e-15 * len).max(delta);
    let core = floor.min(len);
    // central piece [c − core, c + core] ∩ [a, b] only when delta > 0
    let (lo, hi) = if delta > 0.0 {
        let lo = (c - core).max(a);
        let hi = (c + core).min(b);
        rule.push_gl(&gl, lo, hi);
        (lo, hi)
    } else {
        (c, c)
    };
    // right side of the core
    let mut s = (hi - c).max(floor);
    let mut x = hi;
    while x < b {
        let next = (c + 2.0 * s).min(b);
        let next = if b - next < 0.5 * (next - x) { b } else { next };
        rule.push_gl(&gl, x, next);
        x = next;
        s *= 2.0;
    }
    let mut s = (c - lo).max(floor);
    let mut x = lo;
    while x > a {
        let next = (c - 2.0 * s).max(a);
        let next = if next - a < 0.5 * (x - next) { a } else { next };
        rule.push_gl(&gl, next, x);
        x = next;
        s *= 2.0;
    }
    rule
}

/// Adaptive Gauss–Legendre integration by bisection (used for geometry tables
/// and as a test oracle). The error budget is distributed by length.
pub fn adaptive_integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let gl = gauss_legendre(16);
    let density = tol / (b - a).abs().max(f64::MIN_POSITIVE);
    fn rec(f: &impl Fn(f64) -> f64, gl: &GaussLegendre, a: f64, b: f64, whole: f64, density: f64, depth: usize) -> f64 {
        let m = 0.5 * (a + b);
        let l = gl.integrate(a, m, f);
        let r = gl.integrate(m, b, f);
        let err = (l + r - whole).abs();
        if err <= density * (b - a).abs()
            || err <= 32.0 * f64::EPSILON * (l.abs() + r.abs())
            || (b - a).abs() <= 1e-14 * (1.0 + a.abs())
            || depth > 60
        {
            l + r
        } else {
            rec(f, gl, a, m, l, density, depth + 1) + rec(f, gl, m, b, r, density, depth + 1)
        }
    }
    let whole = gl.integrate(a, b, f);
    rec(f, &gl, a, b, whole, density, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials() {
        for n in [1usize, 2, 5, 16, 32, 64] {
            let gl = gauss_legendre(n);
            assert!((gl.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            for k in 0..2 * n {
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                let got = gl.integrate(-1.0, 1.0, |x| x.powi(k as i32));
                assert!((got - exact).abs() < 1e-14, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn lagrange_reproduces_polynomials() {
        let gl = gauss_legendre(12);
        let mut l = vec![0.0; 12];
        for &x in &[-0.93, 0.11, 0.5, 0.999] {
            gl.lagrange(x, &mut l);
            let v: f64 = gl.nodes.iter().zip(&l).map(|(&t, &w)| w * t.powi(11)).sum();
            assert!((v - x.powi(11)).abs() < 1e-12 * (1.0 + x.powi(11).abs()));
        }
    }

    #[test]
    fn log_moment_closed_forms() {
        let l = legendre_log_moments(3, 0.0);
        assert!((l[0] + 2.0).abs() < 1e-15);
        assert!(l[1].abs() < 1e-15);
        assert!((l[2] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn log_moments_continuous_across_endpoint() {
        let a = legendre_log_moments(16, 1.0 - 1e-9);
        let b = legendre_log_moments(16, 1.0 + 1e-9);
        for k in 0..16 {
            assert!((a[k] - b[k]).abs() < 1e-7, "k={k}");
        }
    }
}
