use std::sync::Arc;

use dbie::geometry::{curve_catalog, Params};
use dbie::mesh::{build_mesh, MeshOptions, TruncationWindows};
use dbie::operators::single_layer_self;
use dbie::quad::adaptive_integrate;
use dbie::specfun::bessel_k0;

#[test]
fn single_layer_constant_density_flat() {
    let c = Arc::new(curve_catalog("flat", &Params::new()).unwrap());
    let w = TruncationWindows::new((-4.0, 4.0), 40.0);
    let m = build_mesh(c, w, &MeshOptions::new(16, 2.0)).unwrap();
    let omega = 0.75f64.sqrt();
    let s = single_layer_self(&m, omega, m.i1_nodes());
    let mid = m.n1() / 2;
    let v: f64 = (0..m.total_nodes()).map(|j| s[(mid, j)]).sum();
    let exact = 1.0 / (2.0 * omega);
    let tail = (-omega * 40.0f64).exp();
    assert!((v - exact).abs() < 1e-10 + tail, "{v} {exact}");
}

/// ∫₀^h f(δ)dδ with δ = h·v⁴, which smooths a log singularity at δ = 0.
fn graded(f: &impl Fn(f64) -> f64, h: f64) -> f64 {
    let g = |v: f64| f(h * v.powi(4)) * 4.0 * h * v.powi(3);
    adaptive_integrate(&g, 0.0, 1.0, 1e-15)
}

#[test]
fn single_layer_curved_vs_adaptive() {
    let mut p = Params::new();
    p.insert("amp0".into(), 1.0);
    p.insert("center0".into(), 0.0);
    p.insert("width0".into(), 1.0);
    let c = Arc::new(curve_catalog("gaussian_bump_sum", &p).unwrap());
    let w = TruncationWindows::new((-6.0, 6.0), 6.0);
    let m = build_mesh(c.clone(), w, &MeshOptions::new(16, 1.0)).unwrap();
    let omega = 0.8;
    let s = single_layer_self(&m, omega, m.i1_nodes());
    // density given as a function of the graph variable
    let dens = |u: f64| (0.3 * u).cos() + 0.2 * u;
    let nodal: Vec<f64> = m.s.iter().map(|&t| dens(c.raw_param(t).unwrap())).collect();
    for &ii in &[0usize, 7, m.n1() / 2 + 3, m.n1() - 1] {
        let i = m.i1_nodes().start + ii;
        let v: f64 = (0..m.total_nodes()).map(|j| s[(ii, j)] * nodal[j]).sum();
        // integrate in the graph variable, where positions are exact
        let u0 = c.raw_param(m.s[i]).unwrap();
        let (x, d1x, d2x) = c.shape().raw(u0);
        // f(δ) at u0 + δ; the chord uses a Taylor form for tiny δ so r keeps full relative accuracy
        let f = |del: f64| {
            let (y, d1, _) = c.shape().raw(u0 + del);
            let d = if del.abs() < 1e-5 {
                [d1x[0] * del + 0.5 * d2x[0] * del * del, d1x[1] * del + 0.5 * d2x[1] * del * del]
            } else {
                [y[0] - x[0], y[1] - x[1]]
            };
            let r = d[0].hypot(d[1]);
            if r == 0.0 {
                return 0.0;
            }
            bessel_k0(omega * r).unwrap() * dens(u0 + del) * d1[0].hypot(d1[1]) / (2.0 * std::f64::consts::PI)
        };
        let a = c.raw_param(w.i2.0).unwrap();
        let b = c.raw_param(w.i2.1).unwrap();
        let exact = graded(&f, b - u0) - graded(&f, a - u0);
        assert!((v - exact).abs() < 1e-12 * exact.abs().max(1.0), "node {ii}: {v} vs {exact}, diff {}", v - exact);
    }
}
