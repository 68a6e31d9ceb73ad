//! Layer-potential quadrature: the K₀ single layer with log-split product
//! rules on self/adjacent panels, graded rules on near panels, and plain
//! Gauss–Legendre elsewhere.

use std::f64::consts::PI;
use std::ops::Range;

use faer::Mat;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::{near_rule_at_point, panel_log_weights, panel_node_distance, NearQuadRule, PanelMesh};
use crate::specfun::{k01, k0_log_split};

/// Panels closer than this multiple of their length use graded rules.
pub const NEAR_FACTOR: f64 = 1.0;

/// Quadrature choice for one (target, source panel) pair.
pub enum PanelQuad {
    Plain,
    Near(NearQuadRule),
}

/// Plain or graded rule for an off-panel target point.
pub fn classify(mesh: &PanelMesh, panel: usize, x: [f64; 2]) -> PanelQuad {
    let len = mesh.panels[panel].len();
    if panel_node_distance(mesh, panel, x) < NEAR_FACTOR * len {
        PanelQuad::Near(near_rule_at_point(mesh, panel, x))
    } else {
        PanelQuad::Plain
    }
}

/// Accumulates Σ_j W_j φ(s_j) ≈ ∫_panel k(x, y(s)) φ(s) ds over all panels,
/// for a target point x that is not on this mesh's curve (or is on a
/// different curve). `kernel(y, n_y)` returns the kernel value; `add(j, w·k)`
/// receives per-node contributions.
pub fn offcurve_row<T, K, A>(mesh: &PanelMesh, x: [f64; 2], panels: Range<usize>, mut kernel: K, mut add: A)
where
    T: Copy + std::ops::Mul<f64, Output = T>,
    K: FnMut([f64; 2], [f64; 2]) -> T,
    A: FnMut(usize, T),
{
    let p = mesh.order;
    for k in panels {
        let st = mesh.panels[k].start;
        match classify(mesh, k, x) {
            PanelQuad::Plain => {
                for j in st..st + p {
                    add(j, kernel(mesh.points[j], mesh.normals[j]) * mesh.w[j]);
                }
            }
            PanelQuad::Near(rule) => {
                for a in 0..rule.weights.len() {
                    let v = kernel(rule.points[a], rule.normals[a]) * rule.weights[a];
                    let row = &rule.interp[a * p..(a + 1) * p];
                    for (j, &l) in row.iter().enumerate() {
                        add(st + j, v * l);
                    }
                }
            }
        }
    }
}

/// One row of 𝒮_ω for target node i on the same curve: out[j] ≈ weight of μ_j.
pub fn single_layer_row_self(mesh: &PanelMesh, i: usize, omega: f64, out: &mut [f64]) {
    let p = mesh.order;
    let pi = mesh.panel_of_node(i);
    let x = mesh.points[i];
    let s0 = mesh.s[i];
    let c = 1.0 / (2.0 * PI);
    let ln_omega = omega.ln();
    let np = mesh.panels.len();
    for k in 0..np {
        let st = mesh.panels[k].start;
        if k + 1 >= pi && k <= pi + 1 {
            // K₀(ωr) = −I₀(ωr) ln|s−s₀| + [K₀ + I₀ ln(ωr)] − I₀ (ln ω + ln(r/|s−s₀|))
            let wl = panel_log_weights(&mesh.panels[k], p, s0);
            for j in 0..p {
                let n = st + j;
                let y = mesh.points[n];
                let r = (x[0] - y[0]).hypot(x[1] - y[1]);
                let ds = (mesh.s[n] - s0).abs();
                let (i0, reg) = k0_log_split(omega * r);
                let ratio = if n == i { mesh.speeds[i] } else { r / ds };
                let smooth = reg - i0 * (ln_omega + ratio.ln());
                out[n] = c * (-i0 * wl[j] * mesh.speeds[n] + mesh.w[n] * smooth);
            }
        } else {
            let len = mesh.panels[k].len();
            if panel_node_distance(mesh, k, x) < NEAR_FACTOR * len {
                let rule = near_rule_at_point(mesh, k, x);
                for v in &mut out[st..st + p] {
                    *v = 0.0;
                }
                for a in 0..rule.weights.len() {
                    let y = rule.points[a];
                    let r = (x[0] - y[0]).hypot(x[1] - y[1]);
                    let kv = c * k01(omega * r).0 * rule.weights[a];
                    for j in 0..p {
                        out[st + j] += kv * rule.interp[a * p + j];
                    }
                }
            } else {
                for n in st..st + p {
                    let y = mesh.points[n];
                    let r = (x[0] - y[0]).hypot(x[1] - y[1]);
                    out[n] = c * k01(omega * r).0 * mesh.w[n];
                }
            }
        }
    }
}

/// 𝒮_ω rows for target nodes `rows` of the mesh against all of its nodes.
pub fn single_layer_self(mesh: &PanelMesh, omega: f64, rows: Range<usize>) -> Mat<f64> {
    let n2 = mesh.total_nodes();
    let data: Vec<Vec<f64>> = rows
        .clone()
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0; n2];
            single_layer_row_self(mesh, i, omega, &mut row);
            row
        })
        .collect();
    Mat::from_fn(rows.len(), n2, |i, j| data[i][j])
}

/// 𝒮_ω from the nodes of `src` to the I₁ nodes of `tgt`; both meshes must
/// discretize the same curve.
pub fn assemble_s(src: &PanelMesh, tgt: &PanelMesh, omega: f64) -> Result<Mat<f64>> {
    if !std::sync::Arc::ptr_eq(&src.curve, &tgt.curve) || src.breakpoints() != tgt.breakpoints() {
        return Err(Error::Validation(format!(
            "single layer expects one mesh for source and target (got '{}' and '{}')",
            src.curve.label, tgt.curve.label
        )));
    }
    if !(omega > 0.0) {
        return Err(Error::Domain("ω must be positive".into()));
    }
    Ok(single_layer_self(src, omega, tgt.i1_nodes()))
}

/// 𝒮_ω from all nodes of `src` to arbitrary target points.
pub fn single_layer_points(src: &PanelMesh, targets: &[[f64; 2]], omega: f64) -> Mat<f64> {
    let n2 = src.total_nodes();
    let c = 1.0 / (2.0 * PI);
    let data: Vec<Vec<f64>> = targets
        .par_iter()
        .map(|&x| {
            let mut row = vec![0.0; n2];
            offcurve_row(
                src,
                x,
                0..src.panels.len(),
                |y, _| {
                    let r = (x[0] - y[0]).hypot(x[1] - y[1]);
                    c * k01(omega * r).0
                },
                |j, v| row[j] += v,
            );
            row
        })
        .collect();
    Mat::from_fn(targets.len(), n2, |i, j| data[i][j])
}
