//! Dirac interface operators 𝓛, 𝒦, 𝒫 in the rotated frame μ = Vτ.

use std::f64::consts::PI;

use faer::Mat;
use rayon::prelude::*;

use super::layer::{offcurve_row, single_layer_self};
use super::resolvent::{Half, Resolvent, ResolventSpec};
use crate::error::{Error, Result};
use crate::geometry::cobmat_v_unchecked;
use crate::mesh::PanelMesh;
use crate::specfun::{dirac_kernel, GreensParams};
use crate::spinor::{dot_sigma, Mat2, Spinor, C64, I, M1, M2, SIGMA3, ZERO};

/// Dense operator with its provenance.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub mat: Mat<C64>,
    pub tag: String,
    pub m: f64,
    pub e: f64,
    pub omega: f64,
}

/// Preconditioner mask: M₂ for m > 0, M₁ for m < 0.
pub fn mask_for_mass(m: f64) -> Mat2 {
    if m > 0.0 {
        M2
    } else {
        M1
    }
}

fn check_me(m: f64, e: f64) -> Result<f64> {
    if !(e.abs() < m.abs()) || !m.is_finite() || !e.is_finite() {
        return Err(Error::Precondition(format!("|E| < |m| required (m={m}, E={e})")));
    }
    Ok(((m - e) * (m + e)).sqrt())
}

#[inline]
fn put_block(mat: &mut Mat<C64>, r: usize, c: usize, b: &Mat2) {
    for a in 0..2 {
        for d in 0..2 {
            mat[(r + a, c + d)] = b.0[a][d];
        }
    }
}

/// 𝓛 = 1 + sign·2mσ₃V*𝒮V from a precomputed 𝒮 (rows: I₁ nodes, cols: all nodes).
pub fn assemble_l_from_s(mesh: &PanelMesh, s: &Mat<f64>, m: f64, sign: f64) -> Mat<C64> {
    let n1 = mesh.n1();
    let n2 = mesh.total_nodes();
    let i1 = mesh.i1_nodes();
    let v: Vec<Mat2> = (0..n2).map(|j| mesh.v(j)).collect();
    let coef = sign * 2.0 * m;
    let cols: Vec<Vec<C64>> = (0..n2)
        .into_par_iter()
        .map(|j| {
            let mut col = vec![ZERO; 4 * n1];
            for ii in 0..n1 {
                let i = i1.start + ii;
                let mut b = (SIGMA3 * v[i].adjoint() * v[j]).scale_re(coef * s[(ii, j)]);
                if i == j {
                    b = b + Mat2::IDENTITY;
                }
                col[2 * ii] = b.0[0][0];
                col[2 * ii + 1] = b.0[1][0];
                col[2 * n1 + 2 * ii] = b.0[0][1];
                col[2 * n1 + 2 * ii + 1] = b.0[1][1];
            }
            col
        })
        .collect();
    Mat::from_fn(2 * n1, 2 * n2, |r, c| cols[c / 2][(c % 2) * 2 * n1 + r])
}

/// 𝓛 for one interface with the given sign (+1 single interface / Γ₂, −1 Γ₁).
pub fn assemble_l(mesh: &PanelMesh, m: f64, e: f64, sign: f64) -> Result<OperatorMatrix> {
    let omega = check_me(m, e)?;
    let s = single_layer_self(mesh, omega, mesh.i1_nodes());
    Ok(OperatorMatrix {
        mat: assemble_l_from_s(mesh, &s, m, sign),
        tag: format!("L{sign:+}"),
        m,
        e,
        omega,
    })
}

/// 𝒦_j: rows are I₁ nodes of `tgt` (Γ_ℓ), columns all nodes of `src` (Γ_j).
pub fn assemble_k(tgt: &PanelMesh, src: &PanelMesh, m: f64, e: f64, j: usize) -> Result<OperatorMatrix> {
    let omega = check_me(m, e)?;
    if j != 1 && j != 2 {
        return Err(Error::Validation("interface index must be 1 or 2".into()));
    }
    let g1 = GreensParams { m_signed: -m, e, omega };
    let sign = if j == 1 { 1.0 } else { -1.0 };
    let n1 = tgt.n1();
    let n2 = src.total_nodes();
    let i1 = tgt.i1_nodes();
    let vsrc: Vec<Mat2> = (0..n2).map(|k| src.v(k)).collect();
    let rows: Vec<Vec<Mat2>> = i1
        .clone()
        .into_par_iter()
        .map(|i| {
            let x = tgt.points[i];
            let left = cobmat_v_unchecked(tgt.normals[i]).adjoint() * dot_sigma(tgt.normals[i]).scale(I);
            let mut row = vec![Mat2::ZERO; n2];
            offcurve_row(
                src,
                x,
                0..src.panels.len(),
                |y, _| dirac_kernel([x[0] - y[0], x[1] - y[1]], &g1),
                |k, b| row[k] += b,
            );
            for (k, b) in row.iter_mut().enumerate() {
                *b = (left * *b * vsrc[k]).scale_re(sign);
            }
            row
        })
        .collect();
    let mut mat = Mat::<C64>::zeros(2 * n1, 2 * n2);
    for (ii, row) in rows.iter().enumerate() {
        for (k, b) in row.iter().enumerate() {
            put_block(&mut mat, 2 * ii, 2 * k, b);
        }
    }
    Ok(OperatorMatrix { mat, tag: format!("K{j}"), m, e, omega })
}

/// τ = 𝒫ρ = ρ + coef·M R[ρ] on all nodes, ρ given on the resolvent's source nodes.
pub fn apply_p(res: &Resolvent, half: Half, mask: &Mat2, coef: C64, rho: &[Spinor]) -> Vec<Spinor> {
    let n = res.mesh.total_nodes();
    let off = res.src.start * res.mesh.order;
    let comp = |c: usize| rho.iter().map(|v| v[c]).collect::<Vec<_>>();
    let r0 = res.apply(half, &comp(0));
    let r1 = res.apply(half, &comp(1));
    let mut out = vec![[ZERO; 2]; n];
    for a in 0..n {
        let mr = mask.apply(&[r0[a], r1[a]]);
        out[a] = [coef * mr[0], coef * mr[1]];
        if a >= off && a < off + rho.len() {
            out[a][0] += rho[a - off][0];
            out[a][1] += rho[a - off][1];
        }
    }
    out
}

/// Dense 𝒫 = 1 + 2im²M R (rows: all nodes ×2, cols: I₁ nodes ×2).
pub fn assemble_p(mesh: &PanelMesh, m: f64, mask: &Mat2, spec: ResolventSpec) -> Result<OperatorMatrix> {
    let res = Resolvent::on_i1(mesh, spec)?;
    let d = res.dense(Half::Full);
    let n1 = res.n_src();
    let n2 = mesh.total_nodes();
    let off = mesh.i1_nodes().start;
    let coef = C64::new(0.0, 2.0 * m * m);
    let mut mat = Mat::<C64>::zeros(2 * n2, 2 * n1);
    for a in 0..n2 {
        for c in 0..n1 {
            let mut b = mask.scale(coef * d[a][c]);
            if a == off + c {
                b = b + Mat2::IDENTITY;
            }
            put_block(&mut mat, 2 * a, 2 * c, &b);
        }
    }
    let omega = (m * m - spec.e * spec.e).max(0.0).sqrt();
    Ok(OperatorMatrix { mat, tag: "P".into(), m, e: spec.e, omega })
}

/// out[:, col_off + (2c+k)] += coef · Σ_a (C·mask)[:, (a,k)] R[a, c], computed
/// row by row with transposed sweeps.
pub fn add_resolvent_product(
    out: &mut Mat<C64>,
    col_off: usize,
    cmat: &Mat<C64>,
    mask: &Mat2,
    coef: C64,
    res: &Resolvent,
    half: Half,
) {
    let n2 = res.mesh.total_nodes();
    let n1 = res.n_src();
    assert_eq!(cmat.ncols(), 2 * n2);
    let rows = cmat.nrows();
    let active: Vec<usize> = (0..2).filter(|&k| mask.column(k).iter().any(|z| *z != ZERO)).collect();
    let results: Vec<Vec<C64>> = (0..rows)
        .into_par_iter()
        .map(|r| {
            let mut y = vec![ZERO; 2 * n1];
            let mut x = vec![ZERO; n2];
            let mut yk = vec![ZERO; n1];
            for &k in &active {
                for (a, xa) in x.iter_mut().enumerate() {
                    *xa = cmat[(r, 2 * a)] * mask.0[0][k] + cmat[(r, 2 * a + 1)] * mask.0[1][k];
                }
                res.apply_transpose(half, &x, &mut yk);
                for c in 0..n1 {
                    y[2 * c + k] = coef * yk[c];
                }
            }
            y
        })
        .collect();
    for (r, y) in results.iter().enumerate() {
        for (c, v) in y.iter().enumerate() {
            out[(r, col_off + c)] += *v;
        }
    }
}

/// Copies the I₁ columns of C (all-node columns) into out at col_off.
pub fn add_identity_part(out: &mut Mat<C64>, col_off: usize, cmat: &Mat<C64>, mesh: &PanelMesh) {
    let i1 = mesh.i1_nodes();
    for r in 0..cmat.nrows() {
        for (c, a) in i1.clone().enumerate() {
            out[(r, col_off + 2 * c)] += cmat[(r, 2 * a)];
            out[(r, col_off + 2 * c + 1)] += cmat[(r, 2 * a + 1)];
        }
    }
}

/// Scalar Green's kernel K₀ weight helper for fields: (1/2π)K₀.
pub fn k0_kernel(omega: f64, r: f64) -> f64 {
    crate::specfun::k01(omega * r).0 / (2.0 * PI)
}
