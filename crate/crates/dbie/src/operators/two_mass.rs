//! Interfaces between regions of different masses m₂ (above) and −m₁ (below).

use std::f64::consts::PI;

use faer::Mat;
use rayon::prelude::*;

use super::layer::{single_layer_self, NEAR_FACTOR};
use super::resolvent::{Half, Resolvent, ResolventSpec};
use super::dirac::{add_identity_part, add_resolvent_product, OperatorMatrix};
use crate::error::{Error, Result};
use crate::mesh::{graded_panel_rule, near_rule_at_point, panel_node_distance, PanelMesh};
use crate::specfun::k01;
use crate::spinor::{dot_sigma, Mat2, C64, I, SIGMA3};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoMass {
    pub m1: f64,
    pub m2: f64,
    pub e: f64,
    pub omega1: f64,
    pub omega2: f64,
}

impl TwoMass {
    pub fn new(m1: f64, m2: f64, e: f64) -> Result<Self> {
        if !(e != 0.0 && e * e < m1 * m1 && e * e < m2 * m2) {
            return Err(Error::Precondition(format!("0 < E² < m₁², m₂² required (m₁={m1}, m₂={m2}, E={e})")));
        }
        Ok(Self { m1, m2, e, omega1: ((m1 - e) * (m1 + e)).sqrt(), omega2: ((m2 - e) * (m2 + e)).sqrt() })
    }

    pub fn alpha(&self) -> f64 {
        0.5 * self.e * (1.0 / self.m2 - 1.0 / self.m1)
    }

    pub fn mask_l(&self) -> Mat2 {
        let a = self.alpha();
        Mat2::new(
            C64::new(1.0 - a, 0.0),
            C64::new(-(1.0 - a), 0.0),
            C64::new(-(1.0 + a), 0.0),
            C64::new(1.0 + a, 0.0),
        )
    }

    pub fn mask_r(&self) -> Mat2 {
        let a = self.alpha();
        Mat2::new(
            C64::new(1.0 - a, 0.0),
            C64::new(-(1.0 + a), 0.0),
            C64::new(-(1.0 - a), 0.0),
            C64::new(1.0 + a, 0.0),
        )
    }

    /// Preconditioner coefficient i(m₁² + m₂²).
    pub fn coef(&self) -> C64 {
        C64::new(0.0, self.m1 * self.m1 + self.m2 * self.m2)
    }

    /// B(ξ) of the flat interface.
    pub fn symbol_b(&self, xi: f64) -> Mat2 {
        let q2 = 1.0 / (xi * xi + self.omega2 * self.omega2).sqrt();
        let q1 = 1.0 / (xi * xi + self.omega1 * self.omega1).sqrt();
        let s1 = crate::spinor::SIGMA1;
        let s2 = crate::spinor::SIGMA2;
        Mat2::IDENTITY - SIGMA3.scale_re(0.5 * xi * (q2 - q1)) + s1.scale_re(0.5 * (self.m2 * q2 + self.m1 * q1))
            - s2.scale(C64::new(0.0, 0.5 * self.e * (q2 - q1)))
    }

    /// Symbol of the preconditioner 1 + i(m₁²+m₂²)(M_L R̃_L − M_R R̃_R).
    pub fn symbol_precond(&self, xi: f64) -> Mat2 {
        let e = self.e;
        let rl = 1.0 / (2.0 * e * (xi + e));
        let rr = 1.0 / (2.0 * e * (xi - e));
        Mat2::IDENTITY + (self.mask_l().scale_re(rl) - self.mask_r().scale_re(rr)).scale(self.coef())
    }
}

/// Rows of (𝒮′_{ω₂} − 𝒮′_{ω₁}) and 𝒯′ for target node i (real kernels).
pub fn sprime_tprime_row(mesh: &PanelMesh, i: usize, w1: f64, w2: f64, sp: &mut [f64], tp: &mut [f64]) {
    let p = mesh.order;
    let pi = mesh.panel_of_node(i);
    let x = mesh.points[i];
    let n = mesh.normals[i];
    let t = mesh.tangents[i];
    let c = 1.0 / (2.0 * PI);
    let kern = |y: [f64; 2]| -> (f64, f64) {
        let d = [x[0] - y[0], x[1] - y[1]];
        let r = d[0].hypot(d[1]);
        if r == 0.0 {
            return (0.0, 0.0);
        }
        let k1a = w1 * k01(w1 * r).1;
        let k1b = w2 * k01(w2 * r).1;
        let nd = (n[0] * d[0] + n[1] * d[1]) / r;
        let td = (t[0] * d[0] + t[1] * d[1]) / r;
        (-c * nd * (k1b - k1a), -c * td * (k1b - k1a))
    };
    for v in sp.iter_mut().chain(tp.iter_mut()) {
        *v = 0.0;
    }
    for k in 0..mesh.panels.len() {
        let st = mesh.panels[k].start;
        let adjacent = k + 1 >= pi && k <= pi + 1;
        let near = adjacent || panel_node_distance(mesh, k, x) < NEAR_FACTOR * mesh.panels[k].len();
        if adjacent {
            // 𝒮′ difference is smooth: nodes, with the analytic diagonal limit (which cancels)
            for j in st..st + p {
                if j != i {
                    sp[j] = kern(mesh.points[j]).0 * mesh.w[j];
                }
            }
            let x0 = mesh.panels[k].to_local(mesh.s[i]);
            let rule = graded_panel_rule(mesh, k, x0, 0.0, i);
            for a in 0..rule.weights.len() {
                let v = kern(rule.points[a]).1 * rule.weights[a];
                for j in 0..p {
                    tp[st + j] += v * rule.interp[a * p + j];
                }
            }
        } else if near {
            let rule = near_rule_at_point(mesh, k, x);
            for a in 0..rule.weights.len() {
                let (u, v) = kern(rule.points[a]);
                for j in 0..p {
                    let l = rule.interp[a * p + j] * rule.weights[a];
                    sp[st + j] += u * l;
                    tp[st + j] += v * l;
                }
            }
        } else {
            for j in st..st + p {
                let (u, v) = kern(mesh.points[j]);
                sp[j] = u * mesh.w[j];
                tp[j] = v * mesh.w[j];
            }
        }
    }
}

/// Diagonal Nyström value of the single-mass 𝒮′_ω kernel on a smooth curve: κ/(4π).
pub fn sprime_diagonal_limit(curvature: f64) -> f64 {
    curvature / (4.0 * PI)
}

/// 𝒮′_ω rows (Nyström with the analytic diagonal limit) for rows in I₁; used for diagnostics.
pub fn assemble_sprime(mesh: &PanelMesh, omega: f64) -> Mat<f64> {
    let i1 = mesh.i1_nodes();
    let n2 = mesh.total_nodes();
    let c = 1.0 / (2.0 * PI);
    Mat::from_fn(i1.len(), n2, |ii, j| {
        let i = i1.start + ii;
        if i == j {
            return sprime_diagonal_limit(mesh.curvature[i]) * mesh.w[j];
        }
        let x = mesh.points[i];
        let y = mesh.points[j];
        let d = [x[0] - y[0], x[1] - y[1]];
        let r = d[0].hypot(d[1]);
        let nd = (mesh.normals[i][0] * d[0] + mesh.normals[i][1] * d[1]) / r;
        -c * omega * nd * k01(omega * r).1 * mesh.w[j]
    })
}

/// First factor of the two-mass operator, rows I₁ nodes, columns all nodes.
pub fn assemble_two_mass_first(mesh: &PanelMesh, tm: &TwoMass) -> Mat<C64> {
    let i1 = mesh.i1_nodes();
    let n1 = i1.len();
    let n2 = mesh.total_nodes();
    let s1 = single_layer_self(mesh, tm.omega1, i1.clone());
    let s2 = single_layer_self(mesh, tm.omega2, i1.clone());
    let rows: Vec<Vec<Mat2>> = i1
        .clone()
        .into_par_iter()
        .map(|i| {
            let ii = i - i1.start;
            let mut sp = vec![0.0; n2];
            let mut tp = vec![0.0; n2];
            sprime_tprime_row(mesh, i, tm.omega1, tm.omega2, &mut sp, &mut tp);
            let ns = dot_sigma(mesh.normals[i]).scale(I);
            let ns3 = ns * SIGMA3;
            let is3 = SIGMA3.scale(I);
            (0..n2)
                .map(|j| {
                    let a = s1[(ii, j)];
                    let b = s2[(ii, j)];
                    let mut blk = Mat2::scalar(C64::new(-sp[j], 0.0)) + is3.scale_re(tp[j])
                        - ns3.scale_re(tm.m2 * b + tm.m1 * a)
                        - ns.scale_re(tm.e * (b - a));
                    if i == j {
                        blk = blk + Mat2::IDENTITY;
                    }
                    blk
                })
                .collect()
        })
        .collect();
    let mut mat = Mat::<C64>::zeros(2 * n1, 2 * n2);
    for (ii, row) in rows.iter().enumerate() {
        for (j, b) in row.iter().enumerate() {
            for a in 0..2 {
                for d in 0..2 {
                    mat[(2 * ii + a, 2 * j + d)] = b.0[a][d];
                }
            }
        }
    }
    mat
}

/// Full two-mass system matrix F∘(1 + i(m₁²+m₂²)(M_L R_L + M_R R_R)) on I₁.
pub fn assemble_two_mass(mesh: &PanelMesh, tm: &TwoMass) -> Result<OperatorMatrix> {
    let f = assemble_two_mass_first(mesh, tm);
    let res = Resolvent::on_i1(mesh, ResolventSpec::outgoing(tm.e))?;
    let n1 = mesh.n1();
    let mut a = Mat::<C64>::zeros(2 * n1, 2 * n1);
    add_identity_part(&mut a, 0, &f, mesh);
    add_resolvent_product(&mut a, 0, &f, &tm.mask_l(), tm.coef(), &res, Half::Left);
    add_resolvent_product(&mut a, 0, &f, &tm.mask_r(), tm.coef(), &res, Half::Right);
    Ok(OperatorMatrix { mat: a, tag: "two_mass".into(), m: tm.m2, e: tm.e, omega: tm.omega2 })
}

/// μ = (1 + i(m₁²+m₂²)(M_L R_L + M_R R_R))ρ on all nodes.
pub fn two_mass_mu(mesh: &PanelMesh, tm: &TwoMass, rho: &[[C64; 2]]) -> Result<Vec<[C64; 2]>> {
    let res = Resolvent::on_i1(mesh, ResolventSpec::outgoing(tm.e))?;
    let c0: Vec<C64> = rho.iter().map(|v| v[0]).collect();
    let c1: Vec<C64> = rho.iter().map(|v| v[1]).collect();
    let l0 = res.apply(Half::Left, &c0);
    let l1 = res.apply(Half::Left, &c1);
    let r0 = res.apply(Half::Right, &c0);
    let r1 = res.apply(Half::Right, &c1);
    let (ml, mr) = (tm.mask_l(), tm.mask_r());
    let off = mesh.i1_nodes().start;
    let coef = tm.coef();
    Ok((0..mesh.total_nodes())
        .map(|a| {
            let u = ml.apply(&[l0[a], l1[a]]);
            let v = mr.apply(&[r0[a], r1[a]]);
            let mut out = [coef * (u[0] + v[0]), coef * (u[1] + v[1])];
            if a >= off && a < off + rho.len() {
                out[0] += rho[a - off][0];
                out[1] += rho[a - off][1];
            }
            out
        })
        .collect())
}
