//! The one-dimensional outgoing (or incoming) Helmholtz resolvent
//! R[ρ](t) = (1/2iE) ∫ e^{iE|t−s|} ρ(s) ds, applied by O(n) sweeps.

use std::collections::HashMap;
use std::ops::Range;
use std::sync::{Arc, OnceLock, RwLock};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::PanelMesh;
use crate::quad::gauss_legendre;
use crate::spinor::{C64, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Outgoing,
    Incoming,
}

/// Which part of the kernel to apply: the full resolvent, the part with
/// sources to the right of the target (R_L), or to the left (R_R).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Half {
    Full,
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResolventSpec {
    pub e: f64,
    pub direction: Direction,
}

impl ResolventSpec {
    pub fn outgoing(e: f64) -> Self {
        Self { e, direction: Direction::Outgoing }
    }

    pub fn incoming(e: f64) -> Self {
        Self { e, direction: Direction::Incoming }
    }

    /// Signed wavenumber κ: the kernel is e^{iκ|t−s|}/(2iκ).
    pub fn kappa(&self) -> f64 {
        match self.direction {
            Direction::Outgoing => self.e,
            Direction::Incoming => -self.e,
        }
    }

    /// Scalar kernel value at separation d.
    pub fn kernel(&self, d: f64) -> C64 {
        let k = self.kappa();
        C64::new(0.0, k * d.abs()).exp() / C64::new(0.0, 2.0 * k)
    }
}

/// Exact per-panel integrals of e^{±iκ(s−c)} and the split self-panel kernel
/// against the Lagrange basis, for one (order, length, κ).
#[derive(Debug)]
pub struct PanelTables {
    /// ∫ e^{+iκ(s−c)} ℓⱼ(s) ds
    pub mp: Vec<C64>,
    /// ∫ e^{−iκ(s−c)} ℓⱼ(s) ds
    pub mm: Vec<C64>,
    /// e^{+iκ(tᵢ−c)} and e^{−iκ(tᵢ−c)}
    pub ph: Vec<C64>,
    pub phm: Vec<C64>,
    /// ∫_{tᵢ}^{b} e^{iκ(s−tᵢ)} ℓⱼ ds (row-major)
    pub tl: Vec<C64>,
    /// ∫_{a}^{tᵢ} e^{iκ(tᵢ−s)} ℓⱼ ds (row-major)
    pub tr: Vec<C64>,
}

impl PanelTables {
    pub fn new(order: usize, len: f64, kappa: f64) -> Self {
        let gl = gauss_legendre(order);
        let q = gauss_legendre(2 * order + 8);
        let h = 0.5 * len;
        let p = order;
        let mut basis = vec![0.0; p];
        let mut mp = vec![ZERO; p];
        let mut mm = vec![ZERO; p];
        for (&y, &w) in q.nodes.iter().zip(&q.weights) {
            gl.lagrange(y, &mut basis);
            let e = C64::new(0.0, kappa * h * y).exp();
            for j in 0..p {
                mp[j] += e * (w * h * basis[j]);
                mm[j] += e.conj() * (w * h * basis[j]);
            }
        }
        let ph: Vec<C64> = gl.nodes.iter().map(|&x| C64::new(0.0, kappa * h * x).exp()).collect();
        let phm = ph.iter().map(|z| z.conj()).collect();
        let mut tl = vec![ZERO; p * p];
        let mut tr = vec![ZERO; p * p];
        for i in 0..p {
            let xi = gl.nodes[i];
            // [xi, 1]
            let hr = 0.5 * (1.0 - xi);
            for (&y, &w) in q.nodes.iter().zip(&q.weights) {
                let x = xi + hr * (y + 1.0);
                gl.lagrange(x, &mut basis);
                let e = C64::new(0.0, kappa * h * (x - xi)).exp() * (w * hr * h);
                for j in 0..p {
                    tl[i * p + j] += e * basis[j];
                }
            }
            // [−1, xi]
            let hl = 0.5 * (xi + 1.0);
            for (&y, &w) in q.nodes.iter().zip(&q.weights) {
                let x = -1.0 + hl * (y + 1.0);
                gl.lagrange(x, &mut basis);
                let e = C64::new(0.0, kappa * h * (xi - x)).exp() * (w * hl * h);
                for j in 0..p {
                    tr[i * p + j] += e * basis[j];
                }
            }
        }
        Self { mp, mm, ph, phm, tl, tr }
    }
}

type TableKey = (usize, u64, u64);

fn table_cache() -> &'static RwLock<HashMap<TableKey, Arc<PanelTables>>> {
    static CACHE: OnceLock<RwLock<HashMap<TableKey, Arc<PanelTables>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

pub fn panel_tables(order: usize, len: f64, kappa: f64) -> Arc<PanelTables> {
    let key = (order, len.to_bits(), kappa.to_bits());
    if let Some(t) = table_cache().read().unwrap().get(&key) {
        return t.clone();
    }
    let t = Arc::new(PanelTables::new(order, len, kappa));
    table_cache().write().unwrap().insert(key, t.clone());
    t
}

/// Resolvent on a mesh, with densities supported on a contiguous range of panels.
pub struct Resolvent<'a> {
    pub mesh: &'a PanelMesh,
    pub spec: ResolventSpec,
    /// Source panels (density support).
    pub src: Range<usize>,
    tables: Vec<Arc<PanelTables>>,
    /// e^{iκ(c_{k+1} − c_k)}
    hop: Vec<C64>,
}

impl<'a> Resolvent<'a> {
    pub fn new(mesh: &'a PanelMesh, spec: ResolventSpec, src: Range<usize>) -> Result<Self> {
        if spec.e == 0.0 || !spec.e.is_finite() {
            return Err(Error::Domain("resolvent requires E ≠ 0".into()));
        }
        let kappa = spec.kappa();
        let tables = mesh.panels.iter().map(|p| panel_tables(mesh.order, p.len(), kappa)).collect();
        let hop = mesh
            .panels
            .windows(2)
            .map(|w| C64::new(0.0, kappa * (w[1].center() - w[0].center())).exp())
            .collect();
        Ok(Self { mesh, spec, src, tables, hop })
    }

    /// Resolvent with sources on the I₁ panels.
    pub fn on_i1(mesh: &'a PanelMesh, spec: ResolventSpec) -> Result<Self> {
        Self::new(mesh, spec, mesh.i1_panels.clone())
    }

    pub fn n_src(&self) -> usize {
        self.src.len() * self.mesh.order
    }

    fn factor(&self) -> C64 {
        C64::new(0.0, 2.0 * self.spec.kappa()).inv()
    }

    /// Applies R (or one half) to ρ given on the source nodes; returns values at all nodes.
    pub fn apply(&self, half: Half, rho: &[C64]) -> Vec<C64> {
        let p = self.mesh.order;
        let np = self.mesh.panels.len();
        assert_eq!(rho.len(), self.n_src());
        let s0 = self.src.start;
        let dens = |k: usize| &rho[(k - s0) * p..(k - s0 + 1) * p];
        let mut out = vec![ZERO; np * p];
        let f = self.factor();
        if half != Half::Left {
            // sources left of the target
            let mut acc = ZERO;
            for k in 0..np {
                let t = &self.tables[k];
                if acc != ZERO {
                    for i in 0..p {
                        out[k * p + i] += t.ph[i] * acc;
                    }
                }
                if self.src.contains(&k) {
                    let r = dens(k);
                    let mut m = ZERO;
                    for j in 0..p {
                        m += t.mm[j] * r[j];
                    }
                    for i in 0..p {
                        let row = &t.tr[i * p..(i + 1) * p];
                        out[k * p + i] += row.iter().zip(r).map(|(a, b)| a * b).sum::<C64>();
                    }
                    acc += m;
                }
                if k + 1 < np {
                    acc *= self.hop[k];
                }
            }
        }
        if half != Half::Right {
            let mut acc = ZERO;
            for k in (0..np).rev() {
                let t = &self.tables[k];
                if acc != ZERO {
                    for i in 0..p {
                        out[k * p + i] += t.phm[i] * acc;
                    }
                }
                if self.src.contains(&k) {
                    let r = dens(k);
                    let mut m = ZERO;
                    for j in 0..p {
                        m += t.mp[j] * r[j];
                    }
                    for i in 0..p {
                        let row = &t.tl[i * p..(i + 1) * p];
                        out[k * p + i] += row.iter().zip(r).map(|(a, b)| a * b).sum::<C64>();
                    }
                    acc += m;
                }
                if k > 0 {
                    acc *= self.hop[k - 1];
                }
            }
        }
        for v in &mut out {
            *v *= f;
        }
        out
    }

    /// Transposed application: y_c = Σ_a x_a R[a, c] for source nodes c,
    /// with x given at all nodes.
    pub fn apply_transpose(&self, half: Half, x: &[C64], y: &mut [C64]) {
        let p = self.mesh.order;
        let np = self.mesh.panels.len();
        debug_assert_eq!(x.len(), np * p);
        debug_assert_eq!(y.len(), self.n_src());
        let s0 = self.src.start;
        let f = self.factor();
        for v in y.iter_mut() {
            *v = ZERO;
        }
        let (lo, hi) = (self.src.start, self.src.end);
        // targets left of the source panel (uses R_L): A_l = Σ x_a e^{iκ(c_l − t_a)}
        if half != Half::Right {
            let mut acc = ZERO;
            for l in 0..hi {
                let t = &self.tables[l];
                if l >= lo {
                    let yl = &mut y[(l - s0) * p..(l - s0 + 1) * p];
                    for c in 0..p {
                        yl[c] += t.mp[c] * acc;
                    }
                    let xl = &x[l * p..(l + 1) * p];
                    for a in 0..p {
                        if xl[a] != ZERO {
                            let row = &t.tl[a * p..(a + 1) * p];
                            for c in 0..p {
                                yl[c] += xl[a] * row[c];
                            }
                        }
                    }
                }
                let xl = &x[l * p..(l + 1) * p];
                let mut m = ZERO;
                for a in 0..p {
                    m += xl[a] * t.phm[a];
                }
                acc = (acc + m) * if l + 1 < np { self.hop[l] } else { ZERO };
            }
        }
        if half != Half::Left {
            let mut acc = ZERO;
            for l in (lo..np).rev() {
                let t = &self.tables[l];
                if l < hi {
                    let yl = &mut y[(l - s0) * p..(l - s0 + 1) * p];
                    for c in 0..p {
                        yl[c] += t.mm[c] * acc;
                    }
                    let xl = &x[l * p..(l + 1) * p];
                    for a in 0..p {
                        if xl[a] != ZERO {
                            let row = &t.tr[a * p..(a + 1) * p];
                            for c in 0..p {
                                yl[c] += xl[a] * row[c];
                            }
                        }
                    }
                }
                let xl = &x[l * p..(l + 1) * p];
                let mut m = ZERO;
                for a in 0..p {
                    m += xl[a] * t.ph[a];
                }
                acc = (acc + m) * if l > 0 { self.hop[l - 1] } else { ZERO };
            }
        }
        for v in y.iter_mut() {
            *v *= f;
        }
    }

    /// Row a of the dense matrix R[a, c] (c over source nodes), from the panel tables.
    pub fn dense_row(&self, half: Half, a: usize, row: &mut [C64]) {
        let p = self.mesh.order;
        let k = a / p;
        let i = a % p;
        let kappa = self.spec.kappa();
        let f = self.factor();
        let ta = self.mesh.s[a];
        for l in self.src.clone() {
            let t = &self.tables[l];
            let c0 = self.mesh.panels[l].center();
            let out = &mut row[(l - self.src.start) * p..(l - self.src.start + 1) * p];
            if l < k {
                let ph = C64::new(0.0, kappa * (ta - c0)).exp() * f;
                for (o, m) in out.iter_mut().zip(&t.mm) {
                    *o = if half == Half::Left { ZERO } else { ph * m };
                }
            } else if l > k {
                let ph = C64::new(0.0, kappa * (c0 - ta)).exp() * f;
                for (o, m) in out.iter_mut().zip(&t.mp) {
                    *o = if half == Half::Right { ZERO } else { ph * m };
                }
            } else {
                for (c, o) in out.iter_mut().enumerate() {
                    *o = f * match half {
                        Half::Full => t.tl[i * p + c] + t.tr[i * p + c],
                        Half::Left => t.tl[i * p + c],
                        Half::Right => t.tr[i * p + c],
                    };
                }
            }
        }
    }

    /// Dense matrix R[a, c] (all nodes × source nodes).
    pub fn dense(&self, half: Half) -> Vec<Vec<C64>> {
        (0..self.mesh.total_nodes())
            .map(|a| {
                let mut row = vec![ZERO; self.n_src()];
                self.dense_row(half, a, &mut row);
                row
            })
            .collect()
    }

    /// O(n²) reference application to several densities, one matrix row at a
    /// time (no matrix storage).
    pub fn apply_dense(&self, half: Half, rhos: &[Vec<C64>]) -> Vec<Vec<C64>> {
        let rows: Vec<Vec<C64>> = (0..self.mesh.total_nodes())
            .into_par_iter()
            .map_init(
                || vec![ZERO; self.n_src()],
                |row, a| {
                    self.dense_row(half, a, row);
                    rhos.iter().map(|r| row.iter().zip(r).map(|(x, y)| x * y).sum()).collect()
                },
            )
            .collect();
        (0..rhos.len()).map(|k| rows.iter().map(|r| r[k]).collect()).collect()
    }
}
