//! Experiment execution and artifact emission.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};

use dbie::error::{Error, Result};
use dbie::field::{
    jump_check, total_field_grid, transmission_tr, write_grid, write_param_csv, FieldEvaluator, GridSpec,
};
use dbie::kg::{
    kg_assemble, kg_field, kg_field_grid, kg_flux_residual, kg_solve, kg_transmission_solve, write_kg_density_csv,
    write_kg_sweep_csv, KgDensity, KgSweepRow, KgSystem,
};
use dbie::mesh::PanelMesh;
use dbie::oracle_flat::FlatOracle;
use dbie::solve::{solve_system, write_density_csv, DensitySet, Method, SolveOptions};
use dbie::spinor::C64;
use dbie::system::{assemble_system, LinearSystem};

use crate::config::{DiscConfig, Experiment, ExperimentKind, Observable, ProblemKind, RunConfig, SweepParam};

/// Number of jump probes per interface in solve diagnostics.
const JUMP_PROBES: usize = 40;

/// Which experiments a verb runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verb {
    /// Every experiment in the config (a solve if there are none).
    All,
    Solve,
    Grid,
    Sweep,
    Converge,
}

impl Verb {
    fn name(self) -> &'static str {
        match self {
            Verb::All => "all",
            Verb::Solve => "solve",
            Verb::Grid => "grid",
            Verb::Sweep => "sweep",
            Verb::Converge => "converge",
        }
    }
}

pub fn select(cfg: &RunConfig, verb: Verb) -> Result<Vec<Experiment>> {
    let solve = Experiment { kind: ExperimentKind::Solve, energy: None, tag: None };
    let picked: Vec<Experiment> = match verb {
        Verb::All => cfg.experiments.clone(),
        v => cfg.experiments.iter().filter(|e| e.verb() == v.name()).cloned().collect(),
    };
    match (verb, picked.is_empty()) {
        (Verb::All | Verb::Solve, true) => Ok(vec![solve]),
        (_, true) => Err(Error::Validation(format!("config has no {} experiment", verb.name()))),
        _ => Ok(picked),
    }
}

/// Solved problem, kept for follow-up experiments at the same energy.
enum Solved {
    Dirac(Box<(LinearSystem, DensitySet)>),
    Kg(Box<(KgSystem, KgDensity)>),
}

pub struct Runner<'a> {
    cfg: &'a RunConfig,
    out: PathBuf,
    cache: Option<(u64, Solved)>,
}

impl<'a> Runner<'a> {
    pub fn new(cfg: &'a RunConfig, out: &Path) -> Result<Self> {
        std::fs::create_dir_all(out)?;
        Ok(Self { cfg, out: out.to_path_buf(), cache: None })
    }

    /// Runs the experiments and writes `metadata.json`; returns the metadata.
    pub fn run(&mut self, experiments: &[Experiment]) -> Result<Value> {
        let mut records = vec![];
        for ex in experiments {
            records.push(self.experiment(ex)?);
        }
        let meta = json!({
            "name": self.cfg.name,
            "config_hash": self.cfg.hash(),
            "problem": self.cfg.problem,
            "version": env!("CARGO_PKG_VERSION"),
            "experiments": records,
        });
        let text = serde_json::to_string_pretty(&meta).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(self.out.join("metadata.json"), text + "\n")?;
        Ok(meta)
    }

    fn experiment(&mut self, ex: &Experiment) -> Result<Value> {
        let e = ex.energy.unwrap_or(self.cfg.energy);
        let mut rec = json!({ "kind": ex.verb(), "energy": e });
        if let Some(t) = &ex.tag {
            rec["tag"] = json!(t);
        }
        match &ex.kind {
            ExperimentKind::Solve => {
                let stats = self.solve(e)?;
                let file = ex.file("density", "csv");
                match self.solved(e) {
                    Solved::Dirac(b) => write_density_csv(&self.out.join(&file), &b.0, &b.1)?,
                    Solved::Kg(b) => write_kg_density_csv(&self.out.join(&file), &b.0, &b.1)?,
                }
                merge(&mut rec, stats);
                rec["outputs"] = json!([file]);
            }
            ExperimentKind::Grid { grid } => {
                let stats = self.solve(e)?;
                let spec = GridSpec { nx: grid.nx, ny: grid.ny, x0: grid.x0, y0: grid.y0, dx: grid.dx, dy: grid.dy };
                let g = match self.solved(e) {
                    Solved::Dirac(b) => total_field_grid(&FieldEvaluator::new(&b.0, &b.1), spec)?,
                    Solved::Kg(b) => kg_field_grid(&b.0, &b.1, spec)?,
                };
                let file = ex.file("field", "dbiegrid");
                write_grid(&self.out.join(&file), &g)?;
                merge(&mut rec, stats);
                rec["masked"] = json!(g.regions.iter().filter(|r| r.is_none()).count());
                rec["outputs"] = json!([file]);
            }
            ExperimentKind::Sweep { param, grid, observable, discretization } => {
                let disc = discretization.clone().unwrap_or_else(|| self.cfg.discretization.clone());
                let base = self.cfg.with_energy(e);
                let (file, failures) = sweep(&base, &self.out, ex, *param, &grid.points(), observable, &disc)?;
                rec["param"] = json!(param.name());
                rec["rows"] = json!(grid.points().len());
                rec["failures"] = json!(failures);
                rec["outputs"] = json!([file]);
            }
            ExperimentKind::KgCompare { grid, point, discretization } => {
                let disc = discretization.clone().unwrap_or_else(|| self.cfg.discretization.clone());
                let values = grid.points();
                let mut outputs = vec![];
                let mut failures = vec![];
                for (model, cfg, obs) in [
                    ("dirac", self.cfg.clone(), Observable::Field { point: *point, component: 0 }),
                    ("kg", self.cfg.as_kg(), Observable::FieldAndTransmission { point: *point }),
                ] {
                    let sub = Experiment { kind: ex.kind.clone(), energy: None, tag: Some(tagged(ex, model)) };
                    let (file, f) = sweep(&cfg, &self.out, &sub, SweepParam::Energy, &values, &obs, &disc)?;
                    outputs.push(file);
                    failures.push(json!({ "model": model, "failures": f }));
                }
                rec["param"] = json!("energy");
                rec["rows"] = json!(values.len());
                rec["failures"] = json!(failures);
                rec["outputs"] = json!(outputs);
            }
            ExperimentKind::Converge { order, max_panels, probes } => {
                let rows = converge(&self.cfg.with_energy(e), *order, max_panels, probes)?;
                let file = ex.file("convergence", "csv");
                write_convergence_csv(&self.out.join(&file), &rows)?;
                rec["outputs"] = json!([file]);
                rec["final_error"] = json!(rows.last().map(|r| r.max_error()));
            }
        }
        Ok(rec)
    }

    fn solved(&self, e: f64) -> &Solved {
        match &self.cache {
            Some((k, s)) if *k == e.to_bits() => s,
            _ => unreachable!("solve() fills the cache"),
        }
    }

    /// Solves at energy e (cached) and returns diagnostics.
    fn solve(&mut self, e: f64) -> Result<Value> {
        let cfg = self.cfg.with_energy(e);
        let disc = &cfg.discretization;
        let hit = matches!(&self.cache, Some((k, _)) if *k == e.to_bits());
        if !hit {
            let solved = if cfg.problem == ProblemKind::Kg {
                let sys = kg_assemble(&cfg.kg_problem(disc)?)?;
                let d = kg_solve(&sys)?;
                Solved::Kg(Box::new((sys, d)))
            } else {
                let sys = assemble_system(&cfg.dirac_problem(disc)?)?;
                check_source_regions(&sys)?;
                let d = solve_system(&sys, &SolveOptions { method: Method::Dense, tol: disc.tol })?;
                Solved::Dirac(Box::new((sys, d)))
            };
            self.cache = Some((e.to_bits(), solved));
        }
        match self.solved(e) {
            Solved::Dirac(b) => {
                let (sys, d) = (&b.0, &b.1);
                let ev = FieldEvaluator::new(sys, d);
                let stride = sys.meshes.iter().map(|m| m.n1()).max().unwrap_or(1) / JUMP_PROBES;
                Ok(json!({
                    "mesh": sys.meshes.iter().map(mesh_stats).collect::<Vec<_>>(),
                    "unknowns": sys.size(),
                    "residual": d.residual,
                    "cond": d.cond,
                    "jump_max": jump_check(&ev, stride.max(1))?,
                }))
            }
            Solved::Kg(b) => {
                let (sys, d) = (&b.0, &b.1);
                let i1 = sys.mesh.i1_nodes();
                let stride = (i1.len() / 8).max(1);
                let flux = i1
                    .step_by(stride)
                    .map(|i| kg_flux_residual(sys, d, i, 1e-3))
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .fold(0.0, f64::max);
                Ok(json!({
                    "mesh": [mesh_stats(&sys.mesh)],
                    "unknowns": sys.mesh.n1(),
                    "cond": d.cond,
                    "flux_residual_max": flux,
                }))
            }
        }
    }
}

fn tagged(ex: &Experiment, model: &str) -> String {
    match &ex.tag {
        Some(t) => format!("{model}_{t}"),
        None => model.to_string(),
    }
}

fn merge(rec: &mut Value, extra: Value) {
    if let (Some(a), Value::Object(b)) = (rec.as_object_mut(), extra) {
        a.extend(b);
    }
}

fn mesh_stats(m: &PanelMesh) -> Value {
    json!({
        "curve": m.curve.label,
        "order": m.order,
        "panels": m.panels.len(),
        "nodes_i1": m.n1(),
        "nodes_i2": m.total_nodes(),
        "i1": [m.windows.i1.0, m.windows.i1.1],
        "i2": [m.windows.i2.0, m.windows.i2.1],
    })
}

/// Sources must sit in the region they were declared in.
fn check_source_regions(sys: &LinearSystem) -> Result<()> {
    for s in &sys.spec.sources {
        let (r, _) = dbie::field::classify_point(&sys.meshes, s.location);
        if r != s.region {
            return Err(Error::Validation(format!(
                "source at {:?} lies in {} but is declared in {}",
                s.location,
                r.name(),
                s.region.name()
            )));
        }
    }
    Ok(())
}

/// One sweep: rows in parallel, per-row failures recorded; returns the
/// output file name and the failure records.
pub fn sweep(
    base: &RunConfig,
    out: &Path,
    ex: &Experiment,
    param: SweepParam,
    values: &[f64],
    observable: &Observable,
    disc: &DiscConfig,
) -> Result<(String, Vec<Value>)> {
    // every value must give a valid configuration
    for &v in values {
        let c = base.with_param(param, v);
        c.validate()?;
        c.curves()?;
    }
    let rows: Vec<std::result::Result<(C64, f64), Error>> =
        values.par_iter().map(|&v| sweep_point(&base.with_param(param, v), observable, disc)).collect();
    let failures: Vec<Value> = values
        .iter()
        .zip(&rows)
        .filter_map(|(v, r)| r.as_ref().err().map(|e| json!({ "param": v, "kind": e.kind(), "error": e.to_string() })))
        .collect();
    if failures.len() == values.len() {
        return Err(Error::Numerical(format!("all {} sweep rows failed; first: {}", values.len(), failures[0]["error"])));
    }
    let nan = C64::new(f64::NAN, f64::NAN);
    let file = ex.file(&format!("sweep_{}", param.name()), "csv");
    let path = out.join(&file);
    if matches!(observable, Observable::FieldAndTransmission { .. }) {
        let kg: Vec<KgSweepRow> = values
            .iter()
            .zip(&rows)
            .map(|(&e, r)| match r {
                Ok((value, t)) => KgSweepRow { e, value: *value, t: *t },
                Err(_) => KgSweepRow { e, value: nan, t: f64::NAN },
            })
            .collect();
        write_kg_sweep_csv(&path, &kg)?;
    } else {
        let p: Vec<(f64, C64)> = values.iter().zip(&rows).map(|(&v, r)| (v, r.as_ref().map_or(nan, |x| x.0))).collect();
        write_param_csv(&path, &p)?;
    }
    Ok((file, failures))
}

/// Observable for one configuration: (value, T or NaN).
pub fn sweep_point(cfg: &RunConfig, observable: &Observable, disc: &DiscConfig) -> Result<(C64, f64)> {
    if cfg.problem == ProblemKind::Kg {
        let p = cfg.kg_problem(disc)?;
        return match observable {
            Observable::Field { point, .. } => {
                let sys = kg_assemble(&p)?;
                let d = kg_solve(&sys)?;
                Ok((kg_field(&sys, &d, *point)?, f64::NAN))
            }
            Observable::Transmission => {
                let (_, _, t) = kg_transmission_solve(&p)?;
                Ok((C64::new(t.t, 0.0), t.t))
            }
            Observable::FieldAndTransmission { point } => {
                let (sys, d, t) = kg_transmission_solve(&p)?;
                Ok((kg_field(&sys, &d, *point)?, t.t))
            }
        };
    }
    let sys = assemble_system(&cfg.dirac_problem(disc)?)?;
    check_source_regions(&sys)?;
    let d = solve_system(&sys, &SolveOptions { method: Method::Dense, tol: disc.tol })?;
    match observable {
        Observable::Field { point, component } => {
            let u = FieldEvaluator::new(&sys, &d).total(*point)?;
            Ok((u[*component], f64::NAN))
        }
        Observable::Transmission => {
            let t = transmission_tr(&sys.meshes, &d, cfg.energy)?;
            Ok((C64::new(t, 0.0), t))
        }
        Observable::FieldAndTransmission { .. } => Err(Error::Validation("field_and_transmission is a KG observable".into())),
    }
}

/// Relative errors of u₁ at the probes for one panel size.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub max_panel: f64,
    pub nodes: usize,
    pub errors: Vec<f64>,
}

impl ConvergenceRow {
    pub fn max_error(&self) -> f64 {
        self.errors.iter().copied().fold(0.0, f64::max)
    }
}

pub fn converge(cfg: &RunConfig, order: usize, max_panels: &[f64], probes: &[[f64; 2]]) -> Result<Vec<ConvergenceRow>> {
    let base = cfg.dirac_problem(&cfg.discretization)?;
    let oracle = FlatOracle::new(base.m(), base.e, &base.sources, base.direction)?;
    let exact = probes.iter().map(|&x| Ok(oracle.field(x)?[0])).collect::<Result<Vec<C64>>>()?;
    max_panels
        .iter()
        .map(|&mp| {
            let disc = DiscConfig { order, max_panel: mp, ..cfg.discretization.clone() };
            let sys = assemble_system(&cfg.dirac_problem(&disc)?)?;
            let d = solve_system(&sys, &SolveOptions { method: Method::Dense, tol: disc.tol })?;
            let ev = FieldEvaluator::new(&sys, &d);
            let errors = probes
                .iter()
                .zip(&exact)
                .map(|(&x, u)| Ok((ev.total(x)?[0] - u).norm() / u.norm()))
                .collect::<Result<Vec<f64>>>()?;
            Ok(ConvergenceRow { max_panel: mp, nodes: sys.meshes[0].n1(), errors })
        })
        .collect()
}

/// Convergence CSV `max_panel,nodes,err_1,...,err_k,err_max`.
pub fn write_convergence_csv(path: &Path, rows: &[ConvergenceRow]) -> Result<()> {
    let k = rows.first().map_or(0, |r| r.errors.len());
    let mut s = String::from("max_panel,nodes");
    for i in 1..=k {
        s.push_str(&format!(",err_{i}"));
    }
    s.push_str(",err_max\n");
    for r in rows {
        s.push_str(&format!("{:.16e},{}", r.max_panel, r.nodes));
        for e in r.errors.iter().chain(std::iter::once(&r.max_error())) {
            s.push_str(&format!(",{e:.16e}"));
        }
        s.push('\n');
    }
    std::fs::write(path, s).map_err(|e| Error::Io(e.to_string()))
}
