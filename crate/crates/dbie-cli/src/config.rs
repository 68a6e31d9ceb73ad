//! Run configuration: one JSON document per run.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use dbie::error::{Error, Result};
use dbie::geometry::{curve_catalog, curve_pair_catalog, Curve};
use dbie::kg::{KgProblem, KgSource};
use dbie::operators::Direction;
use dbie::source::{Region, SourceSpec};
use dbie::spinor::C64;
use dbie::system::{Discretization, ProblemSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Dirac1,
    Dirac2,
    DiracTwoMass,
    Kg,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionName {
    #[default]
    Outgoing,
    Incoming,
}

impl From<DirectionName> for Direction {
    fn from(d: DirectionName) -> Self {
        match d {
            DirectionName::Outgoing => Direction::Outgoing,
            DirectionName::Incoming => Direction::Incoming,
        }
    }
}

/// Curve family from the catalog plus its parameter map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

/// Source position relative to an interface: γ_k(s) + offset·n̂(s).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Anchor {
    /// 1-based interface index.
    pub interface: usize,
    pub s: f64,
    pub offset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    #[serde(default)]
    pub location: Option<[f64; 2]>,
    #[serde(default)]
    pub anchor: Option<Anchor>,
    /// Spinor amplitude [[re, im], [re, im]] (KG uses the first entry).
    #[serde(default = "default_amplitude")]
    pub amplitude: [[f64; 2]; 2],
    /// omega0 | omega1 | omega2; defaults to the side of the anchor offset,
    /// otherwise Ω₂ (one interface) or Ω₀ (two).
    #[serde(default)]
    pub region: Option<String>,
}

fn default_amplitude() -> [[f64; 2]; 2] {
    [[1.0, 0.0], [0.0, 0.0]]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscConfig {
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_panel")]
    pub max_panel: f64,
    /// Required relative residual of the linear solve.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_trunc")]
    pub trunc_tol: f64,
    #[serde(default = "default_scale")]
    pub buffer_scale: f64,
}

fn default_order() -> usize {
    16
}
fn default_panel() -> f64 {
    1.0
}
fn default_tol() -> f64 {
    1e-10
}
fn default_trunc() -> f64 {
    1e-12
}
fn default_scale() -> f64 {
    1.0
}

impl Default for DiscConfig {
    fn default() -> Self {
        Self {
            order: default_order(),
            max_panel: default_panel(),
            tol: default_tol(),
            trunc_tol: default_trunc(),
            buffer_scale: default_scale(),
        }
    }
}

impl DiscConfig {
    pub fn to_disc(&self) -> Discretization {
        let mut d = Discretization::new(self.order, self.max_panel);
        d.trunc_tol = self.trunc_tol;
        d.buffer_scale = self.buffer_scale;
        d
    }
}

/// Explicit values or an inclusive linspace, merged and sorted.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamGrid {
    #[serde(default)]
    pub values: Vec<f64>,
    #[serde(default)]
    pub linspace: Option<(f64, f64, usize)>,
}

impl ParamGrid {
    pub fn points(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        if let Some((a, b, n)) = self.linspace {
            match n {
                0 => {}
                1 => v.push(a),
                _ => v.extend((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64)),
            }
        }
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Energy,
    Distance,
    Angle,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Energy => "energy",
            SweepParam::Distance => "distance",
            SweepParam::Angle => "angle",
        }
    }
}

/// Quantity recorded per sweep value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Observable {
    /// Component (0 or 1) of the total field at a point.
    Field { point: [f64; 2], component: usize },
    /// T_R for two interfaces, KG transmission T for the KG model.
    Transmission,
    /// KG only: field at a point and transmission (four-column sweep CSV).
    FieldAndTransmission { point: [f64; 2] },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub dx: f64,
    pub dy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentKind {
    Solve,
    Grid {
        grid: GridConfig,
    },
    Sweep {
        param: SweepParam,
        grid: ParamGrid,
        observable: Observable,
        /// Discretization override for the sweep solves.
        #[serde(default)]
        discretization: Option<DiscConfig>,
    },
    /// Dirac energy sweep of u₁ at a point and the KG sweep of u and T on
    /// the same curve, mass and sources.
    KgCompare {
        grid: ParamGrid,
        point: [f64; 2],
        #[serde(default)]
        discretization: Option<DiscConfig>,
    },
    /// Flat interface only: relative error of u₁ at probe points against the
    /// Fourier oracle for a sequence of panel sizes.
    Converge {
        order: usize,
        max_panels: Vec<f64>,
        probes: Vec<[f64; 2]>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    #[serde(flatten)]
    pub kind: ExperimentKind,
    /// Energy override for this experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
    /// Suffix for the output file names.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
}

impl Experiment {
    pub fn verb(&self) -> &'static str {
        match self.kind {
            ExperimentKind::Solve => "solve",
            ExperimentKind::Grid { .. } => "grid",
            ExperimentKind::Sweep { .. } | ExperimentKind::KgCompare { .. } => "sweep",
            ExperimentKind::Converge { .. } => "converge",
        }
    }

    pub fn file(&self, stem: &str, ext: &str) -> String {
        match &self.tag {
            Some(t) => format!("{stem}_{t}.{ext}"),
            None => format!("{stem}.{ext}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub problem: ProblemKind,
    /// Single interface (dirac1, dirac_two_mass, kg).
    #[serde(default)]
    pub curve: Option<CurveConfig>,
    /// Interface pair (dirac2).
    #[serde(default)]
    pub curve_pair: Option<CurveConfig>,
    #[serde(default)]
    pub m: Option<f64>,
    #[serde(default)]
    pub m1: Option<f64>,
    #[serde(default)]
    pub m2: Option<f64>,
    pub energy: f64,
    #[serde(default)]
    pub direction: DirectionName,
    pub sources: Vec<SourceConfig>,
    #[serde(default)]
    pub discretization: DiscConfig,
    #[serde(default)]
    pub experiments: Vec<Experiment>,
}

fn default_name() -> String {
    "run".into()
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| invalid(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        format!("{:x}", Sha256::digest(text.as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        let need = |x: Option<f64>, name: &str| x.ok_or_else(|| invalid(format!("{:?} needs {name}", self.problem)));
        match self.problem {
            ProblemKind::Dirac1 | ProblemKind::Dirac2 | ProblemKind::Kg => {
                let m = need(self.m, "m")?;
                check_energy(m, self.energy)?;
            }
            ProblemKind::DiracTwoMass => {
                let (m1, m2) = (need(self.m1, "m1")?, need(self.m2, "m2")?);
                check_energy(m1, self.energy)?;
                check_energy(m2, self.energy)?;
            }
        }
        match (self.problem, &self.curve, &self.curve_pair) {
            (ProblemKind::Dirac2, _, None) => return Err(invalid("dirac2 needs curve_pair")),
            (ProblemKind::Dirac2, Some(_), _) => return Err(invalid("dirac2 takes curve_pair, not curve")),
            (ProblemKind::Dirac2, None, Some(_)) => {}
            (_, None, _) => return Err(invalid("single-interface problems need curve")),
            (_, Some(_), Some(_)) => return Err(invalid("single-interface problems take curve, not curve_pair")),
            _ => {}
        }
        if self.sources.is_empty() {
            return Err(invalid("at least one source required"));
        }
        for s in &self.sources {
            if s.location.is_some() == s.anchor.is_some() {
                return Err(invalid("each source needs exactly one of location and anchor"));
            }
        }
        let d = &self.discretization;
        if d.order < 2 || !(d.max_panel > 0.0) || !(d.tol > 0.0) || !(d.trunc_tol > 0.0 && d.trunc_tol < 1.0) {
            return Err(invalid("discretization needs order ≥ 2 and positive max_panel, tol, trunc_tol < 1"));
        }
        for ex in &self.experiments {
            if let Some(e) = ex.energy {
                self.with_energy(e).validate_energy()?;
            }
            match &ex.kind {
                ExperimentKind::Sweep { param, grid, observable, .. } => {
                    if grid.points().is_empty() {
                        return Err(invalid("sweep grid is empty"));
                    }
                    let pair = self.problem == ProblemKind::Dirac2;
                    if matches!(param, SweepParam::Distance | SweepParam::Angle) && !pair {
                        return Err(invalid("distance and angle sweeps need two interfaces"));
                    }
                    match observable {
                        Observable::Transmission if !pair && self.problem != ProblemKind::Kg => {
                            return Err(invalid("transmission needs two interfaces or the KG model"))
                        }
                        Observable::FieldAndTransmission { .. } if self.problem != ProblemKind::Kg => {
                            return Err(invalid("field_and_transmission is a KG observable"))
                        }
                        Observable::Field { component, .. } if *component > 1 => {
                            return Err(invalid("field component must be 0 or 1"))
                        }
                        _ => {}
                    }
                }
                ExperimentKind::Converge { max_panels, probes, order } => {
                    let flat = self.curve.as_ref().is_some_and(|c| c.family == "flat" && c.params.is_empty());
                    if self.problem != ProblemKind::Dirac1 || !flat {
                        return Err(invalid("converge needs dirac1 on the flat curve (oracle)"));
                    }
                    if max_panels.is_empty() || probes.is_empty() || *order < 2 {
                        return Err(invalid("converge needs panel sizes, probes and order ≥ 2"));
                    }
                }
                ExperimentKind::KgCompare { grid, .. } => {
                    if self.problem != ProblemKind::Dirac1 {
                        return Err(invalid("kg_compare needs a dirac1 config"));
                    }
                    for e in grid.points() {
                        self.with_energy(e).validate_energy()?;
                    }
                }
                ExperimentKind::Grid { grid } => {
                    if grid.nx == 0 || grid.ny == 0 || !(grid.dx > 0.0 && grid.dy > 0.0) {
                        return Err(invalid("grid needs nx, ny ≥ 1 and positive spacing"));
                    }
                }
                ExperimentKind::Solve => {}
            }
        }
        Ok(())
    }

    fn validate_energy(&self) -> Result<()> {
        for m in [self.m, self.m1, self.m2].into_iter().flatten() {
            check_energy(m, self.energy)?;
        }
        Ok(())
    }

    /// The KG model on the same curve, mass and sources.
    pub fn as_kg(&self) -> Self {
        let mut c = self.clone();
        c.problem = ProblemKind::Kg;
        c.experiments.clear();
        c
    }

    pub fn with_energy(&self, e: f64) -> Self {
        let mut c = self.clone();
        c.energy = e;
        c
    }

    /// Copy with one sweep parameter set.
    pub fn with_param(&self, p: SweepParam, v: f64) -> Self {
        let mut c = self.clone();
        match p {
            SweepParam::Energy => c.energy = v,
            SweepParam::Distance => {
                if let Some(cp) = c.curve_pair.as_mut() {
                    cp.params.insert("d".into(), v);
                }
            }
            SweepParam::Angle => {
                if let Some(cp) = c.curve_pair.as_mut() {
                    cp.params.remove("a");
                    cp.params.insert("theta".into(), v);
                }
            }
        }
        c
    }

    pub fn curves(&self) -> Result<Vec<Arc<Curve>>> {
        match (&self.curve, &self.curve_pair) {
            (Some(c), None) => Ok(vec![Arc::new(curve_catalog(&c.family, &c.params)?)]),
            (None, Some(p)) => {
                let (a, b) = curve_pair_catalog(&p.family, &p.params)?;
                Ok(vec![Arc::new(a), Arc::new(b)])
            }
            _ => Err(invalid("exactly one of curve and curve_pair required")),
        }
    }

    fn sources(&self, curves: &[Arc<Curve>]) -> Result<Vec<SourceSpec>> {
        let two = curves.len() == 2;
        self.sources
            .iter()
            .map(|s| {
                let (location, side) = match (s.location, s.anchor) {
                    (Some(x), None) => (x, None),
                    (None, Some(a)) => {
                        let c = curves
                            .get(a.interface.wrapping_sub(1))
                            .ok_or_else(|| invalid(format!("anchor interface {} does not exist", a.interface)))?;
                        let f = c.eval(a.s)?;
                        let x = [f.point[0] + a.offset * f.normal[0], f.point[1] + a.offset * f.normal[1]];
                        let region = match (two, a.interface, a.offset > 0.0) {
                            (false, _, true) | (true, 2, true) => Region::Omega2,
                            (true, 1, false) => Region::Omega0,
                            _ => Region::Omega1,
                        };
                        (x, Some(region))
                    }
                    _ => return Err(invalid("each source needs exactly one of location and anchor")),
                };
                let region = match (&s.region, side) {
                    (Some(r), _) => Region::parse(r)?,
                    (None, Some(r)) => r,
                    (None, None) if two => Region::Omega0,
                    (None, None) => Region::Omega2,
                };
                let a = s.amplitude;
                Ok(SourceSpec::new(location, [C64::new(a[0][0], a[0][1]), C64::new(a[1][0], a[1][1])], region))
            })
            .collect()
    }

    /// Dirac problem (dirac1, dirac2, dirac_two_mass).
    pub fn dirac_problem(&self, disc: &DiscConfig) -> Result<ProblemSpec> {
        let curves = self.curves()?;
        let sources = self.sources(&curves)?;
        let d = disc.to_disc();
        let mut spec = match self.problem {
            ProblemKind::Dirac1 => ProblemSpec::dirac(curves[0].clone(), self.m.unwrap_or(0.0), self.energy, sources, d),
            ProblemKind::Dirac2 => {
                ProblemSpec::pair(curves[0].clone(), curves[1].clone(), self.m.unwrap_or(0.0), self.energy, sources, d)
            }
            ProblemKind::DiracTwoMass => ProblemSpec::two_mass(
                curves[0].clone(),
                self.m1.unwrap_or(0.0),
                self.m2.unwrap_or(0.0),
                self.energy,
                sources,
                d,
            ),
            ProblemKind::Kg => return Err(invalid("kg config is not a Dirac problem")),
        };
        spec.direction = self.direction.into();
        spec.validate()?;
        Ok(spec)
    }

    pub fn kg_problem(&self, disc: &DiscConfig) -> Result<KgProblem> {
        if self.problem != ProblemKind::Kg {
            return Err(invalid("not a kg config"));
        }
        let curves = self.curves()?;
        let sources = self
            .sources(&curves)?
            .iter()
            .map(|s| KgSource { location: s.location, amplitude: s.amplitude[0] })
            .collect();
        let mut p = KgProblem::new(curves[0].clone(), self.m.unwrap_or(0.0), self.energy, sources, disc.to_disc());
        p.direction = self.direction.into();
        p.validate()?;
        Ok(p)
    }
}

fn check_energy(m: f64, e: f64) -> Result<()> {
    if !(m.is_finite() && e.is_finite() && e != 0.0 && e.abs() < m.abs()) {
        return Err(Error::Precondition(format!("0 < |E| < |m| required (m={m}, E={e})")));
    }
    Ok(())
}
