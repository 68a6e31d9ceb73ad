use std::sync::Arc;

use dbie::geometry::{curve_catalog, Params};
use dbie::operators::Direction;
use dbie::oracle_flat::FlatOracle;
use dbie::solve::solve_dense;
use dbie::source::{Region, SourceSpec};
use dbie::spinor::{C64, ZERO};
use dbie::system::{assemble_system, Discretization, ProblemSpec};

fn fig1_source() -> SourceSpec {
    SourceSpec::new([0.0, 2.0], [C64::new(1.0, 0.0), ZERO], Region::Omega2)
}

#[test]
fn flat_density_matches_oracle() {
    let c = Arc::new(curve_catalog("flat", &Params::new()).unwrap());
    let spec = ProblemSpec::dirac(c, 1.0, 0.5, vec![fig1_source()], Discretization::new(16, 1.0));
    let sys = assemble_system(&spec).unwrap();
    let d = solve_dense(&sys, 1e-10).unwrap();
    let oracle = FlatOracle::new(1.0, 0.5, &[fig1_source()], Direction::Outgoing).unwrap();
    let mesh = &sys.meshes[0];
    let mut err: f64 = 0.0;
    let mut peak: f64 = 0.0;
    for (ii, i) in mesh.i1_nodes().enumerate() {
        let r = oracle.rho(mesh.s[i]);
        let got = d.interfaces[0].rho[ii];
        err = err.max((r[0] - got[0]).norm().max((r[1] - got[1]).norm()));
        peak = peak.max(r[0].norm().max(r[1].norm()));
    }
    let mut terr: f64 = 0.0;
    for i in 0..mesh.total_nodes() {
        let r = oracle.mu(mesh.s[i]);
        let got = d.interfaces[0].mu[i];
        terr = terr.max((r[0] - got[0]).norm().max((r[1] - got[1]).norm()));
    }
    assert!(err < 1e-8 * peak.max(1.0));
}
