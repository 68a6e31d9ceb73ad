use std::sync::Arc;

use dbie::geometry::{curve_catalog, Params};
use dbie::kg::{
    kg_assemble, kg_field, kg_flux_residual, kg_reference_problem, kg_solve, kg_transmission_solve, read_kg_sweep_csv,
    source_tail, write_kg_sweep_csv, KgFlatOracle, KgProblem, KgSource, KgSweepRow, Tail,
};
use dbie::operators::Direction;
use dbie::spinor::C64;
use dbie::system::Discretization;

fn src(x: [f64; 2]) -> KgSource {
    KgSource { location: x, amplitude: C64::new(1.0, 0.0) }
}

#[test]
fn flat_kg_matches_oracle() {
    let c = Arc::new(curve_catalog("flat", &Params::new()).unwrap());
    let p = KgProblem::new(c, 1.0, 0.5, vec![src([0.0, 2.0])], Discretization::new(16, 1.0));
    let sys = kg_assemble(&p).unwrap();
    let d = kg_solve(&sys).unwrap();
    let oracle = KgFlatOracle::new(1.0, 0.5, &[src([0.0, 2.0])], Direction::Outgoing).unwrap();
    let mut err: f64 = 0.0;
    for i in sys.mesh.i1_nodes().step_by(7) {
        err = err.max((oracle.mu(sys.mesh.s[i]) - d.mu[i]).norm());
    }
    assert!(err < 1e-8);
    for x in [[3.0, 1.0], [-2.0, -1.5], [0.0, 0.5], [1.0, 0.01]] {
        let e = (kg_field(&sys, &d, x).unwrap() - oracle.field(x).unwrap()).norm();
        assert!(e < 1e-8, "{x:?}: {e:e}");
    }
    let i = sys.mesh.i1_nodes().start + sys.mesh.n1() / 2 + 3;
    let r = kg_flux_residual(&sys, &d, i, 0.01).unwrap();
    assert!(r < 1e-6);
}

#[test]
fn flat_line_transmits_fully() {
    let c = Arc::new(curve_catalog("shifted_flat", &[("offset".to_string(), 0.25)].into_iter().collect()).unwrap());
    let s = vec![KgSource { location: [6.0, 1.25], amplitude: C64::new(1.0, 0.0) }];
    let p = KgProblem::new(c, 1.0, 0.6, s, Discretization::new(12, 2.0));
    assert_eq!(source_tail(&p).unwrap(), Tail::Right);
    let (_, _, t) = kg_transmission_solve(&p).unwrap();
    assert!((t.t - 1.0).abs() < 1e-12, "{t:?}");
    assert!((t.balance - 1.0).abs() < 1e-8, "{t:?}");
}

#[test]
fn tilted_tails_are_rejected() {
    let c = Arc::new(curve_catalog("circle_arc", &Params::new()).unwrap());
    let p = KgProblem::new(c, 1.0, 0.6, vec![KgSource { location: [0.0, 3.0], amplitude: C64::new(1.0, 0.0) }], Discretization::new(8, 2.0));
    assert!(kg_reference_problem(&p).is_err());
}

#[test]
fn kg_sweep_csv_round_trip() {
    let rows = vec![
        KgSweepRow { e: 0.05, value: C64::new(1.0 / 3.0, -1e-200), t: 0.25 },
        KgSweepRow { e: 0.5, value: C64::new(f64::NAN, f64::NAN), t: f64::NAN },
    ];
    let p = std::env::temp_dir().join(format!("dbie-kgsweep-{}.csv", std::process::id()));
    write_kg_sweep_csv(&p, &rows).unwrap();
    let back = read_kg_sweep_csv(&p).unwrap();
    std::fs::remove_file(&p).ok();
    assert_eq!(back[0], rows[0]);
    assert!(back[1].value.re.is_nan() && back[1].t.is_nan() && back[1].e == 0.5);
}
