use std::sync::Arc;

use dbie::field::{jump_check, jump_identity_residual, pde_residual, FieldEvaluator};
use dbie::geometry::{curve_catalog, Params};
use dbie::operators::Direction;
use dbie::oracle_flat::FlatOracle;
use dbie::solve::solve_dense;
use dbie::source::{Region, SourceSpec};
use dbie::spinor::{spinor_norm, C64, ZERO};
use dbie::system::{assemble_system, Discretization, ProblemSpec};

fn source() -> SourceSpec {
    SourceSpec::new([0.0, 2.0], [C64::new(1.0, 0.0), ZERO], Region::Omega2)
}

#[test]
fn flat_field_matches_oracle() {
    let c = Arc::new(curve_catalog("flat", &Params::new()).unwrap());
    let spec = ProblemSpec::dirac(c, 1.0, 0.5, vec![source()], Discretization::new(16, 1.0));
    let sys = assemble_system(&spec).unwrap();
    let d = solve_dense(&sys, 1e-10).unwrap();
    let ev = FieldEvaluator::new(&sys, &d);
    let oracle = FlatOracle::new(1.0, 0.5, &[source()], Direction::Outgoing).unwrap();
    for x in [[3.0, 1.0], [-2.0, -1.5], [0.0, 0.5], [5.0, -0.2], [1.0, 0.01], [-1.0, -0.01]] {
        let (a, b) = (ev.total(x).unwrap(), oracle.field(x).unwrap());
        let err = spinor_norm(&[a[0] - b[0], a[1] - b[1]]);
        assert!(err < 1e-8, "{x:?}: {err:e}");
    }
    let r = pde_residual(&ev, [2.0, 1.0], 1e-3).unwrap();
    assert!(spinor_norm(&r) < 1e-6, "{:e}", spinor_norm(&r));
    let jump = jump_check(&ev, 97).unwrap();
    assert!(jump < 1e-6, "{jump:e}");
    let i1 = sys.meshes[0].i1_nodes();
    let nodes: Vec<usize> = i1.clone().step_by(131).collect();
    let id = jump_identity_residual(&ev, &nodes).unwrap();
    assert!(id < 1e-6, "{id:e}");
}

fn params(kv: &[(&str, f64)]) -> Params {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn residual_norm(ev: &FieldEvaluator, x: [f64; 2]) -> f64 {
    spinor_norm(&pde_residual(ev, x, 1e-3).unwrap())
}

#[test]
fn curved_interface_jump_and_pde() {
    let c = Arc::new(
        curve_catalog("gaussian_bump_sum", &params(&[("amp0", 1.0), ("center0", 0.0), ("width0", 1.0)])).unwrap(),
    );
    let spec = ProblemSpec::dirac(c, 1.0, 0.5, vec![SourceSpec::new([0.5, 2.5], [C64::new(1.0, 0.0), ZERO], Region::Omega2)], Discretization::new(16, 1.0));
    let sys = assemble_system(&spec).unwrap();
    let d = solve_dense(&sys, 1e-10).unwrap();
    let ev = FieldEvaluator::new(&sys, &d);
    let jump = jump_check(&ev, 53).unwrap();
    assert!(jump < 1e-6, "{jump:e}");
    for x in [[1.0, 0.5], [-2.0, -1.0], [3.0, 1.0]] {
        let r = residual_norm(&ev, x);
        assert!(r < 1e-6, "{x:?}: {r:e}");
    }
}

#[test]
fn wedge_pair_jump() {
    let (g1, g2) = dbie::geometry::curve_pair_catalog("wedge_pair", &params(&[("a", 0.5), ("d", 1.0)])).unwrap();
    let src = SourceSpec::new([0.0, 0.0], [C64::new(1.0, 0.0), ZERO], Region::Omega1);
    let spec = ProblemSpec::pair(Arc::new(g1), Arc::new(g2), 1.0, 0.5, vec![src], Discretization::new(12, 2.0));
    let sys = assemble_system(&spec).unwrap();
    let d = solve_dense(&sys, 1e-10).unwrap();
    let ev = FieldEvaluator::new(&sys, &d);
    let jump = jump_check(&ev, 71).unwrap();
    let tr = dbie::field::transmission_tr(&sys.meshes, &d, 0.5).unwrap();
    // source on the symmetry axis splits evenly
    assert!((tr - 0.5).abs() < 1e-6, "{tr}");
    assert!(jump < 1e-6, "{jump:e}");
    for x in [[0.5, 0.3], [-2.0, -3.0], [3.0, 4.0]] {
        let r = residual_norm(&ev, x);
        assert!(r < 1e-6, "{x:?}: {r:e}");
    }
}

#[test]
fn two_mass_jump_and_equal_mass_consistency() {
    let c = Arc::new(curve_catalog("sine_packet", &Params::new()).unwrap());
    let disc = Discretization::new(16, 1.0);
    let spec = ProblemSpec::two_mass(c.clone(), 1.0, 2.0, 0.5, vec![source()], disc.clone());
    let sys = assemble_system(&spec).unwrap();
    let d = solve_dense(&sys, 1e-10).unwrap();
    let ev = FieldEvaluator::new(&sys, &d);
    let jump = jump_check(&ev, 61).unwrap();
    assert!(jump < 1e-6, "{jump:e}");

    let a = ProblemSpec::two_mass(c.clone(), 1.0, 1.0, 0.5, vec![source()], disc.clone());
    let b = ProblemSpec::dirac(c, 1.0, 0.5, vec![source()], disc);
    let (sa, sb) = (assemble_system(&a).unwrap(), assemble_system(&b).unwrap());
    let (da, db) = (solve_dense(&sa, 1e-10).unwrap(), solve_dense(&sb, 1e-10).unwrap());
    let (ea, eb) = (FieldEvaluator::new(&sa, &da), FieldEvaluator::new(&sb, &db));
    for x in [[1.0, 1.5], [-2.0, -1.0], [4.0, 0.7]] {
        let (u, v) = (ea.total(x).unwrap(), eb.total(x).unwrap());
        let err = spinor_norm(&[u[0] - v[0], u[1] - v[1]]);
        assert!(err < 1e-8, "{x:?}: {err:e}");
    }
}
