use std::sync::Arc;

use dbie::field::{radiation_diagnostic, FieldEvaluator, Radiation};
use dbie::geometry::{curve_catalog, Params};
use dbie::operators::Direction;
use dbie::solve::solve_dense;
use dbie::source::{Region, SourceSpec};
use dbie::spinor::{spinor_norm, C64, ZERO};
use dbie::system::{assemble_system, Discretization, ProblemSpec};

fn fig1(direction: Direction, buffer_scale: f64) -> ProblemSpec {
    let c = Arc::new(curve_catalog("flat", &Params::new()).unwrap());
    let src = SourceSpec::new([0.0, 2.0], [C64::new(1.0, 0.0), ZERO], Region::Omega2);
    let mut disc = Discretization::new(16, 1.0);
    disc.buffer_scale = buffer_scale;
    let mut spec = ProblemSpec::dirac(c, 1.0, 0.5, vec![src], disc);
    spec.direction = direction;
    spec
}

#[test]
fn radiation_and_one_way_transport() {
    for dir in [Direction::Outgoing, Direction::Incoming] {
        let spec = fig1(dir, 1.0);
        let sys = assemble_system(&spec).unwrap();
        let d = solve_dense(&sys, 1e-10).unwrap();
        let ev = FieldEvaluator::new(&sys, &d);
        let mesh = &sys.meshes[0];
        let probes = [-30.0, -20.0, -10.0, 10.0, 20.0, 30.0];
        let out = radiation_diagnostic(mesh, |x| ev.total(x), 0.5, 0.5, &probes, Radiation::Outgoing, 1e-2).unwrap();
        let inc = radiation_diagnostic(mesh, |x| ev.total(x), 0.5, 0.5, &probes, Radiation::Incoming, 1e-2).unwrap();
        let amp: Vec<f64> = probes.iter().map(|&t| spinor_norm(&ev.total([t, 0.5]).unwrap())).collect();
        // probes at |t| ≥ 20: the matching residual decays, the other one
        // carries the full mode on the side the wave travels to
        let (good, bad, far) = match dir {
            Direction::Outgoing => (&out, &inc, 0),
            Direction::Incoming => (&inc, &out, 5),
        };
        for k in [0, 1, 4, 5] {
            assert!(good[k] < 1e-4 * amp[far], "{dir:?} t={}: {:e}", probes[k], good[k]);
        }
        assert!(bad[far] > 0.5 * amp[far], "{dir:?}: {:e}", bad[far]);
        let near = 5 - far;
        assert!(amp[far] > 1e3 * amp[near], "{dir:?}: one-way ratio {:e}", amp[far] / amp[near]);
    }
}

#[test]
fn doubling_buffer_leaves_density_unchanged() {
    let a = assemble_system(&fig1(Direction::Outgoing, 1.0)).unwrap();
    let b = assemble_system(&fig1(Direction::Outgoing, 2.0)).unwrap();
    let (ma, mb) = (&a.meshes[0], &b.meshes[0]);
    assert_eq!(ma.windows.i1, mb.windows.i1);
    assert!(mb.total_nodes() > ma.total_nodes());
    let da = solve_dense(&a, 1e-10).unwrap();
    let db = solve_dense(&b, 1e-10).unwrap();
    let (sa, sb): (Vec<f64>, Vec<f64>) = (ma.i1_nodes().map(|i| ma.s[i]).collect(), mb.i1_nodes().map(|i| mb.s[i]).collect());
    assert_eq!(sa, sb);
    let diff = da.interfaces[0]
        .rho
        .iter()
        .zip(&db.interfaces[0].rho)
        .map(|(x, y)| spinor_norm(&[x[0] - y[0], x[1] - y[1]]))
        .fold(0.0, f64::max);
    assert!(diff < 1e-8, "{diff:e}");
}

#[test]
fn resolvent_sweep_matches_dense_and_is_faster() {
    use dbie::mesh::{build_mesh, MeshOptions, TruncationWindows};
    use dbie::operators::{Half, Resolvent, ResolventSpec};
    use rand::{Rng, SeedableRng};

    let c = Arc::new(curve_catalog("flat", &Params::new()).unwrap());
    // ≈10⁴ nodes of order 16
    let mesh = build_mesh(c, TruncationWindows::new((-150.0, 150.0), 7.5), &MeshOptions::new(16, 0.5)).unwrap();
    assert!(mesh.total_nodes() >= 10_000);
    let res = Resolvent::new(&mesh, ResolventSpec::outgoing(0.5), 0..mesh.panels.len()).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let rhos: Vec<Vec<C64>> = (0..10)
        .map(|_| (0..mesh.total_nodes()).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
        .collect();
    let t0 = std::time::Instant::now();
    let fast: Vec<Vec<C64>> = rhos.iter().map(|r| res.apply(Half::Full, r)).collect();
    let t_fast = t0.elapsed();
    let t0 = std::time::Instant::now();
    let dense = res.apply_dense(Half::Full, &rhos);
    let t_dense = t0.elapsed();
    let mut err: f64 = 0.0;
    for (f, d) in fast.iter().zip(&dense) {
        let scale = d.iter().map(|v| v.norm()).fold(0.0, f64::max);
        err = err.max(f.iter().zip(d).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale);
    }
    assert!(err < 1e-12, "{err:e}");
    assert!(t_dense.as_secs_f64() > 50.0 * t_fast.as_secs_f64(), "{t_dense:?} vs {t_fast:?}");
}
