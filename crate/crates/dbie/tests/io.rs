use std::sync::Arc;

use dbie::field::{read_grid, read_param_csv, total_field_grid, write_grid, write_param_csv, FieldEvaluator, GridSpec};
use dbie::geometry::{curve_catalog, Params};
use dbie::mesh::{build_mesh, MeshOptions, TruncationWindows};
use dbie::solve::{fourier_coeff, read_density_csv, solve_dense, write_density_csv};
use dbie::source::{Region, SourceSpec};
use dbie::spinor::{C64, ZERO};
use dbie::system::{assemble_system, Discretization, LinearSystem, ProblemSpec};

fn tmp(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("dbie-io-{}-{name}", std::process::id()))
}

fn small_flat() -> LinearSystem {
    let c = Arc::new(curve_catalog("flat", &Params::new()).unwrap());
    let src = SourceSpec::new([0.0, 2.0], [C64::new(1.0, 0.0), ZERO], Region::Omega2);
    assemble_system(&ProblemSpec::dirac(c, 1.0, 0.5, vec![src], Discretization::new(8, 2.0))).unwrap()
}

#[test]
fn fourier_coeff_of_gaussian() {
    let c = Arc::new(curve_catalog("flat", &Params::new()).unwrap());
    let mesh = build_mesh(c, TruncationWindows::new((-10.0, 10.0), 2.0), &MeshOptions::new(16, 1.0)).unwrap();
    let vals: Vec<C64> = mesh.s.iter().map(|s| C64::new((-s * s).exp(), 0.0)).collect();
    for xi in [0.0, 0.7, -2.5, 4.0] {
        let got = fourier_coeff(&mesh, &vals, 0, (-10.0, 10.0), xi).unwrap();
        let want = std::f64::consts::PI.sqrt() * (-xi * xi / 4.0).exp();
        assert!((got - want).norm() < 1e-12, "ξ={xi}: {got} vs {want}");
    }
    // misaligned input and windows outside the support are rejected
    assert!(fourier_coeff(&mesh, &vals[1..], 1, (-10.0, 10.0), 0.0).is_err());
    assert!(fourier_coeff(&mesh, &vals, 0, (-20.0, 10.0), 0.0).is_err());
}

#[test]
fn density_csv_round_trip() {
    let sys = small_flat();
    let d = solve_dense(&sys, 1e-10).unwrap();
    let p = tmp("dens.csv");
    write_density_csv(&p, &sys, &d).unwrap();
    let rows = read_density_csv(&p).unwrap();
    let mesh = &sys.meshes[0];
    assert_eq!(rows.len(), mesh.total_nodes());
    let i1 = mesh.i1_nodes();
    for (j, r) in rows.iter().enumerate() {
        assert_eq!(r.interface, 1);
        assert_eq!(r.s, mesh.s[j]);
        assert_eq!(r.tau, d.interfaces[0].tau[j]);
        assert_eq!(r.mu, d.interfaces[0].mu[j]);
        let rho = if i1.contains(&j) { d.interfaces[0].rho[j - i1.start] } else { [ZERO; 2] };
        assert_eq!(r.rho, rho);
    }
    std::fs::write(&p, "interface_id,s\n").unwrap();
    assert!(read_density_csv(&p).is_err());
    std::fs::remove_file(&p).ok();
}

#[test]
fn grid_round_trip_and_mask() {
    let sys = small_flat();
    let d = solve_dense(&sys, 1e-10).unwrap();
    let ev = FieldEvaluator::new(&sys, &d);
    // row j = 2 lies on the interface and is masked; (0, 2) is the source
    let grid = GridSpec { nx: 5, ny: 5, x0: -2.0, y0: -2.0, dx: 1.0, dy: 1.0 };
    let g = total_field_grid(&ev, grid).unwrap();
    for i in 0..5 {
        assert!(g.get(i, 2)[0].re.is_nan());
        assert!(g.regions[2 * 5 + i].is_none());
    }
    assert!(g.get(2, 4)[0].re.is_nan());
    assert_eq!(g.regions[0], Some(Region::Omega1));
    assert_eq!(g.regions[4 * 5], Some(Region::Omega2));
    assert!(g.get(0, 0).iter().all(|v| v.re.is_finite()));
    let p = tmp("grid.bin");
    write_grid(&p, &g).unwrap();
    assert_eq!(std::fs::metadata(&p).unwrap().len(), 64 + 16 * 50);
    let h = read_grid(&p).unwrap();
    assert_eq!(h.grid, g.grid);
    assert_eq!(h.ncomp, 2);
    for (a, b) in h.values.iter().zip(&g.values) {
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());
    }
    let mut bytes = std::fs::read(&p).unwrap();
    bytes.truncate(100);
    std::fs::write(&p, &bytes).unwrap();
    assert!(read_grid(&p).is_err());
    bytes[0] = b'X';
    std::fs::write(&p, &bytes).unwrap();
    assert!(read_grid(&p).is_err());
    std::fs::remove_file(&p).ok();
}

#[test]
fn param_csv_round_trip() {
    let rows = vec![(0.1, C64::new(1.0 / 3.0, -2e-300)), (0.25, C64::new(f64::MAX, 0.0)), (-1.5, C64::new(-0.0, 7.0))];
    let p = tmp("sweep.csv");
    write_param_csv(&p, &rows).unwrap();
    assert_eq!(read_param_csv(&p).unwrap(), rows);
    std::fs::write(&p, "a,b\n").unwrap();
    assert!(read_param_csv(&p).is_err());
    std::fs::remove_file(&p).ok();
}
