use dbie::field::{extrapolate, extrapolate_poly, transmission_ratio};
use dbie::geometry::cobmat_v;
use dbie::oracle_flat::SymbolSet;
use dbie::source::Region;
use dbie::spinor::{dot_sigma, Mat2, C64, ONE, ZERO};
use proptest::prelude::*;

fn mass_energy() -> impl Strategy<Value = (f64, f64)> {
    (0.1f64..6.0, -0.95f64..0.95, any::<bool>()).prop_map(|(m, f, neg)| (if neg { -m } else { m }, f * m))
}

fn close(a: &Mat2, b: &Mat2, tol: f64) -> bool {
    (0..2).all(|i| (0..2).all(|j| (a.get(i, j) - b.get(i, j)).norm() <= tol))
}

proptest! {
    #[test]
    fn symbol_product_inverts((m, e) in mass_energy(), xi in -50.0f64..50.0) {
        let s = SymbolSet::new(m, e).unwrap();
        prop_assume!((xi.abs() - e.abs()).abs() > 1e-3);
        let id = s.a1a2(xi) * s.a_inv(xi);
        prop_assert!(close(&id, &Mat2::scalar(ONE), 1e-9), "{id:?}");
        prop_assert!(close(&s.a1a2(xi), &s.a(xi), 1e-9 * (1.0 + s.a(xi).max_abs())));
    }

    #[test]
    fn kg_symbol_matches_dirac_entry((m, e) in mass_energy(), xi in -50.0f64..50.0) {
        let s = SymbolSet::new(m.abs(), e).unwrap();
        let (_, pre) = s.kg(xi);
        prop_assert!((pre - s.a(xi).get(1, 1)).norm() < 1e-12);
    }

    #[test]
    fn rotation_is_unitary_and_maps_tangent_to_sigma3(phi in 0.0f64..std::f64::consts::TAU) {
        let n = [phi.cos(), phi.sin()];
        let v = cobmat_v(n).unwrap();
        prop_assert!(close(&(v.adjoint() * v), &Mat2::scalar(ONE), 1e-14));
        let d = v.adjoint() * dot_sigma([-n[1], n[0]]) * v;
        prop_assert!(close(&d, &Mat2::real_diag(-1.0, 1.0), 1e-14));
        prop_assert!(cobmat_v([2.0 * n[0], 2.0 * n[1]]).is_err());
    }

    #[test]
    fn transmission_ratio_in_unit_interval(a in 0.0f64..1e6, b in 0.0f64..1e6) {
        match transmission_ratio(a, b) {
            Ok(t) => prop_assert!((0.0..=1.0).contains(&t)),
            Err(_) => prop_assert!(a < 1e-20 && b < 1e-20),
        }
    }

    #[test]
    fn extrapolation_exact_for_low_degree(c in prop::array::uniform4(-10.0f64..10.0), scale in 1e-4f64..1.0) {
        let p = |x: f64| C64::new(c[0] + c[1] * x + c[2] * x * x + c[3] * x * x * x, c[1] - x);
        let d = [scale, 2.0 * scale, 3.5 * scale, 5.0 * scale];
        let v: Vec<C64> = d.iter().map(|&x| p(x)).collect();
        let (val, der) = extrapolate_poly(&d, &v);
        let tol = 1e-7 * (1.0 + c.iter().map(|x| x.abs()).sum::<f64>());
        prop_assert!((val - p(0.0)).norm() < tol);
        prop_assert!((der - C64::new(c[1], -1.0)).norm() < tol / scale);
        let q = |x: f64| [C64::new(c[0] + c[1] * x + c[2] * x * x, 0.0), C64::new(0.0, c[3] * x)];
        let d3 = [scale, 0.1 * scale, 0.01 * scale];
        let e = extrapolate(&d3, &[q(d3[0]), q(d3[1]), q(d3[2])]);
        prop_assert!((e[0] - c[0]).norm() < tol && (e[1] - ZERO).norm() < tol);
    }

    #[test]
    fn region_name_round_trip(k in 0usize..3) {
        let r = [Region::Omega0, Region::Omega1, Region::Omega2][k];
        prop_assert_eq!(Region::parse(r.name()).unwrap(), r);
    }

    #[test]
    fn param_csv_round_trip(rows in prop::collection::vec((-1e10f64..1e10, -1e300f64..1e300, -1e-300f64..1e-300), 0..20)) {
        let rows: Vec<(f64, C64)> = rows.into_iter().map(|(p, a, b)| (p, C64::new(a, b))).collect();
        let path = std::env::temp_dir().join(format!("dbie-prop-{}.csv", std::process::id()));
        dbie::field::write_param_csv(&path, &rows).unwrap();
        let back = dbie::field::read_param_csv(&path).unwrap();
        std::fs::remove_file(&path).ok();
        prop_assert_eq!(back, rows);
    }
}
