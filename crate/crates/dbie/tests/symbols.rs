//! Flat-interface symbols: closed-form identities, and assembled operators
//! applied to windowed plane waves against the exact Fourier multipliers.

use dbie::oracle_flat::{symbol_a2, SymbolSet};
use dbie::operators::TwoMass;
use dbie::verify;

const M: f64 = 1.0;
const E: f64 = 0.5;

#[test]
fn a1_a2_times_inverse_is_identity() {
    for (m, e) in [(1.0, 0.5), (-1.0, 0.5), (2.0, -0.8), (0.7, 0.1)] {
        let err = verify::symbol_identity_error(m, e, 10_000).unwrap();
        assert!(err < 1e-12, "m={m} E={e}: {err:e}");
    }
}

#[test]
fn a2_is_singular_exactly_at_e() {
    let s = SymbolSet::new(M, E).unwrap();
    assert!(symbol_a2(E, M, E, &s.mask()).is_err());
    assert!(symbol_a2(-E, M, E, &s.mask()).is_err());
    assert!(symbol_a2(E + 1e-9, M, E, &s.mask()).is_ok());
}

#[test]
fn two_mass_symbol_degenerates_at_e() {
    let d = verify::two_mass_det_at_e(1.0, 2.0, 0.5).unwrap();
    assert!(d < 1e-12, "{d:e}");
    assert!(TwoMass::new(1.0, 2.0, 0.5).unwrap().symbol_b(0.0).det().norm() > 1e-3);
}

#[test]
fn kg_symbol_is_dirac_lower_component() {
    let s = SymbolSet::new(M, E).unwrap();
    for k in 0..1000 {
        let xi = -10.0 + (k as f64 + 0.5) * 0.02;
        let (raw, pre) = s.kg(xi);
        assert!((raw - s.a1(xi).0[1][1]).norm() < 1e-14);
        assert!((pre - s.a(xi).0[1][1]).norm() < 1e-13);
    }
}

#[test]
fn single_layer_reproduces_symbol() {
    let err = verify::single_layer_error(&verify::flat_probe_mesh(E).unwrap(), M, E);
    assert!(err < 1e-8, "{err:e}");
}

#[test]
fn resolvent_reproduces_symbol() {
    let err = verify::resolvent_error(&verify::flat_probe_mesh(E).unwrap(), M, E).unwrap();
    assert!(err < 1e-8, "{err:e}");
}

#[test]
fn interface_operator_reproduces_a1() {
    let err = verify::interface_operator_error(&verify::flat_probe_mesh(E).unwrap(), M, E).unwrap();
    assert!(err < 1e-8, "{err:e}");
}

#[test]
fn preconditioner_reproduces_a2() {
    let err = verify::preconditioner_error(&verify::flat_probe_mesh(E).unwrap(), M, E).unwrap();
    assert!(err < 1e-8, "{err:e}");
}

#[test]
fn dirac_system_reproduces_a1a2() {
    let err = verify::dirac_system_error(&verify::flat_probe_mesh(E).unwrap(), M, E).unwrap();
    assert!(err < 1e-8, "{err:e}");
}

#[test]
fn two_mass_first_factor_reproduces_b() {
    let err = verify::two_mass_error(&verify::flat_probe_mesh(E).unwrap(), 1.0, 2.0, E).unwrap();
    assert!(err < 1e-8, "{err:e}");
}

#[test]
fn kg_system_reproduces_preconditioned_symbol() {
    let err = verify::kg_system_error(&verify::flat_probe_mesh(E).unwrap(), M, E).unwrap();
    assert!(err < 1e-8, "{err:e}");
}
