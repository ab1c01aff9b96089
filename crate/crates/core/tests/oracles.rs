use wkbtm::exact::{exact_tc_parabolic, exact_tc_sech2, wkb_formula};
use wkbtm::polar::{compute_tc_de, nondimensionalize, PolarBoundary};
use wkbtm::potential::{make_constant, make_parabolic, make_sech2};
use wkbtm::transfer::{compute_tc_tm, BoundaryKind};
use wkbtm::Domain;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn kemble_reference_values() {
    assert_eq!(exact_tc_parabolic(0.0, 1.0), 0.5);
    let lo = exact_tc_parabolic(-1e-19, 1.0);
    let hi = exact_tc_parabolic(1e-19, 1.0);
    assert!((lo + hi - 1.0).abs() < 1e-15);
    assert!(lo < 0.5 && hi > 0.5);
}

#[test]
fn eckart_reference_is_monotone() {
    let mut prev = 0.0;
    for i in 0..=20 {
        let e = -2e-19 + 4e-19 * i as f64 / 20.0;
        let t = exact_tc_sech2(e, 1e-18, 1e-9).unwrap();
        assert!(t > prev && t < 1.0);
        prev = t;
    }
}

#[test]
fn wkb_formula_at_barrier_top() {
    assert!((wkb_formula(0.0) - 0.64).abs() < 1e-15);
    assert!(wkb_formula(30.0) < 1e-12);
}

#[test]
fn flat_potential_transmits_fully() {
    let flat = make_constant(-2e-19, Domain::standard()).unwrap();
    for kind in [BoundaryKind::PlaneWave, BoundaryKind::Wkb1, BoundaryKind::Wkb3] {
        let t = compute_tc_tm(&flat, 1e-19, 500, kind).unwrap().tc;
        assert!((t - 1.0).abs() < 1e-12, "{kind:?}: {t}");
    }
    for kind in [PolarBoundary::PlaneWave, PolarBoundary::Wkb] {
        let t = compute_tc_de(&flat, 1e-19, kind, 200_000).unwrap().tc;
        assert!((t - 1.0).abs() < 1e-10, "{kind:?}: {t}");
    }
}

#[test]
fn parabola_solvers_near_kemble() {
    let p = make_parabolic(1.0, Domain::standard()).unwrap();
    for e in [-1.5e-19, -0.5e-19, 0.5e-19, 1.5e-19] {
        let exact = exact_tc_parabolic(e, 1.0);
        let w1 = compute_tc_tm(&p, e, 20_000, BoundaryKind::Wkb1).unwrap().tc;
        let w3 = compute_tc_tm(&p, e, 20_000, BoundaryKind::Wkb3).unwrap().tc;
        let pw = compute_tc_tm(&p, e, 20_000, BoundaryKind::PlaneWave).unwrap().tc;
        assert!(rel(w3, exact) < rel(w1, exact), "E={e}");
        assert!(rel(w1, exact) < rel(pw, exact), "E={e}");
        assert!(rel(w3, exact) < 1e-5);
    }
}

#[test]
fn sech2_solvers_near_eckart() {
    let s = make_sech2(1e-18, 1e-9, Domain::standard()).unwrap();
    for e in [-1e-19, 0.0, 1e-19] {
        let exact = exact_tc_sech2(e, 1e-18, 1e-9).unwrap();
        let w3 = compute_tc_tm(&s, e, 20_000, BoundaryKind::Wkb3).unwrap().tc;
        let de = compute_tc_de(&s, e, PolarBoundary::Wkb, 100_000).unwrap().tc;
        assert!(rel(w3, exact) < 1e-4, "E={e}: {w3} vs {exact}");
        assert!(rel(de, exact) < 2e-3, "E={e}: {de} vs {exact}");
    }
}

#[test]
fn polar_energy_scale() {
    let p = make_parabolic(1.0, Domain::new(-2e-9, 2e-9).unwrap()).unwrap();
    let s = nondimensionalize(&p, 1e-19);
    let vs_volts = s.vs;
    assert!(rel(vs_volts, 2.381238779895034e-3) < 1e-12, "{vs_volts}");
}
