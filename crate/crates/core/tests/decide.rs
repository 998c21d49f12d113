use coposcope::decide::{decide, preclude_copositivity, Certificate, DecideConfig};
use coposcope::polya::PolyaMode;
use coposcope::rational::{int, rat};
use coposcope::symanzik::{expand_four_leg, second_symanzik};
use coposcope::{library, FourLegBasis, KinematicParams, Rational};

fn parachute_z(s: Rational) -> KinematicParams {
    let b = FourLegBasis { masses: vec![int(1); 4], leg_masses: [int(0), int(0), int(1), int(1)], s, t: int(1) };
    expand_four_leg(&b, &library::parachute()).unwrap()
}

#[test]
fn repeated_runs_agree() {
    let g = library::parachute();
    let cfg = DecideConfig::default();
    for s in [rat(39, 10), rat(41, 10)] {
        let z = parachute_z(s);
        let a = serde_json::to_string(&decide(&g, &z, &cfg).unwrap().to_json()).unwrap();
        let b = serde_json::to_string(&decide(&g, &z, &cfg).unwrap().to_json()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn certificate_rejects_another_polynomial() {
    let g = library::parachute();
    let cfg = DecideConfig::default();
    let cert = decide(&g, &parachute_z(rat(41, 10)), &cfg).unwrap();
    let other = second_symanzik(&g, &parachute_z(rat(42, 10))).unwrap();
    assert!(cert.verify(&other).is_err());
}

#[test]
fn preclusion_reports_the_edge_face() {
    let g = library::parachute();
    let p = preclude_copositivity(&g, &parachute_z(rat(41, 10)), &DecideConfig::default()).unwrap().unwrap();
    assert_eq!(p.chain.len(), 1);
    assert_eq!(p.chain[0].labels(), vec![3, 4]);
    assert_eq!(p.witness.value, rat(-41, 400));
    let f = second_symanzik(&g, &parachute_z(rat(41, 10))).unwrap();
    assert!(p.lifted.verify(&f));
    assert!(preclude_copositivity(&g, &parachute_z(rat(39, 10)), &DecideConfig::default()).unwrap().is_none());
}

#[test]
fn zero_mass_without_witness_is_an_error() {
    let g = library::bubble();
    let b = FourLegBasis { masses: vec![int(0), int(1)], leg_masses: [int(0), int(0), int(0), int(0)], s: int(-1), t: int(0) };
    let z = expand_four_leg(&b, &g).unwrap();
    assert!(decide(&g, &z, &DecideConfig::default()).is_err());
}

#[test]
fn negative_mass_is_caught_by_the_face_search() {
    let g = library::bubble();
    let b = FourLegBasis { masses: vec![int(-1), int(1)], leg_masses: [int(0), int(0), int(0), int(0)], s: int(0), t: int(0) };
    let z = expand_four_leg(&b, &g).unwrap();
    let cert = decide(&g, &z, &DecideConfig::default()).unwrap();
    assert_eq!(cert.exit_code(), 1);
}

#[test]
fn small_cap_leaves_the_case_undecided() {
    let g = library::bubble();
    let b = FourLegBasis { masses: vec![int(1), int(1)], leg_masses: [int(0), int(0), int(0), int(0)], s: rat(399, 100), t: int(0) };
    let z = expand_four_leg(&b, &g).unwrap();
    let cfg = DecideConfig { cap: 20, ..DecideConfig::default() };
    match decide(&g, &z, &cfg).unwrap() {
        Certificate::Undecided { report, grid_minimum, .. } => {
            assert_eq!(report.cap, 20);
            assert_eq!(report.trajectory.len(), 21);
            assert!(grid_minimum.unwrap() >= 0.0);
        }
        other => panic!("expected undecided, got exit code {}", other.exit_code()),
    }
    let strict = DecideConfig { mode: PolyaMode::Strict, ..DecideConfig::default() };
    match decide(&g, &z, &strict).unwrap() {
        Certificate::CopositiveInterior { polya, .. } => assert_eq!(polya.mode, PolyaMode::Strict),
        other => panic!("expected a certificate, got exit code {}", other.exit_code()),
    }
}
