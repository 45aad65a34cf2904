use std::f64::consts::PI;

use maglattice::config::ConfigDocument;
use maglattice::units;
use maglattice::{parse_config, ErrorKind, LatticeConfig};
use proptest::prelude::*;

const ONE_MICRON: &str = "
# 1 µm lattice
hole_size_um = 1
separation_um = 1
film_thickness_um = 2
magnetization_kG = 3
bias_z_G = 10
";

#[test]
fn one_micron_document_parses_to_si() {
    let run = parse_config(ONE_MICRON).unwrap();
    assert_eq!(run.lattice.hole_size, 1e-6);
    assert_eq!(run.lattice.film_thickness, 2e-6);
    assert!((run.lattice.magnetization - 0.3).abs() < 1e-15);
    assert!((run.lattice.bias.z - 1e-3).abs() < 1e-18);
    let rf = run.lattice.reference_field();
    assert!((rf.b_o - 0.3 / PI).abs() < 1e-15);
    assert!((rf.b_ref / rf.b_o - (1.0 - (-2.0 * PI).exp())).abs() < 1e-15);
    assert!((rf.beta - PI * 1e6).abs() < 1e-6);
}

#[test]
fn unequal_holes_and_strips_are_rejected() {
    let err = parse_config("hole_size_um = 2\nseparation_um = 1\n").unwrap_err();
    assert_eq!(err.kind(), ErrorKind::Config);
}

#[test]
fn malformed_lines_and_negative_lengths_are_rejected() {
    for doc in [
        "hole_size_um 1",
        "film_thickness_um = -2",
        "nonsense_key = 1",
        "bias_x_G = ten",
    ] {
        assert!(parse_config(doc).is_err(), "{doc}");
    }
}

#[test]
fn omitted_species_defaults_to_rubidium() {
    let run = parse_config(ONE_MICRON).unwrap();
    assert_eq!(run.species.mass, 1.443_16e-25);
    assert_eq!(run.species.scattering_length, 5.29e-9);
    assert_eq!(run.species.lande_g * run.species.m_f, 1.0);
    let hbar = 1.054_571_817e-34;
    let g = 4.0 * PI * hbar * hbar * 5.29e-9 / 1.443_16e-25;
    assert!((run.species.interaction_strength() - g).abs() < 1e-14 * g);
}

#[test]
fn overrides_replace_file_values() {
    let mut doc = ConfigDocument::parse(ONE_MICRON).unwrap();
    doc.set_override("bias_z_G=4").unwrap();
    assert_eq!(doc.get("bias_z_G"), Some("4"));
    assert!((doc.resolve().unwrap().lattice.bias.z - 4e-4).abs() < 1e-18);
    assert!(doc.set_override("bias_z_G").is_err());
}

#[test]
fn reference_field_grows_with_thickness() {
    let mut previous = 0.0;
    for i in 1..50 {
        let cfg =
            LatticeConfig::from_lab_units(1.0, 1.0, 0.05 * i as f64, 3.0, [0.0; 3], 5).unwrap();
        let b = cfg.reference_field().b_ref;
        assert!(b > previous);
        previous = b;
    }
    let thick = LatticeConfig::from_lab_units(1.0, 1.0, 40.0, 3.0, [0.0; 3], 5)
        .unwrap()
        .reference_field();
    assert!((thick.b_ref - thick.b_o).abs() < 1e-15 * thick.b_o);
}

proptest! {
    #[test]
    fn unit_conversions_round_trip(v in -1e6..1e6f64) {
        let tol = 1e-12 * v.abs().max(f64::MIN_POSITIVE);
        prop_assert!((units::tesla_to_gauss(units::gauss_to_tesla(v)) - v).abs() <= tol);
        prop_assert!((units::tesla_to_kilogauss(units::kilogauss_to_tesla(v)) - v).abs() <= tol);
        prop_assert!((units::m_to_um(units::um_to_m(v)) - v).abs() <= tol);
        prop_assert!((units::m_to_nm(units::nm_to_m(v)) - v).abs() <= tol);
    }
}
