mod common;

use proptest::prelude::*;

use qdtransfer::config::{parse_config, parse_config_with, serialize};
use qdtransfer::params::ExcitationPoint;
use qdtransfer::{DeviceParams, ProtocolConfig};

proptest! {
    #[test]
    fn serialize_round_trips(
        tc in 1.0f64..500.0,
        b in 0.1f64..10.0,
        eps_dd in -5000.0f64..0.0,
        tau in 0.01f64..100.0,
        p_lz in 1e-4f64..0.5,
        ep in -500.0f64..0.0,
    ) {
        let p = DeviceParams { t_c: tc, b_field: b, eps_dd, tau, ..DeviceParams::default() };
        let c = ProtocolConfig { p_lz, excitation: ExcitationPoint::Fixed(ep), ..ProtocolConfig::single_spin() };
        let (p2, c2) = parse_config(&serialize(&p, &c)).unwrap();
        prop_assert_eq!(p, p2);
        prop_assert_eq!(c, c2);
    }
}

#[test]
fn bundled_configs_parse() {
    for name in ["single-spin-150.conf", "single-spin-50.conf", "singlet-triplet.conf"] {
        let (p, c) = common::config(name);
        p.validate().unwrap();
        c.validate().unwrap();
    }
    let (p, c) = common::config("singlet-triplet.conf");
    assert_eq!(c.excitation, ExcitationPoint::Auto);
    assert!((p.eps_dd + 2030.0).abs() < 1e-9);
}

#[test]
fn overrides_win() {
    let (p, c) = parse_config_with("t_c = 50 ueV\n", &[("t_c".into(), "0.2 meV".into()), ("p_lz".into(), "2%".into())]).unwrap();
    assert!((p.t_c - 200.0).abs() < 1e-9);
    assert!((c.p_lz - 0.02).abs() < 1e-15);
}

#[test]
fn errors_carry_line_numbers() {
    let err = parse_config("t_c = 50 ueV\nbogus = 3\n").unwrap_err();
    assert!(err.to_string().starts_with("line 2"), "{err}");
    assert!(parse_config("t_c = -1 ueV\n").is_err());
    assert!(parse_config("t_c = 5 T\n").is_err());
}
