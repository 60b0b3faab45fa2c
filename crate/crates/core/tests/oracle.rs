mod common;

use qdtransfer::hamiltonians::{BasisState, HermitianMatrix};
use qdtransfer::lossmodels::Which;
use qdtransfer::oracle::*;
use qdtransfer::params::HBAR;
use qdtransfer::sweep::landau_zener;
use qdtransfer::{CVector, C64};

fn driven(t: f64) -> HermitianMatrix {
    let labels = vec![BasisState::Level("a"), BasisState::Level("b")];
    let mut h = HermitianMatrix::zeros(labels);
    h.set(0, 0, C64::new(5.0 * t, 0.0));
    h.set(1, 1, C64::new(-5.0 * t, 0.0));
    h.set(0, 1, C64::new(1.0 + t * t, 0.5 * t));
    h
}

#[test]
fn midpoint_rule_is_second_order() {
    let psi0 = CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    let end = |n| propagate(driven, &psi0, &uniform_grid(0.0, 2.0, n), 1.0).unwrap().state;
    let reference = end(20000);
    let errs: Vec<f64> = [100, 200, 400].iter().map(|&n| (end(n) - &reference).norm()).collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.2, "order {order}");
    }
}

#[test]
fn landau_zener_limit() {
    for speed in [300.0, 1000.0, 3000.0] {
        let gap = 10.0;
        let num = landau_zener_numeric(gap, speed, HBAR, 20.0, 8000).unwrap();
        let exact = landau_zener(gap, speed, HBAR);
        assert!((num / exact - 1.0).abs() < 0.03, "{speed}: {num} vs {exact}");
    }
}

#[test]
fn grid_endpoints_are_exact() {
    let g = uniform_grid(0.1, 0.7, 3);
    assert_eq!(g.len(), 4);
    assert_eq!(g[0], 0.1);
    assert_eq!(g[3], 0.7);
}

fn scaled(k: f64) -> qdtransfer::protocol::ProtocolRun {
    let mut run = common::weak().clone();
    for s in &mut run.schedule.segments {
        s.speed *= k;
    }
    run
}

#[test]
fn slow_sweeps_are_adiabatic() {
    let run = scaled(0.1);
    for w in [Which::Psi1, Which::Psi2] {
        let f = transfer_fidelity(&run, w, 2e-4).unwrap();
        assert!(f >= 0.999, "{w:?}: {f}");
    }
}

#[test]
fn fast_sweeps_are_diabatic() {
    let run = scaled(100.0);
    let f = transfer_fidelity(&run, Which::Psi2, 1e-6).unwrap();
    assert!(f < 0.9, "{f}");
}
